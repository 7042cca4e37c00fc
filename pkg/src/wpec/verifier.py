"""Exhaustive fault enumeration for the 49-qubit weight-parity protocol.

Two engines live here, both working on the Z side of the CSS split (the
X side is its exact dual and is exercised separately at small scale).

The first engine enumerates every combination of up to ``max_faults``
single faults on the Z-type measurement circuits, collapses each
combination to a record (first-level syndrome, second-level syndrome,
block triviality, cumulative flags, block parity), and audits the
resulting lookup table.  Within each (second-level syndrome, block
triviality) partition, either every record carries an equivalent block
parity (Condition 1), or records with inequivalent parities differ in
their (syndrome, flags) pair (Condition 2).  A partition failing both is
reported as a violation together with witness fault combinations.

The second engine scans fault combinations straddling the final
measurement rounds, where part of the damage is invisible to the
recorded syndromes.  Each combination splits into an early part (still
visible to the last round) and a late part.  Combinations passing three
relaxed detectability conditions are marked, and every marked
combination is then re-analyzed against its possible wait-error
completions to bound the weight of the residual error it can leave.

Enumeration runs as bulk XOR arithmetic on packed uint64 signatures:
bits 0-6 hold the block parity (stored canonically, as the minimum over
the eight stabilizer parity patterns), bits 7-27 the flag vector, and
bits 28-48 the first-level syndrome.  Canonicalizing the parity early is
sound because the canonical class of an XOR depends only on the
canonical classes of its inputs.
"""

from __future__ import annotations

import functools
import itertools
import math
import multiprocessing
import os
from dataclasses import dataclass

import numpy as np

from .circuits import (
    dedup_effects,
    enumerate_single_faults,
    flag_flip_atoms,
    level1_circuits,
    level2_circuits,
    wait_fault_atoms,
)
from .codes import (
    BLOCK_MIN_WT,
    LEVEL1_GENS,
    PCANON,
    STAB7,
    block_parity,
    level1_syndrome,
    min_coset_rep,
    min_coset_weight,
    syndrome7,
    tau_from_syndrome,
)
from .pauli import PauliOp, format_bits

__all__ = [
    "FaultAtom",
    "FaultModel",
    "FaultNumberCombination",
    "FaultCombination",
    "LookupTable",
    "Claim2Violation",
    "Claim2Report",
    "MarkedCombination",
    "CompletionAnalysis",
    "FinalRoundReport",
    "Table1Row",
    "TABLE1_GOLDEN",
    "build_lookup_table",
    "verify_claim2",
    "fault_model",
    "find_fault_combination",
    "pack_signature",
    "sigma",
    "relaxed_mark",
    "run_appendix_b",
    "reproduce_table1",
    "render_table1",
]

_P_MASK = 127
_F_MASK = (1 << 21) - 1
_S_MASK = (1 << 21) - 1
_F_SHIFT = 7
_S_SHIFT = 28

_PCANON_U64 = np.array(PCANON, dtype=np.uint64)
_SYND7_U64 = np.array([syndrome7(p) for p in range(128)], dtype=np.uint64)
_BLOCK_WT_U16 = np.array(BLOCK_MIN_WT, dtype=np.uint16)


def pack_signature(error_mask: int, flag: int) -> int:
    """Pack a Z-error mask and flag vector into a table signature.

    The block parity is canonicalized, so two fault combinations receive
    the same signature exactly when their records are indistinguishable
    to the decoder (equal syndrome, equal flags, equivalent parity).
    """
    p = PCANON[block_parity(error_mask)]
    return p | (flag << _F_SHIFT) | (level1_syndrome(error_mask) << _S_SHIFT)


def _canon_sig(sig: int) -> int:
    return (sig & ~_P_MASK) | PCANON[sig & _P_MASK]


def _canon_sig_array(sigs: np.ndarray) -> np.ndarray:
    return (sigs & np.uint64(~_P_MASK & (2**64 - 1))) | _PCANON_U64[sigs & np.uint64(_P_MASK)]


# ---------------------------------------------------------------------------
# Fault atoms and the single-fault model


@dataclass(frozen=True)
class FaultAtom:
    """One deduplicated single-fault effect: a Z mask plus raised flags."""

    label: str
    error: int
    flag: int

    @property
    def signature(self) -> int:
        return pack_signature(self.error, self.flag)


@dataclass(frozen=True)
class FaultModel:
    """Per-circuit pools of distinct single-fault effects, Z side.

    gate1 holds one pool per first-level extraction circuit, gate2 one
    pool per second-level circuit.  wait covers single-qubit Z errors
    during idle time (input errors are modeled the same way), flag the
    single flag-measurement flips.
    """

    gate1: tuple[tuple[str, tuple[FaultAtom, ...]], ...]
    gate2: tuple[tuple[str, tuple[FaultAtom, ...]], ...]
    wait: tuple[FaultAtom, ...]
    flag: tuple[FaultAtom, ...]
    flagged: bool
    interleaved: bool

    def gate1_atoms(self) -> tuple[FaultAtom, ...]:
        return tuple(a for _, pool in self.gate1 for a in pool)

    def gate2_atoms(self) -> tuple[FaultAtom, ...]:
        return tuple(a for _, pool in self.gate2 for a in pool)

    def all_atoms(self) -> tuple[FaultAtom, ...]:
        return self.gate1_atoms() + self.gate2_atoms() + self.wait + self.flag

    def pool_sizes(self) -> dict[str, int]:
        return {
            "G1": sum(len(pool) for _, pool in self.gate1),
            "G2": sum(len(pool) for _, pool in self.gate2),
            "W": len(self.wait),
            "F": len(self.flag),
        }

    def signature_pool(self) -> np.ndarray:
        """Distinct nonzero signatures over every atom in the model."""
        sigs = np.array([a.signature for a in self.all_atoms()], dtype=np.uint64)
        sigs = np.unique(sigs)
        return sigs[sigs != 0]


@functools.lru_cache(maxsize=None)
def fault_model(flagged: bool = True, interleaved: bool = True) -> FaultModel:
    """Build the Z-side single-fault pools for the chosen circuit family."""
    g1 = []
    for c in level1_circuits("z", flagged=flagged):
        pool = tuple(
            FaultAtom(f"G1[{c.name}]@{f.position}:{f.local}", f.data_z, f.flag21)
            for f in dedup_effects(enumerate_single_faults(c))
        )
        g1.append((c.name, pool))
    g2 = []
    for c in level2_circuits("z", interleaved=interleaved):
        pool = tuple(
            FaultAtom(f"G2[{c.name}]@{f.position}:{f.local}", f.data_z, f.flag21)
            for f in dedup_effects(enumerate_single_faults(c))
        )
        g2.append((c.name, pool))
    wait = tuple(
        FaultAtom(f"W[{f.local}]", f.data_z, 0) for f in wait_fault_atoms("z")
    )
    flag = (
        tuple(FaultAtom(f"F[{f.local}]", 0, f.flag21) for f in flag_flip_atoms())
        if flagged
        else ()
    )
    return FaultModel(tuple(g1), tuple(g2), wait, flag, flagged, interleaved)


# ---------------------------------------------------------------------------
# Fault counting types


@dataclass(frozen=True)
class FaultNumberCombination:
    """How many faults of each kind participate in a combination.

    The final-round scan distinguishes early (a) from late (b) gate
    faults on first-level circuits; the lookup-table build does not, and
    uses v_g1a for all first-level gate faults with v_g1b = v_s = 0.
    """

    v_g1a: int = 0
    v_g1b: int = 0
    v_g2: int = 0
    v_w: int = 0
    v_f: int = 0
    v_s: int = 0

    def __post_init__(self) -> None:
        for name, value in self.as_dict().items():
            if value < 0:
                raise ValueError(f"{name} must be non-negative, got {value}")
        if self.total > 3:
            raise ValueError(f"at most 3 faults supported, got {self.total}")

    def as_dict(self) -> dict[str, int]:
        return {
            "v_g1a": self.v_g1a,
            "v_g1b": self.v_g1b,
            "v_g2": self.v_g2,
            "v_w": self.v_w,
            "v_f": self.v_f,
            "v_s": self.v_s,
        }

    @property
    def total(self) -> int:
        return self.v_g1a + self.v_g1b + self.v_g2 + self.v_w + self.v_f + self.v_s

    def __str__(self) -> str:
        return (
            f"(G1a {self.v_g1a}, G1b {self.v_g1b}, G2 {self.v_g2}, "
            f"W {self.v_w}, F {self.v_f}, S {self.v_s})"
        )


@dataclass(frozen=True)
class FaultCombination:
    """A concrete multiset of faults collapsed to its combined effect.

    error is the full data error; flag is 21 bits for lookup-table
    records and 42 bits for the final-round scan (low half from early
    circuits, high half from late ones).  error_a, when set, is the part
    of the error still visible to the last measurement round.
    """

    counts: FaultNumberCombination
    error: PauliOp
    flag: int = 0
    faults: tuple[str, ...] = ()
    error_a: PauliOp | None = None

    @property
    def early_error(self) -> PauliOp:
        return self.error if self.error_a is None else self.error_a


def _multiset_count(size: int, v: int) -> int:
    if v == 0:
        return 1
    if size == 0:
        return 0
    return math.comb(size + v - 1, v)


def combination_counts(
    model: FaultModel, max_faults: int
) -> tuple[tuple[FaultNumberCombination, int], ...]:
    """Effect-multiset counts per fault-number combination.

    Counts are multisets of deduplicated single-fault effects: a category
    holding n distinct effects contributes C(n+v-1, v) choices for v
    faults.  Raw location-level counts would be larger (many faults share
    an effect) but add no records to the table.
    """
    sizes = model.pool_sizes()
    out = []
    for v1 in range(max_faults + 1):
        for v2 in range(max_faults + 1 - v1):
            for vw in range(max_faults + 1 - v1 - v2):
                for vf in range(max_faults + 1 - v1 - v2 - vw):
                    n = (
                        _multiset_count(sizes["G1"], v1)
                        * _multiset_count(sizes["G2"], v2)
                        * _multiset_count(sizes["W"], vw)
                        * _multiset_count(sizes["F"], vf)
                    )
                    fnc = FaultNumberCombination(v_g1a=v1, v_g2=v2, v_w=vw, v_f=vf)
                    out.append((fnc, n))
    return tuple(out)


# ---------------------------------------------------------------------------
# Signature set arithmetic

_CROSS_LEFT: np.ndarray | None = None
_CROSS_RIGHT: np.ndarray | None = None


def _cross_init(left: np.ndarray, right: np.ndarray) -> None:
    global _CROSS_LEFT, _CROSS_RIGHT
    _CROSS_LEFT, _CROSS_RIGHT = left, right


def _cross_chunk(bounds: tuple[int, int]) -> np.ndarray:
    lo, hi = bounds
    block = _CROSS_LEFT[lo:hi, None] ^ _CROSS_RIGHT[None, :]
    return np.unique(_canon_sig_array(block.reshape(-1)))


def _pair_signatures(q: np.ndarray) -> np.ndarray:
    """Distinct canonical signatures of XORs over unordered sig pairs."""
    if len(q) < 2:
        return np.zeros(0, dtype=np.uint64)
    i, j = np.triu_indices(len(q), k=1)
    return np.unique(_canon_sig_array(q[i] ^ q[j]))


def _resolve_workers(workers: int | None) -> int:
    if workers is None:
        env = os.environ.get("WPEC_WORKERS", "")
        workers = int(env) if env.strip() else 1
    return max(1, workers)


def _cross_signatures(
    left: np.ndarray, right: np.ndarray, workers: int
) -> np.ndarray:
    """Distinct canonical signatures of all left XOR right combinations.

    Chunked over the left operand; the merge is a set union, so the
    result does not depend on chunking or worker count.
    """
    if len(left) == 0 or len(right) == 0:
        return np.zeros(0, dtype=np.uint64)
    rows = max(1, 2_000_000 // len(right))
    rows = min(rows, max(1, -(-len(left) // max(1, 4 * workers))))
    bounds = [(lo, min(lo + rows, len(left))) for lo in range(0, len(left), rows)]
    if workers == 1 or len(bounds) == 1:
        _cross_init(left, right)
        parts = [_cross_chunk(b) for b in bounds]
    else:
        ctx = multiprocessing.get_context("fork")
        with ctx.Pool(workers, initializer=_cross_init, initargs=(left, right)) as pool:
            parts = pool.map(_cross_chunk, bounds)
    return np.unique(np.concatenate(parts))


def _keys_from_sigs(sigs: np.ndarray) -> np.ndarray:
    """Repack signatures as sort keys (s-tilde, tau, s, f, p), ascending."""
    p = sigs & np.uint64(_P_MASK)
    f = (sigs >> np.uint64(_F_SHIFT)) & np.uint64(_F_MASK)
    s = sigs >> np.uint64(_S_SHIFT)
    stilde = _SYND7_U64[p]
    tau = np.zeros(len(sigs), dtype=np.uint64)
    for b in range(7):
        nonzero = ((s >> np.uint64(3 * b)) & np.uint64(7)) != 0
        tau |= nonzero.astype(np.uint64) << np.uint64(b)
    keys = (stilde << np.uint64(56)) | (tau << np.uint64(49))
    keys |= (s << np.uint64(28)) | (f << np.uint64(7)) | p
    keys.sort()
    return keys


def _key_fields(key: int) -> tuple[int, int, int, int, int]:
    """(stilde, tau, s, f, p) from a sort key."""
    return (
        (key >> 56) & 7,
        (key >> 49) & 127,
        (key >> 28) & _S_MASK,
        (key >> 7) & _F_MASK,
        key & _P_MASK,
    )


def _sig_from_key(key: int) -> int:
    stilde, tau, s, f, p = _key_fields(key)
    return p | (f << _F_SHIFT) | (s << _S_SHIFT)


# ---------------------------------------------------------------------------
# Lookup table


class LookupTable:
    """Sorted record set mapping observations to block parities.

    Each record is one achievable (syndrome, second-level syndrome,
    triviality, flags, canonical parity) tuple for at most max_faults
    faults.  Records are grouped by (second-level syndrome, triviality);
    a group whose records all share one canonical parity answers lookups
    unconditionally, otherwise the (syndrome, flags) pair selects the
    record.
    """

    def __init__(
        self,
        max_faults: int,
        flagged: bool,
        interleaved: bool,
        keys: np.ndarray,
        counts: tuple[tuple[FaultNumberCombination, int], ...],
    ) -> None:
        self.max_faults = max_faults
        self.flagged = flagged
        self.interleaved = interleaved
        self.keys = keys
        self.combination_counts = counts
        high = keys >> np.uint64(49)
        starts = np.concatenate([[0], np.flatnonzero(np.diff(high)) + 1])
        self._group_start = starts
        self._group_end = np.concatenate([starts[1:], [len(keys)]])
        self._group_high = high[starts]
        p = keys & np.uint64(_P_MASK)
        pmin = np.minimum.reduceat(p, starts)
        pmax = np.maximum.reduceat(p, starts)
        self._group_parity = np.where(pmin == pmax, pmin.astype(np.int64), -1)

    @property
    def n_records(self) -> int:
        return len(self.keys)

    @property
    def n_groups(self) -> int:
        return len(self._group_high)

    def _group_index(self, stilde: int, tau: int) -> int | None:
        high = (stilde << 7) | tau
        g = int(np.searchsorted(self._group_high, high))
        if g == len(self._group_high) or int(self._group_high[g]) != high:
            return None
        return g

    def lookup_parity(self, stilde: int, tau: int, s: int, f: int) -> int | None:
        """Block parity for an observation, or None when out of table.

        A uniform-parity group answers directly.  A mixed group requires
        an exact (syndrome, flags) match; a miss means the observation
        cannot come from at most max_faults faults, and the caller falls
        back to its out-of-table correction path.
        """
        g = self._group_index(stilde, tau)
        if g is None:
            return None
        par = int(self._group_parity[g])
        if par >= 0:
            return par
        base = ((stilde << 7 | tau) << 49) | (s << 28) | (f << 7)
        lo = int(np.searchsorted(self.keys, base))
        if lo < len(self.keys) and int(self.keys[lo]) >> 7 == base >> 7:
            return int(self.keys[lo]) & _P_MASK
        return None

    def violated_prefixes(self) -> np.ndarray:
        """Distinct (stilde, tau, s, f) prefixes holding inequivalent parities."""
        if len(self.keys) < 2:
            return np.zeros(0, dtype=np.uint64)
        d = self.keys[1:] ^ self.keys[:-1]
        bad = np.flatnonzero((d >> np.uint64(7)) == 0)
        return np.unique(self.keys[bad] >> np.uint64(7))

    def group_tags(self) -> tuple[str, ...]:
        """'1' uniform parity, '2' disambiguated by (s, f), '!' violated."""
        violated_high = set((self.violated_prefixes() >> np.uint64(42)).tolist())
        tags = []
        for g in range(self.n_groups):
            if int(self._group_high[g]) in violated_high:
                tags.append("!")
            elif int(self._group_parity[g]) >= 0:
                tags.append("1")
            else:
                tags.append("2")
        return tuple(tags)

    def record_lines(self):
        """Yield one formatted line per record: s s2 tau f p tag."""
        tags = self.group_tags()
        for g in range(self.n_groups):
            tag = tags[g]
            for key in self.keys[self._group_start[g] : self._group_end[g]]:
                stilde, tau, s, f, p = _key_fields(int(key))
                yield (
                    f"{format_bits(s, 21)} {format_bits(stilde, 3)} "
                    f"{format_bits(tau, 7)} {format_bits(f, 21)} "
                    f"{format_bits(p, 7)} {tag}"
                )

    def render(self) -> str:
        return "\n".join(self.record_lines()) + "\n"

    def write(self, path: str) -> None:
        """Stream the record lines to a file (tables can run to millions)."""
        with open(path, "w") as fh:
            for line in self.record_lines():
                fh.write(line)
                fh.write("\n")


def build_lookup_table(
    max_faults: int = 3,
    *,
    flagged: bool = True,
    interleaved: bool = True,
    workers: int | None = None,
) -> LookupTable:
    """Enumerate all fault combinations and build the decoding table.

    Signatures compose by XOR, and a multiset of faults with a repeated
    effect collapses pairwise, so the reachable set for at most v faults
    is the union over k <= v (k matching v mod 2, plus all smaller
    budgets) of XORs of k distinct single-fault signatures.
    """
    if max_faults not in (1, 2, 3):
        raise ValueError(f"max_faults must be 1..3, got {max_faults}")
    workers = _resolve_workers(workers)
    model = fault_model(flagged=flagged, interleaved=interleaved)
    q = model.signature_pool()
    parts = [np.zeros(1, dtype=np.uint64), q]
    if max_faults >= 2:
        p2 = _pair_signatures(q)
        parts.append(p2)
    if max_faults >= 3:
        parts.append(_cross_signatures(p2, q, workers))
    sigs = np.unique(np.concatenate(parts))
    keys = _keys_from_sigs(sigs)
    counts = combination_counts(model, max_faults)
    return LookupTable(max_faults, flagged, interleaved, keys, counts)


# ---------------------------------------------------------------------------
# Witness recovery

_PROVENANCE_CACHE: dict[tuple[bool, bool], "_Provenance"] = {}


class _Provenance:
    """Search structure mapping signatures back to fault combinations."""

    def __init__(self, model: FaultModel) -> None:
        self.atoms = model.all_atoms()
        self.single: dict[int, tuple[int, ...]] = {}
        for idx, atom in enumerate(self.atoms):
            sig = _canon_sig(atom.signature)
            if sig and sig not in self.single:
                self.single[sig] = (idx,)
        reps = sorted(self.single.items())
        self.pairs: dict[int, tuple[int, ...]] = {}
        for (sa, ia), (sb, ib) in itertools.combinations(reps, 2):
            sig = _canon_sig(sa ^ sb)
            if sig not in self.pairs:
                self.pairs[sig] = ia + ib
        self._reps = reps

    def find(self, sig: int) -> tuple[int, ...] | None:
        """Atom indices for up to three faults reproducing a signature."""
        sig = _canon_sig(sig)
        if sig == 0:
            return ()
        if sig in self.single:
            return self.single[sig]
        if sig in self.pairs:
            return self.pairs[sig]
        for sa, ia in self._reps:
            for v in STAB7:
                cand = sa ^ sig ^ v
                if _canon_sig(cand) == cand and cand in self.pairs:
                    return ia + self.pairs[cand]
        return None

    def labels(self, indices: tuple[int, ...]) -> tuple[str, ...]:
        return tuple(self.atoms[i].label for i in indices)


def _provenance(model: FaultModel) -> _Provenance:
    key = (model.flagged, model.interleaved)
    if key not in _PROVENANCE_CACHE:
        _PROVENANCE_CACHE[key] = _Provenance(model)
    return _PROVENANCE_CACHE[key]


def find_fault_combination(table: LookupTable, key: int) -> tuple[str, ...] | None:
    """Recover one fault combination producing a table record's signature."""
    model = fault_model(flagged=table.flagged, interleaved=table.interleaved)
    prov = _provenance(model)
    found = prov.find(_sig_from_key(key))
    return None if found is None else prov.labels(found)


# ---------------------------------------------------------------------------
# Lookup-table audit


@dataclass(frozen=True)
class Claim2Violation:
    """A (stilde, tau, s, f) cell holding two inequivalent parities."""

    stilde: int
    tau: int
    s: int
    f: int
    parity_a: int
    parity_b: int
    witness_a: tuple[str, ...]
    witness_b: tuple[str, ...]

    @property
    def identity(self) -> tuple[int, int, int, int]:
        return (self.stilde, self.tau, self.s, self.f)

    def render(self) -> str:
        return (
            f"s={format_bits(self.s, 21)} s2={format_bits(self.stilde, 3)} "
            f"tau={format_bits(self.tau, 7)} f={format_bits(self.f, 21)}\n"
            f"  parity {format_bits(self.parity_a, 7)} from: "
            + (", ".join(self.witness_a) if self.witness_a else "<no faults>")
            + f"\n  parity {format_bits(self.parity_b, 7)} from: "
            + (", ".join(self.witness_b) if self.witness_b else "<no faults>")
        )


@dataclass(frozen=True)
class Claim2Report:
    max_faults: int
    flagged: bool
    interleaved: bool
    n_records: int
    n_groups: int
    n_condition1: int
    n_condition2: int
    n_violated_groups: int
    n_violations: int
    violations: tuple[Claim2Violation, ...]
    violation_identities: frozenset[tuple[int, int, int, int]]
    combination_counts: tuple[tuple[FaultNumberCombination, int], ...]

    @property
    def ok(self) -> bool:
        return self.n_violations == 0

    def render(self) -> str:
        lines = [
            f"lookup-table audit, fault budget {self.max_faults}",
            f"circuits: level-2 {'interleaved' if self.interleaved else 'blockwise'}, "
            f"level-1 {'flagged' if self.flagged else 'flagless'}",
            f"records: {self.n_records}",
            f"partitions: {self.n_groups} "
            f"(condition 1: {self.n_condition1}, condition 2: {self.n_condition2}, "
            f"violated: {self.n_violated_groups})",
            "fault-number combinations (effect multisets):",
        ]
        for fnc, n in self.combination_counts:
            lines.append(f"  {fnc}: {n}")
        lines.append(f"violations: {self.n_violations}")
        for i, v in enumerate(self.violations, 1):
            lines.append(f"[{i}] " + v.render())
        if self.n_violations > len(self.violations):
            lines.append(
                f"... {self.n_violations - len(self.violations)} further "
                "violations not expanded"
            )
        return "\n".join(lines) + "\n"


def verify_claim2(table: LookupTable, *, max_witnesses: int = 20) -> Claim2Report:
    """Audit a lookup table against the two decodability conditions.

    Any (stilde, tau, s, f) cell containing two inequivalent block
    parities defeats both conditions; each such cell is reported with
    one witness fault combination per parity.
    """
    prefixes = table.violated_prefixes()
    tags = table.group_tags()
    violations = []
    for prefix in prefixes[:max_witnesses]:
        base = int(prefix) << 7
        lo = int(np.searchsorted(table.keys, base))
        key_a = int(table.keys[lo])
        key_b = int(table.keys[lo + 1])
        stilde, tau, s, f, parity_a = _key_fields(key_a)
        parity_b = _key_fields(key_b)[4]
        found_a = find_fault_combination(table, key_a)
        found_b = find_fault_combination(table, key_b)
        witness_a = ("<unresolved>",) if found_a is None else found_a
        witness_b = ("<unresolved>",) if found_b is None else found_b
        violations.append(
            Claim2Violation(stilde, tau, s, f, parity_a, parity_b, witness_a, witness_b)
        )
    identities = frozenset(
        (
            (int(p) >> 49) & 7,
            (int(p) >> 42) & 127,
            (int(p) >> 21) & _S_MASK,
            int(p) & _F_MASK,
        )
        for p in prefixes
    )
    return Claim2Report(
        max_faults=table.max_faults,
        flagged=table.flagged,
        interleaved=table.interleaved,
        n_records=table.n_records,
        n_groups=table.n_groups,
        n_condition1=tags.count("1"),
        n_condition2=tags.count("2"),
        n_violated_groups=tags.count("!"),
        n_violations=len(prefixes),
        violations=tuple(violations),
        violation_identities=identities,
        combination_counts=table.combination_counts,
    )


# ---------------------------------------------------------------------------
# Final-round scan (relaxed conditions and post-analysis)


def sigma(error: PauliOp | int, v_w: int) -> int:
    """Sum of the 7 - v_w smallest per-block syndrome Hamming weights.

    Wait errors can hide the syndromes of at most v_w subblocks, so only
    the smallest weights of the remaining blocks are charged against the
    measurement-flip budget.
    """
    if not 0 <= v_w <= 7:
        raise ValueError(f"v_w must be within 0..7, got {v_w}")
    if isinstance(error, PauliOp):
        if error.x_bits:
            raise ValueError("sigma expects a Z-type operator")
        mask = error.z_bits
    else:
        mask = error
    s = level1_syndrome(mask)
    weights = sorted(((s >> (3 * b)) & 7).bit_count() for b in range(7))
    return sum(weights[: 7 - v_w])


def relaxed_mark(fc: FaultCombination, max_faults: int = 3) -> bool:
    """Apply the three relaxed detectability conditions to a combination.

    Marked combinations could in principle keep the outcome bundle
    stable (conditions 1 and 2) while leaving a residual error heavier
    than the fault budget (condition 3, weight minimized over the
    stabilizer group).  Marking over-approximates danger; the
    post-analysis refines it.
    """
    if fc.error.x_bits or (fc.error_a is not None and fc.error_a.x_bits):
        raise ValueError("relaxed_mark expects Z-type errors")
    if sigma(fc.early_error, fc.counts.v_w) > fc.counts.v_s:
        return False
    if fc.flag.bit_count() > fc.counts.v_f:
        return False
    return min_coset_weight(fc.error.z_bits) + fc.counts.v_w > max_faults


@dataclass(frozen=True)
class MarkedCombination:
    combination: FaultCombination
    min_weight: int

    def render(self) -> str:
        fc = self.combination
        rep = min_coset_rep(fc.error.z_bits)
        fa = fc.flag & _F_MASK
        fb = fc.flag >> 21
        return (
            f"counts {fc.counts}\n"
            f"    early error : {PauliOp.z_op(49, fc.early_error.z_bits).block_form()}\n"
            f"    full error  : {PauliOp.z_op(49, fc.error.z_bits).block_form()}\n"
            f"    flags       : early {format_bits(fa, 21)} late {format_bits(fb, 21)}\n"
            f"    residual rep: {PauliOp.z_op(49, rep).block_form()} "
            f"(weight {self.min_weight})\n"
            f"    witnesses   : "
            + (", ".join(fc.faults) if fc.faults else "<identity>")
        )


@dataclass(frozen=True)
class CompletionAnalysis:
    """Exact wait-error completion check for one marked combination.

    A marked combination only matters if some placement of its v_w wait
    errors keeps the observed syndrome within the measurement-flip
    budget.  Every such completion is enumerated; worst_residual is the
    heaviest residual weight (coset-minimized, plus the late wait
    errors) any of them leaves.
    """

    feasible_completions: int
    worst_residual: int | None
    harmful: bool

    def render(self) -> str:
        if self.worst_residual is None:
            return "no feasible completion: bundle cannot appear stable"
        verdict = "HARMFUL" if self.harmful else "safe"
        return (
            f"feasible completions: {self.feasible_completions}, "
            f"worst residual weight: {self.worst_residual} -> {verdict}"
        )


@dataclass(frozen=True)
class FinalRoundReport:
    max_faults: int
    n_number_combinations: int
    n_effect_combinations: int
    marked: tuple[MarkedCombination, ...]
    analyses: tuple[CompletionAnalysis, ...]

    @property
    def all_safe(self) -> bool:
        return all(not a.harmful for a in self.analyses)

    def render(self) -> str:
        lines = [
            f"final-round fault scan, fault budget {self.max_faults}",
            f"fault-number combinations scanned: {self.n_number_combinations}",
            f"effect combinations examined: {self.n_effect_combinations}",
            f"marked: {len(self.marked)}",
        ]
        for i, (m, a) in enumerate(zip(self.marked, self.analyses), 1):
            lines.append(f"[{i}] " + m.render())
            lines.append("    post-analysis: " + a.render())
        if self.all_safe:
            lines.append(
                "post-analysis: no marked combination leaves residual weight "
                f"above {self.max_faults}"
            )
        else:
            lines.append("post-analysis: HARMFUL combinations found")
        return "\n".join(lines) + "\n"


def _popcount(arr: np.ndarray) -> np.ndarray:
    return np.bitwise_count(arr)


def _level1_syndrome_vec(masks: np.ndarray) -> np.ndarray:
    s = np.zeros(len(masks), dtype=np.uint64)
    for j, g in enumerate(LEVEL1_GENS):
        s |= (_popcount(masks & np.uint64(g)) & np.uint64(1)) << np.uint64(j)
    return s


def _sigma_vec(masks: np.ndarray, v_w: int) -> np.ndarray:
    s = _level1_syndrome_vec(masks)
    w = np.empty((len(masks), 7), dtype=np.uint8)
    for b in range(7):
        w[:, b] = _popcount((s >> np.uint64(3 * b)) & np.uint64(7)).astype(np.uint8)
    w.sort(axis=1)
    return w[:, : 7 - v_w].sum(axis=1, dtype=np.uint16)


def _min_coset_weight_vec(masks: np.ndarray) -> np.ndarray:
    best = None
    for pat in STAB7:
        tot = np.zeros(len(masks), dtype=np.uint16)
        for b in range(7):
            blk = ((masks >> np.uint64(7 * b)) & np.uint64(127)).astype(np.intp)
            tot += _BLOCK_WT_U16[(pat >> b) & 1, blk]
        best = tot if best is None else np.minimum(best, tot)
    return best


def _triple_indices(n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Index arrays (i, j, k) over all i < j < k, built without Python loops."""
    pi, pj = np.triu_indices(n, k=1)
    counts = n - 1 - pj
    keep = counts > 0
    pi, pj, counts = pi[keep], pj[keep], counts[keep]
    rows = np.repeat(np.arange(len(pi)), counts)
    cum = np.concatenate([[0], np.cumsum(counts)])
    offset = np.arange(len(rows)) - cum[rows]
    return pi[rows], pj[rows], pj[rows] + 1 + offset


class _EffectSets:
    """XOR-subset effect arrays (mask, flag) per atom pool and subset size."""

    def __init__(self, atoms: tuple[FaultAtom, ...], flag_shift: int = 0) -> None:
        seen: dict[tuple[int, int], None] = {}
        for a in atoms:
            seen.setdefault((a.error, a.flag << flag_shift), None)
        pairs = sorted(seen)
        self.masks = np.array([m for m, _ in pairs], dtype=np.uint64)
        self.flags = np.array([f for _, f in pairs], dtype=np.uint64)
        self._exact: dict[int, tuple[np.ndarray, np.ndarray]] = {}

    def exact(self, k: int) -> tuple[np.ndarray, np.ndarray]:
        if k not in self._exact:
            n = len(self.masks)
            if k == 0:
                out = (np.zeros(1, dtype=np.uint64), np.zeros(1, dtype=np.uint64))
            elif n < k:
                out = (np.zeros(0, dtype=np.uint64), np.zeros(0, dtype=np.uint64))
            elif k == 1:
                out = (self.masks.copy(), self.flags.copy())
            elif k == 2:
                i, j = np.triu_indices(n, k=1)
                out = (self.masks[i] ^ self.masks[j], self.flags[i] ^ self.flags[j])
            elif k == 3:
                i, j, kk = _triple_indices(n)
                out = (
                    self.masks[i] ^ self.masks[j] ^ self.masks[kk],
                    self.flags[i] ^ self.flags[j] ^ self.flags[kk],
                )
            else:
                raise ValueError(f"subset size {k} not supported")
            self._exact[k] = out
        return self._exact[k]

    def up_to(self, v: int) -> tuple[np.ndarray, np.ndarray]:
        """Deduplicated effects of exactly v faults (sizes v, v-2, ...)."""
        ms, fs = [], []
        for k in range(v, -1, -2):
            m, f = self.exact(k)
            ms.append(m)
            fs.append(f)
        m = np.concatenate(ms)
        f = np.concatenate(fs)
        rec = np.empty(len(m), dtype=[("m", np.uint64), ("f", np.uint64)])
        rec["m"] = m
        rec["f"] = f
        rec = np.unique(rec)
        return rec["m"].copy(), rec["f"].copy()


def _cross_pairs(
    am: np.ndarray, af: np.ndarray, bm: np.ndarray, bf: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """All pairwise XORs of two effect arrays (outer product, flattened)."""
    m = (am[:, None] ^ bm[None, :]).reshape(-1)
    f = (af[:, None] ^ bf[None, :]).reshape(-1)
    return m, f


def run_appendix_b(max_faults: int = 3, *, workers: int | None = None) -> FinalRoundReport:
    """Scan fault combinations straddling the final rounds.

    Gate faults on first-level circuits split into early (label a,
    flags in the low 21 bits) and late (label b, flags in the high 21
    bits); second-level circuits are measured at the start of a round,
    so their faults are all early.  Wait, flag, and measurement-flip
    faults enter arithmetically through their budgets.  For each
    fault-number combination the reachable effects are XOR subsets of
    the deduplicated atom pools; survivors of the three relaxed
    conditions are marked and then post-analyzed exactly.
    """
    del workers  # the scan is fast enough serially; accepted for CLI symmetry
    if max_faults not in (1, 2, 3):
        raise ValueError(f"max_faults must be 1..3, got {max_faults}")
    model = fault_model(flagged=True, interleaved=True)
    early_g1 = _EffectSets(model.gate1_atoms())
    early_g2 = _EffectSets(model.gate2_atoms())
    late_g1 = _EffectSets(model.gate1_atoms(), flag_shift=21)

    marked: list[MarkedCombination] = []
    n_effects = 0
    n_fnc = 0
    for va1 in range(max_faults + 1):
        for vb1 in range(max_faults + 1 - va1):
            for v2 in range(max_faults + 1 - va1 - vb1):
                for vw in range(max_faults + 1 - va1 - vb1 - v2):
                    for vf in range(max_faults + 1 - va1 - vb1 - v2 - vw):
                        for vs in range(max_faults + 1 - va1 - vb1 - v2 - vw - vf):
                            n_fnc += 1
                            fnc = FaultNumberCombination(va1, vb1, v2, vw, vf, vs)
                            found, examined = _scan_number_combination(
                                fnc, early_g1, early_g2, late_g1, max_faults
                            )
                            n_effects += examined
                            marked.extend(found)

    analyses = tuple(_analyze_completions(m, max_faults) for m in marked)
    return FinalRoundReport(
        max_faults=max_faults,
        n_number_combinations=n_fnc,
        n_effect_combinations=n_effects,
        marked=tuple(marked),
        analyses=analyses,
    )


def _scan_number_combination(
    fnc: FaultNumberCombination,
    early_g1: _EffectSets,
    early_g2: _EffectSets,
    late_g1: _EffectSets,
    max_faults: int,
) -> tuple[list[MarkedCombination], int]:
    """Mark survivors of the relaxed conditions for one number combination."""
    g1m, g1f = early_g1.up_to(fnc.v_g1a)
    g2m, g2f = early_g2.up_to(fnc.v_g2)
    am, af = _cross_pairs(g1m, g1f, g2m, g2f)
    bm, bf = late_g1.up_to(fnc.v_g1b)
    examined = len(am) * len(bm)

    keep = _sigma_vec(am, fnc.v_w) <= fnc.v_s
    am, af = am[keep], af[keep]
    if len(am) == 0:
        return [], examined
    keep = _popcount(bf) <= np.uint64(fnc.v_f)
    bm, bf = bm[keep], bf[keep]
    if len(bm) == 0:
        return [], examined

    fullm = (am[:, None] ^ bm[None, :]).reshape(-1)
    fullf = (af[:, None] | bf[None, :]).reshape(-1)  # flag halves are disjoint
    keep = _popcount(fullf) <= np.uint64(fnc.v_f)
    if not keep.any():
        return [], examined
    wmin = np.zeros(len(fullm), dtype=np.uint16)
    wmin[keep] = _min_coset_weight_vec(fullm[keep])
    hot = keep & (wmin.astype(np.int64) + fnc.v_w > max_faults)
    if not hot.any():
        return [], examined

    out = []
    nb = len(bm)
    prov = _scan_provenance()
    seen: set[tuple[int, int, int, int]] = set()
    for flat in np.flatnonzero(hot):
        ia, ib = divmod(int(flat), nb)
        ea, fa = int(am[ia]), int(af[ia])
        eb, fb = int(bm[ib]), int(bf[ib])
        if (ea, fa, eb, fb) in seen:
            continue
        seen.add((ea, fa, eb, fb))
        labels = prov.resolve(fnc, ea, fa, eb, fb)
        fc = FaultCombination(
            counts=fnc,
            error=PauliOp.z_op(49, ea ^ eb),
            flag=fa | fb,
            faults=labels,
            error_a=PauliOp.z_op(49, ea),
        )
        if not relaxed_mark(fc, max_faults):
            raise RuntimeError("vectorized marking disagrees with relaxed_mark")
        out.append(MarkedCombination(fc, int(wmin[flat])))
    return out, examined


class _ScanProvenance:
    """Label recovery for the final-round scan's marked combinations."""

    def __init__(self) -> None:
        model = fault_model(flagged=True, interleaved=True)
        self.g1 = model.gate1_atoms()
        self.g2 = model.gate2_atoms()

    @staticmethod
    def _find(
        atoms: tuple[FaultAtom, ...],
        sizes: list[int],
        mask: int,
        flag: int,
        flag_shift: int,
    ) -> tuple[str, ...] | None:
        for k in sizes:
            for combo in itertools.combinations(atoms, k):
                m = f = 0
                for a in combo:
                    m ^= a.error
                    f ^= a.flag << flag_shift
                if m == mask and f == flag:
                    return tuple(a.label for a in combo)
        return None

    def resolve(
        self, fnc: FaultNumberCombination, ea: int, fa: int, eb: int, fb: int
    ) -> tuple[str, ...]:
        sizes_a1 = list(range(fnc.v_g1a, -1, -2))
        sizes_a2 = list(range(fnc.v_g2, -1, -2))
        sizes_b = list(range(fnc.v_g1b, -1, -2))
        late = self._find(self.g1, sizes_b, eb, fb, 21)
        if late is None:
            return ()
        # split the early effect between the two early categories
        for k1 in sizes_a1:
            for combo in itertools.combinations(self.g1, k1):
                m1 = f1 = 0
                for a in combo:
                    m1 ^= a.error
                    f1 ^= a.flag
                rest = self._find(self.g2, sizes_a2, ea ^ m1, fa ^ f1, 0)
                if rest is not None:
                    labels = tuple(a.label for a in combo) + rest
                    return labels + tuple(f"late:{x}" for x in late)
        return ()


@functools.lru_cache(maxsize=1)
def _scan_provenance() -> _ScanProvenance:
    return _ScanProvenance()


@functools.lru_cache(maxsize=1)
def _wait_effect_sets() -> _EffectSets:
    return _EffectSets(tuple(FaultAtom(f"W[q{q + 1}]", 1 << q, 0) for q in range(49)))


def _analyze_completions(m: MarkedCombination, max_faults: int) -> CompletionAnalysis:
    """Exact harm check: enumerate every wait-error completion.

    The v_w wait errors split into w_a visible before the last round's
    measurements and w_b after.  A completion is feasible when the
    visible part leaves at most v_s flippable syndrome bits; its
    residual is the coset-minimized weight of (early + late + visible
    wait) plus w_b for the invisible wait errors.
    """
    fc = m.combination
    ea = fc.early_error.z_bits
    full = fc.error.z_bits
    v_w, v_s = fc.counts.v_w, fc.counts.v_s
    sets = _wait_effect_sets()
    feasible = 0
    worst: int | None = None
    for w_a in range(v_w + 1):
        w_b = v_w - w_a
        wa_masks, _ = sets.up_to(w_a)
        visible = np.uint64(ea) ^ wa_masks
        ok = _popcount(_level1_syndrome_vec(visible)) <= np.uint64(v_s)
        if not ok.any():
            continue
        residual_masks = np.uint64(full) ^ wa_masks[ok]
        weights = _min_coset_weight_vec(residual_masks).astype(np.int64) + w_b
        feasible += int(ok.sum())
        w = int(weights.max())
        worst = w if worst is None else max(worst, w)
    harmful = worst is not None and worst > max_faults
    return CompletionAnalysis(feasible, worst, harmful)


# ---------------------------------------------------------------------------
# The 13-row single-fault table for the blockwise level-2 circuit


@dataclass(frozen=True)
class Table1Row:
    form: str
    m_values: tuple[int, ...]
    stilde: int
    tau: int
    block_parity: int

    def render(self) -> str:
        m = ",".join(str(v) for v in self.m_values) if self.m_values else "-"
        return (
            f"{self.form}  {m:<6}"
            f"({','.join(format_bits(self.stilde, 3))})  "
            f"({','.join(format_bits(self.tau, 7))})  "
            f"({','.join(format_bits(self.block_parity, 7))})"
        )


def reproduce_table1() -> tuple[Table1Row, ...]:
    """Single-fault error classes of the blockwise second-level circuit.

    An ancilla-line Z after the k-th CNOT lands on every later target,
    so the possible high-weight errors are a partial tail on one support
    block followed by full-Z blocks.  Classes with the same tail-length
    parity share (second-level syndrome, triviality, parity), which is
    what the emitted 13 rows record.  Parities here are literal, not
    canonicalized.
    """
    circ = level2_circuits("z", interleaved=False)[0]
    order = circ.cnot_order
    suffix = [0] * 29
    for k in range(27, -1, -1):
        suffix[k] = suffix[k + 1] | (1 << order[k])
    support = [b for b in range(7) if (circ.target_generator.z_bits >> (7 * b)) & 127]

    def signature(mask: int) -> tuple[int, int, int]:
        p = block_parity(mask)
        return syndrome7(p), tau_from_syndrome(level1_syndrome(mask)), p

    rows = []
    for pos in range(4):
        form = "".join(
            "P" if b == support[pos] else ("Z" if b in support[pos + 1 :] else "I")
            for b in range(7)
        )
        by_m = {m: signature(suffix[7 * pos + 7 - m]) for m in range(1, 8)}
        for m_values in ((7,), (2, 4, 6), (1, 3, 5)):
            sigs = {by_m[m] for m in m_values}
            if len(sigs) != 1:
                raise RuntimeError(f"inconsistent class {form} m={m_values}")
            stilde, tau, p = sigs.pop()
            rows.append(Table1Row(form, m_values, stilde, tau, p))
    rows.append(Table1Row("IIIIIII", (), 0, 0, 0))
    return tuple(rows)


def render_table1(rows: tuple[Table1Row, ...] | None = None) -> str:
    if rows is None:
        rows = reproduce_table1()
    header = "form     m     2nd-level  triviality       block parity"
    return "\n".join([header] + [r.render() for r in rows]) + "\n"


TABLE1_GOLDEN = """\
form     m     2nd-level  triviality       block parity
PIZZZII  7     (0,0,0)  (0,0,0,0,0,0,0)  (1,0,1,1,1,0,0)
PIZZZII  2,4,6 (1,0,0)  (1,0,0,0,0,0,0)  (0,0,1,1,1,0,0)
PIZZZII  1,3,5 (0,0,0)  (1,0,0,0,0,0,0)  (1,0,1,1,1,0,0)
IIPZZII  7     (1,0,0)  (0,0,0,0,0,0,0)  (0,0,1,1,1,0,0)
IIPZZII  2,4,6 (0,0,1)  (0,0,1,0,0,0,0)  (0,0,0,1,1,0,0)
IIPZZII  1,3,5 (1,0,0)  (0,0,1,0,0,0,0)  (0,0,1,1,1,0,0)
IIIPZII  7     (0,0,1)  (0,0,0,0,0,0,0)  (0,0,0,1,1,0,0)
IIIPZII  2,4,6 (1,1,1)  (0,0,0,1,0,0,0)  (0,0,0,0,1,0,0)
IIIPZII  1,3,5 (0,0,1)  (0,0,0,1,0,0,0)  (0,0,0,1,1,0,0)
IIIIPII  7     (1,1,1)  (0,0,0,0,0,0,0)  (0,0,0,0,1,0,0)
IIIIPII  2,4,6 (0,0,0)  (0,0,0,0,1,0,0)  (0,0,0,0,0,0,0)
IIIIPII  1,3,5 (1,1,1)  (0,0,0,0,1,0,0)  (0,0,0,0,1,0,0)
IIIIIII  -     (0,0,0)  (0,0,0,0,0,0,0)  (0,0,0,0,0,0,0)
"""
