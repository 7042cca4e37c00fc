"""Syndrome-extraction circuits and fault propagation.

Two circuit shapes cover all 48 generators:

* outer generators (weight 28): a single bare ancilla and 28 data
  CNOTs, interleaved across the four support subblocks (first qubit of
  each subblock, then the second of each, and so on).  No flag qubit.
* inner generators (weight 4): ancilla plus one flag qubit; the four
  data CNOTs run in plain ascending order with the flag coupled in
  after the first and before the last of them.

Orientation follows the generator family.  A Z-family circuit prepares
the ancilla in |0>, makes it the target of every data CNOT and measures
it in Z, so the outcome collects the X parts of data errors while an
ancilla-line Z spreads Z onto the data qubits of every later CNOT (the
consecutive-form errors).  The flag is a |+> control on the ancilla
measured in X, catching ancilla Z's that pass between its two CNOTs.
X-family circuits are the exact dual (ancilla |+> control, flag |0>
target).

Errors move through a circuit as a Pauli frame.  Per gate, with (xa,
za) the ancilla wire, (xf, zf) the flag wire and q the data qubit:

    Z family   data CNOT: xa ^= x_q;  z_q ^= za
               flag CNOT: xa ^= xf;   zf  ^= za
               outcome = xa, flag = zf
    X family   data CNOT: x_q ^= xa;  za ^= z_q
               flag CNOT: xf ^= xa;   za ^= zf
               outcome = za, flag = xf

Fault positions: -1 injects right after the preparations, i after gate
i (a faulty gate acts ideally and then errs), len(gates) right before
the measurements.  A two-character local error reads (ancilla wire,
other wire); the other wire is the gate's data qubit, or the flag at a
flag CNOT and at the boundary positions.
"""

from __future__ import annotations

import itertools
from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, NamedTuple

from .codes import LEVEL1_GENS, LEVEL2_GENS, N49
from .pauli import BLOCK_SIZE, MASK7, N_BLOCKS, PauliOp

_FLAG = -1  # gate-list entry for a flag CNOT


@dataclass(frozen=True)
class ExtractionCircuit:
    """One generator-measurement circuit, immutable.

    ``gates`` holds data-qubit indices (global, 0-based) with -1 for a
    flag CNOT.  ``flag_bit`` is this circuit's index into the 21-bit
    flag vector of its family, or None when there is no flag.
    """

    name: str
    family: str  # "z" or "x"
    level: int  # 1 (inner) or 2 (outer)
    index: int  # 0-based within the level
    target_generator: PauliOp
    gates: tuple[int, ...]
    flag_bit: int | None = None

    @property
    def cnot_order(self) -> tuple[int, ...]:
        return tuple(q for q in self.gates if q != _FLAG)

    @property
    def flag_cnot_positions(self) -> tuple[int, ...]:
        return tuple(i for i, q in enumerate(self.gates) if q == _FLAG)

    @property
    def ancilla_count(self) -> int:
        return 2 if self.flag_bit is not None else 1

    def describe(self) -> str:
        """Ordered gate list, 1-based data qubits, 'f' for flag CNOTs."""
        toks = ["f" if q == _FLAG else str(q + 1) for q in self.gates]
        return f"{self.name}: " + " ".join(toks)


def _support(mask: int) -> list[int]:
    return [q for q in range(N49) if (mask >> q) & 1]


def _family_of(g: PauliOp) -> str:
    if g.is_z_type() and g.z_bits:
        return "z"
    if g.is_x_type() and g.x_bits:
        return "x"
    raise ValueError("generator must be pure X-type or Z-type")


def build_level2_circuit(g: PauliOp, interleaved: bool = True) -> ExtractionCircuit:
    """Bare-ancilla circuit for an outer generator.

    ``interleaved=False`` falls back to plain ascending (subblock by
    subblock) order; that variant exists for the single-fault catalog
    and as the negative control in the fault-tolerance audit.
    """
    family = _family_of(g)
    mask = g.z_bits | g.x_bits
    try:
        index = LEVEL2_GENS.index(mask)
    except ValueError:
        raise ValueError("not an outer generator") from None
    blocks = [b for b in range(N_BLOCKS) if (mask >> (BLOCK_SIZE * b)) & MASK7]
    if interleaved:
        order = tuple(BLOCK_SIZE * b + r for r in range(BLOCK_SIZE) for b in blocks)
    else:
        order = tuple(_support(mask))
    tag = "" if interleaved else "#"
    return ExtractionCircuit(
        name=f"{family}~{index + 1}{tag}",
        family=family,
        level=2,
        index=index,
        target_generator=g,
        gates=order,
    )


def build_level1_circuit(g: PauliOp, flagged: bool = True) -> ExtractionCircuit:
    """Flagged circuit for an inner generator (flagless only as the
    negative control)."""
    family = _family_of(g)
    mask = g.z_bits | g.x_bits
    try:
        index = LEVEL1_GENS.index(mask)
    except ValueError:
        raise ValueError("not an inner generator") from None
    a, b, c, d = _support(mask)
    if flagged:
        gates = (a, _FLAG, b, c, _FLAG, d)
    else:
        gates = (a, b, c, d)
    tag = "" if flagged else "#"
    return ExtractionCircuit(
        name=f"{family}{index + 1}{tag}",
        family=family,
        level=1,
        index=index,
        target_generator=g,
        gates=gates,
        flag_bit=index if flagged else None,
    )


def level2_circuits(family: str = "z", interleaved: bool = True):
    op = PauliOp.z_op if family == "z" else PauliOp.x_op
    return tuple(
        build_level2_circuit(op(N49, m), interleaved) for m in LEVEL2_GENS
    )


def level1_circuits(family: str = "z", flagged: bool = True):
    op = PauliOp.z_op if family == "z" else PauliOp.x_op
    return tuple(build_level1_circuit(op(N49, m), flagged) for m in LEVEL1_GENS)


# --- propagation -------------------------------------------------------------


class CircuitResult(NamedTuple):
    data_x: int
    data_z: int
    outcome: int  # measured syndrome bit, relative to the no-error run
    flag: int  # flag wire value (0 for unflagged circuits)


def run_circuit(
    c: ExtractionCircuit,
    data_x: int = 0,
    data_z: int = 0,
    injections: Iterable[tuple[int, str]] = (),
) -> CircuitResult:
    """Walk the circuit with an incoming data-error frame, injecting the
    given (position, local error) faults along the way."""
    n_gates = len(c.gates)
    by_pos: dict[int, list[str]] = defaultdict(list)
    for pos, local in injections:
        if not -1 <= pos <= n_gates:
            raise ValueError(f"position {pos} out of range for {c.name}")
        by_pos[pos].append(local)

    anc = [0, 0]  # x, z
    flg = [0, 0]
    zfam = c.family == "z"

    def touch(wire: list[int], ch: str) -> None:
        if ch == "X":
            wire[0] ^= 1
        elif ch == "Z":
            wire[1] ^= 1
        elif ch == "Y":
            wire[0] ^= 1
            wire[1] ^= 1
        elif ch != "I":
            raise ValueError(f"bad Pauli character {ch!r}")

    def inject_boundary(local: str) -> None:
        touch(anc, local[0])
        if len(local) == 2:
            if c.flag_bit is None:
                raise ValueError(f"{c.name} has no flag wire")
            touch(flg, local[1])
        elif len(local) != 1:
            raise ValueError("boundary faults touch the ancilla and flag only")

    for local in by_pos.get(-1, ()):
        inject_boundary(local)

    for i, q in enumerate(c.gates):
        if q != _FLAG:
            if zfam:
                anc[0] ^= (data_x >> q) & 1
                data_z ^= anc[1] << q
            else:
                data_x ^= anc[0] << q
                anc[1] ^= (data_z >> q) & 1
        else:
            if zfam:
                anc[0] ^= flg[0]
                flg[1] ^= anc[1]
            else:
                flg[0] ^= anc[0]
                anc[1] ^= flg[1]
        for local in by_pos.get(i, ()):
            if len(local) != 2:
                raise ValueError("gate faults are two-character local errors")
            touch(anc, local[0])
            if q != _FLAG:
                if local[1] == "X":
                    data_x ^= 1 << q
                elif local[1] == "Z":
                    data_z ^= 1 << q
                elif local[1] == "Y":
                    data_x ^= 1 << q
                    data_z ^= 1 << q
                elif local[1] != "I":
                    raise ValueError(f"bad Pauli character {local[1]!r}")
            else:
                touch(flg, local[1])

    for local in by_pos.get(n_gates, ()):
        inject_boundary(local)

    outcome = anc[0] if zfam else anc[1]
    flag = flg[1] if zfam else flg[0]
    return CircuitResult(data_x, data_z, outcome, flag)


def propagate(
    c: ExtractionCircuit, position: int, local_error: str
) -> tuple[PauliOp, int, int]:
    """Effect of one fault on an otherwise clean run: the data error it
    leaves behind, its flag contribution as a 21-bit vector in this
    family's flag space, and whether this circuit's own outcome flips."""
    r = run_circuit(c, injections=[(position, local_error)])
    flag21 = r.flag << c.flag_bit if c.flag_bit is not None and r.flag else 0
    return PauliOp(N49, r.data_x, r.data_z), flag21, r.outcome


# --- fault enumeration ---------------------------------------------------------


class SingleFault(NamedTuple):
    """One fault location/error choice with its propagated effect."""

    position: int
    local: str
    data_x: int
    data_z: int
    flag21: int
    outcome: int

    @property
    def effect(self) -> tuple[int, int, int, int]:
        return (self.data_x, self.data_z, self.flag21, self.outcome)


def enumerate_single_faults(c: ExtractionCircuit) -> list[SingleFault]:
    """Every single fault of the damaging type for this family: Z-type
    locals in Z-family circuits (X-type by duality), over all gates and
    the preparation/measurement boundaries."""
    p = "Z" if c.family == "z" else "X"
    n_gates = len(c.gates)
    picks: list[tuple[int, str]] = [(-1, p)]
    if c.flag_bit is not None:
        picks.append((-1, "I" + p))
    for i in range(n_gates):
        picks += [(i, p + "I"), (i, "I" + p), (i, p + p)]
    picks.append((n_gates, p))
    if c.flag_bit is not None:
        picks.append((n_gates, "I" + p))
    out = []
    for pos, local in picks:
        e, flag21, outcome = propagate(c, pos, local)
        out.append(SingleFault(pos, local, e.x_bits, e.z_bits, flag21, outcome))
    return out


def dedup_effects(faults: Iterable[SingleFault]) -> list[SingleFault]:
    """First representative of each distinct nonzero propagated effect."""
    seen = set()
    out = []
    for f in faults:
        if f.effect == (0, 0, 0, 0) or f.effect in seen:
            continue
        seen.add(f.effect)
        out.append(f)
    return out


def wait_fault_atoms(family: str = "z") -> list[SingleFault]:
    """Single-qubit data errors during wait time, one per qubit."""
    p = "Z" if family == "z" else "X"
    return [
        SingleFault(
            -1,
            f"{p}@q{q + 1}",
            (1 << q) if p == "X" else 0,
            (1 << q) if p == "Z" else 0,
            0,
            0,
        )
        for q in range(N49)
    ]


def flag_flip_atoms() -> list[SingleFault]:
    """Bare flag-measurement flips, one per inner circuit."""
    return [SingleFault(-1, f"flag{j + 1}", 0, 0, 1 << j, 0) for j in range(21)]


@dataclass(frozen=True)
class FaultSet:
    """All ways to put ``n_faults`` faults into one location pool.

    ``atoms`` is the deduplicated list of nonzero single-fault effects;
    repeated atoms cancel pairwise under composition, so the reachable
    combined effects are XORs of n, n-2, n-4, ... distinct atoms."""

    kind: str  # "G1", "G2", "W", "F"
    circuit: str | None
    n_faults: int
    atoms: tuple[SingleFault, ...]

    @property
    def label(self) -> str:
        where = f"[{self.circuit}]" if self.circuit else ""
        return f"{self.kind}{where}x{self.n_faults}"

    def effects(self) -> set[tuple[int, int, int, int]]:
        out = set()
        k = self.n_faults
        while k >= 0:
            for combo in itertools.combinations(self.atoms, k):
                dx = dz = fl = oc = 0
                for a in combo:
                    dx ^= a.data_x
                    dz ^= a.data_z
                    fl ^= a.flag21
                    oc ^= a.outcome
                out.add((dx, dz, fl, oc))
            k -= 2
        return out


def enumerate_fault_sets(max_faults: int = 3, family: str = "z") -> list[FaultSet]:
    """Fault sets for every circuit of one family plus the wait and
    flag-flip pools, for 0..max_faults faults each."""
    out = []
    for c in level2_circuits(family) + level1_circuits(family):
        kind = "G2" if c.level == 2 else "G1"
        atoms = tuple(dedup_effects(enumerate_single_faults(c)))
        for n in range(max_faults + 1):
            out.append(FaultSet(kind, c.name, n, atoms))
    watoms = tuple(wait_fault_atoms(family))
    fatoms = tuple(flag_flip_atoms())
    for n in range(max_faults + 1):
        out.append(FaultSet("W", None, n, watoms))
        out.append(FaultSet("F", None, n, fatoms))
    return out
