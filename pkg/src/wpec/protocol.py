"""Full error-correction protocol on the 49-qubit code.

One round measures, in order, the three second-level Z generators, the
three second-level X generators, the 21 flagged first-level Z circuits
and the 21 flagged first-level X circuits.  Rounds repeat until the
outcome bundle is identical four times in a row (at most 16 rounds for
at most three faults), then the final bundle is decoded in four steps:
block-parity lookup, per-subblock weight-parity correction, an outer
logical fix when the lookup missed, and the mirrored X side.

Faults are injected from a declarative schedule so any failing trial is
replayable from its text form.
"""

from __future__ import annotations

import functools
import itertools
import random
from collections import defaultdict
from dataclasses import dataclass, field

import numpy as np

from .circuits import level1_circuits, level2_circuits, run_circuit
from .codes import (
    N49,
    STAB7,
    level1_syndrome,
    level2_syndrome,
    syndrome7,
    tau_from_syndrome,
)
from .decoder import LOGICAL_REP7, build_correction_table, wpec_steane
from .pauli import PauliOp, format_bits, identity, parse_bits
from .verifier import LookupTable, build_lookup_table

_MASK21 = (1 << 21) - 1


# ---------------------------------------------------------------------------
# Outcome bundles

_BUNDLE_FIELDS = (("s_x", 21), ("s_z", 21), ("s2", 6), ("tau", 14), ("f", 42))


@dataclass(frozen=True)
class OutcomeBundle:
    """All measurement outcomes of one round.

    s_x/s_z are the 21 first-level outcomes per side, stilde the 3
    second-level outcomes, tau the per-subblock nontriviality vector
    recomputed from s, and f the flag vector accumulated (mod 2) since
    the first round.  The x-labeled fields feed the Z-error decode: they
    flip under Z errors on data.  f_x collects the flags of the Z-family
    circuits, which catch dangerous Z spread onto data.
    """

    s_x: int = 0
    s_z: int = 0
    stilde_x: int = 0
    stilde_z: int = 0
    tau_x: int = 0
    tau_z: int = 0
    f_x: int = 0
    f_z: int = 0

    @property
    def s(self) -> int:
        return self.s_x | (self.s_z << 21)

    @property
    def stilde(self) -> int:
        return self.stilde_x | (self.stilde_z << 3)

    @property
    def tau(self) -> int:
        return self.tau_x | (self.tau_z << 7)

    @property
    def f(self) -> int:
        return self.f_x | (self.f_z << 21)

    def render(self) -> str:
        values = (self.s_x, self.s_z, self.stilde, self.tau, self.f)
        return (
            "\n".join(
                f"{name}: {format_bits(v, w)}"
                for (name, w), v in zip(_BUNDLE_FIELDS, values)
            )
            + "\n"
        )

    @classmethod
    def parse(cls, text: str) -> "OutcomeBundle":
        got = {}
        for line in text.splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            name, _, rest = line.partition(":")
            name, rest = name.strip(), rest.strip()
            widths = dict(_BUNDLE_FIELDS)
            if name not in widths:
                raise ValueError(f"unknown bundle field {name!r}")
            if name in got:
                raise ValueError(f"duplicate bundle field {name!r}")
            if len(rest) != widths[name] or set(rest) - {"0", "1"}:
                raise ValueError(
                    f"field {name} needs {widths[name]} bits, got {rest!r}"
                )
            got[name] = parse_bits(rest)
        missing = [name for name, _ in _BUNDLE_FIELDS if name not in got]
        if missing:
            raise ValueError(f"bundle is missing fields: {', '.join(missing)}")
        s2, tau, f = got["s2"], got["tau"], got["f"]
        return cls(
            s_x=got["s_x"],
            s_z=got["s_z"],
            stilde_x=s2 & 7,
            stilde_z=s2 >> 3,
            tau_x=tau & 127,
            tau_z=tau >> 7,
            f_x=f & _MASK21,
            f_z=f >> 21,
        )


# ---------------------------------------------------------------------------
# Fault schedules

_MEAS_WIDTH = {"sx": 21, "sz": 21, "s2x": 3, "s2z": 3}
_PAULIS = ("X", "Y", "Z")


@dataclass(frozen=True)
class ScheduledFault:
    """One injected fault, replayable from its one-line text form.

    kinds:
      gate <circuit> <position> <local>   Pauli after a gate of a named
                                          circuit (position -1 and
                                          n_gates are the boundaries)
      wait <qubit> <P> <phase>            data error on a qubit (1-based)
                                          before the given phase (0..3)
      flag <side> <bit>                   flip of one cumulative flag bit
                                          (side x = flags raised by the
                                          Z-family circuits)
      meas <field> <bit>                  flip of one outcome bit this
                                          round; field in sx, sz, s2x, s2z
    """

    round: int
    kind: str
    circuit: str = ""
    position: int = 0
    local: str = ""
    qubit: int = 0
    phase: int = 0
    side: str = ""
    meas_field: str = ""
    bit: int = 0

    def __str__(self) -> str:
        if self.kind == "gate":
            return f"{self.round} gate {self.circuit} {self.position} {self.local}"
        if self.kind == "wait":
            return f"{self.round} wait {self.qubit} {self.local} {self.phase}"
        if self.kind == "flag":
            return f"{self.round} flag {self.side} {self.bit}"
        return f"{self.round} meas {self.meas_field} {self.bit}"


def parse_fault(line: str) -> ScheduledFault:
    parts = line.split()
    if len(parts) < 3:
        raise ValueError(f"fault line too short: {line!r}")
    rnd = int(parts[0])
    if rnd < 0:
        raise ValueError(f"round must be non-negative: {line!r}")
    kind = parts[1]
    if kind == "gate":
        if len(parts) != 5:
            raise ValueError(f"gate fault needs circuit, position, local: {line!r}")
        name, pos, local = parts[2], int(parts[3]), parts[4]
        c = _circuits_by_name().get(name)
        if c is None:
            raise ValueError(f"unknown circuit {name!r}")
        n_gates = len(c.gates)
        if not -1 <= pos <= n_gates:
            raise ValueError(f"position {pos} out of range for {name}")
        if not local or len(local) > 2 or set(local) - set("IXYZ") or set(local) == {"I"}:
            raise ValueError(f"bad local error {local!r}")
        if pos in (-1, n_gates):
            if len(local) == 2 and c.flag_bit is None:
                raise ValueError(f"{name} has no flag wire")
        elif len(local) != 2:
            raise ValueError("mid-circuit faults are two-character local errors")
        return ScheduledFault(rnd, "gate", circuit=name, position=pos, local=local)
    if kind == "wait":
        if len(parts) not in (4, 5):
            raise ValueError(f"wait fault needs qubit, Pauli[, phase]: {line!r}")
        qubit, p = int(parts[2]), parts[3]
        phase = int(parts[4]) if len(parts) == 5 else 0
        if not 1 <= qubit <= N49:
            raise ValueError(f"qubit {qubit} out of range")
        if p not in _PAULIS:
            raise ValueError(f"bad wait Pauli {p!r}")
        if not 0 <= phase <= 3:
            raise ValueError(f"phase {phase} out of range")
        return ScheduledFault(rnd, "wait", qubit=qubit, local=p, phase=phase)
    if kind == "flag":
        if len(parts) != 4:
            raise ValueError(f"flag fault needs side, bit: {line!r}")
        side, bit = parts[2], int(parts[3])
        if side not in ("x", "z") or not 0 <= bit < 21:
            raise ValueError(f"bad flag fault: {line!r}")
        return ScheduledFault(rnd, "flag", side=side, bit=bit)
    if kind == "meas":
        if len(parts) != 4:
            raise ValueError(f"meas fault needs field, bit: {line!r}")
        fld, bit = parts[2], int(parts[3])
        if fld not in _MEAS_WIDTH or not 0 <= bit < _MEAS_WIDTH[fld]:
            raise ValueError(f"bad meas fault: {line!r}")
        return ScheduledFault(rnd, "meas", meas_field=fld, bit=bit)
    raise ValueError(f"unknown fault kind {kind!r}")


def parse_schedule(text: str) -> tuple[ScheduledFault, ...]:
    out = []
    for line in text.splitlines():
        line = line.partition("#")[0].strip()
        if line:
            out.append(parse_fault(line))
    return tuple(out)


def format_schedule(faults) -> str:
    return "".join(f"{f}\n" for f in faults)


# ---------------------------------------------------------------------------
# Round execution

@functools.lru_cache(maxsize=1)
def _circuit_phases():
    """The four measurement phases in protocol order."""
    return (
        level2_circuits("z"),
        level2_circuits("x"),
        level1_circuits("z"),
        level1_circuits("x"),
    )


@functools.lru_cache(maxsize=1)
def _circuits_by_name():
    return {c.name: c for phase in _circuit_phases() for c in phase}


_PHASE_FIELD = ("s2z", "s2x", "sz", "sx")


@dataclass
class ProtocolState:
    """Pauli frame of the true data error plus the per-round log."""

    data_error: PauliOp = field(default_factory=lambda: identity(N49))
    round_log: list[OutcomeBundle] = field(default_factory=list)
    fault_schedule: dict[int, tuple[ScheduledFault, ...]] = field(default_factory=dict)
    _f_x: int = 0
    _f_z: int = 0


def make_state(
    schedule=(), input_error: PauliOp | None = None
) -> ProtocolState:
    by_round: dict[int, list[ScheduledFault]] = defaultdict(list)
    for f in schedule:
        by_round[f.round].append(f)
    return ProtocolState(
        data_error=identity(N49) if input_error is None else input_error,
        fault_schedule={r: tuple(fs) for r, fs in by_round.items()},
    )


def run_round(state: ProtocolState) -> OutcomeBundle:
    """Simulate one full measurement round and append its bundle.

    Circuits without an injected fault this round are evaluated by the
    support-mask shortcut (outcome = parity of the incoming frame over
    the measured generator, frame and flags untouched), which matches
    the gate-by-gate walk exactly for fault-free runs.
    """
    rnd = len(state.round_log)
    faults = state.fault_schedule.get(rnd, ())
    waits: dict[int, list[ScheduledFault]] = defaultdict(list)
    gate_inj: dict[str, list[tuple[int, str]]] = defaultdict(list)
    meas_flips: dict[str, int] = defaultdict(int)
    for f in faults:
        if f.kind == "wait":
            waits[f.phase].append(f)
        elif f.kind == "gate":
            gate_inj[f.circuit].append((f.position, f.local))
        elif f.kind == "meas":
            meas_flips[f.meas_field] ^= 1 << f.bit
        elif f.kind == "flag":
            if f.side == "x":
                state._f_x ^= 1 << f.bit
            else:
                state._f_z ^= 1 << f.bit
        else:
            raise ValueError(f"unknown fault kind {f.kind!r}")

    dx, dz = state.data_error.x_bits, state.data_error.z_bits
    outcomes = dict.fromkeys(_PHASE_FIELD, 0)
    for phase, circuits in enumerate(_circuit_phases()):
        for w in waits.get(phase, ()):
            q = w.qubit - 1
            if w.local in ("X", "Y"):
                dx ^= 1 << q
            if w.local in ("Z", "Y"):
                dz ^= 1 << q
        fld = _PHASE_FIELD[phase]
        for c in circuits:
            inj = gate_inj.get(c.name)
            if inj:
                res = run_circuit(c, dx, dz, injections=inj)
                dx, dz = res.data_x, res.data_z
                out, flg = res.outcome, res.flag
            else:
                gen = c.target_generator
                src = dx if c.family == "z" else dz
                mask = gen.z_bits if c.family == "z" else gen.x_bits
                out, flg = (src & mask).bit_count() & 1, 0
            outcomes[fld] |= out << c.index
            if flg and c.flag_bit is not None:
                if c.family == "z":
                    state._f_x ^= 1 << c.flag_bit
                else:
                    state._f_z ^= 1 << c.flag_bit
    for fld, mask in meas_flips.items():
        outcomes[fld] ^= mask

    s_x, s_z = outcomes["sx"], outcomes["sz"]
    bundle = OutcomeBundle(
        s_x=s_x,
        s_z=s_z,
        stilde_x=outcomes["s2x"],
        stilde_z=outcomes["s2z"],
        tau_x=tau_from_syndrome(s_x),
        tau_z=tau_from_syndrome(s_z),
        f_x=state._f_x,
        f_z=state._f_z,
    )
    state.data_error = PauliOp(N49, dx, dz)
    state.round_log.append(bundle)
    return bundle


def run_until_stable(
    state: ProtocolState, *, repeats: int = 4, max_rounds: int = 16
) -> tuple[OutcomeBundle, int]:
    """Run rounds until the bundle repeats ``repeats`` times in a row.

    Returns the stable bundle and the number of rounds used.  At most
    three faults can change the bundle at most three times, so the loop
    finishes within 16 rounds; running past that means a bug.
    """
    while len(state.round_log) < max_rounds:
        bundle = run_round(state)
        log = state.round_log
        if len(log) >= repeats and all(b == bundle for b in log[-repeats:]):
            return bundle, len(log)
    raise RuntimeError(f"bundle failed to stabilize within {max_rounds} rounds")


# ---------------------------------------------------------------------------
# Decoding

@functools.lru_cache(maxsize=1)
def _correction_table():
    return build_correction_table()


@functools.lru_cache(maxsize=1)
def _column_block() -> dict[int, int]:
    # each nonzero outer syndrome is hit by exactly one subblock's column
    return {syndrome7(1 << b): b for b in range(7)}


@dataclass(frozen=True)
class SideReport:
    parity: int
    fallback: bool
    step3_block: int | None


@dataclass(frozen=True)
class DecodeReport:
    z_side: SideReport
    x_side: SideReport

    @property
    def fallback_used(self) -> bool:
        return self.z_side.fallback or self.x_side.fallback


def _decode_side(
    s21: int, stilde: int, tau: int, f21: int, table: LookupTable
) -> tuple[int, SideReport]:
    parity = table.lookup_parity(stilde, tau, s21, f21)
    fallback = parity is None
    if fallback:
        parity = 127
    ct = _correction_table()
    mask = 0
    for b in range(7):
        blk = wpec_steane((s21 >> (3 * b)) & 7, (parity >> b) & 1, ct)
        mask |= blk.z_bits << (7 * b)
    # the applied parity always matches the observed outer syndrome for
    # in-table records; a leftover difference only appears on fallback
    residue = stilde ^ syndrome7(parity)
    step3 = None
    if residue:
        step3 = _column_block()[residue]
        mask ^= LOGICAL_REP7 << (7 * step3)
    return mask, SideReport(parity=parity, fallback=fallback, step3_block=step3)


def decode_with_report(
    bundle: OutcomeBundle, table: LookupTable
) -> tuple[PauliOp, DecodeReport]:
    """Four-step decode of a stable bundle.

    Z side: the (stilde_x, tau_x) partition of the lookup table gives
    the subblock parity vector, by unanimity or by the exact (s_x, f_x)
    record; a miss falls back to the all-ones parity.  Each subblock
    then receives its weight-parity correction, and on fallback one
    subblock additionally receives the outer logical matching the
    leftover second-level syndrome.  The X side mirrors with the z
    observations.
    """
    zmask, zrep = _decode_side(
        bundle.s_x, bundle.stilde_x, bundle.tau_x, bundle.f_x, table
    )
    xmask, xrep = _decode_side(
        bundle.s_z, bundle.stilde_z, bundle.tau_z, bundle.f_z, table
    )
    return PauliOp(N49, xmask, zmask), DecodeReport(z_side=zrep, x_side=xrep)


def decode_bundle(bundle: OutcomeBundle, table: LookupTable) -> PauliOp:
    return decode_with_report(bundle, table)[0]


# ---------------------------------------------------------------------------
# Residual classification

@functools.lru_cache(maxsize=1)
def _joint_block_table():
    """Per-subblock minimal joint weight under stabilizer freedom.

    joint[cx, ex, cz, ez] is the smallest popcount(x | z) over x in the
    inner coset of ex (flipped by the block logical when cx) and z from
    ez likewise.  bits[i] spells out the i-th admissible pattern of
    whole-block logical flips: the 8 outer stabilizer patterns, then
    the same 8 shifted by the global logical.
    """
    stab = np.array(STAB7, dtype=np.uint16)
    ar = np.arange(128, dtype=np.uint16)
    cand = np.empty((2, 128, 8), dtype=np.uint8)
    cand[0] = (ar[:, None] ^ stab[None, :]).astype(np.uint8)
    cand[1] = (ar[:, None] ^ (stab[None, :] ^ 127)).astype(np.uint8)
    a = cand[:, :, None, None, :, None]
    b = cand[None, None, :, :, None, :]
    joint = np.bitwise_count(a | b).min(axis=(4, 5)).astype(np.uint8)
    pats = np.concatenate([stab, stab ^ 127]).astype(np.uint8)
    bits = ((pats[:, None] >> np.arange(7)[None, :]) & 1).astype(np.int64)
    return joint, bits, np.arange(7)


def joint_coset_weight(op: PauliOp, *, include_logical: bool = True) -> int:
    """Minimal weight of op times any stabilizer (and, when
    include_logical, any logical) of the 49-qubit code.

    Zero without the logical freedom means op is exactly a stabilizer;
    with it, the distance to the nearest codeword-preserving operator.
    """
    joint, bits, blocks = _joint_block_table()
    sub = np.empty((7, 2, 2), dtype=np.int64)
    for b in range(7):
        sub[b] = joint[:, (op.x_bits >> (7 * b)) & 127, :, (op.z_bits >> (7 * b)) & 127]
    n = 16 if include_logical else 8
    w = sub[blocks[None, None, :], bits[:n, None, :], bits[None, :n, :]].sum(axis=2)
    return int(w.min())


def in_codespace(op: PauliOp) -> bool:
    """Whether op commutes with every generator (trivial syndromes)."""
    return (
        level1_syndrome(op.z_bits) == 0
        and level2_syndrome(op.z_bits) == 0
        and level1_syndrome(op.x_bits) == 0
        and level2_syndrome(op.x_bits) == 0
    )


def ideal_logical_identity(op: PauliOp) -> bool:
    """Whether a perfect decode of op leaves the codeword untouched.

    An ideal decoder applies the minimum-weight error with op's
    syndromes, so it preserves the codeword exactly when the stabilizer
    coset of op achieves the global minimum over logical cosets too.
    The cosets are distance 9 apart, so for the residuals under test
    (weight at most 3) equality cannot come from a tie.
    """
    return joint_coset_weight(op, include_logical=False) == joint_coset_weight(op)


# ---------------------------------------------------------------------------
# Trials and the fault-tolerance conditions

@dataclass(frozen=True)
class Trial:
    input_error: PauliOp
    schedule: tuple[ScheduledFault, ...] = ()
    name: str = ""


@dataclass(frozen=True)
class TrialResult:
    trial: Trial
    rounds_used: int
    bundle: OutcomeBundle
    correction: PauliOp
    residual: PauliOp
    v1: int
    v2: int
    decode_consistent: bool
    fallback_used: bool
    weight_exact: int
    weight_normalizer: int
    condition1: bool | None
    condition2: bool | None

    @property
    def ok(self) -> bool:
        return (
            self.decode_consistent
            and self.condition1 is not False
            and self.condition2 is not False
        )

    def render(self) -> str:
        lines = [
            f"trial {self.trial.name or '<unnamed>'}: "
            f"v1={self.v1} v2={self.v2} rounds={self.rounds_used}",
            f"  input    : {self.trial.input_error}",
            f"  residual : {self.residual}",
            f"  weights  : exact {self.weight_exact}, "
            f"mod normalizer {self.weight_normalizer}",
            f"  checks   : decode consistent {self.decode_consistent}, "
            f"condition1 {self.condition1}, condition2 {self.condition2}",
        ]
        if self.trial.schedule:
            lines.append("  schedule :")
            lines.extend(f"    {f}" for f in self.trial.schedule)
        return "\n".join(lines)


def _decode_consistent(bundle: OutcomeBundle, correction: PauliOp) -> bool:
    """The correction must cancel exactly the measured syndromes, so a
    data error faithfully reflected by the bundle returns to the
    codespace.  (The true error can still drift from the bundle when a
    fault lands after its last measurement of the final rounds; that
    drift is what condition 2 bounds.)"""
    return (
        level1_syndrome(correction.z_bits) == bundle.s_x
        and level2_syndrome(correction.z_bits) == bundle.stilde_x
        and level1_syndrome(correction.x_bits) == bundle.s_z
        and level2_syndrome(correction.x_bits) == bundle.stilde_z
    )


def run_trial(trial: Trial, table: LookupTable, *, t: int = 3) -> TrialResult:
    state = make_state(trial.schedule, trial.input_error)
    bundle, rounds_used = run_until_stable(state)
    correction, report = decode_with_report(bundle, table)
    residual = state.data_error * correction
    v1 = trial.input_error.weight()
    v2 = sum(
        len(fs) for r, fs in state.fault_schedule.items() if r < rounds_used
    )
    w_exact = joint_coset_weight(residual, include_logical=False)
    w_norm = joint_coset_weight(residual, include_logical=True)
    cond1 = (w_exact == w_norm) if v1 + v2 <= t else None
    cond2 = (w_norm <= v2) if v2 <= t else None
    return TrialResult(
        trial=trial,
        rounds_used=rounds_used,
        bundle=bundle,
        correction=correction,
        residual=residual,
        v1=v1,
        v2=v2,
        decode_consistent=_decode_consistent(bundle, correction),
        fallback_used=report.fallback_used,
        weight_exact=w_exact,
        weight_normalizer=w_norm,
        condition1=cond1,
        condition2=cond2,
    )


@dataclass(frozen=True)
class FtecReport:
    n_trials: int
    n_condition1: int
    n_condition2: int
    n_fallback: int
    max_rounds_used: int
    failures: tuple[TrialResult, ...]

    @property
    def ok(self) -> bool:
        return not self.failures

    def render(self) -> str:
        lines = [
            f"trials: {self.n_trials}",
            f"condition 1 checked: {self.n_condition1}",
            f"condition 2 checked: {self.n_condition2}",
            f"fallback decodes: {self.n_fallback}",
            f"max rounds used: {self.max_rounds_used}",
            f"failures: {len(self.failures)}",
        ]
        lines.extend(f.render() for f in self.failures)
        return "\n".join(lines) + "\n"


def check_ftec_conditions(
    trials, t: int = 3, *, table: LookupTable | None = None, max_failures: int = 20
) -> FtecReport:
    """Run every trial and test the two fault-tolerance conditions.

    With v1 the input-error weight and v2 the number of executed faults:
    when v1 + v2 <= t an ideal decode of the output must recover the
    input codeword (the residual's nearest codeword decomposition
    carries no logical), and whenever v2 <= t the output must be within
    weight v2 of some codeword, wrong logical allowed.  The correction
    must cancel the measured syndromes regardless.
    """
    if table is None:
        table = build_lookup_table(3)
    n = n1 = n2 = nfb = 0
    max_rounds = 0
    failures = []
    for trial in trials:
        r = run_trial(trial, table, t=t)
        n += 1
        n1 += r.condition1 is not None
        n2 += r.condition2 is not None
        nfb += r.fallback_used
        max_rounds = max(max_rounds, r.rounds_used)
        if not r.ok and len(failures) < max_failures:
            failures.append(r)
    return FtecReport(
        n_trials=n,
        n_condition1=n1,
        n_condition2=n2,
        n_fallback=nfb,
        max_rounds_used=max_rounds,
        failures=tuple(failures),
    )


# ---------------------------------------------------------------------------
# Trial generators

def exhaustive_input_trials(max_weight: int = 3):
    """Every Z-type input error of weight up to max_weight, no faults."""
    yield Trial(identity(N49), name="input:clean")
    for w in range(1, max_weight + 1):
        for qubits in itertools.combinations(range(N49), w):
            mask = 0
            for q in qubits:
                mask |= 1 << q
            yield Trial(
                PauliOp.z_op(N49, mask),
                name="input:" + ",".join(str(q + 1) for q in qubits),
            )


def _random_input(rng: random.Random, weight: int) -> PauliOp:
    xm = zm = 0
    for q in rng.sample(range(N49), weight):
        p = rng.choice(_PAULIS)
        if p in ("X", "Y"):
            xm |= 1 << q
        if p in ("Z", "Y"):
            zm |= 1 << q
    return PauliOp(N49, xm, zm)


_GATE_LOCALS = [
    a + b for a in "IXYZ" for b in "IXYZ" if a + b != "II"
]


def _random_fault(rng: random.Random, rnd: int) -> ScheduledFault:
    kind = rng.choices(("gate", "wait", "flag", "meas"), weights=(10, 5, 2, 3))[0]
    if kind == "gate":
        name = rng.choice(sorted(_circuits_by_name()))
        c = _circuits_by_name()[name]
        pos = rng.randint(-1, len(c.gates))
        if pos in (-1, len(c.gates)):
            local = rng.choice(_PAULIS)
            if c.flag_bit is not None and rng.random() < 0.3:
                local = "I" + rng.choice(_PAULIS)
        else:
            local = rng.choice(_GATE_LOCALS)
        return ScheduledFault(rnd, "gate", circuit=name, position=pos, local=local)
    if kind == "wait":
        return ScheduledFault(
            rnd,
            "wait",
            qubit=rng.randint(1, N49),
            local=rng.choice(_PAULIS),
            phase=rng.randint(0, 3),
        )
    if kind == "flag":
        return ScheduledFault(
            rnd, "flag", side=rng.choice("xz"), bit=rng.randrange(21)
        )
    fld = rng.choice(sorted(_MEAS_WIDTH))
    return ScheduledFault(
        rnd, "meas", meas_field=fld, bit=rng.randrange(_MEAS_WIDTH[fld])
    )


def sample_trials(
    n: int,
    seed: int = 0,
    *,
    max_faults: int = 3,
    max_round: int = 5,
    heavy_input_every: int = 10,
):
    """Deterministic stream of random fault schedules.

    Most trials carry a small input error so condition 1 applies; every
    heavy_input_every-th gets an input far beyond the code distance,
    exercising condition 2 alone.
    """
    rng = random.Random(seed)
    for i in range(n):
        v2 = rng.randint(1, max_faults)
        if heavy_input_every and i % heavy_input_every == heavy_input_every - 1:
            v1 = rng.randint(8, 12)
        else:
            v1 = rng.randint(0, max(0, 3 - v2))
        schedule = tuple(
            _random_fault(rng, rng.randint(0, max_round)) for _ in range(v2)
        )
        yield Trial(
            _random_input(rng, v1), schedule=schedule, name=f"sample:{seed}/{i}"
        )
