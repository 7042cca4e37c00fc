"""The three CSS codes this package corrects: a 7-qubit cyclic code, its
7x7 concatenation, and the 23-qubit Golay code.

All three are self-dual CSS codes, so X and Z checks share one list of
support masks per code and a single mask-overlap parity computes either
syndrome type.  Errors and generators are packed ints throughout (bit
k-1 holds qubit k, as in :mod:`wpec.pauli`); the PauliOp layer is a thin
veneer for the public operations.

Syndrome bit conventions:

* 7-qubit code: 3 bits, bit i against generator i+1.
* 49-qubit code: 21 inner bits (bit 3b+i = generator i+1 on subblock
  b+1) plus 3 outer bits.  The outer syndrome of a Z-type error depends
  only on its per-subblock weight parities, and equals the 7-qubit
  syndrome of that parity vector; the code reuses ``syndrome7`` for it.
* Golay code: 11 bits, bit i against row i+1 of the circulant.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass

from .pauli import BLOCK_SIZE, MASK7, N_BLOCKS, PauliOp, parity

# --- 7-qubit cyclic code ---------------------------------------------------

N7 = 7
# Support masks of the three checks: ZIZZZII and its two cyclic shifts.
GEN7 = (0b0011101, 0b0111010, 0b1110100)
LOGICAL7 = MASK7  # Z (or X) on every qubit


def _span(gens: tuple[int, ...]) -> tuple[int, ...]:
    out = {0}
    for g in gens:
        out |= {x ^ g for x in out}
    return tuple(sorted(out))


#: The eight Z-type (equally X-type) stabilizer support masks, ascending.
STAB7 = _span(GEN7)
STAB7_SET = frozenset(STAB7)

#: syndrome7 as a 128-entry lookup: bit i = overlap parity with GEN7[i].
_SYND7 = tuple(
    sum(parity(m & g) << i for i, g in enumerate(GEN7)) for m in range(128)
)


def syndrome7(mask: int) -> int:
    """3-bit syndrome of a 7-qubit error support mask."""
    return _SYND7[mask & MASK7]


# Minimal achievable weight of a 7-qubit coset: index 0 multiplies by the
# plain stabilizers, index 1 additionally flips all seven qubits.  The
# companion table stores the representative that achieves it.
_MIN_WT = ([0] * 128, [0] * 128)
_MIN_REP = ([0] * 128, [0] * 128)
for _m in range(128):
    for _flip, _extra in ((0, 0), (1, MASK7)):
        _best, _rep = 8, _m
        for _s in STAB7:
            _c = _m ^ _s ^ _extra
            _w = _c.bit_count()
            if _w < _best:
                _best, _rep = _w, _c
        _MIN_WT[_flip][_m] = _best
        _MIN_REP[_flip][_m] = _rep
BLOCK_MIN_WT = (tuple(_MIN_WT[0]), tuple(_MIN_WT[1]))
BLOCK_MIN_REP = (tuple(_MIN_REP[0]), tuple(_MIN_REP[1]))
del _MIN_WT, _MIN_REP

# --- 49-qubit concatenation ------------------------------------------------

N49 = 49
LOGICAL49 = (1 << N49) - 1

#: Inner generators, index 3*block + i  <->  "generator i+1 on subblock
#: block+1" (blocks 0-based here, 1-based in reports).
LEVEL1_GENS = tuple(
    GEN7[i] << (BLOCK_SIZE * b) for b in range(N_BLOCKS) for i in range(3)
)


def _blocks_to_mask(pattern: int) -> int:
    out = 0
    for b in range(N_BLOCKS):
        if (pattern >> b) & 1:
            out |= MASK7 << (BLOCK_SIZE * b)
    return out


#: Outer generators: all-Z (all-X) subblocks arranged on the same cyclic
#: support patterns, so the pattern group they span is again STAB7.
LEVEL2_GENS = tuple(_blocks_to_mask(p) for p in GEN7)

#: Canonical representative of each parity vector modulo the outer
#: pattern group: the minimum of p ^ v over the eight spanned patterns.
PCANON = tuple(min(p ^ v for v in STAB7) for p in range(128))


def block_parity(mask: int) -> int:
    """7-bit vector of per-subblock weight parities of a 49-qubit mask."""
    p = 0
    for b in range(N_BLOCKS):
        p |= parity((mask >> (BLOCK_SIZE * b)) & MASK7) << b
    return p


def level1_syndrome(mask: int) -> int:
    """21-bit inner syndrome of a 49-qubit error support mask."""
    s = 0
    for b in range(N_BLOCKS):
        s |= _SYND7[(mask >> (BLOCK_SIZE * b)) & MASK7] << (3 * b)
    return s


def level2_syndrome(mask: int) -> int:
    """3-bit outer syndrome; equals syndrome7 of the block-parity vector."""
    return _SYND7[block_parity(mask)]


def tau_from_syndrome(s21: int) -> int:
    """Subblock-triviality bits: bit b set iff subblock b's 3 inner
    syndrome bits are not all zero."""
    t = 0
    for b in range(N_BLOCKS):
        if (s21 >> (3 * b)) & 0b111:
            t |= 1 << b
    return t


def min_coset_weight(mask: int) -> int:
    """Minimum weight of (mask ^ S) over all 2^24 Z-type stabilizers of
    the 49-qubit code.

    The group factors once the outer choice is fixed: an outer element
    flips a pattern v of whole subblocks, after which each subblock
    minimizes independently over the eight inner stabilizers.  That cuts
    the scan to 8 patterns x 7 table lookups.
    """
    blocks = [(mask >> (BLOCK_SIZE * b)) & MASK7 for b in range(N_BLOCKS)]
    best = N49 + 1
    for v in STAB7:
        t = 0
        for b in range(N_BLOCKS):
            t += BLOCK_MIN_WT[(v >> b) & 1][blocks[b]]
            if t >= best:
                break
        else:
            best = t
    return best


def min_coset_rep(mask: int) -> int:
    """A mask of minimal weight in the stabilizer coset of ``mask``
    (same search as :func:`min_coset_weight`, keeping the argmin)."""
    blocks = [(mask >> (BLOCK_SIZE * b)) & MASK7 for b in range(N_BLOCKS)]
    best, rep = N49 + 2, mask
    for v in STAB7:
        t = 0
        for b in range(N_BLOCKS):
            t += BLOCK_MIN_WT[(v >> b) & 1][blocks[b]]
        if t < best:
            best = t
            rep = 0
            for b in range(N_BLOCKS):
                rep |= BLOCK_MIN_REP[(v >> b) & 1][blocks[b]] << (BLOCK_SIZE * b)
    return rep


# --- 23-qubit Golay code ---------------------------------------------------

N23 = 23
MASK23 = (1 << N23) - 1
LOGICAL23 = MASK23

# Check polynomial x^12 + x^10 + x^7 + x^4 + x^3 + x^2 + x + 1; bit k of
# the row mask carries the coefficient of x^k, read onto qubit k+1.
GOLAY_POLY = (1, 1, 1, 1, 1, 0, 0, 1, 0, 0, 1, 0, 1)
GOLAY_ROW1 = sum(c << k for k, c in enumerate(GOLAY_POLY))

#: Eleven circulant rows; each row is the previous one shifted right by
#: one qubit.  deg h + 10 = 22 < 23, so no shift ever wraps.
GOLAY_ROWS = tuple(GOLAY_ROW1 << i for i in range(11))


def golay_syndrome(mask: int) -> int:
    """11-bit syndrome of a 23-qubit error support mask."""
    s = 0
    for i, row in enumerate(GOLAY_ROWS):
        s |= parity(mask & row) << i
    return s


@functools.cache
def golay_z_stabilizers() -> frozenset[int]:
    """All 2^11 support masks in the span of the Golay rows."""
    return frozenset(_span(GOLAY_ROWS))


# --- Public code objects ----------------------------------------------------


@dataclass(frozen=True)
class StabilizerCode:
    """A self-dual CSS code: X and Z generator lists share supports."""

    name: str
    n: int
    k: int
    d: int
    x_gens: tuple[PauliOp, ...]
    z_gens: tuple[PauliOp, ...]
    logical_x: PauliOp
    logical_z: PauliOp
    block_structure: tuple["StabilizerCode", "StabilizerCode"] | None = None


def _make(name, n, d, masks, block_structure=None) -> StabilizerCode:
    return StabilizerCode(
        name=name,
        n=n,
        k=1,
        d=d,
        x_gens=tuple(PauliOp.x_op(n, m) for m in masks),
        z_gens=tuple(PauliOp.z_op(n, m) for m in masks),
        logical_x=PauliOp.x_op(n, (1 << n) - 1),
        logical_z=PauliOp.z_op(n, (1 << n) - 1),
        block_structure=block_structure,
    )


@functools.cache
def steane_code() -> StabilizerCode:
    return _make("steane", N7, 3, GEN7)


@functools.cache
def concatenated_49() -> StabilizerCode:
    """Inner generators first (index 3b+i), then the three outer ones."""
    inner = steane_code()
    return _make("concat49", N49, 9, LEVEL1_GENS + LEVEL2_GENS, (inner, inner))


@functools.cache
def golay_code() -> StabilizerCode:
    return _make("golay", N23, 7, GOLAY_ROWS)


def syndrome(code: StabilizerCode, e: PauliOp):
    """Syndrome of a pure-type error against the family that detects it.

    Z-type errors check against the X generators and vice versa; for the
    49-qubit code the result is an (inner, outer) pair of ints, otherwise
    a single int.  Mixed-type errors must be split by the caller.
    """
    if e.n != code.n:
        raise ValueError(f"error length {e.n} does not fit {code.name}")
    if e.is_z_type():
        mask = e.z_bits
    elif e.is_x_type():
        mask = e.x_bits
    else:
        raise ValueError("mixed X/Z operator; take the syndrome per type")
    if code.n == N49:
        return level1_syndrome(mask), level2_syndrome(mask)
    if code.n == N23:
        return golay_syndrome(mask)
    return syndrome7(mask)


def block_triviality(code49: StabilizerCode, e: PauliOp) -> int:
    """7-bit vector marking subblocks whose inner syndrome is nonzero."""
    if code49.n != N49:
        raise ValueError("block triviality is defined for the 49-qubit code")
    if not e.is_z_type():
        raise ValueError("expected a Z-type error")
    return tau_from_syndrome(level1_syndrome(e.z_bits))


def min_weight_coset_rep(code49: StabilizerCode, e: PauliOp) -> PauliOp:
    """A minimal-weight member of e's Z-stabilizer coset (49 qubits)."""
    if code49.n != N49:
        raise ValueError("coset minimization is defined for the 49-qubit code")
    if not e.is_z_type():
        raise ValueError("expected a Z-type error")
    return PauliOp.z_op(N49, min_coset_rep(e.z_bits))


def generator_table(code: StabilizerCode) -> str:
    """Generators as labelled rows, X family then Z, one string per line."""
    lines = []
    for fam, gens in (("x", code.x_gens), ("z", code.z_gens)):
        for i, g in enumerate(gens, 1):
            lines.append(f"{fam}{i:<2d} {g}")
    return "\n".join(lines) + "\n"
