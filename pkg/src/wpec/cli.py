"""Command-line interface.

Subcommands cover the reproducible batch jobs: building the decoding
lookup table, auditing it for decodability violations (with blockwise
or flagless negative controls), scanning final-round fault combinations
under the relaxed marking rule, exhaustive per-code decoder checks,
decoding a stable outcome bundle from a file, and emitting the pinned
single-fault classification table.

Exit codes: 0 all checks pass, 1 a verification found violations or a
golden comparison failed, 2 usage errors or malformed input files.
Outputs are deterministic; worker counts never change output bytes.
"""

from __future__ import annotations

import argparse
import contextlib
import json
import os
import sys
from dataclasses import dataclass

import numpy as np

from .codes import (
    GOLAY_ROWS,
    LEVEL1_GENS,
    LEVEL2_GENS,
    LOGICAL7,
    LOGICAL23,
    LOGICAL49,
    N7,
    N23,
    N49,
    STAB7_SET,
    golay_syndrome,
    golay_z_stabilizers,
    min_coset_rep,
    min_coset_weight,
    syndrome7,
)
from .decoder import (
    LogicalClass,
    build_correction_table,
    classify_logical,
    wpec_steane,
)
from .pauli import PauliOp, format_bits
from .protocol import OutcomeBundle, decode_with_report
from .verifier import (
    TABLE1_GOLDEN,
    build_lookup_table,
    render_table1,
    reproduce_table1,
    run_appendix_b,
    verify_claim2,
)


@contextlib.contextmanager
def _sink(path: str | None):
    if path:
        with open(path, "w") as fh:
            yield fh
    else:
        yield sys.stdout


def _jdump(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(", ", ": "))


# ---------------------------------------------------------------------------
# Exhaustive per-code decoder checks


@dataclass(frozen=True)
class CheckResult:
    name: str
    ok: bool
    detail: str


def _steane_checks() -> list[CheckResult]:
    """Centralizer census, the two-operator equivalence rule, and
    weight-parity decoding, each exhausted over all 2^7 Z masks."""
    out = []
    central = [m for m in range(128) if syndrome7(m) == 0]
    even = {m for m in central if m.bit_count() % 2 == 0}
    odd = {m for m in central if m.bit_count() % 2 == 1}
    out.append(
        CheckResult(
            "centralizer census",
            len(central) == 16 and len(even) == 8 and len(odd) == 8,
            f"{len(central)} trivial-syndrome masks, {len(even)} even, {len(odd)} odd",
        )
    )
    out.append(
        CheckResult(
            "even class is the stabilizer group",
            even == set(STAB7_SET),
            "8 even elements match the generated group",
        )
    )
    out.append(
        CheckResult(
            "odd class is the logical coset",
            odd == {m ^ LOGICAL7 for m in STAB7_SET},
            "8 odd elements are stabilizer * full-weight logical",
        )
    )
    classed = all(
        classify_logical(PauliOp.z_op(N7, m))
        == (LogicalClass.Z if m.bit_count() % 2 else LogicalClass.I)
        for m in central
    )
    out.append(
        CheckResult(
            "logical classification by weight parity",
            classed,
            "16 centralizer elements classified",
        )
    )

    pairs = bad = 0
    for e1 in range(128):
        s1, p1 = syndrome7(e1), e1.bit_count() & 1
        for e2 in range(128):
            pairs += 1
            equivalent = (e1 ^ e2) in STAB7_SET
            implied = s1 == syndrome7(e2) and p1 == e2.bit_count() & 1
            if equivalent != implied:
                bad += 1
    out.append(
        CheckResult(
            "equivalence iff equal syndrome and parity",
            bad == 0,
            f"{pairs} ordered pairs, {bad} disagreements",
        )
    )

    ct = build_correction_table()
    sound = sum(
        (m ^ wpec_steane(syndrome7(m), m.bit_count() & 1, ct).z_bits) in STAB7_SET
        for m in range(128)
    )
    out.append(
        CheckResult(
            "weight-parity decoding soundness",
            sound == 128,
            f"{sound}/128 errors land exactly on a stabilizer",
        )
    )
    return out


def _golay_checks() -> list[CheckResult]:
    """Parity split of the 23-qubit centralizer, perfectness of the
    weight<=3 leader table, and decoding soundness over all 2^23 Z
    masks (vectorized)."""
    out = []
    span = np.zeros(1, dtype=np.uint32)
    for g in GOLAY_ROWS:
        span = np.concatenate([span, span ^ np.uint32(g)])
    stab_even = bool(((np.bitwise_count(span) & 1) == 0).all())
    logical_odd = bool(
        ((np.bitwise_count(span ^ np.uint32(LOGICAL23)) & 1) == 1).all()
    )
    distinct = len(np.unique(span))
    out.append(
        CheckResult(
            "stabilizer span size",
            distinct == 2048 and set(map(int, span)) == set(golay_z_stabilizers()),
            f"{distinct} distinct elements from 11 generators",
        )
    )
    out.append(
        CheckResult(
            "all 2048 stabilizers even weight", stab_even, "no odd element"
        )
    )
    out.append(
        CheckResult(
            "all 2048 logical-coset elements odd weight",
            logical_odd,
            "no even element",
        )
    )

    ct = build_correction_table()
    leaders = np.zeros(2048, dtype=np.uint32)
    for s, op in ct.golay_min.items():
        leaders[s] = op.z_bits
    leader_ok = all(
        golay_syndrome(int(leaders[s])) == s and int(leaders[s]).bit_count() <= 3
        for s in range(2048)
    ) and golay_syndrome(LOGICAL23) == 0
    out.append(
        CheckResult(
            "perfectness: unique weight<=3 leader per syndrome",
            leader_ok and len(ct.golay_min) == 2048,
            "2048 leaders, syndromes verified",
        )
    )

    e = np.arange(1 << N23, dtype=np.uint32)
    synd = np.zeros(1 << N23, dtype=np.uint16)
    for b in range(N23):
        col = np.uint16(golay_syndrome(1 << b))
        synd ^= (((e >> np.uint32(b)) & np.uint32(1)).astype(np.uint16)) * col
    zero_synd = int((synd == 0).sum())
    out.append(
        CheckResult(
            "trivial-syndrome census",
            zero_synd == 4096,
            f"{zero_synd} masks commute with every check",
        )
    )
    flip = ((np.bitwise_count(leaders[synd]) ^ np.bitwise_count(e)) & 1).astype(bool)
    corr = leaders[synd] ^ np.where(flip, np.uint32(LOGICAL23), np.uint32(0))
    bad = int(((np.bitwise_count(e ^ corr) & 1) != 0).sum())
    # zero syndrome plus even weight pins membership in the stabilizer
    # group, given the parity split established above
    out.append(
        CheckResult(
            "weight-parity decoding soundness (2^23 errors)",
            bad == 0,
            f"{bad} residuals of odd weight",
        )
    )
    return out


def _concat49_checks() -> list[CheckResult]:
    """Structural checks of the 49-qubit generator family and the
    hierarchical coset-weight search."""
    out = []
    out.append(
        CheckResult(
            "generator counts and weights",
            len(LEVEL1_GENS) == 21
            and all(g.bit_count() == 4 for g in LEVEL1_GENS)
            and len(LEVEL2_GENS) == 3
            and all(g.bit_count() == 28 for g in LEVEL2_GENS),
            "21 inner weight-4, 3 outer weight-28",
        )
    )
    css = all(
        (gz & gx).bit_count() % 2 == 0
        for gz in LEVEL1_GENS + LEVEL2_GENS
        for gx in LEVEL1_GENS + LEVEL2_GENS
    )
    out.append(
        CheckResult(
            "Z and X families commute",
            css,
            "all generator support overlaps even",
        )
    )
    columns = {syndrome7(1 << b) for b in range(N7)}
    out.append(
        CheckResult(
            "outer syndrome columns cover all nonzero values",
            columns == set(range(1, 8)),
            "7 single-block patterns, 7 distinct syndromes",
        )
    )
    spots = (
        min_coset_weight(0) == 0
        and all(min_coset_weight(g) == 0 for g in LEVEL2_GENS)
        and min_coset_weight(LOGICAL49) == 9
        and min_coset_rep(LOGICAL49).bit_count() == 9
        and all(min_coset_weight(1 << q) == 1 for q in range(0, N49, 11))
    )
    out.append(
        CheckResult(
            "coset-weight spot checks",
            spots,
            "identity 0, outer generators 0, logical 9, singles 1",
        )
    )
    return out


_CLAIM_SUITES = {
    "steane": _steane_checks,
    "golay": _golay_checks,
    "concat49": _concat49_checks,
}


# ---------------------------------------------------------------------------
# Subcommand implementations


def cmd_gen_table(args) -> int:
    table = build_lookup_table(
        args.max_faults,
        flagged=not args.no_flags,
        interleaved=args.ordering == "permuted",
        workers=args.workers,
    )
    with _sink(args.out) as fh:
        if args.format == "text":
            for line in table.record_lines():
                fh.write(line + "\n")
        else:
            names = ("s", "stilde", "tau", "f", "parity", "tag")
            for line in table.record_lines():
                fh.write(_jdump(dict(zip(names, line.split()))) + "\n")
    return 0


def cmd_verify_claims(args) -> int:
    checks = _CLAIM_SUITES[args.code]()
    ok = all(c.ok for c in checks)
    with _sink(args.out) as fh:
        if args.format == "text":
            for c in checks:
                fh.write(f"{'ok  ' if c.ok else 'FAIL'} {c.name}: {c.detail}\n")
            fh.write(
                f"{args.code}: {sum(c.ok for c in checks)}/{len(checks)} checks passed\n"
            )
        else:
            for c in checks:
                fh.write(
                    _jdump({"check": c.name, "ok": c.ok, "detail": c.detail}) + "\n"
                )
    return 0 if ok else 1


def cmd_verify_appendix_a(args) -> int:
    table = build_lookup_table(
        args.max_faults,
        flagged=not args.no_flags,
        interleaved=args.ordering == "permuted",
        workers=args.workers,
    )
    report = verify_claim2(table)
    with _sink(args.out) as fh:
        if args.format == "text":
            fh.write(report.render())
        else:
            fh.write(
                _jdump(
                    {
                        "type": "summary",
                        "max_faults": report.max_faults,
                        "flagged": report.flagged,
                        "interleaved": report.interleaved,
                        "records": report.n_records,
                        "groups": report.n_groups,
                        "condition1": report.n_condition1,
                        "condition2": report.n_condition2,
                        "violated_groups": report.n_violated_groups,
                        "violations": report.n_violations,
                        "ok": report.ok,
                    }
                )
                + "\n"
            )
            for fnc, n in report.combination_counts:
                fh.write(
                    _jdump({"type": "combination", "counts": str(fnc), "n": n}) + "\n"
                )
            for v in report.violations:
                fh.write(
                    _jdump(
                        {
                            "type": "violation",
                            "s": format_bits(v.s, 21),
                            "stilde": format_bits(v.stilde, 3),
                            "tau": format_bits(v.tau, 7),
                            "f": format_bits(v.f, 21),
                            "parity_a": format_bits(v.parity_a, 7),
                            "parity_b": format_bits(v.parity_b, 7),
                            "witness_a": list(v.witness_a),
                            "witness_b": list(v.witness_b),
                        }
                    )
                    + "\n"
                )
    return 0 if report.ok else 1


def cmd_verify_appendix_b(args) -> int:
    report = run_appendix_b(args.max_faults, workers=args.workers)
    n_harmful = sum(a.harmful for a in report.analyses)
    with _sink(args.out) as fh:
        if args.format == "text":
            fh.write(report.render())
            fh.write(f"summary: {len(report.marked)} marked, {n_harmful} harmful\n")
        else:
            fh.write(
                _jdump(
                    {
                        "type": "summary",
                        "max_faults": report.max_faults,
                        "number_combinations": report.n_number_combinations,
                        "effect_combinations": report.n_effect_combinations,
                        "marked": len(report.marked),
                        "harmful": n_harmful,
                        "all_safe": report.all_safe,
                    }
                )
                + "\n"
            )
            for m, a in zip(report.marked, report.analyses):
                fc = m.combination
                rep = min_coset_rep(fc.error.z_bits)
                fh.write(
                    _jdump(
                        {
                            "type": "marked",
                            "counts": str(fc.counts),
                            "min_weight": m.min_weight,
                            "residual_rep": PauliOp.z_op(N49, rep).block_form(),
                            "witnesses": list(fc.faults),
                            "feasible_completions": a.feasible_completions,
                            "worst_residual": a.worst_residual,
                            "harmful": a.harmful,
                        }
                    )
                    + "\n"
                )
    return 0 if report.all_safe else 1


def cmd_decode(args) -> int:
    try:
        with open(args.bundle) as fh:
            text = fh.read()
    except OSError as exc:
        print(f"error: cannot read bundle file: {exc}", file=sys.stderr)
        return 2
    try:
        bundle = OutcomeBundle.parse(text)
    except ValueError as exc:
        print(f"error: malformed bundle: {exc}", file=sys.stderr)
        return 2
    table = build_lookup_table(
        args.max_faults,
        flagged=not args.no_flags,
        interleaved=args.ordering == "permuted",
        workers=args.workers,
    )
    correction, report = decode_with_report(bundle, table)
    if report.fallback_used:
        print(
            "note: observation outside the fault table; all-ones block "
            "parity and outer fix-up applied",
            file=sys.stderr,
        )
    with _sink(args.out) as fh:
        if args.format == "text":
            fh.write(str(correction) + "\n")
        else:
            fh.write(
                _jdump(
                    {
                        "correction": str(correction),
                        "fallback": report.fallback_used,
                        "z_parity": format_bits(report.z_side.parity, 7),
                        "x_parity": format_bits(report.x_side.parity, 7),
                    }
                )
                + "\n"
            )
    return 0


def cmd_reproduce_table1(args) -> int:
    rows = reproduce_table1()
    text = render_table1(rows)
    matches = text == TABLE1_GOLDEN
    with _sink(args.out) as fh:
        if args.format == "text":
            fh.write(text)
        else:
            for r in rows:
                fh.write(
                    _jdump(
                        {
                            "form": r.form,
                            "m": list(r.m_values),
                            "stilde": format_bits(r.stilde, 3),
                            "tau": format_bits(r.tau, 7),
                            "block_parity": format_bits(r.block_parity, 7),
                        }
                    )
                    + "\n"
                )
    if not matches:
        print("error: computed table deviates from the pinned reference",
              file=sys.stderr)
    return 0 if matches else 1


# ---------------------------------------------------------------------------
# Parser


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wpec",
        description="weight-parity error correction: table builds, "
        "exhaustive fault audits, and bundle decoding",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    output = argparse.ArgumentParser(add_help=False)
    output.add_argument(
        "--out", metavar="PATH", help="write output to PATH instead of stdout"
    )
    output.add_argument(
        "--format",
        choices=("text", "json-lines"),
        default="text",
        help="output format (default: text)",
    )

    build = argparse.ArgumentParser(add_help=False)
    build.add_argument(
        "--max-faults",
        type=int,
        choices=(1, 2, 3),
        default=3,
        help="fault budget for the enumeration (default: 3)",
    )
    build.add_argument(
        "--ordering",
        choices=("permuted", "normal"),
        default="permuted",
        help="outer-circuit CNOT order; 'normal' is the blockwise "
        "negative control (default: permuted)",
    )
    build.add_argument(
        "--no-flags",
        action="store_true",
        help="build inner circuits without flag qubits (negative control)",
    )
    build.add_argument(
        "--workers",
        type=int,
        metavar="N",
        help="enumeration processes (default: WPEC_WORKERS or the CPU "
        "count; never changes output bytes)",
    )

    p = sub.add_parser(
        "gen-table",
        parents=[build, output],
        help="enumerate fault combinations and emit the decoding lookup table",
    )
    p.set_defaults(func=cmd_gen_table)

    p = sub.add_parser(
        "verify-claims",
        parents=[output],
        help="exhaustive structural and decoding checks for one code",
    )
    p.add_argument(
        "--code", required=True, choices=sorted(_CLAIM_SUITES), help="code to check"
    )
    p.set_defaults(func=cmd_verify_claims)

    p = sub.add_parser(
        "verify-appendix-a",
        parents=[build, output],
        help="audit the lookup table: every observation must pin down "
        "one block parity",
    )
    p.set_defaults(func=cmd_verify_appendix_a)

    p = sub.add_parser(
        "verify-appendix-b",
        parents=[output],
        help="scan final-round fault combinations under the relaxed "
        "marking rule and post-analyze the marked ones",
    )
    p.add_argument(
        "--max-faults", type=int, choices=(1, 2, 3), default=3,
        help="fault budget (default: 3)",
    )
    p.add_argument(
        "--workers", type=int, metavar="N",
        help="enumeration processes (never changes output bytes)",
    )
    p.set_defaults(func=cmd_verify_appendix_b)

    p = sub.add_parser(
        "decode",
        parents=[build, output],
        help="decode a stable outcome-bundle file into a 49-qubit correction",
    )
    p.add_argument("bundle", help="bundle file: five labeled bitstring lines")
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser(
        "reproduce-table1",
        parents=[output],
        help="emit the 13-row single-fault classification table of the "
        "blockwise outer circuit and compare it to the pinned reference",
    )
    p.set_defaults(func=cmd_reproduce_table1)

    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except BrokenPipeError:
        # downstream consumer (head, less) closed the pipe; exit the way
        # a signal-terminated process would, without a traceback
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        return 141


if __name__ == "__main__":
    sys.exit(main())
