"""Acceptance gate: the nine shipping criteria, one per test, each
printing a PASS/FAIL line with its headline numbers.

Criteria with a stated runtime bound assert it; enumeration-heavy
criteria assert exact counts with zero tolerance.
"""

import itertools
import time

import numpy as np
import pytest

from wpec.cli import main
from wpec.codes import (
    GOLAY_ROWS,
    LOGICAL7,
    LOGICAL23,
    N7,
    N23,
    N49,
    STAB7_SET,
    golay_syndrome,
    min_coset_rep,
    syndrome7,
)
from wpec.decoder import (
    LogicalClass,
    build_correction_table,
    classify_logical,
    wpec_golay,
    wpec_steane,
)
from wpec.pauli import PauliOp
from wpec.protocol import (
    check_ftec_conditions,
    exhaustive_input_trials,
    sample_trials,
)
from wpec.verifier import (
    TABLE1_GOLDEN,
    FaultNumberCombination,
    build_lookup_table,
    render_table1,
    reproduce_table1,
    run_appendix_b,
    verify_claim2,
)


@pytest.fixture(scope="session")
def table3():
    return build_lookup_table(3)


def _report(capsys, criterion: str, ok: bool, detail: str) -> None:
    with capsys.disabled():
        print(f"{'PASS' if ok else 'FAIL'} {criterion}: {detail}")
    assert ok, f"{criterion}: {detail}"


def test_criterion_1_single_fault_table(capsys):
    t0 = time.perf_counter()
    rows = reproduce_table1()
    text = render_table1(rows)
    dt = time.perf_counter() - t0
    ok = len(rows) == 13 and text == TABLE1_GOLDEN and dt < 1.0
    _report(
        capsys,
        "criterion 1 (single-fault table)",
        ok,
        f"{len(rows)} rows, golden match {text == TABLE1_GOLDEN}, {dt:.2f}s",
    )


def test_criterion_2_centralizer_and_equivalence(capsys):
    t0 = time.perf_counter()
    central = [m for m in range(128) if syndrome7(m) == 0]
    even = {m for m in central if m.bit_count() % 2 == 0}
    odd = {m for m in central if m.bit_count() % 2 == 1}
    census = (
        len(central) == 16
        and even == set(STAB7_SET)
        and odd == {m ^ LOGICAL7 for m in STAB7_SET}
        and all(
            classify_logical(PauliOp.z_op(N7, m))
            == (LogicalClass.Z if m.bit_count() % 2 else LogicalClass.I)
            for m in central
        )
    )
    disagreements = 0
    for e1 in range(128):
        s1, p1 = syndrome7(e1), e1.bit_count() & 1
        for e2 in range(128):
            equivalent = (e1 ^ e2) in STAB7_SET
            implied = s1 == syndrome7(e2) and p1 == e2.bit_count() & 1
            disagreements += equivalent != implied
    dt = time.perf_counter() - t0
    ok = census and disagreements == 0 and dt < 1.0
    _report(
        capsys,
        "criterion 2 (centralizer census and equivalence rule)",
        ok,
        f"16 elements 8/8, {disagreements} disagreements over 16384 pairs, {dt:.2f}s",
    )


def test_criterion_3_wpec_soundness(capsys):
    ct = build_correction_table()
    steane_bad = sum(
        (m ^ wpec_steane(syndrome7(m), m.bit_count() & 1, ct).z_bits)
        not in STAB7_SET
        for m in range(128)
    )

    t0 = time.perf_counter()
    leaders = np.zeros(2048, dtype=np.uint32)
    for s, op in ct.golay_min.items():
        leaders[s] = op.z_bits
    assert all(golay_syndrome(int(leaders[s])) == s for s in range(2048))
    assert golay_syndrome(LOGICAL23) == 0
    e = np.arange(1 << N23, dtype=np.uint32)
    synd = np.zeros(1 << N23, dtype=np.uint16)
    for b in range(N23):
        col = np.uint16(golay_syndrome(1 << b))
        synd ^= (((e >> np.uint32(b)) & np.uint32(1)).astype(np.uint16)) * col
    flip = ((np.bitwise_count(leaders[synd]) ^ np.bitwise_count(e)) & 1).astype(bool)
    corr = leaders[synd] ^ np.where(flip, np.uint32(LOGICAL23), np.uint32(0))
    # residual has the trivial syndrome by the leader check above; even
    # weight then makes it a stabilizer (criterion 4 establishes the
    # parity split), so odd residuals are the only possible failures
    golay_bad = int(((np.bitwise_count(e ^ corr) & 1) != 0).sum())
    import random

    rng = random.Random(99)
    for _ in range(1000):
        m = rng.getrandbits(N23)
        c = wpec_golay(golay_syndrome(m), m.bit_count() & 1, ct)
        assert c.z_bits == int(corr[m])
    dt = time.perf_counter() - t0
    ok = steane_bad == 0 and golay_bad == 0 and dt < 300.0
    _report(
        capsys,
        "criterion 3 (weight-parity decoding soundness)",
        ok,
        f"2^7 errors {steane_bad} bad, 2^23 errors {golay_bad} bad, {dt:.1f}s",
    )


def test_criterion_4_golay_parity_structure(capsys):
    t0 = time.perf_counter()
    span = np.zeros(1, dtype=np.uint32)
    for g in GOLAY_ROWS:
        span = np.concatenate([span, span ^ np.uint32(g)])
    n_stab = len(np.unique(span))
    odd_stab = int(((np.bitwise_count(span) & 1) != 0).sum())
    even_logical = int(
        ((np.bitwise_count(span ^ np.uint32(LOGICAL23)) & 1) == 0).sum()
    )
    dt = time.perf_counter() - t0
    ok = n_stab == 2048 and odd_stab == 0 and even_logical == 0 and dt < 1.0
    _report(
        capsys,
        "criterion 4 (23-qubit parity structure)",
        ok,
        f"{n_stab} stabilizers, {odd_stab} odd, {even_logical} even logicals, {dt:.2f}s",
    )


def test_criterion_5_lookup_table_audit(capsys, table3):
    report = verify_claim2(table3)
    ok = (
        report.ok
        and report.n_violations == 0
        and report.flagged
        and report.interleaved
        and report.max_faults == 3
    )
    _report(
        capsys,
        "criterion 5 (full-budget lookup audit)",
        ok,
        f"{report.n_records} records, {report.n_groups} partitions, "
        f"{report.n_violations} violations",
    )


def test_criterion_6_final_round_scan(capsys):
    expected_counts = FaultNumberCombination(v_g2=1, v_w=2)
    results = {}
    for budget in (1, 2, 3):
        results[budget] = run_appendix_b(budget)
    r3 = results[3]
    counts_ok = len(r3.marked) == 6 and all(
        m.combination.counts == expected_counts for m in r3.marked
    )
    patterns_ok = True
    for m in r3.marked:
        rep = min_coset_rep(m.combination.error.z_bits)
        blocks = [(rep >> (7 * b)) & 127 for b in range(7)]
        nontrivial = [b for b in blocks if b]
        patterns_ok &= len(nontrivial) == 2 and all(
            b in (1, 1 << 6) for b in nontrivial
        )
    weight_ok = r3.all_safe and all(
        a.worst_residual is not None and a.worst_residual <= 3
        for a in r3.analyses
    )
    small_ok = all(
        results[v].marked == () and results[v].all_safe for v in (1, 2)
    )
    ok = counts_ok and patterns_ok and weight_ok and small_ok
    _report(
        capsys,
        "criterion 6 (final-round scan)",
        ok,
        f"6 marked with one outer gate fault and two wait errors, "
        f"edge-qubit pair patterns, worst residual "
        f"{max(a.worst_residual for a in r3.analyses)}, "
        f"budgets 1 and 2 mark nothing",
    )


def test_criterion_7_negative_control(capsys):
    table = build_lookup_table(3, flagged=False, interleaved=False)
    report = verify_claim2(table)
    ok = not report.ok and report.n_violations >= 1
    _report(
        capsys,
        "criterion 7 (negative control)",
        ok,
        f"blockwise flagless circuits: {report.n_violations} violations "
        f"in {report.n_violated_groups} partitions",
    )


def test_criterion_8_protocol_conditions(capsys, table3):
    exhaustive = check_ftec_conditions(exhaustive_input_trials(3), table=table3)
    sampled = check_ftec_conditions(sample_trials(10000, seed=20260816), table=table3)
    ok = (
        exhaustive.ok
        and exhaustive.n_trials == 19650
        and exhaustive.n_condition1 == 19650
        and sampled.ok
        and sampled.n_trials == 10000
        and sampled.n_condition2 == 10000
        and exhaustive.max_rounds_used <= 16
        and sampled.max_rounds_used <= 16
    )
    _report(
        capsys,
        "criterion 8 (protocol fault-tolerance conditions)",
        ok,
        f"exhaustive {exhaustive.n_trials} inputs clean, "
        f"{sampled.n_trials} sampled schedules clean "
        f"(condition 1 on {sampled.n_condition1}), "
        f"max rounds {max(exhaustive.max_rounds_used, sampled.max_rounds_used)}",
    )


def test_criterion_9_determinism(capsys, tmp_path):
    outputs = {}
    for tag, workers in (("a", "1"), ("b", "2")):
        t1 = tmp_path / f"table1_{tag}.txt"
        main(["reproduce-table1", "--out", str(t1)])
        a3 = tmp_path / f"audit_{tag}.txt"
        main(["verify-appendix-a", "--max-faults", "3",
              "--workers", workers, "--out", str(a3)])
        b3 = tmp_path / f"scan_{tag}.txt"
        main(["verify-appendix-b", "--max-faults", "3",
              "--workers", workers, "--out", str(b3)])
        outputs[tag] = (t1.read_bytes(), a3.read_bytes(), b3.read_bytes())
    ok = outputs["a"] == outputs["b"] and all(len(x) > 0 for x in outputs["a"])
    _report(
        capsys,
        "criterion 9 (worker-count determinism)",
        ok,
        "single-fault table, lookup audit and final-round scan "
        "byte-identical across worker counts",
    )
