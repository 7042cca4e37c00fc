"""Fault-enumeration engine tests.

Slow exhaustive checks (the full 3-fault table, the final-round scan)
run once per module through fixtures; the numbers frozen here were
cross-checked against independent recomputations before being pinned.
"""

import random

import numpy as np
import pytest

from wpec import verifier as v
from wpec.codes import (
    PCANON,
    STAB7,
    block_parity,
    level1_syndrome,
    min_coset_rep,
    min_coset_weight,
    syndrome7,
    tau_from_syndrome,
)
from wpec.decoder import LOGICAL_REP7, build_correction_table
from wpec.pauli import PauliOp
from wpec.verifier import (
    FaultCombination,
    FaultNumberCombination,
    TABLE1_GOLDEN,
    build_lookup_table,
    fault_model,
    find_fault_combination,
    pack_signature,
    relaxed_mark,
    render_table1,
    reproduce_table1,
    run_appendix_b,
    sigma,
    verify_claim2,
)


@pytest.fixture(scope="module")
def table3():
    return build_lookup_table(3)


@pytest.fixture(scope="module")
def report3(table3):
    return verify_claim2(table3)


@pytest.fixture(scope="module")
def final_round_report():
    return run_appendix_b(3)


# ---------------------------------------------------------------------------
# Fault model and signatures


def test_pool_sizes():
    m = fault_model()
    assert m.pool_sizes() == {"G1": 210, "G2": 165, "W": 49, "F": 21}


def test_flagless_model_has_no_flag_pool():
    m = fault_model(flagged=False)
    assert m.pool_sizes()["F"] == 0
    assert all(a.flag == 0 for a in m.all_atoms())


def test_distinct_single_signatures():
    m = fault_model()
    # independent recomputation: per-block syndrome/parity tuples
    seen = set()
    for a in m.all_atoms():
        op = PauliOp.z_op(49, a.error)
        blocks = tuple(syndrome7(op.restrict(b).z_bits) for b in range(7))
        par = block_parity(a.error)
        canon = min(par ^ s for s in STAB7)
        key = (blocks, a.flag, canon)
        if key != ((0,) * 7, 0, 0):
            seen.add(key)
    assert len(seen) == 208
    assert len(m.signature_pool()) == 208


def test_pack_signature_fields():
    # qubits 1 and 8: one Z in block 1 and one in block 2
    e = (1 << 0) | (1 << 7)
    sig = pack_signature(e, 0b101)
    assert sig & 127 == PCANON[0b0000011] == 3
    assert (sig >> 7) & ((1 << 21) - 1) == 0b101
    assert sig >> 28 == level1_syndrome(e)
    assert level1_syndrome(e) == 1 | (1 << 3)


def test_full_generator_signature_is_trivial():
    # an ancilla Z before the first CNOT recreates the measured generator
    m = fault_model()
    prep = [a for _, pool in m.gate2 for a in pool if a.label.endswith("@-1:Z")]
    assert len(prep) == 3
    for a in prep:
        assert a.error.bit_count() == 28
        assert min_coset_weight(a.error) == 0
        assert a.flag == 0
        assert a.signature == 0


# ---------------------------------------------------------------------------
# Lookup tables


def test_small_tables_are_clean():
    t1 = build_lookup_table(1)
    assert (t1.n_records, t1.n_groups) == (209, 39)
    r1 = verify_claim2(t1)
    assert r1.ok and (r1.n_condition1, r1.n_condition2) == (39, 0)

    t2 = build_lookup_table(2)
    assert (t2.n_records, t2.n_groups) == (19986, 468)
    r2 = verify_claim2(t2)
    assert r2.ok and (r2.n_condition1, r2.n_condition2) == (431, 37)


def test_pair_records_match_pure_python():
    # the numpy pipeline for two faults against a set-comprehension oracle
    m = fault_model()
    atoms = m.all_atoms()
    sigs = sorted({v._canon_sig(a.signature) for a in atoms} - {0})
    reach = {0}
    reach.update(sigs)
    for i in range(len(sigs)):
        for j in range(i + 1, len(sigs)):
            reach.add(v._canon_sig(sigs[i] ^ sigs[j]))
    assert len(reach) == build_lookup_table(2).n_records


def test_full_table_audit(table3, report3):
    assert table3.n_records == 1140873
    assert table3.n_groups == 1012
    assert report3.ok
    assert report3.n_violations == 0
    assert (report3.n_condition1, report3.n_condition2) == (289, 723)
    assert report3.n_violated_groups == 0


def test_combination_counts(table3):
    counts = dict(table3.combination_counts)
    assert counts[FaultNumberCombination()] == 1
    assert counts[FaultNumberCombination(v_g1a=1)] == 210
    assert counts[FaultNumberCombination(v_g2=1)] == 165
    assert counts[FaultNumberCombination(v_w=2)] == 49 * 50 // 2
    assert counts[FaultNumberCombination(v_g1a=1, v_g2=1, v_f=1)] == 210 * 165 * 21
    assert len(counts) == 35  # number partitions of <=3 over four categories


def test_lookup_parity_known_observation(table3):
    # two idle Z errors, qubits 1 and 8
    e = (1 << 0) | (1 << 7)
    s = level1_syndrome(e)
    p = block_parity(e)
    got = table3.lookup_parity(syndrome7(p), tau_from_syndrome(s), s, 0)
    assert got == PCANON[p] == 3


def test_lookup_parity_sampled_records(table3):
    m = fault_model()
    atoms = m.all_atoms()
    rng = random.Random(11)
    for _ in range(2000):
        picks = [rng.randrange(len(atoms)) for _ in range(rng.choice((1, 2, 3)))]
        e = f = 0
        for i in picks:
            e ^= atoms[i].error
            f ^= atoms[i].flag
        s = level1_syndrome(e)
        p = block_parity(e)
        got = table3.lookup_parity(syndrome7(p), tau_from_syndrome(s), s, f)
        assert got == PCANON[p]


def test_lookup_parity_out_of_table(table3):
    present = set(int(h) for h in table3._group_high)
    missing = next(
        h for h in range(8 << 7) if h not in present
    )
    assert table3.lookup_parity(missing >> 7, missing & 127, 0, 0) is None

    # a mixed partition with an impossible flag pattern
    tags = table3.group_tags()
    g = tags.index("2")
    high = int(table3._group_high[g])
    key0 = int(table3.keys[int(table3._group_start[g])])
    s0 = (key0 >> 28) & ((1 << 21) - 1)
    all_flags = (1 << 21) - 1  # needs 21 faults, never recorded
    assert table3.lookup_parity(high >> 7, high & 127, s0, all_flags) is None


def test_corrections_return_to_stabilizer(table3):
    ct = build_correction_table()

    def correction_for(parity, s21):
        mask = 0
        for b in range(7):
            sb = (s21 >> (3 * b)) & 7
            odd = (parity >> b) & 1
            if sb == 0:
                blk = LOGICAL_REP7 if odd else 0
            elif odd:
                blk = ct.wt1[sb].z_bits
            else:
                blk = ct.wt2[sb].z_bits
            mask |= blk << (7 * b)
        return mask

    m = fault_model()
    atoms = m.all_atoms()

    def check(e, f):
        s = level1_syndrome(e)
        p = block_parity(e)
        got = table3.lookup_parity(syndrome7(p), tau_from_syndrome(s), s, f)
        assert got == PCANON[p]
        assert min_coset_weight(e ^ correction_for(got, s)) == 0

    for a in atoms:  # every single fault
        check(a.error, a.flag)
    rng = random.Random(7)
    for _ in range(1500):  # sampled pairs and triples
        picks = [rng.randrange(len(atoms)) for _ in range(rng.choice((2, 3)))]
        e = f = 0
        for i in picks:
            e ^= atoms[i].error
            f ^= atoms[i].flag
        check(e, f)


def test_witnesses_reproduce_records(table3):
    model = fault_model()
    prov = v._provenance(model)
    rng = random.Random(3)
    for _ in range(60):
        key = int(table3.keys[rng.randrange(table3.n_records)])
        sig = v._sig_from_key(key)
        found = prov.find(sig)
        assert found is not None and len(found) <= 3
        e = f = 0
        for i in found:
            e ^= prov.atoms[i].error
            f ^= prov.atoms[i].flag
        assert v._canon_sig(pack_signature(e, f)) == v._canon_sig(sig)


def test_find_fault_combination_on_first_record(table3):
    labels = find_fault_combination(table3, int(table3.keys[0]))
    assert labels == ()  # the no-fault record


def test_table_render_roundtrip(tmp_path):
    t1 = build_lookup_table(1)
    text = t1.render()
    lines = text.splitlines()
    assert len(lines) == t1.n_records
    for line in lines[:20]:
        s, s2, tau, f, p, tag = line.split()
        assert (len(s), len(s2), len(tau), len(f), len(p)) == (21, 3, 7, 21, 7)
        assert tag in ("1", "2", "!")
    path = tmp_path / "table.txt"
    t1.write(str(path))
    assert path.read_text() == text


def test_worker_determinism():
    k1 = build_lookup_table(3, workers=1).keys
    k2 = build_lookup_table(3, workers=2).keys
    assert np.array_equal(k1, k2)


def test_workers_env_override(monkeypatch):
    monkeypatch.setenv("WPEC_WORKERS", "2")
    assert v._resolve_workers(None) == 2
    monkeypatch.delenv("WPEC_WORKERS")
    assert v._resolve_workers(None) == 1
    assert v._resolve_workers(3) == 3


# ---------------------------------------------------------------------------
# Negative controls


def test_flagless_blockwise_circuits_violate():
    t = build_lookup_table(3, flagged=False, interleaved=False)
    r = verify_claim2(t)
    assert r.n_violations == 37241
    first = r.violations[0]
    assert first.parity_a != first.parity_b
    assert first.witness_a or first.witness_b
    # each countermeasure is necessary on its own
    assert not verify_claim2(build_lookup_table(3, flagged=False)).ok
    assert not verify_claim2(build_lookup_table(3, interleaved=False)).ok


def test_violations_grow_monotonically():
    kw = dict(flagged=False, interleaved=False)
    r2 = verify_claim2(build_lookup_table(2, **kw))
    r3 = verify_claim2(build_lookup_table(3, **kw))
    assert r2.n_violations == 932
    assert r2.violation_identities <= r3.violation_identities


# ---------------------------------------------------------------------------
# Relaxed final-round conditions


def test_sigma_examples():
    # block 1: qubit 3 (syndrome weight 2); block 2: qubit 1 (weight 1)
    e = (1 << 2) | (1 << 7)
    assert sigma(e, 0) == 3
    assert sigma(e, 1) == 1
    assert sigma(e, 2) == 0
    assert sigma(PauliOp.z_op(49, e), 1) == 1
    assert sigma(0, 0) == 0
    assert sigma(0, 7) == 0
    with pytest.raises(ValueError):
        sigma(e, 8)
    with pytest.raises(ValueError):
        sigma(PauliOp.x_op(49, 1), 0)


def test_relaxed_mark_requires_weight():
    empty = FaultCombination(FaultNumberCombination(), PauliOp.z_op(49, 0))
    assert not relaxed_mark(empty)
    # flags over budget
    flagged = FaultCombination(
        FaultNumberCombination(v_g1a=1), PauliOp.z_op(49, 0), flag=1
    )
    assert not relaxed_mark(flagged)


def test_relaxed_mark_known_example():
    m = fault_model()
    atom = next(a for a in m.gate2_atoms() if a.label == "G2[z~1]@1:ZI")
    counts = FaultNumberCombination(v_g2=1, v_w=2)
    fc = FaultCombination(
        counts, PauliOp.z_op(49, atom.error), error_a=PauliOp.z_op(49, atom.error)
    )
    assert min_coset_weight(atom.error) == 2
    assert relaxed_mark(fc, 3)
    # the same fault without wait budget stays unmarked
    fc0 = FaultCombination(
        FaultNumberCombination(v_g2=1),
        PauliOp.z_op(49, atom.error),
        error_a=PauliOp.z_op(49, atom.error),
    )
    assert not relaxed_mark(fc0, 3)
    # boundary positions have light residuals and stay unmarked
    for label in ("G2[z~1]@0:ZI", "G2[z~1]@26:ZI"):
        a = next(x for x in m.gate2_atoms() if x.label == label)
        fc_edge = FaultCombination(
            counts, PauliOp.z_op(49, a.error), error_a=PauliOp.z_op(49, a.error)
        )
        assert not relaxed_mark(fc_edge, 3)


def test_final_round_scan(final_round_report):
    rep = final_round_report
    assert rep.n_number_combinations == 84
    assert len(rep.marked) == 6
    expected = {
        ("G2[z~1]@1:ZI",),
        ("G2[z~1]@25:ZI",),
        ("G2[z~2]@1:ZI",),
        ("G2[z~2]@25:ZI",),
        ("G2[z~3]@1:ZI",),
        ("G2[z~3]@25:ZI",),
    }
    assert {m.combination.faults for m in rep.marked} == expected
    for m in rep.marked:
        assert m.combination.counts == FaultNumberCombination(v_g2=1, v_w=2)
        assert m.min_weight == 2


def test_marked_residual_patterns(final_round_report):
    # coset-minimal representatives: one Z on each of two subblocks,
    # at the first or the last position, identity elsewhere
    for m in final_round_report.marked:
        rep = min_coset_rep(m.combination.error.z_bits)
        blocks = [(rep >> (7 * b)) & 127 for b in range(7)]
        nontrivial = [b for b in blocks if b]
        assert len(nontrivial) == 2
        assert set(nontrivial) <= {1 << 0, 1 << 6}
        assert blocks.count(0) == 5


def test_post_analysis_all_safe(final_round_report):
    assert final_round_report.all_safe
    for a in final_round_report.analyses:
        assert a.feasible_completions == 1
        assert a.worst_residual == 0
        assert not a.harmful
    text = final_round_report.render()
    assert "marked: 6" in text
    assert "HARMFUL" not in text


def test_smaller_budgets_mark_nothing():
    for budget in (1, 2):
        rep = run_appendix_b(budget)
        assert rep.marked == ()
        assert rep.all_safe


# ---------------------------------------------------------------------------
# The 13-row table


def test_table1_matches_golden():
    assert render_table1() == TABLE1_GOLDEN


def test_table1_rows_classify_consistently():
    rows = reproduce_table1()
    assert len(rows) == 13
    # literal parities: the fully hit class keeps the raw pattern
    first = rows[0]
    assert first.form == "PIZZZII"
    assert first.m_values == (7,)
    assert first.block_parity == 0b0011101  # blocks 1,3,4,5 odd, leftmost first
    assert PCANON[first.block_parity] == 0  # canonical form would erase it
    last = rows[-1]
    assert last.form == "IIIIIII"
    assert (last.stilde, last.tau, last.block_parity) == (0, 0, 0)


def test_claim2_report_render(report3):
    text = report3.render()
    assert "violations: 0" in text
    assert "fault budget 3" in text
    assert "(G1a 1, G1b 0, G2 0, W 0, F 0, S 0): 210" in text
