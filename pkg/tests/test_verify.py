import json

import pytest
from hypothesis import given, settings, strategies as st

from bpthh.arith import AbelianGroup
from bpthh.brun import ExtensionRecord, run_brun
from bpthh.catalog import DimensionSeries, rational_thh, thh_ell, thh_ell_zp
from bpthh.graded import Gen, free_module, zero_module
from bpthh.verify import (
    FAIL,
    FLAGGED,
    PASS,
    Report,
    all_flags,
    check_rational_ranks,
    compare_degreewise,
    length_consistency,
    lemma_b_orders,
    lemma_tower_degrees,
    lemma_v1_torsion,
    low_degree_ku_check,
    main_suite,
    rational_suite,
    reduced_closed_form,
    run_suite,
    torsion_kernel_cokernel_report,
    twisted_index,
)


def test_report_orders_diffs_and_serializes():
    r = Report("x", (0, 9))
    r.fail(7, "a", "b")
    r.fail(3, "c", "d")
    r.finish()
    assert r.status == FAIL and [d["degree"] for d in r.diffs] == [3, 7]
    assert json.dumps(r.to_dict(), sort_keys=True) == json.dumps(r.to_dict(), sort_keys=True)
    assert "first diff at 3" in r.summary()
    f = Report("y", (0, 1), flags=["note"]).finish()
    assert f.status == FLAGGED and f.ok


def test_compare_degreewise_finds_first_difference():
    A = free_module(2, [Gen("x", (), 5)])
    rep = compare_degreewise(A, zero_module(2), 20)
    # v1 x lives in every degree 5 + 2k
    assert [d["degree"] for d in rep.diffs] == list(range(5, 21, 2))
    assert compare_degreewise(thh_ell(2), thh_ell(2), 60).status == PASS
    with pytest.raises(ValueError):
        compare_degreewise(A, zero_module(3), 5)


def test_rational_ranks_detect_wrong_series():
    assert check_rational_ranks(thh_ell(2), rational_thh(1, 1, 2), 200).status == PASS
    wrong = DimensionSeries((("poly", 2), ("ext", 5)))
    rep = check_rational_ranks(thh_ell(2), wrong, 40)
    # ranks first disagree at degree 3 (lambda1 vs nothing)
    assert rep.diffs[0]["degree"] == 3


def test_length_consistency_negative_control():
    run = run_brun(2, 2, 60)
    assert length_consistency(run).status == PASS
    log = [r for r in run.extension_log if r.degree != 10]
    rep = length_consistency(run, log)
    assert rep.status == FAIL and rep.diffs[0]["degree"] == 10
    bogus = run.extension_log + [ExtensionRecord(12, "x", "y", 1)]
    assert length_consistency(run, bogus).diffs[0]["degree"] == 12


@pytest.mark.parametrize("p,D", [(2, 200), (3, 300)])
def test_torsion_kernel_cokernel(p, D):
    rep = torsion_kernel_cokernel_report(run_brun(2, p, D))
    assert rep.status == FLAGGED and not rep.diffs
    # with b_1 left out of M the kernel check breaks at |v0 b_p| = ... first near |b_1|
    assert any("k >= 1 only" in n for n in rep.notes)


def test_low_degree_ku_check():
    assert low_degree_ku_check().status == PASS
    R = reduced_closed_form(2)
    assert [R.realize_degree(d) for d in range(1, 9)] == [
        AbelianGroup(),
        AbelianGroup(),
        AbelianGroup(1),
        AbelianGroup(),
        AbelianGroup(1),
        AbelianGroup(),
        AbelianGroup(2),
        AbelianGroup(),
    ]


@pytest.mark.parametrize("p", [2, 3])
def test_v1_torsion_lemma_holds(p):
    assert lemma_v1_torsion(p, 40).status == PASS


def test_tower_inequality_counterexample_by_hand():
    # p=2: |b_2| = 18, tower on v0 b_2 has length 2 (top 22), tower on b_2 has length 6 (top 30)
    rep = lemma_tower_degrees(2, 10)
    first = rep.diffs[0]
    assert (first["degree"], first["expected"], first["computed"], first["what"]) == (18, "<= 22", "30", "i=2 j=2 h=1")
    assert all("j=" + d["what"].split()[0][2:] in d["what"] for d in rep.diffs)


def test_order_lemma_counterexample_by_hand():
    # p=3: p b_5 = v0 b_5 + v1^9 b_3 = v1^9 b_3 != 0, while b_4 has order 3
    rep = lemma_b_orders(3, 6)
    assert [d["what"] for d in rep.diffs] == ["i=5"]
    assert rep.diffs[0]["computed"] == "order p^2"


@settings(max_examples=10, deadline=None)
@given(st.sampled_from([2, 3]), st.integers(2, 40))
def test_order_lemma_fails_only_at_twisted_indices(p, i):
    rep = lemma_b_orders(p, i)
    failing = {int(d["what"][2:]) for d in rep.diffs}
    assert all(twisted_index(p, j) for j in failing)
    # the first twisted index 2p - 1 always fails
    assert bool(failing) == (i >= 2 * p - 1)


def test_twisted_index():
    assert [i for i in range(1, 30) if twisted_index(2, i)] == [3, 5, 6, 7, 9, 10, 11, 12, 13, 14, 15, 17, 18, 19, 20, 21, 22, 23, 24, 25, 26, 27, 28, 29]
    assert [i for i in range(1, 30) if twisted_index(3, i)] == [5, 8, 11, 14, 15, 17, 20, 23, 24, 26, 29]


def test_suites_carry_exactly_three_flags():
    reports = main_suite(2, 120) + rational_suite(2, 120) + run_suite("ku")
    flags = all_flags(reports)
    assert len(flags) == 3 and len(set(flags)) == 3
    assert sum(1 for r in reports if r.flags) == 3
    assert all(r.ok for r in reports)
    with pytest.raises(ValueError):
        run_suite("nope")
