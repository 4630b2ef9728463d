import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from selgroup.errors import EmptyInput, NoPredictions, TooLarge, UndefinedRate, WeightMismatch
from selgroup.references import (
    AVERAGE,
    CountTable,
    LabeledExample,
    disparity,
    empirical_curves,
    empirical_grid,
    equalized_odds_check,
    group_accuracies,
    group_agnostic_monte_carlo,
    group_agnostic_reference,
    reference_masses,
    robin_hood_brute_force,
    robin_hood_greedy,
    robin_hood_masses,
    tpr_fpr,
    worst_group,
)
from selgroup.selective import ThresholdGrid

from conftest import random_log

FOUR = [
    LabeledExample(1, "g1", True, 2.0),
    LabeledExample(2, "g1", False, 1.0),
    LabeledExample(3, "g2", True, 0.5),
    LabeledExample(4, "g2", False, 0.2),
]
FIVE = [
    LabeledExample(1, "A", True, 0.9),
    LabeledExample(2, "A", False, 0.8),
    LabeledExample(3, "A", True, 0.3),
    LabeledExample(4, "B", True, 0.7),
    LabeledExample(5, "B", False, 0.2),
]


def counts_log():
    """g1: 8 correct, 2 incorrect; g2: 2 correct, 8 incorrect.

    At tau = 1, five correct and two incorrect remain.
    """
    out, k = [], 0
    for g, n_c, n_i in (("g1", 8, 2), ("g2", 2, 8)):
        for j in range(n_c):
            out.append(LabeledExample(k, g, True, 1.5 if (g == "g1" and j < 4) or (g == "g2" and j < 1) else 0.5))
            k += 1
        for j in range(n_i):
            out.append(LabeledExample(k, g, False, 1.5 if (g == "g2" and j < 2) else 0.5))
            k += 1
    return out


# ---- curves ----------------------------------------------------------------

def test_four_example_curves():
    curves = empirical_curves(FOUR, ThresholdGrid((0.0, 0.7)))
    avg, g1, g2 = curves
    assert [c.group for c in curves] == [AVERAGE, "g1", "g2"]
    assert avg.points[0].coverage == 1.0 and avg.points[0].accuracy == 0.5
    assert g1.points[1].accuracy == 0.5
    assert g2.points[1].accuracy is None and g2.points[1].coverage == 0.0


def test_all_correct():
    log = [LabeledExample(k, "a" if k % 2 else "b", True, k / 3) for k in range(7)]
    for c in empirical_curves(log):
        assert all(p.accuracy == 1.0 for p in c.points if p.coverage > 0)


def test_ties_are_predicted():
    log = [LabeledExample(0, "a", True, 1.0), LabeledExample(1, "a", False, 1.0)]
    avg = empirical_curves(log, ThresholdGrid((0.0, 1.0, 1.5)))[0]
    assert avg.points[1].coverage == 1.0
    assert avg.points[2].coverage == 0.0 and avg.points[2].accuracy is None


def test_empty_and_weight_errors():
    with pytest.raises(EmptyInput):
        empirical_curves([])
    with pytest.raises(WeightMismatch):
        empirical_curves(FOUR, group_weights={"g1": 1.0})
    with pytest.raises(WeightMismatch):
        empirical_curves(FOUR, group_weights={"g1": 0.6, "g2": 0.6})


def test_group_weights_change_only_average():
    plain = empirical_curves(FOUR)
    weighted = empirical_curves(FOUR, group_weights={"g1": 0.9, "g2": 0.1})
    assert plain[1:] == weighted[1:]
    # at tau = 0.5 g1 holds 1/2 accuracy and g2 1/1
    t = 2
    a1 = plain[1].points[t].accuracy
    a2 = plain[2].points[t].accuracy
    assert (a1, a2) == (0.5, 1.0)
    c1, c2 = plain[1].points[t].coverage, plain[2].points[t].coverage
    expected = (0.9 * c1 * a1 + 0.1 * c2 * a2) / (0.9 * c1 + 0.1 * c2)
    assert weighted[0].points[t].accuracy == pytest.approx(expected, abs=1e-12)


def test_worst_group():
    assert worst_group(empirical_curves(FOUR)) == "g1"  # tie at 0.5 goes to the first label
    assert worst_group(empirical_curves(counts_log())) == "g2"


# ---- group-agnostic reference -----------------------------------------------

def test_counts_example_closed_form():
    table = CountTable.from_examples(counts_log(), ThresholdGrid((0.0, 1.0)))
    assert table.correct.sum(axis=0).tolist() == [10, 5]
    assert table.incorrect.sum(axis=0).tolist() == [10, 2]
    ref = group_agnostic_reference(table)
    assert ref["g1"][1] == pytest.approx(4 / 4.4, abs=1e-12)
    assert ref["g2"][1] == pytest.approx(1 / 2.6, abs=1e-12)
    assert ref["g1"][0] == pytest.approx(0.8) and ref["g2"][0] == pytest.approx(0.2)
    assert tpr_fpr(table, 1.0) == (0.5, 0.2)
    assert tpr_fpr(table, 0.0, "g2") == (1.0, 1.0)


def test_counts_example_monte_carlo():
    mc = group_agnostic_monte_carlo(counts_log(), 1.0, 10**6, seed=42)
    for g, expect in (("g1", 4 / 4.4), ("g2", 1 / 2.6)):
        assert abs(mc[g].mean - expect) <= 3 * mc[g].stderr
        assert abs(mc[g].mean - expect) <= 2e-3


def test_monte_carlo_is_deterministic_and_degenerate_case_exact():
    log = counts_log()
    assert group_agnostic_monte_carlo(log, 1.0, 1000, 7) == group_agnostic_monte_carlo(log, 1.0, 1000, 7)
    one = group_agnostic_monte_carlo(log, 0.0, 1, 3)
    assert one["g1"].mean == 0.8 and one["g2"].mean == 0.2


def test_single_group_reference_is_classifier():
    rng = np.random.default_rng(3)
    log = [LabeledExample(e.id, "only", e.correct, e.confidence) for e in random_log(rng, 40, 2)]
    table = CountTable.from_examples(log)
    ref = group_agnostic_reference(table)["only"]
    acc = group_accuracies(table)[0]
    np.testing.assert_allclose(ref, acc, atol=1e-12)
    rh = robin_hood_greedy(log)["only"]
    np.testing.assert_allclose(rh, acc, atol=1e-12)


def test_no_predictions():
    table = CountTable.from_examples(FOUR, ThresholdGrid((0.0,)))
    empty = CountTable(table.taus, table.groups, table.correct * 0, table.incorrect * 0)
    with pytest.raises(NoPredictions):
        group_agnostic_reference(empty)


def test_all_correct_reference_is_one():
    log = [LabeledExample(k, "ab"[k % 2], True, k / 5) for k in range(6)]
    ref = group_agnostic_reference(CountTable.from_examples(log))
    for acc in ref.values():
        assert np.all((acc == 1.0) | np.isnan(acc))


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(2, 80), k=st.integers(1, 4))
def test_average_identity_and_conservation(seed, n, k):
    log = random_log(np.random.default_rng(seed), n, min(k, n), confidence_levels=4)
    table = CountTable.from_examples(log)
    ref_c, ref_i = reference_masses(table)
    rh_c, rh_i = robin_hood_masses(log)
    tot_c, tot_i = table.correct.sum(axis=0), table.incorrect.sum(axis=0)
    for c, i in ((ref_c, ref_i), (rh_c, rh_i)):
        np.testing.assert_allclose(c.sum(axis=0), tot_c, atol=1e-9)
        np.testing.assert_allclose(i.sum(axis=0), tot_i, atol=1e-9)
        assert np.all(c >= 0) and np.all(i >= 0)
    curves = empirical_curves(log)
    avg = curves[0]
    for p, r, h in zip(avg.points, avg.reference_accuracy, avg.robinhood_accuracy):
        if p.accuracy is None:
            assert r is None and h is None
        else:
            assert abs(r - p.accuracy) <= 1e-12 and abs(h - p.accuracy) <= 1e-12
    # count monotonicity
    assert np.all(np.diff(table.C_g, axis=1) <= 0) and np.all(np.diff(table.I_g, axis=1) <= 0)
    np.testing.assert_allclose(table.C, table.group_weights @ table.C_g, atol=1e-12)


# ---- Robin Hood --------------------------------------------------------------

def test_five_example_brute_force():
    r = robin_hood_brute_force(FIVE, 0.25)
    assert r.disparity == pytest.approx(1 / 3)
    assert r.accuracies == {"A": pytest.approx(2 / 3), "B": 1.0}
    assert r.kept_correct == {"A": 2, "B": 1} and r.kept_incorrect == {"A": 1, "B": 0}


def test_five_example_greedy():
    grid = ThresholdGrid((0.0, 0.25))
    rh = robin_hood_greedy(FIVE, grid)
    table = CountTable.from_examples(FIVE, grid)
    acc = group_accuracies(table)
    assert rh["A"][0] == acc[0, 0] and rh["B"][0] == acc[1, 0]
    # the greedy removes B's incorrect example (B is the worse group at 0.5)
    assert rh["A"][1] == pytest.approx(2 / 3) and rh["B"][1] == 1.0


def test_brute_force_full_allocation_and_all_correct():
    r = robin_hood_brute_force(FIVE, 0.0)
    assert r.disparity == pytest.approx(abs(2 / 3 - 1 / 2))
    log = [LabeledExample(k, "ab"[k % 2], True, k) for k in range(6)]
    for tau in range(6):
        assert robin_hood_brute_force(log, tau).disparity == 0.0


def test_brute_force_guard():
    log = [LabeledExample(k, "a", True, 1.0) for k in range(21)]
    with pytest.raises(TooLarge):
        robin_hood_brute_force(log, 0.5)


def test_greedy_spills_to_next_group():
    # the worst group has no incorrect mass left to give up
    log = [
        LabeledExample(0, "a", True, 5.0),
        LabeledExample(1, "a", False, 5.0),
        LabeledExample(2, "b", False, 0.1),
        LabeledExample(3, "b", False, 0.2),
        LabeledExample(4, "c", True, 5.0),
    ]
    c, i = robin_hood_masses(log, ThresholdGrid((0.0, 0.15, 0.3)))
    assert i.sum(axis=0).tolist() == [3, 2, 1]
    assert np.all(i >= 0)


@pytest.mark.parametrize("seed", range(10))
def test_sandwich_small(seed):
    rng = np.random.default_rng(seed)
    log = random_log(rng, int(rng.integers(3, 11)), int(rng.integers(2, 4)), confidence_levels=3)
    grid = empirical_grid(log)
    table = CountTable.from_examples(log, grid)
    greedy = robin_hood_greedy(log, grid)
    actual = group_accuracies(table)
    for t, tau in enumerate(grid):
        brute = robin_hood_brute_force(log, tau).disparity
        assert brute <= disparity(g[t] for g in greedy.values())
        assert brute <= disparity(actual[:, t])


def test_disparity_skips_undefined():
    assert disparity([0.5, None, float("nan"), 0.8]) == pytest.approx(0.3)
    assert disparity([0.4]) == 0.0


# ---- equalized odds ------------------------------------------------------------

def test_reference_equalized_odds_and_classifier_gap():
    log = [
        LabeledExample(0, "w", True, 0.2),
        LabeledExample(1, "w", True, 0.3),
        LabeledExample(2, "w", False, 0.1),
        LabeledExample(3, "s", True, 0.9),
        LabeledExample(4, "s", True, 0.8),
        LabeledExample(5, "s", False, 0.7),
    ]
    rep = equalized_odds_check(CountTable.from_examples(log))
    assert rep.reference_holds
    assert rep.max_tpr_gap > 0
    assert rep.rows[0].classifier_tpr_gap == 0.0


def test_equalized_odds_single_group_and_skips():
    log = [LabeledExample(k, "a", k % 3 == 0, k / 4) for k in range(9)]
    rep = equalized_odds_check(CountTable.from_examples(log))
    assert rep.max_tpr_gap == 0 and rep.max_fpr_gap == 0
    log.append(LabeledExample(99, "z", True, 0.5))
    rep = equalized_odds_check(CountTable.from_examples(log))
    assert rep.skipped == ("z",) and rep.reference_holds


def test_undefined_rates():
    log = [LabeledExample(k, "a", True, k) for k in range(3)]
    table = CountTable.from_examples(log)
    with pytest.raises(UndefinedRate):
        tpr_fpr(table, 0.0)
    with pytest.raises(UndefinedRate):
        equalized_odds_check(table)


def test_tpr_constant_group():
    table = CountTable.from_examples(FIVE, ThresholdGrid((0.0, 0.25)))
    assert tpr_fpr(table, 0.25, "B")[0] == 1.0
