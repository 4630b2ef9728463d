import math

import mpmath
import numpy as np
import pytest

from selgroup.distributions import Gaussian, SkewSymmetric, TwoGaussianMixture, translate
from selgroup.errors import DensityUnavailable, InvalidParameter, NotLogConcave, ZeroMass
from selgroup.group_analysis import (
    Condition,
    GroupMixture,
    Outcome,
    TranslatedScaledPair,
    Which,
    cf_if,
    cf_if_array,
    gap_profile,
    group_selective_accuracy,
    necessary_condition,
    outperforms_reference,
    reference_accuracy,
    reference_accuracy_array,
    scaling_check,
)
from selgroup.distributions import EmpiricalDistribution
from selgroup.references import CountTable, LabeledExample, group_agnostic_reference
from selgroup.selective import ThresholdGrid, accuracy_array, selective_accuracy

mpmath.mp.dps = 40


def Phi(x):
    return float(mpmath.ncdf(x))


def phi(x):
    return float(mpmath.npdf(x))


PAIR = GroupMixture(0.5, Gaussian(0.5, 1.0), Gaussian(1.0, 1.0))


def logistic(mu, s=1.0):
    return SkewSymmetric(0.0, mu, s, "logistic", "logistic")


# ---- accuracies and fractions -------------------------------------------------

def test_pair_accuracies():
    assert group_selective_accuracy(PAIR, Which.WORST, 0.0) == pytest.approx(Phi(0.5), abs=1e-12)
    assert group_selective_accuracy(PAIR, "average", 0.0) == pytest.approx(0.5 * Phi(0.5) + 0.5 * Phi(1), abs=1e-12)
    assert group_selective_accuracy(PAIR, "others", 0.0) == pytest.approx(Phi(1), abs=1e-12)


def test_identical_groups_agree():
    gm = GroupMixture(0.3, Gaussian(0.7, 1.2), Gaussian(0.7, 1.2))
    for tau in (0.0, 0.5, 2.0):
        vals = {round(group_selective_accuracy(gm, w, tau), 12) for w in Which}
        assert len(vals) == 1
        assert cf_if(gm, tau) == pytest.approx((0.3, 0.3), abs=1e-12)
        assert reference_accuracy(gm, tau) == pytest.approx(selective_accuracy(gm.worst, tau), abs=1e-12)


def test_cf_if_example():
    cf, if_ = cf_if(PAIR, 0.0)
    assert cf == pytest.approx(Phi(0.5) / (Phi(0.5) + Phi(1)), abs=1e-12)
    assert if_ == pytest.approx(Phi(-0.5) / (Phi(-0.5) + Phi(-1)), abs=1e-12)


def test_cf_if_complements_and_linearity():
    taus = np.linspace(0, 5, 41)
    cf, if_ = cf_if_array(PAIR, taus)
    flipped = GroupMixture(0.5, PAIR.others, PAIR.worst)
    cf2, if2 = cf_if_array(flipped, taus)
    np.testing.assert_allclose(cf + cf2, 1.0, atol=1e-12)
    np.testing.assert_allclose(if_ + if2, 1.0, atol=1e-12)
    small = [cf_if(GroupMixture(p, PAIR.worst, PAIR.others), 0.5)[0] for p in (1e-6, 2e-6)]
    assert small[1] / small[0] == pytest.approx(2.0, rel=1e-5)


def test_zero_mass():
    gm = GroupMixture(0.5, Gaussian(0, 1), Gaussian(0, 1))
    with pytest.raises(ZeroMass):
        cf_if(gm, 50.0)
    with pytest.raises(ZeroMass):
        reference_accuracy(gm, 50.0)


def test_mixture_consistency():
    for p, (m1, s1), (m2, s2) in [(0.5, (0.5, 1), (1, 1)), (0.2, (-0.3, 0.6), (1.5, 2.0))]:
        gm = GroupMixture(p, Gaussian(m1, s1), Gaussian(m2, s2))
        explicit = TwoGaussianMixture(p, m1, s1, m2, s2)
        taus = np.linspace(0, 6, 97)
        a, b = accuracy_array(gm.average, taus), accuracy_array(explicit, taus)
        np.testing.assert_allclose(a[0], b[0], atol=1e-10)
        np.testing.assert_allclose(a[1], b[1], atol=1e-10)


# ---- reference accuracy ------------------------------------------------------------

def test_reference_at_zero_is_worst_accuracy():
    assert reference_accuracy(PAIR, 0.0) == pytest.approx(Phi(0.5), abs=1e-12)


def test_reference_formula_at_one():
    odds0 = (Phi(-0.5) / (Phi(-0.5) + Phi(-1))) / (Phi(0.5) / (Phi(0.5) + Phi(1)))
    c = 0.5 * (Phi(-0.5) + Phi(0.0))  # sf(1) of N(0.5,1) and N(1,1)
    i = 0.5 * (Phi(-1.5) + Phi(-2.0))
    expect = 1 / (1 + odds0 * i / c)
    assert reference_accuracy(PAIR, 1.0) == pytest.approx(expect, abs=1e-12)
    assert expect == pytest.approx(0.86047, abs=1e-5)


def test_reference_matches_sampled_log():
    rng = np.random.default_rng(2024)
    n = 500_000
    log = []
    for g, mu in (("wg", 0.5), ("o", 1.0)):
        m = rng.normal(mu, 1.0, n)
        log += [LabeledExample(k, g, x >= 0, abs(x)) for k, x in enumerate(m.tolist())]
    table = CountTable.from_examples(log, ThresholdGrid((0.0, 1.0)))
    sampled = group_agnostic_reference(table)["wg"][1]
    assert sampled == pytest.approx(reference_accuracy(PAIR, 1.0), abs=3e-3)


# ---- necessary condition ---------------------------------------------------------

def test_necessary_condition_violated_example():
    r = necessary_condition(PAIR)
    assert r.verdict is Condition.VIOLATED
    assert r.density_ratio == pytest.approx(phi(1) / phi(0.5), abs=1e-12)
    assert r.bound == pytest.approx((1 - Phi(1)) / (1 - Phi(0.5)), abs=1e-12)
    assert (round(r.density_ratio, 4), round(r.bound, 4)) == (0.6873, 0.5142)


def test_necessary_condition_low_variance():
    gm = GroupMixture(0.5, Gaussian(0.4, 0.45), Gaussian(1.0, 1.0))
    r = necessary_condition(gm)
    lhs = phi(1.0) / (phi(0.4 / 0.45) / 0.45)
    rhs = (1 - Phi(1.0)) / (1 - Phi(0.4 / 0.45))
    assert r.density_ratio == pytest.approx(lhs, abs=1e-12) and r.bound == pytest.approx(rhs, abs=1e-12)
    assert r.verdict is (Condition.SATISFIED if lhs <= rhs else Condition.VIOLATED)
    assert r.verdict is Condition.SATISFIED


@pytest.mark.parametrize(
    "worst,others",
    [
        (Gaussian(1.0, 1.0), Gaussian(1.0, 1.0)),  # tie
        (Gaussian(-0.2, 1.0), Gaussian(1.0, 1.0)),  # worst below 1/2
        (Gaussian(1.5, 1.0), Gaussian(1.0, 1.0)),  # not the worst group
    ],
)
def test_necessary_condition_not_applicable(worst, others):
    r = necessary_condition(GroupMixture(0.5, worst, others))
    assert r.verdict is Condition.NOT_APPLICABLE and r.reason


def test_necessary_condition_needs_density():
    gm = GroupMixture(0.5, EmpiricalDistribution((1.0, -1.0)), Gaussian(1, 1))
    with pytest.raises(DensityUnavailable):
        necessary_condition(gm)


# ---- outperformance ------------------------------------------------------------------

def test_outperform_examples():
    r = outperforms_reference(PAIR)
    assert r.verdict is Outcome.UNDERPERFORMS
    assert r.max_gap > 0 and r.witness > 0
    same = GroupMixture(0.5, Gaussian(1, 1), Gaussian(1, 1))
    assert outperforms_reference(same).verdict is Outcome.OUTPERFORMS
    assert outperforms_reference(same, exclude_ties=True).verdict is Outcome.EXCLUDED
    better = GroupMixture(0.5, Gaussian(1.5, 1), Gaussian(1, 1))
    assert outperforms_reference(better).verdict is Outcome.EXCLUDED


def test_low_variance_worst_outperforms():
    gm = GroupMixture(0.5, Gaussian(0.4, 0.45), Gaussian(1.0, 1.0))
    r = outperforms_reference(gm)
    assert r.verdict is Outcome.OUTPERFORMS
    assert r.max_gap <= 1e-9


def test_gap_profile_starts_at_zero():
    taus, gap = gap_profile(PAIR, ThresholdGrid.uniform(8.0, 64))
    assert gap[0] == 0.0
    assert taus[0] == 0.0 and np.all(np.diff(taus) > 0)


def test_max_gap_stable_under_refinement():
    grid = ThresholdGrid.for_distribution(PAIR.average)
    a = outperforms_reference(PAIR, grid).max_gap
    b = outperforms_reference(PAIR, grid.refined()).max_gap
    assert abs(a - b) < 1e-4


@pytest.mark.parametrize("family", ["gaussian", "logistic"])
@pytest.mark.parametrize("d", [0.25, 0.5, 1.0, 2.0])
def test_translation_never_beats_reference(family, d):
    worst = Gaussian(0.3, 1.0) if family == "gaussian" else logistic(0.3, 0.6)
    gm = GroupMixture(0.5, worst, translate(worst, d))
    grid = ThresholdGrid.for_distribution(gm.average)
    taus = grid.array
    acc = accuracy_array(worst, taus)[1]
    ref = reference_accuracy_array(gm, taus)
    live = np.isfinite(acc) & np.isfinite(ref)
    assert np.all(acc[live] <= ref[live] + 1e-9)
    assert outperforms_reference(gm, grid).max_gap > 0
    # full-coverage ordering for a right translation
    a_wg, a_o = gm.full_coverage_accuracies()
    assert a_wg <= a_o
    # shares: CF_wg falls, IF_wg rises, and their ratio rises
    cf, if_ = cf_if_array(gm, taus)
    cov = accuracy_array(gm.average, taus)[0]
    keep = (cov > 1e-9) & np.isfinite(cf) & np.isfinite(if_)
    cf, if_ = cf[keep], if_[keep]
    assert np.all(np.diff(cf) <= 1e-9)
    assert np.all(np.diff(if_) >= -1e-9)
    assert np.all(np.diff(if_ / cf) >= -1e-9 * np.abs(if_ / cf)[1:])


# ---- scaling ---------------------------------------------------------------------

def test_pair_density_identity():
    pair = TranslatedScaledPair(Gaussian(0.4, 0.8), 0.6, 1.5)
    assert pair.density_mismatch() < 1e-9
    assert float(pair.others.mean) == pytest.approx(1.0, abs=1e-12)
    assert pair.others.scale == pytest.approx(0.8 / 1.5)


@pytest.mark.parametrize("v", [1.0, 1.5])
def test_scaling_witness(v):
    rep = scaling_check(TranslatedScaledPair(Gaussian(0.5, 1.0), 0.5, v))
    assert rep.witness_expected
    assert rep.witness is not None
    gm = TranslatedScaledPair(Gaussian(0.5, 1.0), 0.5, v).mixture()
    assert reference_accuracy(gm, rep.witness) > selective_accuracy(gm.worst, rep.witness)


def test_scaling_below_one_is_informational():
    rep = scaling_check(TranslatedScaledPair(Gaussian(0.5, 1.0), 0.5, 0.5))
    assert not rep.witness_expected
    assert rep.comparison.verdict in (Outcome.OUTPERFORMS, Outcome.UNDERPERFORMS)


def test_scaling_requires_log_concave():
    with pytest.raises(NotLogConcave):
        scaling_check(TranslatedScaledPair(TwoGaussianMixture.symmetric(2.0, 1.0, 0.5), 0.5, 1.0))
    with pytest.raises(InvalidParameter):
        TranslatedScaledPair(Gaussian(0, 1), 0.5, 0.0)


def test_invalid_mass():
    with pytest.raises(InvalidParameter):
        GroupMixture(1.0, Gaussian(0, 1), Gaussian(1, 1))
