"""Two-group parametric analysis.

The margin law is split as ``F = p F_wg + (1 - p) F_others`` where the
worst group ``wg`` has mass ``p``.  Writing ``C_g(tau) = P_g(M >= tau)`` and
``I_g(tau) = P_g(M <= -tau)`` for the kept correct and incorrect fractions of
group ``g``, the group-agnostic reference gives the worst group accuracy

    A~_wg(tau) = 1 / (1 + IF_wg(0) / CF_wg(0) * I(tau) / C(tau))

with ``CF_wg = p C_wg / C`` and ``IF_wg = p I_wg / I``.  "For all tau"
statements are certified on a finite threshold grid, skipping thresholds
whose coverage is at or below 1e-12.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .concavity import is_log_concave_density
from .distributions import Mixture, MarginDistribution
from .errors import DensityUnavailable, InvalidParameter, NonpositiveDensity, NotLogConcave, ZeroMass
from .selective import (
    COVERAGE_FLOOR,
    ThresholdGrid,
    accuracy_array,
    selective_accuracy,
)

STRICT_TOL = 1e-12
OUTPERFORM_TOL = 1e-9
# positive gaps up to tol + BOUNDARY_BAND are flagged as borderline
BOUNDARY_BAND = 1e-6
PAIR_CHECK_TOL = 1e-9


class Which(str, enum.Enum):
    WORST = "worst"
    OTHERS = "others"
    AVERAGE = "average"


class Condition(str, enum.Enum):
    SATISFIED = "satisfied"
    VIOLATED = "violated"
    NOT_APPLICABLE = "not-applicable"


class Outcome(str, enum.Enum):
    OUTPERFORMS = "outperforms"
    UNDERPERFORMS = "underperforms"
    EXCLUDED = "excluded"


@dataclass(frozen=True)
class GroupMixture:
    """Worst group with mass ``p`` mixed with all other groups combined."""

    p: float
    worst: MarginDistribution
    others: MarginDistribution

    def __post_init__(self):
        p = float(self.p)
        if not 0.0 < p < 1.0:
            raise InvalidParameter(f"p must lie in (0, 1), got {self.p!r}")
        object.__setattr__(self, "p", p)

    @property
    def average(self) -> Mixture:
        return Mixture((self.worst, self.others), (self.p, 1.0 - self.p))

    @property
    def identical(self) -> bool:
        return self.worst == self.others

    def full_coverage_accuracies(self) -> tuple[float, float]:
        """``(A_wg(0), A_others(0))``."""
        return selective_accuracy(self.worst, 0.0), selective_accuracy(self.others, 0.0)

    @property
    def ordered(self) -> bool:
        """Whether the worst group is strictly worse at full coverage."""
        a_wg, a_o = self.full_coverage_accuracies()
        return a_wg < a_o

    def component(self, which: Which | str) -> MarginDistribution:
        which = Which(which)
        if which is Which.WORST:
            return self.worst
        if which is Which.OTHERS:
            return self.others
        return self.average


def group_selective_accuracy(gm: GroupMixture, which: Which | str, tau: float) -> float | None:
    """Selective accuracy of one component (or the mixture) at ``tau``."""
    return selective_accuracy(gm.component(which), tau)


def _masses(gm: GroupMixture, taus: np.ndarray):
    c_wg = np.asarray(gm.worst.sf(taus), dtype=float)
    i_wg = np.asarray(gm.worst.cdf(-taus), dtype=float)
    c_o = np.asarray(gm.others.sf(taus), dtype=float)
    i_o = np.asarray(gm.others.cdf(-taus), dtype=float)
    p = gm.p
    return p * c_wg, p * i_wg, p * c_wg + (1 - p) * c_o, p * i_wg + (1 - p) * i_o


def cf_if(gm: GroupMixture, tau: float) -> tuple[float, float]:
    """Worst-group shares ``(CF_wg, IF_wg)`` of kept correct and incorrect mass.

    Raises:
        ZeroMass: if ``C(tau)`` or ``I(tau)`` is zero.
    """
    pc, pi, c, i = (float(v) for v in _masses(gm, np.asarray(float(tau))))
    if c <= 0 or i <= 0:
        raise ZeroMass(f"no correct or no incorrect mass kept at tau={tau!r}")
    return pc / c, pi / i


def cf_if_array(gm: GroupMixture, taus) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized :func:`cf_if`; NaN where a denominator vanishes."""
    pc, pi, c, i = _masses(gm, np.asarray(taus, dtype=float))
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(c > 0, pc / c, np.nan), np.where(i > 0, pi / i, np.nan)


def reference_accuracy_array(gm: GroupMixture, taus) -> np.ndarray:
    """Worst-group accuracy of the group-agnostic reference at each ``tau``.

    NaN where the mixture keeps no correct mass.

    Raises:
        ZeroMass: if the worst group has no correct mass at full coverage.
    """
    taus = np.asarray(taus, dtype=float)
    pc0, pi0, _, _ = _masses(gm, np.zeros(1))
    if not pc0[0] > 0:
        raise ZeroMass("worst group has no correct mass at full coverage")
    # IF(0)/CF(0) = (I_wg(0)/I(0)) / (C_wg(0)/C(0)); the p factors cancel
    _, _, c0, i0 = _masses(gm, np.zeros(1))
    odds0 = 0.0 if pi0[0] == 0 else (pi0[0] / i0[0]) / (pc0[0] / c0[0])
    _, _, c, i = _masses(gm, taus)
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(c > 0, 1.0 / (1.0 + odds0 * i / np.where(c > 0, c, 1.0)), np.nan)


def reference_accuracy(gm: GroupMixture, tau: float) -> float:
    """Scalar :func:`reference_accuracy_array`.

    Raises:
        ZeroMass: if ``C(tau)`` or the worst group's full-coverage correct mass is zero.
    """
    val = float(reference_accuracy_array(gm, np.asarray([float(tau)]))[0])
    if math.isnan(val):
        raise ZeroMass(f"no correct mass kept at tau={tau!r}")
    return val


@dataclass(frozen=True)
class ConditionReport:
    verdict: Condition
    density_ratio: float | None = None  # f_others(0) / f_wg(0)
    bound: float | None = None  # (1 - A_others(0)) / (1 - A_wg(0))
    reason: str | None = None


def necessary_condition(gm: GroupMixture) -> ConditionReport:
    """Density-ratio test at full coverage for outperforming the reference.

    Not applicable unless ``1/2 < A_wg(0) < A_others(0) < 1`` (each with a
    1e-12 margin) and ``f_wg(0) > 0``.

    Raises:
        DensityUnavailable: if either component has no density.
    """
    for comp in (gm.worst, gm.others):
        if not comp.has_density:
            raise DensityUnavailable(f"{type(comp).__name__} has no density")
    a_wg, a_o = gm.full_coverage_accuracies()
    if not a_wg > 0.5 + STRICT_TOL:
        return ConditionReport(Condition.NOT_APPLICABLE, reason="worst-group accuracy at full coverage is not above 1/2")
    if not a_o > a_wg + STRICT_TOL:
        return ConditionReport(Condition.NOT_APPLICABLE, reason="worst group is not strictly worse at full coverage")
    if not a_o < 1.0 - STRICT_TOL:
        return ConditionReport(Condition.NOT_APPLICABLE, reason="other groups are perfectly accurate at full coverage")
    f_wg = float(gm.worst.pdf(0.0))
    if not f_wg > 0:
        return ConditionReport(Condition.NOT_APPLICABLE, reason="worst-group density vanishes at 0")
    lhs = float(gm.others.pdf(0.0)) / f_wg
    rhs = (1.0 - a_o) / (1.0 - a_wg)
    verdict = Condition.SATISFIED if lhs <= rhs + STRICT_TOL else Condition.VIOLATED
    return ConditionReport(verdict, lhs, rhs)


@dataclass(frozen=True)
class OutperformReport:
    """Grid comparison of the worst group against its reference.

    ``max_gap`` is ``max_tau (A~_wg - A_wg)`` over evaluated thresholds; the
    two agree at ``tau = 0`` so it is never negative.  ``witness`` is the
    threshold attaining it when positive.
    """

    verdict: Outcome
    max_gap: float
    witness: float | None
    near_boundary: bool = False


def _live_coverage(gm: GroupMixture, taus: np.ndarray) -> np.ndarray:
    cov_wg, _ = accuracy_array(gm.worst, taus)
    cov, _ = accuracy_array(gm.average, taus)
    return np.minimum(cov_wg, cov)


def _gaps(gm: GroupMixture, taus: np.ndarray) -> np.ndarray:
    cov_wg, acc_wg = accuracy_array(gm.worst, taus)
    cov, _ = accuracy_array(gm.average, taus)
    ref = reference_accuracy_array(gm, taus)
    live = (cov_wg > COVERAGE_FLOOR) & (cov > COVERAGE_FLOOR) & ~np.isnan(ref) & ~np.isnan(acc_wg)
    gap = np.where(live, ref - acc_wg, np.nan)
    # both sides equal the full-coverage accuracy at tau = 0
    gap[taus == 0.0] = 0.0
    return gap


def _floor_edge(gm: GroupMixture, taus: np.ndarray, live: np.ndarray) -> float | None:
    """Largest threshold still above the coverage floor, between the last live
    grid point and the next one.  ``None`` if the grid never leaves the floor."""
    dead = np.flatnonzero(~live)
    if dead.size == 0 or dead[0] == 0:
        return None
    lo, hi = float(taus[dead[0] - 1]), float(taus[dead[0]])

    def excess(t):
        c = float(_live_coverage(gm, np.array([t]))[0])
        return math.log(c) - math.log(COVERAGE_FLOOR) if c > 0 else -math.inf

    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if excess(mid) > 0:
            lo = mid
        else:
            hi = mid
    return lo


def gap_profile(gm: GroupMixture, grid: ThresholdGrid) -> tuple[np.ndarray, np.ndarray]:
    """Thresholds and reference-minus-worst gaps, NaN below the coverage floor.

    When the coverage floor is crossed inside the grid, the crossing point
    is inserted so that a gap still rising at the floor is captured at the
    floor itself rather than at whichever grid point precedes it.
    """
    taus = grid.array
    gap = _gaps(gm, taus)
    edge = _floor_edge(gm, taus, ~np.isnan(gap))
    if edge is not None and edge > 0 and edge not in taus:
        k = int(np.searchsorted(taus, edge))
        taus = np.insert(taus, k, edge)
        gap = np.insert(gap, k, _gaps(gm, np.array([edge]))[0])
    return taus, gap


def outperforms_reference(
    gm: GroupMixture,
    grid: ThresholdGrid | None = None,
    tol: float = OUTPERFORM_TOL,
    exclude_ties: bool = False,
) -> OutperformReport:
    """Whether ``A_wg(tau) >= A~_wg(tau) - tol`` at every grid threshold.

    Mixtures whose worst group is more accurate at full coverage than the
    others are ``EXCLUDED``; with ``exclude_ties`` equal full-coverage
    accuracies are excluded too.  Identical components compare equal
    everywhere without evaluation.
    """
    if grid is None:
        grid = ThresholdGrid.for_distribution(gm.average)
    a_wg, a_o = gm.full_coverage_accuracies()
    excluded = a_wg >= a_o if exclude_ties else a_wg > a_o
    if gm.identical:
        return OutperformReport(Outcome.EXCLUDED if excluded else Outcome.OUTPERFORMS, 0.0, None)
    taus, gap = gap_profile(gm, grid)
    k = int(np.nanargmax(gap))
    max_gap = max(float(gap[k]), 0.0)
    witness = float(taus[k]) if max_gap > 0 else None
    if excluded:
        return OutperformReport(Outcome.EXCLUDED, max_gap, witness)
    verdict = Outcome.UNDERPERFORMS if max_gap > tol else Outcome.OUTPERFORMS
    return OutperformReport(verdict, max_gap, witness, 0.0 < max_gap <= tol + BOUNDARY_BAND)


@dataclass(frozen=True)
class TranslatedScaledPair:
    """Worst group plus its shifted, rescaled copy as the other groups.

    The others' law is ``mu_wg + d + (X - mu_wg) / v`` for ``X`` drawn from
    the worst group, so its density is ``v f_wg(v (t - mu_o) + mu_wg)`` with
    ``mu_o = mu_wg + d``.  Means come from the distributions themselves.
    """

    worst: MarginDistribution
    d: float
    v: float

    def __post_init__(self):
        if not float(self.v) > 0:
            raise InvalidParameter(f"scale factor v must be > 0, got {self.v!r}")
        if not math.isfinite(float(self.d)):
            raise InvalidParameter("shift d must be finite")

    @property
    def others(self) -> MarginDistribution:
        mu = float(self.worst.mean)
        return self.worst.affine(mu + self.d - mu / self.v, 1.0 / self.v)

    def mixture(self, p: float = 0.5) -> GroupMixture:
        return GroupMixture(p, self.worst, self.others)

    def density_mismatch(self, points: int = 512) -> float:
        """Largest pointwise gap between the others' density and the defining formula."""
        mu_wg = float(self.worst.mean)
        mu_o = mu_wg + self.d
        xs = self.others.grid(points)
        lhs = np.asarray(self.others.pdf(xs))
        rhs = self.v * np.asarray(self.worst.pdf(self.v * (xs - mu_o) + mu_wg))
        return float(np.max(np.abs(lhs - rhs)))


@dataclass(frozen=True)
class ScalingReport:
    v: float
    d: float
    comparison: OutperformReport
    # True when v >= 1, where some threshold must favor the reference
    witness_expected: bool

    @property
    def witness(self) -> float | None:
        return self.comparison.witness


def scaling_check(pair: TranslatedScaledPair, grid: ThresholdGrid | None = None, p: float = 0.5) -> ScalingReport:
    """Compare a translated/scaled pair against the reference on ``grid``.

    For ``v >= 1`` a log-concave worst group cannot outperform everywhere,
    so the report should carry a witness threshold; for ``v < 1`` the
    verdict is informational only.

    Raises:
        NotLogConcave: if the worst group's density is not certified log-concave.
        InvalidParameter: if the pair fails its density identity.
    """
    try:
        shape = is_log_concave_density(pair.worst)
    except NonpositiveDensity as exc:
        raise NotLogConcave(str(exc)) from exc
    if not shape.holds:
        raise NotLogConcave(f"worst-group density fails log-concavity near {shape.witness!r}")
    if pair.density_mismatch() > PAIR_CHECK_TOL:
        raise InvalidParameter("pair does not satisfy its density identity")
    gm = pair.mixture(p)
    return ScalingReport(pair.v, pair.d, outperforms_reference(gm, grid), pair.v >= 1.0)
