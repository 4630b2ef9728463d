"""Selective accuracy, coverage and accuracy-coverage curves of a margin law.

For a margin ``M`` and threshold ``tau >= 0`` the classifier predicts when
``|M| >= tau``; the prediction is correct when ``M >= tau``.  Hence

    coverage(tau) = P(M >= tau) + P(M <= -tau)
    accuracy(tau) = P(M >= tau) / coverage(tau)

which for continuous laws is ``(1 - F(tau)) / (F(-tau) + 1 - F(tau))``.
Accuracy is ``None`` (undefined) once coverage falls below
:data:`COVERAGE_EPS`.
"""

from __future__ import annotations

import enum
from collections.abc import Iterable, Sequence
from dataclasses import dataclass

import numpy as np

from .distributions import DEFAULT_GRID_POINTS, EmpiricalDistribution, MarginDistribution
from .errors import DegenerateTail, DensityUnavailable, InvalidParameter, NegativeThreshold, ZeroCoverage

COVERAGE_EPS = 1e-15
# thresholds with coverage at or below this floor are ignored by verdicts
COVERAGE_FLOOR = 1e-12
MONOTONE_SLACK = 1e-9
BALANCE_TOL = 1e-9


@dataclass(frozen=True)
class ThresholdGrid:
    """Strictly increasing nonnegative thresholds starting at 0."""

    taus: tuple[float, ...]

    def __post_init__(self):
        t = np.asarray(self.taus, dtype=float).ravel()
        if t.size == 0 or t[0] != 0.0:
            raise InvalidParameter("threshold grid must start at 0")
        if not np.all(np.isfinite(t)) or np.any(np.diff(t) <= 0):
            raise InvalidParameter("threshold grid must be finite and strictly increasing")
        object.__setattr__(self, "taus", tuple(float(v) for v in t))

    @classmethod
    def uniform(cls, tau_max: float, points: int = DEFAULT_GRID_POINTS) -> ThresholdGrid:
        if points < 2:
            raise InvalidParameter("a uniform grid needs at least 2 points")
        if not tau_max > 0:
            raise InvalidParameter("tau_max must be positive")
        return cls(tuple(np.linspace(0.0, tau_max, points)))

    @classmethod
    def for_distribution(cls, dist: MarginDistribution, points: int = DEFAULT_GRID_POINTS) -> ThresholdGrid:
        """Default grid: ``[0, tau_max]`` with the distribution's own ``tau_max``."""
        return cls.uniform(dist.tau_max(), points)

    @classmethod
    def from_values(cls, values: Iterable[float]) -> ThresholdGrid:
        """Sorted distinct nonnegative values with 0 prepended."""
        vals = sorted({0.0, *(float(v) for v in values)})
        if vals[0] < 0:
            raise NegativeThreshold(f"negative threshold {vals[0]!r}")
        return cls(tuple(vals))

    def refined(self, factor: int = 2) -> ThresholdGrid:
        """Insert ``factor - 1`` equally spaced points into every gap."""
        t = np.asarray(self.taus)
        pieces = [np.linspace(a, b, factor + 1)[:-1] for a, b in zip(t[:-1], t[1:])]
        return ThresholdGrid(tuple(np.concatenate(pieces + [t[-1:]])))

    def __len__(self) -> int:
        return len(self.taus)

    def __iter__(self):
        return iter(self.taus)

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.taus)


@dataclass(frozen=True)
class CurvePoint:
    tau: float
    coverage: float
    accuracy: float | None


class Ordering(str, enum.Enum):
    LEFT_DOMINATES = "left-dominates"
    RIGHT_DOMINATES = "right-dominates"
    BALANCED = "balanced"


class Monotonicity(str, enum.Enum):
    """Shape of an accuracy curve.

    ``CONSTANT`` is both increasing and decreasing; use :attr:`increasing`
    and :attr:`decreasing` rather than comparing members.
    """

    INCREASING = "increasing"
    DECREASING = "decreasing"
    CONSTANT = "constant"
    MIXED = "mixed"

    @property
    def increasing(self) -> bool:
        return self in (Monotonicity.INCREASING, Monotonicity.CONSTANT)

    @property
    def decreasing(self) -> bool:
        return self in (Monotonicity.DECREASING, Monotonicity.CONSTANT)

    @classmethod
    def from_flags(cls, increasing: bool, decreasing: bool) -> Monotonicity:
        if increasing and decreasing:
            return cls.CONSTANT
        if increasing:
            return cls.INCREASING
        if decreasing:
            return cls.DECREASING
        return cls.MIXED


def _check_tau(tau) -> np.ndarray:
    t = np.asarray(tau, dtype=float)
    if np.any(t < 0):
        raise NegativeThreshold(f"threshold must be >= 0, got {tau!r}")
    return t


def _tails(dist: MarginDistribution, tau) -> tuple[np.ndarray, np.ndarray]:
    """``(P(M >= tau), P(M <= -tau))``; at ``tau = 0`` a zero margin counts once, as correct."""
    t = _check_tau(tau)
    upper = np.asarray(dist.sf(t), dtype=float)
    lower = np.asarray(dist.cdf(-t), dtype=float)
    if isinstance(dist, EmpiricalDistribution):
        at_zero = t == 0.0
        if np.any(at_zero):
            zero_mass = np.asarray(dist.cdf(0.0)) - np.asarray(dist.cdf(np.nextafter(0.0, -1.0)))
            lower = np.where(at_zero, lower - zero_mass, lower)
    return upper, lower


def coverage(dist: MarginDistribution, tau):
    """Fraction of mass predicted on at ``tau``."""
    upper, lower = _tails(dist, tau)
    cov = np.clip(upper + lower, 0.0, 1.0)
    return float(cov) if np.ndim(tau) == 0 else cov


def selective_accuracy(dist: MarginDistribution, tau) -> float | None:
    """Accuracy among predicted points at scalar ``tau``; ``None`` if coverage < 1e-15."""
    if np.ndim(tau) != 0:
        raise InvalidParameter("selective_accuracy takes a scalar threshold; use accuracy_array")
    upper, lower = _tails(dist, tau)
    cov = float(upper + lower)
    if cov < COVERAGE_EPS:
        return None
    return min(max(float(upper) / cov, 0.0), 1.0)


def accuracy_array(dist: MarginDistribution, taus) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized ``(coverage, accuracy)``; undefined accuracies are NaN.

    Internal helper for bulk numerics; public curve outputs convert NaN to
    ``None`` via :func:`accuracy_coverage_curve`.
    """
    upper, lower = _tails(dist, np.asarray(taus, dtype=float))
    cov = upper + lower
    with np.errstate(invalid="ignore", divide="ignore"):
        acc = np.where(cov >= COVERAGE_EPS, upper / np.where(cov > 0, cov, 1.0), np.nan)
    return np.clip(cov, 0.0, 1.0), np.clip(acc, 0.0, 1.0)


def accuracy_coverage_curve(dist: MarginDistribution, grid: ThresholdGrid | None = None) -> list[CurvePoint]:
    """One :class:`CurvePoint` per grid threshold, in grid order."""
    if grid is None:
        grid = ThresholdGrid.for_distribution(dist)
    cov, acc = accuracy_array(dist, grid.array)
    # keep coverage nonincreasing against round-off in independent tail evaluations
    cov = np.minimum.accumulate(cov)
    return [
        CurvePoint(t, float(c), None if np.isnan(a) else float(a))
        for t, c, a in zip(grid.taus, cov, acc)
    ]


def _require_density(dist: MarginDistribution) -> None:
    if not dist.has_density:
        raise DensityUnavailable(f"{type(dist).__name__} has no density")


def accuracy_derivative(dist: MarginDistribution, tau):
    """Closed-form ``dA/dtau = [f(-t)(1-F(t)) - f(t)F(-t)] / coverage^2``.

    Raises:
        DensityUnavailable: for empirical laws.
        ZeroCoverage: when coverage at ``tau`` is below 1e-15.
    """
    _require_density(dist)
    t = _check_tau(tau)
    upper, lower = _tails(dist, t)
    cov = upper + lower
    if np.any(cov < COVERAGE_EPS):
        raise ZeroCoverage(f"coverage below {COVERAGE_EPS} at tau={tau!r}")
    num = np.asarray(dist.pdf(-t)) * upper - np.asarray(dist.pdf(t)) * lower
    out = num / cov**2
    return float(out) if np.ndim(tau) == 0 else out


def monotonicity_condition(dist: MarginDistribution, tau: float) -> Ordering:
    """Compare ``f(-tau)/F(-tau)`` with ``f(tau)/(1 - F(tau))``.

    ``LEFT_DOMINATES`` corresponds to a nonnegative accuracy derivative at
    ``tau``.  Ratios within a relative 1e-9 are ``BALANCED``.

    Raises:
        DegenerateTail: if either tail mass underflows to zero.
    """
    _require_density(dist)
    upper, lower = _tails(dist, tau)
    upper, lower = float(upper), float(lower)
    if lower <= np.finfo(float).tiny or upper <= np.finfo(float).tiny:
        raise DegenerateTail(f"tail mass underflows at tau={tau!r}")
    left = float(dist.pdf(-tau)) / lower
    right = float(dist.pdf(tau)) / upper
    if abs(left - right) <= BALANCE_TOL * max(1.0, abs(left), abs(right)):
        return Ordering.BALANCED
    return Ordering.LEFT_DOMINATES if left > right else Ordering.RIGHT_DOMINATES


def classify_monotonicity(
    dist: MarginDistribution,
    grid: ThresholdGrid | None = None,
    slack: float = MONOTONE_SLACK,
) -> Monotonicity:
    """Classify the accuracy curve from the sign of its derivative on ``grid``.

    Increasing iff the derivative is ``>= -slack`` at every grid threshold
    whose coverage exceeds 1e-12; decreasing symmetrically.  A curve that
    passes both tests is ``CONSTANT``.
    """
    _require_density(dist)
    if grid is None:
        grid = ThresholdGrid.for_distribution(dist)
    taus = grid.array
    cov, _ = accuracy_array(dist, taus)
    taus = taus[cov > COVERAGE_FLOOR]
    if taus.size == 0:
        raise ZeroCoverage("no grid threshold has coverage above the floor")
    d = np.asarray(accuracy_derivative(dist, taus))
    return Monotonicity.from_flags(bool(np.all(d >= -slack)), bool(np.all(d <= slack)))


def classify_points(accuracies: Sequence[float | None], slack: float = 1e-12) -> Monotonicity:
    """Descriptive shape of a sampled curve, skipping undefined accuracies."""
    vals = np.asarray([a for a in accuracies if a is not None], dtype=float)
    if vals.size < 2:
        return Monotonicity.CONSTANT
    diffs = np.diff(vals)
    return Monotonicity.from_flags(bool(np.all(diffs >= -slack)), bool(np.all(diffs <= slack)))
