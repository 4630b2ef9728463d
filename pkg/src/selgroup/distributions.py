"""One-dimensional margin distributions.

Every distribution exposes ``pdf``, ``cdf`` and ``sf`` (the inclusive upper
tail ``P(M >= x)``), each accepting a float or an array and returning the
same shape.  The upper tail is computed directly rather than as
``1 - cdf`` so selective accuracies stay accurate at high thresholds.

Families:

* :class:`Gaussian`
* :class:`TwoGaussianMixture` and the general finite :class:`Mixture`
* :class:`SkewSymmetric`: density ``(2/s) h(z) G(alpha z)`` with
  ``z = (x - mu)/s`` and ``h``, ``G`` drawn from a closed catalog of
  symmetric laws (``normal``, ``logistic``)
* :class:`EmpiricalDistribution`: weighted point masses, no density
* :class:`OddMonotoneTransformed`: law of ``T(X)`` for an odd, strictly
  increasing ``T`` from a closed catalog
* :class:`LocationScale`: law of ``loc + factor * X``, used when a family
  cannot absorb an affine map into its own parameters
"""

from __future__ import annotations

import bisect
import math
from abc import ABC, abstractmethod
from collections.abc import Callable, Sequence
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy import special

from .errors import (
    DensityUnavailable,
    InvalidParameter,
    NotApplicable,
    UnknownTransform,
)
from .quadrature import adaptive_simpson, simpson_panels

SQRT2 = math.sqrt(2.0)
SQRT2PI = math.sqrt(2.0 * math.pi)

# Half-width, in scale units, of the window used for quadrature.
QUAD_HALF_WIDTH = 12.0
# Half-width, in scale units, of default evaluation grids.
GRID_HALF_WIDTH = 8.0
DEFAULT_GRID_POINTS = 512

_CDF_REL_TOL = 1e-11
_TINY = 1e-300
# generic log-density/log-CDF report -inf below this; values near the
# subnormal range carry no relative precision
LOG_FLOOR = 1e-280


def _floored_log(values):
    v = np.asarray(values, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(v > LOG_FLOOR, np.log(np.where(v > 0, v, 1.0)), -np.inf)


def _out(x, value):
    """Return a float for scalar input and an ndarray otherwise."""
    if np.ndim(x) == 0:
        return float(value)
    return value


def _check_finite(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise InvalidParameter(f"{name} must be finite, got {value!r}")
    return value


def _check_positive(name: str, value: float) -> float:
    value = _check_finite(name, value)
    if value <= 0.0:
        raise InvalidParameter(f"{name} must be > 0, got {value!r}")
    return value


class MarginDistribution(ABC):
    """Interface shared by all margin laws."""

    has_density: bool = True

    @abstractmethod
    def cdf(self, x): ...

    @abstractmethod
    def sf(self, x):
        """Inclusive upper tail ``P(M >= x)``."""

    def pdf(self, x):
        raise DensityUnavailable(f"{type(self).__name__} has no density")

    def logpdf(self, x):
        return _out(x, _floored_log(self.pdf(x)))

    def logcdf(self, x):
        return _out(x, _floored_log(self.cdf(x)))

    @property
    @abstractmethod
    def center(self) -> float:
        """Location used to anchor evaluation grids."""

    @property
    @abstractmethod
    def scale(self) -> float:
        """Spread used to size evaluation grids."""

    def support_bounds(self, k: float = QUAD_HALF_WIDTH) -> tuple[float, float]:
        return self.center - k * self.scale, self.center + k * self.scale

    def quad_bounds(self) -> tuple[float, float]:
        """Integration range holding all but a negligible sliver of the mass."""
        return self.support_bounds(QUAD_HALF_WIDTH)

    def tau_max(self) -> float:
        """Largest threshold on default grids."""
        return abs(self.center) + GRID_HALF_WIDTH * self.scale

    def grid(self, points: int = DEFAULT_GRID_POINTS) -> np.ndarray:
        lo, hi = self.support_bounds(GRID_HALF_WIDTH)
        return np.linspace(lo, hi, points)

    @cached_property
    def _moments(self) -> tuple[float, float, float]:
        if not self.has_density:
            raise DensityUnavailable(f"{type(self).__name__} has no density")
        lo, hi = self.quad_bounds()
        pdf = self.pdf
        kw = dict(abs_tol=1e-13, rel_tol=1e-12)
        m = adaptive_simpson(lambda t: t * pdf(t), lo, hi, **kw)
        var = adaptive_simpson(lambda t: (t - m) ** 2 * pdf(t), lo, hi, **kw)
        m3 = adaptive_simpson(lambda t: (t - m) ** 3 * pdf(t), lo, hi, **kw)
        return m, var, m3

    @property
    def mean(self) -> float:
        return self._moments[0]

    @property
    def variance(self) -> float:
        return self._moments[1]

    @property
    def third_central_moment(self) -> float:
        return self._moments[2]

    def affine(self, loc: float, factor: float) -> MarginDistribution:
        """Law of ``loc + factor * M`` for ``factor > 0``."""
        return LocationScale(self, loc, factor)

    def shifted(self, d: float) -> MarginDistribution:
        return self.affine(d, 1.0)


# ---------------------------------------------------------------------------
# Gaussian families


@dataclass(frozen=True)
class Gaussian(MarginDistribution):
    mu: float = 0.0
    sigma: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "mu", _check_finite("mu", self.mu))
        object.__setattr__(self, "sigma", _check_positive("sigma", self.sigma))

    def _z(self, x):
        return (np.asarray(x, dtype=float) - self.mu) / self.sigma

    def pdf(self, x):
        z = self._z(x)
        return _out(x, np.exp(-0.5 * z * z) / (self.sigma * SQRT2PI))

    def logpdf(self, x):
        z = self._z(x)
        return _out(x, -0.5 * z * z - math.log(self.sigma * SQRT2PI))

    def cdf(self, x):
        return _out(x, 0.5 * special.erfc(-self._z(x) / SQRT2))

    def sf(self, x):
        return _out(x, 0.5 * special.erfc(self._z(x) / SQRT2))

    def logcdf(self, x):
        return _out(x, special.log_ndtr(self._z(x)))

    @property
    def center(self) -> float:
        return self.mu

    @property
    def scale(self) -> float:
        return self.sigma

    @property
    def mean(self) -> float:
        return self.mu

    @property
    def variance(self) -> float:
        return self.sigma**2

    @property
    def third_central_moment(self) -> float:
        return 0.0

    def affine(self, loc: float, factor: float) -> Gaussian:
        factor = _check_positive("factor", factor)
        return Gaussian(loc + factor * self.mu, factor * self.sigma)


@dataclass(frozen=True)
class Mixture(MarginDistribution):
    """Finite mixture ``sum_i w_i F_i``."""

    components: tuple[MarginDistribution, ...]
    weights: tuple[float, ...]

    def __post_init__(self):
        comps = tuple(self.components)
        ws = tuple(float(w) for w in self.weights)
        if not comps or len(comps) != len(ws):
            raise InvalidParameter("components and weights must be nonempty and equal length")
        if any(not (w > 0.0) or not math.isfinite(w) for w in ws):
            raise InvalidParameter("mixture weights must be positive")
        if abs(sum(ws) - 1.0) > 1e-12:
            raise InvalidParameter(f"mixture weights sum to {sum(ws)!r}, expected 1")
        object.__setattr__(self, "components", comps)
        object.__setattr__(self, "weights", ws)

    @property
    def has_density(self) -> bool:  # type: ignore[override]
        return all(c.has_density for c in self.components)

    def _sum(self, method: str, x):
        total = sum(w * np.asarray(getattr(c, method)(x)) for c, w in zip(self.components, self.weights))
        return _out(x, total)

    def pdf(self, x):
        return self._sum("pdf", x)

    def cdf(self, x):
        return self._sum("cdf", x)

    def sf(self, x):
        return self._sum("sf", x)

    def _logsum(self, method: str, x):
        terms = [math.log(w) + np.asarray(getattr(c, method)(x)) for c, w in zip(self.components, self.weights)]
        return _out(x, np.logaddexp.reduce(np.stack(terms), axis=0))

    def logpdf(self, x):
        return self._logsum("logpdf", x)

    def logcdf(self, x):
        return self._logsum("logcdf", x)

    @property
    def mean(self) -> float:
        return sum(w * c.mean for c, w in zip(self.components, self.weights))

    @property
    def variance(self) -> float:
        m = self.mean
        return sum(w * (c.variance + (c.mean - m) ** 2) for c, w in zip(self.components, self.weights))

    @property
    def third_central_moment(self) -> float:
        m = self.mean
        total = 0.0
        for c, w in zip(self.components, self.weights):
            d = c.mean - m
            total += w * (c.third_central_moment + 3.0 * d * c.variance + d**3)
        return total

    @property
    def center(self) -> float:
        return self.mean

    @property
    def scale(self) -> float:
        return math.sqrt(self.variance)

    def support_bounds(self, k: float = QUAD_HALF_WIDTH) -> tuple[float, float]:
        bounds = [c.support_bounds(k) for c in self.components]
        return min(b[0] for b in bounds), max(b[1] for b in bounds)

    def quad_bounds(self) -> tuple[float, float]:
        bounds = [c.quad_bounds() for c in self.components]
        return min(b[0] for b in bounds), max(b[1] for b in bounds)

    def tau_max(self) -> float:
        return max(c.tau_max() for c in self.components)

    def affine(self, loc: float, factor: float) -> Mixture:
        return Mixture(tuple(c.affine(loc, factor) for c in self.components), self.weights)


@dataclass(frozen=True)
class TwoGaussianMixture(MarginDistribution):
    """``weight * N(mu1, sigma1^2) + (1 - weight) * N(mu2, sigma2^2)``."""

    weight: float
    mu1: float
    sigma1: float
    mu2: float
    sigma2: float

    def __post_init__(self):
        w = _check_finite("weight", self.weight)
        if not 0.0 < w < 1.0:
            raise InvalidParameter(f"weight must lie in (0, 1), got {w!r}")
        object.__setattr__(self, "weight", w)
        object.__setattr__(self, "mu1", _check_finite("mu1", self.mu1))
        object.__setattr__(self, "mu2", _check_finite("mu2", self.mu2))
        object.__setattr__(self, "sigma1", _check_positive("sigma1", self.sigma1))
        object.__setattr__(self, "sigma2", _check_positive("sigma2", self.sigma2))

    @classmethod
    def symmetric(cls, mu: float, sigma: float, center: float = 0.0) -> TwoGaussianMixture:
        """Equal-weight mixture of ``N(center - mu, sigma^2)`` and ``N(center + mu, sigma^2)``."""
        return cls(0.5, center - mu, sigma, center + mu, sigma)

    @cached_property
    def _mix(self) -> Mixture:
        return Mixture(
            (Gaussian(self.mu1, self.sigma1), Gaussian(self.mu2, self.sigma2)),
            (self.weight, 1.0 - self.weight),
        )

    def pdf(self, x):
        return self._mix.pdf(x)

    def cdf(self, x):
        return self._mix.cdf(x)

    def sf(self, x):
        return self._mix.sf(x)

    def logpdf(self, x):
        return self._mix.logpdf(x)

    def logcdf(self, x):
        return self._mix.logcdf(x)

    @property
    def mean(self) -> float:
        return self._mix.mean

    @property
    def variance(self) -> float:
        return self._mix.variance

    @property
    def third_central_moment(self) -> float:
        return self._mix.third_central_moment

    @property
    def center(self) -> float:
        return self._mix.center

    @property
    def scale(self) -> float:
        return self._mix.scale

    def support_bounds(self, k: float = QUAD_HALF_WIDTH) -> tuple[float, float]:
        return self._mix.support_bounds(k)

    def tau_max(self) -> float:
        return self._mix.tau_max()

    def affine(self, loc: float, factor: float) -> TwoGaussianMixture:
        factor = _check_positive("factor", factor)
        return TwoGaussianMixture(
            self.weight,
            loc + factor * self.mu1,
            factor * self.sigma1,
            loc + factor * self.mu2,
            factor * self.sigma2,
        )


def mixture_log_gradient_critical_point(mu: float, sigma: float) -> float:
    """Negative-side local minimum of ``f'/f`` for ``0.5 N(-mu, s^2) + 0.5 N(mu, s^2)``.

    In standardized units ``m = mu/sigma`` the minimum sits at
    ``-log(v)/(2m)`` with ``v = 2m^2 - 1 + 2m sqrt(m^2 - 1)``; the result is
    scaled back by ``sigma``.

    Raises:
        NotApplicable: if ``mu <= sigma``, where ``f'/f`` has no interior
            critical point because the mixture is log-concave.
    """
    mu = _check_finite("mu", mu)
    sigma = _check_positive("sigma", sigma)
    m = mu / sigma
    if m <= 1.0:
        raise NotApplicable(f"mu/sigma = {m!r} <= 1: mixture is log-concave")
    # log1p form keeps precision as m -> 1+
    s = math.sqrt((m - 1.0) * (m + 1.0))
    log_v = math.log1p(2.0 * (m - 1.0) * (m + 1.0) + 2.0 * m * s)
    return -sigma * log_v / (2.0 * m)


# ---------------------------------------------------------------------------
# Skew-symmetric family


def _normal_pdf(z: float) -> float:
    return math.exp(-0.5 * z * z) / SQRT2PI


def _normal_cdf(z: float) -> float:
    return 0.5 * math.erfc(-z / SQRT2)


def _logistic_pdf(z: float) -> float:
    e = math.exp(-abs(z))
    return e / (1.0 + e) ** 2


def _normal_logcdf(z):
    return special.log_ndtr(z)


def _logistic_logpdf(z):
    a = np.abs(z)
    return -a - 2.0 * np.log1p(np.exp(-a))


def _logistic_logcdf(z):
    return -np.logaddexp(0.0, -z)


def _logistic_cdf(z: float) -> float:
    if z >= 0.0:
        return 1.0 / (1.0 + math.exp(-z))
    e = math.exp(z)
    return e / (1.0 + e)


# integration half-width in scale units; the logistic tail decays like e^-z,
# so it needs a far wider range than the normal to drop below 1e-17
_BASE_HALF_WIDTH = {"normal": QUAD_HALF_WIDTH, "logistic": 40.0}

# vectorized (log density, log cdf) for the same catalog
_LOG_BASES = {
    "normal": (lambda z: -0.5 * z * z - 0.5 * math.log(2.0 * math.pi), _normal_logcdf),
    "logistic": (_logistic_logpdf, _logistic_logcdf),
}

# name -> (density, cdf), both symmetric about 0
SYMMETRIC_BASES: dict[str, tuple[Callable[[float], float], Callable[[float], float]]] = {
    "normal": (_normal_pdf, _normal_cdf),
    "logistic": (_logistic_pdf, _logistic_cdf),
}


def _base(name: str):
    try:
        return SYMMETRIC_BASES[name]
    except KeyError:
        raise InvalidParameter(
            f"unknown symmetric base {name!r}; choose from {sorted(SYMMETRIC_BASES)}"
        ) from None


@dataclass(frozen=True)
class _CdfTable:
    lo: float
    mid: float
    hi: float
    left_edges: list[float]
    left_cum: list[float]  # integral from lo to left_edges[i]
    right_edges: list[float]
    right_cum: list[float]  # integral from right_edges[i] to hi
    total: float


@dataclass(frozen=True)
class SkewSymmetric(MarginDistribution):
    """Density ``(2/scale) h(z) G(alpha z)`` with ``z = (x - mu)/scale``.

    The CDF is integrated with adaptive Simpson over ``mu +- w scale``,
    with ``w`` 12 for a normal kernel and 40 for the heavier logistic
    one.  The lower half accumulates from the
    left end and the upper tail from the right end, so both ``cdf`` and
    ``sf`` keep relative accuracy deep into their tails.
    """

    alpha: float
    mu: float = 0.0
    scale: float = 1.0
    base_h: str = "normal"
    base_G: str = "normal"

    def __post_init__(self):
        object.__setattr__(self, "alpha", _check_finite("alpha", self.alpha))
        object.__setattr__(self, "mu", _check_finite("mu", self.mu))
        object.__setattr__(self, "scale", _check_positive("scale", self.scale))
        _base(self.base_h)
        _base(self.base_G)

    @property
    def center(self) -> float:
        return self.mu

    def _pdf1(self, x: float) -> float:
        h, _ = SYMMETRIC_BASES[self.base_h]
        _, G = SYMMETRIC_BASES[self.base_G]
        z = (x - self.mu) / self.scale
        return 2.0 / self.scale * h(z) * G(self.alpha * z)

    def pdf(self, x):
        if np.ndim(x) == 0:
            return self._pdf1(float(x))
        return np.vectorize(self._pdf1, otypes=[float])(x)

    def logpdf(self, x):
        z = (np.asarray(x, dtype=float) - self.mu) / self.scale
        log_h = _LOG_BASES[self.base_h][0](z)
        log_G = _LOG_BASES[self.base_G][1](self.alpha * z)
        return _out(x, math.log(2.0 / self.scale) + log_h + log_G)

    def quad_bounds(self) -> tuple[float, float]:
        w = _BASE_HALF_WIDTH[self.base_h] * self.scale
        return self.mu - w, self.mu + w

    @cached_property
    def _table(self) -> _CdfTable:
        lo, hi = self.quad_bounds()
        mid = self.mu
        n_init = 48
        kw = dict(abs_tol=_TINY, rel_tol=_CDF_REL_TOL, max_depth=40)
        left = simpson_panels(self._pdf1, lo, mid, n_init, **kw)
        right = simpson_panels(self._pdf1, mid, hi, n_init, **kw)
        left_edges = [p[0] for p in left]
        left_cum = [0.0]
        for p in left[:-1]:
            left_cum.append(left_cum[-1] + p[2])
        left_total = left_cum[-1] + left[-1][2]
        right_edges = [p[1] for p in right]
        right_cum = [0.0] * len(right)
        acc = 0.0
        for i in range(len(right) - 1, -1, -1):
            right_cum[i] = acc
            acc += right[i][2]
        right_total = acc
        return _CdfTable(lo, mid, hi, left_edges, left_cum, right_edges, right_cum, left_total + right_total)

    def _lower_mass(self, x: float) -> float:
        """Unnormalized integral from ``lo`` to ``x`` for ``lo <= x <= mid``."""
        t = self._table
        i = bisect.bisect_right(t.left_edges, x) - 1
        a = t.left_edges[i]
        return t.left_cum[i] + adaptive_simpson(self._pdf1, a, x, abs_tol=_TINY, rel_tol=_CDF_REL_TOL)

    def _upper_mass(self, x: float) -> float:
        """Unnormalized integral from ``x`` to ``hi`` for ``mid <= x <= hi``."""
        t = self._table
        i = bisect.bisect_left(t.right_edges, x)
        b = t.right_edges[i]
        return t.right_cum[i] + adaptive_simpson(self._pdf1, x, b, abs_tol=_TINY, rel_tol=_CDF_REL_TOL)

    def _cdf1(self, x: float) -> float:
        if self.alpha == 0.0:
            return SYMMETRIC_BASES[self.base_h][1]((x - self.mu) / self.scale)
        t = self._table
        if x <= t.lo:
            return 0.0
        if x >= t.hi:
            return 1.0
        if x <= t.mid:
            return self._lower_mass(x) / t.total
        return 1.0 - self._upper_mass(x) / t.total

    def _sf1(self, x: float) -> float:
        if self.alpha == 0.0:
            return SYMMETRIC_BASES[self.base_h][1]((self.mu - x) / self.scale)
        t = self._table
        if x <= t.lo:
            return 1.0
        if x >= t.hi:
            return 0.0
        if x >= t.mid:
            return self._upper_mass(x) / t.total
        return 1.0 - self._lower_mass(x) / t.total

    def cdf(self, x):
        if np.ndim(x) == 0:
            return self._cdf1(float(x))
        return np.vectorize(self._cdf1, otypes=[float])(x)

    def sf(self, x):
        if np.ndim(x) == 0:
            return self._sf1(float(x))
        return np.vectorize(self._sf1, otypes=[float])(x)

    def affine(self, loc: float, factor: float) -> SkewSymmetric:
        factor = _check_positive("factor", factor)
        return SkewSymmetric(self.alpha, loc + factor * self.mu, factor * self.scale, self.base_h, self.base_G)

    def reflected(self) -> SkewSymmetric:
        """The mirror image about ``mu``: same center, skew ``-alpha``."""
        return SkewSymmetric(-self.alpha, self.mu, self.scale, self.base_h, self.base_G)


# ---------------------------------------------------------------------------
# Empirical


@dataclass(frozen=True)
class EmpiricalDistribution(MarginDistribution):
    """Weighted point masses; ``cdf`` is right-continuous.

    Margins are sorted on construction (weights follow).  Without weights
    every point carries mass ``1/n``.
    """

    margins: tuple[float, ...]
    weights: tuple[float, ...] | None = None

    has_density = False

    def __post_init__(self):
        m = np.asarray(self.margins, dtype=float).ravel()
        if m.size == 0:
            raise InvalidParameter("empirical distribution needs at least one margin")
        if not np.all(np.isfinite(m)):
            raise InvalidParameter("margins must be finite")
        order = np.argsort(m, kind="stable")
        object.__setattr__(self, "margins", tuple(float(v) for v in m[order]))
        if self.weights is not None:
            w = np.asarray(self.weights, dtype=float).ravel()
            if w.shape != m.shape:
                raise InvalidParameter("weights must match margins in length")
            if np.any(w < 0) or not np.all(np.isfinite(w)):
                raise InvalidParameter("weights must be nonnegative and finite")
            # normalized weights of long logs drift from 1 by about n ulps
            if abs(float(w.sum()) - 1.0) > 1e-9:
                raise InvalidParameter(f"weights sum to {float(w.sum())!r}, expected 1")
            w = w / w.sum()
            object.__setattr__(self, "weights", tuple(float(v) for v in w[order]))

    @cached_property
    def _arrays(self) -> tuple[np.ndarray, np.ndarray]:
        m = np.asarray(self.margins)
        w = np.full(m.size, 1.0 / m.size) if self.weights is None else np.asarray(self.weights)
        cum = np.concatenate([[0.0], np.cumsum(w)])
        return m, cum

    def cdf(self, x):
        m, cum = self._arrays
        idx = np.searchsorted(m, np.asarray(x, dtype=float), side="right")
        return _out(x, np.minimum(cum[idx], 1.0))

    def sf(self, x):
        m, cum = self._arrays
        idx = np.searchsorted(m, np.asarray(x, dtype=float), side="left")
        return _out(x, np.maximum(cum[-1] - cum[idx], 0.0))

    def point_weights(self) -> np.ndarray:
        m, cum = self._arrays
        return np.diff(cum)

    @property
    def mean(self) -> float:
        m, _ = self._arrays
        return float(np.dot(m, self.point_weights()))

    @property
    def variance(self) -> float:
        m, _ = self._arrays
        return float(np.dot((m - self.mean) ** 2, self.point_weights()))

    @property
    def third_central_moment(self) -> float:
        m, _ = self._arrays
        return float(np.dot((m - self.mean) ** 3, self.point_weights()))

    @property
    def center(self) -> float:
        return self.mean

    @property
    def scale(self) -> float:
        sd = math.sqrt(self.variance)
        return sd if sd > 0 else 1.0

    def tau_max(self) -> float:
        return max(abs(self.margins[0]), abs(self.margins[-1]))

    def affine(self, loc: float, factor: float) -> EmpiricalDistribution:
        factor = _check_positive("factor", factor)
        m, _ = self._arrays
        return EmpiricalDistribution(tuple(loc + factor * m), self.weights)


# ---------------------------------------------------------------------------
# Transformed laws


@dataclass(frozen=True)
class LocationScale(MarginDistribution):
    """Law of ``loc + factor * X``."""

    inner: MarginDistribution
    loc: float = 0.0
    factor: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "loc", _check_finite("loc", self.loc))
        object.__setattr__(self, "factor", _check_positive("factor", self.factor))

    @property
    def has_density(self) -> bool:  # type: ignore[override]
        return self.inner.has_density

    def _back(self, x):
        return (np.asarray(x, dtype=float) - self.loc) / self.factor

    def pdf(self, x):
        return _out(x, np.asarray(self.inner.pdf(self._back(x))) / self.factor)

    def cdf(self, x):
        return _out(x, self.inner.cdf(self._back(x)))

    def sf(self, x):
        return _out(x, self.inner.sf(self._back(x)))

    @property
    def center(self) -> float:
        return self.loc + self.factor * self.inner.center

    @property
    def scale(self) -> float:
        return self.factor * self.inner.scale

    def support_bounds(self, k: float = QUAD_HALF_WIDTH) -> tuple[float, float]:
        lo, hi = self.inner.support_bounds(k)
        return self.loc + self.factor * lo, self.loc + self.factor * hi

    def quad_bounds(self) -> tuple[float, float]:
        lo, hi = self.inner.quad_bounds()
        return self.loc + self.factor * lo, self.loc + self.factor * hi

    @property
    def mean(self) -> float:
        return self.loc + self.factor * self.inner.mean

    @property
    def variance(self) -> float:
        return self.factor**2 * self.inner.variance

    @property
    def third_central_moment(self) -> float:
        return self.factor**3 * self.inner.third_central_moment

    def affine(self, loc: float, factor: float) -> LocationScale:
        factor = _check_positive("factor", factor)
        return LocationScale(self.inner, loc + factor * self.loc, factor * self.factor)


@dataclass(frozen=True)
class _Transform:
    forward: Callable[[np.ndarray, float], np.ndarray]
    inverse: Callable[[np.ndarray, float], np.ndarray]
    inverse_slope: Callable[[np.ndarray, float], np.ndarray]
    bound: Callable[[float], float]  # sup of |T|


def _cube_slope(y, c):
    r = np.cbrt(y)
    with np.errstate(divide="ignore"):
        return 1.0 / (3.0 * r * r)


def _arctan_inverse(y, c):
    return np.tan(y / c)


def _arctan_slope(y, c):
    t = np.tan(y / c)
    return (1.0 + t * t) / c


TRANSFORMS: dict[str, _Transform] = {
    "cube": _Transform(lambda x, c: x**3, lambda y, c: np.cbrt(y), _cube_slope, lambda c: math.inf),
    "sinh": _Transform(
        lambda x, c: np.sinh(x),
        lambda y, c: np.arcsinh(y),
        lambda y, c: 1.0 / np.sqrt(1.0 + y * y),
        lambda c: math.inf,
    ),
    "arctan": _Transform(
        lambda x, c: c * np.arctan(x),
        _arctan_inverse,
        _arctan_slope,
        lambda c: c * math.pi / 2.0,
    ),
}
_TRANSFORM_ALIASES = {"scaled-arctan": "arctan"}


def _transform(name: str) -> tuple[str, _Transform]:
    key = _TRANSFORM_ALIASES.get(name, name)
    try:
        return key, TRANSFORMS[key]
    except KeyError:
        raise UnknownTransform(name) from None


def transform_value(name: str, x, c: float = 1.0):
    """Apply catalog transform ``name`` to ``x``."""
    _, t = _transform(name)
    return _out(x, t.forward(np.asarray(x, dtype=float), c))


@dataclass(frozen=True)
class OddMonotoneTransformed(MarginDistribution):
    """Law of ``T(X)`` for a catalog transform ``T`` (``cube``, ``sinh``, ``arctan``).

    ``c`` scales the ``arctan`` transform, ``T(x) = c * atan(x)``, and is
    ignored by the others.
    """

    inner: MarginDistribution
    transform: str
    c: float = 1.0

    def __post_init__(self):
        key, _ = _transform(self.transform)
        object.__setattr__(self, "transform", key)
        object.__setattr__(self, "c", _check_positive("c", self.c))

    @property
    def _t(self) -> _Transform:
        return TRANSFORMS[self.transform]

    @property
    def has_density(self) -> bool:  # type: ignore[override]
        return self.inner.has_density

    def forward(self, x):
        return transform_value(self.transform, x, self.c)

    def _inverse(self, y):
        y = np.asarray(y, dtype=float)
        bound = self._t.bound(self.c)
        inside = np.abs(y) < bound
        safe = np.where(inside, y, 0.0)
        return self._t.inverse(safe, self.c), inside, y

    def cdf(self, y):
        x, inside, y_arr = self._inverse(y)
        vals = np.where(inside, self.inner.cdf(x), np.where(y_arr > 0, 1.0, 0.0))
        return _out(y, vals)

    def sf(self, y):
        x, inside, y_arr = self._inverse(y)
        vals = np.where(inside, self.inner.sf(x), np.where(y_arr > 0, 0.0, 1.0))
        return _out(y, vals)

    def pdf(self, y):
        x, inside, _ = self._inverse(y)
        with np.errstate(invalid="ignore"):
            vals = np.where(inside, np.asarray(self.inner.pdf(x)) * self._t.inverse_slope(np.where(inside, y, 0.0), self.c), 0.0)
        return _out(y, vals)

    @property
    def center(self) -> float:
        return float(self.forward(self.inner.center))

    @property
    def scale(self) -> float:
        c, s = self.inner.center, self.inner.scale
        return float(self.forward(c + s) - self.forward(c - s)) / 2.0

    def support_bounds(self, k: float = QUAD_HALF_WIDTH) -> tuple[float, float]:
        lo, hi = self.inner.support_bounds(k)
        return float(self.forward(lo)), float(self.forward(hi))

    def quad_bounds(self) -> tuple[float, float]:
        lo, hi = self.inner.quad_bounds()
        return float(self.forward(lo)), float(self.forward(hi))

    def tau_max(self) -> float:
        return float(self.forward(self.inner.tau_max()))


def apply_odd_monotone(dist: MarginDistribution, transform: str, c: float = 1.0) -> MarginDistribution:
    """Law of ``T(M)``; point masses are mapped pointwise.

    Raises:
        UnknownTransform: if ``transform`` is not in the catalog.
    """
    key, t = _transform(transform)
    if isinstance(dist, EmpiricalDistribution):
        m, _ = dist._arrays
        return EmpiricalDistribution(tuple(t.forward(m, c)), dist.weights)
    return OddMonotoneTransformed(dist, key, c)


def translate(dist: MarginDistribution, d: float) -> MarginDistribution:
    """Law of ``M + d``, so ``translate(F, d).cdf(x) == F.cdf(x - d)``."""
    return dist.shifted(_check_finite("d", d))


def empirical_from_samples(values: Sequence[float], weights: Sequence[float] | None = None) -> EmpiricalDistribution:
    """Build an empirical law, normalizing raw nonnegative ``weights``."""
    if weights is None:
        return EmpiricalDistribution(tuple(values))
    w = np.asarray(weights, dtype=float)
    total = float(w.sum())
    if not total > 0:
        raise InvalidParameter("weights must have positive total")
    return EmpiricalDistribution(tuple(values), tuple(w / total))
