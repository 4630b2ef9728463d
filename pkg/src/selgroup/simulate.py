"""Parameter sweeps over Gaussian worst-group margins.

Each cell mixes a Gaussian worst group (mass ``p``) with a fixed Gaussian
for the other groups and records whether the worst group keeps up with the
group-agnostic reference at every threshold, whether the full-coverage
necessary condition holds, and the largest accuracy shortfall.
"""

from __future__ import annotations

import csv
import enum
import io
from collections.abc import Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import svg
from .distributions import GRID_HALF_WIDTH, DEFAULT_GRID_POINTS, Gaussian
from .errors import EmptyInput, InvalidParameter, UnsupportedFormat
from .group_analysis import Condition, GroupMixture, Outcome, necessary_condition, outperforms_reference
from .selective import ThresholdGrid

DEFAULT_WORST_MEANS = tuple(np.round(np.linspace(-1.0, 2.0, 61), 12))
DEFAULT_WORST_SIGMAS = tuple(np.round(np.linspace(0.2, 2.2, 41), 12))

FILLS = {
    Outcome.OUTPERFORMS: "#4a90d9",
    Outcome.UNDERPERFORMS: "#f5a54a",
    Outcome.EXCLUDED: "#ffffff",
}


class SweepMode(str, enum.Enum):
    SIGMAS = "sigmas"  # worst mean x worst sigma, others fixed
    MEANS = "means"  # worst mean x other mean, unit variances


def _grid_values(name: str, values: Sequence[float], positive: bool = False) -> tuple[float, ...]:
    vals = tuple(float(v) for v in values)
    if not vals:
        raise InvalidParameter(f"{name} must be nonempty")
    if not all(np.isfinite(vals)):
        raise InvalidParameter(f"{name} must be finite")
    if positive and min(vals) <= 0:
        raise InvalidParameter(f"{name} must be positive")
    return vals


def default_tau_grid(max_abs_mean: float, max_sigma: float, points: int = DEFAULT_GRID_POINTS) -> ThresholdGrid:
    """Shared grid reaching 8 standard deviations past the farthest component."""
    return ThresholdGrid.uniform(max_abs_mean + GRID_HALF_WIDTH * max_sigma, points)


@dataclass(frozen=True)
class SweepSpec:
    """Worst-group mean x sigma sweep against a fixed other-group Gaussian."""

    worst_means: tuple[float, ...] = DEFAULT_WORST_MEANS
    worst_sigmas: tuple[float, ...] = DEFAULT_WORST_SIGMAS
    other_mean: float = 1.0
    other_sigma: float = 1.0
    p: float = 0.5
    tau_grid: ThresholdGrid | None = None

    def __post_init__(self):
        object.__setattr__(self, "worst_means", _grid_values("worst_means", self.worst_means))
        object.__setattr__(self, "worst_sigmas", _grid_values("worst_sigmas", self.worst_sigmas, positive=True))
        if not self.other_sigma > 0:
            raise InvalidParameter("other_sigma must be positive")
        if not 0.0 < self.p < 1.0:
            raise InvalidParameter("p must lie in (0, 1)")

    def grid(self) -> ThresholdGrid:
        if self.tau_grid is not None:
            return self.tau_grid
        reach = max(max(abs(m) for m in self.worst_means), abs(self.other_mean))
        return default_tau_grid(reach, max(max(self.worst_sigmas), self.other_sigma))


@dataclass(frozen=True)
class SweepCell:
    worst_mean: float
    worst_sigma: float
    other_mean: float
    other_sigma: float
    verdict: Outcome
    necessary_condition: Condition
    max_gap: float
    near_boundary: bool = False


@dataclass(frozen=True)
class SweepReport:
    """Cells in row-major order: ``rows`` is the outer grid axis."""

    mode: SweepMode
    rows: tuple[float, ...]
    cols: tuple[float, ...]
    cells: tuple[SweepCell, ...]
    p: float
    tau_grid: ThresholdGrid = field(repr=False)

    def cell(self, row: int, col: int) -> SweepCell:
        return self.cells[row * len(self.cols) + col]

    def __len__(self) -> int:
        return len(self.cells)


def evaluate_cell(
    worst_mean: float,
    worst_sigma: float,
    other_mean: float,
    other_sigma: float,
    p: float,
    grid: ThresholdGrid,
) -> SweepCell:
    """Classify one mixture; cells whose worst group is not strictly worse are excluded."""
    gm = GroupMixture(p, Gaussian(worst_mean, worst_sigma), Gaussian(other_mean, other_sigma))
    cmp = outperforms_reference(gm, grid, exclude_ties=True)
    cond = necessary_condition(gm).verdict
    return SweepCell(worst_mean, worst_sigma, other_mean, other_sigma, cmp.verdict, cond, cmp.max_gap, cmp.near_boundary)


def _run(args):
    return evaluate_cell(*args)


def _execute(jobs: list[tuple], workers: int | None) -> tuple[SweepCell, ...]:
    if workers is None or workers <= 1:
        return tuple(_run(j) for j in jobs)
    with ProcessPoolExecutor(max_workers=workers) as pool:
        # map preserves job order, so output does not depend on scheduling
        return tuple(pool.map(_run, jobs, chunksize=64))


def run_sweep(spec: SweepSpec, workers: int | None = None) -> SweepReport:
    """One cell per (worst mean, worst sigma); rows are sigmas, columns means."""
    grid = spec.grid()
    jobs = [
        (mu, s, spec.other_mean, spec.other_sigma, spec.p, grid)
        for s in spec.worst_sigmas
        for mu in spec.worst_means
    ]
    return SweepReport(SweepMode.SIGMAS, spec.worst_sigmas, spec.worst_means, _execute(jobs, workers), spec.p, grid)


def run_means_sweep(
    worst_means: Sequence[float] = DEFAULT_WORST_MEANS,
    other_means: Sequence[float] = DEFAULT_WORST_MEANS,
    sigma: float = 1.0,
    p: float = 0.5,
    tau_grid: ThresholdGrid | None = None,
    workers: int | None = None,
) -> SweepReport:
    """One cell per (worst mean, other mean) with a shared sigma; rows are other means."""
    worst_means = _grid_values("worst_means", worst_means)
    other_means = _grid_values("other_means", other_means)
    if not sigma > 0:
        raise InvalidParameter("sigma must be positive")
    if not 0.0 < p < 1.0:
        raise InvalidParameter("p must lie in (0, 1)")
    if tau_grid is None:
        tau_grid = default_tau_grid(max(abs(m) for m in (*worst_means, *other_means)), sigma)
    jobs = [(mu, sigma, mo, sigma, p, tau_grid) for mo in other_means for mu in worst_means]
    return SweepReport(SweepMode.MEANS, other_means, worst_means, _execute(jobs, workers), p, tau_grid)


def csv_columns(mode: SweepMode) -> tuple[str, ...]:
    second = "worst_sigma" if mode is SweepMode.SIGMAS else "other_mean"
    return ("worst_mean", second, "verdict", "necessary_condition", "max_gap")


def _csv(report: SweepReport) -> bytes:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(csv_columns(report.mode))
    for c in report.cells:
        second = c.worst_sigma if report.mode is SweepMode.SIGMAS else c.other_mean
        w.writerow([repr(c.worst_mean), repr(second), c.verdict.value, c.necessary_condition.value, repr(c.max_gap)])
    return buf.getvalue().encode("utf-8")


def _svg(report: SweepReport) -> bytes:
    n_cols = len(report.cols)
    fills = [[FILLS[report.cells[r * n_cols + c].verdict] for c in range(n_cols)] for r in range(len(report.rows))]
    hatched = [
        [report.cells[r * n_cols + c].necessary_condition is Condition.SATISFIED for c in range(n_cols)]
        for r in range(len(report.rows))
    ]
    present = {c.verdict for c in report.cells}
    legend = {o.value: FILLS[o] for o in Outcome if o in present}
    legend["necessary condition holds"] = "hatch"
    y_label = "worst-group sigma" if report.mode is SweepMode.SIGMAS else "other-group mean"
    return svg.region_map(report.cols, report.rows, fills, hatched, legend, "worst-group mean", y_label).encode("utf-8")


def render_region_map(report: SweepReport, fmt: str = "csv") -> bytes:
    """Serialize a sweep as ``csv`` (byte-stable) or ``svg``.

    Raises:
        UnsupportedFormat: for any other format.
        EmptyInput: for a report without cells.
    """
    if not report.cells:
        raise EmptyInput("empty sweep report")
    if fmt == "csv":
        return _csv(report)
    if fmt == "svg":
        return _svg(report)
    raise UnsupportedFormat(f"unsupported region-map format {fmt!r}")
