"""Per-group curves and matched references on prediction logs.

A log is a list of :class:`LabeledExample`.  At threshold ``tau`` the
classifier predicts on every example with ``confidence >= tau``.  Two
references make exactly as many correct and incorrect predictions as the
classifier at each threshold but spread them differently across groups:

* the group-agnostic reference keeps the same fraction of every group's
  correct (and incorrect) predictions, so true/false positive rates of the
  predict-or-abstain decision are equal across groups;
* the Robin Hood reference spreads abstentions to keep the best and worst
  group accuracies as close as possible.

Per-threshold accuracies that are undefined (nothing predicted) are NaN in
the array-valued results here and ``None`` in :class:`GroupCurve`.
"""

from __future__ import annotations

import itertools
import math
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    EmptyInput,
    InvalidParameter,
    NegativeConfidence,
    NoPredictions,
    TooLarge,
    UndefinedRate,
    WeightMismatch,
)
from .selective import ThresholdGrid, CurvePoint

AVERAGE = "average"
BRUTE_FORCE_LIMIT = 20
IDENTITY_TOL = 1e-12
MC_CHUNK = 65536


@dataclass(frozen=True)
class LabeledExample:
    """One logged prediction.

    Attributes:
        id: Opaque identifier, kept for provenance only.
        group: Group label.
        correct: Whether the prediction matched the label.
        confidence: Nonnegative confidence score.
        weight: Positive example mass, 1 by default.
    """

    id: object
    group: str
    correct: bool
    confidence: float
    weight: float = 1.0

    def __post_init__(self):
        c = float(self.confidence)
        if not c >= 0.0 or not math.isfinite(c):
            raise NegativeConfidence(f"confidence must be finite and >= 0, got {self.confidence!r}")
        w = float(self.weight)
        if not w > 0.0 or not math.isfinite(w):
            raise InvalidParameter(f"weight must be finite and > 0, got {self.weight!r}")
        object.__setattr__(self, "confidence", c)
        object.__setattr__(self, "weight", w)
        object.__setattr__(self, "correct", bool(self.correct))
        object.__setattr__(self, "group", str(self.group))

    @property
    def margin(self) -> float:
        return self.confidence if self.correct else -self.confidence


def _require_examples(samples: Sequence[LabeledExample]) -> list[LabeledExample]:
    samples = list(samples)
    if not samples:
        raise EmptyInput("no examples")
    return samples


def groups_of(samples: Iterable[LabeledExample]) -> tuple[str, ...]:
    """Sorted distinct group labels."""
    return tuple(sorted({s.group for s in samples}))


def empirical_grid(samples: Iterable[LabeledExample]) -> ThresholdGrid:
    """Distinct confidences plus 0, ascending."""
    return ThresholdGrid.from_values(s.confidence for s in samples)


def _kept_mass(conf: np.ndarray, mass: np.ndarray, taus: np.ndarray) -> np.ndarray:
    """Total ``mass`` over entries with ``conf >= tau``, for every tau."""
    order = np.argsort(conf, kind="stable")
    conf, mass = conf[order], mass[order]
    tail = np.concatenate([np.cumsum(mass[::-1])[::-1], [0.0]])
    return tail[np.searchsorted(conf, taus, side="left")]


@dataclass(frozen=True)
class CountTable:
    """Correct/incorrect masses kept per group and threshold.

    ``correct[g, t]`` and ``incorrect[g, t]`` are raw masses;
    :attr:`C_g`/:attr:`I_g` normalize them by the group mass and
    :attr:`C`/:attr:`I` by the total mass, so ``C = sum_g p_g C_g``.
    """

    taus: np.ndarray
    groups: tuple[str, ...]
    correct: np.ndarray
    incorrect: np.ndarray

    @classmethod
    def from_examples(cls, samples: Sequence[LabeledExample], grid: ThresholdGrid | None = None) -> CountTable:
        samples = _require_examples(samples)
        if grid is None:
            grid = empirical_grid(samples)
        taus = grid.array
        groups = groups_of(samples)
        conf = np.array([s.confidence for s in samples])
        mass = np.array([s.weight for s in samples])
        ok = np.array([s.correct for s in samples])
        gid = np.array([groups.index(s.group) for s in samples])
        correct = np.empty((len(groups), taus.size))
        incorrect = np.empty_like(correct)
        for g in range(len(groups)):
            sel = gid == g
            correct[g] = _kept_mass(conf[sel & ok], mass[sel & ok], taus)
            incorrect[g] = _kept_mass(conf[sel & ~ok], mass[sel & ~ok], taus)
        return cls(taus, groups, correct, incorrect)

    @property
    def group_mass(self) -> np.ndarray:
        return self.correct[:, 0] + self.incorrect[:, 0]

    @property
    def group_weights(self) -> np.ndarray:
        """Ingestion proportions ``p_g``."""
        m = self.group_mass
        return m / m.sum()

    @property
    def C_g(self) -> np.ndarray:
        return self.correct / self.group_mass[:, None]

    @property
    def I_g(self) -> np.ndarray:
        return self.incorrect / self.group_mass[:, None]

    @property
    def C(self) -> np.ndarray:
        return self.correct.sum(axis=0) / self.group_mass.sum()

    @property
    def I(self) -> np.ndarray:  # noqa: E743
        return self.incorrect.sum(axis=0) / self.group_mass.sum()

    def index(self, tau: float) -> int:
        i = int(np.searchsorted(self.taus, tau))
        if i >= self.taus.size or self.taus[i] != tau:
            raise InvalidParameter(f"threshold {tau!r} is not on the table's grid")
        return i

    def group_index(self, group: str) -> int:
        try:
            return self.groups.index(group)
        except ValueError:
            raise InvalidParameter(f"unknown group {group!r}") from None


def _ratio(num: np.ndarray, den: np.ndarray) -> np.ndarray:
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(den > 0, num / np.where(den > 0, den, 1.0), np.nan)


def group_accuracies(table: CountTable) -> np.ndarray:
    """Classifier accuracy per group and threshold (NaN where nothing is predicted)."""
    return _ratio(table.correct, table.correct + table.incorrect)


def reference_masses(table: CountTable) -> tuple[np.ndarray, np.ndarray]:
    """Correct and incorrect masses the group-agnostic reference keeps per group.

    Every group keeps the overall kept fraction ``C(tau)/C(0)`` of its
    correct mass and ``I(tau)/I(0)`` of its incorrect mass.
    """
    tot_c, tot_i = table.correct.sum(axis=0), table.incorrect.sum(axis=0)
    if tot_c[0] + tot_i[0] <= 0:
        raise NoPredictions("no predictions at full coverage")
    r_c = tot_c / tot_c[0] if tot_c[0] > 0 else np.zeros_like(tot_c)
    r_i = tot_i / tot_i[0] if tot_i[0] > 0 else np.zeros_like(tot_i)
    return table.correct[:, :1] * r_c, table.incorrect[:, :1] * r_i


def group_agnostic_reference(table: CountTable) -> dict[str, np.ndarray]:
    """Expected per-group accuracy of the group-agnostic reference.

    Returns:
        Mapping group -> accuracy per threshold of ``table``; NaN where the
        reference predicts nothing on that group.

    Raises:
        NoPredictions: if the table holds no mass at all.
    """
    kc, ki = reference_masses(table)
    acc = _ratio(kc, kc + ki)
    return {g: acc[k] for k, g in enumerate(table.groups)}


@dataclass(frozen=True)
class MonteCarloEstimate:
    mean: float
    stderr: float


def group_agnostic_monte_carlo(
    samples: Sequence[LabeledExample],
    tau: float,
    trials: int,
    seed: int,
) -> dict[str, MonteCarloEstimate | None]:
    """Sampling oracle for the group-agnostic reference at one threshold.

    Each trial draws ``|C_tau|`` of the ``|C_0|`` correct examples and
    ``|I_tau|`` of the ``|I_0|`` incorrect ones uniformly without
    replacement.  The estimate per group is the ratio of mean kept-correct
    count to mean kept count, with a delta-method standard error.
    Example weights are ignored; the sampler works on counts.

    Trials are drawn in chunks of fixed size, each from its own stream
    ``SeedSequence(seed, spawn_key=(chunk,))``, so results do not depend on
    how chunks are scheduled.
    """
    samples = _require_examples(samples)
    if trials < 1:
        raise InvalidParameter("trials must be >= 1")
    if tau < 0:
        raise InvalidParameter("tau must be >= 0")
    groups = groups_of(samples)
    c0 = np.zeros(len(groups), dtype=np.int64)
    i0 = np.zeros_like(c0)
    n_c = n_i = 0
    for s in samples:
        g = groups.index(s.group)
        if s.correct:
            c0[g] += 1
            n_c += s.confidence >= tau
        else:
            i0[g] += 1
            n_i += s.confidence >= tau

    sums = np.zeros((5, len(groups)))  # X, Y, X^2, Y^2, XY
    done, chunk = 0, 0
    while done < trials:
        size = min(MC_CHUNK, trials - done)
        rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(chunk,))))
        x = rng.multivariate_hypergeometric(c0, n_c, size=size).astype(float)
        y = rng.multivariate_hypergeometric(i0, n_i, size=size).astype(float)
        sums += np.stack([x.sum(0), y.sum(0), (x * x).sum(0), (y * y).sum(0), (x * y).sum(0)])
        done += size
        chunk += 1

    n = float(trials)
    mx, my = sums[0] / n, sums[1] / n
    out: dict[str, MonteCarloEstimate | None] = {}
    for k, g in enumerate(groups):
        tot = mx[k] + my[k]
        if tot <= 0:
            out[g] = None
            continue
        r = mx[k] / tot
        if trials < 2:
            out[g] = MonteCarloEstimate(float(r), 0.0)
            continue
        vxx = max(sums[2, k] / n - mx[k] ** 2, 0.0) * n / (n - 1)
        vyy = max(sums[3, k] / n - my[k] ** 2, 0.0) * n / (n - 1)
        vxy = (sums[4, k] / n - mx[k] * my[k]) * n / (n - 1)
        gx, gy = my[k] / tot**2, -mx[k] / tot**2
        var = (gx * gx * vxx + 2 * gx * gy * vxy + gy * gy * vyy) / n
        out[g] = MonteCarloEstimate(float(r), math.sqrt(max(var, 0.0)))
    return out


def disparity(accuracies: Iterable[float | None]) -> float:
    """Best minus worst accuracy over groups where accuracy is defined."""
    vals = [a for a in accuracies if a is not None and not math.isnan(a)]
    if len(vals) < 2:
        return 0.0
    return max(vals) - min(vals)


def _acc(c: float, i: float) -> float | None:
    return c / (c + i) if c + i > 0 else None


def robin_hood_greedy(samples: Sequence[LabeledExample], grid: ThresholdGrid | None = None) -> dict[str, np.ndarray]:
    """Robin Hood reference by sequential abstention.

    Examples are abstained on in ascending confidence (input order on
    ties).  An abstained incorrect example's mass is taken from the group
    with the currently lowest accuracy, a correct example's from the group
    with the currently highest accuracy, among groups that still hold mass
    of that kind.  If that group holds less than the example's mass, the
    remainder comes from the next most extreme group.  Equal accuracies are
    broken by group label order.

    Returns:
        Mapping group -> accuracy per grid threshold (NaN where undefined).
    """
    kc, ki = robin_hood_masses(samples, grid)
    groups = groups_of(samples)
    acc = _ratio(kc, kc + ki)
    return {g: acc[k] for k, g in enumerate(groups)}


def robin_hood_masses(samples: Sequence[LabeledExample], grid: ThresholdGrid | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Per-group correct and incorrect masses kept by the greedy Robin Hood reference."""
    samples = _require_examples(samples)
    if grid is None:
        grid = empirical_grid(samples)
    groups = groups_of(samples)
    c = [0.0] * len(groups)
    i = [0.0] * len(groups)
    for s in samples:
        g = groups.index(s.group)
        if s.correct:
            c[g] += s.weight
        else:
            i[g] += s.weight
    queue = sorted(range(len(samples)), key=lambda k: samples[k].confidence)
    pos = 0
    out_c = np.empty((len(groups), len(grid)))
    out_i = np.empty_like(out_c)
    for t, tau in enumerate(grid):
        while pos < len(queue) and samples[queue[pos]].confidence < tau:
            s = samples[queue[pos]]
            pos += 1
            if s.correct:
                _deduct(c, i, c, s.weight, highest=True)
            else:
                _deduct(c, i, i, s.weight, highest=False)
        out_c[:, t] = c
        out_i[:, t] = i
    return out_c, out_i


def _deduct(c: list[float], i: list[float], pool: list[float], w: float, highest: bool) -> None:
    remaining = w
    while remaining > 0:
        live = [g for g in range(len(pool)) if pool[g] > 0]
        if not live:
            return
        # accuracy is defined for every live group
        accs = [(c[g] / (c[g] + i[g]), g) for g in live]
        if highest:
            g = min(accs, key=lambda a: (-a[0], a[1]))[1]
        else:
            g = min(accs)[1]
        take = min(remaining, pool[g])
        pool[g] -= take
        # avoid round-off residue below a mass that was meant to be exhausted
        if pool[g] < 1e-12 * w:
            pool[g] = 0.0
        remaining -= take
        if remaining < 1e-12 * w:
            return


def _allocations(capacity: Sequence[int], total: int) -> list[tuple[int, ...]]:
    """All vectors ``k`` with ``0 <= k[g] <= capacity[g]`` and ``sum(k) == total``."""
    out: list[tuple[int, ...]] = []
    suffix = list(itertools.accumulate(reversed(capacity)))[::-1] + [0]

    def rec(g: int, left: int, acc: tuple[int, ...]):
        if g == len(capacity):
            if left == 0:
                out.append(acc)
            return
        lo = max(0, left - suffix[g + 1])
        for k in range(lo, min(capacity[g], left) + 1):
            rec(g + 1, left - k, acc + (k,))

    rec(0, total, ())
    return out


@dataclass(frozen=True)
class BruteForceResult:
    disparity: float
    accuracies: dict[str, float | None]
    kept_correct: dict[str, int]
    kept_incorrect: dict[str, int]


def robin_hood_brute_force(samples: Sequence[LabeledExample], tau: float) -> BruteForceResult:
    """Exact minimum-disparity allocation at one threshold.

    Enumerates how many correct and incorrect examples every group keeps,
    subject to the classifier's totals at ``tau`` and each group's
    full-coverage counts.  Ties prefer the larger worst-group accuracy and
    then the lexicographically smallest allocation in group order.  Works
    on counts; example weights are ignored.

    Raises:
        TooLarge: for more than 20 examples.
    """
    samples = _require_examples(samples)
    if len(samples) > BRUTE_FORCE_LIMIT:
        raise TooLarge(f"brute force is limited to {BRUTE_FORCE_LIMIT} examples, got {len(samples)}")
    groups = groups_of(samples)
    cap_c = [0] * len(groups)
    cap_i = [0] * len(groups)
    n_c = n_i = 0
    for s in samples:
        g = groups.index(s.group)
        if s.correct:
            cap_c[g] += 1
            n_c += s.confidence >= tau
        else:
            cap_i[g] += 1
            n_i += s.confidence >= tau
    best = None
    for kc in _allocations(cap_c, n_c):
        for ki in _allocations(cap_i, n_i):
            accs = [_acc(a, b) for a, b in zip(kc, ki)]
            defined = [a for a in accs if a is not None]
            worst = min(defined) if defined else 0.0
            key = (disparity(accs), -worst, kc, ki)
            if best is None or key < best[0]:
                best = (key, accs, kc, ki)
    _, accs, kc, ki = best
    return BruteForceResult(
        disparity=best[0][0],
        accuracies=dict(zip(groups, accs)),
        kept_correct=dict(zip(groups, kc)),
        kept_incorrect=dict(zip(groups, ki)),
    )


def tpr_fpr(table: CountTable, tau: float, group: str | None = None) -> tuple[float, float]:
    """Predict-vs-abstain rates ``(C(tau)/C(0), I(tau)/I(0))``.

    With ``group`` the same ratios are taken within that group.

    Raises:
        UndefinedRate: when a denominator is zero.
    """
    t = table.index(tau)
    if group is None:
        c, i = table.correct.sum(axis=0), table.incorrect.sum(axis=0)
    else:
        g = table.group_index(group)
        c, i = table.correct[g], table.incorrect[g]
    if c[0] <= 0 or i[0] <= 0:
        raise UndefinedRate(f"zero correct or incorrect mass at full coverage for {group or AVERAGE!r}")
    return float(c[t] / c[0]), float(i[t] / i[0])


@dataclass(frozen=True)
class EqualizedOddsRow:
    tau: float
    reference_holds: bool
    reference_tpr_gap: float
    reference_fpr_gap: float
    classifier_tpr_gap: float
    classifier_fpr_gap: float


@dataclass(frozen=True)
class EqualizedOddsReport:
    rows: list[EqualizedOddsRow]
    # groups left out because they have no correct or no incorrect mass
    skipped: tuple[str, ...] = field(default=())

    @property
    def reference_holds(self) -> bool:
        return all(r.reference_holds for r in self.rows)

    @property
    def max_tpr_gap(self) -> float:
        return max(r.classifier_tpr_gap for r in self.rows)

    @property
    def max_fpr_gap(self) -> float:
        return max(r.classifier_fpr_gap for r in self.rows)


def _gap(values: np.ndarray) -> float:
    return float(values.max() - values.min()) if values.size else 0.0


def equalized_odds_check(table: CountTable) -> EqualizedOddsReport:
    """Compare per-group predict rates across groups at every table threshold.

    The reference's rates are recomputed from its kept masses, so the check
    exercises the arithmetic rather than assuming the identity.  Groups
    with zero correct or zero incorrect mass have an undefined rate and are
    skipped (and listed).

    Raises:
        UndefinedRate: if the whole table has no correct or no incorrect mass.
    """
    tot_c, tot_i = table.correct.sum(axis=0), table.incorrect.sum(axis=0)
    if tot_c[0] <= 0 or tot_i[0] <= 0:
        raise UndefinedRate("equalized odds needs both correct and incorrect predictions")
    live = (table.correct[:, 0] > 0) & (table.incorrect[:, 0] > 0)
    skipped = tuple(g for g, ok in zip(table.groups, live) if not ok)
    kc, ki = reference_masses(table)
    c0, i0 = table.correct[live, :1], table.incorrect[live, :1]
    ref_tpr, ref_fpr = kc[live] / c0, ki[live] / i0
    tpr, fpr = table.correct[live] / c0, table.incorrect[live] / i0
    rows = []
    for t, tau in enumerate(table.taus):
        rt, rf = _gap(ref_tpr[:, t]), _gap(ref_fpr[:, t])
        rows.append(EqualizedOddsRow(
            float(tau), rt <= IDENTITY_TOL and rf <= IDENTITY_TOL, rt, rf,
            _gap(tpr[:, t]), _gap(fpr[:, t]),
        ))
    return EqualizedOddsReport(rows, skipped)


@dataclass(frozen=True)
class GroupCurve:
    """Accuracy-coverage curve of one group (or the average) with both references."""

    group: str
    points: list[CurvePoint]
    reference_accuracy: list[float | None]
    robinhood_accuracy: list[float | None]


def _none(values: Iterable[float]) -> list[float | None]:
    return [None if math.isnan(v) else float(v) for v in values]


def _check_group_weights(groups: Sequence[str], weights: Mapping[str, float]) -> np.ndarray:
    if set(weights) != set(groups):
        missing = sorted(set(groups) - set(weights))
        extra = sorted(set(weights) - set(groups))
        raise WeightMismatch(f"group weights must cover exactly the log's groups (missing {missing}, unknown {extra})")
    w = np.array([float(weights[g]) for g in groups])
    if np.any(~np.isfinite(w)) or np.any(w < 0) or abs(w.sum() - 1.0) > 1e-9:
        raise WeightMismatch(f"group weights must be nonnegative and sum to 1, got sum {w.sum()!r}")
    return w


def empirical_curves(
    samples: Sequence[LabeledExample],
    grid: ThresholdGrid | None = None,
    group_weights: Mapping[str, float] | None = None,
) -> list[GroupCurve]:
    """Average and per-group curves, average first, then groups in label order.

    Without ``group_weights`` the average pools all examples.  With them,
    each group's masses are rescaled so the group carries the given share
    before pooling; within-group accuracies are unaffected.

    Raises:
        EmptyInput: on an empty log.
        WeightMismatch: if ``group_weights`` do not match the groups or do
            not sum to 1.
    """
    samples = _require_examples(samples)
    if grid is None:
        grid = empirical_grid(samples)
    table = CountTable.from_examples(samples, grid)
    if group_weights is None:
        scale = np.ones(len(table.groups))
    else:
        scale = _check_group_weights(table.groups, group_weights) / table.group_mass
    ref_c, ref_i = reference_masses(table)
    rh_c, rh_i = robin_hood_masses(samples, grid)

    def pooled(c, i):
        c = (c * scale[:, None]).sum(axis=0)
        i = (i * scale[:, None]).sum(axis=0)
        return c, i

    def pooled_accuracy(c, i):
        c, i = pooled(c, i)
        return _none(_ratio(c, c + i))

    curves = []
    c, i = pooled(table.correct, table.incorrect)
    total = c[0] + i[0]
    curves.append(GroupCurve(
        AVERAGE,
        [CurvePoint(float(t), float((a + b) / total), _acc(float(a), float(b))) for t, a, b in zip(grid, c, i)],
        pooled_accuracy(ref_c, ref_i),
        pooled_accuracy(rh_c, rh_i),
    ))
    ref_acc = _ratio(ref_c, ref_c + ref_i)
    rh_acc = _ratio(rh_c, rh_c + rh_i)
    for g, name in enumerate(table.groups):
        mass = table.group_mass[g]
        cg, ig = table.correct[g], table.incorrect[g]
        curves.append(GroupCurve(
            name,
            [CurvePoint(float(t), float((a + b) / mass), _acc(float(a), float(b))) for t, a, b in zip(grid, cg, ig)],
            _none(ref_acc[g]),
            _none(rh_acc[g]),
        ))
    return curves


def worst_group(curves: Sequence[GroupCurve]) -> str:
    """Group with the lowest full-coverage accuracy; ties go to the first label."""
    cands = [(c.points[0].accuracy, c.group) for c in curves if c.group != AVERAGE and c.points[0].accuracy is not None]
    if not cands:
        raise EmptyInput("no group has a defined full-coverage accuracy")
    return min(cands)[1]
