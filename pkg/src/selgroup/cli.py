"""Command-line entry point.

Subcommands write their artifacts into ``--out``.  Exit codes: 0 success,
1 runtime or I/O failure, 2 usage or parse error.  Set ``SELGROUP_LOG_LEVEL``
(e.g. ``DEBUG``) to change log verbosity.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
from collections.abc import Sequence
from pathlib import Path

import numpy as np

from . import __version__, svg
from .concavity import is_left_log_concave, is_log_concave_density, skewness
from .distspec import parse_dist
from .errors import (
    DegenerateSample,
    DistSpecError,
    EmptyFile,
    OutOfRange,
    ParseError,
    SchemaError,
    SelgroupError,
    UnsupportedFormat,
    WeightMismatch,
)
from .ingest import DEFAULT_CONFIDENCE_CAP, dump_records, load_records
from .references import (
    AVERAGE,
    CountTable,
    empirical_curves,
    empirical_grid,
    equalized_odds_check,
    worst_group,
)
from .selective import (
    ThresholdGrid,
    accuracy_coverage_curve,
    classify_monotonicity,
    classify_points,
    selective_accuracy,
)
from .simulate import (
    DEFAULT_WORST_MEANS,
    DEFAULT_WORST_SIGMAS,
    SweepMode,
    SweepSpec,
    render_region_map,
    run_means_sweep,
    run_sweep,
)

log = logging.getLogger("selgroup")

LOG_ENV = "SELGROUP_LOG_LEVEL"
CURVE_COLUMNS = (
    "tau", "avg_coverage", "avg_accuracy", "group", "group_coverage",
    "group_accuracy", "reference_accuracy", "robinhood_accuracy",
)
PARAM_CURVE_COLUMNS = ("tau", "coverage", "accuracy")
ALL_FORMATS = ("csv", "json", "svg")

# exceptions that indicate bad input rather than a runtime failure
USAGE_ERRORS = (SchemaError, ParseError, EmptyFile, DistSpecError, WeightMismatch, UnsupportedFormat, OutOfRange)


class UsageError(Exception):
    pass


def _cell(v) -> str:
    if v is None or (isinstance(v, float) and math.isnan(v)):
        return ""
    return repr(float(v))


def _json_value(v):
    if isinstance(v, float) and not math.isfinite(v):
        return None
    if isinstance(v, dict):
        return {str(k): _json_value(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_json_value(x) for x in v]
    if isinstance(v, np.floating):
        return _json_value(float(v))
    if isinstance(v, np.integer):
        return int(v)
    return v


def _json_bytes(obj) -> bytes:
    return (json.dumps(_json_value(obj), indent=2, sort_keys=True, allow_nan=False) + "\n").encode("utf-8")


def _csv_bytes(header: Sequence[str], rows) -> bytes:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue().encode("utf-8")


def _formats(text: str | None, default: Sequence[str], allowed: Sequence[str] = ALL_FORMATS) -> tuple[str, ...]:
    if text is None:
        return tuple(default)
    fmts = tuple(dict.fromkeys(f.strip() for f in text.split(",") if f.strip()))
    bad = [f for f in fmts if f not in allowed]
    if bad or not fmts:
        raise UsageError(f"--format must be a subset of {','.join(allowed)}, got {text!r}")
    return fmts


def _group_weights(text: str | None) -> dict[str, float] | None:
    if not text:
        return None
    out = {}
    for part in text.split(","):
        name, sep, value = part.partition("=")
        if not sep or not name.strip():
            raise UsageError(f"--group-weights entries look like group=weight, got {part!r}")
        try:
            out[name.strip()] = float(value)
        except ValueError:
            raise UsageError(f"bad weight in {part!r}") from None
    return out


def _value_list(text: str | None, default: Sequence[float]) -> tuple[float, ...]:
    """Comma list ``a,b,c`` or range ``start:stop:count``."""
    if text is None:
        return tuple(default)
    try:
        if ":" in text:
            start, stop, count = text.split(":")
            n = int(count)
            if n < 1:
                raise ValueError
            return tuple(np.round(np.linspace(float(start), float(stop), n), 12))
        return tuple(float(v) for v in text.split(","))
    except ValueError:
        raise UsageError(f"expected a comma list or start:stop:count, got {text!r}") from None


def _uniform_grid(args, default_max: float) -> ThresholdGrid:
    tau_max = args.tau_max if args.tau_max is not None else default_max
    return ThresholdGrid.uniform(tau_max, args.tau_points or 512)


def _config(args, **extra) -> dict:
    cfg = {k: v for k, v in sorted(vars(args).items()) if k not in ("func",)}
    cfg.update(extra)
    return cfg


# ---------------------------------------------------------------------------
# commands


def cmd_analyze(args) -> dict[str, bytes]:
    fmts = _formats(args.format, ("csv", "json"))
    weights = _group_weights(args.group_weights)
    parsed = load_records(args.input, args.input_format, strict=args.strict, cap=args.confidence_cap)
    examples = parsed.examples
    if args.tau_points is None and args.tau_max is None:
        grid = empirical_grid(examples)
    else:
        top = max(ex.confidence for ex in examples)
        grid = _uniform_grid(args, top if top > 0 else 1.0)
    curves = empirical_curves(examples, grid, weights)
    out: dict[str, bytes] = {}

    avg = curves[0]
    if "csv" in fmts:
        rows = []
        for t, tau in enumerate(grid):
            a = avg.points[t]
            for c in curves:
                p = c.points[t]
                rows.append([
                    _cell(tau), _cell(a.coverage), _cell(a.accuracy), c.group,
                    _cell(p.coverage), _cell(p.accuracy),
                    _cell(c.reference_accuracy[t]), _cell(c.robinhood_accuracy[t]),
                ])
        out["curves.csv"] = _csv_bytes(CURVE_COLUMNS, rows)

    if "json" in fmts:
        table = CountTable.from_examples(examples, grid)
        groups = {}
        for c in curves[1:]:
            try:
                skew = skewness(parsed.distributions[c.group])
            except DegenerateSample:
                skew = None
            groups[c.group] = {
                "n": sum(1 for ex in examples if ex.group == c.group),
                "mass": parsed.group_mass[c.group],
                "full_coverage_accuracy": c.points[0].accuracy,
                "skewness": skew,
                "monotonicity": classify_points([p.accuracy for p in c.points]).value,
            }
        try:
            eo = equalized_odds_check(table)
            odds = {
                "reference_holds": eo.reference_holds,
                "classifier_max_tpr_gap": eo.max_tpr_gap,
                "classifier_max_fpr_gap": eo.max_fpr_gap,
                "skipped_groups": list(eo.skipped),
            }
        except SelgroupError as exc:
            odds = {"error": f"{type(exc).__name__}: {exc}"}
        summary = {
            "tool": "selgroup",
            "version": __version__,
            "command": "analyze",
            "config": _config(args),
            "n_examples": len(examples),
            "skipped_rows": [{"line": e.line, "message": e.message} for e in parsed.errors],
            "grid_points": len(grid),
            "average": {
                "full_coverage_accuracy": avg.points[0].accuracy,
                "monotonicity": classify_points([p.accuracy for p in avg.points]).value,
                "weighting": "group_weights" if weights else "pooled",
            },
            "groups": groups,
            "worst_group": worst_group(curves),
            "worst_group_tie_break": "lexicographic",
            "equalized_odds": odds,
        }
        out["summary.json"] = _json_bytes(summary)

    if "svg" in fmts:
        series = {}
        for c in curves:
            xs = [p.coverage for p in c.points]
            series[c.group] = (xs, [p.accuracy for p in c.points])
        out["curves.svg"] = svg.line_chart(series, "coverage", "selective accuracy", "accuracy-coverage").encode("utf-8")
        worst = worst_group(curves)
        wc = next(c for c in curves if c.group == worst)
        xs = [p.coverage for p in wc.points]
        out["worst_group.svg"] = svg.line_chart(
            {
                f"{worst}": (xs, [p.accuracy for p in wc.points]),
                "group-agnostic": (xs, wc.reference_accuracy),
                "robin hood": (xs, wc.robinhood_accuracy),
            },
            "coverage", "selective accuracy", f"worst group {worst}",
        ).encode("utf-8")
    return out


def cmd_simulate(args) -> dict[str, bytes]:
    fmts = _formats(args.format, ("csv",))
    tau_grid = None
    if args.tau_points is not None or args.tau_max is not None:
        tau_grid = ThresholdGrid.uniform(args.tau_max if args.tau_max is not None else 20.0, args.tau_points or 512)
    means = _value_list(args.worst_means, DEFAULT_WORST_MEANS)
    if args.mode == "means":
        report = run_means_sweep(
            means, _value_list(args.other_means, DEFAULT_WORST_MEANS), args.sigma, args.p, tau_grid, args.workers,
        )
    else:
        spec = SweepSpec(
            means, _value_list(args.worst_sigmas, DEFAULT_WORST_SIGMAS),
            args.other_mean, args.other_sigma, args.p, tau_grid,
        )
        report = run_sweep(spec, args.workers)
    out: dict[str, bytes] = {}
    if "csv" in fmts:
        out["sweep.csv"] = render_region_map(report, "csv")
    if "svg" in fmts:
        out["sweep.svg"] = render_region_map(report, "svg")
    if "json" in fmts:
        counts: dict[str, int] = {}
        for c in report.cells:
            key = f"{c.verdict.value}/{c.necessary_condition.value}"
            counts[key] = counts.get(key, 0) + 1
        out["sweep.json"] = _json_bytes({
            "tool": "selgroup",
            "version": __version__,
            "command": "simulate",
            "config": _config(args),
            "mode": report.mode.value,
            "cells": len(report),
            "tau_points": len(report.tau_grid),
            "tau_max": report.tau_grid.taus[-1],
            "counts": dict(sorted(counts.items())),
            "near_boundary_cells": sum(c.near_boundary for c in report.cells),
        })
    return out


def _shape(fn, dist) -> dict:
    try:
        return fn(dist).to_dict()
    except SelgroupError as exc:
        return {"verdict": None, "error": f"{type(exc).__name__}: {exc}"}


def check_dist_report(dist, spec: str) -> dict:
    try:
        skew = skewness(dist)
    except SelgroupError:
        skew = None
    try:
        mono = classify_monotonicity(dist).value
    except SelgroupError as exc:
        mono = f"error: {type(exc).__name__}"
    return {
        "spec": spec,
        "left_log_concave": _shape(is_left_log_concave, dist),
        "log_concave_density": _shape(is_log_concave_density, dist),
        "skewness": skew,
        "monotonicity": mono,
        "full_coverage_accuracy": selective_accuracy(dist, 0.0),
    }


def cmd_check_dist(args) -> dict[str, bytes]:
    _formats(args.format, ("json",), ("json",))
    dist = parse_dist(args.spec)
    report = check_dist_report(dist, args.spec)
    report.update({"tool": "selgroup", "version": __version__, "command": "check-dist", "config": _config(args)})
    data = _json_bytes(report)
    sys.stdout.write(data.decode("utf-8"))
    return {"check.json": data}


def cmd_curve(args) -> dict[str, bytes]:
    fmts = _formats(args.format, ("csv",), ("csv", "svg"))
    dist = parse_dist(args.spec)
    grid = _uniform_grid(args, dist.tau_max())
    points = accuracy_coverage_curve(dist, grid)
    out: dict[str, bytes] = {}
    if "csv" in fmts:
        out["curve.csv"] = _csv_bytes(
            PARAM_CURVE_COLUMNS, [[_cell(p.tau), _cell(p.coverage), _cell(p.accuracy)] for p in points]
        )
    if "svg" in fmts:
        out["curve.svg"] = svg.line_chart(
            {args.spec: ([p.coverage for p in points], [p.accuracy for p in points])},
            "coverage", "selective accuracy", "accuracy-coverage",
        ).encode("utf-8")
    return out


def cmd_export(args) -> dict[str, bytes]:
    parsed = load_records(args.input, args.input_format, strict=args.strict, cap=args.confidence_cap)
    fmt = args.to
    return {f"records.{fmt}": dump_records(parsed.examples, fmt)}


# ---------------------------------------------------------------------------
# plumbing


def _common(p: argparse.ArgumentParser, fmt_help: str) -> None:
    p.add_argument("--out", default=".", help="output directory (created if missing)")
    p.add_argument("--format", help=fmt_help)
    p.add_argument("--seed", type=int, default=0, help="recorded for provenance (default 0)")


def _grid_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--tau-points", type=int, help="number of thresholds on a uniform grid (>= 2)")
    p.add_argument("--tau-max", type=float, help="largest threshold on a uniform grid")


def _input_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("input", help="prediction log (.csv or .jsonl)")
    p.add_argument("--input-format", choices=("csv", "jsonl"), help="override format detection")
    p.add_argument("--strict", action="store_true", help="abort on the first malformed row")
    p.add_argument("--confidence-cap", type=float, default=DEFAULT_CONFIDENCE_CAP,
                   help="confidence assigned to p_max = 1")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="selgroup", description="Group-level selective classification analysis.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="per-group curves and references for a prediction log")
    _input_flags(p)
    _grid_flags(p)
    p.add_argument("--group-weights", help="average weights as g=w,... summing to 1")
    _common(p, "subset of csv,json,svg (default csv,json)")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("simulate", help="two-Gaussian parameter sweep")
    p.add_argument("--mode", choices=[m.value for m in SweepMode], default="sigmas")
    p.add_argument("--worst-means", help="list a,b,c or range start:stop:count")
    p.add_argument("--worst-sigmas", help="sigmas mode: list or range")
    p.add_argument("--other-means", help="means mode: list or range")
    p.add_argument("--other-mean", type=float, default=1.0)
    p.add_argument("--other-sigma", type=float, default=1.0)
    p.add_argument("--sigma", type=float, default=1.0, help="means mode: shared sigma")
    p.add_argument("--p", type=float, default=0.5, help="worst-group mass")
    p.add_argument("--workers", type=int, default=None, help="worker processes (default: run inline)")
    _grid_flags(p)
    _common(p, "subset of csv,json,svg (default csv)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("check-dist", help="shape report for a parametric margin law")
    p.add_argument("spec", help="e.g. 'gaussian(1,1)', 'mix2(0.5,-2,1,2,1)', 'skew(2,0,1)|cube'")
    _common(p, "json only")
    p.set_defaults(func=cmd_check_dist)

    p = sub.add_parser("curve", help="accuracy-coverage curve of a parametric margin law")
    p.add_argument("spec")
    _grid_flags(p)
    _common(p, "subset of csv,svg (default csv)")
    p.set_defaults(func=cmd_curve)

    p = sub.add_parser("export", help="rewrite a log in the canonical round-trip form")
    _input_flags(p)
    p.add_argument("--to", choices=("csv", "jsonl"), default="csv")
    _common(p, "unused")
    p.set_defaults(func=cmd_export)
    return parser


def _write_outputs(out_dir: Path, files: dict[str, bytes]) -> list[Path]:
    """Write every artifact or none: on failure, files already written are removed."""
    out_dir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    try:
        for name, data in files.items():
            target = out_dir / name
            tmp = out_dir / f".{name}.partial"
            tmp.write_bytes(data)
            written.append(tmp)
            os.replace(tmp, target)
            written[-1] = target
    except BaseException:
        for path in written:
            path.unlink(missing_ok=True)
        raise
    return written


def _setup_logging() -> None:
    level = os.environ.get(LOG_ENV, "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), format="%(levelname)s %(name)s: %(message)s")


def main(argv: Sequence[str] | None = None) -> int:
    _setup_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "tau_points", None) is not None and args.tau_points < 2:
        parser.error("--tau-points must be >= 2")
    try:
        files = args.func(args)
        for path in _write_outputs(Path(args.out), files):
            log.info("wrote %s", path)
    except (UsageError, *USAGE_ERRORS) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except (SelgroupError, OSError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
