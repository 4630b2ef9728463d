"""Reading prediction logs into labeled examples.

Accepted columns (CSV header or JSONL keys):

* ``group`` (required) and optionally ``id`` and ``weight``;
* correctness as ``correct`` in {0, 1} or both ``label`` and ``pred``
  (compared as strings); may be omitted when ``margin`` is given;
* exactly one confidence source: ``margin``, ``confidence``, or ``p_max``
  together with ``k``.

Empty CSV cells and JSON nulls count as absent.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
from collections.abc import Iterable, Iterator, Sequence
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .distributions import EmpiricalDistribution
from .errors import (
    EmptyFile,
    NegativeConfidence,
    OutOfRange,
    ParseError,
    SchemaError,
    UnsupportedFormat,
)
from .references import LabeledExample

log = logging.getLogger(__name__)

DEFAULT_CONFIDENCE_CAP = 30.0
FORMATS = ("csv", "jsonl")
EXPORT_COLUMNS = ("id", "group", "correct", "margin", "weight")
_CONFIDENCE_SOURCES = ("margin", "confidence", "p_max")


def sr_confidence(p_max: float, k: int, cap: float = DEFAULT_CONFIDENCE_CAP) -> float:
    """Softmax-response confidence ``0.5 * log(p_max (k - 1) / (1 - p_max))``.

    Zero at the uniform prediction ``p_max = 1/k``.  ``p_max = 1`` maps to
    ``cap``, as does anything that would exceed it.

    Raises:
        OutOfRange: if ``p_max`` lies outside ``[1/k, 1]`` or ``k < 2``.
    """
    k = int(k)
    if k < 2:
        raise OutOfRange(f"k must be >= 2, got {k}")
    p = float(p_max)
    if not (math.isfinite(p) and 1.0 / k <= p <= 1.0):
        raise OutOfRange(f"p_max={p_max!r} outside [1/{k}, 1]")
    if p == 1.0:
        return float(cap)
    c = 0.5 * math.log(p * (k - 1) / (1.0 - p))
    return min(max(c, 0.0), float(cap))


def margin(confidence: float, correct: bool) -> float:
    """Signed confidence: positive on correct predictions.

    Raises:
        NegativeConfidence: if ``confidence < 0``.
    """
    c = float(confidence)
    if not c >= 0:
        raise NegativeConfidence(f"confidence must be >= 0, got {confidence!r}")
    return c if correct else -c


@dataclass(frozen=True)
class ParsedLog:
    """Examples plus per-group margin laws.

    ``distributions[g]`` has weights normalized to 1; ``group_mass[g]`` is
    the group's total record weight.
    """

    examples: tuple[LabeledExample, ...]
    distributions: dict[str, EmpiricalDistribution]
    group_mass: dict[str, float]
    errors: tuple[ParseError, ...] = field(default=())

    @property
    def skipped(self) -> int:
        return len(self.errors)

    @property
    def groups(self) -> tuple[str, ...]:
        return tuple(sorted(self.distributions))


def _present(rec: dict, key: str) -> bool:
    v = rec.get(key)
    return v is not None and not (isinstance(v, str) and v.strip() == "")


def _number(rec: dict, key: str, line: int) -> float:
    v = rec[key]
    if isinstance(v, bool):
        raise ParseError(line, f"{key} must be a number, got {v!r}")
    try:
        x = float(v)
    except (TypeError, ValueError):
        raise ParseError(line, f"{key} must be a number, got {v!r}") from None
    if not math.isfinite(x):
        raise ParseError(line, f"{key} must be finite, got {v!r}")
    return x


def _flag(v, line: int) -> bool:
    if isinstance(v, bool):
        return v
    if isinstance(v, (int, float)) and v in (0, 1):
        return bool(v)
    s = str(v).strip().lower()
    if s in ("1", "true"):
        return True
    if s in ("0", "false"):
        return False
    raise ParseError(line, f"correct must be 0 or 1, got {v!r}")


def record_to_example(rec: dict, line: int, cap: float = DEFAULT_CONFIDENCE_CAP) -> LabeledExample:
    """Validate one record and resolve its correctness and confidence.

    Raises:
        ParseError: carrying ``line`` for any schema or value problem.
    """
    if not _present(rec, "group"):
        raise ParseError(line, "missing group")
    group = str(rec["group"]).strip()

    sources = [s for s in _CONFIDENCE_SOURCES if _present(rec, s)]
    if len(sources) != 1:
        raise ParseError(line, f"need exactly one of margin, confidence, p_max; got {sources or 'none'}")
    source = sources[0]

    correct: bool | None = None
    if _present(rec, "correct"):
        correct = _flag(rec["correct"], line)
    elif _present(rec, "label") or _present(rec, "pred"):
        if not (_present(rec, "label") and _present(rec, "pred")):
            raise ParseError(line, "label and pred must be given together")
        correct = str(rec["label"]).strip() == str(rec["pred"]).strip()

    if source == "margin":
        m = _number(rec, "margin", line)
        if correct is None:
            # a zero margin sits on the correct side, as at full coverage
            correct = m >= 0
        elif (correct and m < 0) or (not correct and m > 0):
            raise ParseError(line, f"margin {m!r} disagrees with correct={int(correct)}")
        confidence = abs(m)
    else:
        if correct is None:
            raise ParseError(line, "missing correctness: give correct, or label and pred")
        if source == "confidence":
            confidence = _number(rec, "confidence", line)
            if confidence < 0:
                raise ParseError(line, f"confidence must be >= 0, got {confidence!r}")
        else:
            if not _present(rec, "k"):
                raise ParseError(line, "p_max requires k")
            k = _number(rec, "k", line)
            if k != int(k):
                raise ParseError(line, f"k must be an integer, got {rec['k']!r}")
            try:
                confidence = sr_confidence(_number(rec, "p_max", line), int(k), cap)
            except OutOfRange as exc:
                raise ParseError(line, str(exc)) from None

    weight = 1.0
    if _present(rec, "weight"):
        weight = _number(rec, "weight", line)
        if weight <= 0:
            raise ParseError(line, f"weight must be > 0, got {weight!r}")
    ident = rec["id"] if _present(rec, "id") else line
    return LabeledExample(ident, group, correct, confidence, weight)


def _csv_records(text: str) -> Iterator[tuple[int, dict | ParseError]]:
    reader = csv.DictReader(io.StringIO(text))
    header = reader.fieldnames
    if not header:
        raise EmptyFile("empty input")
    header = [h.strip() for h in header]
    reader.fieldnames = header
    if "group" not in header:
        raise SchemaError("CSV header lacks the required column 'group'")
    if not any(s in header for s in _CONFIDENCE_SOURCES):
        raise SchemaError("CSV header needs one of margin, confidence, p_max")
    if "p_max" in header and "k" not in header:
        raise SchemaError("CSV header has p_max but no k")
    for row in reader:
        if None in row:
            yield reader.line_num, ParseError(reader.line_num, "more fields than header columns")
            continue
        if all(v is None or v.strip() == "" for v in row.values()):
            continue
        yield reader.line_num, row


def _jsonl_records(text: str) -> Iterator[tuple[int, dict | ParseError]]:
    for n, raw in enumerate(text.splitlines(), start=1):
        if not raw.strip():
            continue
        try:
            rec = json.loads(raw)
        except json.JSONDecodeError as exc:
            yield n, ParseError(n, f"invalid JSON: {exc.msg}")
            continue
        if not isinstance(rec, dict):
            yield n, ParseError(n, "each line must be a JSON object")
            continue
        yield n, rec


def parse_records(
    source: bytes | str,
    fmt: str,
    strict: bool = True,
    cap: float = DEFAULT_CONFIDENCE_CAP,
) -> ParsedLog:
    """Parse a CSV or JSONL log.

    In strict mode the first bad row raises; otherwise bad rows are skipped
    and kept in :attr:`ParsedLog.errors`.

    Raises:
        EmptyFile: if there is no usable record.
        SchemaError: for a CSV header that cannot satisfy the schema.
        ParseError: for a malformed row in strict mode.
        UnsupportedFormat: for formats other than csv and jsonl.
    """
    if fmt not in FORMATS:
        raise UnsupportedFormat(f"unsupported log format {fmt!r}")
    if isinstance(source, bytes):
        try:
            source = source.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise SchemaError(f"input is not UTF-8: {exc}") from None
    if source.startswith("\ufeff"):
        source = source[1:]
    if not source.strip():
        raise EmptyFile("empty input")

    records = _csv_records(source) if fmt == "csv" else _jsonl_records(source)
    examples: list[LabeledExample] = []
    errors: list[ParseError] = []
    for line, rec in records:
        try:
            if isinstance(rec, ParseError):
                raise rec
            examples.append(record_to_example(rec, line, cap))
        except ParseError as exc:
            if strict:
                raise
            log.warning("skipping %s", exc)
            errors.append(exc)
    if not examples:
        raise EmptyFile("no valid records")
    return build_log(examples, errors)


def build_log(examples: Sequence[LabeledExample], errors: Iterable[ParseError] = ()) -> ParsedLog:
    """Group examples into per-group empirical margin laws."""
    by_group: dict[str, list[LabeledExample]] = {}
    for ex in examples:
        by_group.setdefault(ex.group, []).append(ex)
    dists, mass = {}, {}
    for g in sorted(by_group):
        rows = by_group[g]
        w = np.array([r.weight for r in rows])
        total = float(w.sum())
        mass[g] = total
        dists[g] = EmpiricalDistribution(tuple(r.margin for r in rows), tuple(w / total))
    return ParsedLog(tuple(examples), dists, mass, tuple(errors))


def detect_format(path: str | Path) -> str:
    suffix = Path(path).suffix.lower()
    if suffix in (".jsonl", ".ndjson"):
        return "jsonl"
    if suffix == ".csv":
        return "csv"
    raise UnsupportedFormat(f"cannot infer log format from {str(path)!r}; use .csv or .jsonl")


def load_records(path: str | Path, fmt: str | None = None, strict: bool = True, cap: float = DEFAULT_CONFIDENCE_CAP) -> ParsedLog:
    """Read and parse a log file, inferring the format from its suffix."""
    fmt = fmt or detect_format(path)
    data = Path(path).read_bytes()
    return parse_records(data, fmt, strict=strict, cap=cap)


def dump_records(examples: Iterable[LabeledExample], fmt: str = "csv") -> bytes:
    """Serialize examples so that re-parsing reproduces every margin exactly.

    Floats are written with ``repr``, which round-trips binary64 values.
    """
    rows = [(ex.id, ex.group, int(ex.correct), ex.margin, ex.weight) for ex in examples]
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(EXPORT_COLUMNS)
        for ident, g, c, m, wt in rows:
            w.writerow([ident, g, c, repr(m), repr(wt)])
        return buf.getvalue().encode("utf-8")
    if fmt == "jsonl":
        lines = [
            json.dumps(dict(zip(EXPORT_COLUMNS, (_jsonable(i), g, c, m, wt))), sort_keys=False)
            for i, g, c, m, wt in rows
        ]
        return ("\n".join(lines) + "\n").encode("utf-8") if lines else b""
    raise UnsupportedFormat(f"unsupported export format {fmt!r}")


def _jsonable(v):
    return v if isinstance(v, (str, int, float)) and not isinstance(v, bool) else str(v)

