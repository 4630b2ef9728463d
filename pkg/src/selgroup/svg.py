"""Minimal deterministic SVG writers for region maps and line charts."""

from __future__ import annotations

import math
from collections.abc import Mapping, Sequence
from xml.sax.saxutils import escape

PALETTE = ("#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f")


def _num(x: float) -> str:
    return f"{x:.3f}".rstrip("0").rstrip(".")


def _header(width: int, height: int) -> list[str]:
    return [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
    ]


def region_map(
    xs: Sequence[float],
    ys: Sequence[float],
    fills: Sequence[Sequence[str]],
    hatched: Sequence[Sequence[bool]],
    legend: Mapping[str, str],
    x_label: str,
    y_label: str,
    cell: int = 8,
) -> str:
    """Heat-map of categorical cells.

    ``fills[j][i]`` is the color of the cell at ``(xs[i], ys[j])``; hatched
    cells get a diagonal overlay.  ``legend`` maps labels to colors.
    """
    margin_l, margin_b, margin_t = 60, 40, 20
    legend_w = 150
    w = margin_l + cell * len(xs) + legend_w
    h = margin_t + cell * len(ys) + margin_b
    out = _header(w, h)
    out.append(
        '<defs><pattern id="hatch" width="4" height="4" patternUnits="userSpaceOnUse">'
        '<path d="M0,4 L4,0" stroke="black" stroke-width="0.6"/></pattern></defs>'
    )
    top = margin_t
    for j in range(len(ys)):
        # larger y values at the top
        y = top + cell * (len(ys) - 1 - j)
        for i in range(len(xs)):
            x = margin_l + cell * i
            out.append(f'<rect x="{x}" y="{y}" width="{cell}" height="{cell}" fill="{fills[j][i]}"/>')
            if hatched[j][i]:
                out.append(f'<rect x="{x}" y="{y}" width="{cell}" height="{cell}" fill="url(#hatch)"/>')
    bottom = top + cell * len(ys)
    out.append(f'<text x="{margin_l}" y="{bottom + 14}">{_num(xs[0])}</text>')
    out.append(f'<text x="{margin_l + cell * len(xs)}" y="{bottom + 14}" text-anchor="end">{_num(xs[-1])}</text>')
    out.append(f'<text x="{margin_l + cell * len(xs) / 2}" y="{bottom + 30}" text-anchor="middle">{escape(x_label)}</text>')
    out.append(f'<text x="{margin_l - 4}" y="{bottom}" text-anchor="end">{_num(ys[0])}</text>')
    out.append(f'<text x="{margin_l - 4}" y="{top + 10}" text-anchor="end">{_num(ys[-1])}</text>')
    out.append(
        f'<text x="14" y="{top + cell * len(ys) / 2}" text-anchor="middle" '
        f'transform="rotate(-90 14 {top + cell * len(ys) / 2})">{escape(y_label)}</text>'
    )
    lx = margin_l + cell * len(xs) + 12
    for k, (label, color) in enumerate(legend.items()):
        ly = top + 16 * k
        fill = "url(#hatch)" if color == "hatch" else color
        out.append(f'<rect x="{lx}" y="{ly}" width="10" height="10" fill="{fill}" stroke="black" stroke-width="0.3"/>')
        out.append(f'<text x="{lx + 14}" y="{ly + 9}">{escape(label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def line_chart(
    series: Mapping[str, tuple[Sequence[float], Sequence[float | None]]],
    x_label: str,
    y_label: str,
    title: str = "",
    width: int = 560,
    height: int = 360,
) -> str:
    """Polyline chart; ``None`` y values break the line."""
    ml, mr, mt, mb = 56, 130, 28, 40
    xs_all = [x for xs, _ in series.values() for x in xs]
    ys_all = [y for _, ys in series.values() for y in ys if y is not None and math.isfinite(y)]
    if not xs_all or not ys_all:
        x0, x1, y0, y1 = 0.0, 1.0, 0.0, 1.0
    else:
        x0, x1 = min(xs_all), max(xs_all)
        y0, y1 = min(ys_all), max(ys_all)
    if x1 == x0:
        x1 = x0 + 1.0
    if y1 == y0:
        y0, y1 = y0 - 0.5, y1 + 0.5
    pw, ph = width - ml - mr, height - mt - mb

    def px(x):
        return ml + (x - x0) / (x1 - x0) * pw

    def py(y):
        return mt + (1 - (y - y0) / (y1 - y0)) * ph

    out = _header(width, height)
    out.append(f'<rect x="{ml}" y="{mt}" width="{pw}" height="{ph}" fill="none" stroke="black" stroke-width="0.5"/>')
    if title:
        out.append(f'<text x="{ml + pw / 2}" y="16" text-anchor="middle">{escape(title)}</text>')
    out.append(f'<text x="{ml}" y="{mt + ph + 14}">{_num(x0)}</text>')
    out.append(f'<text x="{ml + pw}" y="{mt + ph + 14}" text-anchor="end">{_num(x1)}</text>')
    out.append(f'<text x="{ml + pw / 2}" y="{mt + ph + 30}" text-anchor="middle">{escape(x_label)}</text>')
    out.append(f'<text x="{ml - 4}" y="{mt + ph}" text-anchor="end">{_num(y0)}</text>')
    out.append(f'<text x="{ml - 4}" y="{mt + 10}" text-anchor="end">{_num(y1)}</text>')
    out.append(
        f'<text x="14" y="{mt + ph / 2}" text-anchor="middle" '
        f'transform="rotate(-90 14 {mt + ph / 2})">{escape(y_label)}</text>'
    )
    for k, (name, (xs, ys)) in enumerate(series.items()):
        color = PALETTE[k % len(PALETTE)]
        run: list[str] = []
        runs = []
        for x, y in zip(xs, ys):
            if y is None or not math.isfinite(y):
                if run:
                    runs.append(run)
                run = []
                continue
            run.append(f"{_num(px(x))},{_num(py(y))}")
        if run:
            runs.append(run)
        for r in runs:
            out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{" ".join(r)}"/>')
        ly = mt + 16 * k
        out.append(f'<line x1="{ml + pw + 10}" y1="{ly + 5}" x2="{ml + pw + 24}" y2="{ly + 5}" stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{ml + pw + 28}" y="{ly + 9}">{escape(name)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
