"""Adaptive Simpson quadrature.

The error test accepts a panel when the Richardson estimate
``|S(left) + S(right) - S(whole)| / 15`` is below
``max(abs_tol, rel_tol * |S(left) + S(right)|)``.  Passing a small
``rel_tol`` together with a tiny ``abs_tol`` keeps tail integrals accurate
relative to their own size, which plain absolute tolerances cannot do once
the integrand drops below the tolerance.
"""

from __future__ import annotations

import math
from collections.abc import Callable

from .errors import QuadratureFailure

Panel = tuple[float, float, float]


def _simpson(fa: float, fm: float, fb: float, width: float) -> float:
    return width / 6.0 * (fa + 4.0 * fm + fb)


def adaptive_simpson(
    f: Callable[[float], float],
    a: float,
    b: float,
    abs_tol: float = 1e-10,
    rel_tol: float = 0.0,
    max_depth: int = 40,
) -> float:
    """Integrate ``f`` over ``[a, b]`` with adaptive Simpson refinement.

    Raises:
        QuadratureFailure: if a panel still fails the error test at
            ``max_depth`` bisections or the integrand is not finite.
    """
    if a == b:
        return 0.0
    if a > b:
        return -adaptive_simpson(f, b, a, abs_tol, rel_tol, max_depth)
    return sum(p[2] for p in simpson_panels(f, a, b, 1, abs_tol, rel_tol, max_depth))


def simpson_panels(
    f: Callable[[float], float],
    a: float,
    b: float,
    n_init: int = 1,
    abs_tol: float = 1e-10,
    rel_tol: float = 0.0,
    max_depth: int = 40,
) -> list[Panel]:
    """Return the accepted leaf panels ``(left, right, integral)`` in order.

    ``[a, b]`` is first cut into ``n_init`` equal panels, each refined
    independently.  Cumulative sums over the returned panels give the
    integral from ``a`` to any panel boundary.
    """
    if not b > a:
        raise ValueError("simpson_panels requires b > a")
    edges = [a + (b - a) * i / n_init for i in range(n_init + 1)]
    edges[-1] = b
    out: list[Panel] = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        flo, fhi = f(lo), f(hi)
        mid = 0.5 * (lo + hi)
        fmid = f(mid)
        whole = _simpson(flo, fmid, fhi, hi - lo)
        # explicit stack, processed left to right
        stack = [(lo, hi, flo, fmid, fhi, whole, 0)]
        while stack:
            x0, x1, f0, fm, f1, s, depth = stack.pop()
            m = 0.5 * (x0 + x1)
            lm = 0.5 * (x0 + m)
            rm = 0.5 * (m + x1)
            flm, frm = f(lm), f(rm)
            left = _simpson(f0, flm, fm, m - x0)
            right = _simpson(fm, frm, f1, x1 - m)
            both = left + right
            if not math.isfinite(both):
                raise QuadratureFailure(f"non-finite integrand on [{x0}, {x1}]")
            err = abs(both - s) / 15.0
            if err <= max(abs_tol, rel_tol * abs(both)):
                out.append((x0, x1, both + (both - s) / 15.0))
                continue
            if depth >= max_depth:
                raise QuadratureFailure(
                    f"tolerance not met on [{x0}, {x1}] after {max_depth} bisections"
                )
            stack.append((m, x1, fm, frm, f1, right, depth + 1))
            stack.append((x0, m, f0, flm, fm, left, depth + 1))
    return out
