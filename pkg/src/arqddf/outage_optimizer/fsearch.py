"""One-dimensional infimum of a sum of two functions of the listening fraction."""
from __future__ import annotations

import math
from typing import Callable, Iterable, Sequence

from ..curves import PiecewiseCurve

INV_PHI = (math.sqrt(5) - 1) / 2


def golden_section(fn: Callable[[float], float], a: float, b: float,
                   tol: float = 1e-12, max_iter: int = 200) -> tuple[float, float]:
    """Local minimiser of ``fn`` on [a, b]; returns (x, fn(x))."""
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = fn(c), fn(d)
    for _ in range(max_iter):
        if b - a <= tol:
            break
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = fn(d)
    x = (a + b) / 2
    return x, fn(x)


def _kinks(fn) -> list[float]:
    if isinstance(fn, PiecewiseCurve):
        return [float(x) for x in fn.interior_breakpoints()]
    return []


def infimum_over_f(lambda_inner: Callable[[float], float], f_rule_inner: Callable[[float], float],
                   f_domain: Sequence[float], breakpoints: Iterable[float] = (),
                   subdivisions: int = 4) -> float:
    """inf over f in ``f_domain`` of lambda_inner(f) + f_rule_inner(f).

    The domain is cut at the breakpoints of both functions (taken from
    :class:`PiecewiseCurve` arguments automatically, plus ``breakpoints``);
    every cut interval is split into ``subdivisions`` parts and searched by
    golden section, and every cut point is evaluated directly.
    """
    lo, hi = float(f_domain[0]), float(f_domain[1])
    if not hi >= lo:
        raise ValueError(f"empty f domain [{lo}, {hi}]")

    def total(f: float) -> float:
        return float(lambda_inner(f)) + float(f_rule_inner(f))

    cuts = {lo, hi}
    for x in list(breakpoints) + _kinks(lambda_inner) + _kinks(f_rule_inner):
        if lo < x < hi:
            cuts.add(float(x))
    cuts = sorted(cuts)
    best = min(total(x) for x in cuts)
    for a, b in zip(cuts, cuts[1:]):
        step = (b - a) / subdivisions
        for k in range(subdivisions):
            _, val = golden_section(total, a + k * step, a + (k + 1) * step)
            best = min(best, val)
    return best
