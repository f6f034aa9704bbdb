"""Piecewise curves d(x) with linear-fractional pieces.

Every closed-form DMT curve used in this package is continuous and made of
pieces of the form ``(a + b*x) / (c + d*x)``; linear pieces are the special
case ``c = 1, d = 0``.  Coefficients and breakpoints are stored as
``fractions.Fraction`` so continuity and equality checks at breakpoints are
exact.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

Number = int | float | Fraction

ABS_TOL = 1e-12


class DomainError(ValueError):
    """Argument outside the domain on which a formula is stated."""


class ConsistencyError(AssertionError):
    """Two routes to the same quantity disagree."""


def as_fraction(x: Number) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float) and not math.isfinite(x):
        raise DomainError(f"non-finite value {x!r}")
    return Fraction(x)


def check_close(a: Number, b: Number, what: str, tol: float = ABS_TOL) -> None:
    """Raise ConsistencyError unless ``a`` and ``b`` agree.

    Exact comparison when both are rationals, absolute tolerance otherwise.
    """
    if isinstance(a, (Fraction, int)) and isinstance(b, (Fraction, int)):
        if a != b:
            raise ConsistencyError(f"{what}: {a} != {b}")
        return
    if abs(float(a) - float(b)) > tol:
        raise ConsistencyError(f"{what}: {float(a)!r} != {float(b)!r}")


@dataclass(frozen=True)
class Piece:
    lo: Fraction
    hi: Fraction
    a: Fraction
    b: Fraction
    c: Fraction = Fraction(1)
    d: Fraction = Fraction(0)

    def __post_init__(self):
        # float copies for fast evaluation at float arguments
        object.__setattr__(self, "_fl", tuple(float(v) for v in (self.a, self.b, self.c, self.d)))

    @property
    def is_linear(self) -> bool:
        return self.d == 0

    def value(self, x: Number):
        if isinstance(x, (Fraction, int)):
            return Fraction(self.a + self.b * x) / Fraction(self.c + self.d * x)
        a, b, c, d = self._fl
        return (a + b * x) / (c + d * x)

    def scaled(self, s: Fraction) -> "Piece":
        """Piece of x -> self(x / s)."""
        return Piece(self.lo * s, self.hi * s, self.a, self.b / s, self.c, self.d / s)


def linear_piece(lo: Number, hi: Number, intercept: Number, slope: Number) -> Piece:
    return Piece(as_fraction(lo), as_fraction(hi), as_fraction(intercept), as_fraction(slope))


def frac_piece(lo: Number, hi: Number, a: Number, b: Number, c: Number, d: Number) -> Piece:
    lo, hi, a, b, c, d = (as_fraction(v) for v in (lo, hi, a, b, c, d))
    if d != 0 and a * d == b * c:
        # numerator proportional to denominator: constant b/d, possibly with
        # a removable 0/0 at an endpoint
        return Piece(lo, hi, b / d, Fraction(0))
    return Piece(lo, hi, a, b, c, d)


class PiecewiseCurve:
    """Continuous curve on ``[lo, hi]`` (or ``[lo, hi)``) assembled from pieces.

    Empty pieces (``lo == hi``) are dropped, which lets callers build curves
    whose middle branch vanishes for some parameter values.
    """

    def __init__(self, pieces: Sequence[Piece], closed_right: bool = True,
                 curve_id: str = "", label: str = ""):
        pieces = [p for p in pieces if p.hi > p.lo]
        if not pieces:
            raise DomainError("curve has an empty domain")
        for left, right in zip(pieces, pieces[1:]):
            if left.hi != right.lo:
                raise ValueError(f"pieces not contiguous at {left.hi} / {right.lo}")
            check_close(left.value(left.hi), right.value(right.lo),
                        f"{curve_id or 'curve'} continuity at x={left.hi}")
        for p in pieces:
            for x in (p.lo, p.hi):
                if p.c + p.d * x == 0:
                    raise ValueError(f"pole at x={x} in {curve_id}")
            # a linear-fractional piece without interior pole is monotone,
            # so checking endpoints suffices for nonnegativity
            if min(p.value(p.lo), p.value(p.hi)) < 0:
                raise ValueError(f"{curve_id} negative on [{p.lo}, {p.hi}]")
        self.pieces = tuple(pieces)
        self._float_his = [float(p.hi) for p in pieces]
        self._float_lo = float(pieces[0].lo)
        self.closed_right = closed_right
        self.curve_id = curve_id
        self.label = label

    @property
    def lo(self) -> Fraction:
        return self.pieces[0].lo

    @property
    def hi(self) -> Fraction:
        return self.pieces[-1].hi

    @property
    def is_linear(self) -> bool:
        return all(p.is_linear for p in self.pieces)

    def contains(self, x: Number) -> bool:
        if x < self.lo:
            return False
        return x <= self.hi if self.closed_right else x < self.hi

    def __call__(self, x: Number):
        if isinstance(x, float):
            return self._call_float(x)
        if not self.contains(x):
            bracket = "]" if self.closed_right else ")"
            raise DomainError(
                f"{self.curve_id or 'curve'}: x={x} outside [{float(self.lo)}, {float(self.hi)}{bracket}")
        for p in self.pieces:
            if x <= p.hi:
                return p.value(x)
        return self.pieces[-1].value(x)

    def _call_float(self, x: float) -> float:
        # same lookup as __call__ against float copies of the breakpoints
        his = self._float_his
        inside = x >= self._float_lo and (x <= his[-1] if self.closed_right else x < his[-1])
        if not inside:
            if math.isnan(x):
                raise DomainError("nan argument")
            bracket = "]" if self.closed_right else ")"
            raise DomainError(
                f"{self.curve_id or 'curve'}: x={x} outside [{self._float_lo}, {his[-1]}{bracket}")
        for i, (p, hi) in enumerate(zip(self.pieces, his)):
            if x <= hi:
                break
        if x == hi or (i and x == his[i - 1]) or not _well_conditioned(p, x):
            # rounded breakpoints and near-cancelling ratios: evaluate exactly
            xf = min(max(Fraction(x), self.lo), self.hi)
            for q in self.pieces:
                if xf <= q.hi:
                    return float(q.value(xf))
        return p.value(x)

    def interior_breakpoints(self) -> list[Fraction]:
        return [p.hi for p in self.pieces[:-1]]

    def breakpoints(self) -> list[tuple[Fraction, Fraction]]:
        """(x, d) at every piece boundary, domain ends included.

        The right end is reported even when the domain is open there; its
        value is the one-sided limit.
        """
        pts = [(p.lo, Fraction(p.value(p.lo))) for p in self.pieces]
        last = self.pieces[-1]
        pts.append((last.hi, Fraction(last.value(last.hi))))
        return pts

    def grid(self, step: float) -> list[float]:
        """Points lo, lo+step, ... inside the domain."""
        if step <= 0:
            raise ValueError("step must be positive")
        n = int(math.floor(float(self.hi - self.lo) / step + 1e-9))
        xs = [float(self.lo) + k * step for k in range(n + 1)]
        xs = [round(x, 12) for x in xs]
        return [x for x in xs if self.contains(x)]

    def stretched(self, s: Number, curve_id: str = "") -> "PiecewiseCurve":
        """Curve of x -> self(x / s)."""
        s = as_fraction(s)
        if s <= 0:
            raise ValueError("stretch factor must be positive")
        return PiecewiseCurve([p.scaled(s) for p in self.pieces], self.closed_right,
                              curve_id or self.curve_id, self.label)

    def restricted(self, hi: Number, closed_right: bool) -> "PiecewiseCurve":
        hi = as_fraction(hi)
        if hi > self.hi or (hi == self.hi and closed_right and not self.closed_right):
            raise DomainError(f"cannot extend {self.curve_id} beyond {self.hi}")
        pieces = []
        for p in self.pieces:
            if p.lo >= hi:
                break
            pieces.append(Piece(p.lo, min(p.hi, hi), p.a, p.b, p.c, p.d))
        return PiecewiseCurve(pieces, closed_right, self.curve_id, self.label)

    def to_json(self) -> str:
        return json.dumps([[float(x), float(d)] for x, d in self.breakpoints()])

    def __repr__(self) -> str:
        return f"PiecewiseCurve({self.curve_id!r}, [{float(self.lo)}, {float(self.hi)}], {len(self.pieces)} pieces)"


def _well_conditioned(p: Piece, x: float, rel: float = 1e-6) -> bool:
    if p.d == 0:
        return True
    a, b, c, d = p._fl
    return abs(a + b * x) > rel * (abs(a) + abs(b * x)) and abs(c + d * x) > rel * (abs(c) + abs(d * x))


def _linear_crossing(p: Piece, q: Piece) -> Fraction | None:
    db = p.b - q.b
    if db == 0:
        return None
    return (q.a - p.a) / db


def pointwise_min(curves: Iterable[PiecewiseCurve], curve_id: str = "") -> PiecewiseCurve:
    """Exact lower envelope of piecewise-linear curves on their common domain."""
    curves = list(curves)
    if not curves:
        raise ValueError("need at least one curve")
    if not all(c.is_linear for c in curves):
        raise ValueError("pointwise_min supports linear pieces only")
    lo = max(c.lo for c in curves)
    hi = min(c.hi for c in curves)
    closed = all(c.closed_right or c.hi > hi for c in curves)
    cuts = {lo, hi}
    for c in curves:
        cuts.update(x for x in c.interior_breakpoints() if lo < x < hi)
    cuts = sorted(cuts)
    # split further where two active pieces cross
    refined = set(cuts)
    for left, right in zip(cuts, cuts[1:]):
        mid = (left + right) / 2
        active = [_piece_at(c, mid) for c in curves]
        for i in range(len(active)):
            for j in range(i + 1, len(active)):
                x = _linear_crossing(active[i], active[j])
                if x is not None and left < x < right:
                    refined.add(x)
    cuts = sorted(refined)
    pieces = []
    for left, right in zip(cuts, cuts[1:]):
        mid = (left + right) / 2
        best = min((_piece_at(c, mid) for c in curves), key=lambda p: p.value(mid))
        if pieces and pieces[-1].a == best.a and pieces[-1].b == best.b:
            prev = pieces.pop()
            pieces.append(Piece(prev.lo, right, best.a, best.b))
        else:
            pieces.append(Piece(left, right, best.a, best.b))
    return PiecewiseCurve(pieces, closed, curve_id)


def _piece_at(curve: PiecewiseCurve, x: Fraction) -> Piece:
    for p in curve.pieces:
        if p.lo <= x <= p.hi:
            return p
    raise DomainError(f"{x} outside {curve!r}")
