"""Expression trees for outage-region constraints.

Expressions are piecewise-linear in the exponential orders: affine forms,
positive parts, min, max, sums and scalings.  Scalar coefficients may depend
on the multiplexing gain ``r`` and on the listening fraction ``f`` through the
monomials ``1, f, r, r/f``; they become plain numbers once ``f`` and ``r`` are
fixed, which is what both solvers work with.

Every node round-trips through plain dicts (``to_dict`` / ``from_dict``) so a
region can be stored as JSON.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Union

import numpy as np

MONOMIALS = ("1", "f", "r", "r/f")


@dataclass(frozen=True)
class Coef:
    """c1 + cf*f + cr*r + crf*r/f."""

    c1: float = 0.0
    cf: float = 0.0
    cr: float = 0.0
    crf: float = 0.0

    @property
    def uses_f(self) -> bool:
        return self.cf != 0 or self.crf != 0

    def __call__(self, f, r: float):
        out = self.c1 + self.cr * r
        if self.cf:
            out = out + self.cf * f
        if self.crf and r != 0:
            with np.errstate(divide="ignore"):
                out = out + self.crf * r / np.asarray(f, dtype=float)
            if np.ndim(out) == 0:
                out = float(out)
        return out

    def __add__(self, other: "Coef") -> "Coef":
        other = coef(other)
        return Coef(self.c1 + other.c1, self.cf + other.cf, self.cr + other.cr, self.crf + other.crf)

    __radd__ = __add__

    def __neg__(self) -> "Coef":
        return Coef(-self.c1, -self.cf, -self.cr, -self.crf)

    def __sub__(self, other) -> "Coef":
        return self + (-coef(other))

    def __rsub__(self, other) -> "Coef":
        return coef(other) - self

    def __mul__(self, k: float) -> "Coef":
        if not isinstance(k, (int, float)):
            return NotImplemented
        return Coef(self.c1 * k, self.cf * k, self.cr * k, self.crf * k)

    __rmul__ = __mul__

    def to_dict(self) -> dict:
        vals = (self.c1, self.cf, self.cr, self.crf)
        return {m: v for m, v in zip(MONOMIALS, vals) if v != 0}

    @classmethod
    def from_dict(cls, d: Mapping[str, float]) -> "Coef":
        unknown = set(d) - set(MONOMIALS)
        if unknown:
            raise ValueError(f"unknown coefficient monomials {sorted(unknown)}")
        return cls(*(float(d.get(m, 0.0)) for m in MONOMIALS))


ONE = Coef(c1=1.0)
F = Coef(cf=1.0)
R = Coef(cr=1.0)
R_OVER_F = Coef(crf=1.0)


def coef(x) -> Coef:
    if isinstance(x, Coef):
        return x
    return Coef(c1=float(x))


class Expr:
    """Base node.  Arithmetic operators build larger trees."""

    def __add__(self, other) -> "Expr":
        return Sum((self, as_expr(other)))

    def __radd__(self, other) -> "Expr":
        return Sum((as_expr(other), self))

    def __sub__(self, other) -> "Expr":
        return Sum((self, Scale(coef(-1.0), as_expr(other))))

    def __rsub__(self, other) -> "Expr":
        return Sum((as_expr(other), Scale(coef(-1.0), self)))

    def __neg__(self) -> "Expr":
        return Scale(coef(-1.0), self)

    def __rmul__(self, k) -> "Expr":
        return Scale(coef(k), self)

    __mul__ = __rmul__


@dataclass(frozen=True)
class Affine(Expr):
    terms: tuple[tuple[str, Coef], ...] = ()
    const: Coef = Coef()


@dataclass(frozen=True)
class Pos(Expr):
    arg: Expr


@dataclass(frozen=True)
class Min(Expr):
    args: tuple[Expr, ...]


@dataclass(frozen=True)
class Max(Expr):
    args: tuple[Expr, ...]


@dataclass(frozen=True)
class Sum(Expr):
    args: tuple[Expr, ...]


@dataclass(frozen=True)
class Scale(Expr):
    k: Coef
    arg: Expr


ExprLike = Union[Expr, Coef, float, int]


def var(name: str) -> Affine:
    return Affine(((name, ONE),))


def const(c) -> Affine:
    return Affine((), coef(c))


def as_expr(x: ExprLike) -> Expr:
    return x if isinstance(x, Expr) else const(x)


def pos(x: ExprLike) -> Pos:
    return Pos(as_expr(x))


def minimum(*args) -> Expr:
    args = tuple(var(a) if isinstance(a, str) else as_expr(a) for a in args)
    return args[0] if len(args) == 1 else Min(args)


def maximum(*args) -> Expr:
    args = tuple(var(a) if isinstance(a, str) else as_expr(a) for a in args)
    return args[0] if len(args) == 1 else Max(args)


def variables(e: Expr) -> set[str]:
    if isinstance(e, Affine):
        return {name for name, _ in e.terms}
    if isinstance(e, (Pos, Scale)):
        return variables(e.arg)
    out: set[str] = set()
    for a in e.args:
        out |= variables(a)
    return out


def uses_f(e: Expr) -> bool:
    if isinstance(e, Affine):
        return e.const.uses_f or any(c.uses_f for _, c in e.terms)
    if isinstance(e, Scale):
        return e.k.uses_f or uses_f(e.arg)
    if isinstance(e, Pos):
        return uses_f(e.arg)
    return any(uses_f(a) for a in e.args)


def evaluate(e: Expr, env: Mapping[str, np.ndarray], f, r: float):
    """Vectorised evaluation; ``env`` maps variable names to equal-shape arrays."""
    if isinstance(e, Affine):
        out = e.const(f, r)
        for name, c in e.terms:
            out = out + c(f, r) * env[name]
        return out
    if isinstance(e, Pos):
        return np.maximum(evaluate(e.arg, env, f, r), 0.0)
    if isinstance(e, Min):
        return _reduce(np.minimum, e.args, env, f, r)
    if isinstance(e, Max):
        return _reduce(np.maximum, e.args, env, f, r)
    if isinstance(e, Sum):
        return _reduce(np.add, e.args, env, f, r)
    if isinstance(e, Scale):
        return e.k(f, r) * evaluate(e.arg, env, f, r)
    raise TypeError(f"not an expression node: {e!r}")


def _reduce(op, args, env, f, r):
    out = evaluate(args[0], env, f, r)
    for a in args[1:]:
        out = op(out, evaluate(a, env, f, r))
    return out


def to_dict(e: Expr) -> dict:
    if isinstance(e, Affine):
        return {"op": "affine",
                "terms": {name: c.to_dict() for name, c in e.terms},
                "const": e.const.to_dict()}
    if isinstance(e, Pos):
        return {"op": "pos", "arg": to_dict(e.arg)}
    if isinstance(e, Scale):
        return {"op": "scale", "k": e.k.to_dict(), "arg": to_dict(e.arg)}
    name = {Min: "min", Max: "max", Sum: "sum"}[type(e)]
    return {"op": name, "args": [to_dict(a) for a in e.args]}


def from_dict(d: Mapping) -> Expr:
    op = d["op"]
    if op == "affine":
        terms = tuple((name, Coef.from_dict(c)) for name, c in d["terms"].items())
        return Affine(terms, Coef.from_dict(d.get("const", {})))
    if op == "pos":
        return Pos(from_dict(d["arg"]))
    if op == "scale":
        return Scale(Coef.from_dict(d["k"]), from_dict(d["arg"]))
    nodes = {"min": Min, "max": Max, "sum": Sum}
    if op not in nodes:
        raise ValueError(f"unknown expression op {op!r}")
    return nodes[op](tuple(from_dict(a) for a in d["args"]))
