"""Outage regions of the MAR and CVMA channels over exponential orders.

A region is a conjunction of constraints ``lhs <= rhs`` / ``lhs >= rhs``
(plus disjunctions, used internally for the listening-fraction rule) over
nonnegative exponential orders.  Regions whose constraints mention the
listening fraction ``f`` carry an :class:`FRule` tying ``f`` to the
source-relay orders ``u``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Mapping, Union

import numpy as np

from .expr import (
    Expr,
    F,
    as_expr,
    evaluate,
    from_dict,
    maximum,
    minimum,
    pos,
    to_dict,
    uses_f,
    var,
    variables,
)

MAR_VARS = ("v1", "v2", "vr", "u1", "u2")
CVMA_VARS = ("v_ss", "v_si", "v_is", "v_ii", "u")


@dataclass(frozen=True)
class Le:
    lhs: Expr
    rhs: Expr

    def residual(self) -> Expr:
        return self.lhs - self.rhs


@dataclass(frozen=True)
class Ge:
    lhs: Expr
    rhs: Expr

    def residual(self) -> Expr:
        return self.rhs - self.lhs


@dataclass(frozen=True)
class AnyOf:
    """Disjunction of conjunctions."""

    options: tuple[tuple["Constraint", ...], ...]


Constraint = Union[Le, Ge, AnyOf]


def le(lhs, rhs) -> Le:
    return Le(as_expr(lhs), as_expr(rhs))


def ge(lhs, rhs) -> Ge:
    return Ge(as_expr(lhs), as_expr(rhs))


def constraint_vars(c: Constraint) -> set[str]:
    if isinstance(c, AnyOf):
        return set().union(*(constraint_vars(x) for opt in c.options for x in opt))
    return variables(c.lhs) | variables(c.rhs)


def constraint_uses_f(c: Constraint) -> bool:
    if isinstance(c, AnyOf):
        return any(constraint_uses_f(x) for opt in c.options for x in opt)
    return uses_f(c.lhs) or uses_f(c.rhs)


def violation(c: Constraint, env: Mapping[str, np.ndarray], f, r: float):
    """Amount by which ``c`` is violated (<= 0 means satisfied)."""
    if isinstance(c, AnyOf):
        per_option = [np.max([violation(x, env, f, r) for x in opt], axis=0) for opt in c.options]
        return np.min(per_option, axis=0)
    return evaluate(c.residual(), env, f, r)


@dataclass(frozen=True)
class FRule:
    """How the listening fraction f depends on the exponential orders.

    ``kind`` is one of ``"none"`` (f does not appear), ``"fixed"``,
    ``"mar_relay"`` (relay listens until it can decode both users) or
    ``"cvma_helper"`` (helping user listens until it can decode the other).
    """

    kind: str = "none"
    value: float | None = None

    def __post_init__(self):
        if self.kind not in ("none", "fixed", "mar_relay", "cvma_helper"):
            raise ValueError(f"unknown f rule {self.kind!r}")
        if self.kind == "fixed" and (self.value is None or not 0 <= self.value <= 1):
            raise ValueError("fixed f rule needs a value in [0, 1]")

    @property
    def u_vars(self) -> tuple[str, ...]:
        return {"mar_relay": ("u1", "u2"), "cvma_helper": ("u",)}.get(self.kind, ())

    def domain(self, r: float) -> tuple[float, float] | None:
        """Interval of attainable f values, None when f is irrelevant."""
        if self.kind == "none":
            return None
        if self.kind == "fixed":
            return (self.value, self.value)
        lo = r if self.kind == "mar_relay" else r / 2
        return (min(lo, 1.0), 1.0)

    def numeric(self, env: Mapping[str, np.ndarray], r: float):
        """f as a function of the orders, with x/0 = +inf for x > 0 and 0/0 = 0."""
        if self.kind == "fixed":
            return self.value
        if self.kind == "mar_relay":
            u = np.stack([np.asarray(env[n], dtype=float) for n in self.u_vars])
            q = np.maximum(_ratio(r, 2 * np.maximum(1 - u.max(axis=0), 0)),
                           _ratio(r, np.maximum(1 - u.min(axis=0), 0)))
        elif self.kind == "cvma_helper":
            q = _ratio(r, 2 * np.maximum(1 - np.asarray(env["u"], dtype=float), 0))
        else:
            raise ValueError("f rule 'none' has no value")
        return np.minimum(1.0, q)

    def constraints_at(self, f: float, r: float) -> list[Constraint]:
        """Constraints on the u orders under which the rule yields exactly ``f``."""
        if self.kind in ("none", "fixed") or r == 0:
            return []
        if self.kind == "mar_relay":
            umax, umin = maximum(*self.u_vars), minimum(*self.u_vars)
            if f >= 1:
                return [AnyOf(((ge(umax, 1 - r / 2),), (ge(umin, 1 - r),)))]
            a, b = 1 - r / (2 * f), 1 - r / f
            return [le(umax, a), le(umin, b), AnyOf(((ge(umax, a),), (ge(umin, b),)))]
        u = var("u")
        if f >= 1:
            return [ge(u, 1 - r / 2)]
        a = 1 - r / (2 * f)
        return [le(u, a), ge(u, a)]

    def to_dict(self) -> dict:
        return {"kind": self.kind, "value": self.value}


def _ratio(num: float, den: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        q = num / den
    if num > 0:
        return np.where(den > 0, q, np.inf)
    return np.zeros_like(den)


@dataclass(frozen=True)
class OutageRegion:
    name: str
    r: float
    variables: tuple[str, ...]
    constraints: tuple[Constraint, ...]
    f_rule: FRule = field(default_factory=FRule)

    def __post_init__(self):
        for c in self.constraints:
            missing = constraint_vars(c) - set(self.variables)
            if missing:
                raise ValueError(f"{self.name}: constraint uses unknown variables {sorted(missing)}")
        if self.f_rule.kind == "none" and any(constraint_uses_f(c) for c in self.constraints):
            raise ValueError(f"{self.name}: constraints depend on f but no f rule is given")
        if not set(self.f_rule.u_vars) <= set(self.variables):
            raise ValueError(f"{self.name}: f rule needs variables {self.f_rule.u_vars}")

    def active_variables(self) -> tuple[str, ...]:
        """Variables that appear in a constraint or in the f rule."""
        used = set(self.f_rule.u_vars)
        for c in self.constraints:
            used |= constraint_vars(c)
        return tuple(v for v in self.variables if v in used)

    def max_violation(self, point: Mapping[str, float], f: float | None = None) -> float:
        """Largest constraint violation at ``point`` (<= 0 inside the region).

        When the region has an f rule and ``f`` is given, disagreement between
        ``f`` and the rule value counts as a violation too.
        """
        env = {k: np.asarray(float(point.get(k, 0.0))) for k in self.variables}
        worst = -min(float(env[k]) for k in self.variables)  # orthant
        rule_f = None
        if self.f_rule.kind != "none":
            rule_f = float(self.f_rule.numeric(env, self.r))
            if f is not None:
                worst = max(worst, abs(f - rule_f))
        use_f = rule_f if f is None else f
        for c in self.constraints:
            worst = max(worst, float(violation(c, env, use_f, self.r)))
        return worst

    def contains(self, point: Mapping[str, float], tol: float = 1e-9) -> bool:
        return self.max_violation(point) <= tol

    def to_dict(self) -> dict:
        return {"name": self.name, "r": self.r, "variables": list(self.variables),
                "constraints": [_constraint_to_dict(c) for c in self.constraints],
                "f_rule": self.f_rule.to_dict()}

    @classmethod
    def from_dict(cls, d: Mapping) -> "OutageRegion":
        rule = d.get("f_rule") or {}
        return cls(d["name"], float(d["r"]), tuple(d["variables"]),
                   tuple(_constraint_from_dict(c) for c in d["constraints"]),
                   FRule(rule.get("kind", "none"), rule.get("value")))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "OutageRegion":
        return cls.from_dict(json.loads(text))


def _constraint_to_dict(c: Constraint) -> dict:
    if isinstance(c, AnyOf):
        return {"kind": "any", "options": [[_constraint_to_dict(x) for x in opt] for opt in c.options]}
    kind = "le" if isinstance(c, Le) else "ge"
    return {"kind": kind, "lhs": to_dict(c.lhs), "rhs": to_dict(c.rhs)}


def _constraint_from_dict(d: Mapping) -> Constraint:
    if d["kind"] == "any":
        return AnyOf(tuple(tuple(_constraint_from_dict(x) for x in opt) for opt in d["options"]))
    cls = {"le": Le, "ge": Ge}[d["kind"]]
    return cls(from_dict(d["lhs"]), from_dict(d["rhs"]))


def intersect(name: str, *regions: OutageRegion) -> OutageRegion:
    """Conjunction of regions sharing variables, r and f rule; duplicates dropped."""
    first = regions[0]
    cons: list[Constraint] = []
    for reg in regions:
        if reg.variables != first.variables or reg.r != first.r or reg.f_rule != first.f_rule:
            raise ValueError("regions differ in variables, r or f rule")
        cons.extend(c for c in reg.constraints if c not in cons)
    return OutageRegion(name, first.r, first.variables, tuple(cons), first.f_rule)


def _check(r: float, hi: float, name: str) -> float:
    r = float(r)
    if not 0 <= r <= hi:
        raise ValueError(f"{name}={r} outside [0, {hi}]")
    return r


# ---------------------------------------------------------------------------
# MAR channel
# ---------------------------------------------------------------------------

def region_mar_type1(r: float) -> OutageRegion:
    """User 1 in outage while user 2 is decoded."""
    r = _check(r, 1, "r")
    lhs = F * pos(1 - var("v1")) + (1 - F) * pos(1 - minimum("v1", "vr"))
    return OutageRegion("mar_type1", r, MAR_VARS, (le(lhs, r / 2),), FRule("mar_relay"))


def region_mar_type12(r: float) -> OutageRegion:
    """Both users in outage."""
    r = _check(r, 1, "r")
    lhs = F * pos(1 - minimum("v1", "v2")) + (1 - F) * pos(1 - minimum("v1", "v2", "vr"))
    return OutageRegion("mar_type12", r, MAR_VARS, (le(lhs, r),), FRule("mar_relay"))


# ---------------------------------------------------------------------------
# CVMA channel
# ---------------------------------------------------------------------------

def _gap(a: str, b: str) -> Expr:
    """1 - v_a - (1 - v_b)^+."""
    return 1 - var(a) - pos(1 - var(b))


def superior_ordering() -> Ge:
    """User s on antenna s has the largest SINR order among the four pairs."""
    return ge(_gap("v_ss", "v_is"),
              maximum(_gap("v_si", "v_ii"), _gap("v_is", "v_ss"), _gap("v_ii", "v_si")))


def _cvma(name: str, r1: float, *cons: Constraint, rule: FRule | None = None) -> OutageRegion:
    return OutageRegion(name, r1, CVMA_VARS, tuple(cons) + (superior_ordering(),), rule or FRule())


def _ji(r1: float) -> Le:
    return le(pos(1 - minimum("v_is", "v_ii")), r1 / 4)


def _s1(r1: float) -> Le:
    return le(pos(_gap("v_ss", "v_is")), r1 / 2)


def _js(r1: float) -> Le:
    return le(pos(1 - minimum("v_ss", "v_si")), r1 / 4)


def region_cvma_inferior(r1: float) -> OutageRegion:
    """Inferior user in outage after the helper listened for a fraction f."""
    r1 = _check(r1, 2, "r1")
    lhs = (1 + F) * pos(1 - minimum("v_is", "v_ii")) \
        + (1 - F) * pos(1 - minimum(*CVMA_VARS[:4]))
    return _cvma("cvma_inferior", r1, le(lhs, r1 / 2), rule=FRule("cvma_helper"))


def region_cvma_ji(r1: float) -> OutageRegion:
    """Joint decoding fails on the inferior user's rate term."""
    r1 = _check(r1, 2, "r1")
    return _cvma("cvma_ji", r1, _ji(r1))


def region_cvma_s1(r1: float) -> OutageRegion:
    """Superior user cannot be decoded alone in the first round."""
    r1 = _check(r1, 2, "r1")
    return _cvma("cvma_s1", r1, _s1(r1))


def region_cvma_sji(r1: float) -> OutageRegion:
    r1 = _check(r1, 2, "r1")
    return _cvma("cvma_sji", r1, _ji(r1), _s1(r1))


def region_cvma_sjs(r1: float, simplified: bool = True) -> OutageRegion:
    """Superior user fails both alone and in joint decoding on its own term.

    With ``simplified`` the single-user constraint is dropped because it is
    implied by the joint one under the ordering constraint.
    """
    r1 = _check(r1, 2, "r1")
    if simplified:
        return _cvma("cvma_sjs", r1, _js(r1))
    return _cvma("cvma_sjs_full", r1, _s1(r1), _js(r1))


REGION_BUILDERS = {
    "mar_type1": region_mar_type1,
    "mar_type12": region_mar_type12,
    "cvma_inferior": region_cvma_inferior,
    "cvma_ji": region_cvma_ji,
    "cvma_s1": region_cvma_s1,
    "cvma_sji": region_cvma_sji,
    "cvma_sjs": region_cvma_sjs,
}


def sum_objective(region: OutageRegion) -> dict[str, float]:
    return {v: 1.0 for v in region.variables}


def objective_value(weights: Mapping[str, float], point: Mapping[str, float]) -> float:
    return float(sum(w * point.get(k, 0.0) for k, w in weights.items()))

