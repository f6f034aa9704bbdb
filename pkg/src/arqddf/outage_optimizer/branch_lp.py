"""Exact infimum of a linear objective over a piecewise-linear region.

Each constraint ``g(x) <= 0`` is compiled into a finite list of
alternatives, each a set of linear inequalities over the orders plus fresh
auxiliary variables, such that the constraint holds iff some alternative is
satisfiable.  Convex pieces are handled without branching (epigraph of a max
or positive part on the upper side, hypograph of a min on the lower side);
only the non-convex pieces (a min bounded from above, a max or positive part
bounded from below) split into cases.  The infimum is the minimum over all
combinations of one alternative per constraint, each an LP.

The listening fraction ``f`` enters bilinearly, so it is fixed per call;
:func:`infimum` searches over it in one dimension.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np
from scipy.optimize import minimize_scalar

from .expr import Affine, Expr, Max, Min, Pos, Scale, Sum
from .lp import solve_lp
from .regions import AnyOf, Constraint, OutageRegion, constraint_vars, sum_objective

MAX_BRANCHES = 10**5

Form = dict  # variable -> coefficient; key "" holds the constant
Alt = tuple  # (Form, tuple[Form, ...]): value form and rows meaning form <= 0


class BranchExplosionError(RuntimeError):
    pass


@dataclass
class InfimumResult:
    value: float
    argmin: dict[str, float]
    method: str
    feasible: bool = True
    f: float | None = None
    n_lps: int = 0
    extra: dict = field(default_factory=dict)


def _add(a: Form, b: Form) -> Form:
    out = dict(a)
    for k, v in b.items():
        out[k] = out.get(k, 0.0) + v
    return out


def _scale(a: Form, k: float) -> Form:
    return {n: k * v for n, v in a.items()}


def _is_const(a: Form) -> bool:
    return all(v == 0 for n, v in a.items() if n)


class _Compiler:
    def __init__(self, f, r):
        self.f, self.r = f, r
        self.n_aux = 0

    def aux(self) -> str:
        self.n_aux += 1
        return f"_t{self.n_aux}"

    def compile(self, e: Expr, up: bool) -> list[Alt]:
        """Alternatives for ``e``.

        Upper side (``up``): e(x) <= t for some alternative with rows
        satisfied iff t >= form.  Lower side: e(x) >= form for some
        alternative.  Constraints only ever need the upper side of the
        residual; the lower side appears under negative scalings.
        """
        f, r = self.f, self.r
        if isinstance(e, Affine):
            form = {"": float(e.const(f, r))}
            for name, c in e.terms:
                form[name] = form.get(name, 0.0) + float(c(f, r))
            return [(form, ())]
        if isinstance(e, Sum):
            parts = [self.compile(a, up) for a in e.args]
            return [(_sum_forms(combo), _sum_rows(combo)) for combo in itertools.product(*parts)]
        if isinstance(e, Scale):
            k = float(e.k(f, r))
            if k == 0:
                return [({"": 0.0}, ())]
            alts = self.compile(e.arg, up if k > 0 else not up)
            return [(_scale(form, k), rows) for form, rows in alts]
        if isinstance(e, Pos):
            inner = self.compile(e.arg, up)
            if up:
                return [self._epigraph([form], rows) for form, rows in inner]
            return [({"": 0.0}, ())] + inner
        if isinstance(e, (Max, Min)):
            convex_side = isinstance(e, Max) == up
            parts = [self.compile(a, up) for a in e.args]
            if not convex_side:
                return [alt for p in parts for alt in p]
            out = []
            for combo in itertools.product(*parts):
                forms = [form for form, _ in combo]
                if up:
                    out.append(self._epigraph(forms, _sum_rows(combo)))
                else:
                    out.append(self._hypograph(forms, _sum_rows(combo)))
            return out
        raise TypeError(f"not an expression node: {e!r}")

    def _epigraph(self, forms, rows) -> Alt:
        """t >= max(forms) (with 0 included for positive parts handled by caller)."""
        if len(forms) == 1 and _is_const(forms[0]) and forms[0].get("", 0.0) <= 0:
            # positive part of a nonpositive constant
            return ({"": 0.0}, rows)
        t = self.aux()
        new = [{t: -1.0}] + [_add(fm, {t: -1.0}) for fm in forms]
        return ({t: 1.0}, tuple(rows) + tuple(new))

    def _hypograph(self, forms, rows) -> Alt:
        t = self.aux()
        new = [_add({t: 1.0}, _scale(fm, -1.0)) for fm in forms]
        return ({t: 1.0}, tuple(rows) + tuple(new))

    def constraint(self, c: Constraint) -> list[tuple[Form, ...]]:
        """Row sets, one per alternative, for ``c``."""
        if isinstance(c, AnyOf):
            out = []
            for option in c.options:
                per = [self.constraint(x) for x in option]
                out.extend(tuple(itertools.chain(*combo)) for combo in itertools.product(*per))
            return out
        return [rows + (form,) for form, rows in self.compile(c.residual(), True)]


def _sum_forms(combo) -> Form:
    out: Form = {}
    for form, _ in combo:
        out = _add(out, form)
    return out


def _sum_rows(combo) -> tuple:
    return tuple(itertools.chain.from_iterable(rows for _, rows in combo))


def _blocks(constraints, names) -> list[tuple[list[str], list[Constraint]]]:
    """Split constraints into groups that share no variable."""
    parent = {n: n for n in names}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for c in constraints:
        vs = sorted(constraint_vars(c))
        for v in vs[1:]:
            parent[find(v)] = find(vs[0])
    groups: dict[str, tuple[list[str], list[Constraint]]] = {}
    for c in constraints:
        vs = constraint_vars(c)
        key = find(next(iter(vs))) if vs else "__const__"
        groups.setdefault(key, ([], []))[1].append(c)
    for n in names:
        key = find(n)
        if key in groups:
            groups[key][0].append(n)
    return list(groups.values())


def infimum_fixed_f(region: OutageRegion, weights: Mapping[str, float] | None = None,
                    f: float | None = None, use_fast: bool = True) -> InfimumResult:
    """Branch-LP infimum with the listening fraction held at ``f``."""
    weights = dict(sum_objective(region) if weights is None else weights)
    r = region.r
    if region.f_rule.kind != "none" and f is None:
        raise ValueError("region has an f rule; pass f or use infimum()")
    constraints = list(region.constraints) + region.f_rule.constraints_at(f, r) if f is not None \
        else list(region.constraints)
    comp = _Compiler(f if f is not None else 0.0, r)
    argmin = {v: 0.0 for v in region.variables}
    total, n_lps = 0.0, 0
    for names, cons in _blocks(constraints, region.variables):
        alts = [comp.constraint(c) for c in cons]
        n_branches = math.prod(len(a) for a in alts)
        if n_branches > MAX_BRANCHES:
            raise BranchExplosionError(f"{region.name}: {n_branches} branches")
        best, best_x, cols = math.inf, None, None
        for combo in itertools.product(*alts):
            rows = list(itertools.chain.from_iterable(combo))
            aux = sorted({k for row in rows for k in row if k and k not in names})
            cols = list(names) + aux
            index = {n: i for i, n in enumerate(cols)}
            A = np.zeros((len(rows), len(cols)))
            b = np.zeros(len(rows))
            for i, row in enumerate(rows):
                for k, v in row.items():
                    if k:
                        A[i, index[k]] += v
                b[i] = -row.get("", 0.0)
            c = np.array([weights.get(n, 0.0) for n in names] + [0.0] * len(aux))
            lb = np.array([0.0] * len(names) + [-np.inf] * len(aux))
            res = solve_lp(c, A, b, lb, np.full(len(cols), np.inf), use_fast=use_fast)
            n_lps += 1
            if res.value < best:
                best, best_x = res.value, (res.x, cols)
        if best == math.inf:
            return InfimumResult(math.inf, {}, "branch-LP", False, f, n_lps)
        if best == -math.inf:
            return InfimumResult(-math.inf, {}, "branch-LP", True, f, n_lps)
        x, cols = best_x
        for n in names:
            argmin[n] = max(float(x[cols.index(n)]), 0.0)
    for n in region.variables:
        if weights.get(n, 0.0) < 0 and all(n not in constraint_vars(c) for c in constraints):
            return InfimumResult(-math.inf, {}, "branch-LP", True, f, n_lps)
    total = sum(weights.get(n, 0.0) * argmin[n] for n in region.variables)
    return InfimumResult(float(total), argmin, "branch-LP", True, f, n_lps)


def infimum(region: OutageRegion, weights: Mapping[str, float] | None = None,
            n_grid: int = 17, xatol: float = 1e-10, use_fast: bool = True) -> InfimumResult:
    """Global infimum of ``weights . x`` over ``region``.

    Regions without an f rule are solved directly.  Otherwise the value at
    fixed f is minimised over the f domain: a uniform scan followed by a
    bounded Brent search around the best scan point, with the domain ends
    always evaluated.
    """
    dom = region.f_rule.domain(region.r)
    if dom is None:
        return infimum_fixed_f(region, weights, None, use_fast)
    lo, hi = dom
    cache: dict[float, InfimumResult] = {}

    def at(f: float) -> InfimumResult:
        f = min(max(float(f), lo), hi)
        if f not in cache:
            cache[f] = infimum_fixed_f(region, weights, f, use_fast)
        return cache[f]

    if hi - lo <= 0:
        res = at(lo)
    else:
        grid = np.linspace(lo, hi, n_grid)
        vals = [at(f).value for f in grid]
        k = int(np.argmin(vals))
        a, b = grid[max(k - 1, 0)], grid[min(k + 1, n_grid - 1)]
        if np.isfinite(vals[k]):
            big = 1e6
            minimize_scalar(lambda f: min(at(f).value, big), bounds=(a, b), method="bounded",
                            options={"xatol": xatol})
        res = min(cache.values(), key=lambda x: x.value)
    n_lps = sum(v.n_lps for v in cache.values())
    out = InfimumResult(res.value, dict(res.argmin), "branch-LP", res.feasible, res.f, n_lps)
    if res.f is not None:
        out.argmin["f"] = res.f
    return out
