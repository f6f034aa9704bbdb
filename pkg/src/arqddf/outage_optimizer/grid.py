"""Brute-force infimum by dense grid search with local refinement.

Independent of the branch compiler: constraints are evaluated directly on
grid points, and the listening fraction is computed from its rule at each
point instead of being searched over.  Used as a cross-check oracle.
"""
from __future__ import annotations

import itertools
import math
from typing import Mapping

import numpy as np

from .branch_lp import InfimumResult
from .regions import OutageRegion, sum_objective, violation

CHUNK = 1 << 18


def _scan(region: OutageRegion, names, axes, weights, feas_tol):
    """Best feasible points of the tensor grid ``axes`` (objective, point) sorted."""
    shape = [len(a) for a in axes]
    total = math.prod(shape)
    w = np.array([weights.get(n, 0.0) for n in names])
    found = []
    for start in range(0, total, CHUNK):
        idx = np.unravel_index(np.arange(start, min(start + CHUNK, total)), shape)
        pts = np.stack([axes[d][idx[d]] for d in range(len(names))], axis=1)
        env = {n: pts[:, d] for d, n in enumerate(names)}
        for n in region.variables:
            env.setdefault(n, np.zeros(len(pts)))
        f = region.f_rule.numeric(env, region.r) if region.f_rule.kind != "none" else 0.0
        ok = np.ones(len(pts), dtype=bool)
        for c in region.constraints:
            ok &= violation(c, env, f, region.r) <= feas_tol
        if not ok.any():
            continue
        obj = pts[ok] @ w
        order = np.argsort(obj, kind="stable")[:8]
        found.extend((float(obj[i]), pts[ok][i]) for i in order)
    found.sort(key=lambda t: t[0])
    return found


def grid_infimum(region: OutageRegion, weights: Mapping[str, float] | None = None,
                 upper: float = 2.0, step: float = 0.1, rounds: int = 8,
                 points_per_dim: int = 21, keep: int = 3, window: int = 2,
                 feas_tol: float = 1e-12) -> InfimumResult:
    """Grid oracle for the infimum of ``weights . x`` over ``region``.

    A uniform grid of spacing ``step`` on ``[0, upper]`` per active variable
    is scanned, then each of ``rounds`` refinements rescans a window of
    +-``window`` previous steps around the ``keep`` best points with
    ``points_per_dim`` points per axis.  The window is wider than one step
    because in thin regions the best coarse point can sit more than one
    step away from the optimum along every axis.  Variables that no
    constraint touches sit at 0.
    """
    weights = dict(sum_objective(region) if weights is None else weights)
    names = region.active_variables()
    for n in region.variables:
        if n not in names and weights.get(n, 0.0) < 0:
            return InfimumResult(-math.inf, {}, "grid")
    n_coarse = int(round(upper / step)) + 1
    axes = [np.linspace(0.0, upper, n_coarse)] * len(names)
    best = _scan(region, names, axes, weights, feas_tol)
    if not best:
        return InfimumResult(math.inf, {}, "grid", feasible=False)
    h = step
    for _ in range(rounds):
        centers = _distinct(best, keep)
        half = window * h
        h_new = 2 * half / (points_per_dim - 1)
        found = []
        for _, c in centers:
            ax = [np.unique(np.clip(x + np.linspace(-half, half, points_per_dim), 0.0, None))
                  for x in c]
            found.extend(_scan(region, names, ax, weights, feas_tol))
        best = sorted(found + best, key=lambda t: t[0])
        h = h_new
    value, point = best[0]
    argmin = {n: 0.0 for n in region.variables}
    argmin.update({n: float(x) for n, x in zip(names, point)})
    if region.f_rule.kind != "none":
        env = {k: np.asarray(v) for k, v in argmin.items()}
        argmin["f"] = float(region.f_rule.numeric(env, region.r))
    value = sum(weights.get(n, 0.0) * argmin[n] for n in region.variables)
    return InfimumResult(float(value), argmin, "grid", f=argmin.get("f"))


def _distinct(best, keep):
    out = []
    for val, p in best:
        if all(np.max(np.abs(p - q)) > 1e-15 for _, q in out):
            out.append((val, p))
        if len(out) == keep:
            break
    return out
