"""Small dense LP solves: minimise c.x subject to A x <= b, lb <= x <= ub.

The branch enumeration solves thousands of LPs with a handful of variables,
where ``scipy.optimize.linprog`` spends most of its time in input checking.
When SciPy's bundled HiGHS extension is importable it is driven directly;
otherwise ``linprog(method="highs")`` is used.  Both paths run the same
solver with the same tolerances.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

try:  # private module, layout differs across SciPy releases
    from scipy.optimize._highspy import _core as _hc
except ImportError:  # pragma: no cover
    _hc = None

TOL = 1e-10


@dataclass
class LPResult:
    status: str  # "optimal", "infeasible" or "unbounded"
    value: float
    x: np.ndarray | None


def solve_lp(c, A, b, lb, ub, use_fast: bool = True) -> LPResult:
    c = np.asarray(c, dtype=float)
    A = np.asarray(A, dtype=float).reshape(-1, c.size)
    b = np.asarray(b, dtype=float)
    if use_fast and _hc is not None:
        return _solve_fast(c, A, b, np.asarray(lb, float), np.asarray(ub, float))
    return _solve_linprog(c, A, b, lb, ub)


def _solve_linprog(c, A, b, lb, ub) -> LPResult:
    bounds = [(None if not np.isfinite(lo) else lo, None if not np.isfinite(hi) else hi)
              for lo, hi in zip(lb, ub)]
    res = linprog(c, A_ub=A if A.size else None, b_ub=b if A.size else None, bounds=bounds,
                  method="highs", options={"primal_feasibility_tolerance": TOL,
                                           "dual_feasibility_tolerance": TOL})
    if res.status == 2:
        return LPResult("infeasible", np.inf, None)
    if res.status == 3:
        return LPResult("unbounded", -np.inf, None)
    if res.status != 0:
        raise RuntimeError(f"LP solver failed: {res.message}")
    return LPResult("optimal", float(res.fun), np.asarray(res.x))


def _solve_fast(c, A, b, lb, ub) -> LPResult:
    inf = _hc.kHighsInf
    h = _hc._Highs()
    h.setOptionValue("output_flag", False)
    h.setOptionValue("primal_feasibility_tolerance", TOL)
    h.setOptionValue("dual_feasibility_tolerance", TOL)
    lp = _hc.HighsLp()
    n, m = c.size, b.size
    lp.num_col_ = n
    lp.num_row_ = m
    lp.col_cost_ = c
    lp.col_lower_ = np.where(np.isfinite(lb), lb, -inf)
    lp.col_upper_ = np.where(np.isfinite(ub), ub, inf)
    lp.row_lower_ = np.full(m, -inf)
    lp.row_upper_ = b
    rows, cols = np.nonzero(A)
    lp.a_matrix_.format_ = _hc.MatrixFormat.kRowwise
    lp.a_matrix_.num_col_ = n
    lp.a_matrix_.num_row_ = m
    lp.a_matrix_.start_ = np.searchsorted(rows, np.arange(m + 1)).astype(np.int32)
    lp.a_matrix_.index_ = cols.astype(np.int32)
    lp.a_matrix_.value_ = A[rows, cols]
    h.passModel(lp)
    h.run()
    status = h.modelStatusToString(h.getModelStatus())
    if status == "Optimal":
        x = np.asarray(h.getSolution().col_value, dtype=float)
        return LPResult("optimal", float(c @ x), x)
    if status == "Infeasible":
        return LPResult("infeasible", np.inf, None)
    if status in ("Unbounded", "Primal infeasible or unbounded"):
        # disambiguate with the reference path
        return _solve_linprog(c, A, b, lb, ub)
    raise RuntimeError(f"LP solver failed: {status}")
