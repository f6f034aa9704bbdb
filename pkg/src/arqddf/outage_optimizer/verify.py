"""Cross-check closed-form outage exponents against the numerical engines."""
from __future__ import annotations

import csv
import io
import logging
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping

import numpy as np

from .. import dmt_analytic as dm
from .branch_lp import infimum
from .fsearch import infimum_over_f
from .regions import (
    region_cvma_inferior,
    region_cvma_sji,
    region_cvma_sjs,
    region_mar_type1,
    region_mar_type12,
)

log = logging.getLogger(__name__)

TOLERANCE = 1e-4
EDGE = 1e-3


def _lambda_route(inner, outer, lo_of):
    def numeric(r: float) -> float:
        return infimum_over_f(inner(r), outer(r), (lo_of(r), 1.0))
    return numeric


@dataclass(frozen=True)
class Check:
    curve_id: str
    closed: Callable[[float], float]
    numeric: Callable[[float], float]
    curve: object  # PiecewiseCurve giving domain and breakpoints


def default_checks() -> list[Check]:
    def region_route(builder):
        return lambda r: infimum(builder(r)).value

    return [
        Check("d_type1", dm.d_type1, region_route(region_mar_type1), dm.d_type1_curve()),
        Check("d_type12", dm.d_type12, region_route(region_mar_type12), dm.d_type12_curve()),
        Check("d_inferior", dm.d_inferior, region_route(region_cvma_inferior), dm.d_inferior_curve()),
        Check("d_sji", dm.d_superior_jointinferior, region_route(region_cvma_sji),
              dm.d_superior_jointinferior_curve()),
        Check("d_sjs", dm.d_superior_jointsuperior, region_route(region_cvma_sjs),
              dm.d_superior_jointsuperior_curve()),
        Check("d_type1_lambda", dm.d_type1,
              _lambda_route(dm.lambda_type1_curve, dm.lambda_sources_curve, lambda r: r),
              dm.d_type1_curve()),
        Check("d_type12_lambda", dm.d_type12,
              _lambda_route(dm.lambda_type12_curve, dm.lambda_sources_curve, lambda r: r),
              dm.d_type12_curve()),
        Check("d_inferior_lambda", dm.d_inferior,
              _lambda_route(dm.lambda_cvma_inferior_curve, dm.lambda_cvma_listen_curve,
                            lambda r: r / 2),
              dm.d_inferior_curve()),
    ]


def default_grid(curve, n_points: int = 50) -> list[float]:
    lo, hi = float(curve.lo), float(curve.hi)
    return [lo + (hi - lo) * (k + 0.5) / n_points for k in range(n_points)]


@dataclass
class Report:
    rows: list[tuple[str, float, float, float, float]] = field(default_factory=list)
    skipped: list[tuple[str, float]] = field(default_factory=list)
    tolerance: float = TOLERANCE

    @property
    def max_error(self) -> float:
        return max((row[4] for row in self.rows), default=0.0)

    @property
    def passed(self) -> bool:
        return bool(self.rows) and all(row[4] <= self.tolerance for row in self.rows)

    def failures(self) -> list[tuple]:
        return [row for row in self.rows if not row[4] <= self.tolerance]

    def to_csv(self, header_comment: str | None = None) -> str:
        buf = io.StringIO()
        if header_comment:
            buf.write(f"# {header_comment}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["curve_id", "r", "closed", "numeric", "abs_err"])
        for cid, r, closed, numeric, err in self.rows:
            w.writerow([cid, f"{r:.10g}", f"{closed:.12g}", f"{numeric:.12g}", f"{err:.3e}"])
        return buf.getvalue()


def _near_kink(r: float, curve) -> bool:
    marks = [float(x) for x, _ in curve.breakpoints()]
    return any(abs(r - x) < EDGE for x in marks)


def verify_closed_forms(r_grid: Iterable[float] | None = None, n_points: int = 50,
                        curves: Iterable[str] | None = None,
                        closed_forms: Mapping[str, Callable[[float], float]] | None = None) -> Report:
    """Compare every closed form with its numerical route on a grid of r.

    ``r_grid`` applies to all curves (points outside a curve's domain or
    within 1e-3 of one of its breakpoints are skipped with a warning);
    by default each curve uses ``n_points`` midpoints of its own domain.
    ``closed_forms`` replaces closed forms by id, which is how a broken
    formula is injected in tests.
    """
    checks = default_checks()
    if curves is not None:
        wanted = set(curves)
        unknown = wanted - {c.curve_id for c in checks}
        if unknown:
            raise KeyError(f"unknown curve ids {sorted(unknown)}")
        checks = [c for c in checks if c.curve_id in wanted]
    overrides = dict(closed_forms or {})
    report = Report()
    for chk in checks:
        grid = default_grid(chk.curve, n_points) if r_grid is None else list(r_grid)
        closed_fn = overrides.get(chk.curve_id, chk.closed)
        for r in grid:
            r = float(r)
            if not chk.curve.contains(r) or _near_kink(r, chk.curve):
                log.warning("skipping %s at r=%g (outside domain or near a breakpoint)", chk.curve_id, r)
                report.skipped.append((chk.curve_id, r))
                continue
            closed = float(closed_fn(r))
            numeric = float(chk.numeric(r))
            err = abs(closed - numeric) if np.isfinite(numeric) else float("inf")
            report.rows.append((chk.curve_id, r, closed, numeric, err))
    return report
