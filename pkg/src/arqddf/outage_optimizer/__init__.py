"""Outage regions over exponential orders and engines for their infima."""
from .branch_lp import BranchExplosionError, InfimumResult, infimum, infimum_fixed_f
from .fsearch import golden_section, infimum_over_f
from .grid import grid_infimum
from .regions import (
    REGION_BUILDERS,
    FRule,
    OutageRegion,
    intersect,
    objective_value,
    region_cvma_inferior,
    region_cvma_ji,
    region_cvma_s1,
    region_cvma_sji,
    region_cvma_sjs,
    region_mar_type1,
    region_mar_type12,
    sum_objective,
)
from .verify import Report, verify_closed_forms
