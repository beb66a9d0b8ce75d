"""Energy functional, bubble expansions and the mountain-pass level test."""

from .expansions import (
    ExpansionReport,
    closed_A0_A1,
    closed_B0_B1,
    closed_C0,
    expansion_grad,
    expansion_lp,
    expansion_lq,
    expansion_report,
    normalized_ABC,
)
from .fitting import default_eps_sequence, single_regressor_slope, two_point_estimates
from .models import GUARDS, EnergyProblem, ExponentModel, check_guard, guard_flags
from .mountain_pass import (
    CondResult,
    GeometryReport,
    MPEntry,
    MPReport,
    RayEnergy,
    bubble_grid,
    cond_check,
    functional_J,
    mountain_pass_report,
    mp_geometry_check,
    sample_test_function,
    sup_over_ray,
)
from .reports import dumps_csv, dumps_json

__all__ = [
    "CondResult",
    "EnergyProblem",
    "ExpansionReport",
    "ExponentModel",
    "GUARDS",
    "GeometryReport",
    "MPEntry",
    "MPReport",
    "RayEnergy",
    "bubble_grid",
    "check_guard",
    "closed_A0_A1",
    "closed_B0_B1",
    "closed_C0",
    "cond_check",
    "default_eps_sequence",
    "dumps_csv",
    "dumps_json",
    "expansion_grad",
    "expansion_lp",
    "expansion_lq",
    "expansion_report",
    "functional_J",
    "guard_flags",
    "mountain_pass_report",
    "mp_geometry_check",
    "normalized_ABC",
    "sample_test_function",
    "single_regressor_slope",
    "sup_over_ray",
    "two_point_estimates",
]
