"""Numerical bifurcation analysis of the scaled Holling-IV predator-prey
model with Allee effect."""

__version__ = "0.1.0"

from .model import (ModelParams, ParamError, scale_params, eval_pG, h_roots,
                    equilibria, region, trap_bound)
from .series import TruncatedSeries, series_mul, series_compose, involution_solve
from .localbif import bt_point, cusp_coeffs, unfolding_map, codim1_surfaces, ns_coeffs
from .hopf import (lienard_convert, focus_quantities, hopf_locus_b,
                   hopf3_search, hopf3_continue_in_A)
from .sim import (integrate, return_map, find_cycles, no_cycle_certificate,
                  existence_check, separatrices, connection_gap, Section)

__all__ = [
    "ModelParams", "ParamError", "scale_params", "eval_pG", "h_roots",
    "equilibria", "region", "trap_bound",
    "TruncatedSeries", "series_mul", "series_compose", "involution_solve",
    "bt_point", "cusp_coeffs", "unfolding_map", "codim1_surfaces", "ns_coeffs",
    "lienard_convert", "focus_quantities", "hopf_locus_b", "hopf3_search",
    "hopf3_continue_in_A",
    "integrate", "return_map", "find_cycles", "no_cycle_certificate",
    "existence_check", "separatrices", "connection_gap", "Section",
]
