"""Scalar conservation laws with rough-in-time flux: solver and checks."""

from .characteristics import (CharState, FlowPath, IntegrationFailureError,
                              ManyFlow, SignPreservationError,
                              cancellation_gap, flow_backward, flow_forward,
                              flow_many, transport_solve)
from .flux import (AssumptionReport, Box, Coefficient, FluxModel,
                   constant_coefficient, eval_flux, linear_coefficient,
                   make_flux, max_wave_speed, sine_coefficient,
                   validate_assumptions)
from .kinetic import (CoverageError, DefectMeasure, KineticField, Mollifier,
                      chi, chi_field, convolve_along_char, defect_measure,
                      make_mollifier, make_xi_grid, q_bar)
from .paths import (RoughPath, UnsupportedPathKindError, coarsen,
                    eval_and_slope, linear_path, oscillation, path_from_csv,
                    path_from_knots, path_to_csv, refine_bridge,
                    sample_brownian)
from .solver import (Grid1D, NumericalFailureError, SupportEscapeError,
                     Trajectory, exact_riemann_burgers, l1_norm, l2_norm_sq,
                     replay_substeps, solve, step, trajectory_to_csv)
from .verify import (Report, ShrinkWindowError, check_contraction,
                     check_ordering, contraction_functional, entropy_residual,
                     invariant_region, linfty_supersolution, mass_bound,
                     stability_cauchy, steady_levels)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # flux
    "AssumptionReport", "Box", "Coefficient", "FluxModel",
    "constant_coefficient", "eval_flux", "linear_coefficient", "make_flux",
    "max_wave_speed", "sine_coefficient", "validate_assumptions",
    # paths
    "RoughPath", "UnsupportedPathKindError", "coarsen", "eval_and_slope",
    "linear_path", "oscillation", "path_from_csv", "path_from_knots",
    "path_to_csv", "refine_bridge", "sample_brownian",
    # characteristics
    "CharState", "FlowPath", "IntegrationFailureError", "ManyFlow",
    "SignPreservationError", "cancellation_gap", "flow_backward",
    "flow_forward", "flow_many", "transport_solve",
    # kinetic
    "CoverageError", "DefectMeasure", "KineticField", "Mollifier", "chi",
    "chi_field", "convolve_along_char", "defect_measure", "make_mollifier",
    "make_xi_grid", "q_bar",
    # solver
    "Grid1D", "NumericalFailureError", "SupportEscapeError", "Trajectory",
    "exact_riemann_burgers", "l1_norm", "l2_norm_sq", "replay_substeps",
    "solve", "step", "trajectory_to_csv",
    # verify
    "Report", "ShrinkWindowError", "check_contraction", "check_ordering",
    "contraction_functional", "entropy_residual", "invariant_region",
    "linfty_supersolution", "mass_bound", "stability_cauchy", "steady_levels",
]
