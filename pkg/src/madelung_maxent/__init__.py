"""Maximum-entropy self-trapped states of the two-dimensional Madelung fluid.

The package solves the nonlinear ODEs for the quantum potential of the most
likely free-particle state at fixed average energy, reconstructs the
self-trapped density on its finite support, computes every scalar observable
and the rotating stationary velocity field, and exposes the small-beta
(delta-like) and infinite-beta (sinc) limits, all behind a reproducible CLI.
"""

__version__ = "0.1.0"

from .analysis import (LimitReport, LimitRow, SweepResult, angular_velocity,
                       beta_sweep, density_on_grid, divergence_sup,
                       entropy_stationarity_check, invert_beta_for_energy,
                       limit_convergence, observables, sinc_limit,
                       velocity_field)
from .fields import (ResidualNorms, assemble_2d, maxent_residual,
                     mixed_second_difference, rotate_grid)
from .integrator import (OdeSystem, StepControl, StopReason, Trajectory,
                         integrate, madelung_system, series_start)
from .kernels import NUMBA_ENABLED
from .model import (AxisProfile, FieldSample, Grid2D, LaplacianVariant,
                    LogicError, NoSolutionError, Observables, OutOfSupportError,
                    PhysicalParams, RadialProfile, SincLimit, SolverError,
                    SweepRow, ValidationError, make_params, to_json)
from .solver import (Geometry, SolveRequest, density_from_potential,
                     estimate_support, resample, series_coefficient,
                     solve_cartesian_factor, solve_radial)

__all__ = [
    "__version__", "NUMBA_ENABLED",
    # model
    "PhysicalParams", "make_params", "LaplacianVariant", "AxisProfile",
    "RadialProfile", "Observables", "SincLimit", "Grid2D", "SweepRow",
    "FieldSample", "to_json",
    "ValidationError", "SolverError", "LogicError", "OutOfSupportError",
    "NoSolutionError",
    # integrator
    "OdeSystem", "StepControl", "StopReason", "Trajectory", "integrate",
    "series_start", "madelung_system",
    # solver
    "Geometry", "SolveRequest", "solve_radial", "solve_cartesian_factor",
    "estimate_support", "density_from_potential", "resample", "series_coefficient",
    # fields
    "assemble_2d", "rotate_grid", "maxent_residual", "mixed_second_difference",
    "ResidualNorms",
    # analysis
    "observables", "angular_velocity", "velocity_field", "divergence_sup",
    "beta_sweep", "SweepResult", "sinc_limit", "limit_convergence",
    "LimitReport", "LimitRow", "invert_beta_for_energy",
    "entropy_stationarity_check", "density_on_grid",
]
