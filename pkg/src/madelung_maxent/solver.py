"""Solvers for the self-trapped quantum potential.

Both geometries integrate the same family

    U'' = (beta/2) U'^2 + lambda_sq U - (c/r) U',   U(0) = U0 > 0, U'(0) = 0,

with c = 0 for a separable Cartesian factor and c = 2 (default) or 1 for the
rotationally symmetric form.  Every positive U0 gives a convex, nondecreasing
potential that blows up at a finite radius; the integration stops when
beta * (U - U0) reaches 40 (relative density e^-40, below double rounding)
and the support radius is recovered from the dominant balance
U ~ -(2/beta) ln(r_m - r), i.e.  r_m = r_stop + 2 / (beta U'(r_stop)).

U0 = 0 yields the trivial potential; it is returned as a degenerate
no-support profile (half-width inf, no density).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

import numpy as np

from . import quadrature
from .integrator import (OdeSystem, StepControl, StopReason, Trajectory,
                         integrate, madelung_system, series_start)
from .model import (AxisProfile, LogicError, PhysicalParams, RadialProfile,
                    SolverError, ValidationError, _require)

BLOWUP_LOG_MARGIN = 40.0  # stop once beta*(U - U0) exceeds this


class Geometry(enum.Enum):
    CARTESIAN_FACTOR = "cartesian-factor"
    RADIAL = "radial"


@dataclass(frozen=True)
class SolveRequest:
    """One solve: physical parameters, center value U0, stepping control."""

    params: PhysicalParams
    u0: float = 1.0
    control: StepControl = StepControl()
    geometry: Geometry = Geometry.RADIAL

    def __post_init__(self):
        _require(math.isfinite(self.u0) and self.u0 >= 0.0, "u0",
                 "must be a nonnegative finite real (self-trapping requires u0 > 0)")


def series_coefficient(params: PhysicalParams, u0: float, c_coef: float) -> float:
    """Leading Taylor coefficient a in U(r) = U0 + a r^2 + O(r^4)."""
    return params.lambda_sq * u0 / (2.0 * (1.0 + c_coef))


def _geometry_c(params: PhysicalParams, geometry: Geometry) -> float:
    if geometry is Geometry.CARTESIAN_FACTOR:
        return 0.0
    return params.laplacian_variant.first_derivative_coefficient


def profile_c_coef(profile) -> float:
    """First-derivative coefficient matching a profile's geometry."""
    if isinstance(profile, AxisProfile):
        return 0.0
    return profile.params.laplacian_variant.first_derivative_coefficient


def _solve_potential(params: PhysicalParams, u0: float, control: StepControl,
                     c_coef: float) -> Trajectory:
    lam_sq = params.lambda_sq
    ell = params.hbar / math.sqrt(params.mass * u0)  # natural length scale
    t_switch = 1e-4 * ell
    t_end = 200.0 * (ell + 1.0 / math.sqrt(lam_sq))

    threshold = control.blowup_threshold
    if not math.isfinite(threshold):
        threshold = u0 + BLOWUP_LOG_MARGIN / params.beta
    h0 = control.h_init if control.h_init > 0 else t_switch
    control = replace(control, blowup_threshold=threshold, h_init=h0)

    system = madelung_system(params.beta, lam_sq, c_coef)
    if c_coef != 0.0:
        # 1/r singularity at the origin: Taylor-advance before stepping
        a = series_coefficient(params, u0, c_coef)
        y_start = series_start(system, [u0, 0.0],
                               lambda t: [u0 + a * t * t, 2.0 * a * t], t_switch)
        t0 = t_switch
    else:
        y_start = np.array([u0, 0.0])
        t0 = 0.0

    trajectory = integrate(system, y_start, (t0, t_end), control, monitor_index=0)
    if trajectory.stop_reason is not StopReason.BLOWUP_DETECTED:
        raise SolverError(
            f"potential integration ended with '{trajectory.stop_reason.value}' "
            f"instead of blow-up (beta={params.beta}, u0={u0})", trajectory=trajectory)
    return trajectory


def estimate_support(trajectory: Trajectory, params: PhysicalParams) -> float:
    """Support radius from the blow-up dominant balance at the stop node."""
    if trajectory.stop_reason is not StopReason.BLOWUP_DETECTED:
        raise LogicError("support estimation requires a blow-up-terminated trajectory")
    r_stop = float(trajectory.nodes[-1])
    du_stop = float(trajectory.states[-1, 1])
    return r_stop + 2.0 / (params.beta * du_stop)


def density_from_potential(profile: RadialProfile) -> RadialProfile:
    """Attach rho = exp(-beta U)/Z with Z from the profile's own quadrature."""
    _require(bool(np.all(np.isfinite(profile.u))), "u", "must be finite to normalize")
    _require(math.isfinite(profile.r_m), "r_m", "profile has no finite support")
    p = profile.params
    moments = quadrature.radial_moments(p.beta, p.mass, p.lambda_sq,
                                        profile_c_coef(profile),
                                        profile.nodes, profile.u, profile.du, profile.r_m)
    rho = np.exp(-p.beta * profile.u) / moments.z
    return replace(profile, rho=rho, z=moments.z)


def solve_radial(request: SolveRequest) -> RadialProfile:
    """Solve the rotationally symmetric potential and normalize its density."""
    _require(request.geometry is Geometry.RADIAL, "geometry", "must be 'radial'")
    params, u0 = request.params, request.u0
    if u0 == 0.0:
        return RadialProfile(params=params, nodes=[0.0], u=[0.0], du=[0.0],
                             u0=0.0, r_m=math.inf)
    c_coef = _geometry_c(params, request.geometry)
    trajectory = _solve_potential(params, u0, request.control, c_coef)
    r_m = estimate_support(trajectory, params)
    nodes = np.concatenate([[0.0], trajectory.nodes])
    u = np.concatenate([[u0], trajectory.states[:, 0]])
    du = np.concatenate([[0.0], trajectory.states[:, 1]])
    draft = RadialProfile(params=params, nodes=nodes, u=u, du=du, u0=u0, r_m=r_m)
    return density_from_potential(draft)


def solve_cartesian_factor(request: SolveRequest) -> AxisProfile:
    """Solve one even Cartesian factor U_i on the half-axis."""
    _require(request.geometry is Geometry.CARTESIAN_FACTOR,
             "geometry", "must be 'cartesian-factor'")
    params, u0 = request.params, request.u0
    if u0 == 0.0:
        return AxisProfile(params=params, nodes=[0.0], u=[0.0], du=[0.0],
                           u0=0.0, half_width=math.inf, extrapolated=False)
    trajectory = _solve_potential(params, u0, request.control, 0.0)
    i_m = estimate_support(trajectory, params)
    return AxisProfile(params=params, nodes=trajectory.nodes,
                       u=trajectory.states[:, 0], du=trajectory.states[:, 1],
                       u0=u0, half_width=i_m, extrapolated=True)


def resample(profile, query):
    """Hermite-resampled (U, U') at arbitrary radii within the tabulated range.

    Solver outputs resample with the equation-informed quintic (the stored
    slopes determine U'' through the ODE, one extra order near the steep
    wall); profiles whose data is not consistent with the equation -- e.g.
    synthetic constant potentials -- fall back to a cubic Hermite on the
    stored (u, u') alone.
    """
    nodes, u, du = profile.nodes, profile.u, profile.du
    if nodes.size >= 3:
        p = profile.params
        acc = quadrature.second_derivative(nodes, u, du, p.beta, p.lambda_sq,
                                           profile_c_coef(profile))
        slope = np.diff(du) / np.diff(nodes)
        mid = 0.5 * (acc[:-1] + acc[1:])
        dev = np.abs(slope - mid) / (np.abs(acc[:-1]) + np.abs(acc[1:]) + 1e-300)
        if float(np.median(dev)) < 0.05:
            return quadrature.hermite_evaluate(nodes, u, du, acc, query)
    return quadrature.hermite_cubic_evaluate(nodes, u, du, query)


__all__ = [
    "BLOWUP_LOG_MARGIN", "Geometry", "SolveRequest", "series_coefficient",
    "estimate_support", "density_from_potential", "solve_radial",
    "solve_cartesian_factor", "resample", "profile_c_coef",
]
