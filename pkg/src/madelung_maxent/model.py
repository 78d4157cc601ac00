"""Domain types for the 2D Madelung-fluid maximum-entropy solver.

The solution family lives on the quantum potential U: a positive, convex,
self-trapping potential generated by the probability density rho = e^(-beta U)/Z
that it itself confines.  Everything downstream (solvers, observables, CLI)
exchanges the frozen types defined here.

All types are immutable after construction; arrays are marked read-only.
Every type serializes to a JSON-compatible dict with snake_case keys and
round-trips through ``from_dict`` unchanged.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field, fields, replace
from typing import Optional

import numpy as np


class ValidationError(ValueError):
    """Bad input to a constructor or operation; message names the field."""


class SolverError(RuntimeError):
    """Integration did not end in blow-up; carries the partial trajectory."""

    def __init__(self, message, trajectory=None):
        super().__init__(message)
        self.trajectory = trajectory


class LogicError(RuntimeError):
    """An operation was applied to an object in the wrong state."""


class OutOfSupportError(ValueError):
    """Requested radius lies at or beyond the support boundary."""


class NoSolutionError(RuntimeError):
    """No beta attains the requested energy; carries the feasible range."""

    def __init__(self, message, feasible_min=None):
        super().__init__(message)
        self.feasible_min = feasible_min


class LaplacianVariant(enum.Enum):
    """First-derivative coefficient used by the rotationally symmetric equation.

    The symmetric reduction used throughout carries a 2/r term (``paper-radial``,
    the default and the verification target); the planar axisymmetric Laplacian
    would give 1/r (``planar-radial``), kept available as a variant.
    """

    PAPER_RADIAL = "paper-radial"
    PLANAR_RADIAL = "planar-radial"

    @property
    def first_derivative_coefficient(self) -> float:
        return 2.0 if self is LaplacianVariant.PAPER_RADIAL else 1.0


def _require(condition: bool, name: str, message: str):
    if not condition:
        raise ValidationError(f"{name}: {message}")


def _readonly(a) -> np.ndarray:
    # copy so that freezing never mutates a caller-held array
    arr = np.array(a, dtype=np.float64, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class PhysicalParams:
    """Mass, hbar, entropy multiplier beta, and the derived stiffness Lambda^2.

    lambda_sq = 4*mass/(hbar^2 * beta) is the coefficient multiplying U in the
    nonlinear equation for the quantum potential; it is recomputed at
    construction and always consistent with the other fields.
    """

    beta: float
    mass: float = 1.0
    hbar: float = 1.0
    laplacian_variant: LaplacianVariant = LaplacianVariant.PAPER_RADIAL
    lambda_sq: float = field(init=False)

    def __post_init__(self):
        _require(isinstance(self.laplacian_variant, LaplacianVariant),
                 "laplacian_variant", "must be a LaplacianVariant")
        for name in ("mass", "hbar", "beta"):
            value = float(getattr(self, name))
            _require(math.isfinite(value) and value > 0, name, "must be a positive finite real")
            object.__setattr__(self, name, value)
        object.__setattr__(self, "lambda_sq", 4.0 * self.mass / (self.hbar**2 * self.beta))

    def to_dict(self) -> dict:
        return {
            "beta": self.beta,
            "mass": self.mass,
            "hbar": self.hbar,
            "laplacian_variant": self.laplacian_variant.value,
            "lambda_sq": self.lambda_sq,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PhysicalParams":
        return cls(beta=d["beta"], mass=d["mass"], hbar=d["hbar"],
                   laplacian_variant=LaplacianVariant(d["laplacian_variant"]))


def make_params(mass: float, hbar: float, beta: float,
                variant: LaplacianVariant | str = LaplacianVariant.PAPER_RADIAL) -> PhysicalParams:
    """Validated constructor for PhysicalParams (units default to m = hbar = 1)."""
    if isinstance(variant, str):
        variant = LaplacianVariant(variant)
    return PhysicalParams(beta=beta, mass=mass, hbar=hbar, laplacian_variant=variant)


def _check_profile_grid(nodes, u, du, u0):
    _require(nodes.ndim == 1 and nodes.size >= 1, "nodes", "must be a non-empty 1D sequence")
    _require(u.shape == nodes.shape and du.shape == nodes.shape,
             "u/du", "must match nodes in length")
    _require(nodes[0] == 0.0, "nodes", "must start at the origin")
    _require(bool(np.all(np.diff(nodes) > 0)), "nodes", "must be strictly ascending")
    _require(du[0] == 0.0, "du", "boundary condition du(0) = 0 violated")
    _require(u[0] == u0, "u", "u[0] must equal u0")
    if nodes.size >= 2:
        # convexity of the C1 data: the stored slope must not decrease
        # (second divided differences of u are hopeless on the bisection-
        # shortened intervals next to the wall, eps*|u|/h^2 noise)
        tol_du = 1e-10 * (1.0 + float(np.max(np.abs(du))))
        _require(bool(np.all(np.diff(du) >= -tol_du)), "du",
                 "must be nondecreasing (convexity of u)")
        tol_u = 1e-12 * (1.0 + float(np.max(np.abs(u))))
        _require(bool(np.all(np.diff(u) >= -tol_u)), "u", "must be nondecreasing")


@dataclass(frozen=True)
class AxisProfile:
    """One separable Cartesian factor U_i on the half-axis [0, i_stop].

    The factor is even (U(-i) = U(i)); only the half-line is stored.  The
    potential is convex and nondecreasing, and blows up at finite half-width
    i_m; ``half_width`` is the blow-up estimate (inf flags the no-support
    degenerate case u0 = 0) and ``extrapolated`` records whether it lies past
    the last node.
    """

    params: PhysicalParams
    nodes: np.ndarray
    u: np.ndarray
    du: np.ndarray
    u0: float
    half_width: float
    extrapolated: bool

    def __post_init__(self):
        for name in ("nodes", "u", "du"):
            object.__setattr__(self, name, _readonly(getattr(self, name)))
        _check_profile_grid(self.nodes, self.u, self.du, self.u0)
        _require(self.half_width >= self.nodes[-1], "half_width", "must not precede the last node")

    @property
    def has_support(self) -> bool:
        return math.isfinite(self.half_width)

    def to_dict(self) -> dict:
        return {
            "params": self.params.to_dict(),
            "nodes": self.nodes.tolist(),
            "u": self.u.tolist(),
            "du": self.du.tolist(),
            "u0": self.u0,
            "half_width": self.half_width,
            "extrapolated": self.extrapolated,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "AxisProfile":
        return cls(params=PhysicalParams.from_dict(d["params"]),
                   nodes=np.asarray(d["nodes"]), u=np.asarray(d["u"]), du=np.asarray(d["du"]),
                   u0=d["u0"], half_width=d["half_width"], extrapolated=d["extrapolated"])


@dataclass(frozen=True)
class RadialProfile:
    """Rotationally symmetric quantum potential and density on [0, r_m).

    ``rho``/``z`` may be None on an intermediate (not yet normalized) profile;
    ``density_from_potential`` fills them.  When present, rho is definitionally
    exp(-beta u)/z at every node and nonincreasing in r.
    """

    params: PhysicalParams
    nodes: np.ndarray
    u: np.ndarray
    du: np.ndarray
    u0: float
    r_m: float
    rho: Optional[np.ndarray] = None
    z: Optional[float] = None

    def __post_init__(self):
        for name in ("nodes", "u", "du"):
            object.__setattr__(self, name, _readonly(getattr(self, name)))
        _check_profile_grid(self.nodes, self.u, self.du, self.u0)
        _require(bool(np.all(self.du >= 0)), "du", "must be nonnegative")
        _require(self.r_m >= self.nodes[-1], "r_m", "must not precede the last node")
        if (self.rho is None) != (self.z is None):
            raise ValidationError("rho/z: must be provided together")
        if self.rho is not None:
            object.__setattr__(self, "rho", _readonly(self.rho))
            _require(self.rho.shape == self.nodes.shape, "rho", "must match nodes in length")
            _require(self.z > 0, "z", "must be positive")
            expected = np.exp(-self.params.beta * self.u) / self.z
            _require(bool(np.allclose(self.rho, expected, rtol=1e-12, atol=0.0)),
                     "rho", "must equal exp(-beta u)/z at every node")
            _require(bool(np.all(np.diff(self.rho) <= 1e-15 * self.rho[0])),
                     "rho", "must be nonincreasing")

    @property
    def normalized(self) -> bool:
        return self.rho is not None

    @property
    def has_support(self) -> bool:
        return math.isfinite(self.r_m)

    def to_dict(self) -> dict:
        return {
            "params": self.params.to_dict(),
            "nodes": self.nodes.tolist(),
            "u": self.u.tolist(),
            "du": self.du.tolist(),
            "u0": self.u0,
            "r_m": self.r_m,
            "rho": None if self.rho is None else self.rho.tolist(),
            "z": self.z,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RadialProfile":
        rho = d.get("rho")
        return cls(params=PhysicalParams.from_dict(d["params"]),
                   nodes=np.asarray(d["nodes"]), u=np.asarray(d["u"]), du=np.asarray(d["du"]),
                   u0=d["u0"], r_m=d["r_m"],
                   rho=None if rho is None else np.asarray(rho), z=d.get("z"))


@dataclass(frozen=True)
class Observables:
    """Scalar observables of one solved state.

    k_bar is the closed form mass/beta (exact for every stationary-spinning
    state); k_bar_quad is the independent quadrature of the kinetic integrand
    and must agree with k_bar to the quadrature tolerance.  energy is the
    exact decomposition u_bar + k_bar.
    """

    beta: float
    z: float
    u_bar: float
    k_bar: float
    k_bar_quad: float
    entropy: float
    r2_bar: float
    energy: float
    r_m: float

    def __post_init__(self):
        _require(self.u_bar > 0, "u_bar", "must be positive")
        _require(self.k_bar > 0, "k_bar", "must be positive")
        _require(self.energy == self.u_bar + self.k_bar, "energy",
                 "must equal u_bar + k_bar exactly")
        ident = abs(self.entropy - (self.beta * self.u_bar + math.log(self.z)))
        _require(ident <= 1e-8 * max(1.0, abs(self.entropy)), "entropy",
                 "violates entropy = beta*u_bar + ln(z)")

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    @classmethod
    def from_dict(cls, d: dict) -> "Observables":
        return cls(**d)


@dataclass(frozen=True)
class SincLimit:
    """Closed-form infinite-beta state: amplitude a*sin(k r)/r on [0, r_inf].

    The first zero of the amplitude sits exactly at the support radius,
    k * r_inf = pi, and the squared amplitude integrates to one over the disk.
    """

    k: float
    r_inf: float
    a: float
    s0: float
    energy: float

    def __post_init__(self):
        _require(self.k > 0, "k", "must be positive")
        _require(abs(self.k * self.r_inf - math.pi) <= 4 * np.finfo(float).eps * math.pi,
                 "r_inf", "k * r_inf must equal pi")
        _require(self.a > 0, "a", "must be positive")
        _require(self.energy > 0, "energy", "must be positive")

    def psi(self, r):
        r = np.asarray(r, dtype=float)
        with np.errstate(invalid="ignore", divide="ignore"):
            out = np.where(r == 0.0, self.a * self.k, self.a * np.sin(self.k * r) / np.where(r == 0.0, 1.0, r))
        return out

    def psi_prime(self, r):
        r = np.asarray(r, dtype=float)
        kr = self.k * r
        return self.a * (self.k * np.cos(kr) / r - np.sin(kr) / r**2)

    def psi_second(self, r):
        r = np.asarray(r, dtype=float)
        kr = self.k * r
        return self.a * (-self.k**2 * np.sin(kr) / r
                         - 2 * self.k * np.cos(kr) / r**2
                         + 2 * np.sin(kr) / r**3)

    def rho(self, r):
        r = np.asarray(r, dtype=float)
        out = self.psi(r) ** 2
        return np.where(r < self.r_inf, out, 0.0)

    def equation_residual(self, r):
        """psi'' + (2/r) psi' + k^2 psi, identically zero for the closed form."""
        return self.psi_second(r) + 2.0 / np.asarray(r, dtype=float) * self.psi_prime(r) \
            + self.k**2 * self.psi(r)

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    @classmethod
    def from_dict(cls, d: dict) -> "SincLimit":
        return cls(**d)


@dataclass(frozen=True)
class Grid2D:
    """Uniform Cartesian grid carrying congruent U and rho planes.

    Points outside the support carry rho = 0 and U = +inf (rotation sentinels).
    Axis coordinates are origin + index * spacing.
    """

    spacing: float
    x0: float
    y0: float
    u: np.ndarray
    rho: np.ndarray

    def __post_init__(self):
        _require(self.spacing > 0, "spacing", "must be positive")
        object.__setattr__(self, "u", _readonly(self.u))
        object.__setattr__(self, "rho", _readonly(self.rho))
        _require(self.u.ndim == 2, "u", "must be a 2D plane")
        _require(self.u.shape == self.rho.shape, "rho", "plane must be congruent with u")

    @property
    def shape(self):
        return self.u.shape

    @property
    def x(self) -> np.ndarray:
        return self.x0 + self.spacing * np.arange(self.u.shape[0])

    @property
    def y(self) -> np.ndarray:
        return self.y0 + self.spacing * np.arange(self.u.shape[1])

    def to_dict(self) -> dict:
        return {
            "spacing": self.spacing,
            "x0": self.x0,
            "y0": self.y0,
            "u": self.u.tolist(),
            "rho": self.rho.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Grid2D":
        return cls(spacing=d["spacing"], x0=d["x0"], y0=d["y0"],
                   u=np.asarray(d["u"]), rho=np.asarray(d["rho"]))


@dataclass(frozen=True)
class SweepRow:
    """One beta point of a sweep; failed solves carry status='failed'."""

    beta: float
    u0: float
    r_m: float
    r2_bar: float
    z: float
    u_bar: float
    k_bar_quadrature: float
    k_bar_closed_form: float
    energy: float
    entropy: float
    status: str = "ok"
    error: str = ""

    def __post_init__(self):
        _require(self.status in ("ok", "failed"), "status", "must be 'ok' or 'failed'")
        if self.status == "ok":
            rel = abs(self.k_bar_quadrature - self.k_bar_closed_form) / self.k_bar_closed_form
            _require(rel < 1e-6, "k_bar_quadrature",
                     f"disagrees with closed form by {rel:.2e} (limit 1e-6)")
            _require(self.energy == self.u_bar + self.k_bar_closed_form, "energy",
                     "must equal u_bar + k_bar_closed_form exactly")

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    @classmethod
    def from_dict(cls, d: dict) -> "SweepRow":
        return cls(**d)


@dataclass(frozen=True)
class FieldSample:
    """Velocity-field sample at one position of a spinning stationary state.

    velocity = (-omega*y, omega*x) by construction, so the stationarity
    residual mass*r*omega^2 - dU/dr vanishes to rounding for in-support
    samples.  Out-of-support positions are flagged and carry NaNs.
    """

    x: float
    y: float
    omega: float
    vx: float
    vy: float
    stationarity_residual: float
    in_support: bool

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    @classmethod
    def from_dict(cls, d: dict) -> "FieldSample":
        return cls(**d)


def to_json(obj, indent: int | None = 2) -> str:
    """Serialize any model type (anything exposing to_dict) to JSON text."""
    return json.dumps(obj.to_dict(), indent=indent, sort_keys=True)


__all__ = [
    "ValidationError", "SolverError", "LogicError", "OutOfSupportError", "NoSolutionError",
    "LaplacianVariant", "PhysicalParams", "make_params",
    "AxisProfile", "RadialProfile", "Observables", "SincLimit", "Grid2D",
    "SweepRow", "FieldSample", "to_json", "replace",
]
