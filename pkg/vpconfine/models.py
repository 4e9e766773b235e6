"""Domain types: species, cutoffs, geometries, magnetic fields and solver results."""

import math
from dataclasses import dataclass, field as dc_field, replace
from enum import Enum, IntEnum

import numpy as np

from vpconfine.errors import ConfigurationError, DomainError


class Direction(str, Enum):
    """Barrier the monotone iteration starts from."""

    MAXIMAL = "maximal"
    MINIMAL = "minimal"


class NodeKind(IntEnum):
    """Classification of grid nodes."""

    INTERIOR = 0
    BOUNDARY = 1
    AXIS = 2
    OUTSIDE = 3


@dataclass(frozen=True)
class CutoffSpec:
    """Smoothstep product psi(E, I) = C s((E0 - E)/wE) s((I0 - I)/wI)."""

    E0: float
    I0: float
    amplitude: float = 1.0
    wE: float = 1.0
    wI: float = 1.0

    def __post_init__(self):
        errors = []
        if self.amplitude < 0:
            errors.append("cutoff amplitude must be nonnegative.")
        if not self.wE > 0 or not self.wI > 0:
            errors.append("cutoff widths wE and wI must be positive.")
        if errors:
            raise ConfigurationError(errors)

    def scaled(self, *, amplitude=1.0, energy=1.0, integral=1.0):
        """Return the spec of (E, I) -> amplitude * psi(E / energy, I / integral)."""
        return CutoffSpec(
            E0=self.E0 * energy,
            I0=self.I0 * integral,
            amplitude=self.amplitude * amplitude,
            wE=self.wE * energy,
            wI=self.wI * integral,
        )

    def to_dict(self):
        return {
            "E0": self.E0,
            "I0": self.I0,
            "amplitude": self.amplitude,
            "wE": self.wE,
            "wI": self.wI,
        }


@dataclass(frozen=True)
class Species:
    label: str
    charge: float
    mass: float
    cutoff: CutoffSpec

    def __post_init__(self):
        errors = []
        if self.charge == 0:
            errors.append(f"species '{self.label}': charge must be nonzero.")
        if not self.mass > 0:
            errors.append(f"species '{self.label}': mass must be positive.")
        if errors:
            raise ConfigurationError(errors)

    def with_cutoff(self, cutoff):
        return replace(self, cutoff=cutoff)

    def to_dict(self):
        return {
            "label": self.label,
            "charge": self.charge,
            "mass": self.mass,
            "cutoff": self.cutoff.to_dict(),
        }


# Geometries -----------------------------------------------------------------

@dataclass(frozen=True)
class RadialDisc:
    """Cross-section of an infinite cylinder, solved in the radius only."""

    r0: float

    kind = "radial_disc"
    velocity_dim = 2
    spatial_dim = 1
    has_axis = True

    def reduce(self, x):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        if x.size == 1:
            return float(abs(x[0])), 0.0
        return float(math.hypot(x[0], x[1])), 0.0

    def contains(self, r, z=0.0, tol=1e-12):
        return 0.0 <= r <= self.r0 + tol

    def boundary_distance(self, r, z=0.0):
        return self.r0 - r

    def to_dict(self):
        return {"kind": self.kind, "r0": self.r0}


@dataclass(frozen=True)
class RectSection:
    r_min: float
    r_max: float
    z_min: float
    z_max: float

    kind = "rect"

    def bounds(self):
        return self.r_min, self.r_max, self.z_min, self.z_max

    def contains(self, r, z, tol=1e-12):
        return (self.r_min - tol <= r <= self.r_max + tol
                and self.z_min - tol <= z <= self.z_max + tol)

    def boundary_distance(self, r, z):
        return min(r - self.r_min, self.r_max - r, z - self.z_min, self.z_max - z)

    def to_dict(self):
        return {"kind": self.kind, "r_min": self.r_min, "r_max": self.r_max,
                "z_min": self.z_min, "z_max": self.z_max}


@dataclass(frozen=True)
class DiscSection:
    r_c: float
    z_c: float
    radius: float

    kind = "disc"

    def bounds(self):
        return (self.r_c - self.radius, self.r_c + self.radius,
                self.z_c - self.radius, self.z_c + self.radius)

    def level_set(self, r, z):
        return (r - self.r_c) ** 2 + (z - self.z_c) ** 2 - self.radius ** 2

    def contains(self, r, z, tol=1e-12):
        return math.hypot(r - self.r_c, z - self.z_c) <= self.radius + tol

    def boundary_distance(self, r, z):
        return self.radius - math.hypot(r - self.r_c, z - self.z_c)

    def to_dict(self):
        return {"kind": self.kind, "r_c": self.r_c, "z_c": self.z_c,
                "radius": self.radius}


@dataclass(frozen=True)
class ToroidalCrossSection:
    """Poloidal cross-section Q of an axisymmetric torus, kept away from r = 0."""

    shape: object

    kind = "toroidal"
    velocity_dim = 3
    spatial_dim = 2
    has_axis = False

    def __post_init__(self):
        r_min = self.shape.bounds()[0]
        if not r_min > 0:
            raise ConfigurationError(
                "toroidal cross-section must stay away from the axis (r > 0)."
            )

    def reduce(self, x):
        x = np.asarray(x, dtype=float)
        if x.size != 2:
            raise DomainError("toroidal positions are (r, z) pairs.")
        return float(x[0]), float(x[1])

    def contains(self, r, z=0.0, tol=1e-12):
        return self.shape.contains(r, z, tol)

    def boundary_distance(self, r, z=0.0):
        return self.shape.boundary_distance(r, z)

    def to_dict(self):
        return {"kind": self.kind, "shape": self.shape.to_dict()}


@dataclass(frozen=True)
class MirrorCylinder:
    """Finite cylinder of radius r0 and height 2l, solved in (r, x3)."""

    r0: float
    l: float

    kind = "mirror"
    velocity_dim = 3
    spatial_dim = 2
    has_axis = True

    def reduce(self, x):
        x = np.asarray(x, dtype=float)
        if x.size == 2:
            return float(abs(x[0])), float(x[1])
        if x.size == 3:
            return float(math.hypot(x[0], x[1])), float(x[2])
        raise DomainError("mirror positions are (r, x3) or (x1, x2, x3).")

    def contains(self, r, z=0.0, tol=1e-12):
        return 0.0 <= r <= self.r0 + tol and abs(z) <= self.l + tol

    def boundary_distance(self, r, z=0.0):
        return min(self.r0 - r, self.l - abs(z))

    def to_dict(self):
        return {"kind": self.kind, "r0": self.r0, "l": self.l}


# Magnetic fields ------------------------------------------------------------

@dataclass(frozen=True)
class AxialConstant:
    """Constant field b along the cylinder axis."""

    b: float
    c_light: float = 1.0

    kind = "axial_constant"
    orientation = 1.0

    def vector_potential(self, r, z=0.0):
        return 0.5 * self.b * r ** 2

    def linear_form_norms(self):
        return self.c_light, 0.0

    def strength(self, x3=None, half_length=None):
        return self.b

    def distance_from_center(self, r, z=0.0):
        return np.abs(r)

    def center(self):
        return 0.0, 0.0

    def reduced_field(self, r, z=0.0):
        r = np.asarray(r, dtype=float)
        zero = np.zeros_like(r)
        return zero, zero, zero + self.b

    def analytic_divergence(self, r, z=0.0):
        return np.zeros_like(np.asarray(r, dtype=float))

    def scaled(self, lam):
        return replace(self, b=lam * self.b)

    def to_dict(self):
        return {"kind": self.kind, "b": self.b, "c_light": self.c_light}


@dataclass(frozen=True)
class PoloidalTorus:
    """Poloidal field b/r (z - z0, ., -(r - r0)) around the magnetic axis (r0, z0).

    The optional toroidal part B_t r0 / r is carried along for orbit tracing;
    it does not enter the confinement integral.
    """

    b: float
    r0: float
    z0: float = 0.0
    toroidal: float = 0.0
    c_light: float = 1.0

    kind = "poloidal_torus"
    orientation = -1.0

    def vector_potential(self, r, z=0.0):
        return 0.5 * self.b * ((r - self.r0) ** 2 + (z - self.z0) ** 2)

    def linear_form_norms(self):
        # -(c m / q) r w2 = (m / q) w . (A0 (x - x0) + a0) with |A0| = c, |a0| = c r0
        return self.c_light, self.c_light * abs(self.r0)

    def strength(self, x3=None, half_length=None):
        return self.b

    def distance_from_center(self, r, z=0.0):
        return np.hypot(np.asarray(r) - self.r0, np.asarray(z) - self.z0)

    def center(self):
        return self.r0, self.z0

    def reduced_field(self, r, z=0.0):
        r = np.asarray(r, dtype=float)
        z = np.asarray(z, dtype=float)
        b1 = self.b * (z - self.z0) / r
        b2 = self.toroidal * self.r0 / r
        b3 = -self.b * (r - self.r0) / r
        return b1, b2, b3

    def analytic_divergence(self, r, z=0.0):
        # r B1 = b (z - z0) has no r dependence, r B3 = -b (r - r0) no z dependence
        return np.zeros(np.broadcast(np.asarray(r), np.asarray(z)).shape)

    def scaled(self, lam):
        return replace(self, b=lam * self.b)

    def to_dict(self):
        return {"kind": self.kind, "b": self.b, "center": [self.r0, self.z0],
                "toroidal": self.toroidal, "c_light": self.c_light}


@dataclass(frozen=True)
class MirrorProfile:
    """Mirror field (-a'(x3) x1/2, -a'(x3) x2/2, a(x3)) with a = a0 + a2 x3^2."""

    a0: float
    a2: float
    c_light: float = 1.0

    kind = "mirror_profile"
    orientation = 1.0

    def a(self, x3):
        return self.a0 + self.a2 * np.asarray(x3, dtype=float) ** 2

    def da(self, x3):
        return 2.0 * self.a2 * np.asarray(x3, dtype=float)

    def min_strength(self, half_length):
        if self.a2 >= 0:
            return self.a0
        return self.a0 + self.a2 * half_length ** 2

    def vector_potential(self, r, z=0.0):
        return 0.5 * self.a(z) * r ** 2

    def linear_form_norms(self):
        return self.c_light, 0.0

    def strength(self, x3=None, half_length=None):
        if x3 is not None:
            return float(self.a(x3))
        if half_length is None:
            raise ConfigurationError(
                "mirror field strength needs a height or the cylinder half length."
            )
        return self.min_strength(half_length)

    def distance_from_center(self, r, z=0.0):
        return np.abs(r)

    def center(self):
        return 0.0, 0.0

    def reduced_field(self, r, z=0.0):
        r = np.asarray(r, dtype=float)
        z = np.asarray(z, dtype=float)
        return -0.5 * self.da(z) * r, np.zeros_like(r * z), self.a(z) + 0.0 * r

    def analytic_divergence(self, r, z=0.0):
        r = np.asarray(r, dtype=float)
        # r^-1 d_r(r B_r) = -a', d_z B_z = a'
        radial = -self.da(z)
        axial = self.da(z)
        return radial + axial + 0.0 * r

    def scaled(self, lam):
        return replace(self, a0=lam * self.a0, a2=lam * self.a2)

    def to_dict(self):
        return {"kind": self.kind, "a0": self.a0, "a2": self.a2,
                "c_light": self.c_light}


COMPATIBLE_FIELDS = {
    RadialDisc.kind: AxialConstant.kind,
    ToroidalCrossSection.kind: PoloidalTorus.kind,
    MirrorCylinder.kind: MirrorProfile.kind,
}


def check_compatible(geometry, field_spec):
    """Raise ConfigurationError unless the field variant matches the geometry."""
    expected = COMPATIBLE_FIELDS.get(geometry.kind)
    actual = getattr(field_spec, "kind", None)
    if expected != actual:
        raise ConfigurationError(
            f"field '{actual}' does not match geometry '{geometry.kind}' "
            f"(expected '{expected}')."
        )


# Solver settings and problems -----------------------------------------------

@dataclass(frozen=True)
class QuadratureSpec:
    order: int = 8
    subdivisions: int = 8

    def __post_init__(self):
        errors = []
        if self.order < 4:
            errors.append("quadrature order must be at least 4.")
        if self.subdivisions < 2:
            errors.append("quadrature subdivisions must be at least 2.")
        if errors:
            raise ConfigurationError(errors)

    def refined(self):
        return replace(self, subdivisions=2 * self.subdivisions)

    def to_dict(self):
        return {"order": self.order, "subdivisions": self.subdivisions}


@dataclass(frozen=True)
class SolverSettings:
    nx: int = 64
    nz: int = 64
    tol: float = 1e-8
    max_iter: int = 500
    k_safety: float = 1.5
    quadrature: QuadratureSpec = dc_field(default_factory=QuadratureSpec)
    potential_unit: float = 1.0
    workers: int = 1
    direct_limit: int = 256 * 256
    krylov_maxiter: int = 5000

    def resolution(self, geometry):
        if geometry.spatial_dim == 1:
            return (self.nx,)
        return self.nx, self.nz

    def to_dict(self):
        return {
            "nx": self.nx,
            "nz": self.nz,
            "tol": self.tol,
            "max_iter": self.max_iter,
            "K_safety": self.k_safety,
            "quadrature": self.quadrature.to_dict(),
            "potential_unit": self.potential_unit,
        }


@dataclass(frozen=True)
class Problem:
    """Everything monotone_solve needs: domain, field, species, boundary data."""

    geometry: object
    field: object
    species: tuple
    solver: SolverSettings = dc_field(default_factory=SolverSettings)
    boundary: object = 0.0
    family: CutoffSpec = None

    def __post_init__(self):
        check_compatible(self.geometry, self.field)
        labels = [sp.label for sp in self.species]
        if len(set(labels)) != len(labels):
            raise ConfigurationError("species labels must be unique.")
        object.__setattr__(self, "species", tuple(self.species))

    def species_by_label(self, label):
        for sp in self.species:
            if sp.label == label:
                return sp
        raise ConfigurationError(f"unknown species '{label}'.")

    def with_species(self, species):
        return replace(self, species=tuple(species))

    def to_dict(self):
        return {
            "geometry": self.geometry.to_dict(),
            "field": self.field.to_dict(),
            "species": [sp.to_dict() for sp in self.species],
            "solver": self.solver.to_dict(),
            "family": self.family.to_dict() if self.family else None,
        }


# Results --------------------------------------------------------------------

@dataclass(frozen=True)
class ScalarField:
    """Node values on a structured grid (shape == grid.shape)."""

    grid: object
    values: np.ndarray

    def max_abs(self):
        mask = self.grid.domain_mask
        if not mask.any():
            return 0.0
        return float(np.max(np.abs(self.values[mask])))

    def scaled(self, factor):
        return ScalarField(self.grid, factor * self.values)


@dataclass(frozen=True)
class Barriers:
    c_low: float
    c_high: float

    def clamp(self, values):
        return np.clip(values, self.c_low, self.c_high)

    def to_dict(self):
        return {"c_low": self.c_low, "c_high": self.c_high}


@dataclass(frozen=True)
class SpeciesRadii:
    R0: float
    S0: float
    measured_support: float

    def to_dict(self):
        return {"R0": self.R0, "S0": self.S0,
                "measured_support": self.measured_support}


@dataclass(frozen=True)
class IterationRecord:
    step: int
    increment: float
    residual: float
    contraction: float

    def to_dict(self):
        return {"step": self.step, "increment": self.increment,
                "residual": self.residual, "contraction": self.contraction}


@dataclass(frozen=True)
class EquilibriumSolution:
    problem: Problem
    grid: object
    potential: ScalarField
    densities: dict
    charges: dict
    radii: dict
    barriers: Barriers
    shift: float
    direction: Direction
    history: tuple
    converged: bool

    @property
    def iterations(self):
        return len(self.history)

    @property
    def final_residual(self):
        return self.history[-1].residual if self.history else 0.0

    def to_dict(self):
        return {
            "converged": self.converged,
            "direction": self.direction.value,
            "iterations": self.iterations,
            "final_residual": self.final_residual,
            "K": self.shift,
            "barriers": self.barriers.to_dict(),
            "max_abs_potential": self.potential.max_abs(),
            "species": {
                label: {"Q": self.charges[label], **self.radii[label].to_dict()}
                for label in self.charges
            },
            "grid": self.grid.to_dict(),
        }


@dataclass(frozen=True)
class TraceResult:
    times: np.ndarray
    states: np.ndarray
    energy: np.ndarray
    integral: np.ndarray
    energy_drift: float
    integral_drift: float
    exit_event: str
    max_distance: float
    coordinates: tuple

    def to_dict(self):
        return {
            "samples": int(self.times.size),
            "t_final": float(self.times[-1]),
            "energy_drift": self.energy_drift,
            "integral_drift": self.integral_drift,
            "exit_event": self.exit_event,
            "max_distance": self.max_distance,
        }
