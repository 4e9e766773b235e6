"""RK4 integration of the characteristic system in each geometry with drift diagnostics."""

import logging
import math

import numpy as np

from vpconfine.characteristics.interpolation import interpolator_for
from vpconfine.core.integrals import angular_integral, energy_integral
from vpconfine.errors import ConfigurationError, DomainError
from vpconfine.models import TraceResult, check_compatible

logger = logging.getLogger(__name__)

COORDINATES = {
    "radial_disc": ("x1", "x2", "v1", "v2"),
    "toroidal": ("r", "z", "w1", "w2", "w3"),
    "mirror": ("x1", "x2", "x3", "v1", "v2", "v3"),
}


def rk4_step(rhs, X, dt):
    k1 = rhs(X)
    k2 = rhs(X + 0.5 * dt * k1)
    k3 = rhs(X + 0.5 * dt * k2)
    k4 = rhs(X + dt * k3)
    return X + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


class _DiscSystem:
    """Planar motion in x' = (x1, x2) under -grad phi(|x'|) and the axial field b."""

    def __init__(self, geom, field, sp, potential):
        self.geom, self.field, self.sp, self.potential = geom, field, sp, potential
        self.q_over_m = sp.charge / sp.mass
        self.gyro = sp.charge * field.b / (sp.mass * field.c_light)

    def initial_state(self, x0, v0):
        x0 = np.atleast_1d(np.asarray(x0, dtype=float))
        position = (x0[0], 0.0) if x0.size == 1 else (x0[0], x0[1])
        return np.array([*position, *np.asarray(v0, dtype=float)])

    def reduced(self, X):
        return math.hypot(X[0], X[1]), 0.0

    def __call__(self, X):
        r = math.hypot(X[0], X[1])
        _, (d_r, _) = self.potential(r, 0.0, clip=True)
        if r > 0:
            e1, e2 = -d_r * X[0] / r, -d_r * X[1] / r
        else:
            e1 = e2 = 0.0
        return np.array([
            X[2],
            X[3],
            self.q_over_m * e1 + self.gyro * X[3],
            self.q_over_m * e2 - self.gyro * X[2],
        ])

    def invariants(self, X):
        r, _ = self.reduced(X)
        u = self.potential.value(*self.potential.clip(r, 0.0))
        energy = energy_integral(self.sp, X[2:4], u)
        integral = angular_integral(self.geom, self.field, self.sp, X[0:2], X[2:4])
        return energy, integral


class _TorusSystem:
    """Reduced (r, z, w) system with the curvature terms of the toroidal angle."""

    def __init__(self, geom, field, sp, potential):
        self.geom, self.field, self.sp, self.potential = geom, field, sp, potential
        self.q_over_m = sp.charge / sp.mass
        self.lorentz = sp.charge / (field.c_light * sp.mass)

    def initial_state(self, x0, v0):
        return np.array([*np.asarray(x0, dtype=float), *np.asarray(v0, dtype=float)])

    def reduced(self, X):
        return X[0], X[1]

    def __call__(self, X):
        r, z, w1, w2, w3 = X
        _, (d_r, d_z) = self.potential(r, z, clip=True)
        b1, b2, b3 = (float(c) for c in self.field.reduced_field(r, z))
        return np.array([
            w1,
            w3,
            -self.q_over_m * d_r + self.lorentz * (w2 * b3 - w3 * b2) + w2 * w2 / r,
            self.lorentz * (w3 * b1 - w1 * b3) - w1 * w2 / r,
            -self.q_over_m * d_z + self.lorentz * (w1 * b2 - w2 * b1),
        ])

    def invariants(self, X):
        u = self.potential.value(*self.potential.clip(X[0], X[1]))
        energy = energy_integral(self.sp, X[2:5], u)
        integral = angular_integral(self.geom, self.field, self.sp, X[0:2], X[2:5])
        return energy, integral


class _MirrorSystem:
    """Cartesian motion in B = (-a'(x3) x1/2, -a'(x3) x2/2, a(x3))."""

    def __init__(self, geom, field, sp, potential):
        self.geom, self.field, self.sp, self.potential = geom, field, sp, potential
        self.q_over_m = sp.charge / sp.mass
        self.lorentz = sp.charge / (field.c_light * sp.mass)

    def initial_state(self, x0, v0):
        x0 = np.asarray(x0, dtype=float)
        position = (x0[0], 0.0, x0[1]) if x0.size == 2 else tuple(x0)
        return np.array([*position, *np.asarray(v0, dtype=float)])

    def reduced(self, X):
        return math.hypot(X[0], X[1]), X[2]

    def __call__(self, X):
        x1, x2, x3, v1, v2, v3 = X
        r = math.hypot(x1, x2)
        _, (d_r, d_z) = self.potential(r, x3, clip=True)
        if r > 0:
            e1, e2 = -d_r * x1 / r, -d_r * x2 / r
        else:
            e1 = e2 = 0.0
        slope = float(self.field.da(x3))
        b1, b2, b3 = -0.5 * slope * x1, -0.5 * slope * x2, float(self.field.a(x3))
        return np.array([
            v1,
            v2,
            v3,
            self.q_over_m * e1 + self.lorentz * (v2 * b3 - v3 * b2),
            self.q_over_m * e2 + self.lorentz * (v3 * b1 - v1 * b3),
            -self.q_over_m * d_z + self.lorentz * (v1 * b2 - v2 * b1),
        ])

    def invariants(self, X):
        r, z = self.reduced(X)
        u = self.potential.value(*self.potential.clip(r, z))
        energy = energy_integral(self.sp, X[3:6], u)
        integral = angular_integral(self.geom, self.field, self.sp, X[0:3], X[3:6])
        return energy, integral


SYSTEMS = {
    "radial_disc": _DiscSystem,
    "toroidal": _TorusSystem,
    "mirror": _MirrorSystem,
}


def _drift(values):
    reference = values[0]
    return float(np.max(np.abs(values - reference)) / (abs(reference) + 1.0))


def trace(geom, field, sp, potential, x0, v0, t_max, dt, *, record_every=1):
    """Integrate one characteristic from (x0, v0) until t_max or domain exit.

    ``potential`` is a solved ScalarField, an interpolator, or None for phi = 0.
    Positions are reduced (r, z) on the torus and Cartesian (or reduced) for
    the disc and mirror; see COORDINATES for the traced state layout.
    """
    check_compatible(geom, field)
    if not dt > 0:
        raise ConfigurationError(f"time step must be positive, got {dt}.")
    if not t_max > 0:
        raise ConfigurationError(f"t_max must be positive, got {t_max}.")
    system = SYSTEMS[geom.kind](geom, field, sp, interpolator_for(potential))
    X = system.initial_state(x0, v0)
    if X.size != len(COORDINATES[geom.kind]):
        raise ConfigurationError(
            f"'{geom.kind}' traces need state {COORDINATES[geom.kind]}, got {X.size} values."
        )
    r, z = system.reduced(X)
    if not geom.contains(r, z):
        raise DomainError(f"start point {tuple(np.atleast_1d(x0))} lies outside '{geom.kind}'.")

    n_steps = math.ceil(t_max / dt - 1e-9)
    times, states, energies, integrals = [0.0], [X], [], []
    energy, integral = system.invariants(X)
    energies.append(energy)
    integrals.append(integral)
    max_distance = float(field.distance_from_center(r, z))
    t = 0.0
    exit_event = "completed"
    for step in range(1, n_steps + 1):
        h = min(dt, t_max - t) if step == n_steps else dt
        following = rk4_step(system, X, h)
        r, z = system.reduced(following)
        if not geom.contains(r, z):
            exit_event = "left_domain"
            logger.debug(f"trace left the domain at t={t + h:.6g}")
            break
        X = following
        t = step * dt if step < n_steps else t_max
        max_distance = max(max_distance, float(field.distance_from_center(r, z)))
        if step % record_every == 0 or step == n_steps:
            energy, integral = system.invariants(X)
            times.append(t)
            states.append(X)
            energies.append(energy)
            integrals.append(integral)

    energies = np.array(energies)
    integrals = np.array(integrals)
    return TraceResult(
        times=np.array(times),
        states=np.array(states),
        energy=energies,
        integral=integrals,
        energy_drift=_drift(energies),
        integral_drift=_drift(integrals),
        exit_event=exit_event,
        max_distance=max_distance,
        coordinates=COORDINATES[geom.kind],
    )


def random_position(geom, rng):
    if geom.kind == "radial_disc":
        radius = geom.r0 * math.sqrt(rng.uniform())
        angle = rng.uniform(0.0, 2.0 * math.pi)
        return np.array([radius * math.cos(angle), radius * math.sin(angle)])
    if geom.kind == "mirror":
        radius = geom.r0 * math.sqrt(rng.uniform())
        angle = rng.uniform(0.0, 2.0 * math.pi)
        return np.array([radius * math.cos(angle), radius * math.sin(angle),
                         rng.uniform(-geom.l, geom.l)])
    r_lo, r_hi, z_lo, z_hi = geom.shape.bounds()
    while True:
        point = np.array([rng.uniform(r_lo, r_hi), rng.uniform(z_lo, z_hi)])
        if geom.contains(*point, tol=0.0):
            return point


def random_velocity(rng, dim, radius):
    direction = rng.normal(size=dim)
    direction /= np.linalg.norm(direction)
    return radius * rng.uniform() ** (1.0 / dim) * direction


def sample_confined_starts(geom, field, sp, R0, count, *, rng=None, max_draws=1_000_000):
    """Random (x0, v0) in trace coordinates with |v| < R0 and I(x0, v0) < I0."""
    rng = rng if rng is not None else np.random.default_rng(0)
    starts = []
    for _ in range(max_draws):
        if len(starts) == count:
            return starts
        x = random_position(geom, rng)
        v = random_velocity(rng, geom.velocity_dim, R0)
        if angular_integral(geom, field, sp, x, v) < sp.cutoff.I0:
            starts.append((x, v))
    raise ConfigurationError(
        f"only {len(starts)} of {count} confined starts found in {max_draws} draws."
    )
