"""Charge densities rho_hat(x, u) by velocity quadrature, support radii and charges."""

import logging
import math

import numpy as np

from vpconfine.core.cutoff import cutoff_value
from vpconfine.core.integrals import coupling, integral_from_parts
from vpconfine.density.quadrature import rule_for
from vpconfine.errors import ConfigurationError, DomainError
from vpconfine.extensions import worker_pool
from vpconfine.models import ScalarField, check_compatible

logger = logging.getLogger(__name__)

# psi evaluations per vectorised chunk
CHUNK_ELEMENTS = 1 << 20


def velocity_radius(sp, u):
    """R(u) = sqrt(2 (E0 - q u)_+ / m); 0 when the ball is empty."""
    arg = 2.0 * (sp.cutoff.E0 - sp.charge * np.asarray(u, dtype=float)) / sp.mass
    radius = np.sqrt(np.maximum(arg, 0.0))
    return float(radius) if radius.ndim == 0 else radius


def global_velocity_radius(sp_plus, sp_minus):
    """Velocity radii R0 of a two-species system with q+ > 0 > q-, keyed by label."""
    if not (sp_plus.charge > 0 > sp_minus.charge):
        raise ConfigurationError(
            "global velocity radii need one positive and one negative species."
        )
    ratio_plus = sp_plus.charge / sp_minus.charge
    ratio_minus = sp_minus.charge / sp_plus.charge
    arg_plus = sp_plus.cutoff.E0 - ratio_plus * sp_minus.cutoff.E0
    arg_minus = sp_minus.cutoff.E0 - ratio_minus * sp_plus.cutoff.E0
    return {
        sp_plus.label: math.sqrt(2.0 * max(arg_plus, 0.0) / sp_plus.mass),
        sp_minus.label: math.sqrt(2.0 * max(arg_minus, 0.0) / sp_minus.mass),
    }


def barrier_velocity_radius(sp, barriers):
    """R(u) at the barrier that maximises it: c_low for q > 0, c_high for q < 0."""
    u = barriers.c_low if sp.charge > 0 else barriers.c_high
    return velocity_radius(sp, u)


def spatial_radius(sp, field, R0, *, x3=None, geometry=None):
    """S0 = rho_L + sqrt(rho_L^2 + 2 (R0 |a0| m + |q| I0) / (b |q|)).

    For the mirror field b is a(x3); without a height the smallest a on the
    cylinder is used, which bounds the support at every height.
    """
    half_length = getattr(geometry, "l", None)
    b = field.strength(x3=x3, half_length=half_length)
    if not b > 0:
        raise ConfigurationError(f"field strength must be positive (got {b}).")
    norm_A0, norm_a0 = field.linear_form_norms()
    q = abs(sp.charge)
    m = sp.mass
    larmor = R0 * norm_A0 * m / (b * q)
    inner = larmor ** 2 + 2.0 * (R0 * norm_a0 * m + q * sp.cutoff.I0) / (b * q)
    return larmor + math.sqrt(max(inner, 0.0))


def phase_density(field, sp, potential, radius, u, speed2, v_distinguished):
    """psi(E, I) from |v|^2, the distinguished velocity component and u.

    The one integrand behind rho_hat, its per-node values and pointwise f.
    """
    energy = 0.5 * sp.mass * speed2 + sp.charge * u
    integral = integral_from_parts(field, sp, potential, radius, v_distinguished)
    return cutoff_value(sp.cutoff, energy, integral)


def _chunks(indices, per_item):
    step = max(1, CHUNK_ELEMENTS // per_item)
    for start in range(0, indices.size, step):
        yield indices[start:start + step]


def rho_hat_batch(field, sp, potential, radius, u, rule):
    """rho_hat at many points described by A(x), the axis distance r and u.

    Points whose smallest possible I over the velocity ball already reaches I0
    are skipped; every quadrature term there is exactly zero.
    """
    potential = np.asarray(potential, dtype=float).ravel()
    radius = np.asarray(radius, dtype=float).ravel()
    u = np.broadcast_to(np.asarray(u, dtype=float), potential.shape).ravel()
    out = np.zeros(potential.shape)
    cutoff = sp.cutoff
    if cutoff.amplitude == 0.0:
        return out
    R = np.atleast_1d(velocity_radius(sp, u))
    kappa = coupling(field, sp)
    live = (R > 0) & (potential - abs(kappa) * radius * R < cutoff.I0)
    index = np.flatnonzero(live)
    if index.size == 0:
        return out
    for chunk in _chunks(index, rule.size):
        Rc = R[chunk][:, None, None]
        psi = phase_density(
            field, sp,
            potential[chunk][:, None, None],
            radius[chunk][:, None, None],
            u[chunk][:, None, None],
            Rc ** 2 * rule.speed2[None],
            Rc * rule.distinguished[None, :, None],
        )
        sums = np.einsum("kij,ij->k", psi, rule.weights)
        out[chunk] = R[chunk] ** rule.velocity_dim * sums
    return out


def _reduced_point(geom, field, x):
    check_compatible(geom, field)
    r, z = geom.reduce(x)
    if not geom.contains(r, z):
        raise DomainError(f"point {tuple(np.atleast_1d(x))} lies outside '{geom.kind}'.")
    return r, z


def rho_hat(geom, field, sp, x, u, quad):
    """Velocity integral of psi(E(v, u), I(x, v)) over the ball |v| < R(u)."""
    r, z = _reduced_point(geom, field, x)
    rule = rule_for(quad, geom.velocity_dim)
    value = rho_hat_batch(field, sp, field.vector_potential(r, z), r, u, rule)
    return float(value[0])


def node_velocities(geom, sp, u, quad):
    """Full velocity vectors at the quadrature nodes used by rho_hat at u.

    Returns an array (n_distinguished, n_other, velocity_dim); the
    distinguished component sits at index 1.
    """
    rule = rule_for(quad, geom.velocity_dim)
    R = velocity_radius(sp, u)
    v_d = R * np.broadcast_to(rule.distinguished[:, None], rule.weights.shape)
    v_o = R * np.broadcast_to(rule.other[None, :], rule.weights.shape)
    if geom.velocity_dim == 2:
        return np.stack([v_o, v_d], axis=-1)
    return np.stack([v_o, v_d, np.zeros_like(v_d)], axis=-1)


def node_integrand(geom, field, sp, x, u, quad):
    """psi at every rho_hat quadrature node for the point x."""
    r, z = _reduced_point(geom, field, x)
    rule = rule_for(quad, geom.velocity_dim)
    R = velocity_radius(sp, u)
    psi = phase_density(field, sp, field.vector_potential(r, z), r, u,
                        R ** 2 * rule.speed2, R * rule.distinguished[:, None])
    return np.broadcast_to(psi, rule.weights.shape).copy()


def density_field(problem, grid, u, *, species=None, workers=None):
    """Per-species node densities rho(x) = rho_hat(x, u(x)) over the closed domain."""
    geom, field = problem.geometry, problem.field
    rule = rule_for(problem.solver.quadrature, geom.velocity_dim)
    mask = grid.domain_mask
    r = grid.r_nodes[mask]
    z = grid.z_nodes[mask]
    potential = field.vector_potential(r, z)
    u_values = np.broadcast_to(np.asarray(u, dtype=float), grid.shape)[mask]
    workers = problem.solver.workers if workers is None else workers
    densities = {}
    with worker_pool(workers) as pool:
        for sp in species or problem.species:
            values = np.zeros(grid.shape)
            if pool is None:
                values[mask] = rho_hat_batch(field, sp, potential, r, u_values, rule)
            else:
                parts = np.array_split(np.arange(r.size), workers)
                futures = [
                    pool.submit(rho_hat_batch, field, sp, potential[p], r[p],
                                u_values[p], rule)
                    for p in parts
                ]
                values[mask] = np.concatenate([f.result() for f in futures])
            densities[sp.label] = values
    return densities


def sample_points(geom, points_per_axis=9):
    """Lattice of reduced points (r, z) inside the closed domain."""
    if geom.kind == "radial_disc":
        r = np.linspace(0.0, geom.r0, points_per_axis)
        return r, np.zeros_like(r)
    if geom.kind == "mirror":
        r_axis = np.linspace(0.0, geom.r0, points_per_axis)
        z_axis = np.linspace(-geom.l, geom.l, points_per_axis)
    else:
        r_lo, r_hi, z_lo, z_hi = geom.shape.bounds()
        r_axis = np.linspace(r_lo, r_hi, points_per_axis)
        z_axis = np.linspace(z_lo, z_hi, points_per_axis)
    rr, zz = np.meshgrid(r_axis, z_axis, indexing="ij")
    rr, zz = rr.ravel(), zz.ravel()
    inside = np.array([geom.contains(a, b) for a, b in zip(rr, zz)], dtype=bool)
    return rr[inside], zz[inside]


def derivative_samples(geom, field, species, u_range, quad, *,
                       points_per_axis=9, levels=9):
    """Centered differences of sum 4 pi q rho_hat in u on a sample lattice.

    Returns an array (levels, n_points). The difference step is a fixed
    fraction of the interval width so the lattice scales with the barriers.
    """
    u_low, u_high = float(u_range[0]), float(u_range[1])
    span = u_high - u_low
    r, z = sample_points(geom, points_per_axis)
    if span <= 0 or not species:
        return np.zeros((levels, r.size))
    rule = rule_for(quad, geom.velocity_dim)
    potential = field.vector_potential(r, z)
    step = 1e-3 * span
    u_levels = u_low + span * np.linspace(0.0, 1.0, levels)
    samples = np.zeros((levels, r.size))
    for k, u_level in enumerate(u_levels):
        for sp in species:
            upper = rho_hat_batch(field, sp, potential, r, u_level + step, rule)
            lower = rho_hat_batch(field, sp, potential, r, u_level - step, rule)
            samples[k] += 4.0 * np.pi * sp.charge * (upper - lower) / (2.0 * step)
    return samples


def rho_hat_derivative_bound(geom, field, species, u_range, quad, *, safety=1.5,
                             points_per_axis=9, levels=9):
    """Shift K >= safety * max |d_u sum 4 pi q rho_hat| over the sample lattice."""
    samples = derivative_samples(
        geom, field, species, u_range, quad,
        points_per_axis=points_per_axis, levels=levels,
    )
    if samples.size == 0:
        return 0.0
    bound = safety * float(np.max(np.abs(samples)))
    logger.debug(f"derivative bound K={bound:.6e} over {samples.size} samples")
    return bound


def total_charge(density, grid, sp):
    """Q = q * sum of trapezoid weights * 2 pi r * rho, summed in a fixed order."""
    values = density.values if isinstance(density, ScalarField) else np.asarray(density)
    weighted = grid.charge_weights * values
    return sp.charge * math.fsum(weighted.ravel().tolist())


def measured_support(density, grid, field):
    """Largest distance from the field centre of a node with positive density."""
    values = density.values if isinstance(density, ScalarField) else np.asarray(density)
    occupied = (values > 0) & grid.domain_mask
    if not occupied.any():
        return 0.0
    distance = field.distance_from_center(grid.r_nodes[occupied], grid.z_nodes[occupied])
    return float(np.max(distance))
