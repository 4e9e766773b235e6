"""Pointwise phase-space densities f = psi(E(v, phi(x)), I(x, v)) of a solved equilibrium."""

import numpy as np

from vpconfine.characteristics.interpolation import PotentialInterpolator
from vpconfine.density.rho import phase_density
from vpconfine.errors import ConfigurationError, DomainError


def _species(solution, sp):
    if isinstance(sp, str):
        return solution.problem.species_by_label(sp)
    return sp


def velocity_parts(geom, x, v, r):
    """(|v|^2, distinguished component) of v at the position x.

    Cartesian disc and mirror positions give the tangential component
    (x1 v2 - x2 v1) / r, which is zero on the axis.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    v = np.atleast_1d(np.asarray(v, dtype=float))
    if v.size != geom.velocity_dim:
        raise ConfigurationError(
            f"velocity must have {geom.velocity_dim} components for '{geom.kind}'."
        )
    cartesian = (geom.kind == "radial_disc" and x.size == 2) or (
        geom.kind == "mirror" and x.size == 3
    )
    if cartesian:
        tangential = (x[0] * v[1] - x[1] * v[0]) / r if r > 0 else 0.0
    else:
        tangential = v[1]
    return float(np.dot(v, v)), float(tangential)


def eval_f(solution, sp, x, v, *, interpolator=None):
    """f of one species at (x, v), with phi(x) interpolated from the solved grid."""
    sp = _species(solution, sp)
    geom, field = solution.problem.geometry, solution.problem.field
    r, z = geom.reduce(x)
    if not geom.contains(r, z):
        raise DomainError(f"point {tuple(np.atleast_1d(x))} lies outside '{geom.kind}'.")
    interpolator = interpolator or PotentialInterpolator(solution.potential,
                                                          solution.problem.boundary)
    u = interpolator.value(*interpolator.clip(r, z))
    speed2, tangential = velocity_parts(geom, x, v, r)
    return float(phase_density(field, sp, field.vector_potential(r, z), r, u,
                               speed2, tangential))
