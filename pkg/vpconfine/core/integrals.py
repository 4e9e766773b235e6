"""Closed-form first integrals: the energy E and the rotation-induced integral I."""

import numpy as np

from vpconfine.errors import ConfigurationError
from vpconfine.models import check_compatible


def energy_integral(sp, v, u):
    """E = m |v|^2 / 2 + q u; v may carry leading batch axes."""
    v = np.asarray(v, dtype=float)
    energy = 0.5 * sp.mass * np.sum(v * v, axis=-1) + sp.charge * np.asarray(u)
    return float(energy) if np.ndim(energy) == 0 else energy


def coupling(field, sp):
    """Coefficient kappa with I = A(x) + kappa r v_d (v_d the distinguished component)."""
    return field.orientation * field.c_light * sp.mass / sp.charge


def integral_from_parts(field, sp, potential, radius, v_distinguished):
    """I from the vector-potential scalar, the axis distance and v_d.

    Shared by the density quadrature and by pointwise evaluation of f.
    """
    return potential + coupling(field, sp) * radius * v_distinguished


def angular_integral(geom, field, sp, x, v):
    """Second first integral I of the geometry at position x with velocity v.

    Reduced positions are (r,) for the disc, (r, z) for torus and mirror; the
    distinguished velocity component is v[1] (tangential / toroidal / azimuthal).
    Cartesian positions (x1, x2) for the disc and (x1, x2, x3) for the mirror
    are accepted as well.
    """
    check_compatible(geom, field)
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
        height = x[2] if x.size == 3 else 0.0
        planar = x[0] ** 2 + x[1] ** 2
        potential = 0.5 * field.strength(x3=height) * planar
        angular = x[0] * v[1] - x[1] * v[0]
        return float(potential + coupling(field, sp) * angular)
    r, z = geom.reduce(x)
    potential = field.vector_potential(r, z)
    return float(integral_from_parts(field, sp, potential, r, v[1]))
