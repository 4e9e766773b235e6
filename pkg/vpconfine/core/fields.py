"""Reduced magnetic fields and their divergence checks."""

import logging

import numpy as np

from vpconfine.errors import DomainError
from vpconfine.models import check_compatible

logger = logging.getLogger(__name__)


def field_eval(geom, field, x):
    """Reduced field vector (B_r, B_phi, B_z) at a point of the closed domain."""
    check_compatible(geom, field)
    r, z = geom.reduce(x)
    if not geom.contains(r, z):
        raise DomainError(f"point {tuple(np.atleast_1d(x))} lies outside '{geom.kind}'.")
    if geom.kind == "toroidal" and r <= 0:
        raise DomainError("toroidal field is undefined on the axis.")
    components = field.reduced_field(r, z)
    return np.array([float(c) for c in components])


def _sample_box(geom, resolution):
    if geom.kind == "toroidal":
        r_lo, r_hi, z_lo, z_hi = geom.shape.bounds()
    elif geom.kind == "mirror":
        r_lo, r_hi, z_lo, z_hi = 0.0, geom.r0, -geom.l, geom.l
    else:
        r_lo, r_hi, z_lo, z_hi = 0.0, geom.r0, -geom.r0, geom.r0
    r = np.linspace(r_lo, r_hi, resolution)
    z = np.linspace(z_lo, z_hi, resolution)
    return r, z


def divergence_residual(field, r, z, *, three_d=False):
    """Centered-difference residual of the divergence condition on a tensor lattice.

    Toroidal cross-sections test d_r(r B1) + d_z(r B3) = 0; with three_d the
    axisymmetric divergence d_r B_r + B_r / r + d_z B_z is used instead.
    Only interior nodes with r > 0 are reported.
    """
    rr, zz = np.meshgrid(r, z, indexing="ij")
    with np.errstate(divide="ignore", invalid="ignore"):
        b_r, _, b_z = (np.asarray(c) + 0.0 * rr for c in field.reduced_field(rr, zz))
    h_r = r[1] - r[0]
    h_z = z[1] - z[0]
    inner_r = rr[1:-1, 1:-1]
    if three_d:
        d_r = (b_r[2:, 1:-1] - b_r[:-2, 1:-1]) / (2.0 * h_r)
        with np.errstate(divide="ignore", invalid="ignore"):
            hoop = b_r[1:-1, 1:-1] / inner_r
        d_z = (b_z[1:-1, 2:] - b_z[1:-1, :-2]) / (2.0 * h_z)
        residual = np.abs(d_r + hoop + d_z)
    else:
        flux_r = rr * b_r
        flux_z = rr * b_z
        d_r = (flux_r[2:, 1:-1] - flux_r[:-2, 1:-1]) / (2.0 * h_r)
        d_z = (flux_z[1:-1, 2:] - flux_z[1:-1, :-2]) / (2.0 * h_z)
        residual = np.abs(d_r + d_z)
    return residual[inner_r > 0]


def check_divergence_free(geom, field, resolution=64):
    """Max finite-difference divergence over grid nodes; ~0 for solenoidal fields."""
    r, z = _sample_box(geom, resolution)
    residual = divergence_residual(field, r, z, three_d=geom.kind != "toroidal")
    worst = float(residual.max()) if residual.size else 0.0
    if worst > 1e-12:
        logger.warning(f"field {getattr(field, 'kind', type(field).__name__)} "
                       f"is not divergence free (residual {worst:.3e})")
    return worst
