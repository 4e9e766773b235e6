"""Manufactured-solution convergence study for the reduced operator of each geometry."""

import logging
from dataclasses import dataclass
from math import log, pi

import numpy as np

from vpconfine.elliptic.grid import build_grid
from vpconfine.elliptic.operator import assemble_operator
from vpconfine.elliptic.solver import solve_linear
from vpconfine.errors import ConfigurationError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Manufactured:
    """Exact solution, its image under -L and the Dirichlet data."""

    name: str
    exact: object
    source: object
    boundary: object


def _radial(geom):
    k = pi / (2.0 * geom.r0)

    def exact(r, z=0.0):
        return np.cos(k * r)

    def source(r, z=0.0):
        r = np.asarray(r, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            hoop = np.where(r > 0, k * np.sin(k * r) / np.where(r > 0, r, 1.0), k * k)
        return k * k * np.cos(k * r) + hoop

    return Manufactured("cos(k r)", exact, source, 0.0)


def _rect(geom):
    r_lo, r_hi, z_lo, z_hi = geom.shape.bounds()
    k_r = pi / (r_hi - r_lo)
    k_z = pi / (z_hi - z_lo)

    def exact(r, z):
        return np.sin(k_r * (r - r_lo)) * np.sin(k_z * (z - z_lo))

    def source(r, z):
        radial = k_r * np.cos(k_r * (r - r_lo)) * np.sin(k_z * (z - z_lo)) / r
        return (k_r ** 2 + k_z ** 2) * exact(r, z) - radial

    return Manufactured("sin sin", exact, source, 0.0)


def _disc_section(geom):
    def exact(r, z):
        return np.sin(r) * np.cos(z)

    def source(r, z):
        return 2.0 * np.sin(r) * np.cos(z) - np.cos(r) * np.cos(z) / r

    return Manufactured("sin(r) cos(z)", exact, source, exact)


def _mirror(geom):
    k_r = pi / (2.0 * geom.r0)
    k_z = pi / (2.0 * geom.l)

    def exact(r, z):
        return np.cos(k_r * r) * np.cos(k_z * z)

    def source(r, z):
        r = np.asarray(r, dtype=float)
        safe = np.where(r > 0, r, 1.0)
        hoop = np.where(r > 0, k_r * np.sin(k_r * r) / safe, k_r * k_r)
        return (k_r ** 2 + k_z ** 2) * exact(r, z) + hoop * np.cos(k_z * z)

    return Manufactured("cos cos", exact, source, 0.0)


def manufactured_solution(geom):
    if geom.kind == "radial_disc":
        return _radial(geom)
    if geom.kind == "mirror":
        return _mirror(geom)
    if geom.kind == "toroidal":
        return _disc_section(geom) if geom.shape.kind == "disc" else _rect(geom)
    raise ConfigurationError(f"no manufactured solution for '{geom.kind}'.")


def mms_error(geom, resolution, solution=None):
    """Discrete L2 error of the manufactured problem and the grid spacing."""
    solution = solution or manufactured_solution(geom)
    grid = build_grid(geom, resolution)
    op = assemble_operator(grid, 0.0)
    mask = grid.unknown_mask
    rhs = np.zeros(grid.shape)
    rhs[mask] = solution.source(grid.r_nodes[mask], grid.z_nodes[mask])
    phi = solve_linear(op, rhs, solution.boundary)
    error = phi.values[mask] - solution.exact(grid.r_nodes[mask], grid.z_nodes[mask])
    cell = grid.h if grid.h_z is None else grid.h * grid.h_z
    return float(np.sqrt(cell * np.sum(error ** 2))), grid.spacing


def compute_rates(h_list, err_list):
    """rate_k = log(e_{k-1}/e_k) / log(h_{k-1}/h_k)."""
    rates = [None]
    for k in range(1, len(h_list)):
        if err_list[k] > 0 and err_list[k - 1] > 0:
            rates.append(log(err_list[k - 1] / err_list[k]) / log(h_list[k - 1] / h_list[k]))
        else:
            rates.append(None)
    return rates


def mms_convergence(geom, resolutions):
    """Observed order (least-squares slope of log error vs log h) for the geometry."""
    if len(resolutions) < 3:
        raise ConfigurationError("mms_convergence needs at least three resolutions.")
    solution = manufactured_solution(geom)
    errors, spacings = [], []
    for n in resolutions:
        error, h = mms_error(geom, n, solution)
        errors.append(error)
        spacings.append(h)
        logger.debug(f"mms {geom.kind} n={n} h={h:.4e} error={error:.4e}")
    order = float(np.polyfit(np.log(spacings), np.log(errors), 1)[0])
    logger.info(f"mms {geom.kind}: observed order {order:.3f}")
    return {
        "geometry": geom.kind,
        "solution": solution.name,
        "resolutions": list(resolutions),
        "h": spacings,
        "errors": errors,
        "rates": compute_rates(spacings, errors),
        "order": order,
    }
