"""Monotone iteration between the constant barriers for -L phi = 4 pi sum q rho_hat(x, phi)."""

import logging
import math

import numpy as np

from vpconfine.density.rho import (
    barrier_velocity_radius,
    density_field,
    measured_support,
    rho_hat_derivative_bound,
    spatial_radius,
    total_charge,
)
from vpconfine.elliptic.grid import build_grid
from vpconfine.elliptic.operator import assemble_operator, dirichlet_node_values
from vpconfine.elliptic.solver import solve_linear
from vpconfine.equilibrium.barriers import constant_barriers
from vpconfine.errors import ConsistencyError, NumericalError
from vpconfine.extensions import worker_pool
from vpconfine.models import (
    Direction,
    EquilibriumSolution,
    IterationRecord,
    ScalarField,
    SpeciesRadii,
)

logger = logging.getLogger(__name__)

# monotonicity violations up to this many tolerances count as round-off
MONOTONE_SLACK = 10.0
MAX_CONTRACTION = 0.99


def grid_for(problem):
    return build_grid(problem.geometry, problem.solver.resolution(problem.geometry))


def charge_source(problem, grid, phi, barriers):
    """4 pi sum q rho_hat(x, clamp(phi)) and the per-species densities."""
    u = barriers.clamp(phi)
    densities = density_field(problem, grid, u)
    source = np.zeros(grid.shape)
    for sp in problem.species:
        source += 4.0 * np.pi * sp.charge * densities[sp.label]
    return source, densities


def _max_over(values, mask):
    return float(np.max(np.abs(values[mask]))) if mask.any() else 0.0


def _operator(problem, grid, shift):
    settings = problem.solver
    return assemble_operator(grid, shift, direct_limit=settings.direct_limit,
                             krylov_maxiter=settings.krylov_maxiter)


def _finish(problem, grid, phi, densities, barriers, shift, direction, history, converged):
    geom, field = problem.geometry, problem.field
    charges, radii, fields = {}, {}, {}
    for sp in problem.species:
        rho = ScalarField(grid, densities[sp.label])
        R0 = barrier_velocity_radius(sp, barriers)
        S0 = spatial_radius(sp, field, R0, geometry=geom)
        fields[sp.label] = rho
        charges[sp.label] = total_charge(rho, grid, sp)
        radii[sp.label] = SpeciesRadii(R0=R0, S0=S0,
                                       measured_support=measured_support(rho, grid, field))
    return EquilibriumSolution(
        problem=problem,
        grid=grid,
        potential=ScalarField(grid, phi),
        densities=fields,
        charges=charges,
        radii=radii,
        barriers=barriers,
        shift=shift,
        direction=direction,
        history=tuple(history),
        converged=converged,
    )


def _trivial_solve(problem, grid, barriers, direction):
    op = _operator(problem, grid, 0.0)
    phi = solve_linear(op, np.zeros(grid.shape), problem.boundary).values
    residual = _max_over(op.apply(phi, problem.boundary), grid.unknown_mask)
    densities = {sp.label: np.zeros(grid.shape) for sp in problem.species}
    history = [IterationRecord(step=1, increment=0.0, residual=residual, contraction=0.0)]
    logger.info("all cutoff amplitudes vanish; solved the linear problem once")
    return _finish(problem, grid, phi, densities, barriers, 0.0, direction, history, True)


def monotone_solve(problem, direction=Direction.MAXIMAL, *, grid=None):
    """Shifted monotone iteration from c_high (maximal) or c_low (minimal).

    Each step solves (-L + K) phi_next = 4 pi sum q rho_hat(., clamp(phi)) + K phi
    with K bounding the u-derivative of the source. Stops once the increment
    is below tol * U * (1 - observed contraction) and the equation residual
    is below tol * (U + max |source|), U being the potential unit.
    """
    direction = Direction(direction)
    grid = grid or grid_for(problem)
    settings = problem.solver
    barriers = constant_barriers(problem, grid)
    g = problem.boundary

    if all(sp.cutoff.amplitude == 0.0 for sp in problem.species):
        return _trivial_solve(problem, grid, barriers, direction)

    shift = rho_hat_derivative_bound(
        problem.geometry, problem.field, problem.species,
        (barriers.c_low, barriers.c_high), settings.quadrature, safety=settings.k_safety,
    )
    op = _operator(problem, grid, shift)
    op_plain = _operator(problem, grid, 0.0) if shift > 0 else op

    unit = settings.potential_unit
    tol = settings.tol
    domain = grid.domain_mask
    unknown = grid.unknown_mask
    sign = 1.0 if direction is Direction.MAXIMAL else -1.0

    phi = dirichlet_node_values(grid, g)
    phi[unknown] = barriers.c_high if direction is Direction.MAXIMAL else barriers.c_low
    source, densities = charge_source(problem, grid, phi, barriers)
    logger.info(f"monotone solve ({direction.value}) on {grid.shape} grid, "
                f"barriers [{barriers.c_low:.6g}, {barriers.c_high:.6g}], K={shift:.6g}")

    history = []
    previous = None
    for step in range(1, settings.max_iter + 1):
        following = solve_linear(op, source + shift * phi, g).values
        change = following - phi
        increment = _max_over(change, domain)
        violation = float(np.max(sign * change[domain])) if domain.any() else 0.0
        if violation > MONOTONE_SLACK * tol * unit:
            logger.error(f"step {step}: iterate moved {violation:.3e} against the "
                         f"{direction.value} direction")
            raise ConsistencyError(
                f"monotone iteration violated by {violation:.3e} at step {step}",
                history,
            )

        phi = following
        source, densities = charge_source(problem, grid, phi, barriers)
        residual = _max_over(op_plain.apply(phi, g) - source, unknown)
        if previous is None or previous == 0.0:
            contraction = 0.0
        else:
            contraction = min(increment / previous, MAX_CONTRACTION)
        history.append(IterationRecord(step, increment, residual, contraction))
        logger.debug(f"step {step}: increment={increment:.3e} residual={residual:.3e} "
                     f"contraction={contraction:.3f}")

        source_scale = _max_over(source, domain)
        if (increment <= tol * unit * (1.0 - contraction)
                and residual <= tol * (unit + source_scale)):
            logger.info(f"converged after {step} steps (residual {residual:.3e})")
            return _finish(problem, grid, phi, densities, barriers, shift, direction,
                           history, True)
        previous = increment

    logger.error(f"no convergence within {settings.max_iter} steps")
    raise NumericalError(
        f"monotone iteration did not converge in {settings.max_iter} steps "
        f"(last increment {history[-1].increment:.3e})",
        history,
    )


def maximal_minimal_gap(problem, *, grid=None, workers=None):
    """Solve from both barriers and return (max |phi_max - phi_min|, maximal, minimal)."""
    grid = grid or grid_for(problem)
    workers = problem.solver.workers if workers is None else workers
    with worker_pool(min(workers, 2)) as pool:
        if pool is None:
            maximal = monotone_solve(problem, Direction.MAXIMAL, grid=grid)
            minimal = monotone_solve(problem, Direction.MINIMAL, grid=grid)
        else:
            futures = [pool.submit(monotone_solve, problem, d, grid=grid)
                       for d in (Direction.MAXIMAL, Direction.MINIMAL)]
            maximal, minimal = (f.result() for f in futures)
    difference = maximal.potential.values - minimal.potential.values
    gap = _max_over(difference, grid.domain_mask)
    if not math.isfinite(gap):
        raise NumericalError("maximal and minimal potentials are not finite")
    return gap, maximal, minimal
