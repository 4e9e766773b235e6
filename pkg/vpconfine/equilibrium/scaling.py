"""Field-strength scaling: (lambda b, lambda^(2-m) psi(E/lambda^2, I/lambda)) gives lambda^2 phi."""

import logging
from dataclasses import dataclass, replace

import numpy as np

from vpconfine.equilibrium.monotone import monotone_solve
from vpconfine.errors import ConfigurationError, NumericalError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ScalingResult:
    problem: object
    predicted: object
    solution: object
    report: dict


def _scaled_cutoff(cutoff, lam, velocity_dim):
    return cutoff.scaled(amplitude=lam ** (2 - velocity_dim), energy=lam ** 2, integral=lam)


def _scaled_boundary(g, factor):
    if factor == 1.0 or g is None:
        return g
    if callable(g):
        return lambda *args: factor * g(*args)
    return factor * np.asarray(g, dtype=float) if np.ndim(g) else factor * float(g)


def scale_problem(problem, lam):
    """The problem whose solution is lambda^2 times the solution of ``problem``."""
    if not lam > 0:
        raise ConfigurationError(f"scaling factor must be positive, got {lam}.")
    m = problem.geometry.velocity_dim
    factor = lam ** 2
    species = [sp.with_cutoff(_scaled_cutoff(sp.cutoff, lam, m)) for sp in problem.species]
    family = _scaled_cutoff(problem.family, lam, m) if problem.family else None
    solver = replace(problem.solver, potential_unit=problem.solver.potential_unit * factor)
    return replace(
        problem,
        field=problem.field.scaled(lam),
        species=tuple(species),
        solver=solver,
        boundary=_scaled_boundary(problem.boundary, factor),
        family=family,
    )


def _relative(value, reference):
    return abs(value) / reference if reference > 0 else abs(value)


def scaling_report(base, scaled, lam):
    factor = lam ** 2
    domain = base.grid.domain_mask
    deviation = np.abs(scaled.potential.values - factor * base.potential.values)
    max_deviation = float(np.max(deviation[domain])) if domain.any() else 0.0
    charges = {}
    for label, charge in base.charges.items():
        ratio = scaled.charges[label] / charge if charge != 0 else None
        charges[label] = {
            "base": charge,
            "scaled": scaled.charges[label],
            "ratio": ratio,
            "ratio_error": abs(ratio - factor) if ratio is not None else None,
        }
    radii = {
        label: {
            "base": base.radii[label].S0,
            "scaled": scaled.radii[label].S0,
            "difference": abs(scaled.radii[label].S0 - base.radii[label].S0),
        }
        for label in base.radii
    }
    return {
        "lambda": lam,
        "expected_charge_ratio": factor,
        "charges": charges,
        "max_potential_deviation": max_deviation,
        "relative_potential_deviation": _relative(max_deviation, scaled.potential.max_abs()),
        "spatial_radius": radii,
        "iterations": {"base": base.iterations, "scaled": scaled.iterations},
    }


def scale_solution(base, lam):
    """Solve the scaled problem and compare it with lambda^2 times the base solution."""
    if not base.converged:
        raise NumericalError("scaling needs a converged base solution.", base.history)
    problem = scale_problem(base.problem, lam)
    predicted = base.potential.scaled(lam ** 2)
    solution = monotone_solve(problem, base.direction, grid=base.grid)
    report = scaling_report(base, solution, lam)
    logger.info(f"scaling lambda={lam}: relative potential deviation "
                f"{report['relative_potential_deviation']:.3e}")
    return ScalingResult(problem=problem, predicted=predicted, solution=solution, report=report)
