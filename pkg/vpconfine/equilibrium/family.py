"""Charge-ratio family psi_lambda^+ / psi_lambda^- built from one base cutoff."""

import logging

import numpy as np

from vpconfine.equilibrium.monotone import grid_for, monotone_solve
from vpconfine.errors import ConfigurationError
from vpconfine.extensions import worker_pool
from vpconfine.models import Direction
from vpconfine.utils.validators import validate_family

logger = logging.getLogger(__name__)


def charged_pair(problem):
    """(positive, negative) species of a family problem."""
    errors = validate_family(problem.species, problem.family)
    if errors:
        raise ConfigurationError(errors)
    plus = next(sp for sp in problem.species if sp.charge > 0)
    minus = next(sp for sp in problem.species if sp.charge < 0)
    return plus, minus


def family_cutoff(base, sp, weight, velocity_dim):
    """weight * m^m / |q|^(m+1) * psi(m E / q^2, I)."""
    amplitude = weight * sp.mass ** velocity_dim / abs(sp.charge) ** (velocity_dim + 1)
    return base.scaled(amplitude=amplitude, energy=sp.charge ** 2 / sp.mass, integral=1.0)


def family_problem(problem, lam):
    """The problem with species cutoffs replaced by the family members at lambda."""
    if not 0.0 <= lam <= 1.0:
        raise ConfigurationError(f"family parameter lambda must lie in [0, 1], got {lam}.")
    plus, minus = charged_pair(problem)
    m = problem.geometry.velocity_dim
    members = {
        plus.label: family_cutoff(problem.family, plus, lam, m),
        minus.label: family_cutoff(problem.family, minus, 1.0 - lam, m),
    }
    return problem.with_species(sp.with_cutoff(members[sp.label]) for sp in problem.species)


def family_solve(problem, lam, *, grid=None, direction=Direction.MAXIMAL):
    return monotone_solve(family_problem(problem, lam), direction, grid=grid)


def _row(lam, solution, plus, minus):
    return {
        "lambda": float(lam),
        "Q_plus": solution.charges[plus.label],
        "Q_minus": solution.charges[minus.label],
        "max_abs_phi": solution.potential.max_abs(),
    }


def sweep_lambda(problem, lambdas, *, grid=None, workers=None):
    """family_solve at each lambda; rows of (lambda, Q+, Q-, max |phi|)."""
    lambdas = [float(lam) for lam in lambdas]
    errors = []
    if not lambdas:
        errors.append("sweep needs at least one lambda value.")
    if any(not 0.0 <= lam <= 1.0 for lam in lambdas):
        errors.append("sweep lambda values must lie in [0, 1].")
    if any(b <= a for a, b in zip(lambdas, lambdas[1:])):
        errors.append("sweep lambda values must be strictly increasing.")
    if errors:
        raise ConfigurationError(errors)
    plus, minus = charged_pair(problem)
    grid = grid or grid_for(problem)
    workers = problem.solver.workers if workers is None else workers
    with worker_pool(workers) as pool:
        if pool is None:
            solutions = [family_solve(problem, lam, grid=grid) for lam in lambdas]
        else:
            futures = [pool.submit(family_solve, problem, lam, grid=grid) for lam in lambdas]
            solutions = [f.result() for f in futures]
    rows = [_row(lam, s, plus, minus) for lam, s in zip(lambdas, solutions)]
    logger.info(f"lambda sweep over {len(rows)} values finished")
    return rows


def max_charge_jump(rows):
    """Largest change of Q+ or Q- between consecutive sweep rows."""
    if len(rows) < 2:
        return 0.0
    plus = np.array([row["Q_plus"] for row in rows])
    minus = np.array([row["Q_minus"] for row in rows])
    return float(max(np.max(np.abs(np.diff(plus))), np.max(np.abs(np.diff(minus)))))
