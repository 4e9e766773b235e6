"""Linear solves with the shifted operator: sparse LU, or BiCGStab above the size limit."""

import logging

import numpy as np
import scipy.sparse.linalg as spla

from vpconfine.elliptic.operator import dirichlet_node_values
from vpconfine.errors import ConfigurationError, NumericalError
from vpconfine.models import ScalarField

logger = logging.getLogger(__name__)

RESIDUAL_FACTOR = 1e-10


def _max_norm(values):
    return float(np.max(np.abs(values))) if values.size else 0.0


def _direct(op, b, limit):
    lu = op.factorization()
    x = lu.solve(b)
    residual = b - op.matrix @ x
    if _max_norm(residual) > limit:
        # one step of iterative refinement
        x = x + lu.solve(residual)
        residual = b - op.matrix @ x
    return x, residual


def _krylov(op, b, limit):
    A = op.matrix.tocsc()
    try:
        ilu = spla.spilu(A, drop_tol=1e-5, fill_factor=20)
        M = spla.LinearOperator(A.shape, ilu.solve)
    except RuntimeError as exc:
        logger.warning(f"incomplete LU failed ({exc}); running BiCGStab unpreconditioned")
        M = None
    x, info = spla.bicgstab(A, b, rtol=0.0, atol=limit, maxiter=op.krylov_maxiter, M=M)
    residual = b - A @ x
    if info != 0 and _max_norm(residual) > limit:
        raise NumericalError(
            f"BiCGStab stopped with info={info}, residual {_max_norm(residual):.3e} "
            f"above {limit:.3e}",
            history=[_max_norm(residual)],
        )
    return x, residual


def solve_linear(op, rhs, g=0.0):
    """Solve (-L + K) phi = rhs at the unknown nodes with phi = g on the boundary.

    ``rhs`` is a ScalarField or node array on the operator's grid; ``g`` a
    scalar, a callable of (r, z) (of r in 1-D) or node values.
    """
    grid = op.grid
    values = rhs.values if isinstance(rhs, ScalarField) else np.asarray(rhs, dtype=float)
    if values.shape != grid.shape:
        raise ConfigurationError(f"rhs has shape {values.shape}, grid has {grid.shape}.")
    if not np.all(np.isfinite(values[grid.unknown_mask])):
        raise NumericalError("right-hand side is not finite at unknown nodes.")
    b = values.ravel()[op.unknown] + op.boundary_rhs(g)
    limit = RESIDUAL_FACTOR * (_max_norm(b) + 1.0)
    if op.uses_direct:
        x, residual = _direct(op, b, limit)
    else:
        logger.debug(f"{op.size} unknowns above direct limit {op.direct_limit}; using BiCGStab")
        x, residual = _krylov(op, b, limit)
    if _max_norm(residual) > limit:
        raise NumericalError(
            f"linear residual {_max_norm(residual):.3e} exceeds {limit:.3e}",
            history=[_max_norm(residual)],
        )
    out = dirichlet_node_values(grid, g)
    out.ravel()[op.unknown] = x
    return ScalarField(grid, out)
