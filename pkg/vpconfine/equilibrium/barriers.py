"""Constant sub- and supersolutions bracketing every equilibrium potential."""

import numpy as np

from vpconfine.elliptic.grid import build_grid
from vpconfine.elliptic.operator import assemble_operator
from vpconfine.models import Barriers


def boundary_range(problem, grid=None):
    """(min g, max g) over the Dirichlet points the discretisation uses."""
    g = problem.boundary
    if g is None:
        return 0.0, 0.0
    if not callable(g) and np.ndim(g) == 0:
        return float(g), float(g)
    if grid is None:
        grid = build_grid(problem.geometry, problem.solver.resolution(problem.geometry))
    values = assemble_operator(grid, 0.0).boundary_values(g)
    if values.size == 0:
        return 0.0, 0.0
    return float(values.min()), float(values.max())


def constant_barriers(problem, grid=None):
    """c_low = min(min g, E0/q over q < 0), c_high = max(max g, E0/q over q > 0)."""
    g_min, g_max = boundary_range(problem, grid)
    lows = [sp.cutoff.E0 / sp.charge for sp in problem.species if sp.charge < 0]
    highs = [sp.cutoff.E0 / sp.charge for sp in problem.species if sp.charge > 0]
    return Barriers(c_low=min([g_min] + lows), c_high=max([g_max] + highs))
