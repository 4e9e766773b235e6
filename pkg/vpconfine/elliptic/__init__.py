"""Grids, the reduced elliptic operator, linear solves and manufactured solutions."""

from .grid import Grid, build_grid
from .mms import mms_convergence
from .operator import DiscreteOperator, assemble_operator
from .solver import solve_linear

__all__ = [
    "DiscreteOperator",
    "Grid",
    "assemble_operator",
    "build_grid",
    "mms_convergence",
    "solve_linear",
]
