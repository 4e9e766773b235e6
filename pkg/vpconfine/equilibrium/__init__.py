"""Monotone construction of equilibria, the charge-ratio family and the scaling law."""

from .barriers import constant_barriers
from .design import design_confined, prescribe_charges
from .distribution import eval_f
from .family import family_problem, family_solve, sweep_lambda
from .monotone import maximal_minimal_gap, monotone_solve
from .scaling import scale_problem, scale_solution

__all__ = [
    "constant_barriers",
    "design_confined",
    "eval_f",
    "family_problem",
    "family_solve",
    "maximal_minimal_gap",
    "monotone_solve",
    "prescribe_charges",
    "scale_problem",
    "scale_solution",
    "sweep_lambda",
]
