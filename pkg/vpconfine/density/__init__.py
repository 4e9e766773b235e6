"""Velocity-space quadrature of the ansatz densities and confinement radii."""

from .quadrature import VelocityRule, rule_for, velocity_rule
from .rho import (
    density_field,
    global_velocity_radius,
    measured_support,
    rho_hat,
    rho_hat_derivative_bound,
    spatial_radius,
    total_charge,
    velocity_radius,
)

__all__ = [
    "VelocityRule",
    "density_field",
    "global_velocity_radius",
    "measured_support",
    "rho_hat",
    "rho_hat_derivative_bound",
    "rule_for",
    "spatial_radius",
    "total_charge",
    "velocity_radius",
    "velocity_rule",
]
