"""Core model: cutoffs, first integrals and magnetic fields."""

from .cutoff import cutoff_eval, cutoff_value, smoothstep
from .fields import check_divergence_free, field_eval
from .integrals import angular_integral, coupling, energy_integral, integral_from_parts

__all__ = [
    "angular_integral",
    "check_divergence_free",
    "coupling",
    "cutoff_eval",
    "cutoff_value",
    "energy_integral",
    "field_eval",
    "integral_from_parts",
    "smoothstep",
]
