"""Characteristic orbits and conservation of the first integrals along them."""

from .interpolation import PotentialInterpolator, interpolate_potential
from .tracer import sample_confined_starts, trace

__all__ = [
    "PotentialInterpolator",
    "interpolate_potential",
    "sample_confined_starts",
    "trace",
]
