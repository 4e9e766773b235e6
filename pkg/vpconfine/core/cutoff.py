"""Smoothstep cutoff profiles psi(E, I) composing first integrals into densities."""

import numpy as np


def _as_output(value):
    value = np.asarray(value)
    return float(value) if value.ndim == 0 else value


def smoothstep(t):
    """s(t): 0 below 0, 3t^2 - 2t^3 on (0, 1), 1 above 1."""
    t = np.clip(t, 0.0, 1.0)
    return t * t * (3.0 - 2.0 * t)


def smoothstep_slope(t):
    t = np.clip(t, 0.0, 1.0)
    return 6.0 * t * (1.0 - t)


def cutoff_value(spec, E, I):
    """psi(E, I) only; the hot path of the velocity quadrature."""
    if spec.amplitude == 0.0:
        return np.zeros(np.broadcast(np.asarray(E), np.asarray(I)).shape)
    t_energy = (spec.E0 - E) / spec.wE
    t_integral = (spec.I0 - I) / spec.wI
    return spec.amplitude * smoothstep(t_energy) * smoothstep(t_integral)


def cutoff_eval(spec, E, I):
    """Return (psi, d psi / dE, d psi / dI) at (E, I); scalars or broadcast arrays."""
    t_energy = (spec.E0 - np.asarray(E, dtype=float)) / spec.wE
    t_integral = (spec.I0 - np.asarray(I, dtype=float)) / spec.wI
    s_energy = smoothstep(t_energy)
    s_integral = smoothstep(t_integral)
    value = spec.amplitude * s_energy * s_integral
    d_energy = -spec.amplitude * smoothstep_slope(t_energy) / spec.wE * s_integral
    d_integral = -spec.amplitude * s_energy * smoothstep_slope(t_integral) / spec.wI
    return _as_output(value), _as_output(d_energy), _as_output(d_integral)
