"""Composite Gauss-Legendre rules on the velocity box, relative to the ball radius."""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np


@dataclass(frozen=True)
class VelocityRule:
    """Reference nodes for velocities v = R * xi.

    ``distinguished`` runs over [-1, 1]; ``other`` over [-1, 1] for planar
    velocities and over [0, 1] (a planar radius) for the reduced 3-D case.
    ``weights`` already carries the 2 pi s factor of the 3-D reduction, so
    rho_hat = R^m * sum(weights * psi).
    """

    distinguished: np.ndarray
    other: np.ndarray
    weights: np.ndarray
    speed2: np.ndarray
    velocity_dim: int

    @property
    def size(self):
        return self.weights.size


def composite_rule(order, subdivisions, lower=-1.0, upper=1.0):
    """Nodes and weights of `order`-point Gauss-Legendre on equal sub-intervals."""
    xi, wi = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(lower, upper, subdivisions + 1)
    half = 0.5 * (edges[1:] - edges[:-1])
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * xi[None, :]).ravel()
    weights = (half[:, None] * wi[None, :]).ravel()
    return nodes, weights


@lru_cache(maxsize=32)
def velocity_rule(order, subdivisions, velocity_dim):
    d_nodes, d_weights = composite_rule(order, subdivisions)
    if velocity_dim == 3:
        o_nodes, o_weights = composite_rule(order, subdivisions, lower=0.0)
        o_weights = 2.0 * np.pi * o_nodes * o_weights
    elif velocity_dim == 2:
        o_nodes, o_weights = d_nodes, d_weights
    else:
        raise ValueError(f"unsupported velocity dimension {velocity_dim}")
    weights = np.outer(d_weights, o_weights)
    speed2 = d_nodes[:, None] ** 2 + o_nodes[None, :] ** 2
    for array in (d_nodes, o_nodes, weights, speed2):
        array.setflags(write=False)
    return VelocityRule(d_nodes, o_nodes, weights, speed2, velocity_dim)


def rule_for(quad, velocity_dim):
    return velocity_rule(quad.order, quad.subdivisions, velocity_dim)
