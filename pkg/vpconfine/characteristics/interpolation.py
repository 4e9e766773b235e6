"""Values and gradients of a node potential at arbitrary points of the grid hull."""

import numpy as np

from vpconfine.elliptic.grid import EAST, NORTH, SOUTH, WEST
from vpconfine.elliptic.operator import dirichlet_values, three_point_weights
from vpconfine.errors import DomainError
from vpconfine.models import NodeKind, ScalarField


def _neighbour_values(values):
    padded = np.pad(values, 1, mode="edge")
    return np.stack([
        padded[2:, 1:-1], padded[:-2, 1:-1], padded[1:-1, 2:], padded[1:-1, :-2],
    ])


class PotentialInterpolator:
    """Linear (1-D) or bilinear (2-D) interpolation of a ScalarField.

    Node gradients come from second-order differences (one-sided at the hull
    edges) and are interpolated the same way; on the axis d_r phi is zero.
    Next to a curved wall the differences run over the shortened arms to the
    boundary crossing, where the value is ``boundary`` (scalar, callable of
    (r, z) or node array) or, without it, the stored outside-node value.
    """

    def __init__(self, field, boundary=None):
        self.grid = field.grid
        self.values = np.asarray(field.values, dtype=float)
        grid = self.grid
        if grid.ndim == 1:
            d_r = np.gradient(self.values, grid.r, edge_order=2)
            d_z = np.zeros_like(d_r)
        else:
            d_r, d_z = np.gradient(self.values, grid.r, grid.z, edge_order=2)
            self._wall_differences(d_r, d_z, boundary)
        d_r = np.where(grid.kind == NodeKind.AXIS, 0.0, d_r)
        self.d_r = d_r
        self.d_z = d_z

    def _wall_differences(self, d_r, d_z, boundary):
        """Overwrite d_r, d_z in place at nodes with a cut arm."""
        grid = self.grid
        cut = grid.cut_arms
        if not cut.any():
            return
        ends = _neighbour_values(self.values)
        if boundary is not None:
            nz = grid.shape[1]
            flat = np.arange(self.values.size).reshape(grid.shape)
            for d, offset in zip((EAST, WEST, NORTH, SOUTH), (nz, -nz, 1, -1)):
                if cut[d].any():
                    ends[d][cut[d]] = dirichlet_values(
                        grid, boundary, grid.arm_points[d][cut[d]], flat[cut[d]] + offset
                    )
        for target, plus, minus in ((d_r, EAST, WEST), (d_z, NORTH, SOUTH)):
            rows = cut[plus] | cut[minus]
            _, (w_plus, w_minus, w_centre) = three_point_weights(grid.arms[plus][rows],
                                                                 grid.arms[minus][rows])
            target[rows] = (w_plus * ends[plus][rows] + w_minus * ends[minus][rows]
                            + w_centre * self.values[rows])

    def _weights(self, r, z):
        index, local = self.grid.locate(r, z)
        if self.grid.ndim == 1:
            (i,), (t,) = index, local
            return [((i,), 1.0 - t), ((i + 1,), t)]
        (i, j), (t, s) = index, local
        return [
            ((i, j), (1.0 - t) * (1.0 - s)),
            ((i + 1, j), t * (1.0 - s)),
            ((i, j + 1), (1.0 - t) * s),
            ((i + 1, j + 1), t * s),
        ]

    def _combine(self, array, weights):
        return float(sum(w * array[node] for node, w in weights))

    def clip(self, r, z=0.0):
        grid = self.grid
        r = min(max(r, grid.r[0]), grid.r[-1])
        if grid.z is not None:
            z = min(max(z, grid.z[0]), grid.z[-1])
        return r, z

    def __call__(self, r, z=0.0, *, clip=False):
        """(value, (d_r phi, d_z phi)) at the reduced point (r, z)."""
        if clip:
            r, z = self.clip(r, z)
        elif not self.grid.in_hull(r, z):
            raise DomainError(f"point ({r}, {z}) lies outside the grid hull.")
        weights = self._weights(r, z)
        value = self._combine(self.values, weights)
        gradient = (self._combine(self.d_r, weights), self._combine(self.d_z, weights))
        return value, gradient

    def value(self, r, z=0.0):
        if not self.grid.in_hull(r, z):
            raise DomainError(f"point ({r}, {z}) lies outside the grid hull.")
        return self._combine(self.values, self._weights(r, z))


class ZeroPotential:
    """Identically vanishing potential for analytic-field traces."""

    def __call__(self, r, z=0.0, *, clip=False):
        return 0.0, (0.0, 0.0)

    def clip(self, r, z=0.0):
        return r, z

    def value(self, r, z=0.0):
        return 0.0


def interpolator_for(potential):
    if potential is None:
        return ZeroPotential()
    if isinstance(potential, (PotentialInterpolator, ZeroPotential)):
        return potential
    if isinstance(potential, ScalarField):
        return PotentialInterpolator(potential)
    raise TypeError(f"unsupported potential {type(potential).__name__}")


def interpolate_potential(field, x):
    """Value and gradient (d_r, d_z) of a node potential at the reduced point x."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    r = float(x[0])
    z = float(x[1]) if x.size > 1 else 0.0
    value, gradient = interpolator_for(field)(r, z)
    return value, np.array(gradient if field.grid.ndim == 2 else gradient[:1])
