"""Assembly of the shifted operator -L + K on a classified grid."""

import logging
import threading

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from vpconfine.elliptic.grid import EAST, NORTH, SOUTH, WEST
from vpconfine.errors import ConfigurationError
from vpconfine.models import NodeKind

logger = logging.getLogger(__name__)


class DiscreteOperator:
    """Sparse rows of -L + K over the unknown (interior and axis) nodes.

    Couplings to Dirichlet points are kept out of the matrix: ``coupling_rows``
    and ``coupling_coeffs`` hold the L coefficient of each such arm, the point
    it reaches and the lattice node it belongs to.
    """

    def __init__(self, grid, shift, matrix, unknown, coupling, *,
                 direct_limit=256 * 256, krylov_maxiter=5000):
        self.grid = grid
        self.shift = float(shift)
        self.matrix = matrix
        self.unknown = unknown
        self.coupling_rows, self.coupling_coeffs, self.coupling_points, \
            self.coupling_nodes = coupling
        self.direct_limit = direct_limit
        self.krylov_maxiter = krylov_maxiter
        self._lu = None
        self._lock = threading.Lock()

    @property
    def size(self):
        return self.unknown.size

    @property
    def uses_direct(self):
        return self.size <= self.direct_limit

    def factorization(self):
        with self._lock:
            if self._lu is None:
                logger.debug(f"factorising {self.size} unknowns (K={self.shift:.3e})")
                self._lu = splu(self.matrix.tocsc())
            return self._lu

    def boundary_values(self, g):
        """g at every Dirichlet coupling point."""
        return dirichlet_values(self.grid, g, self.coupling_points, self.coupling_nodes)

    def boundary_rhs(self, g):
        """Contribution of the Dirichlet data to the right-hand side of the unknowns."""
        out = np.zeros(self.size)
        if self.coupling_rows.size:
            np.add.at(out, self.coupling_rows, self.coupling_coeffs * self.boundary_values(g))
        return out

    def apply(self, values, dirichlet=None):
        """(-L + K) applied to node values; zero at non-unknown nodes.

        Dirichlet points take ``dirichlet`` (scalar, callable or node array);
        by default the values at the neighbouring lattice nodes.
        """
        values = np.asarray(values, dtype=float)
        flat = values.ravel()
        g = values if dirichlet is None else dirichlet
        result = self.matrix @ flat[self.unknown] - self.boundary_rhs(g)
        out = np.zeros(self.grid.shape)
        out.ravel()[self.unknown] = result
        return out


def dirichlet_values(grid, g, points, nodes):
    if g is None:
        return np.zeros(len(nodes))
    if callable(g):
        if grid.ndim == 1:
            values = g(points[:, 0])
        else:
            values = g(points[:, 0], points[:, 1])
        return np.broadcast_to(np.asarray(values, dtype=float), (len(nodes),)).copy()
    g = np.asarray(g, dtype=float)
    if g.ndim == 0:
        return np.full(len(nodes), float(g))
    if g.shape != grid.shape:
        raise ConfigurationError(
            f"boundary values have shape {g.shape}, grid has {grid.shape}."
        )
    return g.ravel()[nodes]


def dirichlet_node_values(grid, g):
    """g sampled at every lattice node."""
    if g is None:
        return np.zeros(grid.shape)
    if callable(g):
        if grid.ndim == 1:
            return np.asarray(g(grid.r_nodes), dtype=float) + np.zeros(grid.shape)
        return np.asarray(g(grid.r_nodes, grid.z_nodes), dtype=float) + np.zeros(grid.shape)
    g = np.asarray(g, dtype=float)
    if g.ndim == 0:
        return np.full(grid.shape, float(g))
    if g.shape != grid.shape:
        raise ConfigurationError(
            f"boundary values have shape {g.shape}, grid has {grid.shape}."
        )
    return g.copy()


def three_point_weights(h_plus, h_minus):
    """Three-point weights (plus, minus, centre) for u'' and u' with unequal arms."""
    total = h_plus + h_minus
    d2 = (2.0 / (h_plus * total), 2.0 / (h_minus * total), -2.0 / (h_plus * h_minus))
    d1 = (h_minus / (h_plus * total), -h_plus / (h_minus * total),
          (h_plus - h_minus) / (h_plus * h_minus))
    return d2, d1


def _stencil(grid, unknown):
    """Coefficients of L per direction and for the centre at the unknown nodes."""
    kind = grid.kind.ravel()[unknown]
    r = grid.r_nodes.ravel()[unknown]
    arms = grid.arms.reshape(grid.arms.shape[0], -1)[:, unknown]
    on_axis = kind == NodeKind.AXIS
    safe_r = np.where(on_axis, 1.0, r)

    coeffs = np.zeros((arms.shape[0], unknown.size))
    (c_e, c_w, c_p), (d_e, d_w, d_p) = three_point_weights(arms[EAST], arms[WEST])
    coeffs[EAST] = c_e + d_e / safe_r
    coeffs[WEST] = c_w + d_w / safe_r
    centre = c_p + d_p / safe_r

    # r -> 0: u_rr + u_r / r -> 2 u_rr, ghost node u(-h) = u(h)
    h = arms[EAST][on_axis]
    coeffs[EAST][on_axis] = 4.0 / h ** 2
    coeffs[WEST][on_axis] = 0.0
    centre[on_axis] = -4.0 / h ** 2

    if grid.ndim == 2:
        (c_n, c_s, c_pz), _ = three_point_weights(arms[NORTH], arms[SOUTH])
        coeffs[NORTH] = c_n
        coeffs[SOUTH] = c_s
        centre = centre + c_pz
    return coeffs, centre


def _neighbour_offsets(grid):
    if grid.ndim == 1:
        return (1, -1)
    nz = grid.shape[1]
    return (nz, -nz, 1, -1)


def assemble_operator(grid, shift=0.0, *, direct_limit=256 * 256, krylov_maxiter=5000):
    """Sparse -L + K with L = d_rr + r^-1 d_r (+ d_zz) on the grid's unknown nodes."""
    if shift < 0:
        raise ConfigurationError(f"shift K must be nonnegative, got {shift}.")
    unknown = np.flatnonzero(grid.unknown_mask.ravel())
    index = np.full(grid.kind.size, -1)
    index[unknown] = np.arange(unknown.size)
    coeffs, centre = _stencil(grid, unknown)

    rows = [np.arange(unknown.size)]
    cols = [np.arange(unknown.size)]
    data = [-centre + shift]
    c_rows, c_coeffs, c_points, c_nodes = [], [], [], []
    dirichlet = grid.arm_dirichlet.reshape(grid.arm_dirichlet.shape[0], -1)
    points = grid.arm_points.reshape(grid.arm_points.shape[0], -1, 2)
    for d, offset in enumerate(_neighbour_offsets(grid)):
        active = np.flatnonzero(coeffs[d] != 0.0)
        nodes = unknown[active] + offset
        inside = (nodes >= 0) & (nodes < grid.kind.size)
        active, nodes = active[inside], nodes[inside]
        target = index[nodes]
        coupled = target >= 0
        rows.append(active[coupled])
        cols.append(target[coupled])
        data.append(-coeffs[d][active[coupled]])

        to_boundary = ~coupled & dirichlet[d][unknown[active]]
        c_rows.append(active[to_boundary])
        c_coeffs.append(coeffs[d][active[to_boundary]])
        c_points.append(points[d][unknown[active[to_boundary]]])
        c_nodes.append(nodes[to_boundary])

    matrix = sp.csr_matrix(
        (np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))),
        shape=(unknown.size, unknown.size),
    )
    coupling = (
        np.concatenate(c_rows),
        np.concatenate(c_coeffs),
        np.concatenate(c_points).reshape(-1, 2),
        np.concatenate(c_nodes),
    )
    logger.debug(f"assembled {unknown.size} rows, {matrix.nnz} nonzeros, "
                 f"{coupling[0].size} boundary couplings")
    return DiscreteOperator(grid, shift, matrix, unknown, coupling,
                            direct_limit=direct_limit, krylov_maxiter=krylov_maxiter)
