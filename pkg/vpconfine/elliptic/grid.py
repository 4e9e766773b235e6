"""Structured grids over the reduced domains with node classification."""

import numpy as np

from vpconfine.errors import ConfigurationError
from vpconfine.models import NodeKind

# arm order of the stencil: +r, -r, +z, -z
EAST, WEST, NORTH, SOUTH = range(4)

# nodes closer than this fraction of h to a curved boundary become Dirichlet nodes
SNAP_FRACTION = 1e-3


class Grid:
    """Tensor lattice in r (and z) with per-node kinds and stencil arm lengths.

    ``arms[d]`` is the distance from a node to its neighbour point in
    direction d; for disc cross-sections it is shortened to the boundary
    crossing (Shortley-Weller). ``arm_points[d]`` holds the (r, z) of that
    neighbour point and is only meaningful where it is a Dirichlet point.
    """

    def __init__(self, geometry, r, z, kind, arms, arm_points, arm_dirichlet):
        self.geometry = geometry
        self.r = r
        self.z = z
        self.kind = kind
        self.arms = arms
        self.arm_points = arm_points
        self.arm_dirichlet = arm_dirichlet
        self.shape = kind.shape
        self.h = float(r[1] - r[0])
        self.h_z = float(z[1] - z[0]) if z is not None else None
        if z is None:
            self.r_nodes = r.copy()
            self.z_nodes = np.zeros_like(r)
        else:
            self.r_nodes, self.z_nodes = np.meshgrid(r, z, indexing="ij")
        for array in (self.kind, self.arms, self.r_nodes, self.z_nodes):
            array.setflags(write=False)

    @property
    def ndim(self):
        return len(self.shape)

    @property
    def spacing(self):
        return self.h if self.h_z is None else max(self.h, self.h_z)

    @property
    def unknown_mask(self):
        return (self.kind == NodeKind.INTERIOR) | (self.kind == NodeKind.AXIS)

    @property
    def domain_mask(self):
        return self.kind != NodeKind.OUTSIDE

    @property
    def dirichlet_mask(self):
        return (self.kind == NodeKind.BOUNDARY) | (self.kind == NodeKind.OUTSIDE)

    @property
    def cut_arms(self):
        """Arms of interior nodes that end on the curved boundary, not on a lattice node."""
        cut = self.arm_dirichlet & (_neighbour_kinds(self.kind) == NodeKind.OUTSIDE)
        return cut & (self.kind == NodeKind.INTERIOR)[None]

    @property
    def charge_weights(self):
        """Trapezoid weights times the symmetry weight 2 pi r (zero outside)."""
        w_r = _trapezoid(self.r.size, self.h)
        if self.z is None:
            weights = w_r
        elif self.geometry.kind == "toroidal" and self.geometry.shape.kind == "disc":
            weights = np.where(self.kind == NodeKind.INTERIOR, self.h * self.h_z, 0.0)
        else:
            weights = np.outer(w_r, _trapezoid(self.z.size, self.h_z))
        return 2.0 * np.pi * self.r_nodes * weights

    def locate(self, r, z=0.0):
        """Cell index and local coordinates of a point inside the lattice hull."""
        i, t = _cell(self.r, r)
        if self.z is None:
            return (i,), (t,)
        j, s = _cell(self.z, z)
        return (i, j), (t, s)

    def in_hull(self, r, z=0.0, tol=1e-12):
        if not self.r[0] - tol <= r <= self.r[-1] + tol:
            return False
        return self.z is None or self.z[0] - tol <= z <= self.z[-1] + tol

    def to_dict(self):
        spec = {
            "geometry": self.geometry.to_dict(),
            "shape": list(self.shape),
            "h": self.h,
            "unknowns": int(self.unknown_mask.sum()),
        }
        if self.h_z is not None:
            spec["h_z"] = self.h_z
        return spec


def _trapezoid(n, h):
    weights = np.full(n, h)
    weights[0] = weights[-1] = 0.5 * h
    return weights


def _cell(axis, x):
    i = int(np.searchsorted(axis, x, side="right")) - 1
    i = min(max(i, 0), axis.size - 2)
    t = (x - axis[i]) / (axis[i + 1] - axis[i])
    return i, t


def _resolution(resolution, dims):
    values = np.atleast_1d(np.asarray(resolution, dtype=int)).tolist()
    if len(values) == 1:
        values = values * dims
    if len(values) < dims:
        raise ConfigurationError(f"resolution needs {dims} entries, got {values}.")
    values = values[:dims]
    if min(values) < 8:
        raise ConfigurationError(f"resolution must be at least 8 per axis, got {values}.")
    return values


def _regular_arms(shape, h, h_z, r_nodes, z_nodes):
    ndir = 2 if len(shape) == 1 else 4
    arms = np.empty((ndir,) + shape)
    arms[EAST] = arms[WEST] = h
    if ndir == 4:
        arms[NORTH] = arms[SOUTH] = h_z
    points = np.empty((ndir,) + shape + (2,))
    offsets = [(h, 0.0), (-h, 0.0), (0.0, h_z or 0.0), (0.0, -(h_z or 0.0))]
    for d in range(ndir):
        points[d, ..., 0] = r_nodes + offsets[d][0]
        points[d, ..., 1] = z_nodes + offsets[d][1]
    return arms, points


def _neighbour_kinds(kind):
    """Kind of the adjacent node in each direction (OUTSIDE past the lattice)."""
    padded = np.pad(kind, 1, constant_values=NodeKind.OUTSIDE)
    if kind.ndim == 1:
        return np.stack([padded[2:], padded[:-2]])
    return np.stack([
        padded[2:, 1:-1], padded[:-2, 1:-1], padded[1:-1, 2:], padded[1:-1, :-2],
    ])


def _radial_grid(geom, n):
    r = np.linspace(0.0, geom.r0, n)
    kind = np.full(n, NodeKind.INTERIOR, dtype=np.int8)
    kind[0] = NodeKind.AXIS
    kind[-1] = NodeKind.BOUNDARY
    arms, points = _regular_arms(kind.shape, r[1] - r[0], None, r, np.zeros_like(r))
    dirichlet = _neighbour_kinds(kind) == NodeKind.BOUNDARY
    return Grid(geom, r, None, kind, arms, points, dirichlet)


def _box_grid(geom, r, z, with_axis):
    kind = np.full((r.size, z.size), NodeKind.INTERIOR, dtype=np.int8)
    kind[0, :] = NodeKind.AXIS if with_axis else NodeKind.BOUNDARY
    kind[-1, :] = NodeKind.BOUNDARY
    kind[:, 0] = NodeKind.BOUNDARY
    kind[:, -1] = NodeKind.BOUNDARY
    rr, zz = np.meshgrid(r, z, indexing="ij")
    arms, points = _regular_arms(kind.shape, r[1] - r[0], z[1] - z[0], rr, zz)
    dirichlet = _neighbour_kinds(kind) == NodeKind.BOUNDARY
    return Grid(geom, r, z, kind, arms, points, dirichlet)


def _crossing_arms(shape, rr, zz, h, h_z):
    """Distance along each axis direction from a node to the circle, capped at h."""
    dz = zz - shape.z_c
    dr = rr - shape.r_c
    with np.errstate(invalid="ignore"):
        half_chord_r = np.sqrt(shape.radius ** 2 - dz ** 2)
        half_chord_z = np.sqrt(shape.radius ** 2 - dr ** 2)
    east = np.minimum(shape.r_c + half_chord_r - rr, h)
    west = np.minimum(rr - (shape.r_c - half_chord_r), h)
    north = np.minimum(shape.z_c + half_chord_z - zz, h_z)
    south = np.minimum(zz - (shape.z_c - half_chord_z), h_z)
    return np.stack([east, west, north, south])


def _disc_section_grid(geom, nx, nz):
    shape = geom.shape
    r_lo, r_hi, z_lo, z_hi = shape.bounds()
    r = np.linspace(r_lo, r_hi, nx)
    z = np.linspace(z_lo, z_hi, nz)
    h, h_z = r[1] - r[0], z[1] - z[0]
    rr, zz = np.meshgrid(r, z, indexing="ij")
    inside = shape.level_set(rr, zz) < 0
    crossing = _crossing_arms(shape, rr, zz, h, h_z)
    steps = np.array([h, h, h_z, h_z])[:, None, None]
    too_close = inside & np.any(crossing < SNAP_FRACTION * steps, axis=0)

    kind = np.full(rr.shape, NodeKind.OUTSIDE, dtype=np.int8)
    kind[inside] = NodeKind.INTERIOR
    kind[too_close] = NodeKind.BOUNDARY

    arms, points = _regular_arms(kind.shape, h, h_z, rr, zz)
    neighbour = _neighbour_kinds(kind)
    cut = neighbour == NodeKind.OUTSIDE
    arms = np.where(cut, crossing, arms)
    signs = [(1.0, 0.0), (-1.0, 0.0), (0.0, 1.0), (0.0, -1.0)]
    for d, (sr, sz) in enumerate(signs):
        points[d, ..., 0] = np.where(cut[d], rr + sr * arms[d], points[d, ..., 0])
        points[d, ..., 1] = np.where(cut[d], zz + sz * arms[d], points[d, ..., 1])
    dirichlet = cut | (neighbour == NodeKind.BOUNDARY)
    interior = kind == NodeKind.INTERIOR
    arms = np.where(interior[None], arms, steps)
    return Grid(geom, r, z, kind, arms, points, dirichlet)


def build_grid(geom, resolution):
    """Classified lattice for the geometry; resolution is n or (nx, nz), each >= 8."""
    if geom.kind == "radial_disc":
        (n,) = _resolution(resolution, 1)
        return _radial_grid(geom, n)
    nx, nz = _resolution(resolution, 2)
    if geom.kind == "mirror":
        r = np.linspace(0.0, geom.r0, nx)
        z = np.linspace(-geom.l, geom.l, nz)
        return _box_grid(geom, r, z, with_axis=True)
    if geom.kind == "toroidal":
        if geom.shape.kind == "disc":
            return _disc_section_grid(geom, nx, nz)
        r_lo, r_hi, z_lo, z_hi = geom.shape.bounds()
        r = np.linspace(r_lo, r_hi, nx)
        z = np.linspace(z_lo, z_hi, nz)
        return _box_grid(geom, r, z, with_axis=False)
    raise ConfigurationError(f"unsupported geometry '{geom.kind}'.")
