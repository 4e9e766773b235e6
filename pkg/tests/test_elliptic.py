"""Unit tests for grids, the reduced operator, linear solves and manufactured solutions."""

import unittest

import numpy as np

from vpconfine.elliptic.grid import EAST, build_grid
from vpconfine.elliptic.mms import (
    compute_rates,
    manufactured_solution,
    mms_convergence,
    mms_error,
)
from vpconfine.elliptic.operator import assemble_operator
from vpconfine.elliptic.solver import solve_linear
from vpconfine.errors import ConfigurationError, NumericalError
from vpconfine.models import (
    DiscSection,
    MirrorCylinder,
    NodeKind,
    RadialDisc,
    RectSection,
    ScalarField,
    ToroidalCrossSection,
)

RECT_TORUS = ToroidalCrossSection(RectSection(1.0, 3.0, -1.0, 1.0))
DISC_TORUS = ToroidalCrossSection(DiscSection(2.0, 0.0, 0.9))
MIRROR = MirrorCylinder(r0=1.0, l=1.0)
DISC = RadialDisc(r0=1.0)


def quadratic(r, z=0.0):
    """r^2 + z^2, for which L = d_rr + d_r / r + d_zz gives 6 (4 in the radial disc)."""
    return np.asarray(r) ** 2 + np.asarray(z) ** 2


class GridTestCase(unittest.TestCase):
    """Node classification and lattice helpers."""

    def test_radial_grid(self):
        grid = build_grid(DISC, 9)
        self.assertEqual(grid.shape, (9,))
        self.assertEqual(grid.kind[0], NodeKind.AXIS)
        self.assertEqual(grid.kind[-1], NodeKind.BOUNDARY)
        self.assertEqual(int(grid.unknown_mask.sum()), 8)
        self.assertAlmostEqual(grid.spacing, 0.125)

    def test_rect_and_mirror_edges(self):
        rect = build_grid(RECT_TORUS, (9, 11))
        self.assertTrue(np.all(rect.kind[0, :] == NodeKind.BOUNDARY))
        self.assertTrue(np.all(rect.kind[:, -1] == NodeKind.BOUNDARY))
        self.assertEqual(int(rect.unknown_mask.sum()), 7 * 9)
        mirror = build_grid(MIRROR, 9)
        self.assertTrue(np.all(mirror.kind[0, 1:-1] == NodeKind.AXIS))
        self.assertEqual(mirror.kind[0, 0], NodeKind.BOUNDARY)

    def test_disc_section_cut_arms(self):
        grid = build_grid(DISC_TORUS, 17)
        self.assertTrue(np.any(grid.kind == NodeKind.OUTSIDE))
        interior = grid.kind == NodeKind.INTERIOR
        self.assertTrue(np.all(grid.arms[:, interior] > 0.0))
        self.assertTrue(np.all(grid.arms[:, interior] <= grid.spacing + 1e-15))
        self.assertTrue(np.any(grid.arms[EAST][interior] < grid.h - 1e-12))
        for r, z in zip(grid.r_nodes[interior], grid.z_nodes[interior]):
            self.assertTrue(DISC_TORUS.contains(r, z))

    def test_cut_arms_only_next_to_curved_walls(self):
        grid = build_grid(DISC_TORUS, 17)
        cut = grid.cut_arms
        self.assertTrue(cut.any())
        self.assertFalse(np.any(cut[:, grid.kind != NodeKind.INTERIOR]))
        self.assertTrue(np.all(grid.arms[cut] <= grid.spacing + 1e-15))
        self.assertFalse(build_grid(RECT_TORUS, 17).cut_arms.any())

    def test_locate_and_hull(self):
        grid = build_grid(MIRROR, (9, 9))
        (i, j), (t, s) = grid.locate(0.3, -0.1)
        self.assertEqual((i, j), (2, 3))
        self.assertAlmostEqual(t, 0.4)
        self.assertAlmostEqual(s, 0.6)
        self.assertTrue(grid.in_hull(1.0, 1.0))
        self.assertFalse(grid.in_hull(1.1, 0.0))

    def test_resolution_is_validated(self):
        with self.assertRaises(ConfigurationError):
            build_grid(DISC, 4)
        with self.assertRaises(ConfigurationError):
            build_grid(RECT_TORUS, (16, 7))

    def test_to_dict(self):
        spec = build_grid(RECT_TORUS, (9, 11)).to_dict()
        self.assertEqual(spec["shape"], [9, 11])
        self.assertEqual(spec["unknowns"], 63)
        self.assertIn("h_z", spec)


class OperatorTestCase(unittest.TestCase):
    """Assembly of -L + K and its action on node values."""

    def test_constants_are_in_the_kernel(self):
        for geom, resolution in ((DISC, 16), (RECT_TORUS, 12), (MIRROR, 12),
                                 (DISC_TORUS, 16)):
            grid = build_grid(geom, resolution)
            op = assemble_operator(grid)
            result = op.apply(np.full(grid.shape, 2.5), 2.5)
            self.assertLess(np.max(np.abs(result)), 1e-7, geom.kind)

    def test_quadratics_are_exact(self):
        cases = ((DISC, 16, -4.0), (RECT_TORUS, 12, -6.0), (MIRROR, 12, -6.0),
                 (DISC_TORUS, 16, -6.0))
        for geom, resolution, expected in cases:
            grid = build_grid(geom, resolution)
            op = assemble_operator(grid)
            values = quadratic(grid.r_nodes, grid.z_nodes) if grid.ndim == 2 \
                else quadratic(grid.r_nodes)
            result = op.apply(values, quadratic)[grid.unknown_mask]
            np.testing.assert_allclose(result, expected, atol=1e-6)

    def test_m_matrix_sign_pattern(self):
        for geom in (RECT_TORUS, MIRROR, DISC_TORUS):
            op = assemble_operator(build_grid(geom, 16), 0.5)
            matrix = op.matrix.tocoo()
            off = matrix.row != matrix.col
            self.assertTrue(np.all(matrix.data[off] <= 0.0))
            self.assertTrue(np.all(op.matrix.diagonal() > 0.5))

    def test_shift_must_be_nonnegative(self):
        with self.assertRaises(ConfigurationError):
            assemble_operator(build_grid(DISC, 16), -1.0)


class SolverTestCase(unittest.TestCase):
    """Direct and Krylov linear solves."""

    def test_quadratic_is_recovered(self):
        for geom in (RECT_TORUS, MIRROR, DISC_TORUS):
            grid = build_grid(geom, 16)
            op = assemble_operator(grid)
            rhs = np.full(grid.shape, -6.0)
            phi = solve_linear(op, rhs, quadratic)
            exact = quadratic(grid.r_nodes, grid.z_nodes)
            mask = grid.domain_mask
            np.testing.assert_allclose(phi.values[mask], exact[mask], atol=1e-8)

    def test_krylov_matches_direct(self):
        grid = build_grid(RECT_TORUS, 24)
        direct = assemble_operator(grid, 1.0)
        krylov = assemble_operator(grid, 1.0, direct_limit=10)
        self.assertFalse(krylov.uses_direct)
        rhs = ScalarField(grid, np.sin(grid.r_nodes) * np.cos(grid.z_nodes))
        a = solve_linear(direct, rhs, 0.5).values
        b = solve_linear(krylov, rhs, 0.5).values
        np.testing.assert_allclose(a, b, atol=1e-8)

    def test_discrete_maximum_principle(self):
        """A nonnegative source with zero boundary data gives a nonnegative solution."""
        rng = np.random.default_rng(3)
        for geom in (DISC, RECT_TORUS, MIRROR, DISC_TORUS):
            grid = build_grid(geom, 16)
            source = rng.uniform(0.0, 1.0, size=grid.shape)
            phi = solve_linear(assemble_operator(grid), source, 0.0)
            self.assertGreaterEqual(float(phi.values[grid.domain_mask].min()), 0.0)
            self.assertGreater(phi.max_abs(), 0.0)

    def test_repeated_solves_are_bit_identical(self):
        grid = build_grid(DISC_TORUS, 24)
        rhs = np.sin(grid.r_nodes) * np.cos(grid.z_nodes)
        for direct_limit in (256 * 256, 10):
            op = assemble_operator(grid, 0.5, direct_limit=direct_limit)
            first = solve_linear(op, rhs, 0.25).values
            again = solve_linear(op, rhs, 0.25).values
            fresh = solve_linear(assemble_operator(grid, 0.5, direct_limit=direct_limit),
                                 rhs, 0.25).values
            self.assertEqual(first.tobytes(), again.tobytes())
            self.assertEqual(first.tobytes(), fresh.tobytes())

    def test_rhs_is_checked(self):
        grid = build_grid(DISC, 16)
        op = assemble_operator(grid)
        with self.assertRaises(ConfigurationError):
            solve_linear(op, np.zeros(5))
        bad = np.zeros(grid.shape)
        bad[3] = np.nan
        with self.assertRaises(NumericalError):
            solve_linear(op, bad)


class ManufacturedSolutionTestCase(unittest.TestCase):
    """Observed convergence orders of the discretisation."""

    def test_radial_order(self):
        study = mms_convergence(DISC, [32, 64, 128])
        self.assertGreaterEqual(study["order"], 1.9)
        self.assertEqual(len(study["rates"]), 3)
        self.assertIsNone(study["rates"][0])

    def test_rect_order(self):
        self.assertGreaterEqual(mms_convergence(RECT_TORUS, [16, 32, 64])["order"], 1.9)

    def test_mirror_order(self):
        self.assertGreaterEqual(mms_convergence(MIRROR, [16, 32, 64])["order"], 1.9)

    def test_disc_section_order(self):
        self.assertGreaterEqual(mms_convergence(DISC_TORUS, [16, 32, 64])["order"], 1.5)

    def test_mirror_axis_slope_vanishes_at_second_order(self):
        """The one-sided radial difference on the axis shrinks at least like h^2."""
        manufactured = manufactured_solution(MIRROR)
        spacings, slopes = [], []
        for n in (17, 33, 65):
            grid = build_grid(MIRROR, n)
            rhs = manufactured.source(grid.r_nodes, grid.z_nodes)
            phi = solve_linear(assemble_operator(grid), rhs, manufactured.boundary).values
            axis = (-3.0 * phi[0, 1:-1] + 4.0 * phi[1, 1:-1] - phi[2, 1:-1]) / (2.0 * grid.h)
            spacings.append(grid.h)
            slopes.append(float(np.max(np.abs(axis))))
        self.assertGreater(slopes[-1], 0.0)
        order = np.polyfit(np.log(spacings), np.log(slopes), 1)[0]
        self.assertGreaterEqual(order, 1.9)

    def test_error_decreases(self):
        coarse, h_coarse = mms_error(RECT_TORUS, 16)
        fine, h_fine = mms_error(RECT_TORUS, 32)
        self.assertLess(fine, coarse)
        self.assertLess(h_fine, h_coarse)

    def test_compute_rates(self):
        rates = compute_rates([0.1, 0.05, 0.025], [4e-2, 1e-2, 2.5e-3])
        self.assertIsNone(rates[0])
        self.assertAlmostEqual(rates[1], 2.0)
        self.assertAlmostEqual(rates[2], 2.0)

    def test_needs_three_resolutions(self):
        with self.assertRaises(ConfigurationError):
            mms_convergence(DISC, [16, 32])


if __name__ == "__main__":
    unittest.main()
