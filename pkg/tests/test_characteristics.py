"""Unit tests for potential interpolation and characteristic tracing."""

import math
import os
import unittest

import numpy as np

from vpconfine.characteristics.interpolation import (
    PotentialInterpolator,
    ZeroPotential,
    interpolate_potential,
    interpolator_for,
)
from vpconfine.characteristics.tracer import (
    COORDINATES,
    rk4_step,
    sample_confined_starts,
    trace,
)
from vpconfine.core.integrals import angular_integral
from vpconfine.density.rho import spatial_radius, velocity_radius
from vpconfine.elliptic.grid import build_grid
from vpconfine.equilibrium.monotone import monotone_solve
from vpconfine.errors import ConfigurationError, DomainError
from vpconfine.models import (
    AxialConstant,
    CutoffSpec,
    DiscSection,
    MirrorCylinder,
    MirrorProfile,
    PoloidalTorus,
    Problem,
    QuadratureSpec,
    RadialDisc,
    RectSection,
    ScalarField,
    SolverSettings,
    Species,
    ToroidalCrossSection,
)

SLOW = os.getenv("VPCONFINE_SLOW_TESTS")
ION = Species("ion", 1.0, 1.0, CutoffSpec(E0=0.05, I0=1.0, amplitude=0.02, wE=0.025, wI=0.5))
RECT_TORUS = ToroidalCrossSection(RectSection(1.0, 3.0, -1.0, 1.0))


class InterpolationTestCase(unittest.TestCase):
    """Linear and bilinear interpolation of node potentials."""

    def test_linear_profile_is_exact_in_one_dimension(self):
        grid = build_grid(RadialDisc(r0=1.0), 24)
        field = ScalarField(grid, 2.0 + 3.0 * grid.r_nodes)
        value, gradient = interpolate_potential(field, [0.37])
        self.assertAlmostEqual(value, 3.11, places=12)
        self.assertEqual(gradient.shape, (1,))
        self.assertAlmostEqual(gradient[0], 3.0, places=10)

    def test_bilinear_profile_is_exact_in_two_dimensions(self):
        grid = build_grid(RECT_TORUS, (16, 12))
        field = ScalarField(grid, 1.0 + grid.r_nodes + 2.0 * grid.z_nodes)
        value, gradient = interpolate_potential(field, [2.21, -0.37])
        self.assertAlmostEqual(value, 1.0 + 2.21 - 0.74, places=12)
        np.testing.assert_allclose(gradient, [1.0, 2.0], atol=1e-10)

    def test_axis_gradient_vanishes(self):
        grid = build_grid(MirrorCylinder(r0=1.0, l=1.0), 16)
        interpolator = PotentialInterpolator(ScalarField(grid, grid.r_nodes ** 2))
        _, (d_r, _) = interpolator(0.0, 0.2)
        self.assertEqual(d_r, 0.0)

    def test_outside_hull(self):
        grid = build_grid(RECT_TORUS, 12)
        interpolator = PotentialInterpolator(ScalarField(grid, np.ones(grid.shape)))
        with self.assertRaises(DomainError):
            interpolator(3.5, 0.0)
        with self.assertRaises(DomainError):
            interpolator.value(2.0, 1.5)
        value, _ = interpolator(3.5, 0.0, clip=True)
        self.assertAlmostEqual(value, 1.0)
        self.assertEqual(interpolator.clip(3.5, -4.0), (3.0, -1.0))

    def test_gradient_converges_at_second_order(self):
        rng = np.random.default_rng(9)
        points = np.column_stack([rng.uniform(1.2, 2.8, 200), rng.uniform(-0.8, 0.8, 200)])
        exact = np.column_stack([np.cos(points[:, 0]) * np.cos(points[:, 1]),
                                 -np.sin(points[:, 0]) * np.sin(points[:, 1])])
        spacings, errors = [], []
        for n in (17, 33, 65, 129):
            grid = build_grid(RECT_TORUS, n)
            interpolator = PotentialInterpolator(
                ScalarField(grid, np.sin(grid.r_nodes) * np.cos(grid.z_nodes))
            )
            gradients = np.array([interpolator(r, z)[1] for r, z in points])
            spacings.append(grid.spacing)
            errors.append(float(np.sqrt(np.mean((gradients - exact) ** 2))))
        order = np.polyfit(np.log(spacings), np.log(errors), 1)[0]
        self.assertGreaterEqual(order, 1.9)

    def test_gradient_next_to_a_curved_wall(self):
        """A quadratic vanishing on the circle keeps exact node gradients at cut arms."""
        geom = ToroidalCrossSection(DiscSection(2.0, 0.0, 0.9))
        grid = build_grid(geom, 24)
        exact = 0.81 - (grid.r_nodes - 2.0) ** 2 - grid.z_nodes ** 2
        field = ScalarField(grid, np.where(grid.domain_mask, exact, 0.0))
        near = grid.cut_arms.any(axis=0)
        self.assertTrue(near.any())
        for boundary in (None, 0.0, lambda r, z: 0.0 * r):
            interpolator = PotentialInterpolator(field, boundary)
            np.testing.assert_allclose(interpolator.d_r[near],
                                       -2.0 * (grid.r_nodes[near] - 2.0), atol=1e-9)
            np.testing.assert_allclose(interpolator.d_z[near],
                                       -2.0 * grid.z_nodes[near], atol=1e-9)

    def test_interpolator_for(self):
        self.assertIsInstance(interpolator_for(None), ZeroPotential)
        grid = build_grid(RadialDisc(r0=1.0), 12)
        self.assertIsInstance(interpolator_for(ScalarField(grid, np.zeros(12))),
                              PotentialInterpolator)
        with self.assertRaises(TypeError):
            interpolator_for(np.zeros(12))


class TracerTestCase(unittest.TestCase):
    """Conservation of E and I along analytic-field orbits."""

    def test_rk4_step_order(self):
        """One step of x' = x matches exp(dt) to fifth order."""
        for dt in (0.1, 0.05):
            x = rk4_step(lambda X: X, np.array([1.0]), dt)
            self.assertLess(abs(x[0] - math.exp(dt)), dt ** 5 / 50.0)

    def test_disc_orbit_conserves_integrals(self):
        geom, field = RadialDisc(r0=1.0), AxialConstant(b=1.0)
        result = trace(geom, field, ION, None, [0.3, 0.0], [0.0, 0.05], 10.0, 1e-3,
                       record_every=10)
        self.assertEqual(result.exit_event, "completed")
        self.assertEqual(result.coordinates, COORDINATES["radial_disc"])
        self.assertAlmostEqual(result.times[-1], 10.0)
        self.assertLessEqual(result.energy_drift, 1e-8)
        self.assertLessEqual(result.integral_drift, 1e-8)
        self.assertGreaterEqual(result.max_distance, 0.3)

    def test_torus_orbit_conserves_integrals(self):
        geom, field = RECT_TORUS, PoloidalTorus(b=5.0, r0=2.0, toroidal=1.0)
        result = trace(geom, field, ION, None, [2.0, 0.1], [0.05, 0.1, 0.05], 10.0, 1e-3,
                       record_every=10)
        self.assertEqual(result.exit_event, "completed")
        self.assertEqual(result.states.shape[1], 5)
        self.assertLessEqual(result.energy_drift, 1e-8)
        self.assertLessEqual(result.integral_drift, 1e-8)

    def test_mirror_orbit_conserves_integrals(self):
        geom, field = MirrorCylinder(r0=1.0, l=1.0), MirrorProfile(a0=1.0, a2=1.0)
        result = trace(geom, field, ION, None, [0.2, 0.0, 0.0], [0.05, 0.1, 0.05], 10.0,
                       1e-3, record_every=10)
        self.assertEqual(result.states.shape[1], 6)
        self.assertLessEqual(result.energy_drift, 1e-8)
        self.assertLessEqual(result.integral_drift, 1e-8)

    def test_drift_shrinks_with_fourth_order(self):
        geom, field = RadialDisc(r0=1.0), AxialConstant(b=1.0)
        drifts = [
            trace(geom, field, ION, None, [0.0, 0.0], [0.0, 0.4], 10.0, dt).energy_drift
            for dt in (0.1, 0.05)
        ]
        self.assertGreater(drifts[0], 0.0)
        self.assertGreater(drifts[0] / max(drifts[1], 1e-300), 12.0)

    def test_gyration_returns_to_its_start(self):
        """For b = 2 the orbit has radius m c v / (|q| b) = 0.5 and period pi."""
        result = trace(RadialDisc(r0=1.0), AxialConstant(b=2.0), ION, None, [0.5, 0.0],
                       [0.0, -1.0], math.pi, 1e-3)
        self.assertEqual(result.exit_event, "completed")
        self.assertAlmostEqual(result.times[-1], math.pi)
        np.testing.assert_allclose(np.hypot(result.states[:, 0], result.states[:, 1]), 0.5,
                                   atol=1e-8)
        self.assertLess(float(np.hypot(*(result.states[-1, :2] - [0.5, 0.0]))), 1e-8)

    def test_particle_at_rest_stays_at_rest(self):
        grid = build_grid(RECT_TORUS, 16)
        cases = [
            (RadialDisc(r0=1.0), AxialConstant(b=1.0), None, [0.3, 0.2], [0.0, 0.0]),
            (RECT_TORUS, PoloidalTorus(b=5.0, r0=2.0, toroidal=1.0), None, [2.2, 0.1],
             [0.0, 0.0, 0.0]),
            (RECT_TORUS, PoloidalTorus(b=5.0, r0=2.0, toroidal=1.0),
             ScalarField(grid, np.full(grid.shape, 0.3)), [2.2, 0.1], [0.0, 0.0, 0.0]),
            (MirrorCylinder(r0=1.0, l=1.0), MirrorProfile(a0=1.0, a2=1.0), None,
             [0.2, 0.1, 0.3], [0.0, 0.0, 0.0]),
        ]
        for geom, field, potential, x0, v0 in cases:
            result = trace(geom, field, ION, potential, x0, v0, 1.0, 0.1)
            self.assertEqual(len(result.states), 11)
            np.testing.assert_array_equal(result.states, result.states[:1].repeat(11, axis=0))

    def test_torus_drift_shrinks_with_fourth_order(self):
        geom, field = RECT_TORUS, PoloidalTorus(b=5.0, r0=2.0, toroidal=1.0)
        drifts = [
            trace(geom, field, ION, None, [2.0, 0.1], [0.05, 0.1, 0.05], 10.0, dt).energy_drift
            for dt in (0.1, 0.05)
        ]
        self.assertGreater(drifts[0], 1e-13)
        self.assertGreater(drifts[0] / max(drifts[1], 1e-300), 12.0)

    def test_orbits_stay_within_the_spatial_radius(self):
        geom, field = RECT_TORUS, PoloidalTorus(b=20.0, r0=2.0)
        R0 = velocity_radius(ION, 0.0)
        S0 = spatial_radius(ION, field, R0, geometry=geom)
        starts = sample_confined_starts(geom, field, ION, R0, 100,
                                        rng=np.random.default_rng(29))
        for x, v in starts:
            result = trace(geom, field, ION, None, x, v, 5.0, 1e-2, record_every=50)
            self.assertEqual(result.exit_event, "completed")
            self.assertLessEqual(result.max_distance, S0 + 1e-6)

    def test_leaving_the_domain_stops_the_trace(self):
        geom, field = RadialDisc(r0=1.0), AxialConstant(b=0.01)
        result = trace(geom, field, ION, None, [0.9, 0.0], [1.0, 0.0], 10.0, 1e-2)
        self.assertEqual(result.exit_event, "left_domain")
        self.assertLess(result.times[-1], 10.0)

    def test_invalid_requests(self):
        geom, field = RadialDisc(r0=1.0), AxialConstant(b=1.0)
        with self.assertRaises(ConfigurationError):
            trace(geom, field, ION, None, [0.3, 0.0], [0.0, 0.1], 1.0, 0.0)
        with self.assertRaises(ConfigurationError):
            trace(geom, field, ION, None, [0.3, 0.0], [0.0, 0.1, 0.0], 1.0, 0.1)
        with self.assertRaises(DomainError):
            trace(geom, field, ION, None, [1.3, 0.0], [0.0, 0.1], 1.0, 0.1)
        with self.assertRaises(ConfigurationError):
            trace(geom, PoloidalTorus(b=1.0, r0=2.0), ION, None, [0.3, 0.0], [0.0, 0.1],
                  1.0, 0.1)

    def test_confined_starts(self):
        geom, field = RECT_TORUS, PoloidalTorus(b=20.0, r0=2.0)
        starts = sample_confined_starts(geom, field, ION, 0.2, 5,
                                        rng=np.random.default_rng(5))
        self.assertEqual(len(starts), 5)
        for x, v in starts:
            self.assertLess(np.linalg.norm(v), 0.2)
            self.assertLess(angular_integral(geom, field, ION, x, v), ION.cutoff.I0)


@unittest.skipUnless(SLOW, "set VPCONFINE_SLOW_TESTS=1 for desk-scale runs")
class ComputedPotentialTraceTestCase(unittest.TestCase):
    """Drift of the integrals with the solved torus potential at 128 squared."""

    def test_computed_potential_drift(self):
        problem = Problem(
            RECT_TORUS, PoloidalTorus(b=20.0, r0=2.0),
            (ION, Species("electron", -1.0, 1.0, CutoffSpec(0.04, 1.0, 0.02, 0.025, 0.5))),
            SolverSettings(nx=128, nz=128, quadrature=QuadratureSpec(4, 4)),
        )
        solution = monotone_solve(problem)
        starts = sample_confined_starts(problem.geometry, problem.field, ION,
                                        solution.radii["ion"].R0, 3)
        for x, v in starts:
            result = trace(problem.geometry, problem.field, ION, solution.potential,
                           x, v, 10.0, 1e-3, record_every=10)
            self.assertLessEqual(result.energy_drift, 1e-4)
            self.assertLessEqual(result.integral_drift, 1e-4)


if __name__ == "__main__":
    unittest.main()
