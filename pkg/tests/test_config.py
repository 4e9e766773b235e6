"""Unit tests for settings profiles, RunConfig loading and cross validation."""

import json
import os
import shutil
import tempfile
import unittest

from vpconfine import create_app
from vpconfine.cli.schemas import config_hash, diagnostics, load_config, locate
from vpconfine.equilibrium.family import family_cutoff
from vpconfine.errors import ConfigurationError
from vpconfine.models import (
    AxialConstant,
    CutoffSpec,
    MirrorCylinder,
    MirrorProfile,
    PoloidalTorus,
    RadialDisc,
    RectSection,
    Species,
    ToroidalCrossSection,
)
from vpconfine.utils.validators import (
    validate_cutoffs,
    validate_family,
    validate_geometry_field,
    validate_species,
)

CONFIGS = os.path.join(os.path.dirname(os.path.abspath(__file__)), os.pardir, "configs")

DISC_CONFIG = """{
  "geometry": {"kind": "radial_disc", "r0": 1.0},
  "field": {"kind": "axial_constant", "b": 10.0},
  "species": [
    {"label": "ion", "charge": 1.0, "mass": 1.0,
     "cutoff": {"E0": 0.03, "I0": 1.0, "amplitude": 0.02, "wE": 0.01, "wI": 0.5}},
    {"label": "electron", "charge": -1.0, "mass": 1.0,
     "cutoff": {"E0": 0.02, "I0": 1.0, "amplitude": 0.02, "wE": 0.01, "wI": 0.5}}
  ],
  "solver": {"nx": 16}
}
"""


class SettingsTestCase(unittest.TestCase):
    """Settings profiles loaded by the app factory."""

    def test_testing_profile(self):
        app = create_app("testing")
        self.assertEqual(app.config_name, "testing")
        self.assertEqual(app.config["GRID_NX"], 24)
        self.assertEqual(app.config["QUAD_ORDER"], 4)
        self.assertEqual(app.config["MAX_WORKERS"], 1)
        self.assertIn("SOLVER_TOL", app.config)
        self.assertIsNotNone(app.logger)

    def test_unknown_profile(self):
        with self.assertRaises(KeyError):
            create_app("staging")


class LoadConfigTestCase(unittest.TestCase):
    """RunConfig files turned into Problems."""

    def setUp(self):
        self.settings = create_app("testing").config
        self.tmpdir = tempfile.mkdtemp()

    def tearDown(self):
        shutil.rmtree(self.tmpdir, ignore_errors=True)

    def write(self, text, name="run.json"):
        path = os.path.join(self.tmpdir, name)
        with open(path, "w", encoding="utf-8") as handle:
            handle.write(text)
        return path

    def test_valid_disc_config(self):
        run_config = load_config(self.write(DISC_CONFIG), self.settings)
        problem = run_config.problem
        self.assertIsInstance(problem.geometry, RadialDisc)
        self.assertEqual(problem.field, AxialConstant(b=10.0))
        self.assertEqual([sp.label for sp in problem.species], ["ion", "electron"])
        self.assertEqual(problem.solver.nx, 16)
        self.assertEqual(problem.solver.quadrature.order, 4)
        self.assertEqual(problem.boundary, 0.0)
        self.assertEqual(run_config.output, self.settings["OUTPUT_DIR"])
        self.assertEqual(len(run_config.config_hash), 64)

    def test_shipped_configs_load(self):
        for name in ("disc.json", "torus.json", "torus_disc.json", "mirror.json"):
            run_config = load_config(os.path.join(CONFIGS, name), self.settings)
            self.assertGreaterEqual(len(run_config.problem.species), 1, name)

    def test_family_midpoint_for_missing_cutoffs(self):
        run_config = load_config(os.path.join(CONFIGS, "torus_disc.json"), self.settings)
        problem = run_config.problem
        for sp in problem.species:
            bare = Species(sp.label, sp.charge, sp.mass, problem.family)
            expected = family_cutoff(problem.family, bare, 0.5, problem.geometry.velocity_dim)
            self.assertEqual(sp.cutoff, expected)

    def test_zero_charge_names_species_and_line(self):
        text = DISC_CONFIG.replace('"charge": 1.0', '"charge": 0.0')
        path = self.write(text)
        with self.assertRaises(ConfigurationError) as caught:
            load_config(path, self.settings)
        message = caught.exception.errors[0]
        self.assertTrue(message.startswith(f"{path}:5: species.0.charge:"), message)
        self.assertIn("'ion'", message)

    def test_unknown_key_is_rejected(self):
        path = self.write(DISC_CONFIG.replace('"nx": 16', '"nx": 16, "nxx": 3'))
        with self.assertRaises(ConfigurationError) as caught:
            load_config(path, self.settings)
        self.assertTrue(any("solver.nxx" in m for m in caught.exception.errors))

    def test_every_error_is_reported(self):
        text = DISC_CONFIG.replace('"r0": 1.0', '"r0": -1.0').replace('"b": 10.0', '"b": "x"')
        with self.assertRaises(ConfigurationError) as caught:
            load_config(self.write(text), self.settings)
        joined = "\n".join(caught.exception.errors)
        self.assertIn("geometry.r0", joined)
        self.assertIn("field.b", joined)

    def test_missing_cutoff_without_family(self):
        raw = json.loads(DISC_CONFIG)
        del raw["species"][1]["cutoff"]
        with self.assertRaises(ConfigurationError) as caught:
            load_config(self.write(json.dumps(raw)), self.settings)
        self.assertIn("electron", caught.exception.errors[0])

    def test_mismatched_field(self):
        text = DISC_CONFIG.replace('"kind": "axial_constant", "b": 10.0',
                                   '"kind": "mirror_profile", "a0": 1.0')
        with self.assertRaises(ConfigurationError) as caught:
            load_config(self.write(text), self.settings)
        self.assertIn("does not match geometry", caught.exception.errors[0])

    def test_unreadable_and_malformed_files(self):
        with self.assertRaises(ConfigurationError):
            load_config(os.path.join(self.tmpdir, "missing.json"), self.settings)
        with self.assertRaises(ConfigurationError) as caught:
            load_config(self.write('{\n  "geometry": \n}'), self.settings)
        self.assertIn(":3: invalid JSON", caught.exception.errors[0])
        with self.assertRaises(ConfigurationError):
            load_config(self.write("[1, 2]"), self.settings)


class DiagnosticsTestCase(unittest.TestCase):
    """Line lookup and message formatting."""

    def test_locate(self):
        self.assertEqual(locate(DISC_CONFIG, ("field", "b")), 3)
        self.assertEqual(locate(DISC_CONFIG, ("species", 1, "charge")), 7)
        self.assertEqual(locate(DISC_CONFIG, ("species", 0, "cutoff", "wE")), 6)
        self.assertEqual(locate(DISC_CONFIG, ("nothing",)), 1)

    def test_diagnostics_format(self):
        messages = {"solver": {"nx": ["Must be greater than or equal to 8."]}}
        lines = diagnostics("run.json", DISC_CONFIG, messages)
        self.assertEqual(lines, ["run.json:10: solver.nx: Must be greater than or equal to 8."])

    def test_config_hash_ignores_key_order(self):
        self.assertEqual(config_hash({"a": 1, "b": [1, 2]}), config_hash({"b": [1, 2], "a": 1}))
        self.assertNotEqual(config_hash({"a": 1}), config_hash({"a": 2}))


class ValidatorsTestCase(unittest.TestCase):
    """Cross-field checks returning message lists."""

    def setUp(self):
        cutoff = CutoffSpec(E0=1.0, I0=1.0)
        self.ion = Species("ion", 1.0, 1.0, cutoff)
        self.electron = Species("electron", -1.0, 1.0, cutoff)
        self.cutoff = cutoff

    def test_species(self):
        self.assertEqual(validate_species([self.ion, self.electron]), [])
        self.assertTrue(validate_species([])[0].startswith("species:"))
        self.assertIn("ion", validate_species([self.ion, self.ion])[0])

    def test_geometry_field(self):
        torus = ToroidalCrossSection(RectSection(1.0, 3.0, -1.0, 1.0))
        self.assertEqual(validate_geometry_field(torus, PoloidalTorus(b=1.0, r0=2.0)), [])
        outside = validate_geometry_field(torus, PoloidalTorus(b=1.0, r0=5.0))
        self.assertTrue(outside[0].startswith("field:"))
        weak = validate_geometry_field(MirrorCylinder(r0=1.0, l=1.0),
                                       MirrorProfile(a0=1.0, a2=-2.0))
        self.assertIn("positive", weak[0])
        self.assertTrue(validate_geometry_field(RadialDisc(r0=1.0), AxialConstant(b=-1.0)))

    def test_family(self):
        self.assertEqual(validate_family([self.ion, self.electron], self.cutoff), [])
        self.assertEqual(validate_family([self.ion], None, required=False), [])
        self.assertTrue(validate_family([self.ion], None)[0].startswith("family:"))
        self.assertTrue(validate_family([self.ion], self.cutoff))

    def test_cutoffs(self):
        blocks = [{"label": "ion", "cutoff": None}]
        self.assertTrue(validate_cutoffs(blocks, None))
        self.assertEqual(validate_cutoffs(blocks, self.cutoff), [])


if __name__ == "__main__":
    unittest.main()
