"""
Tests for scenario parsing, serialization and object construction.
"""

import os
import tempfile
import unittest
from pathlib import Path

from dilatio.convex_geometry import EuclideanBall, HPolytope, IntersectionBody, ScaledBody
from dilatio.exceptions import ConfigError
from dilatio.measures import GaussianStd, PerturbedMeasure, ProductMeasure, UniformOnBody
from dilatio.qc_functions import Affine, MaxFloor, Radial
from dilatio.scenario import Scenario, dump_config, load_config, parse_config

SCENARIO_DIR = Path(__file__).resolve().parents[1] / "scenarios"

SMALL = """\
name: small
budget: {samples: 5000, seed: 7}
bodies:
  - {id: unit, kind: euclidean-ball, dimension: 1}
  - {id: square, kind: box, dimension: 2, half_widths: [1.0, 1.0]}
  - {id: big, kind: scaled, dimension: 2, body: square, factor: 2.0}
  - {id: both, kind: intersection, dimension: 2, members: [square, big]}
measures:
  - {id: gamma1, kind: gaussian-std, dimension: 1}
  - {id: uniform1, kind: uniform-on-body, body: unit}
  - {id: wobble, kind: perturbed, base: gamma1, amplitude: 0.2, frequency: 1.0, bound: 1.5}
  - {id: plane, kind: product, dimension: 2, factors: [gamma1, gamma1]}
  - {id: claimed, kind: gaussian-std, kappa: 1.5, kappa_source: notes}
functions:
  - {id: abs, kind: radial, p: 1.0}
  - {id: floored, kind: max-floor, inner: abs, level: 1.0}
  - {id: doubled, kind: affine, inner: abs, scale: 2.0}
checks:
  - {id: dilation-unit, check: dilation, params: {measure: gamma1, body: unit}}
  - {id: entropy-abs, check: entropy, params: {measure: gamma1, function: floored, variant: master}}
"""


class TestParse(unittest.TestCase):
    def test_small_scenario(self):
        config = parse_config(SMALL)
        self.assertEqual(config.name, "small")
        self.assertEqual(config.budget.samples, 5000)
        self.assertEqual(config.budget.nodes, 20)
        self.assertEqual([c.id for c in config.checks], ["dilation-unit", "entropy-abs"])
        self.assertEqual(config.output.report_csv, "report.csv")

    def test_empty_document(self):
        config = parse_config("")
        self.assertEqual(config.checks, [])
        self.assertEqual(config.name, "scenario")

    def test_malformed_yaml_has_location(self):
        with self.assertRaises(ConfigError) as ctx:
            parse_config("name: x\nchecks: [\n  {id: a\n")
        self.assertEqual(ctx.exception.exit_code, 3)
        self.assertIsNotNone(ctx.exception.details["line"])

    def test_schema_error_points_at_field(self):
        """Unknown kinds are reported at the offending node"""
        text = "bodies:\n  - {id: b, kind: torus}\n"
        with self.assertRaises(ConfigError) as ctx:
            parse_config(text)
        self.assertEqual(ctx.exception.details["line"], 2)
        self.assertEqual(ctx.exception.details["path"][:2], ["bodies", 0])

    def test_non_mapping_root(self):
        with self.assertRaises(ConfigError):
            parse_config("- 1\n- 2\n")

    def test_unknown_reference(self):
        text = SMALL.replace("body: unit}}", "body: missing}}")
        with self.assertRaises(ConfigError) as ctx:
            parse_config(text)
        self.assertIn("missing", ctx.exception.message)
        self.assertEqual(ctx.exception.details["path"], ["checks", 0, "params", "body"])

    def test_unknown_check_parameter(self):
        text = SMALL.replace("variant: master", "variant: master, flavour: odd")
        with self.assertRaises(ConfigError) as ctx:
            parse_config(text)
        self.assertIn("flavour", ctx.exception.message)

    def test_duplicate_ids(self):
        text = SMALL.replace("id: entropy-abs", "id: dilation-unit")
        with self.assertRaises(ConfigError):
            parse_config(text)

    def test_extra_fields_are_rejected(self):
        with self.assertRaises(ConfigError):
            parse_config("measures:\n  - {id: g, kind: gaussian-std, colour: red}\n")

    def test_dump_round_trip(self):
        config = parse_config(SMALL)
        self.assertEqual(parse_config(dump_config(config)), config)

    def test_load_config_from_file(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "s.yaml")
            Path(path).write_text(SMALL)
            self.assertEqual(load_config(path).name, "small")
            with self.assertRaises(ConfigError):
                load_config(os.path.join(tmp, "absent.yaml"))

    def test_shipped_scenarios_parse(self):
        for path in sorted(SCENARIO_DIR.glob("*.yaml")):
            config = load_config(path)
            self.assertTrue(config.name, path.name)


class TestScenarioObjects(unittest.TestCase):
    def setUp(self):
        self.scenario = Scenario(parse_config(SMALL))

    def test_bodies(self):
        self.assertIsInstance(self.scenario.body("unit"), EuclideanBall)
        self.assertIsInstance(self.scenario.body("square"), HPolytope)
        self.assertIsInstance(self.scenario.body("big"), ScaledBody)
        self.assertIsInstance(self.scenario.body("both"), IntersectionBody)
        self.assertIs(self.scenario.body("square"), self.scenario.body("square"))

    def test_measures(self):
        self.assertIsInstance(self.scenario.measure("gamma1"), GaussianStd)
        self.assertIsInstance(self.scenario.measure("uniform1"), UniformOnBody)
        wobble = self.scenario.measure("wobble")
        self.assertIsInstance(wobble, PerturbedMeasure)
        self.assertAlmostEqual(wobble.kappa, 8.0 / 9.0)
        self.assertIsInstance(self.scenario.measure("plane"), ProductMeasure)
        claimed = self.scenario.measure("claimed")
        self.assertEqual((claimed.kappa, claimed.kappa_source), (1.5, "notes"))

    def test_functions(self):
        self.assertIsInstance(self.scenario.function("abs"), Radial)
        self.assertIsInstance(self.scenario.function("floored"), MaxFloor)
        doubled = self.scenario.function("doubled")
        self.assertIsInstance(doubled, Affine)
        self.assertAlmostEqual(doubled.value([-1.5]), 3.0)

    def test_missing_field(self):
        config = parse_config("functions:\n  - {id: s, kind: shifted-radial, c: 1.0}\n")
        with self.assertRaises(ConfigError) as ctx:
            Scenario(config).function("s")
        self.assertEqual(ctx.exception.details["field"], "s")

    def test_construction_errors_become_config_errors(self):
        config = parse_config("bodies:\n  - {id: flat, kind: euclidean-ball, radius: -1.0}\n")
        with self.assertRaises(ConfigError) as ctx:
            Scenario(config).body("flat")
        self.assertEqual(ctx.exception.details["id"], "flat")

    def test_reference_cycle(self):
        text = ("bodies:\n"
                "  - {id: a, kind: scaled, body: b, factor: 2.0}\n"
                "  - {id: b, kind: scaled, body: a, factor: 2.0}\n")
        with self.assertRaises(ConfigError):
            Scenario(parse_config(text)).body("a")


if __name__ == "__main__":
    unittest.main()
