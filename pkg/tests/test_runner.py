"""
Tests for scenario execution, report files and sweeps.
"""

import json
import tempfile
import unittest
from pathlib import Path

import pandas as pd

from dilatio.exceptions import ConfigError
from dilatio.runner import (
    REPORT_COLUMNS,
    SWEEP_COLUMNS,
    check_budget,
    check_seed,
    exit_code,
    parse_sweep,
    report_frame,
    run_scenario,
    run_sweep,
    write_reports,
)
from dilatio.scenario import load_config, parse_config
from dilatio.schemas import CheckResult, Estimate, ScenarioReport

SCENARIO_DIR = Path(__file__).resolve().parents[1] / "scenarios"

SCENARIO = """\
name: runner
budget: {samples: 20000, seed: 11}
bodies:
  - {id: unit, kind: euclidean-ball, dimension: 1}
  - {id: thin, kind: euclidean-ball, dimension: 1, radius: 0.01}
  - {id: ball3, kind: euclidean-ball, dimension: 3}
measures:
  - {id: gamma1, kind: gaussian-std}
  - {id: gamma3, kind: gaussian-std, dimension: 3}
functions:
  - {id: square, kind: radial, p: 2.0}
checks:
  - {id: dilation-unit, check: dilation, params: {measure: gamma1, body: unit}}
  - {id: dilation-thin, check: dilation, params: {measure: gamma1, body: thin, kappa: 5.0}}
  - {id: dilation-width, check: dilation, params: {measure: gamma1, half_width: 0.5}}
  - {id: entropy-square, check: entropy, params: {measure: gamma1, function: square, variant: c1}}
  - {id: dilation-ball3, check: dilation, params: {measure: gamma3, body: ball3}, samples: 5000}
"""


def result(check_id, status, margin=0.0):
    return CheckResult(check_id=check_id, lhs=Estimate.exact(0.0), rhs=Estimate.exact(margin), margin=margin,
                       tolerance=0.0, status=status)


class TestSeedsAndBudgets(unittest.TestCase):
    def test_check_seed_depends_only_on_base_and_id(self):
        self.assertEqual(check_seed(11, "a"), check_seed(11, "a"))
        self.assertNotEqual(check_seed(11, "a"), check_seed(11, "b"))
        self.assertNotEqual(check_seed(11, "a"), check_seed(12, "a"))
        self.assertLess(check_seed(2 ** 40, "a"), 2 ** 32)

    def test_sample_precedence(self):
        config = parse_config(SCENARIO)
        by_id = {spec.id: spec for spec in config.checks}
        self.assertEqual(check_budget(config, by_id["dilation-unit"], 11).samples, 20000)
        self.assertEqual(check_budget(config, by_id["dilation-unit"], 11, samples=300).samples, 300)
        self.assertEqual(check_budget(config, by_id["dilation-ball3"], 11, samples=300).samples, 5000)


class TestRunScenario(unittest.TestCase):
    def setUp(self):
        self.config = parse_config(SCENARIO)

    def test_statuses_and_order(self):
        report = run_scenario(self.config, threads=2)
        ids = [r.check_id for r in report.results]
        self.assertEqual(ids, sorted(ids))
        by_id = {r.check_id: r for r in report.results}
        self.assertEqual(by_id["dilation-unit"].status, "pass")
        self.assertEqual(by_id["dilation-thin"].status, "fail")
        self.assertEqual(by_id["dilation-width"].status, "pass")
        self.assertEqual(by_id["entropy-square"].status, "pass")
        self.assertEqual(by_id["dilation-ball3"].rhs.method, "monte-carlo+coupled-ladder")
        self.assertEqual(report.errors, [])
        self.assertEqual(exit_code(report), 1)

    def test_thread_count_does_not_change_results(self):
        one = run_scenario(self.config, threads=1)
        many = run_scenario(self.config, threads=4)
        self.assertEqual([r.model_dump() for r in one.results], [r.model_dump() for r in many.results])

    def test_check_filter(self):
        report = run_scenario(self.config, checks=["dilation-unit"], threads=1)
        self.assertEqual([r.check_id for r in report.results], ["dilation-unit"])
        self.assertEqual(exit_code(report), 0)
        with self.assertRaises(ConfigError):
            run_scenario(self.config, checks=["nope"])

    def test_check_errors_are_recorded(self):
        text = SCENARIO + "  - {id: borell-small, check: borell, params: {measure: gamma1, body: thin}}\n"
        report = run_scenario(parse_config(text), checks=["borell-small"], threads=1)
        self.assertEqual(report.results, [])
        self.assertEqual(report.errors[0]["error"]["type"], "DomainError")
        self.assertEqual(report.errors[0]["error"]["details"]["check"], "borell-small")
        self.assertEqual(exit_code(report), 1)

    def test_missing_parameter_is_a_config_error(self):
        text = SCENARIO + "  - {id: bare, check: one-sided-dilation, params: {measure: gamma1}}\n"
        report = run_scenario(parse_config(text), checks=["bare"], threads=1)
        self.assertEqual(report.errors[0]["error"]["type"], "ConfigError")
        self.assertEqual(exit_code(report), 3)


class TestReferenceSuite(unittest.TestCase):
    def test_larger_budget_flips_no_status(self):
        """Test that quadrupling the sample budget leaves every verdict of the shipped suite unchanged"""
        config = load_config(SCENARIO_DIR / "reference_suite.yaml")
        base = run_scenario(config)
        larger = run_scenario(config, samples=4 * config.budget.samples)
        self.assertEqual(base.errors, [])
        self.assertEqual(exit_code(base), 0)
        statuses = {r.check_id: r.status for r in base.results}
        self.assertEqual(set(statuses.values()), {"pass"})
        self.assertEqual({r.check_id: r.status for r in larger.results}, statuses)


class TestExitCode(unittest.TestCase):
    def test_priority(self):
        def report(statuses, codes=()):
            return ScenarioReport(scenario="s", seed=0,
                                  results=[result(f"c{i}", s) for i, s in enumerate(statuses)],
                                  errors=[{"error": {}, "exit_code": c} for c in codes])
        self.assertEqual(exit_code(report([])), 0)
        self.assertEqual(exit_code(report(["pass", "pass"])), 0)
        self.assertEqual(exit_code(report(["pass", "inconclusive"])), 2)
        self.assertEqual(exit_code(report(["inconclusive", "fail"])), 1)
        self.assertEqual(exit_code(report(["pass"], codes=[1])), 1)
        self.assertEqual(exit_code(report(["fail"], codes=[3])), 3)
        self.assertEqual(exit_code(ScenarioReport(scenario="s", seed=0, errors=[{"error": {}}])), 1)


class TestReports(unittest.TestCase):
    def test_frame_columns(self):
        frame = report_frame([result("a", "pass", 1.0), result("b", "fail", -1.0)])
        self.assertEqual(list(frame.columns), REPORT_COLUMNS)
        self.assertEqual(frame["status"].tolist(), ["pass", "fail"])
        self.assertTrue(frame["seed"].isna().all())

    def test_written_files(self):
        config = parse_config(SCENARIO)
        report = run_scenario(config, checks=["dilation-unit", "dilation-thin"], threads=1)
        with tempfile.TemporaryDirectory() as tmp:
            json_path, csv_path = write_reports(report, config, Path(tmp) / "out")
            document = json.loads(json_path.read_text())
            self.assertEqual(document["scenario"], "runner")
            self.assertEqual(document["seed"], 11)
            self.assertEqual(document["summary"], {"pass": 1, "fail": 1, "inconclusive": 0})
            self.assertEqual([r["check_id"] for r in document["results"]], ["dilation-thin", "dilation-unit"])
            frame = pd.read_csv(csv_path)
            self.assertEqual(list(frame.columns), REPORT_COLUMNS)
            self.assertEqual(frame.loc[0, "kappa"], 5.0)
            self.assertEqual(frame.loc[0, "kappa_source"], "user")


class TestSweep(unittest.TestCase):
    def setUp(self):
        self.config = parse_config(SCENARIO)

    def test_parse(self):
        spec, param, grid = parse_sweep("dilation-thin.kappa=0.5,5", self.config)
        self.assertEqual((spec.id, param, grid), ("dilation-thin", "kappa", [0.5, 5.0]))
        spec, param, _ = parse_sweep("half_width=0.5,1", self.config)
        self.assertEqual((spec.id, param), ("dilation-width", "half_width"))

    def test_parse_errors(self):
        for argument in ("kappa", "dilation-unit.kappa=a,b", "dilation-unit.kappa=", "nope.kappa=1",
                         "dilation-unit.measure=1,2"):
            with self.assertRaises(ConfigError, msg=argument):
                parse_sweep(argument, self.config)

    def test_kappa_sweep(self):
        frame = run_sweep(self.config, "dilation-thin.kappa=0.5,2,5")
        self.assertEqual(list(frame.columns), SWEEP_COLUMNS)
        self.assertEqual(frame["value"].tolist(), [0.5, 2.0, 5.0])
        self.assertEqual(frame["status"].tolist(), ["pass", "pass", "fail"])
        self.assertTrue((frame["id"] == "dilation-thin").all())


if __name__ == "__main__":
    unittest.main()
