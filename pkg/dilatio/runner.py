"""
Scenario execution: check dispatch over a worker pool, report files and
parameter sweeps.
"""
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple
import json
import logging
import zlib

import pandas as pd

from .config import settings
from .convex_geometry import interval
from .exceptions import (
    EXIT_CONFIG_ERROR,
    EXIT_FAIL,
    EXIT_INCONCLUSIVE,
    EXIT_OK,
    ConfigError,
    DilatioException,
    error_payload,
)
from .scenario import Scenario
from .schemas import CheckResult, CheckSpec, EstimationBudget, ScenarioConfig, ScenarioReport
from .verifiers import (
    check_borell_lemma,
    check_coarea,
    check_dilation,
    check_entropy_bounds,
    check_gaussian_suite,
    check_isoperimetry,
    check_lsi,
    check_moment_suite,
    check_negative_suite,
    check_one_sided_dilation,
    check_stability,
    reconstruct_dilation,
    sharpness_probes,
)

logger = logging.getLogger(__name__)

REPORT_COLUMNS = ["id", "lhs", "rhs", "margin", "stderr", "status", "seed", "kappa", "kappa_source"]
SWEEP_COLUMNS = ["value", "id", "lhs", "rhs", "margin", "stderr", "status"]
FLOAT_FORMAT = "%.17g"

CheckRunner = Callable[[Scenario, Dict[str, Any], EstimationBudget, str], List[CheckResult]]


def _optional(params: Dict[str, Any], key: str, cast=float):
    value = params.get(key)
    return None if value is None else cast(value)


def _pairs(params: Dict[str, Any]) -> List[Tuple[float, float]]:
    return [(float(p), float(q)) for p, q in params.get("pairs", [(1, 2), (1, 3), (2, 4)])]


def _run_dilation(s, params, budget, check_id):
    if "half_width" in params:
        K = interval(float(params["half_width"]))
    else:
        K = s.body(params["body"])
    return [check_dilation(s.measure(params["measure"]), K, _optional(params, "kappa"), budget, check_id)]


def _run_one_sided(s, params, budget, check_id):
    return [check_one_sided_dilation(s.measure(params["measure"]), float(params["x"]),
                                     _optional(params, "kappa"), budget, check_id)]


def _run_entropy(s, params, budget, check_id):
    return [check_entropy_bounds(s.measure(params["measure"]), s.function(params["function"]),
                                 _optional(params, "kappa"), params.get("variant", "master"), budget, check_id)]


def _run_lsi(s, params, budget, check_id):
    return [check_lsi(s.measure(params["measure"]), s.function(params["function"]), _optional(params, "kappa"),
                      params.get("variant", "cauchy-schwarz"), budget, _optional(params, "poincare"), check_id)]


def _run_gaussian(s, params, budget, check_id):
    sigmas = [float(v) for v in params.get("sigmas", (0.5, 2.0))]
    return check_gaussian_suite(s.function(params["function"]), budget, sigmas, check_id)


def _run_moment(s, params, budget, check_id):
    kwargs = {}
    if "t_grid" in params:
        kwargs["t_grid"] = [float(t) for t in params["t_grid"]]
    if "ceiling" in params:
        kwargs["ceiling"] = float(params["ceiling"])
    return check_moment_suite(s.measure(params["measure"]), s.function(params["function"]),
                              _optional(params, "kappa"), _pairs(params), _optional(params, "alpha"), budget,
                              check_id=check_id, **kwargs)


def _run_negative(s, params, budget, check_id):
    kwargs = {}
    if "p_grid" in params:
        kwargs["p_grid"] = [float(p) for p in params["p_grid"]]
    if "t_grid" in params:
        kwargs["t_grid"] = [float(t) for t in params["t_grid"]]
    if "eps" in params:
        kwargs["eps"] = float(params["eps"])
    return check_negative_suite(s.measure(params["measure"]), s.function(params["function"]),
                                _optional(params, "kappa"), budget=budget, check_id=check_id, **kwargs)


def _run_isoperimetry(s, params, budget, check_id):
    return check_isoperimetry(s.measure(params["measure"]), s.body(params["body"]), _optional(params, "kappa"),
                              float(params.get("p", 2.0)), budget, check_id)


def _run_coarea(s, params, budget, check_id):
    return [check_coarea(s.measure(params["measure"]), s.function(params["function"]), float(params.get("p", 1.0)),
                         params.get("sign", "positive"), budget, check_id)]


def _run_reconstruction(s, params, budget, check_id):
    kwargs = {"sigmas": [float(v) for v in params["sigmas"]]} if "sigmas" in params else {}
    result, _ = reconstruct_dilation(s.measure(params["measure"]), s.body(params["body"]),
                                     _optional(params, "kappa"), budget=budget, check_id=check_id, **kwargs)
    return [result]


def _run_stability(s, params, budget, check_id):
    return [check_stability(
        params["mode"],
        measure=s.measure(params["measure"]) if "measure" in params else None,
        bodies=[s.body(ref) for ref in params.get("bodies", [])],
        function=s.function(params["function"]) if "function" in params else None,
        factors=[s.measure(ref) for ref in params.get("factors", [])],
        kappa=_optional(params, "kappa"),
        budget=budget,
        instances=int(params.get("instances", 5)),
        check_id=check_id,
    )]


def _run_sharpness(s, params, budget, check_id):
    kwargs = {}
    if "gaussian_radii" in params:
        kwargs["gaussian_radii"] = [float(t) for t in params["gaussian_radii"]]
    if "borell_grid" in params:
        kwargs["borell_grid"] = [float(t) for t in params["borell_grid"]]
    results = sharpness_probes(budget, **kwargs)
    return [r.model_copy(update={"check_id": f"{check_id}.{r.check_id.split('.', 1)[-1]}"}) for r in results]


def _run_borell(s, params, budget, check_id):
    kwargs = {"t_grid": [float(t) for t in params["t_grid"]]} if "t_grid" in params else {}
    return check_borell_lemma(s.measure(params["measure"]), s.body(params["body"]), budget=budget,
                              check_id=check_id, **kwargs)


CHECKS: Dict[str, CheckRunner] = {
    "dilation": _run_dilation,
    "one-sided-dilation": _run_one_sided,
    "entropy": _run_entropy,
    "lsi": _run_lsi,
    "gaussian-suite": _run_gaussian,
    "moment-suite": _run_moment,
    "negative-suite": _run_negative,
    "isoperimetry": _run_isoperimetry,
    "coarea": _run_coarea,
    "reconstruction": _run_reconstruction,
    "stability": _run_stability,
    "sharpness": _run_sharpness,
    "borell": _run_borell,
}


def check_seed(base: int, check_id: str) -> int:
    """Per-check seed, independent of scheduling order."""
    return (int(base) + zlib.crc32(check_id.encode())) % 2 ** 32


def check_budget(config: ScenarioConfig, spec: CheckSpec, seed: int, samples: Optional[int] = None) -> EstimationBudget:
    count = spec.samples or samples or config.budget.samples
    return EstimationBudget(samples=count, nodes=config.budget.nodes, tol=config.budget.tol,
                            seed=check_seed(seed, spec.id))


def _prepare(scenario: Scenario, spec: CheckSpec) -> None:
    """Build the objects a check references before it enters the pool."""
    params = spec.params
    for key, build in (("measure", scenario.measure), ("body", scenario.body), ("function", scenario.function)):
        if key in params:
            build(params[key])
    for ref in params.get("bodies", []):
        scenario.body(ref)
    for ref in params.get("factors", []):
        scenario.measure(ref)


def _execute(scenario: Scenario, spec: CheckSpec, budget: EstimationBudget) -> Tuple[List[CheckResult], Optional[dict]]:
    try:
        results = CHECKS[spec.check](scenario, spec.params, budget, spec.id)
        return results, None
    except KeyError as exc:
        error = ConfigError(f"Check '{spec.id}' is missing parameter {exc}", {"check": spec.id})
    except (TypeError, ValueError) as exc:
        error = ConfigError(f"Check '{spec.id}' has an invalid parameter: {exc}", {"check": spec.id})
    except DilatioException as exc:
        error = exc
        error.details = {"check": spec.id, **error.details}
    payload = error_payload(error)
    payload["exit_code"] = error.exit_code
    return [], payload


def run_scenario(config: ScenarioConfig, seed: Optional[int] = None, samples: Optional[int] = None,
                 checks: Optional[Sequence[str]] = None, threads: Optional[int] = None) -> ScenarioReport:
    """Run every (or every selected) check of a scenario on a worker pool.

    Args:
        config: Validated scenario
        seed: Base seed override; each check derives its own seed from it
        samples: Monte Carlo sample override for checks without their own count
        checks: Optional filter of check ids
        threads: Worker count (defaults to settings.threads)

    Returns:
        ScenarioReport with results sorted by check id
    """
    base_seed = config.budget.seed if seed is None else int(seed)
    specs = list(config.checks)
    if checks:
        unknown = sorted(set(checks) - {spec.id for spec in specs})
        if unknown:
            raise ConfigError(f"Unknown check ids in filter: {unknown}", {"checks": unknown})
        specs = [spec for spec in specs if spec.id in set(checks)]

    scenario = Scenario(config)
    for spec in specs:
        _prepare(scenario, spec)

    workers = max(1, int(threads or settings.threads))
    logger.info(f"Running {len(specs)} checks of '{config.name}' on {workers} workers (seed {base_seed})")
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(_execute, scenario, spec, check_budget(config, spec, base_seed, samples)) for spec in specs]
        outcomes = [future.result() for future in futures]

    results = [r for found, _ in outcomes for r in found]
    errors = [error for _, error in outcomes if error is not None]
    report = ScenarioReport(scenario=config.name, seed=base_seed, results=sorted(results, key=lambda r: r.check_id),
                            errors=errors)
    logger.info(f"Scenario '{config.name}' finished: {report.summary()} with {len(errors)} errors")
    return report


def exit_code(report: ScenarioReport) -> int:
    codes = {error.get("exit_code", EXIT_FAIL) for error in report.errors}
    summary = report.summary()
    if EXIT_CONFIG_ERROR in codes:
        return EXIT_CONFIG_ERROR
    if summary["fail"] or EXIT_FAIL in codes:
        return EXIT_FAIL
    if summary["inconclusive"] or codes:
        return EXIT_INCONCLUSIVE
    return EXIT_OK


def report_frame(results: Sequence[CheckResult]) -> pd.DataFrame:
    rows = [{
        "id": r.check_id, "lhs": r.lhs.value, "rhs": r.rhs.value, "margin": r.margin, "stderr": r.std_error,
        "status": r.status, "seed": r.seed, "kappa": r.kappa, "kappa_source": r.kappa_source,
    } for r in results]
    return pd.DataFrame(rows, columns=REPORT_COLUMNS).astype({"seed": "Int64"})


def write_reports(report: ScenarioReport, config: ScenarioConfig, out: Optional[Path] = None) -> Tuple[Path, Path]:
    """report.json and report.csv under the output directory."""
    directory = Path(out or config.output.directory)
    directory.mkdir(parents=True, exist_ok=True)
    json_path = directory / config.output.report_json
    csv_path = directory / config.output.report_csv
    document = {
        "scenario": report.scenario,
        "seed": report.seed,
        "results": [r.model_dump(mode="json") for r in report.sorted_results()],
        "errors": report.errors,
        "summary": report.summary(),
    }
    json_path.write_text(json.dumps(document, indent=2, sort_keys=True, default=str))
    report_frame(report.sorted_results()).to_csv(csv_path, index=False, float_format=FLOAT_FORMAT)
    logger.info(f"Reports written to {json_path} and {csv_path}")
    return json_path, csv_path


def parse_sweep(argument: str, config: ScenarioConfig) -> Tuple[CheckSpec, str, List[float]]:
    """'check.param=a,b,c' (or 'param=a,b,c' when one check carries param)."""
    if "=" not in argument:
        raise ConfigError("Sweep must look like param=a,b,c", {"sweep": argument})
    target, values = argument.split("=", 1)
    if "." in target:
        check_id, param = target.rsplit(".", 1)
        specs = [spec for spec in config.checks if spec.id == check_id]
    else:
        param = target
        specs = [spec for spec in config.checks if param in spec.params]
    if len(specs) != 1:
        raise ConfigError(f"Sweep target '{target}' must name exactly one check", {"matches": [s.id for s in specs]})
    spec = specs[0]
    if param in spec.params and isinstance(spec.params[param], (list, dict, str, bool)):
        raise ConfigError(f"Sweep parameter '{param}' is not numeric", {"check": spec.id, "value": spec.params[param]})
    try:
        grid = [float(v) for v in values.split(",") if v.strip()]
    except ValueError as exc:
        raise ConfigError(f"Sweep values must be numeric: {values}", {"sweep": argument}) from exc
    if not grid:
        raise ConfigError("Sweep needs at least one value", {"sweep": argument})
    return spec, param, grid


def run_sweep(config: ScenarioConfig, argument: str, seed: Optional[int] = None,
              samples: Optional[int] = None) -> pd.DataFrame:
    """Rerun one check over a grid of one numeric parameter; one row per result."""
    spec, param, grid = parse_sweep(argument, config)
    base_seed = config.budget.seed if seed is None else int(seed)
    scenario = Scenario(config)
    _prepare(scenario, spec)
    rows = []
    for value in grid:
        variant = spec.model_copy(update={"params": {**spec.params, param: value}})
        results, error = _execute(scenario, variant, check_budget(config, spec, base_seed, samples))
        if error is not None:
            raise ConfigError(f"Sweep of '{spec.id}' failed at {param}={value}: {error['error']['message']}",
                              error["error"]["details"])
        for r in results:
            rows.append({"value": value, "id": r.check_id, "lhs": r.lhs.value, "rhs": r.rhs.value,
                         "margin": r.margin, "stderr": r.std_error, "status": r.status})
    logger.info(f"Sweep of {spec.id}.{param} over {len(grid)} values produced {len(rows)} rows")
    return pd.DataFrame(rows, columns=SWEEP_COLUMNS)


def write_sweep(frame: pd.DataFrame, config: ScenarioConfig, out: Optional[Path] = None) -> Path:
    directory = Path(out or config.output.directory)
    directory.mkdir(parents=True, exist_ok=True)
    path = directory / config.output.sweep_csv
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT)
    return path
