"""
Scenario files: YAML parsing with located diagnostics, serialization and
construction of the referenced measures, bodies and functions.
"""
from dataclasses import dataclass, field
from functools import partial
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union
import logging

import numpy as np
import yaml
from pydantic import ValidationError

from .convex_geometry import (
    Ellipsoid,
    EuclideanBall,
    HPolytope,
    IntersectionBody,
    LpBall,
    ScaledBody,
    SymmetricConvexBody,
)
from .exceptions import ConfigError, DilatioException
from .measures import (
    ExponentialOneSided,
    ExponentialSymmetric,
    GaussianMeasure,
    GaussianStd,
    LogConcaveCustom,
    Measure,
    PerturbedMeasure,
    ProductMeasure,
    UniformOnBody,
)
from .qc_functions import (
    Affine,
    Constant,
    FSigma,
    GaugePower,
    MaxFloor,
    MinCap,
    PowerOf,
    QcFunction,
    Radial,
    ShiftedRadial,
)
from .schemas import BodySpec, FunctionSpec, MeasureSpec, ScenarioConfig

logger = logging.getLogger(__name__)

# check parameters naming objects, by the section they refer to
REFERENCE_PARAMS = {
    "measure": "measures",
    "factors": "measures",
    "body": "bodies",
    "bodies": "bodies",
    "function": "functions",
}

# accepted parameters per check type
CHECK_PARAMS = {
    "dilation": {"measure", "body", "half_width", "kappa"},
    "one-sided-dilation": {"measure", "x", "kappa"},
    "entropy": {"measure", "function", "kappa", "variant"},
    "lsi": {"measure", "function", "kappa", "variant", "poincare"},
    "gaussian-suite": {"function", "sigmas"},
    "moment-suite": {"measure", "function", "kappa", "pairs", "alpha", "t_grid", "ceiling"},
    "negative-suite": {"measure", "function", "kappa", "p_grid", "eps", "t_grid"},
    "isoperimetry": {"measure", "body", "kappa", "p"},
    "coarea": {"measure", "function", "p", "sign"},
    "reconstruction": {"measure", "body", "kappa", "sigmas"},
    "stability": {"mode", "measure", "bodies", "function", "factors", "kappa", "instances"},
    "sharpness": {"gaussian_radii", "borell_grid"},
    "borell": {"measure", "body", "t_grid"},
}


def _locate(node: Optional[yaml.Node], path: Sequence[Union[str, int]]) -> Dict[str, int]:
    """Line/column (1-based) of the deepest node along a validation error path."""
    best = node
    for key in path:
        if isinstance(best, yaml.MappingNode):
            match = next((v for k, v in best.value if getattr(k, "value", None) == key), None)
            if match is None:
                break
            best = match
        elif isinstance(best, yaml.SequenceNode) and isinstance(key, int) and key < len(best.value):
            best = best.value[key]
        else:
            break
    if best is None:
        return {"line": 1, "column": 1}
    return {"line": best.start_mark.line + 1, "column": best.start_mark.column + 1}


def parse_config(text: str, source: str = "<string>") -> ScenarioConfig:
    """Parse and validate a scenario document.

    Raises:
        ConfigError: malformed YAML, schema violations or unresolved references,
            with line and column in `details`
    """
    try:
        root = yaml.compose(text, Loader=yaml.SafeLoader)
        data = yaml.safe_load(text)
    except yaml.MarkedYAMLError as exc:
        mark = exc.problem_mark
        details = {"source": source, "line": mark.line + 1 if mark else None,
                   "column": mark.column + 1 if mark else None}
        raise ConfigError(f"Malformed scenario YAML: {exc.problem}", details) from exc
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError("Scenario must be a mapping", {"source": source, **_locate(root, [])})
    try:
        config = ScenarioConfig.model_validate(data)
    except ValidationError as exc:
        first = exc.errors()[0]
        loc = list(first["loc"])
        raise ConfigError(
            f"Invalid scenario at {'.'.join(map(str, loc)) or '<root>'}: {first['msg']}",
            {"source": source, "path": loc, **_locate(root, loc), "errors": len(exc.errors())},
        ) from exc
    _check_references(config, root, source)
    return config


def load_config(path: Union[str, Path]) -> ScenarioConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"Cannot read scenario file {path}", {"source": str(path)}) from exc
    return parse_config(text, str(path))


def dump_config(config: ScenarioConfig) -> str:
    """Serialize back to YAML; parse(dump(c)) == c."""
    return yaml.safe_dump(config.model_dump(mode="json", exclude_none=True), sort_keys=False)


def _ids(items) -> List[str]:
    return [item.id for item in items]


def _check_references(config: ScenarioConfig, root, source: str) -> None:
    known = {
        "measures": _ids(config.measures),
        "bodies": _ids(config.bodies),
        "functions": _ids(config.functions),
    }
    for section, ids in known.items():
        duplicates = {i for i in ids if ids.count(i) > 1}
        if duplicates:
            raise ConfigError(f"Duplicate {section} ids: {sorted(duplicates)}", {"source": source, **_locate(root, [section])})

    def require(ref: str, section: str, path: list) -> None:
        if ref not in known[section]:
            raise ConfigError(f"Unknown {section[:-1]} id '{ref}'", {"source": source, "path": path, **_locate(root, path)})

    for i, spec in enumerate(config.measures):
        if spec.body:
            require(spec.body, "bodies", ["measures", i, "body"])
        if spec.base:
            require(spec.base, "measures", ["measures", i, "base"])
        for j, ref in enumerate(spec.factors or []):
            require(ref, "measures", ["measures", i, "factors", j])
    for i, spec in enumerate(config.bodies):
        if spec.body:
            require(spec.body, "bodies", ["bodies", i, "body"])
        for j, ref in enumerate(spec.members or []):
            require(ref, "bodies", ["bodies", i, "members", j])
    for i, spec in enumerate(config.functions):
        if spec.body:
            require(spec.body, "bodies", ["functions", i, "body"])
        if spec.inner:
            require(spec.inner, "functions", ["functions", i, "inner"])
    check_ids = _ids(config.checks)
    duplicates = {i for i in check_ids if check_ids.count(i) > 1}
    if duplicates:
        raise ConfigError(f"Duplicate check ids: {sorted(duplicates)}", {"source": source, **_locate(root, ["checks"])})
    for i, check in enumerate(config.checks):
        unknown = sorted(set(check.params) - CHECK_PARAMS[check.check])
        if unknown:
            path = ["checks", i, "params"]
            raise ConfigError(f"Unknown parameters for {check.check} check '{check.id}': {unknown}",
                              {"source": source, "path": path, **_locate(root, path)})
        for key, section in REFERENCE_PARAMS.items():
            value = check.params.get(key)
            if value is None:
                continue
            refs = value if isinstance(value, list) else [value]
            for j, ref in enumerate(refs):
                path = ["checks", i, "params", key] + ([j] if isinstance(value, list) else [])
                if not isinstance(ref, str):
                    raise ConfigError(f"Parameter '{key}' must name ids", {"source": source, "path": path, **_locate(root, path)})
                require(ref, section, path)


@dataclass
class Scenario:
    """A validated config with its objects built lazily and cached by id."""
    config: ScenarioConfig
    _measures: Dict[str, Measure] = field(default_factory=dict)
    _bodies: Dict[str, SymmetricConvexBody] = field(default_factory=dict)
    _functions: Dict[str, QcFunction] = field(default_factory=dict)
    _building: set = field(default_factory=set)

    def _spec(self, section: str, ref: str):
        for spec in getattr(self.config, section):
            if spec.id == ref:
                return spec
        raise ConfigError(f"Unknown {section[:-1]} id '{ref}'")

    def _guard(self, key: str):
        if key in self._building:
            raise ConfigError(f"Reference cycle through '{key}'")
        self._building.add(key)

    def body(self, ref: str) -> SymmetricConvexBody:
        if ref not in self._bodies:
            self._guard(f"bodies:{ref}")
            try:
                self._bodies[ref] = self._build_body(self._spec("bodies", ref))
            finally:
                self._building.discard(f"bodies:{ref}")
        return self._bodies[ref]

    def measure(self, ref: str) -> Measure:
        if ref not in self._measures:
            self._guard(f"measures:{ref}")
            try:
                self._measures[ref] = self._build_measure(self._spec("measures", ref))
            finally:
                self._building.discard(f"measures:{ref}")
        return self._measures[ref]

    def function(self, ref: str) -> QcFunction:
        if ref not in self._functions:
            self._guard(f"functions:{ref}")
            try:
                self._functions[ref] = self._build_function(self._spec("functions", ref))
            finally:
                self._building.discard(f"functions:{ref}")
        return self._functions[ref]

    @staticmethod
    def _need(spec, name: str) -> Any:
        value = getattr(spec, name)
        if value is None:
            raise ConfigError(f"{spec.kind} '{spec.id}' needs '{name}'", {"id": spec.id, "field": name})
        return value

    def _build_body(self, spec: BodySpec) -> SymmetricConvexBody:
        need = partial(self._need, spec)
        try:
            if spec.kind == "euclidean-ball":
                return EuclideanBall(spec.dimension, spec.radius if spec.radius is not None else 1.0)
            if spec.kind == "ellipsoid":
                return Ellipsoid(need("semi_axes"))
            if spec.kind == "lp-ball":
                return LpBall(spec.dimension, need("p"), spec.radius if spec.radius is not None else 1.0)
            if spec.kind == "box":
                return HPolytope.box(need("half_widths"))
            if spec.kind == "h-polytope":
                return HPolytope(need("normals"), need("offsets"))
            if spec.kind == "scaled":
                return ScaledBody(self.body(need("body")), need("factor"))
            return IntersectionBody([self.body(ref) for ref in need("members")])
        except ConfigError:
            raise
        except DilatioException as exc:
            raise ConfigError(f"Cannot build body '{spec.id}': {exc.message}", {"id": spec.id, **exc.details}) from exc

    def _build_measure(self, spec: MeasureSpec) -> Measure:
        need = partial(self._need, spec)
        try:
            if spec.kind == "gaussian-std":
                m = GaussianStd(spec.dimension)
            elif spec.kind == "gaussian":
                mean = spec.mean if spec.mean is not None else [0.0] * spec.dimension
                variance = spec.variance if spec.variance is not None else 1.0
                m = GaussianMeasure(mean, variance * np.eye(len(mean)))
            elif spec.kind == "exponential-one-sided":
                m = ExponentialOneSided()
            elif spec.kind == "exponential-symmetric":
                m = ExponentialSymmetric()
            elif spec.kind == "uniform-on-body":
                m = UniformOnBody(self.body(need("body")))
            elif spec.kind == "log-concave-custom":
                m = LogConcaveCustom(need("exponent"), spec.half_width)
            elif spec.kind == "product":
                m = ProductMeasure([self.measure(ref) for ref in need("factors")])
            else:
                m = PerturbedMeasure(self.measure(need("base")), need("amplitude"), need("frequency"), need("bound"))
            return m.claim_kappa(spec.kappa, spec.kappa_source)
        except ConfigError:
            raise
        except DilatioException as exc:
            raise ConfigError(f"Cannot build measure '{spec.id}': {exc.message}", {"id": spec.id, **exc.details}) from exc

    def _build_function(self, spec: FunctionSpec) -> QcFunction:
        need = partial(self._need, spec)
        try:
            if spec.kind == "gauge-power":
                return GaugePower(self.body(need("body")), spec.p if spec.p is not None else 1.0)
            if spec.kind == "radial":
                return Radial(spec.p if spec.p is not None else 1.0, spec.dimension)
            if spec.kind == "shifted-radial":
                return ShiftedRadial(need("c"), need("s"), spec.dimension)
            if spec.kind == "min-cap":
                return MinCap(self.function(need("inner")), need("level"))
            if spec.kind == "max-floor":
                return MaxFloor(self.function(need("inner")), need("level"))
            if spec.kind == "f-sigma":
                return FSigma(self.body(need("body")), need("sigma"))
            if spec.kind == "constant":
                return Constant(need("value"), spec.dimension)
            if spec.kind == "affine":
                return Affine(self.function(need("inner")), need("scale"), spec.shift if spec.shift is not None else 0.0)
            return PowerOf(self.function(need("inner")), need("p"))
        except ConfigError:
            raise
        except DilatioException as exc:
            raise ConfigError(f"Cannot build function '{spec.id}': {exc.message}", {"id": spec.id, **exc.details}) from exc
