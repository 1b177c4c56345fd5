from typing import Any, Dict, List, Literal, Optional
import math

from pydantic import BaseModel, ConfigDict, Field

from .config import settings


MethodName = Literal["auto", "quadrature", "monte-carlo"]
Status = Literal["pass", "fail", "inconclusive"]


class EstimationBudget(BaseModel):
    """How an estimator may spend effort; passed through every estimator call."""
    model_config = ConfigDict(frozen=True)

    method: MethodName = "auto"
    samples: int = Field(default_factory=lambda: settings.samples, ge=0, description="Monte Carlo sample count")
    nodes: int = Field(default_factory=lambda: settings.gl_order, ge=2, description="Gauss-Legendre order per panel")
    seed: int = Field(default_factory=lambda: settings.seed)
    tol: float = Field(default_factory=lambda: settings.quad_tol, gt=0, description="Absolute quadrature tolerance")

    def resolve(self, dimension: int) -> str:
        if self.method == "auto":
            return "quadrature" if dimension <= 2 else "monte-carlo"
        return self.method

    def with_seed(self, seed: int) -> "EstimationBudget":
        return self.model_copy(update={"seed": int(seed)})

    def scaled(self, factor: float) -> "EstimationBudget":
        return self.model_copy(update={"samples": int(self.samples * factor)})


class Estimate(BaseModel):
    value: float
    std_error: float = Field(default=0.0, ge=0.0)
    method: str
    budget: Optional[EstimationBudget] = None
    seed: Optional[int] = None
    flags: List[str] = Field(default_factory=list)
    details: Dict[str, Any] = Field(default_factory=dict)

    @classmethod
    def exact(cls, value: float, method: str = "analytic", **kwargs) -> "Estimate":
        return cls(value=float(value), std_error=0.0, method=method, **kwargs)

    @property
    def inconclusive(self) -> bool:
        return "inconclusive" in self.flags

    def scaled(self, factor: float) -> "Estimate":
        return self.model_copy(update={
            "value": float(factor * self.value),
            "std_error": float(abs(factor) * self.std_error),
        })

    def flagged(self, *flags: str) -> "Estimate":
        merged = list(self.flags)
        for flag in flags:
            if flag not in merged:
                merged.append(flag)
        return self.model_copy(update={"flags": merged})

    def record(self) -> Dict[str, Any]:
        """JSON record {value, std_error, method, budget, seed}."""
        return {
            "value": self.value,
            "std_error": self.std_error,
            "method": self.method,
            "budget": self.budget.model_dump() if self.budget else None,
            "seed": self.seed,
            "flags": self.flags,
        }


def combined_error(*estimates: Estimate) -> float:
    return math.sqrt(sum(e.std_error ** 2 for e in estimates))


class CheckResult(BaseModel):
    check_id: str
    lhs: Estimate
    rhs: Estimate
    kappa: Optional[float] = None
    kappa_source: Optional[str] = None
    margin: float
    tolerance: float = Field(description="3 x combined standard error")
    status: Status
    witness: Dict[str, Any] = Field(default_factory=dict)
    seed: Optional[int] = None
    notes: List[str] = Field(default_factory=list)

    @property
    def std_error(self) -> float:
        return combined_error(self.lhs, self.rhs)


class AuditReport(BaseModel):
    """Evidence-based report from quasi-convexity or QC-class audits."""
    name: str
    passed: bool
    checks: Dict[str, bool] = Field(default_factory=dict)
    witnesses: List[Dict[str, Any]] = Field(default_factory=list)
    seed: Optional[int] = None
    trials: int = 0
    notes: List[str] = Field(default_factory=list)


class ConvergenceRow(BaseModel):
    sigma: float
    entropy: float
    phi_integral: float
    entropy_error: float = 0.0
    phi_error: float = 0.0
    holds: bool = True


# --- scenario config -------------------------------------------------------

MeasureKind = Literal[
    "gaussian-std", "gaussian", "exponential-one-sided", "exponential-symmetric",
    "uniform-on-body", "log-concave-custom", "product", "perturbed",
]
BodyKind = Literal[
    "euclidean-ball", "ellipsoid", "lp-ball", "box", "h-polytope", "scaled", "intersection",
]
FunctionKind = Literal[
    "gauge-power", "radial", "shifted-radial", "min-cap", "max-floor", "f-sigma",
    "constant", "affine", "power",
]
CheckType = Literal[
    "dilation", "one-sided-dilation", "entropy", "lsi", "gaussian-suite", "moment-suite",
    "negative-suite", "isoperimetry", "coarea", "reconstruction", "stability",
    "sharpness", "borell",
]


class _SpecModel(BaseModel):
    model_config = ConfigDict(extra="forbid")


class MeasureSpec(_SpecModel):
    id: str
    kind: MeasureKind
    dimension: int = Field(default=1, ge=1)
    body: Optional[str] = Field(default=None, description="Support body id for uniform-on-body")
    factors: Optional[List[str]] = Field(default=None, description="Factor measure ids for product")
    base: Optional[str] = Field(default=None, description="Base measure id for perturbed")
    amplitude: Optional[float] = None
    frequency: Optional[float] = None
    bound: Optional[float] = Field(default=None, description="Perturbation bound b > 1")
    exponent: Optional[float] = Field(default=None, description="Potential |x|^q/q exponent")
    half_width: Optional[float] = None
    mean: Optional[List[float]] = None
    variance: Optional[float] = None
    kappa: Optional[float] = Field(default=None, gt=0)
    kappa_source: Optional[str] = None


class BodySpec(_SpecModel):
    id: str
    kind: BodyKind
    dimension: int = Field(default=1, ge=1)
    radius: Optional[float] = None
    semi_axes: Optional[List[float]] = None
    p: Optional[float] = None
    half_widths: Optional[List[float]] = None
    normals: Optional[List[List[float]]] = None
    offsets: Optional[List[float]] = None
    body: Optional[str] = None
    factor: Optional[float] = None
    members: Optional[List[str]] = None


class FunctionSpec(_SpecModel):
    id: str
    kind: FunctionKind
    dimension: int = Field(default=1, ge=1)
    body: Optional[str] = None
    inner: Optional[str] = Field(default=None, description="Inner function id for cap/floor/affine/power")
    p: Optional[float] = None
    c: Optional[float] = None
    s: Optional[float] = None
    level: Optional[float] = None
    sigma: Optional[float] = None
    value: Optional[float] = None
    scale: Optional[float] = None
    shift: Optional[float] = None


class CheckSpec(_SpecModel):
    id: str
    check: CheckType
    params: Dict[str, Any] = Field(default_factory=dict)
    samples: Optional[int] = Field(default=None, ge=1)


class BudgetSpec(_SpecModel):
    samples: int = Field(default_factory=lambda: settings.samples, ge=1)
    nodes: int = Field(default_factory=lambda: settings.gl_order, ge=2)
    seed: int = Field(default_factory=lambda: settings.seed)
    tol: float = Field(default_factory=lambda: settings.quad_tol, gt=0)


class OutputSpec(_SpecModel):
    directory: str = "reports"
    report_json: str = "report.json"
    report_csv: str = "report.csv"
    sweep_csv: str = "sweep.csv"


class ScenarioConfig(_SpecModel):
    name: str = "scenario"
    budget: BudgetSpec = Field(default_factory=BudgetSpec)
    output: OutputSpec = Field(default_factory=OutputSpec)
    measures: List[MeasureSpec] = Field(default_factory=list)
    bodies: List[BodySpec] = Field(default_factory=list)
    functions: List[FunctionSpec] = Field(default_factory=list)
    checks: List[CheckSpec] = Field(default_factory=list)


class ScenarioReport(BaseModel):
    scenario: str
    seed: int
    results: List[CheckResult] = Field(default_factory=list)
    errors: List[Dict[str, Any]] = Field(default_factory=list)

    def summary(self) -> Dict[str, int]:
        counts = {"pass": 0, "fail": 0, "inconclusive": 0}
        for result in self.results:
            counts[result.status] += 1
        return counts

    def sorted_results(self) -> List[CheckResult]:
        return sorted(self.results, key=lambda r: r.check_id)
