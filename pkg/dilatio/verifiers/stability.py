"""
Stability of the dilation inequality under bounded perturbations and
products.
"""
from typing import List, Optional, Sequence
import logging
import math

import numpy as np

from ..convex_geometry import EuclideanBall, HPolytope, LpBall, SymmetricConvexBody
from ..estimators import dilation_area, entropy_variational
from ..exceptions import DomainError
from ..measures import ExponentialSymmetric, GaussianStd, Measure, PerturbedMeasure, ProductMeasure, mass_of_body
from ..qc_functions import QcFunction
from ..quadrature import fixed_nodes
from ..schemas import CheckResult, EstimationBudget, Estimate
from .base import resolve_kappa, verdict, worst
from .dilation import check_dilation
from .entropy import check_entropy_bounds

logger = logging.getLogger(__name__)

MODES = ("perturbation", "perturbation-entropy", "tensor-harmonic", "tensor-min", "tensor-entropy", "tensor-explore")
TENSOR_PANELS = 64
EXPLORE_BODIES = 6


def harmonic_kappa(kappas: Sequence[float]) -> float:
    return 1.0 / sum(1.0 / k for k in kappas)


def _named_worst(results: List[CheckResult], check_id: str) -> CheckResult:
    chosen = worst(results)
    note = f"worst of {len(results)} instances: {chosen.check_id}"
    return chosen.model_copy(update={"check_id": check_id, "notes": chosen.notes + [note]})


def _require_unconditional_function(f: QcFunction, seed: int) -> None:
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((256, f.dimension)) * 2.0
    flipped = X * rng.choice([-1.0, 1.0], size=X.shape)
    if np.max(np.abs(f._value(X) - f._value(flipped))) > 1e-9 * max(1.0, float(np.max(np.abs(f._value(X))))):
        raise DomainError("Function is not unconditional (invariant under coordinate sign changes)", {"kind": f.kind})


def _factor_rule(m: Measure, panels: int, order: int):
    """Composite Gauss-Legendre nodes on a 1-d factor with density-weighted weights."""
    lo, hi = m.interval_support()
    reach = m.tail_radius()
    a, b = max(lo, -reach), min(hi, reach)
    edges = np.linspace(a, b, panels + 1)
    if a < 0.0 < b:
        edges = np.unique(np.append(edges, 0.0))
    nodes, weights = fixed_nodes(edges[:-1], edges[1:], order)
    x = nodes.ravel()
    return x, weights.ravel() * m.density(x[:, None])


def _tensor_entropies(m1: Measure, m2: Measure, f: QcFunction, panels: int, order: int):
    x, w1 = _factor_rule(m1, panels, order)
    y, w2 = _factor_rule(m2, panels, order)
    X = np.column_stack([np.repeat(x, y.size), np.tile(y, x.size)])
    F = f._value(X).reshape(x.size, y.size)
    with np.errstate(divide="ignore", invalid="ignore"):
        FlogF = np.where(F > 0, F * np.log(F), 0.0)

    def ent(mass, flogf):
        with np.errstate(divide="ignore", invalid="ignore"):
            return flogf - np.where(mass > 0, mass * np.log(mass), 0.0)

    total = ent(w1 @ F @ w2, w1 @ FlogF @ w2)
    first = ent(w1 @ F, w1 @ FlogF) @ w2
    second = ent(F @ w2, FlogF @ w2) @ w1
    return float(total), float(first + second)


def check_entropy_tensorization(m: ProductMeasure, f: QcFunction, budget: Optional[EstimationBudget] = None,
                                panels: int = TENSOR_PANELS, check_id: str = "tensor-entropy") -> CheckResult:
    """Ent_{m1 x m2}(f) <= int Ent_{m1}(f(., y)) dm2 + int Ent_{m2}(f(x, .)) dm1 on a tensor rule."""
    budget = budget or EstimationBudget()
    if not isinstance(m, ProductMeasure) or len(m.factors) != 2 or any(c.dimension != 1 for c in m.factors):
        raise DomainError("Entropy tensorization needs a product of two 1-d measures")
    if f.dimension != 2:
        raise DomainError("Entropy tensorization needs a function on R^2", {"dimension": f.dimension})
    m1, m2 = m.factors
    total, split = _tensor_entropies(m1, m2, f, panels, budget.nodes)
    coarse_total, coarse_split = _tensor_entropies(m1, m2, f, max(panels // 2, 4), budget.nodes)
    lhs = Estimate(value=total, std_error=abs(total - coarse_total), method="tensor-quadrature", budget=budget)
    rhs = Estimate(value=split, std_error=abs(split - coarse_split), method="tensor-quadrature", budget=budget)
    return verdict(check_id, lhs, rhs, witness={"measure": m.describe(), "function": f.describe()},
                   seed=budget.seed)


def _explore(factors: Sequence[Measure], budget: EstimationBudget, check_id: str) -> CheckResult:
    product = ProductMeasure(factors)
    kappa_h = harmonic_kappa([resolve_kappa(factor)[0] for factor in factors])
    mc = budget.model_copy(update={"method": "monte-carlo"})
    rng = np.random.default_rng(budget.seed)
    n = product.dimension
    bodies: List[SymmetricConvexBody] = [HPolytope.box(rng.uniform(0.3, 3.0, size=n)) for _ in range(EXPLORE_BODIES)]
    bodies += [LpBall(n, float(rng.choice([1.0, 2.0, 4.0])), float(rng.uniform(0.5, 4.0))) for _ in range(EXPLORE_BODIES)]
    best, best_body = None, None
    for K in bodies:
        mu = mass_of_body(product, K, mc)
        if not 0.0 < mu.value < 1.0:
            continue
        area = dilation_area(product, K, budget=mc)
        entropy_form = -(1.0 - mu.value) * math.log1p(-mu.value)
        ratio = area.value / entropy_form
        rel = area.std_error / max(area.value, 1e-300) + abs(math.log1p(-mu.value) + 1.0) * mu.std_error / entropy_form
        estimate = Estimate(value=ratio, std_error=abs(ratio) * rel, method=area.method, budget=mc, seed=mc.seed)
        if best is None or ratio < best.value:
            best, best_body = estimate, K
    if best is None:
        raise DomainError("No explored body had mass strictly between 0 and 1")
    result = verdict(check_id, Estimate.exact(kappa_h), best, kappa_h, "harmonic combination (unproven here)",
                     witness={"measure": product.describe(), "body": best_body.describe(), "bodies": len(bodies)},
                     seed=mc.seed)
    logger.info(f"{check_id}: smallest ratio {best.value:.6g} against harmonic kappa {kappa_h:.6g}")
    return result.model_copy(update={"status": "inconclusive",
                                     "notes": result.notes + ["exploratory; nothing is asserted"]})


def check_stability(mode: str, measure: Optional[Measure] = None, bodies: Sequence[SymmetricConvexBody] = (),
                    function: Optional[QcFunction] = None, factors: Sequence[Measure] = (),
                    kappa: Optional[float] = None, budget: Optional[EstimationBudget] = None,
                    instances: int = 5, check_id: str = "stability") -> CheckResult:
    """Dilation or entropy checks with the kappa derived for a perturbed or product measure.

    Args:
        mode: perturbation, perturbation-entropy, tensor-harmonic, tensor-min,
            tensor-entropy or tensor-explore
        measure: PerturbedMeasure for the perturbation modes
        bodies: Bodies to test; perturbation of a 1-d measure draws random intervals when empty
        function: Test function for the entropy modes
        factors: Factor measures for the tensor modes
        kappa: Override for the derived kappa
        instances: Number of random intervals drawn when `bodies` is empty

    Returns:
        The worst CheckResult over the tested instances
    """
    budget = budget or EstimationBudget()
    if mode not in MODES:
        raise DomainError(f"Unknown stability mode {mode}", {"modes": MODES})

    if mode in ("perturbation", "perturbation-entropy"):
        if not isinstance(measure, PerturbedMeasure):
            raise DomainError("Perturbation modes need a perturbed measure")
        if mode == "perturbation-entropy":
            if function is None:
                raise DomainError("perturbation-entropy needs a function")
            lhs = entropy_variational(function, measure, budget)
            rhs = entropy_variational(function, measure.base, budget).scaled(measure.bound)
            return verdict(check_id, lhs, rhs, witness={"measure": measure.describe(), "function": function.describe()},
                           seed=budget.seed)
        if not bodies:
            if measure.dimension != 1:
                raise DomainError("Perturbation checks beyond dimension 1 need explicit bodies")
            rng = np.random.default_rng(budget.seed)
            bodies = [EuclideanBall(1, float(w)) for w in rng.uniform(0.1, 3.0, size=instances)]
        results = [check_dilation(measure, K, kappa, budget, check_id=f"{check_id}[{i}]") for i, K in enumerate(bodies)]
        return _named_worst(results, check_id)

    factors = list(factors)
    if mode == "tensor-explore":
        return _explore(factors or [GaussianStd(2), ProductMeasure([ExponentialSymmetric(), ExponentialSymmetric()])],
                        budget, check_id)
    if len(factors) != 2:
        raise DomainError("Tensor modes need exactly two factor measures", {"factors": len(factors)})
    kappas = [resolve_kappa(factor)[0] for factor in factors]

    if mode == "tensor-harmonic":
        if min(f.dimension for f in factors) != 1:
            raise DomainError("Harmonic tensorization needs a 1-d factor; use tensor-explore otherwise")
        if not bodies:
            raise DomainError("tensor-harmonic needs at least one body")
        derived = kappa if kappa is not None else harmonic_kappa(kappas)
        product = ProductMeasure(factors, kappa=derived, kappa_source="tensorization (harmonic combination)")
        for K in bodies:
            if not K.is_unconditional:
                raise DomainError("Tensorization needs unconditional bodies", {"body": K.describe()})
        results = [check_dilation(product, K, budget=budget, check_id=f"{check_id}[{i}]") for i, K in enumerate(bodies)]
        return _named_worst(results, check_id)

    if function is None:
        raise DomainError(f"{mode} needs a function")
    product = ProductMeasure(factors)
    if mode == "tensor-entropy":
        return check_entropy_tensorization(product, function, budget, check_id=check_id)
    if function.smoothness != "C1":
        raise DomainError("tensor-min needs a C1 function", {"smoothness": function.smoothness})
    _require_unconditional_function(function, budget.seed)
    derived = kappa if kappa is not None else min(kappas)
    product.claim_kappa(derived, "tensorization (minimum of factor kappas)")
    return check_entropy_bounds(product, function, variant="master", budget=budget, check_id=check_id)
