"""
Entropy bounds and logarithmic Sobolev inequalities.
"""
from typing import Callable, Optional
import logging
import math

import numpy as np

from ..estimators import entropy, fisher_information
from ..exceptions import DomainError
from ..measures import Measure, UniformOnBody, expect
from ..qc_functions import PowerOf, QcFunction, gradient_field
from ..schemas import CheckResult, EstimationBudget, Estimate
from .base import resolve_kappa, verdict

logger = logging.getLogger(__name__)

ENTROPY_VARIANTS = ("convex", "lipschitz", "c1", "master")
LSI_VARIANTS = ("cauchy-schwarz", "defective", "bounded", "one-dim")


def integral_of(m: Measure, f: QcFunction, F: Callable[[np.ndarray], np.ndarray], budget: EstimationBudget) -> Estimate:
    """Expectation of F under m with f's kinks as quadrature breaks."""
    return expect(m, F, budget, ray_breaks=f.ray_breaks, angle_breaks=f.angle_breaks())


def second_moment_weighted(m: Measure, f: QcFunction, budget: EstimationBudget) -> Estimate:
    """int |x|^2 f dmu."""
    return integral_of(m, f, lambda X: np.sum(X * X, axis=1) * f._value(X), budget)


def _entropy_rhs(m: Measure, f: QcFunction, kappa: float, variant: str, budget: EstimationBudget) -> Estimate:
    if variant == "convex":
        point = np.full((1, f.dimension), 0.5)
        if not f.convex or f.subdiff_inf(point) is None:
            raise DomainError("Convex variant needs a convex kind with a subdifferential", {"kind": f.kind})
        return integral_of(m, f, f.subdiff_inf, budget).scaled(2.0 / kappa)
    if variant == "lipschitz":
        if f.smoothness == "continuous":
            raise DomainError("Lipschitz variant needs a locally Lipschitz function", {"kind": f.kind})

        def F(X):
            return np.linalg.norm(X, axis=1) * np.linalg.norm(gradient_field(f, X), axis=1)
        return integral_of(m, f, F, budget).scaled(2.0 / kappa)
    if variant == "c1":
        if f.smoothness != "C1":
            raise DomainError("C1 variant needs a C1 function", {"kind": f.kind, "smoothness": f.smoothness})
        return integral_of(m, f, lambda X: np.sum(X * gradient_field(f, X), axis=1), budget).scaled(2.0 / kappa)
    if variant == "master":
        return integral_of(m, f, f.phi_field, budget).scaled(1.0 / kappa)
    raise DomainError(f"Unknown entropy variant {variant}", {"variants": ENTROPY_VARIANTS})


def check_entropy_bounds(m: Measure, f: QcFunction, kappa: Optional[float] = None, variant: str = "master",
                         budget: Optional[EstimationBudget] = None, check_id: str = "entropy") -> CheckResult:
    """Ent_mu(f) against the convex, Lipschitz, C1 or Phi_f form of the entropy bound.

    Args:
        m: Measure with a tagged kappa unless `kappa` is given
        f: Nonnegative symmetric quasi-convex function
        kappa: Override for the measure's kappa claim
        variant: One of convex, lipschitz, c1, master
        budget: Estimation budget

    Returns:
        CheckResult with lhs = Ent_mu(f)
    """
    budget = budget or EstimationBudget()
    kappa, source = resolve_kappa(m, kappa)
    rhs = _entropy_rhs(m, f, kappa, variant, budget)
    lhs = entropy(f, m, budget)
    witness = {"measure": m.describe(), "function": f.describe(), "variant": variant}
    return verdict(check_id, lhs, rhs, kappa, source, witness, seed=budget.seed)


def _diameter(m: Measure) -> float:
    if m.dimension == 1:
        lo, hi = m.interval_support()
        return hi - lo
    if m.support is None:
        return math.inf
    return 2.0 * m.support.radii()[1]


def poincare_constant(m: Measure, supplied: Optional[float] = None) -> float:
    """Supplied value, the exact uniform-interval constant, or e^(-2 phi(0)) for log-concave m."""
    if supplied is not None:
        if not supplied > 0:
            raise DomainError("Poincare constant must be positive", {"poincare": supplied})
        return float(supplied)
    if isinstance(m, UniformOnBody) and m.dimension == 1:
        return (math.pi / _diameter(m)) ** 2
    if m.is_log_concave:
        return float(m.density(np.zeros((1, 1)))[0]) ** 2
    raise DomainError("Missing Poincare constant for a measure that is not log-concave", {"kind": m.kind})


def _product_error(value: float, *relative: float) -> float:
    return abs(value) * sum(relative)


def check_lsi(m: Measure, f: QcFunction, kappa: Optional[float] = None, variant: str = "cauchy-schwarz",
              budget: Optional[EstimationBudget] = None, poincare: Optional[float] = None,
              check_id: str = "lsi") -> CheckResult:
    """Logarithmic Sobolev forms of the entropy bound.

    cauchy-schwarz: Ent f <= (2/kappa) (int |x|^2 f)^(1/2) I(f)^(1/2)
    defective:      Ent f <= I(f)/kappa + (1/kappa) int |x|^2 f
    bounded:        Ent f <= I(f)/kappa + diam^2/(4 kappa) int f
    one-dim:        Ent g^2 <= (1/kappa)(4 + diam^2/(4 C)) int |g'|^2, with g = |h| for odd monotone h
    """
    budget = budget or EstimationBudget()
    kappa, source = resolve_kappa(m, kappa)
    witness = {"measure": m.describe(), "function": f.describe(), "variant": variant}
    if variant not in LSI_VARIANTS:
        raise DomainError(f"Unknown LSI variant {variant}", {"variants": LSI_VARIANTS})

    if variant == "one-dim":
        lo, hi = (m.interval_support() if m.dimension == 1 else (-math.inf, math.inf))
        if m.dimension != 1 or not (math.isfinite(lo) and math.isfinite(hi)) or lo != -hi:
            raise DomainError("One-dimensional LSI needs a bounded symmetric interval", {"kind": m.kind})
        if f.smoothness == "continuous" or abs(f.floor) > 1e-12:
            raise DomainError("One-dimensional LSI needs |h| for an odd locally Lipschitz h", {"floor": f.floor})
        constant = poincare_constant(m, poincare)
        diam = hi - lo
        energy = integral_of(m, f, lambda X: np.sum(gradient_field(f, X) ** 2, axis=1), budget)
        rhs = energy.scaled((4.0 + diam ** 2 / (4.0 * constant)) / kappa)
        lhs = entropy(PowerOf(f, 2.0), m, budget)
        witness.update({"poincare": constant, "diameter": diam})
        return verdict(check_id, lhs, rhs, kappa, source, witness, seed=budget.seed)

    lhs = entropy(f, m, budget)
    info = fisher_information(f, m, budget)
    if variant == "cauchy-schwarz":
        moment = second_moment_weighted(m, f, budget)
        value = (2.0 / kappa) * math.sqrt(max(moment.value, 0.0)) * math.sqrt(max(info.value, 0.0))
        err = _product_error(value, 0.5 * moment.std_error / max(moment.value, 1e-300),
                             0.5 * info.std_error / max(info.value, 1e-300))
        rhs = Estimate(value=value, std_error=err, method=info.method, budget=budget,
                       flags=sorted(set(info.flags) | set(moment.flags)))
    elif variant == "defective":
        moment = second_moment_weighted(m, f, budget)
        rhs = Estimate(value=(info.value + moment.value) / kappa,
                       std_error=(info.std_error + moment.std_error) / kappa, method=info.method, budget=budget,
                       flags=sorted(set(info.flags) | set(moment.flags)))
    else:
        diam = _diameter(m)
        if not math.isfinite(diam):
            raise DomainError("Bounded-domain LSI needs a bounded support", {"kind": m.kind})
        mass = integral_of(m, f, f._value, budget)
        weight = diam ** 2 / (4.0 * kappa)
        rhs = Estimate(value=info.value / kappa + weight * mass.value,
                       std_error=info.std_error / kappa + weight * mass.std_error, method=info.method,
                       budget=budget, flags=list(info.flags))
        witness["diameter"] = diam
    return verdict(check_id, lhs, rhs, kappa, source, witness, seed=budget.seed)
