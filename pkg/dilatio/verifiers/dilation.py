"""
Dilation inequality, its co-area form and Borell's lemma.
"""
from typing import List, Optional, Sequence
import math

import numpy as np

from ..convex_geometry import SymmetricConvexBody
from ..estimators import coarea_integral, dilation_area, one_sided_interval_dilation_area
from ..exceptions import DomainError
from ..measures import Measure, mass_of_body
from ..qc_functions import QcFunction
from ..schemas import CheckResult, EstimationBudget, Estimate
from .base import kappa_entropy_form, resolve_kappa, trivial_pass, verdict

MASS_EDGE = 1e-15
BORELL_GRID = tuple(np.linspace(1.0, 5.0, 9))


def check_dilation(m: Measure, K: SymmetricConvexBody, kappa: Optional[float] = None,
                   budget: Optional[EstimationBudget] = None, check_id: str = "dilation") -> CheckResult:
    """-kappa (1 - mu(K)) log(1 - mu(K)) <= mu*(K).

    Args:
        m: Measure with a tagged kappa unless `kappa` is given
        K: Symmetric convex body in the measure's dimension
        kappa: Override for the measure's kappa claim
        budget: Estimation budget shared by both sides

    Returns:
        CheckResult; mu(K) in {0, 1} is a trivial pass
    """
    budget = budget or EstimationBudget()
    kappa, source = resolve_kappa(m, kappa)
    mu = mass_of_body(m, K, budget)
    witness = {"measure": m.describe(), "body": K.describe(), "mass": mu.value}
    if mu.value <= MASS_EDGE or mu.value >= 1.0 - MASS_EDGE:
        return trivial_pass(check_id, f"mu(K) = {mu.value:g}", kappa, source, witness)
    lhs = kappa_entropy_form(mu, kappa)
    rhs = dilation_area(m, K, budget=budget)
    return verdict(check_id, lhs, rhs, kappa, source, witness, seed=budget.seed)


def check_one_sided_dilation(m: Measure, x: float, kappa: Optional[float] = None,
                             budget: Optional[EstimationBudget] = None,
                             check_id: str = "one-sided-dilation") -> CheckResult:
    """Dilation inequality for A = (0, x) under a measure on the half-line."""
    budget = budget or EstimationBudget()
    kappa, source = resolve_kappa(m, kappa)
    mu = Estimate(value=float(m.cdf(x)), std_error=1e-15, method="quadrature", budget=budget)
    lhs = kappa_entropy_form(mu, kappa)
    rhs = one_sided_interval_dilation_area(m, x, budget=budget)
    witness = {"measure": m.describe(), "x": x, "mass": mu.value}
    return verdict(check_id, lhs, rhs, kappa, source, witness, seed=budget.seed)


def check_coarea(m: Measure, f: QcFunction, p: float = 1.0, sign: str = "positive",
                 budget: Optional[EstimationBudget] = None, check_id: str = "coarea") -> CheckResult:
    """Level-set integral of dilation areas against the Phi_f integral."""
    budget = budget or EstimationBudget()
    lhs, rhs = coarea_integral(m, f, p, sign, budget)
    witness = {"measure": m.describe(), "function": f.describe(), "p": p, "sign": sign}
    return verdict(check_id, lhs, rhs, witness=witness, seed=budget.seed)


def check_borell_lemma(m: Measure, K: SymmetricConvexBody, t_grid: Sequence[float] = BORELL_GRID,
                       budget: Optional[EstimationBudget] = None, check_id: str = "borell") -> List[CheckResult]:
    """mu(R^n minus tK) <= theta ((1 - theta)/theta)^((t + 1)/2), theta = mu(K) > 1/2.

    Holds for log-concave m and t >= 1; one result per t.
    """
    budget = budget or EstimationBudget()
    if not m.is_log_concave:
        raise DomainError("Borell's lemma needs a log-concave measure", {"kind": m.kind})
    theta = mass_of_body(m, K, budget)
    if not theta.value > 0.5:
        raise DomainError("Borell's lemma needs mu(K) > 1/2", {"mass": theta.value})
    results = []
    ratio = (1.0 - theta.value) / theta.value
    for t in t_grid:
        if t < 1:
            raise DomainError("Borell's lemma needs t >= 1", {"t": t})
        inside = mass_of_body(m, K.scaled(float(t)), budget)
        tail = Estimate(value=1.0 - inside.value, std_error=inside.std_error, method=inside.method,
                        budget=budget, seed=inside.seed, flags=list(inside.flags))
        exponent = (t + 1.0) / 2.0
        bound = theta.value * ratio ** exponent
        # d/dtheta of theta^(1 - e) (1 - theta)^e
        slope = bound * ((1.0 - exponent) / theta.value - exponent / (1.0 - theta.value))
        rhs = Estimate(value=bound, std_error=abs(slope) * theta.std_error, method=theta.method, budget=budget)
        results.append(verdict(f"{check_id}[t={t:g}]", tail, rhs,
                               witness={"body": K.describe(), "theta": theta.value, "t": float(t)},
                               seed=budget.seed))
    return results


def borell_envelope(tails: Sequence[float], t_grid: Sequence[float]) -> tuple:
    """Log-linear fit log mu(R^n minus tK) = log c - C t; returns (c, C)."""
    t = np.asarray(t_grid, dtype=float)
    logs = np.log(np.maximum(np.asarray(tails, dtype=float), 1e-300))
    slope, intercept = np.polyfit(t, logs, 1)
    return math.exp(intercept), -slope
