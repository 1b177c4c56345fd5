"""
Isoperimetric consequences of the dilation inequality.
"""
from typing import List, Optional
import logging
import math

from ..convex_geometry import SymmetricConvexBody
from ..estimators import dilation_area, perimeter, surface_moment_integral
from ..exceptions import DomainError, UnsupportedOperationError
from ..measures import Measure, mass_of_body
from ..schemas import CheckResult, EstimationBudget, Estimate
from .base import kappa_entropy_form, resolve_kappa, verdict

logger = logging.getLogger(__name__)


def check_isoperimetry(m: Measure, K: SymmetricConvexBody, kappa: Optional[float] = None, p: float = 2.0,
                       budget: Optional[EstimationBudget] = None, check_id: str = "isoperimetry") -> List[CheckResult]:
    """Lower bounds for the perimeter mu+(K).

    surface: (r/S)^(p-1) D^p <= mu+(K), S = boundary integral of <x, eta>|x|^p' e^-phi
    direct:  D / R <= mu+(K)
    bridge:  mu*(K) <= 2 R mu+(K)
    with D = -(kappa/2)(1 - mu(K)) log(1 - mu(K)) and r, R the in- and circumradius.
    """
    budget = budget or EstimationBudget()
    if not 1.0 < p <= 2.0:
        raise DomainError("Isoperimetric exponent must lie in (1, 2]", {"p": p})
    kappa, source = resolve_kappa(m, kappa)
    r, R = K.radii()
    if not math.isfinite(R):
        raise DomainError("Isoperimetry needs a bounded body", {"body": K.describe()})
    mu = mass_of_body(m, K, budget)
    D = kappa_entropy_form(mu, kappa).scaled(0.5)
    perim = perimeter(m, K, budget=budget)
    witness = {"measure": m.describe(), "body": K.describe(), "mass": mu.value, "inradius": r, "circumradius": R}
    results = []

    p_prime = p / (p - 1.0)
    try:
        S = surface_moment_integral(m, K, p_prime)
        value = (r / S.value) ** (p - 1.0) * D.value ** p
        err = value * ((p - 1.0) * S.std_error / max(S.value, 1e-300) + p * D.std_error / max(D.value, 1e-300))
        lhs = Estimate(value=value, std_error=err, method=S.method, budget=budget)
        results.append(verdict(f"{check_id}.surface", lhs, perim, kappa, source,
                               {**witness, "surface_moment": S.value, "p": p}, seed=budget.seed))
    except UnsupportedOperationError:
        logger.warning(f"{check_id}: no boundary rule for {K.kind}; surface form skipped")

    results.append(verdict(f"{check_id}.direct", D.scaled(1.0 / R), perim, kappa, source, witness,
                           seed=budget.seed))

    area = dilation_area(m, K, budget=budget)
    results.append(verdict(f"{check_id}.bridge", area, perim.scaled(2.0 * R), witness=witness, seed=budget.seed))
    return results
