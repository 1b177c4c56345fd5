"""
Probes where the dilation inequality is tight or nearly tight.
"""
from typing import List, Optional, Sequence
import logging

import numpy as np

from ..convex_geometry import interval
from ..estimators import dilation_area
from ..measures import ExponentialOneSided, ExponentialSymmetric, GaussianStd, mass_of_body
from ..schemas import CheckResult, EstimationBudget, Estimate
from .base import kappa_entropy_form, require_equality, verdict
from .dilation import BORELL_GRID, borell_envelope, check_borell_lemma, check_dilation, check_one_sided_dilation

logger = logging.getLogger(__name__)

GAUSSIAN_RADII = (0.3, 0.1, 0.03, 0.01)
GAUSSIAN_RATIO_CEILING = 1.01
ONE_SIDED_POINTS = (0.5, 1.0, 2.0)
SYMMETRIC_RADII = (0.5, 1.0, 2.0)
ONE_SIDED_TOL = 1e-6
SYMMETRIC_TOL = 1e-8
BORELL_HALF_WIDTH = 1.5


def gaussian_ratio(t: float, budget: EstimationBudget) -> Estimate:
    """mu*((-t, t)) / [-2 (1 - mu) log(1 - mu)] under gamma_1."""
    gamma = GaussianStd(1)
    K = interval(t)
    area = dilation_area(gamma, K, budget=budget)
    bound = kappa_entropy_form(mass_of_body(gamma, K, budget), 2.0)
    ratio = area.value / bound.value
    err = abs(ratio) * (area.std_error / area.value + bound.std_error / bound.value)
    return Estimate(value=ratio, std_error=err, method=area.method, budget=budget, flags=list(area.flags),
                    details={"t": t, "area": area.value, "bound": bound.value})


def sharpness_probes(budget: Optional[EstimationBudget] = None,
                     gaussian_radii: Sequence[float] = GAUSSIAN_RADII,
                     borell_grid: Sequence[float] = BORELL_GRID) -> List[CheckResult]:
    """Gaussian optimality of kappa = 2, exponential equality cases and Borell tails."""
    budget = budget or EstimationBudget()
    results = []

    radii = sorted(gaussian_radii, reverse=True)
    ratios = [gaussian_ratio(t, budget) for t in radii]
    for t, ratio in zip(radii, ratios):
        results.append(verdict(f"sharpness.gaussian-ratio[t={t:g}]", Estimate.exact(1.0), ratio, 2.0,
                               "gaussian", {"t": t}, seed=budget.seed))
    values = [r.value for r in ratios]
    monotone = all(b <= a + 3.0 * (ra.std_error + rb.std_error)
                   for a, b, ra, rb in zip(values, values[1:], ratios, ratios[1:]))
    limit = verdict("sharpness.gaussian-limit", ratios[-1], Estimate.exact(GAUSSIAN_RATIO_CEILING), 2.0,
                    "gaussian", {"t": radii[-1], "ratios": dict(zip(map(float, radii), values))}, seed=budget.seed)
    if not monotone:
        logger.warning(f"Gaussian ratios are not decreasing: {values}")
        limit = limit.model_copy(update={"status": "inconclusive", "notes": limit.notes + ["ratios not monotone"]})
    results.append(limit)

    one_sided = ExponentialOneSided()
    for x in ONE_SIDED_POINTS:
        result = check_one_sided_dilation(one_sided, x, 1.0, budget, check_id=f"sharpness.one-sided[x={x:g}]")
        results.append(require_equality(result, ONE_SIDED_TOL))

    symmetric = ExponentialSymmetric()
    for t in SYMMETRIC_RADII:
        result = check_dilation(symmetric, interval(t), 2.0, budget, check_id=f"sharpness.symmetric[t={t:g}]")
        results.append(require_equality(result, SYMMETRIC_TOL))

    gamma = GaussianStd(1)
    K = interval(BORELL_HALF_WIDTH)
    lemma = check_borell_lemma(gamma, K, borell_grid, budget, check_id="sharpness.borell")
    results.extend(lemma)
    tails = [r.lhs.value for r in lemma]
    c, C = borell_envelope(tails, borell_grid)
    results.append(verdict("sharpness.borell-envelope", Estimate.exact(-C, method="log-linear-fit"),
                           Estimate.exact(0.0), witness={"c": c, "C": C, "theta": lemma[0].witness["theta"]},
                           seed=budget.seed, notes=["fitted decay rate must be positive"]))
    return results
