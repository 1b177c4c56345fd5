"""
Gaussian consequences of the entropy bound: entropy-variance, transport,
variance, reverse Shannon and Cramer-Rao forms.
"""
from typing import List, Optional, Sequence
import logging
import math

import numpy as np

from ..estimators import entropy, w2_distance_1d
from ..exceptions import DomainError
from ..measures import GaussianMeasure, GaussianStd, Numeric1DMeasure, expect
from ..qc_functions import Affine, Constant, QcFunction, gradient_field
from ..schemas import CheckResult, EstimationBudget, Estimate
from .base import verdict
from .entropy import integral_of, second_moment_weighted

logger = logging.getLogger(__name__)

DECAY_RADII = (4.0, 8.0, 16.0, 32.0)
DECAY_TOL = 1e-8
TRANSPORT_SIGMAS = (0.5, 2.0)


def _decays(f: QcFunction) -> bool:
    """|x| f(x) gamma_n(x) -> 0 along the coordinate rays."""
    n = f.dimension
    directions = np.vstack([np.eye(n), -np.eye(n)])
    profile = []
    for r in DECAY_RADII:
        X = r * directions
        with np.errstate(over="ignore", invalid="ignore"):
            values = r * f._value(X) * np.exp(-0.5 * r * r) / (2 * math.pi) ** (n / 2)
        profile.append(float(np.max(values)))
    profile = np.asarray(profile)
    return bool(np.all(np.isfinite(profile)) and profile[-1] < DECAY_TOL and profile[-1] <= profile[-2])


def _normalized(f: QcFunction, gamma: GaussianMeasure, budget: EstimationBudget):
    if isinstance(f, Constant):
        if not f.constant > 0:
            raise DomainError("Gaussian suite needs a positive function", {"value": f.constant})
        return Constant(1.0, f.dimension), Estimate.exact(f.constant, budget=budget)
    Z = integral_of(gamma, f, f._value, budget)
    if not Z.value > 0:
        raise DomainError("Gaussian suite needs int f dgamma > 0", {"integral": Z.value})
    return Affine(f, 1.0 / Z.value), Z


def _fisher_dx(g: QcFunction, gamma: GaussianMeasure, budget: EstimationBudget) -> Estimate:
    """int |grad h|^2 / h dx for h = g gamma, written as a gamma-expectation."""
    def F(X):
        v = g._value(X)
        drift = gradient_field(g, X) - X * v[:, None]
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(v > 0, np.sum(drift * drift, axis=1) / v, 0.0)
    return integral_of(gamma, g, F, budget)


def check_gaussian_suite(f: QcFunction, budget: Optional[EstimationBudget] = None,
                         sigmas: Sequence[float] = TRANSPORT_SIGMAS, check_id: str = "gaussian") -> List[CheckResult]:
    """Gaussian forms for f normalized to int f dgamma_n = 1 (h = f gamma_n).

    Args:
        f: Symmetric quasi-convex, locally Lipschitz function on R^n
        budget: Estimation budget
        sigmas: Standard deviations of the Gaussian pairs compared by transport
        check_id: Prefix for the result ids

    Returns:
        entvar, wvar (1-d or constant f), varest, reverse-shannon, cramer-rao
        and one transport result per sigma
    """
    budget = budget or EstimationBudget()
    if f.smoothness == "continuous":
        raise DomainError("Gaussian suite needs a locally Lipschitz function", {"kind": f.kind})
    n = f.dimension
    gamma = GaussianStd(n)
    g, Z = _normalized(f, gamma, budget)
    constant = isinstance(g, Constant)
    notes = [] if _decays(g) else ["decay condition |x| h(x) -> 0 not observed"]
    if notes:
        logger.warning(f"{check_id}: {notes[0]} for {f.kind}")
    witness = {"function": f.describe(), "dimension": n, "normalizer": Z.value}

    if constant:
        ent = Estimate.exact(0.0, budget=budget)
        moment = Estimate.exact(float(n), budget=budget)
        info = Estimate.exact(float(n), budget=budget)
    else:
        ent = entropy(g, gamma, budget)
        moment = second_moment_weighted(gamma, g, budget)
        info = _fisher_dx(g, gamma, budget)

    def finish(result: CheckResult) -> CheckResult:
        if not notes:
            return result
        status = "inconclusive" if result.status == "pass" else result.status
        return result.model_copy(update={"status": status, "notes": result.notes + notes})

    excess = Estimate(value=moment.value - n, std_error=moment.std_error, method=moment.method, budget=budget,
                      flags=list(moment.flags))
    results = [finish(verdict(f"{check_id}.entvar", ent, excess, witness=witness, seed=budget.seed))]

    if constant:
        half_w2 = Estimate.exact(0.0, method="gaussian-closed-form", budget=budget)
    elif n == 1:
        nu = Numeric1DMeasure(lambda x: np.log(g._value(np.asarray(x).reshape(-1, 1))) - 0.5 * np.asarray(x) ** 2,
                              breaks=(0.0,))
        w = w2_distance_1d(gamma, nu, budget)
        half_w2 = Estimate(value=0.5 * w.value ** 2, std_error=w.value * w.std_error, method=w.method,
                           budget=budget, flags=list(w.flags))
    else:
        half_w2 = None
        logger.info(f"{check_id}: transport form skipped, W2 in dimension {n} needs a Gaussian pair")
    if half_w2 is not None:
        results.append(finish(verdict(f"{check_id}.wvar", half_w2, excess, witness=witness, seed=budget.seed)))

    results.append(finish(verdict(f"{check_id}.varest", Estimate.exact(float(n)), moment, witness=witness,
                                  seed=budget.seed)))

    log_2pi = math.log(2.0 * math.pi)
    shannon = Estimate(value=ent.value - 0.5 * n * log_2pi - 0.5 * moment.value,
                       std_error=ent.std_error + 0.5 * moment.std_error, method=ent.method, budget=budget,
                       flags=sorted(set(ent.flags) | set(moment.flags)))
    shannon_bound = Estimate(value=0.5 * moment.value - 0.5 * n * (log_2pi + 2.0),
                             std_error=0.5 * moment.std_error, method=moment.method, budget=budget,
                             flags=list(moment.flags))
    results.append(finish(verdict(f"{check_id}.reverse-shannon", shannon, shannon_bound, witness=witness,
                                  seed=budget.seed)))

    root = math.sqrt(max(moment.value, 0.0) * max(info.value, 0.0))
    rel = 0.5 * (moment.std_error / max(moment.value, 1e-300) + info.std_error / max(info.value, 1e-300))
    uncertainty = Estimate(value=root, std_error=root * rel, method=info.method, budget=budget,
                           flags=sorted(set(info.flags) | set(moment.flags)))
    results.append(finish(verdict(f"{check_id}.cramer-rao", Estimate.exact(float(n)), uncertainty,
                                  witness=witness, seed=budget.seed)))

    for sigma in sigmas:
        if not sigma > 0:
            raise DomainError("Transport pair needs sigma > 0", {"sigma": sigma})
        nu = GaussianMeasure(np.zeros(n), sigma ** 2 * np.eye(n))
        w = w2_distance_1d(nu, gamma, budget)
        lhs = Estimate.exact(0.5 * w.value ** 2, method=w.method, budget=budget)
        rhs = Estimate.exact(0.5 * n * (sigma ** 2 - 1.0 - 2.0 * math.log(sigma)), budget=budget)
        results.append(verdict(f"{check_id}.transport[sigma={sigma:g}]", lhs, rhs,
                               witness={"dimension": n, "sigma": sigma}, seed=budget.seed))
    return results
