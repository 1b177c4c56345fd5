"""
Moment comparison, Orlicz/deviation bounds, negative moments and small balls.
"""
from typing import Iterable, List, Optional, Sequence, Tuple
import logging
import math

import numpy as np

from ..config import settings
from ..convex_geometry import unit_directions_2d
from ..estimators import levy_mean, lp_norm, orlicz_norm, sublevel_mass
from ..exceptions import DomainError
from ..measures import Measure
from ..qc_functions import QcFunction
from ..schemas import CheckResult, EstimationBudget, Estimate
from .base import resolve_kappa, trivial_pass, verdict

logger = logging.getLogger(__name__)

DEFAULT_PAIRS = ((1.0, 2.0), (1.0, 3.0), (2.0, 4.0))
DEVIATION_GRID = (1.0, 1.5, 2.0, 3.0, 4.0)
DEVIATION_CEILING = 10.0
ORLICZ_FACTOR = 8.0
NEGATIVE_P_GRID = (0.1, 0.3, 0.5)
SMALL_BALL_GRID = tuple(np.round(np.linspace(0.1, 1.0, 10), 10))
SMALL_BALL_EPS = 0.1
RAY_RADII = 200


def _ray_points(m: Measure) -> np.ndarray:
    n = m.dimension
    if n == 2:
        U = unit_directions_2d(np.linspace(0.0, 2.0 * math.pi, 64, endpoint=False))
    else:
        U = np.vstack([np.eye(n), -np.eye(n)])
    reach = np.minimum(m.support_radius(U), m.tail_radius())
    radii = np.geomspace(1e-3, 1.0, RAY_RADII)
    # stay strictly inside bounded supports
    return (U[:, None, :] * (0.999999 * reach[:, None, None]) * radii[None, :, None]).reshape(-1, n)


def sup_log_phi(f: QcFunction, m: Measure, budget: EstimationBudget) -> Estimate:
    """Sampled sup of Phi_f / f over draws of m plus a deterministic ray grid.

    Always a lower bound on the essential supremum; flagged as such.
    """
    rng = np.random.default_rng(budget.seed)
    X = np.vstack([m.sample(settings.sup_samples, rng), _ray_points(m)])
    v = f._value(X)
    positive = v > 0
    ratio = f.phi_field(X[positive]) / v[positive]
    value = float(np.max(ratio)) if ratio.size else 0.0
    return Estimate(value=value, method="sampled-supremum", budget=budget, seed=budget.seed,
                    flags=["lower-bound"], details={"points": int(X.shape[0])})


def _upper_quantile(f: QcFunction, m: Measure, tail: float, budget: EstimationBudget) -> float:
    """Smallest s with mu(f >= s) <= tail."""
    if budget.resolve(m.dimension) == "monte-carlo":
        values = f._value(m.sample(int(budget.samples), np.random.default_rng(budget.seed)))
        return float(np.quantile(values, 1.0 - tail))
    lo, hi = f.floor, f.floor + 1.0
    while sublevel_mass(m, f, hi, budget).value < 1.0 - tail:
        hi = lo + 2.0 * (hi - lo)
        if hi - lo > 1e12:
            return math.inf
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        if sublevel_mass(m, f, mid, budget).value >= 1.0 - tail:
            hi = mid
        else:
            lo = mid
        if hi - lo <= 1e-12 * max(1.0, hi):
            break
    return hi


def check_moment_suite(m: Measure, f: QcFunction, kappa: Optional[float] = None,
                       pairs: Iterable[Tuple[float, float]] = DEFAULT_PAIRS, alpha: Optional[float] = None,
                       budget: Optional[EstimationBudget] = None, t_grid: Sequence[float] = DEVIATION_GRID,
                       ceiling: float = DEVIATION_CEILING, check_id: str = "moment") -> List[CheckResult]:
    """Moment comparison ||f||_q <= (q/p)^(S/kappa) ||f||_p with S = sup Phi_f/f, plus the
    psi_alpha and deviation bounds for alpha = kappa/S when 1 <= alpha < inf.

    Args:
        m: Measure with a tagged kappa unless `kappa` is given
        f: Nonnegative symmetric quasi-convex function
        pairs: (p, q) pairs with 0 < p <= q
        alpha: Override for the Orlicz exponent
        t_grid: Deviation levels t >= 1
        ceiling: Bound the empirical deviation constant is compared against

    Returns:
        One result per pair, then orlicz-forms, orlicz and deviation results
    """
    budget = budget or EstimationBudget()
    kappa, source = resolve_kappa(m, kappa)
    sup = sup_log_phi(f, m, budget)
    exponent = sup.value / kappa
    witness = {"measure": m.describe(), "function": f.describe(), "sup_phi_ratio": sup.value, "exponent": exponent}
    results = []
    norms = {}

    def norm(p: float) -> Estimate:
        if p not in norms:
            norms[p] = lp_norm(f, m, p, budget)
        return norms[p]

    for p, q in pairs:
        if not 0 < p <= q:
            raise DomainError("Moment pairs need 0 < p <= q", {"p": p, "q": q})
        factor = (q / p) ** exponent
        rhs = norm(p).scaled(factor)
        results.append(verdict(f"{check_id}[p={p:g},q={q:g}]", norm(q), rhs, kappa, source,
                               {**witness, "factor": factor}, seed=budget.seed,
                               notes=["exponent uses a sampled supremum"]))

    alpha = alpha if alpha is not None else (kappa / sup.value if sup.value > 0 else math.inf)
    witness["alpha"] = alpha
    if not (1.0 <= alpha < math.inf):
        logger.info(f"{check_id}: Orlicz and deviation checks skipped (alpha = {alpha:g})")
        return results

    psi = orlicz_norm(f, m, alpha, budget)
    bound = ORLICZ_FACTOR
    forms_ratio = psi.details.get("ratio", math.nan)
    if math.isfinite(forms_ratio) and forms_ratio > 0:
        spread = Estimate.exact(max(forms_ratio, 1.0 / forms_ratio), method="ratio")
        results.append(verdict(f"{check_id}.orlicz-forms", spread, Estimate.exact(bound), kappa, source,
                               {**witness, "ratio": forms_ratio}, seed=budget.seed))

    scale = alpha ** (-1.0 / alpha) * norm(alpha).value
    ratio = psi.value / scale if scale > 0 else math.inf
    spread = Estimate(value=max(ratio, 1.0 / ratio) if ratio > 0 else math.inf,
                      std_error=abs(ratio) * (psi.std_error / max(psi.value, 1e-300)
                                              + norm(alpha).std_error / max(norm(alpha).value, 1e-300)),
                      method=psi.method, flags=[flag for flag in psi.flags if flag == "inconclusive"])
    results.append(verdict(f"{check_id}.orlicz", spread, Estimate.exact(bound), kappa, source,
                           {**witness, "psi_alpha": psi.value, "scale": scale}, seed=budget.seed))

    constants = {}
    for t in t_grid:
        if t < 1:
            raise DomainError("Deviation levels need t >= 1", {"t": t})
        tail = 2.0 * math.exp(-t ** alpha)
        if tail >= 1.0:
            continue
        level = _upper_quantile(f, m, tail, budget)
        constants[float(t)] = level / (t * scale) if scale > 0 else math.inf
    if constants:
        worst_t = max(constants, key=constants.get)
        empirical = Estimate(value=constants[worst_t], method=budget.resolve(m.dimension), budget=budget)
        results.append(verdict(f"{check_id}.deviation", empirical, Estimate.exact(ceiling), kappa, source,
                               {**witness, "constants": constants, "worst_t": worst_t}, seed=budget.seed,
                               notes=["empirical constant; no universal value is asserted"]))
    return results


def check_negative_suite(m: Measure, f: QcFunction, kappa: Optional[float] = None,
                         p_grid: Sequence[float] = NEGATIVE_P_GRID, eps: float = SMALL_BALL_EPS,
                         budget: Optional[EstimationBudget] = None, t_grid: Sequence[float] = SMALL_BALL_GRID,
                         check_id: str = "negative") -> List[CheckResult]:
    """med(f) <= (e/(1 - beta p))^beta ||f||_{-p} and the small-ball bound
    mu(f <= t med) <= (e/(eps beta))^(1 - eps beta) t^(1/beta - eps),
    with beta = sup(Phi_f / f)/(kappa log 2).
    """
    budget = budget or EstimationBudget()
    kappa, source = resolve_kappa(m, kappa)
    if not f.floor > 0:
        raise DomainError("Negative moments need a positive function", {"floor": f.floor})
    sup = sup_log_phi(f, m, budget)
    beta = sup.value / (kappa * math.log(2.0))
    witness = {"measure": m.describe(), "function": f.describe(), "beta": beta}
    if beta == 0.0:
        return [trivial_pass(f"{check_id}.median", "beta = 0: f is constant", kappa, source, witness)]
    if not math.isfinite(beta):
        raise DomainError("beta must be finite", {"beta": beta})
    med = levy_mean(f, m, budget)
    witness["median"] = med.value

    results = []
    for p in p_grid:
        if not 0 < p < 1.0 / beta:
            logger.info(f"{check_id}: p = {p:g} outside (0, 1/beta = {1.0 / beta:.4g}); skipped")
            continue
        factor = (math.e / (1.0 - beta * p)) ** beta
        rhs = lp_norm(f, m, -p, budget).scaled(factor)
        results.append(verdict(f"{check_id}.median[p={p:g}]", med, rhs, kappa, source, {**witness, "p": p},
                               seed=budget.seed))

    if not 0 < eps * beta < 1:
        raise DomainError("Small-ball bound needs 0 < eps beta < 1", {"eps": eps, "beta": beta})
    prefactor = (math.e / (eps * beta)) ** (1.0 - eps * beta)
    for t in t_grid:
        if not 0 < t <= 1:
            raise DomainError("Small-ball levels must lie in (0, 1]", {"t": t})
        mass = sublevel_mass(m, f, t * med.value, budget, closed=True)
        rhs = Estimate.exact(prefactor * t ** (1.0 / beta - eps))
        results.append(verdict(f"{check_id}.small-ball[t={t:g}]", mass, rhs, kappa, source,
                               {**witness, "t": float(t), "eps": eps}, seed=budget.seed))
    return results
