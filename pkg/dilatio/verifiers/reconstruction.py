"""
Recovery of the dilation inequality from the entropy bound along the
f_sigma family.
"""
from typing import List, Optional, Sequence, Tuple
import logging
import math

import numpy as np
from scipy import optimize

from ..convex_geometry import SymmetricConvexBody
from ..estimators import entropy
from ..measures import Measure, mass_of_body
from ..qc_functions import f_sigma, neville
from ..schemas import CheckResult, ConvergenceRow, EstimationBudget, Estimate
from .base import fail_tolerance, resolve_kappa, trivial_pass, verdict
from .dilation import MASS_EDGE, check_dilation
from .entropy import integral_of

logger = logging.getLogger(__name__)

DEFAULT_SIGMAS = tuple(2.0 ** -k for k in range(2, 11))
FIT_TAIL = 6
BOUNDARY_TOL = 1e-6
REPRODUCTION_TOL = 5e-3


def _limit(sigmas: np.ndarray, values: np.ndarray) -> Tuple[float, float, dict]:
    """sigma -> 0 limit from a fit L - a sigma^gamma over the tail of the sequence."""
    s, v = sigmas[-FIT_TAIL:], values[-FIT_TAIL:]
    slope = (v[0] - v[-1]) / (s[0] - s[-1]) if s[0] != s[-1] else 0.0
    try:
        params, cov = optimize.curve_fit(
            lambda x, L, a, g: L - a * x ** g, s, v, p0=(v[-1], -slope, 1.0),
            bounds=([-np.inf, -np.inf, 0.1], [np.inf, np.inf, 4.0]), maxfev=20000,
        )
        err = float(np.sqrt(cov[0, 0])) if np.all(np.isfinite(cov)) else abs(params[0] - v[-1])
        return float(params[0]), max(err, 1e-14), {"a": float(params[1]), "gamma": float(params[2])}
    except (RuntimeError, ValueError) as exc:
        logger.debug(f"Power-law fit failed ({exc}); using polynomial extrapolation")
        value = float(neville(s[-3:], v[-3:]))
        return value, abs(value - v[-1]), {"fallback": "polynomial"}


def reconstruct_dilation(m: Measure, K: SymmetricConvexBody, kappa: Optional[float] = None,
                         sigmas: Sequence[float] = DEFAULT_SIGMAS, budget: Optional[EstimationBudget] = None,
                         check_id: str = "reconstruction") -> Tuple[CheckResult, List[ConvergenceRow]]:
    """Ent(f_sigma) and (1/kappa) int Phi_{f_sigma} as sigma -> 0.

    The limits are -(1 - mu(K)) log(1 - mu(K)) and mu*(K)/kappa; the result
    compares kappa times each limit, i.e. the two sides of the dilation
    inequality, and cross-checks them against check_dilation.
    """
    budget = budget or EstimationBudget()
    kappa, source = resolve_kappa(m, kappa)
    sigmas = np.sort(np.asarray(sigmas, dtype=float))[::-1]
    mu = mass_of_body(m, K, budget)
    witness = {"measure": m.describe(), "body": K.describe(), "mass": mu.value}
    if mu.value >= 1.0 - MASS_EDGE:
        return trivial_pass(check_id, "mu(K) = 1", kappa, source, witness), []

    notes = []
    closure = mass_of_body(m, K.scaled(1.0 + 1e-9), budget)
    if closure.value - mu.value > BOUNDARY_TOL:
        notes.append(f"boundary carries mass {closure.value - mu.value:.3e}")

    rows = []
    for sigma in sigmas:
        f = f_sigma(K, float(sigma))
        ent = entropy(f, m, budget)
        phi_int = integral_of(m, f, f.phi_field, budget).scaled(1.0 / kappa)
        holds = ent.value <= phi_int.value + 3.0 * math.hypot(ent.std_error, phi_int.std_error)
        rows.append(ConvergenceRow(sigma=float(sigma), entropy=ent.value, phi_integral=phi_int.value,
                                   entropy_error=ent.std_error, phi_error=phi_int.std_error, holds=holds))
        logger.debug(f"{check_id}: sigma={sigma:.3e} Ent={ent.value:.10g} Phi/kappa={phi_int.value:.10g}")

    s = np.array([r.sigma for r in rows])
    ent_limit, ent_err, ent_fit = _limit(s, np.array([r.entropy for r in rows]))
    phi_limit, phi_err, phi_fit = _limit(s, np.array([r.phi_integral for r in rows]))
    lhs = Estimate(value=kappa * ent_limit, std_error=kappa * ent_err, method="sigma-extrapolation", budget=budget)
    rhs = Estimate(value=kappa * phi_limit, std_error=kappa * phi_err, method="sigma-extrapolation", budget=budget)

    direct = check_dilation(m, K, kappa, budget, check_id=f"{check_id}.direct")
    witness.update({
        "entropy_limit": ent_limit, "phi_limit": phi_limit, "entropy_fit": ent_fit, "phi_fit": phi_fit,
        "direct_lhs": direct.lhs.value, "direct_rhs": direct.rhs.value,
        "convergence": [row.model_dump() for row in rows],
    })
    result = verdict(check_id, lhs, rhs, kappa, source, witness, seed=budget.seed, notes=notes)

    violated = [r.sigma for r in rows
                if r.entropy - r.phi_integral > max(3.0 * math.hypot(r.entropy_error, r.phi_error),
                                                    fail_tolerance(r.phi_integral))]
    if violated:
        return result.model_copy(update={"status": "fail",
                                         "notes": result.notes + [f"entropy bound fails at sigma {violated}"]}), rows

    gaps = (abs(lhs.value - direct.lhs.value), abs(rhs.value - direct.rhs.value))
    scale = max(1.0, abs(direct.lhs.value), abs(direct.rhs.value))
    if max(gaps) > REPRODUCTION_TOL * scale or notes:
        extra = [] if max(gaps) <= REPRODUCTION_TOL * scale else [f"limits differ from the direct check by {max(gaps):.3e}"]
        status = "inconclusive" if result.status == "pass" else result.status
        logger.warning(f"{check_id}: {'; '.join(extra + notes)}")
        result = result.model_copy(update={"status": status, "notes": result.notes + extra})
    return result, rows
