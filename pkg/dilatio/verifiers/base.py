"""
Shared verdict logic for inequality checks.
"""
from typing import Any, Dict, Iterable, List, Optional, Tuple
import logging
import math

from ..config import settings
from ..exceptions import DomainError
from ..measures import Measure
from ..schemas import CheckResult, Estimate, combined_error

logger = logging.getLogger(__name__)

ROUNDOFF = 1e-10
STATUS_ORDER = {"fail": 0, "inconclusive": 1, "pass": 2}


def resolve_kappa(m: Measure, kappa: Optional[float] = None) -> Tuple[float, str]:
    """User-supplied kappa wins; otherwise the measure's tagged claim."""
    if kappa is not None:
        if not kappa > 0:
            raise DomainError("kappa must be positive", {"kappa": kappa})
        return float(kappa), "user"
    if m.kappa is None or not m.kappa_source:
        raise DomainError(f"No tagged kappa for measure kind {m.kind}; supply one", {"kind": m.kind})
    return m.kappa, m.kappa_source


def fail_tolerance(rhs: float) -> float:
    return max(settings.fail_abs_tol, settings.fail_rel_tol * abs(rhs))


def verdict(
    check_id: str,
    lhs: Estimate,
    rhs: Estimate,
    kappa: Optional[float] = None,
    kappa_source: Optional[str] = None,
    witness: Optional[Dict[str, Any]] = None,
    seed: Optional[int] = None,
    notes: Optional[List[str]] = None,
) -> CheckResult:
    """Decide lhs <= rhs.

    pass when lhs <= rhs + 3 sigma; fail only when the excess also beats
    max(1e-6, 1e-3 |rhs|); inconclusive otherwise. An input estimate flagged
    inconclusive can never produce a fail and passes only with a margin
    larger than the fail tolerance.
    """
    margin = rhs.value - lhs.value
    err = combined_error(lhs, rhs)
    scale = max(1.0, abs(lhs.value), abs(rhs.value))
    tolerance = max(settings.sigma_threshold * err, ROUNDOFF * scale)
    fail_tol = fail_tolerance(rhs.value)
    notes = list(notes or [])
    if not (math.isfinite(lhs.value) and math.isfinite(rhs.value)):
        status = "pass" if (lhs.value == -math.inf or rhs.value == math.inf) else "inconclusive"
        notes.append("non-finite side")
    elif lhs.inconclusive or rhs.inconclusive:
        status = "pass" if margin > fail_tol else "inconclusive"
        notes.append("estimate flagged inconclusive")
    elif margin >= -tolerance:
        status = "pass"
    elif -margin > max(fail_tol, tolerance):
        status = "fail"
    else:
        status = "inconclusive"

    result = CheckResult(
        check_id=check_id,
        lhs=lhs,
        rhs=rhs,
        kappa=kappa,
        kappa_source=kappa_source,
        margin=float(margin) if math.isfinite(margin) else (math.inf if margin > 0 else -math.inf),
        tolerance=float(tolerance),
        status=status,
        witness=witness or {},
        seed=seed if seed is not None else (lhs.seed if lhs.seed is not None else rhs.seed),
        notes=notes,
    )
    log = logger.info if status == "pass" else logger.warning
    log(f"{check_id}: {status} (lhs {lhs.value:.10g}, rhs {rhs.value:.10g}, margin {margin:.3e})")
    return result


def trivial_pass(check_id: str, note: str, kappa: Optional[float] = None, kappa_source: Optional[str] = None,
                 witness: Optional[Dict[str, Any]] = None) -> CheckResult:
    zero = Estimate.exact(0.0, method="trivial")
    result = CheckResult(check_id=check_id, lhs=zero, rhs=zero, kappa=kappa, kappa_source=kappa_source, margin=0.0,
                         tolerance=0.0, status="pass", witness=witness or {}, notes=[note])
    logger.info(f"{check_id}: trivial pass ({note})")
    return result


def require_equality(result: CheckResult, tol: float) -> CheckResult:
    """Equality probes: a gap larger than tol in either direction is a failure."""
    if abs(result.margin) <= tol:
        return result
    logger.warning(f"{result.check_id}: equality gap {result.margin:.3e} exceeds {tol:.1e}")
    return result.model_copy(update={"status": "fail", "notes": result.notes + [f"equality gap exceeds {tol:g}"]})


def worst(results: Iterable[CheckResult]) -> CheckResult:
    """Most severe status, then smallest margin."""
    return min(results, key=lambda r: (STATUS_ORDER[r.status], r.margin))


def kappa_entropy_form(mu: Estimate, kappa: float) -> Estimate:
    """-kappa (1 - mu) log(1 - mu) with delta-method error."""
    m = min(max(mu.value, 0.0), 1.0)
    if m >= 1.0:
        return Estimate.exact(0.0, method=mu.method, budget=mu.budget)
    value = -kappa * (1.0 - m) * math.log1p(-m)
    err = kappa * abs(math.log1p(-m) + 1.0) * mu.std_error
    return Estimate(value=value, std_error=err, method=mu.method, budget=mu.budget, seed=mu.seed, flags=list(mu.flags))
