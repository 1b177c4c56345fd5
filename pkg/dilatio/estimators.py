"""
Estimators for the functionals behind dilation and entropy inequalities.

Every estimator takes an EstimationBudget and returns an Estimate (value,
error bar, method, flags). Statistical or numerical trouble is reported
through flags; only genuinely invalid inputs raise.
"""

from typing import Callable, List, Optional, Sequence, Tuple
import logging
import math

import numpy as np
from scipy import linalg, optimize

from .convex_geometry import EuclideanBall, IntersectionBody, SymmetricConvexBody, dilate
from .exceptions import DegenerateInputError, DomainError, UnsupportedOperationError
from .measures import GaussianMeasure, Measure, expect, integrate, mass_of_body
from .qc_functions import QcFunction, gradient_field, neville
from .quadrature import GaussLegendre, fixed_nodes, gauss_legendre, gauss_legendre_grid
from .schemas import EstimationBudget, Estimate

logger = logging.getLogger(__name__)

DILATION_LADDER = tuple(2.0 ** -k for k in range(5, 15))
LADDER_TOL = 1e-6
MIN_EDGE_GAP = 1e-10
OUTWARD_PUSH = 1e-9
CERTIFICATE_CLIP = 30.0
COAREA_TAIL = {"quadrature": 1e-12, "monte-carlo": 1e-6}
COAREA_LEVELS = {1: 256, 2: 48}


def _function_kwargs(f: QcFunction) -> dict:
    return {"ray_breaks": f.ray_breaks, "angle_breaks": f.angle_breaks()}


def _check_dimensions(f: QcFunction, m: Measure) -> None:
    if f.dimension != m.dimension:
        raise DomainError("Function and measure dimensions differ", {"function": f.dimension, "measure": m.dimension})


# --- entropy ------------------------------------------------------------------

def _entropy_moments(f: QcFunction, m: Measure, budget: EstimationBudget):
    def F(X):
        v = f._value(X)
        if np.any(v < 0):
            raise DomainError("Entropy needs a nonnegative function", {"min": float(v.min())})
        with np.errstate(divide="ignore", invalid="ignore"):
            vlogv = np.where(v > 0, v * np.log(v), 0.0)
        return np.column_stack([v, vlogv])

    return integrate(m, F, budget, **_function_kwargs(f))


def entropy(f: QcFunction, m: Measure, budget: EstimationBudget) -> Estimate:
    """Ent(f) = int f log f - (int f) log(int f), with 0 log 0 = 0."""
    _check_dimensions(f, m)
    result = _entropy_moments(f, m, budget)
    mass, flogf = float(result.values[0]), float(result.values[1])
    if mass <= 0:
        raise DegenerateInputError("Function has zero integral", {"integral": mass})
    value = flogf - mass * math.log(mass)
    grad = np.array([-(math.log(mass) + 1.0), 1.0])
    if result.covariance is not None:
        err = math.sqrt(max(float(grad @ result.covariance @ grad), 0.0))
    else:
        err = float(np.abs(grad) @ result.errors)
    flags = list(result.flags) + ([] if result.converged else ["inconclusive"])
    return Estimate(value=value, std_error=err, method=result.method, budget=budget, seed=result.seed, flags=flags,
                    details={"integral": mass, "f_log_f": flogf})


def entropy_variational(f: QcFunction, m: Measure, budget: EstimationBudget) -> Estimate:
    """inf over r > 0 of int (f log f - f log r - f + r) dmu; the minimiser is r = int f."""
    _check_dimensions(f, m)
    result = _entropy_moments(f, m, budget)
    mass, flogf = float(result.values[0]), float(result.values[1])
    if mass <= 0:
        raise DegenerateInputError("Function has zero integral", {"integral": mass})
    r_star = optimize.brentq(lambda r: 1.0 - mass / r, mass / 16.0, 16.0 * mass, xtol=1e-15, rtol=1e-15)
    value = flogf - mass * math.log(r_star) - mass + r_star
    err = float(result.errors[1] + abs(math.log(r_star)) * result.errors[0])
    return Estimate(value=value, std_error=err, method=f"{result.method}+variational", budget=budget,
                    seed=result.seed, flags=list(result.flags), details={"r_star": r_star})


Certificate = Callable[[np.ndarray], np.ndarray]


def log_certificate(f: QcFunction, clip: float = CERTIFICATE_CLIP) -> Certificate:
    """phi = log f clipped to [-clip, clip]; the dual bound ignores constant shifts."""
    def certificate(X):
        with np.errstate(divide="ignore"):
            return np.clip(np.log(f._value(X)), -clip, clip)
    return certificate


def entropy_dual_lower_bound(f: QcFunction, m: Measure, certificates: Sequence[Certificate],
                             budget: EstimationBudget) -> Estimate:
    """Z * max_j [int g phi_j dmu - log int exp(phi_j) dmu] with g = f / Z, Z = int f."""
    _check_dimensions(f, m)
    certificates = list(certificates)
    if not certificates:
        raise DomainError("At least one certificate is required")
    Z = expect(m, f._value, budget, **_function_kwargs(f))
    if Z.value <= 0:
        raise DegenerateInputError("Function has zero integral", {"integral": Z.value})
    k = len(certificates)

    def F(X):
        g = f._value(X) / Z.value
        cols = [g * c(X) for c in certificates] + [np.exp(c(X)) for c in certificates]
        return np.column_stack(cols)

    result = integrate(m, F, budget, **_function_kwargs(f))
    bounds = result.values[:k] - np.log(result.values[k:])
    errors = result.errors[:k] + result.errors[k:] / result.values[k:]
    best = int(np.argmax(bounds))
    return Estimate(
        value=float(Z.value * bounds[best]),
        std_error=float(Z.value * errors[best] + abs(bounds[best]) * Z.std_error),
        method=result.method,
        budget=budget,
        seed=result.seed,
        flags=["lower-bound"] + list(result.flags),
        details={"bounds": (Z.value * bounds).tolist(), "best": best},
    )


# --- Fisher information and norms ----------------------------------------------

def _fisher_singular(f: QcFunction, m: Measure) -> bool:
    """Integrand growth near a zero of f faster than the volume element decays."""
    if f.floor != 0.0:
        return False
    n = f.dimension
    directions = np.vstack([np.eye(n), -np.eye(n)])

    def integrand(r):
        X = r * directions
        grad = gradient_field(f, X)
        v = f._value(X)
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(v > 0, np.sum(grad * grad, axis=1) / v, np.inf)

    near, far = integrand(1e-8), integrand(1e-6)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(far > 0, near / far, np.where(near > 0, np.inf, 0.0))
    return bool(np.any(ratio >= 0.99 * 100.0 ** n))


def fisher_information(f: QcFunction, m: Measure, budget: EstimationBudget) -> Estimate:
    """I(f) = int |grad f|^2 / f dmu with 0/0 = 0."""
    _check_dimensions(f, m)

    def F(X):
        grad = gradient_field(f, X)
        v = f._value(X)
        g2 = np.sum(grad * grad, axis=1)
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(v > 0, g2 / v, np.where(g2 == 0, 0.0, np.inf))

    result = expect(m, F, budget, **_function_kwargs(f))
    if _fisher_singular(f, m):
        logger.warning(f"Fisher information integrand of {f.kind} is singular at the origin")
        result = result.flagged("inconclusive", "singular")
    return result


def lp_norm(f: QcFunction, m: Measure, p: float, budget: EstimationBudget) -> Estimate:
    """(int |f|^p dmu)^(1/p) for p != 0; negative p needs f(0) > 0."""
    _check_dimensions(f, m)
    if p == 0:
        raise DomainError("lp_norm needs p != 0")
    if p < 0 and not f.floor > 0:
        raise DomainError("Negative exponents need a positive function", {"p": p, "floor": f.floor})
    moment = expect(m, lambda X: np.abs(f._value(X)) ** p, budget, **_function_kwargs(f))
    if moment.value <= 0:
        return moment.model_copy(update={"value": 0.0})
    value = moment.value ** (1.0 / p)
    err = abs(value / (p * moment.value)) * moment.std_error
    return moment.model_copy(update={"value": float(value), "std_error": float(err), "details": {"moment": moment.value, "p": p}})


def orlicz_norm(f: QcFunction, m: Measure, alpha: float, budget: EstimationBudget,
                p_grid: Optional[Sequence[float]] = None) -> Estimate:
    """psi_alpha norm: the t with int exp((|f|/t)^alpha) dmu = 2.

    The sup form sup_p ||f||_p / p^(1/alpha) over a p-grid is returned in
    `details` together with the ratio of the two forms.
    """
    _check_dimensions(f, m)
    if not alpha >= 1:
        raise DomainError("Orlicz exponent must be at least 1", {"alpha": alpha})
    kwargs = _function_kwargs(f)
    cache = {}

    def excess(t: float) -> float:
        if t not in cache:
            def F(X):
                with np.errstate(over="ignore"):
                    return np.exp((np.abs(f._value(X)) / t) ** alpha)
            est = expect(m, F, budget, **kwargs)
            diverged = not math.isfinite(est.value) or est.value > 1e12 or est.inconclusive
            cache[t] = (math.inf if diverged else est.value - 2.0, est)
        return cache[t][0]

    hi = 1.0
    doublings = 0
    while not excess(hi) < 0:
        hi *= 2.0
        doublings += 1
        if doublings > 60:
            logger.warning(f"Orlicz integral of {f.kind} diverges for every tested t")
            return Estimate(value=math.inf, method="root-find", budget=budget, flags=["infinite"])
    lo = hi / 2.0
    while excess(lo) < 0:
        lo /= 2.0
        if lo < 1e-300:
            return Estimate.exact(0.0, method="root-find", budget=budget)

    def bounded(t: float) -> float:
        v = excess(t)
        return 1e300 if math.isinf(v) else v

    root = optimize.brentq(bounded, lo, hi, xtol=1e-13, rtol=1e-13)
    excess(root)
    est = cache[root][1]
    step = 1e-4 * root
    slope = (bounded(root + step) - bounded(root - step)) / (2 * step)
    err = abs(est.std_error / slope) if slope != 0 and math.isfinite(slope) else 0.0

    grid = list(p_grid) if p_grid is not None else [alpha * k for k in (1, 1.5, 2, 3, 4, 6, 8, 12, 16)]
    sup_form = max(lp_norm(f, m, p, budget).value / p ** (1.0 / alpha) for p in grid)
    ratio = root / sup_form if sup_form > 0 else math.nan
    return Estimate(value=float(root), std_error=float(err), method=f"{est.method}+root-find", budget=budget,
                    seed=est.seed, flags=list(est.flags),
                    details={"sup_form": float(sup_form), "ratio": float(ratio), "p_grid": grid})


# --- level sets and Levy mean ------------------------------------------------

def sublevel_mass(m: Measure, f: QcFunction, t: float, budget: EstimationBudget, closed: bool = False) -> Estimate:
    """mu({f < t}), or mu({f <= t}) when closed."""
    level = t + 1e-12 * max(1.0, abs(t)) if closed else t
    try:
        body = f.level_body(level)
    except DomainError:
        return Estimate.exact(0.0, budget=budget)
    if body is None:
        return Estimate.exact(1.0, budget=budget)
    return mass_of_body(m, body, budget)


def levy_mean(f: QcFunction, m: Measure, budget: EstimationBudget) -> Estimate:
    """med(f) = inf{t : mu(f <= t) >= 1/2}.

    Quadrature bisects the sublevel mass; Monte Carlo takes the sample median
    with an order-statistic confidence interval.
    """
    _check_dimensions(f, m)
    method = budget.resolve(m.dimension)
    if method == "monte-carlo":
        count = int(budget.samples)
        if count < 1:
            raise DomainError("Monte Carlo needs a positive sample count", {"samples": count})
        X = m.sample(count, np.random.default_rng(budget.seed))
        v = np.sort(f._value(X))
        med = float(v[(count - 1) // 2])
        half = 1.96 * math.sqrt(count) / 2.0
        lo = v[max(int(count / 2 - half), 0)]
        hi = v[min(int(count / 2 + half), count - 1)]
        return Estimate(value=med, std_error=float((hi - lo) / (2 * 1.96)), method="monte-carlo",
                        budget=budget, seed=budget.seed, details={"ci": [float(lo), float(hi)]})

    def G(t: float) -> float:
        return sublevel_mass(m, f, t, budget, closed=True).value

    lo = f.floor
    if G(lo) >= 0.5:
        return Estimate.exact(lo, method="quadrature", budget=budget)
    hi = lo + 1.0
    while G(hi) < 0.5:
        hi = lo + 2.0 * (hi - lo)
        if hi - lo > 1e12:
            raise DegenerateInputError("Sublevel masses never reach one half")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if G(mid) >= 0.5:
            hi = mid
        else:
            lo = mid
        if hi - lo <= 1e-13 * max(1.0, abs(hi)):
            break
    return Estimate(value=float(hi), std_error=float(hi - lo), method="quadrature", budget=budget)


# --- dilation area and perimeter ----------------------------------------------

def _restrict_to_support(m: Measure, K: SymmetricConvexBody) -> SymmetricConvexBody:
    if m.support is None:
        return K
    if K.dimension == 1:
        t = min(float(K.radial_function(np.ones((1, 1)))[0]), float(m.support.radial_function(np.ones((1, 1)))[0]))
        return EuclideanBall(1, t)
    return IntersectionBody([K, m.support])


def _shell_1d(m: Measure, inner: float, widths: np.ndarray, order: int = 20) -> np.ndarray:
    """Mass of (-inner - w, -inner] and [inner, inner + w) for each width w."""
    x, w = gauss_legendre(order)
    half = 0.5 * np.asarray(widths, dtype=float)[:, None]
    nodes = inner + half * (1.0 + x)
    weights = half * w
    right = m.density(nodes.reshape(-1, 1)).reshape(nodes.shape)
    left = m.density(-nodes.reshape(-1, 1)).reshape(nodes.shape)
    return np.sum((right + left) * weights, axis=-1)


def _support_edge(m: Measure, t: float) -> float:
    """Nearest finite support edge beyond radius t in 1-d (inf when there is none)."""
    lo, hi = m.interval_support()
    edges = [e for e in (hi, -lo) if math.isfinite(e) and e > t]
    return min(edges) if edges else math.inf


def _fit_ladder(eps: np.ndarray, cap: float) -> Tuple[np.ndarray, List[str]]:
    """Rescale a decreasing ladder so its largest value is half of cap.

    Shells must end before the density jump at a support edge.
    """
    if not eps[0] >= cap:
        return eps, []
    flags = [] if cap > MIN_EDGE_GAP else ["inconclusive"]
    return eps * (0.5 * cap / eps[0]), flags


def _extrapolate_ladder(eps: np.ndarray, quotients: np.ndarray, errors: np.ndarray, lower: bool = True):
    """Limit of the quotient ladder (eps decreasing); liminf fallback when unsettled."""
    value = neville(eps[-3:], quotients[-3:])
    previous = neville(eps[-4:-1], quotients[-4:-1])
    scale = max(1.0, abs(value))
    converged = abs(value - previous) <= LADDER_TOL * scale
    steps = np.diff(quotients[-5:])
    monotone = np.all(steps >= -LADDER_TOL * scale) or np.all(steps <= LADDER_TOL * scale)
    flags = []
    if not (converged and monotone):
        flags.append("inconclusive")
        value = float(quotients.min() if lower else quotients.max())
    err = abs(value - previous) + float(np.max(errors[-3:]) * 8.0)
    return float(value), float(err), flags


def _wls_intercept_weights(eps: np.ndarray) -> np.ndarray:
    """Weights c with sum c_k q_k the intercept of a weighted linear fit q = a + b eps."""
    A = np.column_stack([np.ones_like(eps), eps])
    W = np.diag(eps)
    return (np.linalg.inv(A.T @ W @ A) @ A.T @ W)[0]


def dilation_area(m: Measure, K: SymmetricConvexBody, ladder: Optional[Sequence[float]] = None,
                  budget: Optional[EstimationBudget] = None) -> Estimate:
    """mu*(K) = liminf [mu(K_eps) - mu(K)] / eps.

    Quadrature integrates the thin shells K_eps minus K directly; Monte Carlo
    reuses one sample for every shell and applies fixed extrapolation
    weights per sample.
    """
    budget = budget or EstimationBudget()
    if K.dimension != m.dimension:
        raise DomainError("Body and measure dimensions differ", {"body": K.dimension, "measure": m.dimension})
    eps = np.sort(np.asarray(ladder if ladder is not None else DILATION_LADDER, dtype=float))[::-1]
    if eps.size < 4 or np.any((eps <= 0) | (eps >= 1)):
        raise DomainError("Ladder must hold at least four values in (0, 1)")
    body = _restrict_to_support(m, K)
    edge_flags: List[str] = []
    if m.dimension == 1:
        t = float(body.radial_function(np.ones((1, 1)))[0])
        edge = _support_edge(m, t)
        eps, edge_flags = _fit_ladder(eps, (edge - t) / (edge + t) if math.isfinite(edge) else math.inf)
    factors = (1.0 + eps) / (1.0 - eps)
    method = budget.resolve(m.dimension)

    if method == "quadrature" and m.dimension == 1:
        shells = _shell_1d(m, t, t * 2.0 * eps / (1.0 - eps))
        q = shells / eps
        value, err, flags = _extrapolate_ladder(eps, q, np.full_like(q, 1e-14))
        flags += [f for f in edge_flags if f not in flags]
        return Estimate(value=value, std_error=err, method="quadrature+extrapolation", budget=budget, flags=flags,
                        details={"ladder": eps.tolist(), "quotients": q.tolist()})

    if method == "quadrature":
        results = [expect(m, lambda X: np.ones(X.shape[0]), budget, region=dilate(body, e), exclude=body) for e in eps]
        q = np.array([r.value for r in results]) / eps
        errs = np.array([r.std_error for r in results]) / eps
        value, err, flags = _extrapolate_ladder(eps, q, errs)
        flags += [f for r in results for f in r.flags if f not in flags]
        return Estimate(value=value, std_error=err, method="quadrature+extrapolation", budget=budget, flags=flags,
                        details={"ladder": eps.tolist(), "quotients": q.tolist()})

    count = int(budget.samples)
    if count < 2:
        raise DomainError("Monte Carlo needs at least two samples", {"samples": count})
    X = m.sample(count, np.random.default_rng(budget.seed))
    g = body._gauge(X)
    c = _wls_intercept_weights(eps)
    shells = (g[:, None] >= 1.0) & (g[:, None] < factors[None, :])
    Y = shells.astype(float) @ (c / eps)
    value = float(Y.mean())
    err = float(Y.std(ddof=1) / math.sqrt(count))
    q = shells.mean(axis=0) / eps
    flags = list(edge_flags)
    steps = np.diff(q)
    noise = 3.0 * np.sqrt(np.maximum(q / (eps * count), 1e-300))
    if not (np.all(steps >= -noise[1:]) or np.all(steps <= noise[1:])) and "inconclusive" not in flags:
        flags.append("inconclusive")
    return Estimate(value=value, std_error=err, method="monte-carlo+coupled-ladder", budget=budget,
                    seed=budget.seed, flags=flags, details={"ladder": eps.tolist(), "quotients": q.tolist()})


def one_sided_interval_dilation_area(m: Measure, x: float, ladder: Optional[Sequence[float]] = None,
                                     budget: Optional[EstimationBudget] = None) -> Estimate:
    """Dilation area of A = (0, x) for a measure on the half-line, with A_eps = (0, x/(1 - eps))."""
    budget = budget or EstimationBudget()
    if m.dimension != 1 or m.interval_support() != (0.0, math.inf):
        raise UnsupportedOperationError("One-sided dilation needs a 1-d measure supported on (0, inf)")
    if not x > 0:
        raise DomainError("Interval endpoint must be positive", {"x": x})
    eps = np.sort(np.asarray(ladder if ladder is not None else DILATION_LADDER, dtype=float))[::-1]
    nodes, weights = fixed_nodes(x, x / (1.0 - eps), 20)
    shells = np.sum(m.density(nodes.reshape(-1, 1)).reshape(nodes.shape) * weights, axis=-1)
    q = shells / eps
    value, err, flags = _extrapolate_ladder(eps, q, np.full_like(q, 1e-14))
    return Estimate(value=value, std_error=err, method="quadrature+extrapolation", budget=budget, flags=flags,
                    details={"x": x, "quotients": q.tolist()})


def perimeter(m: Measure, K: SymmetricConvexBody, ladder: Optional[Sequence[float]] = None,
              budget: Optional[EstimationBudget] = None, resolution: int = 256) -> Estimate:
    """mu+(K) = liminf [mu(K + eps B) - mu(K)] / eps."""
    budget = budget or EstimationBudget()
    if K.dimension != m.dimension:
        raise DomainError("Body and measure dimensions differ", {"body": K.dimension, "measure": m.dimension})
    eps = np.sort(np.asarray(ladder if ladder is not None else DILATION_LADDER, dtype=float))[::-1]
    if eps.size < 4 or np.any((eps <= 0) | (eps >= 1)):
        raise DomainError("Ladder must hold at least four values in (0, 1)")

    if m.dimension == 1:
        t = float(K.radial_function(np.ones((1, 1)))[0])
        eps, edge_flags = _fit_ladder(eps, _support_edge(m, t) - t)
        q = _shell_1d(m, t, eps) / eps
        value, err, flags = _extrapolate_ladder(eps, q, np.full_like(q, 1e-14))
        flags += [f for f in edge_flags if f not in flags]
        return Estimate(value=value, std_error=err, method="quadrature+extrapolation", budget=budget, flags=flags,
                        details={"ladder": eps.tolist(), "quotients": q.tolist()})

    if budget.resolve(m.dimension) == "quadrature" and m.dimension <= 3:
        try:
            fine = _boundary_density_integral(m, K, resolution)
            coarse = _boundary_density_integral(m, K, max(resolution // 2, 4))
            return Estimate(value=fine, std_error=max(abs(fine - coarse), 1e-15), method="boundary-quadrature",
                            budget=budget)
        except UnsupportedOperationError:
            logger.debug(f"No boundary rule for {K.kind}; falling back to sampled neighbourhoods")

    count = int(budget.samples)
    if count < 2:
        raise DomainError("Monte Carlo needs at least two samples", {"samples": count})
    X = m.sample(count, np.random.default_rng(budget.seed))
    d = K.distance(X)
    inside = K._gauge(X) < 1.0
    shells = (~inside[:, None]) & (d[:, None] < eps[None, :])
    c = _wls_intercept_weights(eps)
    Y = shells.astype(float) @ (c / eps)
    return Estimate(value=float(Y.mean()), std_error=float(Y.std(ddof=1) / math.sqrt(count)),
                    method="monte-carlo+coupled-ladder", budget=budget, seed=budget.seed,
                    details={"quotients": (shells.mean(axis=0) / eps).tolist()})


def _boundary_density_integral(m: Measure, K: SymmetricConvexBody, resolution: int) -> float:
    rule = K.boundary_rule(resolution)
    density = m.density(rule.points + OUTWARD_PUSH * rule.normals)
    return float(np.sum(rule.weights * density))


def surface_moment_integral(m: Measure, K: SymmetricConvexBody, p_prime: float, resolution: int = 256) -> Estimate:
    """int over the boundary of <x, eta> |x|^p' exp(-phi) dsigma."""
    if K.dimension != m.dimension:
        raise DomainError("Body and measure dimensions differ")

    def evaluate(res: int) -> float:
        rule = K.boundary_rule(res)
        pairing = np.sum(rule.points * rule.normals, axis=1)
        radius = np.linalg.norm(rule.points, axis=1) ** p_prime
        return float(np.sum(rule.weights * pairing * radius * m.density(rule.points)))

    value = evaluate(resolution)
    err = 0.0 if m.dimension == 1 else abs(value - evaluate(max(resolution // 2, 4)))
    return Estimate(value=value, std_error=err, method="boundary-quadrature")


# --- transport ----------------------------------------------------------------

def w2_distance_1d(m1: Measure, m2: Measure, budget: Optional[EstimationBudget] = None) -> Estimate:
    """W2 by quantile coupling in 1-d, or in closed form for a Gaussian pair."""
    budget = budget or EstimationBudget()
    if isinstance(m1, GaussianMeasure) and isinstance(m2, GaussianMeasure):
        if m1.dimension != m2.dimension:
            raise DomainError("Gaussian dimensions differ")
        root2 = linalg.sqrtm(m2.covariance)
        cross = linalg.sqrtm(root2 @ m1.covariance @ root2)
        trace = float(np.real(np.trace(m1.covariance + m2.covariance - 2.0 * cross)))
        w2sq = float(np.sum((m1.mean - m2.mean) ** 2)) + max(trace, 0.0)
        return Estimate.exact(math.sqrt(w2sq), method="gaussian-closed-form", budget=budget)
    if m1.dimension != 1 or m2.dimension != 1:
        raise UnsupportedOperationError("W2 beyond one dimension is available only for Gaussian pairs")
    engine = GaussLegendre(order=budget.nodes, tol=budget.tol)
    res = engine.integrate(lambda u: (np.asarray(m1.quantile(u)) - np.asarray(m2.quantile(u))) ** 2, 0.0, 1.0, points=[0.5])
    w2sq = max(float(res.value), 0.0)
    value = math.sqrt(w2sq)
    err = float(res.error) / (2.0 * value) if value > 0 else math.sqrt(float(res.error))
    flags = [] if res.converged else ["inconclusive"]
    return Estimate(value=value, std_error=err, method="quantile-coupling", budget=budget, flags=flags)


# --- co-area -----------------------------------------------------------------

def level_dilation_area(m: Measure, f: QcFunction, t: float, budget: EstimationBudget) -> Estimate:
    """mu*({f < t}); zero for empty or full sublevel sets."""
    try:
        body = f.level_body(t)
    except DomainError:
        return Estimate.exact(0.0, budget=budget)
    if body is None:
        return Estimate.exact(0.0, budget=budget)
    return dilation_area(m, body, budget=budget)


def _coarea_top(m: Measure, f: QcFunction, budget: EstimationBudget, threshold: float) -> float:
    floor = f.floor
    if math.isfinite(f.sup):
        return f.sup
    gap = 1.0
    for _ in range(80):
        top = floor + gap
        if sublevel_mass(m, f, top, budget).value > 1.0 - threshold:
            return top
        gap *= 2.0
    raise DegenerateInputError("Sublevel masses never approach one", {"floor": floor})


def coarea_integral(m: Measure, f: QcFunction, p: float, sign: str, budget: EstimationBudget) -> Tuple[Estimate, Estimate]:
    """Both sides of the co-area inequality.

    positive: int_0^inf t^(p-1) mu*({f < t}) dt  vs  int f^(p-1) Phi_f dmu
    negative: int_0^inf s^(-p-1) mu*({f < s}) ds vs  int f^(-p-1) Phi_f dmu
    """
    _check_dimensions(f, m)
    if not p > 0:
        raise DomainError("Co-area exponent must be positive", {"p": p})
    if sign not in ("positive", "negative"):
        raise DomainError("sign must be 'positive' or 'negative'", {"sign": sign})
    floor = f.floor
    if sign == "negative" and not floor > 0:
        raise DomainError("Negative co-area form needs a positive function", {"floor": floor})
    if floor < 0:
        raise DomainError("Co-area form needs a nonnegative function", {"floor": floor})
    exponent = p - 1.0 if sign == "positive" else -p - 1.0

    def integrand(X):
        v = f._value(X)
        phi_values = f.phi_field(X)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.where(phi_values > 0, v ** exponent * phi_values, 0.0)
        return out

    rhs = expect(m, integrand, budget, **_function_kwargs(f))

    method = budget.resolve(m.dimension)
    top = _coarea_top(m, f, budget, COAREA_TAIL[method])
    breaks = []
    if m.dimension == 1:
        # level areas vanish past the outer support edge and jump at the inner one
        lo, hi = m.interval_support()
        inner, outer = sorted((abs(lo), abs(hi)))
        if math.isfinite(outer):
            top = min(top, float(f._value(np.array([[outer]]))[0]))
        if 0.0 < inner < outer:
            breaks.append(float(f._value(np.array([[inner]]))[0]))
        breaks = [t for t in breaks if floor < t < top]
    if top <= floor:
        return Estimate.exact(0.0, method=method, budget=budget), rhs
    levels = COAREA_LEVELS.get(m.dimension, 32)
    grid = [floor] + breaks + [top]
    pieces = [gauss_legendre_grid(a, b, levels) for a, b in zip(grid[:-1], grid[1:]) if b > a]
    nodes = np.concatenate([p[0] for p in pieces])
    weights = np.concatenate([p[1] for p in pieces])
    values, errors, flags = [], [], []
    for t in nodes:
        area = level_dilation_area(m, f, float(t), budget)
        values.append(area.value)
        errors.append(area.std_error)
        if area.inconclusive and "inconclusive" not in flags:
            flags.append("inconclusive")
    values, errors = np.asarray(values), np.asarray(errors)
    kernel = nodes ** exponent
    lhs_value = float(np.sum(weights * kernel * values))
    lhs_err = float(np.sum(np.abs(weights * kernel) * errors))
    lhs = Estimate(value=lhs_value, std_error=lhs_err, method=f"{method}+level-grid", budget=budget,
                   seed=budget.seed if method == "monte-carlo" else None, flags=flags,
                   details={"levels": levels, "t_max": top})
    return lhs, rhs
