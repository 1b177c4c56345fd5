"""
Symmetric quasi-convex test functions.

A QcFunction evaluates vectorised on (m, n) arrays and exposes, where the
kind allows it, an analytic gradient, an analytic Phi functional

    Phi_f(x) = limsup_{eps -> 0} [f(x) - f((1 - eps)/(1 + eps) x)] / eps,

the subdifferential pairing inf_{y in df(x)} <x, y> for convex kinds, and
its sublevel bodies {f < t}. `phi` approximates Phi_f on an eps-ladder and
cross-checks it against the analytic identities.
"""

from abc import ABC, abstractmethod
from typing import Callable, List, Literal, NamedTuple, Optional, Sequence, Union
import logging
import math

import numpy as np

from .config import settings
from .convex_geometry import (
    AXIS_ANGLES,
    EuclideanBall,
    SymmetricConvexBody,
    as_points,
    unit_directions_2d,
)
from .exceptions import ConsistencyError, ConstructionError, DomainError, QuasiConvexityViolation
from .schemas import AuditReport, Estimate

logger = logging.getLogger(__name__)

Smoothness = Literal["C1", "locally-Lipschitz", "continuous"]

DEFAULT_LADDER = tuple(2.0 ** -k for k in range(4, 21))
LADDER_TAIL = 8
CONVERGENCE_TOL = 1e-6
AUDIT_TOL = 1e-9
LEVEL_RADIUS_CAP = 1e6


def shrink(eps: float) -> float:
    """(1 - eps)/(1 + eps), the factor relating K to its eps-dilation."""
    return (1.0 - eps) / (1.0 + eps)


class QcFunction(ABC):
    """Symmetric quasi-convex function on R^n (or on a symmetric domain)."""

    kind: str = "abstract"

    def __init__(self, dimension: int, smoothness: Smoothness = "continuous", convex: bool = False):
        if int(dimension) < 1:
            raise ConstructionError("Function dimension must be positive", {"dimension": dimension})
        self.dimension = int(dimension)
        self.smoothness = smoothness
        self.convex = convex

    @abstractmethod
    def _value(self, X: np.ndarray) -> np.ndarray:
        """Values on an (m, n) array."""

    def _gradient(self, X: np.ndarray) -> Optional[np.ndarray]:
        """Analytic gradient (NaN rows where undefined), or None."""
        return None

    def phi_analytic(self, X: np.ndarray) -> Optional[np.ndarray]:
        return None

    def subdiff_inf(self, X: np.ndarray) -> Optional[np.ndarray]:
        """inf over the subdifferential of <x, y>; convex kinds only."""
        return None

    def ray_breaks(self, U: np.ndarray) -> np.ndarray:
        """Radii along unit directions where f has kinks, shape (m, k)."""
        return np.empty((U.shape[0], 0))

    def angle_breaks(self) -> np.ndarray:
        return AXIS_ANGLES.copy()

    def level_body(self, t: float) -> Optional[SymmetricConvexBody]:
        """{f < t}: a body, None for all of R^n; DomainError when empty."""
        if t <= self.floor:
            raise DomainError("Sublevel set is empty", {"t": t, "floor": self.floor})
        return LevelSetBody(self, t)

    @property
    def floor(self) -> float:
        """f(0), the minimum of a symmetric quasi-convex function."""
        return float(self._value(np.zeros((1, self.dimension)))[0])

    @property
    def sup(self) -> float:
        return math.inf

    def value(self, x):
        X, single = as_points(x, self.dimension)
        v = self._value(X)
        return float(v[0]) if single else v

    def __call__(self, X: np.ndarray) -> np.ndarray:
        return self._value(X)

    def phi_field(self, X: np.ndarray, ladder: Sequence[float] = DEFAULT_LADDER) -> np.ndarray:
        """Phi_f on many points: analytic when available, else the ladder limit."""
        analytic = self.phi_analytic(X)
        if analytic is not None:
            return analytic
        return ladder_phi(self, X, ladder)[0]

    def describe(self) -> dict:
        return {"kind": self.kind, "dimension": self.dimension, "smoothness": self.smoothness}

    def __repr__(self) -> str:
        return f"{self.__class__.__name__}({self.describe()})"


class GaugePower(QcFunction):
    """||x||_K^p; Phi = 2p ||x||_K^p by homogeneity."""

    kind = "gauge-power"

    def __init__(self, body: SymmetricConvexBody, p: float = 1.0):
        if not p > 0:
            raise ConstructionError("Gauge power must be positive", {"p": p})
        smooth = body.is_smooth and p > 1
        super().__init__(body.dimension, "C1" if smooth else "locally-Lipschitz" if p >= 1 else "continuous",
                         convex=body.is_convex and p >= 1)
        self.body = body
        self.p = float(p)

    def _value(self, X):
        return self.body._gauge(X) ** self.p

    def _gradient(self, X):
        g = self.body._gauge(X)
        grad = self.body.gauge_gradient(X)
        with np.errstate(invalid="ignore", divide="ignore"):
            out = self.p * g[:, None] ** (self.p - 1.0) * grad
        if self.p > 1:
            out[g == 0] = 0.0
        return out

    def phi_analytic(self, X):
        return 2.0 * self.p * self.body._gauge(X) ** self.p

    def subdiff_inf(self, X):
        if not self.convex:
            return None
        return self.p * self.body._gauge(X) ** self.p

    def angle_breaks(self):
        return self.body.break_angles()

    def level_body(self, t):
        if t <= 0:
            raise DomainError("Sublevel set is empty", {"t": t})
        return self.body.scaled(t ** (1.0 / self.p))

    @property
    def floor(self):
        return 0.0

    def describe(self):
        return {**super().describe(), "p": self.p, "body": self.body.describe()}


class Radial(GaugePower):
    """|x|^p."""

    kind = "radial"

    def __init__(self, p: float, dimension: int = 1):
        super().__init__(EuclideanBall(dimension, 1.0), p)

    def describe(self):
        return {"kind": self.kind, "dimension": self.dimension, "p": self.p}


class ShiftedRadial(QcFunction):
    """(|x|^2 + c)^s."""

    kind = "shifted-radial"

    def __init__(self, c: float, s: float, dimension: int = 1):
        if not c >= 0:
            raise ConstructionError("Shift c must be nonnegative", {"c": c})
        if not s > 0:
            raise ConstructionError("Exponent s must be positive", {"s": s})
        if c > 0 or s > 0.5:
            smoothness = "C1"
        elif s == 0.5:
            smoothness = "locally-Lipschitz"
        else:
            smoothness = "continuous"
        super().__init__(dimension, smoothness, convex=s >= 0.5)
        self.c = float(c)
        self.s = float(s)

    def _base(self, X):
        return np.sum(X * X, axis=1) + self.c

    def _value(self, X):
        return self._base(X) ** self.s

    def _gradient(self, X):
        base = self._base(X)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = 2.0 * self.s * X * base[:, None] ** (self.s - 1.0)
        out[np.all(X == 0, axis=1)] = 0.0 if (self.c > 0 or self.s >= 0.5) else np.nan
        return out

    def phi_analytic(self, X):
        r2 = np.sum(X * X, axis=1)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = 4.0 * self.s * r2 * self._base(X) ** (self.s - 1.0)
        return np.where(r2 > 0, out, 0.0)

    def subdiff_inf(self, X):
        if not self.convex:
            return None
        return 0.5 * self.phi_analytic(X)

    def level_body(self, t):
        if t <= self.floor:
            raise DomainError("Sublevel set is empty", {"t": t, "floor": self.floor})
        return EuclideanBall(self.dimension, math.sqrt(t ** (1.0 / self.s) - self.c))

    @property
    def floor(self):
        return self.c ** self.s

    def describe(self):
        return {**super().describe(), "c": self.c, "s": self.s}


class MinCap(QcFunction):
    """min(f, L); Phi vanishes where the cap is active."""

    kind = "min-cap"

    def __init__(self, inner: QcFunction, level: float):
        if not level > inner.floor:
            raise ConstructionError("Cap level must exceed f(0)", {"level": level, "floor": inner.floor})
        super().__init__(inner.dimension, "continuous" if inner.smoothness == "continuous" else "locally-Lipschitz")
        self.inner = inner
        self.level = float(level)

    def _value(self, X):
        return np.minimum(self.inner._value(X), self.level)

    def _gradient(self, X):
        grad = self.inner._gradient(X)
        if grad is None:
            return None
        v = self.inner._value(X)
        grad = np.where((v < self.level)[:, None], grad, 0.0)
        grad[v == self.level] = np.nan
        return grad

    def phi_analytic(self, X):
        inner = self.inner.phi_analytic(X)
        if inner is None:
            return None
        return np.where(self.inner._value(X) <= self.level, inner, 0.0)

    def ray_breaks(self, U):
        return np.column_stack([self.inner.ray_breaks(U), _level_radius(self.inner, self.level, U)])

    def angle_breaks(self):
        return self.inner.angle_breaks()

    def level_body(self, t):
        if t > self.level:
            return None
        return self.inner.level_body(t)

    @property
    def floor(self):
        return self.inner.floor

    @property
    def sup(self):
        return self.level

    def describe(self):
        return {**super().describe(), "level": self.level, "inner": self.inner.describe()}


class MaxFloor(QcFunction):
    """max(f, L); Phi vanishes where the floor is active."""

    kind = "max-floor"

    def __init__(self, inner: QcFunction, level: float):
        super().__init__(inner.dimension, "continuous" if inner.smoothness == "continuous" else "locally-Lipschitz",
                         convex=inner.convex)
        self.inner = inner
        self.level = float(level)

    def _value(self, X):
        return np.maximum(self.inner._value(X), self.level)

    def _gradient(self, X):
        grad = self.inner._gradient(X)
        if grad is None:
            return None
        v = self.inner._value(X)
        grad = np.where((v > self.level)[:, None], grad, 0.0)
        grad[v == self.level] = np.nan
        return grad

    def phi_analytic(self, X):
        inner = self.inner.phi_analytic(X)
        if inner is None:
            return None
        return np.where(self.inner._value(X) > self.level, inner, 0.0)

    def subdiff_inf(self, X):
        inner = self.inner.subdiff_inf(X)
        if inner is None:
            return None
        return np.where(self.inner._value(X) > self.level, inner, 0.0)

    def ray_breaks(self, U):
        if self.level <= self.inner.floor:
            return self.inner.ray_breaks(U)
        return np.column_stack([self.inner.ray_breaks(U), _level_radius(self.inner, self.level, U)])

    def angle_breaks(self):
        return self.inner.angle_breaks()

    def level_body(self, t):
        if t <= self.level:
            raise DomainError("Sublevel set is empty", {"t": t, "floor": self.floor})
        return self.inner.level_body(t)

    @property
    def floor(self):
        return max(self.inner.floor, self.level)

    @property
    def sup(self):
        return self.inner.sup

    def describe(self):
        return {**super().describe(), "level": self.level, "inner": self.inner.describe()}


class FSigma(QcFunction):
    """0 on K, (||x||_K - 1)/delta on K_sigma minus K, 1 - sigma beyond, delta = 2 sigma/(1 - sigma)^2."""

    kind = "f-sigma"

    def __init__(self, body: SymmetricConvexBody, sigma: float):
        if not 0.0 < sigma < 1.0:
            raise ConstructionError("sigma must lie in (0, 1)", {"sigma": sigma})
        super().__init__(body.dimension, "locally-Lipschitz")
        self.body = body
        self.sigma = float(sigma)
        self.delta = 2.0 * sigma / (1.0 - sigma) ** 2
        self.outer = (1.0 + sigma) / (1.0 - sigma)

    def _value(self, X):
        g = self.body._gauge(X)
        return np.clip((g - 1.0) / self.delta, 0.0, 1.0 - self.sigma)

    def _gradient(self, X):
        g = self.body._gauge(X)
        shell = (g > 1.0) & (g < self.outer)
        grad = np.where(shell[:, None], self.body.gauge_gradient(X) / self.delta, 0.0)
        grad[(g == 1.0) | (g == self.outer)] = np.nan
        return grad

    def phi_analytic(self, X):
        g = self.body._gauge(X)
        shell = (g >= 1.0) & (g <= self.outer)
        return np.where(shell, 2.0 / self.delta * g, 0.0)

    def ray_breaks(self, U):
        rho = self.body.radial_function(U)
        return np.column_stack([rho, self.outer * rho])

    def angle_breaks(self):
        return self.body.break_angles()

    def level_body(self, t):
        if t <= 0:
            raise DomainError("Sublevel set is empty", {"t": t})
        if t > 1.0 - self.sigma:
            return None
        return self.body.scaled(1.0 + self.delta * t)

    @property
    def floor(self):
        return 0.0

    @property
    def sup(self):
        return 1.0 - self.sigma

    def describe(self):
        return {**super().describe(), "sigma": self.sigma, "body": self.body.describe()}


class Constant(QcFunction):
    kind = "constant"

    def __init__(self, value: float, dimension: int = 1):
        super().__init__(dimension, "C1", convex=True)
        self.constant = float(value)

    def _value(self, X):
        return np.full(X.shape[0], self.constant)

    def _gradient(self, X):
        return np.zeros_like(X)

    def phi_analytic(self, X):
        return np.zeros(X.shape[0])

    def subdiff_inf(self, X):
        return np.zeros(X.shape[0])

    def level_body(self, t):
        if t <= self.constant:
            raise DomainError("Sublevel set is empty", {"t": t, "floor": self.constant})
        return None

    @property
    def floor(self):
        return self.constant

    @property
    def sup(self):
        return self.constant

    def describe(self):
        return {**super().describe(), "value": self.constant}


class Affine(QcFunction):
    """a f + alpha with a >= 0; Phi_{af + alpha} = a Phi_f."""

    kind = "affine"

    def __init__(self, inner: QcFunction, scale: float, shift: float = 0.0):
        if not scale > 0:
            raise ConstructionError("Affine scale must be positive", {"scale": scale})
        super().__init__(inner.dimension, inner.smoothness, inner.convex)
        self.inner = inner
        self.scale = float(scale)
        self.shift = float(shift)

    def _value(self, X):
        return self.scale * self.inner._value(X) + self.shift

    def _gradient(self, X):
        grad = self.inner._gradient(X)
        return None if grad is None else self.scale * grad

    def phi_analytic(self, X):
        inner = self.inner.phi_analytic(X)
        return None if inner is None else self.scale * inner

    def subdiff_inf(self, X):
        inner = self.inner.subdiff_inf(X)
        return None if inner is None else self.scale * inner

    def ray_breaks(self, U):
        return self.inner.ray_breaks(U)

    def angle_breaks(self):
        return self.inner.angle_breaks()

    def level_body(self, t):
        return self.inner.level_body((t - self.shift) / self.scale)

    @property
    def floor(self):
        return self.scale * self.inner.floor + self.shift

    @property
    def sup(self):
        return self.scale * self.inner.sup + self.shift

    def describe(self):
        return {**super().describe(), "scale": self.scale, "shift": self.shift, "inner": self.inner.describe()}


class PowerOf(QcFunction):
    """f^p for nonnegative f; Phi_{f^p} = p f^(p-1) Phi_f."""

    kind = "power"

    def __init__(self, inner: QcFunction, p: float):
        if not p > 0:
            raise ConstructionError("Power must be positive", {"p": p})
        if inner.floor < 0:
            raise ConstructionError("Powers need a nonnegative function", {"floor": inner.floor})
        super().__init__(inner.dimension, inner.smoothness if (p >= 1 or inner.floor > 0) else "continuous",
                         convex=inner.convex and p >= 1)
        self.inner = inner
        self.p = float(p)

    def _value(self, X):
        return self.inner._value(X) ** self.p

    def _gradient(self, X):
        grad = self.inner._gradient(X)
        if grad is None:
            return None
        with np.errstate(divide="ignore", invalid="ignore"):
            return self.p * self.inner._value(X)[:, None] ** (self.p - 1.0) * grad

    def phi_analytic(self, X):
        inner = self.inner.phi_analytic(X)
        if inner is None:
            return None
        v = self.inner._value(X)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = self.p * v ** (self.p - 1.0) * inner
        return np.where(inner == 0, 0.0, out)

    def ray_breaks(self, U):
        return self.inner.ray_breaks(U)

    def angle_breaks(self):
        return self.inner.angle_breaks()

    def level_body(self, t):
        if t <= 0:
            raise DomainError("Sublevel set is empty", {"t": t})
        return self.inner.level_body(t ** (1.0 / self.p))

    @property
    def floor(self):
        return self.inner.floor ** self.p

    @property
    def sup(self):
        return self.inner.sup ** self.p

    def describe(self):
        return {**super().describe(), "p": self.p, "inner": self.inner.describe()}


class Custom(QcFunction):
    """Programmatic function from a vectorised callable (not config-describable)."""

    kind = "custom"

    def __init__(self, fn: Callable[[np.ndarray], np.ndarray], dimension: int = 1,
                 gradient: Optional[Callable[[np.ndarray], np.ndarray]] = None,
                 smoothness: Smoothness = "continuous", convex: bool = False, name: str = "custom"):
        super().__init__(dimension, smoothness, convex)
        self.fn = fn
        self.grad_fn = gradient
        self.name = name

    def _value(self, X):
        return np.asarray(self.fn(X), dtype=float).reshape(X.shape[0])

    def _gradient(self, X):
        return None if self.grad_fn is None else np.asarray(self.grad_fn(X), dtype=float).reshape(X.shape)

    def describe(self):
        return {**super().describe(), "name": self.name}


class LevelSetBody(SymmetricConvexBody):
    """{f < t} located by bisection along rays; f is nondecreasing along rays."""

    kind = "level-set"

    def __init__(self, function: QcFunction, level: float, iterations: int = 80):
        super().__init__(function.dimension)
        self.function = function
        self.level = float(level)
        self.iterations = iterations

    def radial_function(self, U):
        U = np.atleast_2d(U)
        f = self.function
        hi = np.ones(U.shape[0])
        grow = f._value(U) < self.level
        while np.any(grow):
            hi = np.where(grow, 2.0 * hi, hi)
            grow = grow & (hi < LEVEL_RADIUS_CAP)
            grow = grow & (f._value(hi[:, None] * U) < self.level)
        unbounded = f._value(hi[:, None] * U) < self.level
        lo = np.zeros(U.shape[0])
        for _ in range(self.iterations):
            mid = 0.5 * (lo + hi)
            below = f._value(mid[:, None] * U) < self.level
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
        return np.where(unbounded, np.inf, 0.5 * (lo + hi))

    def _gauge(self, X):
        norm = np.linalg.norm(X, axis=1)
        out = np.zeros(X.shape[0])
        moving = norm > 0
        if np.any(moving):
            rho = self.radial_function(X[moving] / norm[moving, None])
            out[moving] = norm[moving] / rho
        return out

    def break_angles(self):
        return self.function.angle_breaks()

    def describe(self):
        return {"kind": self.kind, "dimension": self.dimension, "level": self.level, "function": self.function.describe()}


def _level_radius(f: QcFunction, level: float, U: np.ndarray) -> np.ndarray:
    """Radius where f crosses `level` along each direction (inf if never)."""
    try:
        body = f.level_body(level)
    except DomainError:
        return np.zeros(U.shape[0])
    if body is None:
        return np.full(U.shape[0], np.inf)
    return body.radial_function(U)


# --- Phi on an eps-ladder ----------------------------------------------------

def neville(eps: np.ndarray, values: np.ndarray) -> np.ndarray:
    """Polynomial extrapolation of values(eps) to eps = 0 along the first axis."""
    P = np.array(values, dtype=float)
    h = np.asarray(eps, dtype=float)
    n = h.size
    for level in range(1, n):
        for i in range(n - level):
            j = i + level
            P[i] = (h[i] * P[i + 1] - h[j] * P[i]) / (h[i] - h[j])
    return P[0]


def difference_quotients(f: QcFunction, X: np.ndarray, ladder: Sequence[float]) -> np.ndarray:
    """[f(x) - f(c x)] / eps for each eps in the ladder; shape (len(ladder), m)."""
    base = f._value(X)
    return np.stack([(base - f._value(shrink(e) * X)) / e for e in ladder])


def ladder_phi(f: QcFunction, X: np.ndarray, ladder: Sequence[float] = DEFAULT_LADDER):
    """Vectorised ladder limit; returns (values, converged mask, quotient table).

    Quotients must be nonnegative up to roundoff; a clearly negative one is a
    quasi-convexity violation.
    """
    ladder = np.sort(np.asarray(ladder, dtype=float))[::-1]
    if ladder.size < 2 or np.any((ladder <= 0) | (ladder >= 1)):
        raise DomainError("Ladder must hold at least two values in (0, 1)", {"ladder": ladder.tolist()})
    Q = difference_quotients(f, X, ladder)
    scale = np.maximum(1.0, np.abs(f._value(X)))
    slack = AUDIT_TOL * scale / ladder[:, None]
    bad = Q < -slack
    if np.any(bad):
        k, i = np.argwhere(bad)[0]
        raise QuasiConvexityViolation(
            "Negative dilation difference quotient",
            {"x": X[i].tolist(), "eps": float(ladder[k]), "quotient": float(Q[k, i])},
        )
    tail = min(LADDER_TAIL, ladder.size)
    T, eps = Q[-tail:], ladder[-tail:]
    if tail >= 4:
        extrapolated = neville(eps[-3:], T[-3:])
        previous = neville(eps[-4:-1], T[-4:-1])
    else:
        extrapolated, previous = T[-1], T[-2]
    converged = np.abs(extrapolated - previous) <= CONVERGENCE_TOL * np.maximum(1.0, np.abs(extrapolated))
    values = np.where(converged, np.maximum(extrapolated, 0.0), T.max(axis=0))
    return values, converged, Q


def phi(f: QcFunction, x, ladder: Sequence[float] = DEFAULT_LADDER) -> Estimate:
    """Phi_f(x) from the eps-ladder, with analytic cross-checks in `details`."""
    X, _ = as_points(x, f.dimension)
    X = X[:1]
    values, converged, Q = ladder_phi(f, X, ladder)
    value = float(values[0])
    details = {"x": X[0].tolist(), "tail": Q[-LADDER_TAIL:, 0].tolist()}
    flags: List[str] = []
    spread = float(abs(Q[-1, 0] - value)) if converged[0] else float(np.ptp(Q[-LADDER_TAIL:, 0]))
    if not converged[0]:
        flags.append("inconclusive")
        logger.warning(f"Phi ladder for {f.kind} at {X[0].tolist()} did not settle (spread {spread:.3e})")

    checks = {}
    analytic = f.phi_analytic(X)
    if analytic is not None:
        checks["analytic"] = float(analytic[0])
    if f.smoothness == "C1":
        grad = f._gradient(X)
        if grad is not None and np.all(np.isfinite(grad)):
            checks["gradient"] = float(2.0 * np.dot(X[0], grad[0]))
    sub = f.subdiff_inf(X)
    if sub is not None:
        checks["subdifferential"] = float(2.0 * sub[0])
    for name, reference in checks.items():
        details[f"{name}_identity"] = reference
        if abs(reference - value) > CONVERGENCE_TOL * 10 * max(1.0, abs(reference)):
            flags.append(f"{name}-mismatch")
            logger.warning(f"Phi ladder {value:.10g} disagrees with {name} identity {reference:.10g} for {f.kind}")
    return Estimate(value=value, std_error=spread, method="ladder", flags=flags, details=details)


# --- value and gradient ------------------------------------------------------

class ValueAndGradient(NamedTuple):
    value: float
    gradient: Optional[np.ndarray]
    numeric: bool


def fd_step(x: np.ndarray) -> float:
    return max(1e-6, 1e-6 * float(np.linalg.norm(x)))


def eval_and_grad(f: QcFunction, x) -> ValueAndGradient:
    """Value and gradient; analytic where available, else central differences."""
    X, _ = as_points(x, f.dimension)
    X = X[:1]
    value = float(f._value(X)[0])
    grad = f._gradient(X)
    if grad is not None and np.all(np.isfinite(grad[0])):
        return ValueAndGradient(value, grad[0].copy(), False)

    h = fd_step(X[0])
    E = np.eye(f.dimension) * h
    forward = (f._value(X + E) - value) / h
    backward = (value - f._value(X - E)) / h
    central = 0.5 * (forward + backward)
    if f.smoothness == "C1":
        jump = np.abs(forward - backward)
        if np.any(jump > 1e-3 * np.maximum(1.0, np.abs(central))):
            raise ConsistencyError(
                "Function claimed C1 is not differentiable here",
                {"x": X[0].tolist(), "forward": forward.tolist(), "backward": backward.tolist()},
            )
    return ValueAndGradient(value, central, True)


def numeric_gradient(f: QcFunction, X: np.ndarray) -> np.ndarray:
    """Central differences on many points."""
    h = np.maximum(1e-6, 1e-6 * np.linalg.norm(X, axis=1))[:, None]
    out = np.empty_like(X)
    for j in range(f.dimension):
        E = np.zeros_like(X)
        E[:, j] = h[:, 0]
        out[:, j] = (f._value(X + E) - f._value(X - E)) / (2.0 * h[:, 0])
    return out


def gradient_field(f: QcFunction, X: np.ndarray) -> np.ndarray:
    """Gradients on many points; analytic rows where defined, numeric elsewhere."""
    grad = f._gradient(X)
    if grad is None:
        return numeric_gradient(f, X)
    missing = ~np.all(np.isfinite(grad), axis=1)
    if np.any(missing):
        grad = grad.copy()
        grad[missing] = numeric_gradient(f, X[missing])
    return grad


# --- audits --------------------------------------------------------------------

def _domain_points(domain: Optional[SymmetricConvexBody], dimension: int, count: int, rng: np.random.Generator) -> np.ndarray:
    if domain is None:
        return rng.uniform(-3.0, 3.0, size=(count, dimension))
    _, R = domain.radii()
    R = min(R, 1e3)
    out, have = [], 0
    while have < count:
        X = rng.uniform(-R, R, size=(2 * count, dimension))
        X = X[domain._gauge(X) < 1.0]
        out.append(X)
        have += X.shape[0]
    return np.vstack(out)[:count]


def _witness(kind: str, **values) -> dict:
    return {"test": kind, **{k: (v.tolist() if isinstance(v, np.ndarray) else v) for k, v in values.items()}}


def quasiconvexity_audit(f: QcFunction, domain: Optional[SymmetricConvexBody] = None,
                         trials: int = 2000, seed: int = 0) -> AuditReport:
    """Segment, symmetry, gradient, 1-d monotone-split and minimum-at-zero tests.

    Failures are reported with reproducible witnesses, never raised.
    """
    if trials < 1:
        raise DomainError("Audit needs at least one trial", {"trials": trials})
    if domain is not None and domain.dimension != f.dimension:
        raise DomainError("Domain and function dimensions differ")
    rng = np.random.default_rng(seed)
    n = f.dimension
    X = _domain_points(domain, n, trials, rng)
    Y = _domain_points(domain, n, trials, rng)
    T = rng.uniform(0.0, 1.0, size=(trials, 1))
    fx, fy = f._value(X), f._value(Y)
    witnesses: List[dict] = []
    checks = {}

    Z = (1.0 - T) * X + T * Y
    fz = f._value(Z)
    top = np.maximum(fx, fy)
    bad = fz > top + AUDIT_TOL * np.maximum(1.0, np.abs(top))
    checks["segment"] = not np.any(bad)
    if np.any(bad):
        i = int(np.argmax(fz - top))
        witnesses.append(_witness("segment", x=X[i], y=Y[i], t=float(T[i, 0]), f_mid=float(fz[i]), f_max=float(top[i])))

    fneg = f._value(-X)
    bad = np.abs(fx - fneg) > AUDIT_TOL * np.maximum(1.0, np.abs(fx))
    checks["symmetry"] = not np.any(bad)
    if np.any(bad):
        i = int(np.argmax(np.abs(fx - fneg)))
        witnesses.append(_witness("symmetry", x=X[i], f_x=float(fx[i]), f_minus_x=float(fneg[i])))

    if f.smoothness == "C1":
        grad = gradient_field(f, X)
        pairing = np.sum((X - Y) * grad, axis=1)
        tol = AUDIT_TOL * np.maximum(1.0, np.linalg.norm(X - Y, axis=1) * np.linalg.norm(grad, axis=1))
        bad = (fx >= fy) & (pairing < -tol)
        checks["gradient"] = not np.any(bad)
        if np.any(bad):
            i = int(np.argmin(np.where(fx >= fy, pairing, np.inf)))
            witnesses.append(_witness("gradient", x=X[i], y=Y[i], pairing=float(pairing[i])))

    if n == 1:
        extent = 3.0 if domain is None else min(domain.radii()[1], 1e3)
        grid = np.linspace(0.0, extent, 2001)[:-1]
        right = f._value(grid[:, None])
        left = f._value(-grid[:, None])
        tol = AUDIT_TOL * np.maximum(1.0, np.abs(right[1:]))
        split_ok = bool(np.all(np.diff(right) >= -tol) and np.all(np.diff(left) >= -tol))
        checks["monotone-split"] = split_ok
        if not split_ok:
            drops = np.minimum(np.diff(right), np.diff(left))
            i = int(np.argmin(drops))
            witnesses.append(_witness("monotone-split", x=float(grid[i]), drop=float(drops[i])))

    f0 = f.floor
    low = min(float(fx.min()), float(fy.min()), float(fz.min()))
    checks["minimum-at-origin"] = f0 <= low + AUDIT_TOL * max(1.0, abs(low))
    if not checks["minimum-at-origin"]:
        witnesses.append(_witness("minimum-at-origin", f_origin=f0, sampled_min=low))

    passed = all(checks.values())
    logger.info(f"Quasi-convexity audit of {f.kind}: {'pass' if passed else 'fail'} ({trials} trials, seed {seed})")
    return AuditReport(name=f"quasiconvexity:{f.kind}", passed=passed, checks=checks,
                       witnesses=witnesses[:10], seed=seed, trials=trials)


Majorant = Union[QcFunction, Callable[[np.ndarray], np.ndarray]]


def qc_membership_check(f: QcFunction, m, eps0: float, g_bound: Majorant,
                        samples: Optional[int] = None, seed: Optional[int] = None) -> AuditReport:
    """Evidence that f lies in QC(Omega, mu).

    On sampled x, every ladder quotient with eps <= eps0 must stay below
    g(x); the locally-Lipschitz sufficient condition Phi_f <= 2|x||grad f| is
    checked alongside, and the sample mean of g is reported.
    """
    if not 0.0 < eps0 <= 1.0:
        raise DomainError("eps0 must lie in (0, 1]", {"eps0": eps0})
    count = int(samples or min(settings.sup_samples, 20_000))
    seed = settings.seed if seed is None else int(seed)
    X = m.sample(count, np.random.default_rng(seed))
    ladder = [eps0 * 2.0 ** -k for k in range(0, 17) if eps0 * 2.0 ** -k < 1.0]
    Q = difference_quotients(f, X, ladder)
    worst = Q.max(axis=0)
    g = np.asarray(g_bound(X), dtype=float)
    checks = {}
    witnesses = []
    tol = AUDIT_TOL * np.maximum(1.0, np.abs(g))
    bad = worst > g + tol
    checks["dominated"] = not np.any(bad)
    if np.any(bad):
        i = int(np.argmax(worst - g))
        witnesses.append(_witness("dominated", x=X[i], quotient=float(worst[i]), bound=float(g[i])))

    phi_values = f.phi_field(X)
    grad = gradient_field(f, X)
    lipschitz = 2.0 * np.linalg.norm(X, axis=1) * np.linalg.norm(grad, axis=1)
    ok = phi_values <= lipschitz + 1e-6 * np.maximum(1.0, lipschitz)
    checks["lipschitz-condition"] = bool(np.all(ok))
    if not np.all(ok):
        i = int(np.argmax(phi_values - lipschitz))
        witnesses.append(_witness("lipschitz-condition", x=X[i], phi=float(phi_values[i]), bound=float(lipschitz[i])))

    g_mean = float(np.mean(g))
    g_err = float(np.std(g, ddof=1) / math.sqrt(count)) if count > 1 else 0.0
    checks["majorant-integrable"] = bool(np.isfinite(g_mean))
    passed = all(checks.values())
    logger.info(f"QC membership evidence for {f.kind}: {'pass' if passed else 'fail'} (mean of g {g_mean:.6g} +/- {g_err:.2g})")
    return AuditReport(
        name=f"qc-membership:{f.kind}",
        passed=passed,
        checks=checks,
        witnesses=witnesses,
        seed=seed,
        trials=count,
        notes=[f"g_mean={g_mean:.10g}", f"g_stderr={g_err:.3g}", f"eps0={eps0}"],
    )


def f_sigma(body: SymmetricConvexBody, sigma: float) -> FSigma:
    return FSigma(body, sigma)
