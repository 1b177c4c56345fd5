"""
Probability measures dmu = exp(-phi) dx on symmetric convex domains.

Each measure carries its log-density, a sampler, its support and a claimed
dilation constant kappa with a provenance tag. The module-level functions
(`integrate`, `expect`, `mass_of_body`, `moment`, ...) pick quadrature in
dimensions 1 and 2 and seeded Monte Carlo otherwise.
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, List, Optional, Sequence, Tuple
import logging
import math

import numpy as np
from scipy import special, stats

from .config import settings
from .convex_geometry import (
    AXIS_ANGLES,
    EuclideanBall,
    ScaledBody,
    SymmetricConvexBody,
    as_points,
    unit_directions_2d,
)
from .exceptions import ConstructionError, DomainError, SamplingError, UnsupportedOperationError
from .quadrature import GaussLegendre, composite_nodes, fixed_nodes
from .schemas import EstimationBudget, Estimate

logger = logging.getLogger(__name__)

KAPPA_GAUSSIAN = "centered Gaussian: dilation inequality with kappa=2"
KAPPA_SYMMETRIC_1D = "symmetric one-dimensional log-concave: kappa=2"
KAPPA_LOG_CONCAVE = "log-concave (Borell): kappa=1"
KAPPA_USER = "user"

TAIL_MASS = 1e-18
MIN_ACCEPTANCE = 1e-4
MC_CHUNK = 50_000
RADIAL_PANELS = 8


class Measure(ABC):
    """Probability measure with density exp(-phi) relative to Lebesgue measure."""

    kind: str = "abstract"

    def __init__(
        self,
        dimension: int,
        support: Optional[SymmetricConvexBody] = None,
        kappa: Optional[float] = None,
        kappa_source: Optional[str] = None,
    ):
        if int(dimension) < 1:
            raise ConstructionError("Measure dimension must be positive", {"dimension": dimension})
        if support is not None and support.dimension != dimension:
            raise ConstructionError("Support dimension mismatch", {"support": support.dimension, "measure": dimension})
        if kappa is not None and not kappa > 0:
            raise ConstructionError("kappa must be positive", {"kappa": kappa})
        self.dimension = int(dimension)
        self.support = support
        self.kappa = None if kappa is None else float(kappa)
        self.kappa_source = kappa_source

    def claim_kappa(self, kappa: Optional[float], source: Optional[str] = None) -> "Measure":
        """Override the stored kappa claim (user-supplied constants)."""
        if kappa is not None:
            if not kappa > 0:
                raise ConstructionError("kappa must be positive", {"kappa": kappa})
            self.kappa = float(kappa)
            self.kappa_source = source or KAPPA_USER
        return self

    @abstractmethod
    def _log_density(self, X: np.ndarray) -> np.ndarray:
        """Normalized log-density on an (m, n) array; -inf off the support."""

    @abstractmethod
    def _sample(self, count: int, rng: np.random.Generator) -> np.ndarray:
        """Draw an (count, n) array."""

    @property
    def is_log_concave(self) -> bool:
        return False

    def log_density(self, x):
        X, single = as_points(x, self.dimension)
        values = self._log_density(X)
        return float(values[0]) if single else values

    def density(self, X: np.ndarray) -> np.ndarray:
        with np.errstate(under="ignore"):
            return np.exp(self._log_density(X))

    def sample(self, count: int, rng: np.random.Generator) -> np.ndarray:
        return self._sample(int(count), rng)

    def interval_support(self) -> Tuple[float, float]:
        """Support interval in dimension 1 (closure endpoints, possibly infinite)."""
        if self.dimension != 1:
            raise UnsupportedOperationError("interval_support is defined only in dimension 1")
        if self.support is None:
            return -math.inf, math.inf
        t = float(self.support.radial_function(np.ones((1, 1)))[0])
        return -t, t

    def support_radius(self, U: np.ndarray) -> np.ndarray:
        """Extent of the support along unit directions U (inf when unbounded)."""
        if self.dimension == 1:
            lo, hi = self.interval_support()
            return np.where(U[:, 0] >= 0, hi, -lo)
        if self.support is None:
            return np.full(U.shape[0], np.inf)
        return self.support.radial_function(U)

    def tail_radius(self) -> float:
        """Radius outside of which the mass is below TAIL_MASS."""
        lo, hi = (self.interval_support() if self.dimension == 1 else (-math.inf, math.inf))
        if math.isfinite(lo) and math.isfinite(hi):
            return max(-lo, hi)
        return self._numeric_cdf.tail_radius

    def angle_breaks(self) -> np.ndarray:
        breaks = [AXIS_ANGLES]
        if self.support is not None and self.dimension == 2:
            breaks.append(self.support.break_angles())
        return np.concatenate(breaks)

    def analytic_moment(self, p: float) -> Optional[float]:
        return None

    def ray_breaks(self, U: np.ndarray) -> np.ndarray:
        """Radii along U where the density has kinks (beyond the support boundary)."""
        return np.empty((U.shape[0], 0))

    @cached_property
    def _numeric_cdf(self) -> "CdfTable":
        lo, hi = self.interval_support()
        return CdfTable(lambda x: self._log_density(x[:, None]), lo, hi)

    def cdf(self, x):
        if self.dimension != 1:
            raise UnsupportedOperationError("CDF is defined only in dimension 1")
        return self._numeric_cdf.cdf(x)

    def quantile(self, u):
        if self.dimension != 1:
            raise UnsupportedOperationError("Quantiles are defined only in dimension 1")
        return self._numeric_cdf.quantile(u)

    def describe(self) -> dict:
        return {"kind": self.kind, "dimension": self.dimension, "kappa": self.kappa, "kappa_source": self.kappa_source}

    def __repr__(self) -> str:
        return f"{self.__class__.__name__}(dimension={self.dimension}, kappa={self.kappa})"


class CdfTable:
    """Tabulated CDF/quantile of an unnormalized 1-d log-density.

    The interval is cut where the density drops below TAIL_MASS of its peak,
    split into panels carrying a fixed 20-point rule, and inverted with
    safeguarded Newton steps.
    """

    ORDER = 20

    def __init__(self, log_density: Callable[[np.ndarray], np.ndarray], lo: float, hi: float,
                 breaks: Sequence[float] = (), panels: int = 400):
        self.log_density = log_density
        a, b = self._effective_bounds(lo, hi)
        inner = [p for p in breaks if a < p < b]
        if a < 0.0 < b:
            inner.append(0.0)
        self.edges = np.unique(np.concatenate([np.linspace(a, b, panels + 1), inner]))
        nodes, weights = fixed_nodes(self.edges[:-1], self.edges[1:], self.ORDER)
        shift = float(np.max(self._finite(log_density(nodes.ravel()))))
        self._shift = shift
        masses = np.sum(self._pdf_unscaled(nodes) * weights, axis=1)
        self.cumulative = np.concatenate([[0.0], np.cumsum(masses)])
        self.total = float(self.cumulative[-1])
        if not self.total > 0:
            raise ConstructionError("Density has zero mass on its support")
        self.log_normalizer = shift + math.log(self.total)
        self.lo, self.hi = float(self.edges[0]), float(self.edges[-1])
        self.tail_radius = max(abs(self.lo), abs(self.hi))

    @staticmethod
    def _finite(values: np.ndarray) -> np.ndarray:
        return np.where(np.isfinite(values), values, -np.inf)

    def _pdf_unscaled(self, x: np.ndarray) -> np.ndarray:
        with np.errstate(under="ignore", over="ignore"):
            shape = np.shape(x)
            values = np.exp(self._finite(self.log_density(np.ravel(x))) - getattr(self, "_shift", 0.0))
            return values.reshape(shape)

    def _effective_bounds(self, lo: float, hi: float) -> Tuple[float, float]:
        scan_lo = lo if math.isfinite(lo) else (-1.0 if not math.isfinite(hi) else min(hi - 1.0, -1.0))
        scan_hi = hi if math.isfinite(hi) else (1.0 if not math.isfinite(lo) else max(lo + 1.0, 1.0))
        grid = np.linspace(scan_lo, scan_hi, 2001)
        peak = float(np.max(self._finite(self.log_density(grid))))
        if not math.isfinite(peak):
            raise ConstructionError("Density vanishes on its support", {"lo": lo, "hi": hi})
        cutoff = peak + math.log(TAIL_MASS) - 5.0

        def extend(start: float, direction: float) -> float:
            step = 1.0
            x = start
            while step < 1e8:
                x = start + direction * step
                if self.log_density(np.array([x]))[0] < cutoff:
                    return x
                step *= 2.0
            raise ConstructionError("Density tail does not decay", {"direction": direction})

        a = lo if math.isfinite(lo) else extend(scan_lo, -1.0)
        b = hi if math.isfinite(hi) else extend(scan_hi, 1.0)
        return a, b

    def pdf(self, x):
        return self._pdf_unscaled(np.asarray(x, dtype=float)) / self.total

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        xc = np.clip(x, self.lo, self.hi)
        idx = np.clip(np.searchsorted(self.edges, xc, side="right") - 1, 0, self.edges.size - 2)
        nodes, weights = fixed_nodes(self.edges[idx], xc, self.ORDER)
        partial = np.sum(self._pdf_unscaled(nodes) * weights, axis=-1)
        out = np.clip((self.cumulative[idx] + partial) / self.total, 0.0, 1.0)
        return float(out) if out.ndim == 0 else out

    def quantile(self, u):
        u = np.asarray(u, dtype=float)
        if np.any((u <= 0) | (u >= 1)):
            raise DomainError("Quantile level must lie in (0, 1)", {"u": np.atleast_1d(u).tolist()[:5]})
        target = u * self.total
        idx = np.clip(np.searchsorted(self.cumulative, target) - 1, 0, self.edges.size - 2)
        left, right = self.edges[idx], self.edges[idx + 1]
        span = self.cumulative[idx + 1] - self.cumulative[idx]
        with np.errstate(invalid="ignore", divide="ignore"):
            frac = np.where(span > 0, (target - self.cumulative[idx]) / span, 0.5)
        x = left + frac * (right - left)
        for _ in range(60):
            err = np.asarray(self.cdf(x)) - u
            left = np.where(err < 0, x, left)
            right = np.where(err > 0, x, right)
            dens = np.asarray(self.pdf(x))
            with np.errstate(invalid="ignore", divide="ignore"):
                step = x - err / dens
            bisect = 0.5 * (left + right)
            x = np.where((dens > 0) & (step > left) & (step < right), step, bisect)
            if np.all(np.abs(err) < 1e-14):
                break
        return float(x) if x.ndim == 0 else x


class GaussianMeasure(Measure):
    kind = "gaussian"

    def __init__(self, mean: Sequence[float], covariance, kappa: Optional[float] = None, kappa_source: Optional[str] = None):
        mean = np.atleast_1d(np.asarray(mean, dtype=float))
        cov = np.asarray(covariance, dtype=float)
        if cov.ndim == 0:
            cov = cov * np.eye(mean.size)
        if cov.shape != (mean.size, mean.size):
            raise ConstructionError("Covariance shape must match the mean", {"mean": mean.size, "covariance": list(cov.shape)})
        try:
            chol = np.linalg.cholesky(cov)
        except np.linalg.LinAlgError as exc:
            raise ConstructionError("Covariance must be positive definite") from exc
        centered = bool(np.all(mean == 0))
        if kappa is None:
            kappa, kappa_source = (2.0, KAPPA_GAUSSIAN) if centered else (1.0, KAPPA_LOG_CONCAVE)
        super().__init__(mean.size, None, kappa, kappa_source)
        self.mean = mean
        self.covariance = cov
        self._chol = chol
        self._precision = np.linalg.inv(cov)
        self._log_norm = -0.5 * (mean.size * math.log(2 * math.pi) + 2.0 * float(np.sum(np.log(np.diag(chol)))))

    @property
    def is_log_concave(self):
        return True

    @property
    def is_standard(self) -> bool:
        return bool(np.all(self.mean == 0) and np.allclose(self.covariance, np.eye(self.dimension), rtol=0, atol=0))

    def _log_density(self, X):
        Y = X - self.mean
        return self._log_norm - 0.5 * np.einsum("ij,jk,ik->i", Y, self._precision, Y)

    def _sample(self, count, rng):
        return self.mean + rng.standard_normal((count, self.dimension)) @ self._chol.T

    def tail_radius(self):
        scale = math.sqrt(float(np.max(np.linalg.eigvalsh(self.covariance))))
        return float(np.linalg.norm(self.mean)) + scale * (math.sqrt(self.dimension) + 9.5)

    def angle_breaks(self):
        return AXIS_ANGLES.copy()

    def cdf(self, x):
        if self.dimension != 1:
            raise UnsupportedOperationError("CDF is defined only in dimension 1")
        out = stats.norm.cdf(x, loc=self.mean[0], scale=self._chol[0, 0])
        return float(out) if np.ndim(out) == 0 else out

    def quantile(self, u):
        if self.dimension != 1:
            raise UnsupportedOperationError("Quantiles are defined only in dimension 1")
        u = np.asarray(u, dtype=float)
        if np.any((u <= 0) | (u >= 1)):
            raise DomainError("Quantile level must lie in (0, 1)")
        out = stats.norm.ppf(u, loc=self.mean[0], scale=self._chol[0, 0])
        return float(out) if np.ndim(out) == 0 else out

    def analytic_moment(self, p):
        if not self.is_standard:
            return None
        n = self.dimension
        return float(2.0 ** (p / 2) * special.gamma((n + p) / 2) / special.gamma(n / 2))

    def describe(self):
        return {**super().describe(), "mean": self.mean.tolist(), "covariance": self.covariance.tolist()}


class GaussianStd(GaussianMeasure):
    """Standard Gaussian measure gamma_n."""

    kind = "gaussian-std"

    def __init__(self, dimension: int = 1, kappa: Optional[float] = None, kappa_source: Optional[str] = None):
        if int(dimension) < 1:
            raise ConstructionError("Measure dimension must be positive", {"dimension": dimension})
        super().__init__(np.zeros(int(dimension)), np.eye(int(dimension)), kappa, kappa_source)

    @property
    def is_standard(self):
        return True

    def describe(self):
        return Measure.describe(self)


class ExponentialOneSided(Measure):
    """nu_1: density exp(-x) on (0, inf)."""

    kind = "exponential-one-sided"

    def __init__(self, kappa: Optional[float] = None, kappa_source: Optional[str] = None):
        if kappa is None:
            kappa, kappa_source = 1.0, "one-sided exponential: kappa=1"
        super().__init__(1, None, kappa, kappa_source)

    @property
    def is_log_concave(self):
        return True

    def interval_support(self):
        return 0.0, math.inf

    def _log_density(self, X):
        x = X[:, 0]
        return np.where(x >= 0, -x, -np.inf)

    def _sample(self, count, rng):
        return rng.exponential(1.0, size=(count, 1))

    def tail_radius(self):
        return -math.log(TAIL_MASS)

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        out = np.where(x > 0, -np.expm1(-np.maximum(x, 0.0)), 0.0)
        return float(out) if out.ndim == 0 else out

    def quantile(self, u):
        u = np.asarray(u, dtype=float)
        if np.any((u <= 0) | (u >= 1)):
            raise DomainError("Quantile level must lie in (0, 1)")
        out = -np.log1p(-u)
        return float(out) if out.ndim == 0 else out

    def analytic_moment(self, p):
        return float(special.gamma(p + 1.0))


class ExponentialSymmetric(Measure):
    """nu_2: density exp(-|x|)/2 on the line."""

    kind = "exponential-symmetric"

    def __init__(self, kappa: Optional[float] = None, kappa_source: Optional[str] = None):
        if kappa is None:
            kappa, kappa_source = 2.0, KAPPA_SYMMETRIC_1D
        super().__init__(1, None, kappa, kappa_source)

    @property
    def is_log_concave(self):
        return True

    def _log_density(self, X):
        return -math.log(2.0) - np.abs(X[:, 0])

    def _sample(self, count, rng):
        return rng.laplace(0.0, 1.0, size=(count, 1))

    def tail_radius(self):
        return -math.log(TAIL_MASS)

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        out = np.where(x < 0, 0.5 * np.exp(np.minimum(x, 0.0)), 1.0 - 0.5 * np.exp(-np.maximum(x, 0.0)))
        return float(out) if out.ndim == 0 else out

    def quantile(self, u):
        u = np.asarray(u, dtype=float)
        if np.any((u <= 0) | (u >= 1)):
            raise DomainError("Quantile level must lie in (0, 1)")
        out = np.where(u < 0.5, np.log(2.0 * np.minimum(u, 0.5)), -np.log(2.0 * (1.0 - np.maximum(u, 0.5))))
        return float(out) if out.ndim == 0 else out

    def analytic_moment(self, p):
        return float(special.gamma(p + 1.0))


class UniformOnBody(Measure):
    """Normalized Lebesgue measure on a body (closure counts as inside)."""

    kind = "uniform-on-body"

    def __init__(self, body: SymmetricConvexBody, kappa: Optional[float] = None, kappa_source: Optional[str] = None):
        if kappa is None:
            if body.dimension == 1:
                kappa, kappa_source = 2.0, KAPPA_SYMMETRIC_1D
            elif body.is_convex:
                kappa, kappa_source = 1.0, KAPPA_LOG_CONCAVE
        super().__init__(body.dimension, body, kappa, kappa_source)
        self.body = body
        self._volume = float(body.volume())
        self._log_volume = math.log(self._volume)

    @property
    def is_log_concave(self):
        return self.body.is_convex

    @property
    def volume(self) -> float:
        return self._volume

    def _log_density(self, X):
        inside = self.body._gauge(X) <= 1.0
        return np.where(inside, -self._log_volume, -np.inf)

    def _sample(self, count, rng):
        if self.dimension == 1:
            t = 0.5 * self._volume
            return rng.uniform(-t, t, size=(count, 1))
        _, R = self.body.radii()
        out, have, drawn = [], 0, 0
        while have < count:
            batch = max(2 * (count - have), 1024)
            X = rng.uniform(-R, R, size=(batch, self.dimension))
            keep = X[self.body._gauge(X) < 1.0]
            drawn += batch
            have += keep.shape[0]
            out.append(keep)
            if drawn >= 100_000 and have / drawn < MIN_ACCEPTANCE:
                raise SamplingError("Rejection acceptance rate below 1e-4", {"accepted": have, "drawn": drawn})
        return np.vstack(out)[:count]

    def tail_radius(self):
        return self.body.radii()[1]

    def cdf(self, x):
        if self.dimension != 1:
            raise UnsupportedOperationError("CDF is defined only in dimension 1")
        t = 0.5 * self._volume
        out = np.clip((np.asarray(x, dtype=float) + t) / (2 * t), 0.0, 1.0)
        return float(out) if out.ndim == 0 else out

    def quantile(self, u):
        if self.dimension != 1:
            raise UnsupportedOperationError("Quantiles are defined only in dimension 1")
        u = np.asarray(u, dtype=float)
        if np.any((u <= 0) | (u >= 1)):
            raise DomainError("Quantile level must lie in (0, 1)")
        t = 0.5 * self._volume
        out = (2.0 * u - 1.0) * t
        return float(out) if out.ndim == 0 else out

    def analytic_moment(self, p):
        if self.dimension == 1:
            return float((0.5 * self._volume) ** p / (p + 1.0))
        if isinstance(self.body, EuclideanBall):
            n = self.dimension
            return float(n / (n + p) * self.body.radius ** p)
        return None

    def describe(self):
        return {**super().describe(), "body": self.body.describe()}


class Numeric1DMeasure(Measure):
    """1-d measure from an unnormalized log-density, normalized by quadrature."""

    kind = "numeric-1d"

    def __init__(self, log_density: Callable[[np.ndarray], np.ndarray], lo: float = -math.inf, hi: float = math.inf,
                 breaks: Sequence[float] = (), log_concave: bool = False, symmetric: bool = False,
                 kappa: Optional[float] = None, kappa_source: Optional[str] = None):
        if not lo < hi:
            raise ConstructionError("Support interval must be nonempty", {"lo": lo, "hi": hi})
        if kappa is None and log_concave:
            kappa, kappa_source = (2.0, KAPPA_SYMMETRIC_1D) if symmetric else (1.0, KAPPA_LOG_CONCAVE)
        support = EuclideanBall(1, hi) if symmetric and math.isfinite(hi) and lo == -hi else None
        super().__init__(1, support, kappa, kappa_source)
        self._raw = log_density
        self._lo, self._hi = float(lo), float(hi)
        self._log_concave = log_concave
        self.table = CdfTable(self._raw_log_density, lo, hi, breaks)

    def _raw_log_density(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        inside = (x >= self._lo) & (x <= self._hi)
        with np.errstate(all="ignore"):
            values = np.asarray(self._raw(x), dtype=float)
        return np.where(inside, values, -np.inf)

    @property
    def is_log_concave(self):
        return self._log_concave

    def interval_support(self):
        return self._lo, self._hi

    def _log_density(self, X):
        return self._raw_log_density(X[:, 0]) - self.table.log_normalizer

    def _sample(self, count, rng):
        u = rng.uniform(0.0, 1.0, size=count)
        u = np.clip(u, 1e-16, 1.0 - 1e-16)
        return np.asarray(self.table.quantile(u)).reshape(count, 1)

    def tail_radius(self):
        return self.table.tail_radius

    @property
    def _numeric_cdf(self):
        return self.table


class LogConcaveCustom(Numeric1DMeasure):
    """Density proportional to exp(-|x|^q / q), optionally restricted to (-t, t)."""

    kind = "log-concave-custom"

    def __init__(self, q: float, half_width: Optional[float] = None,
                 kappa: Optional[float] = None, kappa_source: Optional[str] = None):
        if not q >= 1:
            raise ConstructionError("Potential exponent must be at least 1 for log-concavity", {"q": q})
        if half_width is not None and not half_width > 0:
            raise ConstructionError("half_width must be positive", {"half_width": half_width})
        self.q = float(q)
        self.half_width = half_width
        t = math.inf if half_width is None else float(half_width)
        super().__init__(lambda x: -np.abs(x) ** self.q / self.q, -t, t, log_concave=True, symmetric=True,
                         kappa=kappa, kappa_source=kappa_source)

    def analytic_moment(self, p):
        if self.half_width is not None:
            return None
        q = self.q
        return float(q ** (p / q) * special.gamma((p + 1.0) / q) / special.gamma(1.0 / q))

    def describe(self):
        return {**super().describe(), "q": self.q, "half_width": self.half_width}


class ProductMeasure(Measure):
    kind = "product"

    def __init__(self, factors: Sequence[Measure], kappa: Optional[float] = None, kappa_source: Optional[str] = None):
        factors = list(factors)
        if len(factors) < 2:
            raise ConstructionError("Product needs at least two factors")
        if kappa is None and all(f.is_log_concave for f in factors):
            kappa, kappa_source = 1.0, KAPPA_LOG_CONCAVE
        super().__init__(sum(f.dimension for f in factors), None, kappa, kappa_source)
        self.factors = factors
        self._slices = []
        start = 0
        for f in factors:
            self._slices.append(slice(start, start + f.dimension))
            start += f.dimension

    @property
    def is_log_concave(self):
        return all(f.is_log_concave for f in self.factors)

    def _log_density(self, X):
        return sum(f._log_density(X[:, s]) for f, s in zip(self.factors, self._slices))

    def _sample(self, count, rng):
        return np.hstack([f.sample(count, rng) for f in self.factors])

    def support_radius(self, U):
        out = np.full(U.shape[0], np.inf)
        for f, s in zip(self.factors, self._slices):
            sub = U[:, s]
            norm = np.linalg.norm(sub, axis=1)
            moving = norm > 0
            if np.any(moving):
                extent = np.full(U.shape[0], np.inf)
                extent[moving] = f.support_radius(sub[moving] / norm[moving, None]) / norm[moving]
                out = np.minimum(out, extent)
        return out

    def tail_radius(self):
        return float(np.linalg.norm([f.tail_radius() for f in self.factors]))

    def analytic_moment(self, p):
        if p == 2:
            seconds = [f.analytic_moment(2.0) for f in self.factors]
            if all(m is not None for m in seconds):
                return float(sum(seconds))
        return None

    def describe(self):
        return {**super().describe(), "factors": [f.describe() for f in self.factors]}


class PerturbedMeasure(Measure):
    """dnu = h dmu with h = (1 + a cos(w x_1)) / Z and b^-1 <= h <= b."""

    kind = "perturbed"

    def __init__(self, base: Measure, amplitude: float, frequency: float, bound: float,
                 kappa: Optional[float] = None, kappa_source: Optional[str] = None):
        if not 0 <= abs(amplitude) < 1:
            raise ConstructionError("Perturbation amplitude must satisfy |a| < 1", {"amplitude": amplitude})
        if not bound >= 1:
            raise ConstructionError("Perturbation bound must be at least 1", {"bound": bound})
        self.base = base
        self.amplitude = float(amplitude)
        self.frequency = float(frequency)
        self.bound = float(bound)
        self.normalizer = self._normalizer()
        self.h_min = (1.0 - abs(self.amplitude)) / self.normalizer
        self.h_max = (1.0 + abs(self.amplitude)) / self.normalizer
        if self.h_min < 1.0 / self.bound or self.h_max > self.bound:
            raise ConstructionError(
                "Perturbation density leaves [1/b, b]",
                {"h_min": self.h_min, "h_max": self.h_max, "bound": self.bound},
            )
        if kappa is None and base.kappa is not None:
            kappa = base.kappa / self.bound ** 2
            kappa_source = f"bounded perturbation (kappa_base / b^2) of [{base.kappa_source}]"
        super().__init__(base.dimension, base.support, kappa, kappa_source)

    def _modulation(self, X: np.ndarray) -> np.ndarray:
        return 1.0 + self.amplitude * np.cos(self.frequency * X[:, 0])

    def _normalizer(self) -> float:
        if isinstance(self.base, GaussianMeasure):
            var = float(self.base.covariance[0, 0])
            return 1.0 + self.amplitude * math.cos(self.frequency * self.base.mean[0]) * math.exp(-0.5 * self.frequency ** 2 * var)
        budget = EstimationBudget(method="auto", samples=settings.samples, seed=settings.seed)
        z = expect(self.base, self._modulation, budget)
        return z.value

    def h(self, X: np.ndarray) -> np.ndarray:
        return self._modulation(X) / self.normalizer

    @property
    def is_log_concave(self):
        return False

    def _log_density(self, X):
        return self.base._log_density(X) + np.log(self.h(X))

    def _sample(self, count, rng):
        out, have, drawn = [], 0, 0
        while have < count:
            batch = max(int(1.2 * self.h_max / self.h_min * (count - have)), 1024)
            X = self.base.sample(batch, rng)
            keep = X[rng.uniform(0.0, self.h_max, size=batch) < self.h(X)]
            drawn += batch
            have += keep.shape[0]
            out.append(keep)
            if drawn >= 100_000 and have / drawn < MIN_ACCEPTANCE:
                raise SamplingError("Rejection acceptance rate below 1e-4", {"accepted": have, "drawn": drawn})
        return np.vstack(out)[:count]

    def interval_support(self):
        return self.base.interval_support()

    def support_radius(self, U):
        return self.base.support_radius(U)

    def tail_radius(self):
        return self.base.tail_radius()

    def angle_breaks(self):
        return self.base.angle_breaks()

    def describe(self):
        return {
            **super().describe(),
            "base": self.base.describe(),
            "amplitude": self.amplitude,
            "frequency": self.frequency,
            "bound": self.bound,
        }


# --- integration engine -------------------------------------------------------

@dataclass
class Integral:
    """Vector of integrals of F against a measure, with error bars."""
    values: np.ndarray
    errors: np.ndarray
    method: str
    seed: Optional[int] = None
    samples: int = 0
    converged: bool = True
    covariance: Optional[np.ndarray] = None
    flags: List[str] = field(default_factory=list)

    def estimate(self, index: int = 0, budget: Optional[EstimationBudget] = None) -> Estimate:
        flags = list(self.flags)
        if not self.converged and "inconclusive" not in flags:
            flags.append("inconclusive")
        return Estimate(
            value=float(self.values[index]),
            std_error=float(self.errors[index]),
            method=self.method,
            budget=budget,
            seed=self.seed,
            flags=flags,
        )


RayBreaks = Callable[[np.ndarray], np.ndarray]


def _as_matrix(values, count: int) -> np.ndarray:
    values = np.asarray(values, dtype=float)
    if values.ndim == 0:
        return np.full((count, 1), float(values))
    if values.ndim == 1:
        return values[:, None]
    return values


def _intervals_1d(m: Measure, region: Optional[SymmetricConvexBody], exclude: Optional[SymmetricConvexBody]):
    lo, hi = m.interval_support()
    if region is not None:
        t = float(region.radial_function(np.ones((1, 1)))[0])
        lo, hi = max(lo, -t), min(hi, t)
    if hi <= lo:
        return []
    if exclude is None:
        return [(lo, hi)]
    s = float(exclude.radial_function(np.ones((1, 1)))[0])
    pieces = []
    if lo < -s:
        pieces.append((lo, min(hi, -s)))
    if hi > s:
        pieces.append((max(lo, s), hi))
    return pieces


def _weighted(values: np.ndarray, density: np.ndarray) -> np.ndarray:
    """values * density with zero wherever the density vanishes."""
    with np.errstate(invalid="ignore", over="ignore"):
        return np.where(density[:, None] > 0, values * density[:, None], 0.0)


def _quadrature_1d(m, F, budget, region, exclude, ray_breaks) -> Integral:
    engine = GaussLegendre(order=budget.nodes, tol=budget.tol, max_depth=settings.quad_max_depth)
    points = [0.0]
    if ray_breaks is not None:
        radii = np.asarray(ray_breaks(np.array([[1.0], [-1.0]])), dtype=float)
        if radii.size:
            points += [float(r) for r in radii[0] if np.isfinite(r)]
            points += [-float(r) for r in radii[1] if np.isfinite(r)]

    def integrand(x):
        X = x[:, None]
        return _weighted(_as_matrix(F(X), x.size), m.density(X))

    value, error, converged, finite = None, None, True, True
    for a, b in _intervals_1d(m, region, exclude):
        res = engine.integrate(integrand, a, b, points)
        value = res.value if value is None else value + res.value
        error = res.error if error is None else error + res.error
        converged = converged and res.converged
        finite = finite and res.finite
    if value is None:
        width = _as_matrix(F(np.zeros((1, 1))), 1).shape[1]
        value, error = np.zeros(width), np.zeros(width)
    error = np.maximum(np.atleast_1d(error), 1e-15 * np.abs(np.atleast_1d(value)))
    flags = [] if finite else ["infinite"]
    return Integral(np.atleast_1d(value), error, "quadrature", converged=converged, flags=flags)


def _polar_2d(m, F, budget, region, exclude, ray_breaks, angle_breaks, panels: int) -> np.ndarray:
    breaks = [m.angle_breaks(), np.asarray(angle_breaks, dtype=float)]
    for body in (region, exclude):
        if body is not None:
            breaks.append(body.break_angles())
    edges = np.unique(np.concatenate([np.linspace(0.0, 2 * np.pi, panels + 1), np.mod(np.concatenate(breaks), 2 * np.pi)]))
    theta, w_theta = fixed_nodes(edges[:-1], edges[1:], budget.nodes)
    theta, w_theta = theta.ravel(), w_theta.ravel()
    U = unit_directions_2d(theta)

    outer = np.minimum(m.support_radius(U), m.tail_radius())
    if region is not None:
        outer = np.minimum(outer, region.radial_function(U))
    inner = np.zeros_like(outer) if exclude is None else np.minimum(exclude.radial_function(U), outer)
    kinks = np.asarray(ray_breaks(U), dtype=float) if ray_breaks is not None else np.empty((U.shape[0], 0))
    kinks = np.where(np.isfinite(kinks), kinks, outer[:, None])
    kinks = np.clip(kinks, inner[:, None], outer[:, None])
    radial_edges = np.sort(np.column_stack([inner, kinks, outer]), axis=1)
    r, w_r = composite_nodes(radial_edges, RADIAL_PANELS, budget.nodes)

    X = (r[..., None] * U[:, None, :]).reshape(-1, 2)
    weights = (r * w_r * w_theta[:, None]).ravel()
    values = _as_matrix(F(X), X.shape[0])
    return weights @ _weighted(values, m.density(X))


def _quadrature_2d(m, F, budget, region, exclude, ray_breaks, angle_breaks) -> Integral:
    panels = settings.angular_panels
    fine = _polar_2d(m, F, budget, region, exclude, ray_breaks, angle_breaks, panels)
    coarse = _polar_2d(m, F, budget, region, exclude, ray_breaks, angle_breaks, max(panels // 2, 4))
    error = np.maximum(np.abs(fine - coarse), 1e-15 * np.abs(fine))
    return Integral(np.atleast_1d(fine), np.atleast_1d(error), "quadrature")


def _monte_carlo(m, F, budget, region, exclude) -> Integral:
    count = int(budget.samples)
    if count <= 0:
        raise DomainError("Monte Carlo needs a positive sample count", {"samples": count})
    chunks = [MC_CHUNK] * (count // MC_CHUNK) + ([count % MC_CHUNK] if count % MC_CHUNK else [])
    streams = np.random.SeedSequence(int(budget.seed)).spawn(len(chunks))
    total, outer = None, None
    for size, stream in zip(chunks, streams):
        X = m.sample(size, np.random.default_rng(stream))
        values = _as_matrix(F(X), size)
        mask = np.ones(size, dtype=bool)
        if region is not None:
            mask &= region._gauge(X) < 1.0
        if exclude is not None:
            mask &= exclude._gauge(X) >= 1.0
        values = np.where(mask[:, None], values, 0.0)
        s = values.sum(axis=0)
        o = values.T @ values
        total = s if total is None else total + s
        outer = o if outer is None else outer + o
    mean = total / count
    cov = (outer / count - np.outer(mean, mean)) * count / max(count - 1, 1)
    cov_mean = cov / count
    flags = []
    if not np.all(np.isfinite(mean)):
        flags.append("inconclusive")
    errors = np.sqrt(np.maximum(np.diag(cov_mean), 0.0))
    return Integral(mean, errors, "monte-carlo", seed=int(budget.seed), samples=count, covariance=cov_mean, flags=flags)


def integrate(
    m: Measure,
    F: Callable[[np.ndarray], np.ndarray],
    budget: EstimationBudget,
    region: Optional[SymmetricConvexBody] = None,
    exclude: Optional[SymmetricConvexBody] = None,
    ray_breaks: Optional[RayBreaks] = None,
    angle_breaks: Sequence[float] = (),
) -> Integral:
    """Integrate F over (region minus exclude) against m.

    Args:
        m: the measure
        F: vectorised map from an (N, n) array to (N,) or (N, k)
        budget: method, nodes, samples and seed
        region: restrict to this open body
        exclude: remove this open body (shells)
        ray_breaks: kink radii of F along unit directions, shape (M, j)
        angle_breaks: polar angles where F has kinks (dimension 2)

    Returns:
        Integral with per-component values and standard errors
    """
    for body in (region, exclude):
        if body is not None and body.dimension != m.dimension:
            raise DomainError("Body and measure dimensions differ", {"body": body.dimension, "measure": m.dimension})
    method = budget.resolve(m.dimension)
    if method == "quadrature":
        if m.dimension == 1:
            return _quadrature_1d(m, F, budget, region, exclude, ray_breaks)
        if m.dimension == 2:
            return _quadrature_2d(m, F, budget, region, exclude, ray_breaks, angle_breaks)
        raise UnsupportedOperationError("Quadrature is available only in dimensions 1 and 2", {"dimension": m.dimension})
    return _monte_carlo(m, F, budget, region, exclude)


def expect(m: Measure, F: Callable[[np.ndarray], np.ndarray], budget: EstimationBudget, **kwargs) -> Estimate:
    """Scalar integral of F against m as an Estimate."""
    return integrate(m, F, budget, **kwargs).estimate(0, budget)


# --- module-level operations ---------------------------------------------------

def log_density(m: Measure, x):
    return m.log_density(x)


def _ball_radius(K: SymmetricConvexBody) -> Optional[float]:
    if isinstance(K, EuclideanBall):
        return K.radius
    if isinstance(K, ScaledBody) and isinstance(K.body, EuclideanBall):
        return K.body.radius * K.factor
    return None


def mass_of_body(m: Measure, K: SymmetricConvexBody, budget: EstimationBudget) -> Estimate:
    """mu(K) for an open symmetric convex body."""
    if K.dimension != m.dimension:
        raise DomainError("Body and measure dimensions differ", {"body": K.dimension, "measure": m.dimension})
    method = budget.resolve(m.dimension)
    if method == "quadrature" and m.dimension > 2:
        raise UnsupportedOperationError("Quadrature is available only in dimensions 1 and 2", {"dimension": m.dimension})
    if method == "monte-carlo" and budget.samples <= 0:
        raise DomainError("Monte Carlo needs a positive sample count", {"samples": budget.samples})
    radius = _ball_radius(K)
    if isinstance(m, GaussianMeasure) and m.is_standard and radius is not None:
        return Estimate.exact(stats.chi2.cdf(radius ** 2, m.dimension), budget=budget)
    if m.dimension == 1 and method == "quadrature":
        t = float(K.radial_function(np.ones((1, 1)))[0])
        try:
            value = float(m.cdf(t)) - float(m.cdf(-t))
            return Estimate(value=value, std_error=1e-15, method="quadrature", budget=budget)
        except UnsupportedOperationError:
            pass
    return expect(m, lambda X: np.ones(X.shape[0]), budget, region=K)


def total_mass(m: Measure, budget: EstimationBudget) -> Estimate:
    """Integral of the density (1 up to quadrature error)."""
    return expect(m, lambda X: np.ones(X.shape[0]), budget)


def sample(m: Measure, count: int, seed: int) -> np.ndarray:
    if int(count) < 1:
        raise DomainError("Sample count must be positive", {"count": count})
    return m.sample(int(count), np.random.default_rng(int(seed)))


def quantile_1d(m: Measure, u: float) -> float:
    if m.dimension != 1:
        raise UnsupportedOperationError("Quantiles are defined only in dimension 1", {"dimension": m.dimension})
    if not 0.0 < u < 1.0:
        raise DomainError("Quantile level must lie in (0, 1)", {"u": u})
    return float(m.quantile(u))


def moment(m: Measure, p: float, budget: EstimationBudget) -> Estimate:
    """Integral of |x|^p against m."""
    if not p > 0:
        raise DomainError("Moment order must be positive", {"p": p})
    exact = m.analytic_moment(p)
    if exact is not None:
        return Estimate.exact(exact, budget=budget)
    result = expect(m, lambda X: np.linalg.norm(X, axis=1) ** p, budget)
    if result.method == "monte-carlo" and result.std_error > 0.1 * abs(result.value):
        logger.warning(f"Moment of order {p} under {m.kind} looks divergent (relative error {result.std_error / max(abs(result.value), 1e-300):.2f})")
        result = result.flagged("inconclusive")
    return result
