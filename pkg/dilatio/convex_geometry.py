"""
Symmetric open convex bodies represented through their gauge functions.

Every body answers gauge queries; membership is gauge(x) < 1. Radii,
boundary quadrature and Euclidean distances are provided per kind where
they are cheap and exact, with sampled fallbacks for general kinds.
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple
import logging
import math

import numpy as np
from scipy import optimize, special
from scipy.spatial import ConvexHull, HalfspaceIntersection

from .exceptions import ConstructionError, DomainError, UnsupportedOperationError
from .quadrature import fixed_nodes, gauss_legendre, periodic_trapezoid

logger = logging.getLogger(__name__)

RADII_DIRECTIONS = 20_000
AXIS_ANGLES = np.array([0.0, 0.5 * np.pi, np.pi, 1.5 * np.pi])


def as_points(x, dimension: int) -> Tuple[np.ndarray, bool]:
    """Coerce x to an (m, n) array; report whether a single point was given."""
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 0:
        if dimension != 1:
            raise DomainError("Scalar point given for a multi-dimensional object", {"dimension": dimension})
        return arr.reshape(1, 1), True
    if arr.ndim == 1:
        if arr.shape[0] == dimension:
            return arr.reshape(1, dimension), True
        if dimension == 1:
            return arr.reshape(-1, 1), False
    if arr.ndim == 2 and arr.shape[1] == dimension:
        return arr, False
    raise DomainError("Point array does not match the dimension", {"shape": list(arr.shape), "dimension": dimension})


def unit_directions_2d(theta: np.ndarray) -> np.ndarray:
    return np.stack([np.cos(theta), np.sin(theta)], axis=-1)


@dataclass(frozen=True)
class BoundaryElement:
    """Quadrature atom on the boundary: point, outer unit normal, surface weight."""
    point: np.ndarray
    normal: np.ndarray
    weight: float


@dataclass(frozen=True)
class BoundaryRule:
    """Array form of a boundary quadrature rule."""
    points: np.ndarray
    normals: np.ndarray
    weights: np.ndarray

    def elements(self) -> List[BoundaryElement]:
        return [
            BoundaryElement(point=p, normal=v, weight=float(w))
            for p, v, w in zip(self.points, self.normals, self.weights)
        ]

    def scaled(self, factor: float) -> "BoundaryRule":
        n = self.points.shape[1]
        return BoundaryRule(self.points * factor, self.normals, self.weights * factor ** (n - 1))


class SymmetricConvexBody(ABC):
    """Symmetric open convex set K given by its gauge ||x||_K."""

    kind: str = "abstract"

    def __init__(self, dimension: int):
        if int(dimension) < 1:
            raise ConstructionError("Dimension must be positive", {"dimension": dimension})
        self.dimension = int(dimension)

    @abstractmethod
    def _gauge(self, X: np.ndarray) -> np.ndarray:
        """Gauge on an (m, n) array."""

    def gauge(self, x):
        X, single = as_points(x, self.dimension)
        g = self._gauge(X)
        return float(g[0]) if single else g

    def contains(self, x):
        g = self.gauge(x)
        return g < 1.0

    def gauge_gradient(self, X: np.ndarray) -> np.ndarray:
        """Gradient of the gauge where it exists (NaN elsewhere)."""
        raise UnsupportedOperationError(f"No gauge gradient for kind {self.kind}")

    def radial_function(self, U: np.ndarray) -> np.ndarray:
        """Distance from the origin to the boundary along unit directions U."""
        g = self._gauge(np.atleast_2d(U))
        with np.errstate(divide="ignore"):
            return np.where(g > 0, 1.0 / g, np.inf)

    @property
    def is_unconditional(self) -> bool:
        return False

    @property
    def is_convex(self) -> bool:
        return True

    @property
    def is_smooth(self) -> bool:
        return False

    def break_angles(self) -> np.ndarray:
        """Polar angles in [0, 2*pi) where the 2-d boundary may have kinks."""
        return AXIS_ANGLES.copy()

    def radii(self) -> Tuple[float, float]:
        return sampled_radii(self)

    def boundary_rule(self, resolution: int) -> BoundaryRule:
        if self.dimension == 1:
            return _interval_rule(self)
        raise UnsupportedOperationError(f"Boundary quadrature not supported for kind {self.kind}")

    def distance(self, X: np.ndarray) -> np.ndarray:
        """Euclidean distance from points to the body (0 inside)."""
        if self.dimension == 1:
            t = 1.0 / self._gauge(np.ones((1, 1)))[0]
            return np.maximum(np.abs(X[:, 0]) - t, 0.0)
        raise UnsupportedOperationError(f"Euclidean neighbourhoods not supported for kind {self.kind}")

    def volume(self) -> float:
        if self.dimension == 1:
            return 2.0 / self._gauge(np.ones((1, 1)))[0]
        if self.dimension == 2:
            theta, w = _angular_rule(self.break_angles(), 64, 20)
            rho = self.radial_function(unit_directions_2d(theta))
            return float(np.sum(0.5 * rho ** 2 * w))
        rng = np.random.default_rng(0)
        _, big = self.radii()
        X = rng.uniform(-big, big, size=(400_000, self.dimension))
        frac = float(np.mean(self._gauge(X) < 1.0))
        logger.warning(f"Volume of {self.kind} body in dimension {self.dimension} estimated by sampling")
        return frac * (2.0 * big) ** self.dimension

    def scaled(self, factor: float) -> "SymmetricConvexBody":
        return ScaledBody(self, factor)

    def describe(self) -> dict:
        return {"kind": self.kind, "dimension": self.dimension}

    def __repr__(self) -> str:
        params = ", ".join(f"{k}={v}" for k, v in self.describe().items() if k != "kind")
        return f"{self.__class__.__name__}({params})"


class EuclideanBall(SymmetricConvexBody):
    kind = "euclidean-ball"

    def __init__(self, dimension: int, radius: float = 1.0):
        super().__init__(dimension)
        if not radius > 0:
            raise ConstructionError("Ball radius must be positive", {"radius": radius})
        self.radius = float(radius)

    def _gauge(self, X):
        return np.linalg.norm(X, axis=1) / self.radius

    def gauge_gradient(self, X):
        norm = np.linalg.norm(X, axis=1, keepdims=True)
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(norm > 0, X / (self.radius * norm), np.nan)

    @property
    def is_unconditional(self):
        return True

    @property
    def is_smooth(self):
        return True

    def radii(self):
        return self.radius, self.radius

    def boundary_rule(self, resolution):
        r = self.radius
        if self.dimension == 1:
            return _interval_rule(self)
        if self.dimension == 2:
            theta, w = periodic_trapezoid(max(int(resolution), 8))
            u = unit_directions_2d(theta)
            return BoundaryRule(r * u, u, r * w)
        if self.dimension == 3:
            return _ellipsoid_rule_3d(np.array([r, r, r]), resolution)
        raise UnsupportedOperationError("Boundary quadrature supports dimensions 1 to 3")

    def distance(self, X):
        return np.maximum(np.linalg.norm(X, axis=1) - self.radius, 0.0)

    def volume(self):
        n = self.dimension
        return math.pi ** (n / 2) / special.gamma(n / 2 + 1) * self.radius ** n

    def describe(self):
        return {"kind": self.kind, "dimension": self.dimension, "radius": self.radius}


class Ellipsoid(SymmetricConvexBody):
    kind = "ellipsoid"

    def __init__(self, semi_axes: Sequence[float]):
        axes = np.asarray(semi_axes, dtype=float).ravel()
        super().__init__(axes.size)
        if axes.size == 0 or np.any(~(axes > 0)):
            raise ConstructionError("Ellipsoid semi-axes must be positive", {"semi_axes": list(map(float, axes))})
        self.semi_axes = axes

    def _gauge(self, X):
        return np.linalg.norm(X / self.semi_axes, axis=1)

    def gauge_gradient(self, X):
        g = self._gauge(X)[:, None]
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(g > 0, X / self.semi_axes ** 2 / g, np.nan)

    @property
    def is_unconditional(self):
        return True

    @property
    def is_smooth(self):
        return True

    def radii(self):
        return float(self.semi_axes.min()), float(self.semi_axes.max())

    def boundary_rule(self, resolution):
        a = self.semi_axes
        if self.dimension == 1:
            return _interval_rule(self)
        if self.dimension == 2:
            theta, w = periodic_trapezoid(max(int(resolution), 8))
            c, s = np.cos(theta), np.sin(theta)
            points = np.stack([a[0] * c, a[1] * s], axis=1)
            speed = np.hypot(a[0] * s, a[1] * c)
            normals = np.stack([a[1] * c, a[0] * s], axis=1) / speed[:, None]
            return BoundaryRule(points, normals, speed * w)
        if self.dimension == 3:
            return _ellipsoid_rule_3d(a, resolution)
        raise UnsupportedOperationError("Boundary quadrature supports dimensions 1 to 3")

    def distance(self, X):
        a2 = self.semi_axes ** 2
        out = np.zeros(X.shape[0])
        outside = self._gauge(X) > 1.0
        if not np.any(outside):
            return out
        Y = X[outside]
        lo = np.zeros(Y.shape[0])
        hi = np.linalg.norm(Y, axis=1) * self.semi_axes.max()
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            h = np.sum(a2 * Y ** 2 / (a2 + mid[:, None]) ** 2, axis=1) - 1.0
            lo = np.where(h > 0, mid, lo)
            hi = np.where(h > 0, hi, mid)
        lam = 0.5 * (lo + hi)
        closest = a2 * Y / (a2 + lam[:, None])
        out[outside] = np.linalg.norm(Y - closest, axis=1)
        return out

    def volume(self):
        n = self.dimension
        return math.pi ** (n / 2) / special.gamma(n / 2 + 1) * float(np.prod(self.semi_axes))

    def describe(self):
        return {"kind": self.kind, "dimension": self.dimension, "semi_axes": self.semi_axes.tolist()}


class LpBall(SymmetricConvexBody):
    """{x : (sum |x_i|^p)^(1/p) < radius}; convex only for p >= 1."""

    kind = "lp-ball"

    def __init__(self, dimension: int, p: float, radius: float = 1.0):
        super().__init__(dimension)
        if not p > 0:
            raise ConstructionError("lp exponent must be positive", {"p": p})
        if not radius > 0:
            raise ConstructionError("lp-ball radius must be positive", {"radius": radius})
        self.p = float(p)
        self.radius = float(radius)
        if self.p < 1:
            logger.warning(f"lp-ball with p={self.p} is star-shaped but not convex")

    def _gauge(self, X):
        if math.isinf(self.p):
            return np.max(np.abs(X), axis=1) / self.radius
        return np.sum(np.abs(X) ** self.p, axis=1) ** (1.0 / self.p) / self.radius

    def gauge_gradient(self, X):
        g = self._gauge(X)[:, None]
        p = self.p
        with np.errstate(invalid="ignore", divide="ignore"):
            grad = np.sign(X) * np.abs(X) ** (p - 1.0) / (self.radius ** p * g ** (p - 1.0))
            return np.where(g > 0, grad, np.nan)

    @property
    def is_unconditional(self):
        return True

    @property
    def is_convex(self):
        return self.p >= 1

    @property
    def is_smooth(self):
        return self.p > 1 and not math.isinf(self.p)

    def radii(self):
        factor = self.dimension ** (0.5 - 1.0 / self.p)
        diagonal = self.radius * factor
        return (min(self.radius, diagonal), max(self.radius, diagonal))

    def volume(self):
        n, p = self.dimension, self.p
        unit = (2.0 * special.gamma(1.0 / p + 1.0)) ** n / special.gamma(n / p + 1.0)
        return float(unit * self.radius ** n)

    def describe(self):
        return {"kind": self.kind, "dimension": self.dimension, "p": self.p, "radius": self.radius}


class HPolytope(SymmetricConvexBody):
    """Symmetric polytope max_i |<a_i, x>| / b_i < 1; halfspaces are stored in +/- pairs."""

    kind = "h-polytope"

    def __init__(self, normals: Sequence[Sequence[float]], offsets: Sequence[float]):
        A = np.atleast_2d(np.asarray(normals, dtype=float))
        b = np.asarray(offsets, dtype=float).ravel()
        super().__init__(A.shape[1])
        if A.shape[0] != b.size or A.shape[0] == 0:
            raise ConstructionError("Each halfspace needs one normal and one offset", {"normals": A.shape[0], "offsets": b.size})
        if np.any(~(b > 0)):
            raise ConstructionError("Halfspace offsets must be positive", {"offsets": b.tolist()})
        if np.any(np.linalg.norm(A, axis=1) == 0):
            raise ConstructionError("Halfspace normals must be nonzero")
        self.normals = np.vstack([A, -A])
        self.offsets = np.concatenate([b, b])
        self.half_widths: Optional[np.ndarray] = None
        self._hull: Optional[ConvexHull] = None

    @classmethod
    def box(cls, half_widths: Sequence[float]) -> "HPolytope":
        hw = np.asarray(half_widths, dtype=float).ravel()
        if hw.size == 0 or np.any(~(hw > 0)):
            raise ConstructionError("Box half-widths must be positive", {"half_widths": hw.tolist()})
        body = cls(np.eye(hw.size), hw)
        body.half_widths = hw
        return body

    @property
    def is_bounded(self) -> bool:
        return np.linalg.matrix_rank(self.normals) == self.dimension

    def _gauge(self, X):
        return np.max(X @ (self.normals / self.offsets[:, None]).T, axis=1)

    def gauge_gradient(self, X):
        scaled = self.normals / self.offsets[:, None]
        active = np.argmax(X @ scaled.T, axis=1)
        grad = scaled[active]
        zero = np.all(X == 0, axis=1)
        grad[zero] = np.nan
        return grad

    @property
    def is_unconditional(self):
        if self.half_widths is not None:
            return True
        rows = np.round(np.column_stack([self.normals / self.offsets[:, None]]), 12)
        known = {tuple(r) for r in rows}
        for r in rows:
            for signs in np.array(np.meshgrid(*[[-1.0, 1.0]] * self.dimension)).T.reshape(-1, self.dimension):
                if tuple(np.round(r * signs, 12)) not in known:
                    return False
        return True

    def hull(self) -> ConvexHull:
        if self._hull is None:
            if not self.is_bounded:
                raise UnsupportedOperationError("Polytope is unbounded", {"rank": int(np.linalg.matrix_rank(self.normals))})
            halfspaces = np.hstack([self.normals, -self.offsets[:, None]])
            hs = HalfspaceIntersection(halfspaces, np.zeros(self.dimension))
            self._hull = ConvexHull(hs.intersections)
        return self._hull

    def vertices(self) -> np.ndarray:
        hull = self.hull()
        return hull.points[hull.vertices]

    def radii(self):
        if not self.is_bounded:
            raise UnsupportedOperationError("Radii undefined for an unbounded body")
        if self.half_widths is not None:
            return float(self.half_widths.min()), float(np.linalg.norm(self.half_widths))
        r = float(np.min(self.offsets / np.linalg.norm(self.normals, axis=1)))
        if self.dimension == 1:
            return r, r
        return r, float(np.max(np.linalg.norm(self.vertices(), axis=1)))

    def break_angles(self):
        if self.dimension != 2:
            return AXIS_ANGLES.copy()
        v = self.vertices()
        return np.sort(np.mod(np.arctan2(v[:, 1], v[:, 0]), 2 * np.pi))

    def boundary_rule(self, resolution):
        if self.dimension == 1:
            return _interval_rule(self)
        hull = self.hull()
        order = max(int(resolution), 2)
        if self.dimension == 2:
            v = hull.points[hull.vertices]
            nxt = np.roll(v, -1, axis=0)
            nodes, weights = fixed_nodes(np.zeros(len(v)), np.ones(len(v)), order)
            points = v[:, None, :] + nodes[..., None] * (nxt - v)[:, None, :]
            length = np.linalg.norm(nxt - v, axis=1)
            edge = (nxt - v) / length[:, None]
            normal = np.stack([edge[:, 1], -edge[:, 0]], axis=1)
            outward = np.sign(np.sum(normal * (v + nxt), axis=1))[:, None]
            normal = normal * outward
            return BoundaryRule(
                points.reshape(-1, 2),
                np.repeat(normal, order, axis=0),
                (weights * length[:, None]).ravel(),
            )
        if self.dimension == 3:
            return _triangulated_rule(hull, order)
        raise UnsupportedOperationError("Boundary quadrature supports dimensions 1 to 3")

    def distance(self, X):
        if self.half_widths is None:
            return super().distance(X)
        excess = np.maximum(np.abs(X) - self.half_widths, 0.0)
        return np.linalg.norm(excess, axis=1)

    def volume(self):
        if self.half_widths is not None:
            return float(np.prod(2.0 * self.half_widths))
        if self.dimension == 1:
            return 2.0 * float(np.min(self.offsets / np.abs(self.normals[:, 0])))
        return float(self.hull().volume)

    def describe(self):
        if self.half_widths is not None:
            return {"kind": "box", "dimension": self.dimension, "half_widths": self.half_widths.tolist()}
        half = self.normals.shape[0] // 2
        return {
            "kind": self.kind,
            "dimension": self.dimension,
            "normals": self.normals[:half].tolist(),
            "offsets": self.offsets[:half].tolist(),
        }


class ScaledBody(SymmetricConvexBody):
    """factor * K, with gauge ||x||_K / factor."""

    kind = "scaled"

    def __init__(self, body: SymmetricConvexBody, factor: float):
        if not factor > 0 or not math.isfinite(factor):
            raise ConstructionError("Scaling factor must be positive and finite", {"factor": factor})
        if isinstance(body, ScaledBody):
            factor = factor * body.factor
            body = body.body
        super().__init__(body.dimension)
        self.body = body
        self.factor = float(factor)

    def _gauge(self, X):
        return self.body._gauge(X) / self.factor

    def gauge_gradient(self, X):
        return self.body.gauge_gradient(X) / self.factor

    @property
    def is_unconditional(self):
        return self.body.is_unconditional

    @property
    def is_convex(self):
        return self.body.is_convex

    @property
    def is_smooth(self):
        return self.body.is_smooth

    def break_angles(self):
        return self.body.break_angles()

    def radii(self):
        r, R = self.body.radii()
        return r * self.factor, R * self.factor

    def boundary_rule(self, resolution):
        return self.body.boundary_rule(resolution).scaled(self.factor)

    def distance(self, X):
        return self.body.distance(X / self.factor) * self.factor

    def volume(self):
        return self.body.volume() * self.factor ** self.dimension

    def describe(self):
        return {"kind": self.kind, "dimension": self.dimension, "factor": self.factor, "body": self.body.describe()}


class IntersectionBody(SymmetricConvexBody):
    """Intersection of bodies; gauge is the maximum of member gauges."""

    kind = "intersection"

    def __init__(self, bodies: Sequence[SymmetricConvexBody]):
        bodies = list(bodies)
        if not bodies:
            raise ConstructionError("Intersection needs at least one body")
        dims = {b.dimension for b in bodies}
        if len(dims) != 1:
            raise ConstructionError("Intersection members must share a dimension", {"dimensions": sorted(dims)})
        super().__init__(bodies[0].dimension)
        self.bodies = bodies

    def _gauge(self, X):
        return np.max(np.stack([b._gauge(X) for b in self.bodies]), axis=0)

    def gauge_gradient(self, X):
        gauges = np.stack([b._gauge(X) for b in self.bodies])
        active = np.argmax(gauges, axis=0)
        grads = np.stack([b.gauge_gradient(X) for b in self.bodies])
        return grads[active, np.arange(X.shape[0])]

    @property
    def is_unconditional(self):
        return all(b.is_unconditional for b in self.bodies)

    @property
    def is_convex(self):
        return all(b.is_convex for b in self.bodies)

    def break_angles(self):
        angles = [b.break_angles() for b in self.bodies]
        if self.dimension == 2 and len(self.bodies) > 1:
            theta = np.linspace(0.0, 2 * np.pi, 4097)
            U = unit_directions_2d(theta)
            active = np.argmax(np.stack([b._gauge(U) for b in self.bodies]), axis=0)
            switches = np.nonzero(np.diff(active))[0]
            angles.append(0.5 * (theta[switches] + theta[switches + 1]))
        return np.unique(np.concatenate(angles))

    def boundary_rule(self, resolution):
        if self.dimension == 1:
            return _interval_rule(self)
        raise UnsupportedOperationError("Boundary quadrature is not supported for intersections")

    def describe(self):
        return {"kind": self.kind, "dimension": self.dimension, "members": [b.describe() for b in self.bodies]}


def interval(half_width: float) -> EuclideanBall:
    """Symmetric open interval (-t, t)."""
    return EuclideanBall(1, half_width)


def _interval_rule(body: SymmetricConvexBody) -> BoundaryRule:
    t = 1.0 / body._gauge(np.ones((1, 1)))[0]
    return BoundaryRule(np.array([[t], [-t]]), np.array([[1.0], [-1.0]]), np.ones(2))


def _ellipsoid_rule_3d(a: np.ndarray, resolution: int) -> BoundaryRule:
    nz = max(int(resolution), 4)
    z, wz = gauss_legendre(nz)
    phi, wphi = periodic_trapezoid(2 * nz)
    Z, P = np.meshgrid(z, phi, indexing="ij")
    S = np.sqrt(1.0 - Z ** 2)
    points = np.stack([a[0] * S * np.cos(P), a[1] * S * np.sin(P), a[2] * Z], axis=-1)
    d_phi = np.stack([-a[0] * S * np.sin(P), a[1] * S * np.cos(P), np.zeros_like(P)], axis=-1)
    d_z = np.stack([-a[0] * Z / S * np.cos(P), -a[1] * Z / S * np.sin(P), np.full_like(P, a[2])], axis=-1)
    area = np.linalg.norm(np.cross(d_z, d_phi), axis=-1)
    normals = points / a ** 2
    normals /= np.linalg.norm(normals, axis=-1, keepdims=True)
    weights = area * wz[:, None] * wphi[None, :]
    return BoundaryRule(points.reshape(-1, 3), normals.reshape(-1, 3), weights.ravel())


def _triangulated_rule(hull: ConvexHull, order: int) -> BoundaryRule:
    x, w = gauss_legendre(order)
    s = 0.5 * (x + 1.0)
    ws = 0.5 * w
    S, T = np.meshgrid(s, s, indexing="ij")
    W = np.outer(ws, ws) * S
    pts, nrm, wts = [], [], []
    for simplex, equation in zip(hull.simplices, hull.equations):
        v0, v1, v2 = hull.points[simplex]
        area2 = np.linalg.norm(np.cross(v1 - v0, v2 - v0))
        P = v0 + S[..., None] * (v1 - v0) + (S * T)[..., None] * (v2 - v1)
        pts.append(P.reshape(-1, 3))
        nrm.append(np.repeat(equation[None, :3], P.shape[0] * P.shape[1], axis=0))
        wts.append((W * area2).ravel())
    return BoundaryRule(np.vstack(pts), np.vstack(nrm), np.concatenate(wts))


def _angular_rule(breaks: np.ndarray, panels: int, order: int) -> Tuple[np.ndarray, np.ndarray]:
    edges = np.unique(np.concatenate([np.mod(breaks, 2 * np.pi), np.linspace(0.0, 2 * np.pi, panels + 1)]))
    nodes, weights = fixed_nodes(edges[:-1], edges[1:], order)
    return nodes.ravel(), weights.ravel()


def sampled_radii(body: SymmetricConvexBody, directions: int = RADII_DIRECTIONS, seed: int = 0) -> Tuple[float, float]:
    """Inradius/circumradius by sampling directions and refining the extremes.

    Along a unit direction u the boundary sits at 1/gauge(u) by homogeneity.
    """
    n = body.dimension
    if n == 1:
        t = float(body.radial_function(np.ones((1, 1)))[0])
        return t, t
    if n == 2:
        theta = np.linspace(0.0, 2 * np.pi, directions, endpoint=False)
        theta = np.unique(np.concatenate([theta, body.break_angles()]))
        rho = body.radial_function(unit_directions_2d(theta))
        if not np.all(np.isfinite(rho)):
            raise UnsupportedOperationError("Radii undefined for an unbounded body")

        def refine(index: int, sign: float) -> float:
            step = 2 * np.pi / directions
            res = optimize.minimize_scalar(
                lambda t: sign * body.radial_function(unit_directions_2d(np.array([t])))[0],
                bounds=(theta[index] - step, theta[index] + step),
                method="bounded",
                options={"xatol": 1e-12},
            )
            return float(sign * res.fun)

        r = min(float(rho.min()), refine(int(np.argmin(rho)), 1.0))
        R = max(float(rho.max()), refine(int(np.argmax(rho)), -1.0))
        return r, R
    rng = np.random.default_rng(seed)
    U = rng.standard_normal((directions, n))
    U /= np.linalg.norm(U, axis=1, keepdims=True)
    rho = body.radial_function(U)
    if not np.all(np.isfinite(rho)):
        raise UnsupportedOperationError("Radii undefined for an unbounded body")

    def radial(v, sign):
        v = np.asarray(v) / np.linalg.norm(v)
        return sign * body.radial_function(v[None, :])[0]

    r = optimize.minimize(radial, U[np.argmin(rho)], args=(1.0,), method="Nelder-Mead", options={"xatol": 1e-10, "fatol": 1e-12})
    R = optimize.minimize(radial, U[np.argmax(rho)], args=(-1.0,), method="Nelder-Mead", options={"xatol": 1e-10, "fatol": 1e-12})
    return min(float(rho.min()), float(r.fun)), max(float(rho.max()), float(-R.fun))


# --- module-level operations -------------------------------------------------

def gauge(body: SymmetricConvexBody, x):
    """inf{lambda > 0 : x in lambda K}."""
    return body.gauge(x)


def dilate(body: SymmetricConvexBody, eps: float) -> ScaledBody:
    """K_eps = (1 + eps)/(1 - eps) * K."""
    if not 0.0 < eps < 1.0:
        raise DomainError("Dilation parameter must lie in (0, 1)", {"eps": eps})
    return ScaledBody(body, (1.0 + eps) / (1.0 - eps))


def radii(body: SymmetricConvexBody) -> Tuple[float, float]:
    return body.radii()


def boundary_quadrature(body: SymmetricConvexBody, resolution: int) -> List[BoundaryElement]:
    if int(resolution) < 1:
        raise DomainError("Resolution must be positive", {"resolution": resolution})
    return body.boundary_rule(int(resolution)).elements()
