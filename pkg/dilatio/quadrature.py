"""
Gauss-Legendre quadrature rules.

Fixed rules on (batches of) intervals, composite panel rules for the polar
integrals used in two dimensions, and an adaptive bisecting integrator with
tangent mapping for unbounded intervals.
"""

from functools import lru_cache
from typing import Callable, NamedTuple, Sequence, Tuple
import logging
import math

import numpy as np

logger = logging.getLogger(__name__)


class QuadratureResult(NamedTuple):
    value: np.ndarray
    error: np.ndarray
    converged: bool
    finite: bool = True


@lru_cache(maxsize=64)
def gauss_legendre(order: int) -> Tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of the order-point rule on [-1, 1] (read-only)."""
    nodes, weights = np.polynomial.legendre.leggauss(order)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def fixed_nodes(lo, hi, order: int) -> Tuple[np.ndarray, np.ndarray]:
    """Map the order-point rule onto [lo, hi]; lo and hi broadcast.

    Returns nodes and weights with a trailing axis of length `order`.
    """
    x, w = gauss_legendre(order)
    lo = np.asarray(lo, dtype=float)[..., None]
    hi = np.asarray(hi, dtype=float)[..., None]
    mid = 0.5 * (hi + lo)
    half = 0.5 * (hi - lo)
    return mid + half * x, half * w


def composite_nodes(edges: np.ndarray, panels: int, order: int) -> Tuple[np.ndarray, np.ndarray]:
    """Composite rule over consecutive edges (last axis), each gap split into `panels`.

    Zero-length gaps contribute zero-weight nodes, so ragged break lists can
    be padded by repeating an edge.
    """
    edges = np.asarray(edges, dtype=float)
    lo = edges[..., :-1]
    hi = edges[..., 1:]
    frac = np.linspace(0.0, 1.0, panels + 1)
    sub = lo[..., None] + (hi - lo)[..., None] * frac
    nodes, weights = fixed_nodes(sub[..., :-1], sub[..., 1:], order)
    shape = nodes.shape[:-3] + (-1,)
    return nodes.reshape(shape), weights.reshape(shape)


def gauss_legendre_grid(lo: float, hi: float, n: int) -> Tuple[np.ndarray, np.ndarray]:
    """Single n-point rule on [lo, hi] (e.g. the level grid of co-area integrals)."""
    return fixed_nodes(lo, hi, n)


class GaussLegendre:
    """Adaptive Gauss-Legendre integrator.

    Each interval is accepted when the order-n rule on the whole interval and
    on its two halves agree to the local share of the absolute tolerance (or
    to `rel_tol` relative). Infinite ends are handled by x = tan(u).
    """

    def __init__(
        self,
        order: int = 20,
        tol: float = 1e-10,
        max_depth: int = 48,
        max_intervals: int = 20_000,
        rel_tol: float = 1e-13,
    ):
        self.order = order
        self.tol = tol
        self.max_depth = max_depth
        self.max_intervals = max_intervals
        self.rel_tol = rel_tol

    def _panel(self, fun: Callable, a: float, b: float) -> np.ndarray:
        nodes, weights = fixed_nodes(a, b, self.order)
        values = np.asarray(fun(nodes), dtype=float)
        if values.ndim == 1:
            return np.dot(weights, values)
        return weights @ values

    def integrate(
        self,
        fun: Callable[[np.ndarray], np.ndarray],
        lo: float,
        hi: float,
        points: Sequence[float] = (),
    ) -> QuadratureResult:
        """Integrate a vectorised fun over [lo, hi].

        Args:
            fun: maps x of shape (N,) to (N,) or (N, k)
            lo: lower limit, may be -inf
            hi: upper limit, may be +inf
            points: interior breakpoints (kinks, jumps)

        Returns:
            QuadratureResult with value/error of shape () or (k,)
        """
        if hi < lo:
            res = self.integrate(fun, hi, lo, points)
            return QuadratureResult(-res.value, res.error, res.converged, res.finite)
        if hi == lo:
            first = np.asarray(fun(np.array([lo], dtype=float)), dtype=float)
            zero = np.zeros(first.shape[1:]) if first.ndim > 1 else np.float64(0.0)
            return QuadratureResult(zero, np.zeros_like(zero), True)

        mapped = not (math.isfinite(lo) and math.isfinite(hi))
        if mapped:
            def g(u):
                x = np.tan(u)
                values = np.asarray(fun(x), dtype=float)
                jac = 1.0 + x * x
                return values * (jac if values.ndim == 1 else jac[:, None])
            a0, b0 = math.atan(lo), math.atan(hi)
            breaks = [math.atan(p) for p in points if lo < p < hi]
        else:
            g = fun
            a0, b0 = lo, hi
            breaks = [p for p in points if lo < p < hi]

        edges = sorted(set([a0, b0] + breaks))
        total = b0 - a0
        stack = []
        for a, b in zip(edges[:-1], edges[1:]):
            if b > a:
                stack.append((a, b, 0, self._panel(g, a, b)))
        stack.reverse()

        value = None
        error = None
        converged = True
        finite = True
        intervals = 0
        while stack:
            a, b, depth, whole = stack.pop()
            m = 0.5 * (a + b)
            left = self._panel(g, a, m)
            right = self._panel(g, m, b)
            halves = left + right
            if not (np.all(np.isfinite(halves)) and np.all(np.isfinite(whole))):
                # refining cannot remove a blow-up; keep it in the value
                finite = converged = False
                value = halves if value is None else value + halves
                error = np.full_like(np.asarray(halves, dtype=float), np.inf) if error is None else error + np.inf
                continue
            err = np.abs(whole - halves)
            local_tol = np.maximum(self.tol * (b - a) / total, self.rel_tol * np.abs(halves))
            intervals += 1
            exhausted = depth >= self.max_depth or intervals >= self.max_intervals
            if np.all(err <= local_tol) or exhausted:
                if exhausted and not np.all(err <= local_tol):
                    converged = False
                value = halves if value is None else value + halves
                error = err if error is None else error + err
            else:
                stack.append((m, b, depth + 1, right))
                stack.append((a, m, depth + 1, left))

        if not finite:
            logger.warning(f"Integrand is not finite inside [{lo}, {hi}]")
        elif not converged:
            logger.debug(f"Adaptive quadrature on [{lo}, {hi}] hit its refinement limit; error {np.max(error):.3e}")
        return QuadratureResult(np.asarray(value), np.asarray(error), converged, finite)


def periodic_trapezoid(count: int) -> Tuple[np.ndarray, np.ndarray]:
    """Equispaced angles and weights on [0, 2*pi); spectrally accurate for smooth periodic integrands."""
    theta = 2.0 * np.pi * np.arange(count) / count
    return theta, np.full(count, 2.0 * np.pi / count)
