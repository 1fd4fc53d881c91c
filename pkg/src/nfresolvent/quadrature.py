"""Gauss-Legendre rules and the integration/interpolation helpers built on them."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

__all__ = [
    "QuadRule",
    "gauss_legendre",
    "integrate",
    "inner",
    "lagrange_basis",
    "interpolate",
    "DEFAULT_NODES",
]

DEFAULT_NODES = 200


@dataclass(frozen=True, eq=False)
class QuadRule:
    """An n-point Gauss-Legendre rule on [a, b].

    ``nodes`` ascend strictly inside (a, b); ``weights`` are positive and sum
    to b - a.
    """

    a: float
    b: float
    nodes: np.ndarray
    weights: np.ndarray

    def __len__(self) -> int:
        return self.nodes.size

    @property
    def n(self) -> int:
        return self.nodes.size

    @property
    def sqrt_weights(self) -> np.ndarray:
        return np.sqrt(self.weights)

    @property
    def barycentric_weights(self) -> np.ndarray:
        # v_j ∝ (-1)^j sqrt((x_j - a)(b - x_j) w_j) for Gauss-Legendre points
        v = np.sqrt((self.nodes - self.a) * (self.b - self.nodes) * self.weights)
        v[1::2] *= -1.0
        return v / np.abs(v).max()

    def contains(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return (x >= self.a) & (x <= self.b)


def _legendre(n: int, z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """P_n(z) and P_n'(z) by the three-term recurrence."""
    p0 = np.ones_like(z)
    p1 = z.copy()
    for k in range(2, n + 1):
        p0, p1 = p1, ((2 * k - 1) * z * p1 - (k - 1) * p0) / k
    dp = n * (z * p1 - p0) / (z * z - 1.0)
    return p1, dp


@lru_cache(maxsize=64)
def _reference_rule(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes/weights on [-1, 1] by Newton iteration on P_n."""
    m = (n + 1) // 2
    i = np.arange(1, m + 1)
    # initial guesses for the m non-negative roots, descending
    z = np.cos(np.pi * (i - 0.25) / (n + 0.5))
    for _ in range(100):
        p, dp = _legendre(n, z)
        dz = p / dp
        z = z - dz
        if np.max(np.abs(dz)) <= 1e-16:
            break
    _, dp = _legendre(n, z)
    w = 2.0 / ((1.0 - z * z) * dp * dp)

    # mirror so nodes are exactly symmetric and weights pair up
    nodes = np.empty(n)
    weights = np.empty(n)
    nodes[:m] = -z
    weights[:m] = w
    nodes[n - m:] = z[::-1]
    weights[n - m:] = w[::-1]
    if n % 2 == 1:
        nodes[m - 1] = 0.0
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def gauss_legendre(n: int, a: float = 0.0, b: float = 1.0) -> QuadRule:
    """Return the n-point Gauss-Legendre rule mapped affinely to [a, b]."""
    if int(n) != n or n < 1:
        raise ValueError(f"node count must be a positive integer, got {n!r}")
    a = float(a)
    b = float(b)
    if not (np.isfinite(a) and np.isfinite(b)) or a >= b:
        raise ValueError(f"need a < b, got [{a}, {b}]")
    y, w = _reference_rule(int(n))
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    nodes = mid + half * y
    weights = half * w
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return QuadRule(a, b, nodes, weights)


def integrate(rule: QuadRule, samples) -> float:
    """Σ w_j samples_j."""
    samples = np.asarray(samples, dtype=float)
    if samples.shape != rule.nodes.shape:
        raise ValueError(
            f"expected {rule.n} samples, got array of shape {samples.shape}"
        )
    return float(rule.weights @ samples)


def inner(rule: QuadRule, f, g) -> float:
    """Quadrature L2 inner product of two node-sampled functions."""
    return integrate(rule, np.asarray(f, dtype=float) * np.asarray(g, dtype=float))


def lagrange_basis(rule: QuadRule, points) -> np.ndarray:
    """Matrix ``L`` with ``L[i, j] = ℓ_j(points[i])`` for the rule's nodes.

    Uses the second barycentric formula, so ``L @ values`` is the degree n-1
    interpolant evaluated at ``points``. Rows for points that coincide with a
    node are exact unit vectors.
    """
    s = np.asarray(points, dtype=float).reshape(-1)
    x = rule.nodes
    v = rule.barycentric_weights
    diff = s[:, None] - x[None, :]
    hit = diff == 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = v / diff
        L = terms / terms.sum(axis=1, keepdims=True)
    rows = hit.any(axis=1)
    if rows.any():
        L[rows] = hit[rows].astype(float)
    return L


def interpolate(rule: QuadRule, values, points) -> np.ndarray:
    """Evaluate the node interpolant of ``values`` at ``points``."""
    points = np.asarray(points, dtype=float)
    return (lagrange_basis(rule, points) @ np.asarray(values, dtype=float)).reshape(points.shape)
