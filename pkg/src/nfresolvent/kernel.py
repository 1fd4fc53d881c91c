"""Kernels, grid functions, iterated kernels and their discrete integral operators.

Two discretizations of ``g ↦ ∫ K(x, t) g(t) dt`` are offered:

``"plain"``
    classic Nyström sampling, ``Σ_j w_j K(x, t_j) g_j``.

``"product"`` (default)
    product integration: ``g`` is replaced by its Legendre interpolant on the
    grid and the integral is taken with Gauss rules split at ``t = x``. It
    costs more to assemble but stays spectrally accurate for kernels such as
    ``min(x, t)`` or ``abs(x - t)`` whose derivative jumps on the diagonal,
    where plain sampling drops to second order.

Both produce a node matrix ``[K1]`` with ``Σ_j w_j [K1]_ij g_j`` as the
operator action, so iterated kernels compose as ``[K_{n+1}] = [K_n] W [K1]``.
Under ``"product"`` these matrices hold operator data, not the pointwise
values ``K_n(x_i, x_j)``; pointwise values come from :func:`iterated_values`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import AsymmetricKernelError, DomainError, KernelEvaluationError, TruncationError
from .expr import Expression
from .quadrature import QuadRule, gauss_legendre, interpolate, lagrange_basis

__all__ = [
    "Kernel",
    "GridFunction",
    "IteratedKernelStack",
    "BUILTIN_KERNELS",
    "SCHEMES",
    "build_iterated",
    "apply_kernel",
    "off_grid_eval",
    "kernel_matrix",
    "quadrature_rows",
    "iterated_values",
    "split_gauss",
]

SCHEMES = ("product", "plain")
SYMMETRY_GRID = 33
SYMMETRY_RTOL = 1e-10
PIECE_ORDER = 32

BUILTIN_KERNELS: dict[str, Callable] = {
    "min": np.minimum,
}


def _check_scheme(scheme: str) -> None:
    if scheme not in SCHEMES:
        raise ValueError(f"unknown scheme {scheme!r}; expected one of {SCHEMES}")


class Kernel:
    """A real kernel ``K(x, t)`` on ``[a, b]²``.

    ``func`` must broadcast over numpy arrays. Symmetry is measured on a
    33×33 uniform grid at construction; ``symmetric`` records the outcome.
    """

    def __init__(self, func: Callable, a: float = 0.0, b: float = 1.0, name: str = "K"):
        a, b = float(a), float(b)
        if not a < b:
            raise ValueError(f"need a < b, got [{a}, {b}]")
        self.func = func
        self.a = a
        self.b = b
        self.name = name
        self.asymmetry, self.scale = symmetry_defect(func, a, b)
        self.symmetric = self.asymmetry <= SYMMETRY_RTOL * (1.0 + self.scale)

    @classmethod
    def from_expression(cls, source: str, a: float = 0.0, b: float = 1.0) -> "Kernel":
        return cls(Expression(source), a, b, name=source)

    @classmethod
    def builtin(cls, name: str, a: float = 0.0, b: float = 1.0) -> "Kernel":
        return cls(BUILTIN_KERNELS[name], a, b, name=name)

    @classmethod
    def resolve(cls, text: str, a: float = 0.0, b: float = 1.0) -> "Kernel":
        """A builtin kernel name, otherwise an expression in x and t."""
        text = text.strip()
        if text in BUILTIN_KERNELS:
            return cls.builtin(text, a, b)
        return cls.from_expression(text, a, b)

    def __call__(self, x, t) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        t = np.asarray(t, dtype=float)
        with np.errstate(all="ignore"):
            out = np.asarray(self.func(x, t), dtype=float)
        return np.broadcast_to(out, np.broadcast(x, t).shape)

    def require_symmetric(self) -> None:
        if not self.symmetric:
            raise AsymmetricKernelError(self.asymmetry, self.scale)

    def check_domain(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        bad = ~((x >= self.a) & (x <= self.b))
        if np.any(bad):
            raise DomainError(
                f"point {np.ravel(x)[np.argmax(np.ravel(bad))]!r} outside [{self.a}, {self.b}]"
            )
        return x

    def __repr__(self) -> str:
        return f"Kernel({self.name!r}, [{self.a}, {self.b}])"


def symmetry_defect(func: Callable, a: float, b: float, n: int = SYMMETRY_GRID):
    """Return (max |K(x,t) - K(t,x)|, max |K|) over a uniform n×n grid.

    Non-finite samples are skipped.
    """
    g = np.linspace(a, b, n)
    with np.errstate(all="ignore"):
        k = np.asarray(func(g[:, None], g[None, :]), dtype=float)
    k = np.broadcast_to(k, (n, n))
    finite = np.isfinite(k) & np.isfinite(k.T)
    if not finite.any():
        return float("nan"), float("nan")
    diff = np.abs(k - k.T)[finite]
    return float(diff.max()), float(np.abs(k[finite]).max())


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Node samples of a univariate function.

    ``func``, when present, gives exact values off the grid; otherwise
    :meth:`__call__` uses the barycentric Legendre interpolant.
    """

    rule: QuadRule
    values: np.ndarray
    func: Optional[Callable] = field(default=None, repr=False)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape != self.rule.nodes.shape:
            raise ValueError(
                f"grid function needs {self.rule.n} values, got shape {values.shape}"
            )
        object.__setattr__(self, "values", values)

    @classmethod
    def sample(cls, rule: QuadRule, func: Callable) -> "GridFunction":
        with np.errstate(all="ignore"):
            values = np.asarray(func(rule.nodes), dtype=float)
        values = np.broadcast_to(values, rule.nodes.shape).copy()
        return cls(rule, values, func)

    @classmethod
    def from_expression(cls, rule: QuadRule, source: str) -> "GridFunction":
        expr = Expression(source)
        return cls.sample(rule, lambda x: expr(x, 0.0))

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self.func is not None:
            with np.errstate(all="ignore"):
                out = np.broadcast_to(np.asarray(self.func(x), dtype=float), x.shape)
        else:
            out = interpolate(self.rule, self.values, x)
        return float(out) if out.ndim == 0 else np.array(out)

    def __len__(self) -> int:
        return self.values.size

    def scaled(self, factor: float) -> "GridFunction":
        func = None if self.func is None else (lambda x, f=self.func: factor * f(x))
        return GridFunction(self.rule, factor * self.values, func)


# -- split Gauss rules -------------------------------------------------------


def split_gauss(a: float, b: float, cuts: np.ndarray, order: int):
    """Gauss points/weights on [a, b] split at per-row breakpoints.

    ``cuts`` has shape (T, c). Returns points and weights of shape
    (T, (c + 1) * order); zero-length pieces get zero weight.
    """
    cuts = np.clip(np.asarray(cuts, dtype=float), a, b)
    T = cuts.shape[0]
    edges = np.concatenate([np.full((T, 1), a), np.sort(cuts, axis=1), np.full((T, 1), b)], axis=1)
    lo = edges[:, :-1, None]
    hi = edges[:, 1:, None]
    ref = gauss_legendre(order, -1.0, 1.0)
    half = 0.5 * (hi - lo)
    pts = 0.5 * (lo + hi) + half * ref.nodes
    wts = half * ref.weights
    return pts.reshape(T, -1), wts.reshape(T, -1)


# -- discrete operator -------------------------------------------------------


def quadrature_rows(kernel: Kernel, rule: QuadRule, x, scheme: str = "product") -> np.ndarray:
    """Weights ``r`` with ``r[i] @ g ≈ ∫ K(x_i, t) g(t) dt`` for node samples g.

    Returns an array of shape (len(x), rule.n).
    """
    _check_scheme(scheme)
    x = kernel.check_domain(np.atleast_1d(np.asarray(x, dtype=float)).ravel())
    if scheme == "plain":
        rows = kernel(x[:, None], rule.nodes[None, :]) * rule.weights
    else:
        pts, wts = split_gauss(rule.a, rule.b, x[:, None], rule.n)
        kv = kernel(x[:, None], pts) * wts
        rows = np.empty((x.size, rule.n))
        for i in range(x.size):
            rows[i] = kv[i] @ lagrange_basis(rule, pts[i])
    if not np.all(np.isfinite(rows)):
        raise KernelEvaluationError(f"kernel {kernel.name!r} is not finite on the grid")
    return rows


def kernel_matrix(kernel: Kernel, rule: QuadRule, scheme: str = "product") -> np.ndarray:
    """The node matrix [K1] of the discretized operator."""
    _check_scheme(scheme)
    if kernel.a != rule.a or kernel.b != rule.b:
        raise ValueError("kernel interval and quadrature interval differ")
    if scheme == "plain":
        mat = np.array(kernel(rule.nodes[:, None], rule.nodes[None, :]))
        if not np.all(np.isfinite(mat)):
            raise KernelEvaluationError(f"kernel {kernel.name!r} is not finite on the grid")
        return mat
    return quadrature_rows(kernel, rule, rule.nodes, scheme) / rule.weights


@dataclass(frozen=True, eq=False)
class IteratedKernelStack:
    """Node matrices of K_1 .. K_m on a shared quadrature grid."""

    kernel: Kernel
    rule: QuadRule
    mats: tuple
    scheme: str = "product"

    @property
    def depth(self) -> int:
        return len(self.mats)

    def matrix(self, n: int) -> np.ndarray:
        if not 1 <= n <= self.depth:
            raise TruncationError(f"iterated kernel K_{n} not available (depth {self.depth})")
        return self.mats[n - 1]

    def rows(self, x) -> np.ndarray:
        return quadrature_rows(self.kernel, self.rule, x, self.scheme)

    def apply(self, n: int, f: GridFunction) -> GridFunction:
        return apply_kernel(self, n, f)

    def value(self, n: int, x, t: float):
        """Pointwise K_n(x, t); ``x`` may be an array."""
        if not 1 <= n:
            raise TruncationError(f"iterated kernel index must be >= 1, got {n}")
        out = iterated_values(self.kernel, n, x, t)[n - 1]
        return float(out[0]) if np.ndim(x) == 0 else out


def build_iterated(kernel: Kernel, rule: QuadRule, m: int, scheme: str = "product",
                   base: Optional[np.ndarray] = None) -> IteratedKernelStack:
    """Build [K1] .. [Km] by repeated composition with quadrature weights.

    ``base`` may supply a precomputed [K1] (it must match ``scheme``).
    """
    if int(m) != m or m < 1:
        raise ValueError(f"depth m must be a positive integer, got {m!r}")
    k1 = kernel_matrix(kernel, rule, scheme) if base is None else np.asarray(base, dtype=float)
    wk1 = rule.weights[:, None] * k1
    mats = [k1]
    for _ in range(1, int(m)):
        mats.append(mats[-1] @ wk1)
    for mat in mats:
        mat.setflags(write=False)
    return IteratedKernelStack(kernel, rule, tuple(mats), scheme)


def apply_kernel(stack: IteratedKernelStack, n: int, f: GridFunction) -> GridFunction:
    """J_n = ∫ K_n(x, t) f(t) dt sampled at the nodes."""
    mat = stack.matrix(n)
    return GridFunction(stack.rule, mat @ (stack.rule.weights * f.values))


def off_grid_eval(kernel: Kernel, rule: QuadRule, g: GridFunction, x, scheme: str = "product"):
    """∫ K(x, t) g(t) dt at arbitrary x in [a, b] (Nyström extension)."""
    vals = quadrature_rows(kernel, rule, x, scheme) @ g.values
    return float(vals[0]) if np.ndim(x) == 0 else vals.reshape(np.shape(x))


# -- pointwise iterated kernels ---------------------------------------------


def _piecewise_basis(rules: Sequence[QuadRule], split: float, points: np.ndarray) -> np.ndarray:
    """Interpolation matrix from the concatenated piece nodes to ``points``."""
    sizes = [r.n for r in rules]
    out = np.zeros((points.size, sum(sizes)))
    if len(rules) == 1:
        out[:] = lagrange_basis(rules[0], points)
        return out
    left = points <= split
    out[left, : sizes[0]] = lagrange_basis(rules[0], points[left])
    out[~left, sizes[0]:] = lagrange_basis(rules[1], points[~left])
    return out


def iterated_values(kernel: Kernel, n_max: int, x, t: float, order: int = PIECE_ORDER) -> np.ndarray:
    """Pointwise K_1(x, t) .. K_{n_max}(x, t) for fixed t, returned as rows.

    ξ ↦ K_n(ξ, t) is smooth on [a, t] and on [t, b] when the kernel's only
    irregularity is on the diagonal, so each level is kept as two Legendre
    interpolants and the next level is integrated with Gauss rules split at
    both the target point and t.
    """
    x = kernel.check_domain(np.atleast_1d(np.asarray(x, dtype=float)).ravel())
    t = float(kernel.check_domain(t))
    out = np.empty((n_max, x.size))
    out[0] = kernel(x, t)
    if n_max == 1:
        return out

    a, b = kernel.a, kernel.b
    pieces = [(lo, hi) for lo, hi in ((a, t), (t, b)) if hi > lo]
    rules = [gauss_legendre(order, lo, hi) for lo, hi in pieces]
    piece_nodes = np.concatenate([r.nodes for r in rules])
    n_piece = piece_nodes.size

    targets = np.concatenate([piece_nodes, x])
    cuts = np.stack([targets, np.full_like(targets, t)], axis=1)
    pts, wts = split_gauss(a, b, cuts, order)
    weighted = kernel(targets[:, None], pts) * wts
    basis = _piecewise_basis(rules, t, pts.ravel()).reshape(pts.shape + (n_piece,))
    op = np.einsum("ts,tsn->tn", weighted, basis)
    if not np.all(np.isfinite(op)):
        raise KernelEvaluationError(f"kernel {kernel.name!r} is not finite")

    h = np.asarray(kernel(piece_nodes, t), dtype=float)
    for level in range(1, n_max):
        vals = op @ h
        out[level] = vals[n_piece:]
        h = vals[:n_piece]
    return out
