"""The min(x, t) worked example: closed forms, error table and figure data.

For y(x) = x + λ ∫₀¹ min(x, t) y(t) dt everything is known in closed form:
λ_n = (n - ½)²π², ψ_n = √2 sin((n - ½)πx), f̂_n = √2 (-1)^{n+1} / λ_n and
y = sin(√λ x) / (√λ cos √λ). The J_n polynomials are stored as exact
rationals so that table entries measure truncation error only.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .kernel import GridFunction, Kernel, build_iterated
from .quadrature import DEFAULT_NODES, gauss_legendre
from .resolvent import MixedSeriesParams, MixedSolver, check_eigen_guard, exact_reference
from .spectral import eigendecompose

__all__ = [
    "AnalyticExample",
    "EXAMPLE",
    "FORMULAS",
    "TABLE_M",
    "TABLE_N",
    "TABLE_LAMBDAS",
    "FIGURE_COLUMNS",
    "poly_eval",
    "triangular_kernels",
    "exact_resolvent",
    "triangular_J",
    "table1",
    "table1_rows",
    "figure1",
    "NumericExample",
    "numeric_table1",
    "analytic_vs_numeric",
    "worker_count",
]

FORMULAS = ("approx1", "approx2", "approx3", "approx4")
TABLE_M = (0, 1, 2, 3)
TABLE_N = (3, 4, 5, 6)
TABLE_LAMBDAS = (2.0, 5.0, 10.0, 20.0, 50.0, 100.0)
FIGURE_COLUMNS = ("x",) + tuple(f"err_m{m}_n{n}" for m in (0, 1) for n in (4, 5, 6))

F = Fraction
# coefficient lists, index = power of x
J_POLYS = (
    (F(0), F(1, 2), F(0), F(-1, 6)),
    (F(0), F(5, 24), F(0), F(-1, 12), F(0), F(1, 120)),
    (F(0), F(61, 720), F(0), F(-5, 144), F(0), F(1, 240), F(0), F(-1, 5040)),
)
# K̃_n(x, t) for t <= x as {(power of x, power of t): coefficient}
KTILDE_POLYS = (
    {(0, 1): F(1)},
    {(1, 1): F(1), (2, 1): F(-1, 2), (0, 3): F(-1, 6)},
    {
        (1, 1): F(1, 3),
        (3, 1): F(-1, 6),
        (1, 3): F(-1, 6),
        (4, 1): F(1, 24),
        (2, 3): F(1, 12),
        (0, 5): F(1, 120),
    },
)


def worker_count() -> int:
    """Thread budget from RESOLVENT_THREADS (0 or unset means automatic)."""
    raw = os.environ.get("RESOLVENT_THREADS", "0").strip() or "0"
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"RESOLVENT_THREADS must be an integer, got {raw!r}") from None
    if n < 0:
        raise ValueError(f"RESOLVENT_THREADS must be >= 0, got {n}")
    return n if n > 0 else min(8, os.cpu_count() or 1)


def _map(fn, items: Sequence):
    workers = min(worker_count(), len(items)) or 1
    if workers == 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def poly_eval(coeffs: Sequence, x):
    """Horner evaluation of Σ coeffs[i] x^i in floating point."""
    x = np.asarray(x, dtype=float)
    acc = np.zeros_like(x)
    for c in reversed(coeffs):
        acc = acc * x + float(c)
    return float(acc) if acc.ndim == 0 else acc


def _bivariate_eval(poly: dict, x, t):
    x = np.asarray(x, dtype=float)
    t = np.asarray(t, dtype=float)
    return sum(float(c) * x**i * t**j for (i, j), c in poly.items())


@dataclass(frozen=True)
class AnalyticExample:
    """Closed forms for the kernel min(x, t) on [0, 1] with f(x) = x."""

    J_polys: tuple = J_POLYS
    Ktilde_polys: tuple = KTILDE_POLYS

    @staticmethod
    def lambdas(N: int) -> np.ndarray:
        n = np.arange(1, N + 1)
        return ((n - 0.5) * np.pi) ** 2

    @staticmethod
    def psis(N: int, x) -> np.ndarray:
        """ψ_1..ψ_N at x, shape (N, len(x))."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        n = np.arange(1, N + 1)[:, None]
        return np.sqrt(2.0) * np.sin((n - 0.5) * np.pi * x[None, :])

    @classmethod
    def fhat(cls, N: int) -> np.ndarray:
        sign = np.where(np.arange(N) % 2 == 0, 1.0, -1.0)
        return np.sqrt(2.0) * sign / cls.lambdas(N)

    def J(self, n: int, x):
        return poly_eval(self.J_polys[n - 1], x)

    def J_derivative(self, n: int, x):
        c = self.J_polys[n - 1]
        return poly_eval([i * c[i] for i in range(1, len(c))], x)

    def kernel(self, n: int, x, t):
        """Pointwise K_n(x, t) for n <= 3 from the triangular polynomials."""
        x = np.asarray(x, dtype=float)
        t = np.asarray(t, dtype=float)
        hi, lo = np.maximum(x, t), np.minimum(x, t)
        return _bivariate_eval(self.Ktilde_polys[n - 1], hi, lo)

    def solve(self, lam: float, m: int, N: int, x):
        """y = x + Σ_{n<=m} λ^n J_n + λ^{m+1} Σ_{k<=N} f̂_k ψ_k / (λ_k^m (λ_k - λ))."""
        if m > len(self.J_polys):
            raise ValueError(f"closed-form J_n available for n <= {len(self.J_polys)}")
        lk = self.lambdas(N)
        check_eigen_guard(lk, lam)
        x = np.atleast_1d(np.asarray(x, dtype=float))
        coef = self.fhat(N) / (lk**m * (lk - lam))
        terms = coef[:, None] * self.psis(N, x)
        tail = np.array([math.fsum(col) for col in terms.T])
        out = lam ** (m + 1) * tail
        for n in range(m, 0, -1):
            out = out + lam**n * self.J(n, x)
        return x + out

    def resolvent(self, lam: float, m: int, N: int, x: float, t: float, alpha=None) -> float:
        """Truncated mixed resolvent with exact eigenpairs; optional annihilation α."""
        if m > len(self.Ktilde_polys):
            raise ValueError(f"closed-form K_n available for n <= {len(self.Ktilde_polys)}")
        lk = self.lambdas(N)
        check_eigen_guard(lk, lam)
        psi = self.psis(N, np.array([x, t]))
        terms = psi[:, 0] * psi[:, 1] / (lk**m * (lk - lam))
        heads = [float(self.kernel(n, x, t)) for n in range(1, max(m, 1) + 1)]
        if alpha is None:
            return math.fsum([lam**m * math.fsum(terms)] + [lam ** (n - 1) * heads[n - 1] for n in range(1, m + 1)])
        weights = 1.0 - alpha * lk
        weights[np.abs(weights) <= 4.0 * np.finfo(float).eps] = 0.0
        head = [heads[0]] + [lam**n * (heads[n] - alpha * heads[n - 1]) for n in range(1, m)]
        return math.fsum(head + [lam**m * math.fsum(terms * weights)]) / (1.0 - alpha * lam)


EXAMPLE = AnalyticExample()


def exact_resolvent(lam: float, x: float, t: float) -> float:
    """Closed-form resolvent of min(x, t) on [0, 1] (λ > 0, not an eigenvalue)."""
    s = math.sqrt(lam)
    lo, hi = min(x, t), max(x, t)
    return math.sin(s * lo) * math.cos(s * (1.0 - hi)) / (s * math.cos(s))


@lru_cache(maxsize=4)
def triangular_kernels(n_max: int):
    """K̃_1..K̃_{n_max} (t <= x) by the triangular recursion, as sympy expressions.

    K̃_{n+1}(x,t) = ∫_0^t ξ K̃_n(t,ξ) dξ + ∫_t^x ξ K̃_n(ξ,t) dξ + x ∫_x^1 K̃_n(ξ,t) dξ
    """
    import sympy as sp

    x, t, xi = sp.symbols("x t xi")
    out = [t]
    for _ in range(1, n_max):
        kn = out[-1]
        nxt = (
            sp.integrate(xi * kn.subs({x: t, t: xi}, simultaneous=True), (xi, 0, t))
            + sp.integrate(xi * kn.subs(x, xi), (xi, t, x))
            + x * sp.integrate(kn.subs(x, xi), (xi, x, 1))
        )
        out.append(sp.expand(nxt))
    return tuple(out), (x, t)


def triangular_J(n: int):
    """J_n(x) = ∫₀¹ K_n(x, t) t dt from the triangular recursion (sympy)."""
    import sympy as sp

    kernels, (x, t) = triangular_kernels(n)
    kn = kernels[n - 1]
    below = sp.integrate(kn * t, (t, 0, x))
    above = sp.integrate(kn.subs({x: t, t: x}, simultaneous=True) * t, (t, x, 1))
    return sp.Poly(sp.expand(below + above), x)


def _cell(args):
    m, n, lam = args
    approx = EXAMPLE.solve(lam, m, n, 1.0)[0]
    return abs(approx - exact_reference(lam, 1.0))


def table1(m_list: Iterable[int] = TABLE_M, n_list: Iterable[int] = TABLE_N,
           lambda_list: Iterable[float] = TABLE_LAMBDAS) -> np.ndarray:
    """|y_approx(1) - y_exact(1)| on the analytic path, shape (m, n, λ)."""
    m_list, n_list, lambda_list = list(m_list), list(n_list), list(lambda_list)
    cells = [(m, n, lam) for m in m_list for n in n_list for lam in lambda_list]
    values = _map(_cell, cells)
    return np.array(values).reshape(len(m_list), len(n_list), len(lambda_list))


def table1_rows(errors: np.ndarray, m_list=TABLE_M, n_list=TABLE_N, lambda_list=TABLE_LAMBDAS):
    """Flatten a table into (formula, m, n_fourier, lambda, abs_error) rows."""
    rows = []
    for i, m in enumerate(m_list):
        for j, n in enumerate(n_list):
            for k, lam in enumerate(lambda_list):
                rows.append((FORMULAS[m], m, n, float(lam), float(errors[i, j, k])))
    return rows


def figure1(lam: float = 4.0, n_list: Sequence[int] = (4, 5, 6), grid: int = 201) -> dict:
    """Error curves of the m = 0 and m = 1 truncations over a uniform grid."""
    x = np.linspace(0.0, 1.0, grid)
    exact = exact_reference(lam, x)
    out = {"x": x}
    for m in (0, 1):
        for n in n_list:
            out[f"err_m{m}_n{n}"] = np.abs(EXAMPLE.solve(lam, m, n, x) - exact)
    return out


class NumericExample:
    """The worked example run through the generic pipeline from text input."""

    def __init__(self, nodes: int = DEFAULT_NODES, kernel: str = "min(x,t)", rhs: str = "x",
                 depth: int = 3, count: int = 60, scheme: str = "product", method: str = "jacobi"):
        self.rule = gauss_legendre(nodes, 0.0, 1.0)
        self.kernel = Kernel.from_expression(kernel, 0.0, 1.0)
        self.stack = build_iterated(self.kernel, self.rule, depth, scheme)
        self.spectrum = eigendecompose(self.kernel, self.rule, count, scheme, method,
                                       matrix=self.stack.matrix(1))
        self.f = GridFunction.from_expression(self.rule, rhs)
        self.solver = MixedSolver(self.stack, self.spectrum, self.f)

    def solve(self, lam: float, m: int, N: int, x):
        return self.solver.solve(MixedSeriesParams(lam, m, N), x)


def numeric_table1(example: NumericExample, m_list=TABLE_M, n_list=TABLE_N,
                   lambda_list=TABLE_LAMBDAS) -> np.ndarray:
    """Table 1 with Nyström eigenpairs and quadrature J_n."""
    m_list, n_list, lambda_list = list(m_list), list(n_list), list(lambda_list)
    def cell(args):
        m, n, lam = args
        y = example.solver.solve(MixedSeriesParams(lam, m, n), 1.0)
        return abs(y - exact_reference(lam, 1.0))

    cells = [(m, n, lam) for m in m_list for n in n_list for lam in lambda_list]
    values = _map(cell, cells)
    return np.array(values).reshape(len(m_list), len(n_list), len(lambda_list))


def analytic_vs_numeric(nodes: int = DEFAULT_NODES, lambda_list=(2.0, 5.0)) -> dict:
    """Deviations of the generic pipeline from the closed forms."""
    if nodes < 100:
        raise ValueError(f"need at least 100 nodes, got {nodes}")
    ex = NumericExample(nodes)
    exact_l = EXAMPLE.lambdas(10)
    fx, Jx, _ = ex.solver.pieces(1.0, 3, 1)
    numeric = numeric_table1(ex, lambda_list=lambda_list)
    analytic = table1(lambda_list=lambda_list)
    return {
        "nodes": nodes,
        "eigenvalue_rel_error": np.abs(ex.spectrum.lambdas[:10] / exact_l - 1.0),
        "J_error_at_1": np.abs(Jx[:, 0] - np.array([EXAMPLE.J(n, 1.0) for n in (1, 2, 3)])),
        "table_ratio": numeric / analytic,
        "lambdas": tuple(lambda_list),
    }
