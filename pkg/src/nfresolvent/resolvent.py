"""Mixed Neumann–Fourier resolvent series and the solutions built from it.

With iterated kernels K_n and eigenpairs (λ_k, ψ_k) the truncated resolvent is

    R(x, t, λ) = Σ_{n=1}^m λ^{n-1} K_n(x, t)
                 + λ^m Σ_{k=1}^N ψ_k(x) ψ_k(t) / (λ_k^m (λ_k - λ))

and the solution of y = f + λ ∫ K y is

    y(x) = f(x) + Σ_{n=1}^m λ^n J_n(x)
           + λ^{m+1} Σ_{k=1}^N f̂_k ψ_k(x) / (λ_k^m (λ_k - λ)),

with J_n = ∫ K_n f and f̂_k = ⟨ψ_k, f⟩. m = 0 is the pure Fourier form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import AnnihilationError, EigenvalueHitError, TruncationError
from .kernel import GridFunction, IteratedKernelStack, iterated_values, split_gauss
from .spectral import Spectrum, fourier_coefficients, psi_values

__all__ = [
    "MixedSeriesParams",
    "MixedSolver",
    "ErrorProfile",
    "EIGEN_GUARD_RTOL",
    "check_eigen_guard",
    "resolvent_eval",
    "annihilated_resolvent_eval",
    "solve_equation",
    "exact_reference",
    "error_profile",
    "resolvent_defect",
    "column_fsum",
]

EIGEN_GUARD_RTOL = 1e-12
ANNIHILATION_ATOL = 1e-14
ROUNDING_FLOOR = 1e-15
DEFECT_ORDER = 32


@dataclass(frozen=True)
class MixedSeriesParams:
    """Truncation (m Neumann terms, N Fourier terms), λ and optional α."""

    lam: float
    m: int
    n_fourier: int
    alphas: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "lam", float(self.lam))
        object.__setattr__(self, "alphas", tuple(float(a) for a in self.alphas))
        if not math.isfinite(self.lam):
            raise ValueError(f"lambda must be finite, got {self.lam!r}")
        if int(self.m) != self.m or self.m < 0:
            raise ValueError(f"m must be a non-negative integer, got {self.m!r}")
        if int(self.n_fourier) != self.n_fourier or self.n_fourier < 1:
            raise ValueError(f"n_fourier must be a positive integer, got {self.n_fourier!r}")
        if len(self.alphas) > 1:
            raise ValueError("only a single annihilation factor is supported")
        object.__setattr__(self, "m", int(self.m))
        object.__setattr__(self, "n_fourier", int(self.n_fourier))

    @property
    def alpha(self) -> Optional[float]:
        return self.alphas[0] if self.alphas else None


def check_eigen_guard(lambdas: Sequence[float], lam: float, rtol: float = EIGEN_GUARD_RTOL) -> None:
    """Raise if lam is within relative distance rtol of any λ_k."""
    lambdas = np.asarray(lambdas, dtype=float)
    if lambdas.size == 0:
        return
    rel = np.abs(lam - lambdas) / np.abs(lambdas)
    k = int(np.argmin(rel))
    if rel[k] <= rtol:
        raise EigenvalueHitError(lam, k + 1, float(lambdas[k]))


def column_fsum(terms: np.ndarray) -> np.ndarray:
    """Correctly rounded sum over axis 0 of a 2-D array."""
    terms = np.asarray(terms, dtype=float)
    return np.array([math.fsum(col) for col in terms.T])


def _check_truncation(spec: Spectrum, params: MixedSeriesParams) -> None:
    if params.n_fourier > spec.count:
        raise TruncationError(
            f"n_fourier = {params.n_fourier} exceeds the {spec.count} available eigenpairs"
        )


def _annihilation_weights(alpha: float, lambdas: np.ndarray) -> np.ndarray:
    w = 1.0 - alpha * lambdas
    # α = 1/λ_j should cancel term j exactly, not leave a rounding remnant
    w[np.abs(w) <= 4.0 * np.finfo(float).eps] = 0.0
    return w


def _resolvent_parts(stack, spec, params, x, t, weights=None):
    """Pointwise iterated kernels K_1..K_max(m,1) and the Fourier tail sum."""
    lam, m, N = params.lam, params.m, params.n_fourier
    _check_truncation(spec, params)
    check_eigen_guard(spec.lambdas, lam)
    if m > stack.depth:
        raise TruncationError(f"m = {m} exceeds stack depth {stack.depth}")
    x = np.atleast_1d(np.asarray(x, dtype=float)).ravel()
    heads = iterated_values(stack.kernel, max(m, 1), x, t)
    lk = spec.lambdas[:N]
    psi_x = psi_values(spec, x, N)
    psi_t = psi_values(spec, [t], N)[:, 0]
    coef = psi_t / (lk**m * (lk - lam))
    if weights is not None:
        coef = coef * weights
    tail = column_fsum(coef[:, None] * psi_x)
    return heads, tail


def _shape_like(vals: np.ndarray, x):
    return float(vals[0]) if np.ndim(x) == 0 else vals.reshape(np.shape(x))


def resolvent_eval(stack: IteratedKernelStack, spec: Spectrum, params: MixedSeriesParams, x, t: float):
    """Truncated mixed resolvent R(x, t, λ); ``x`` may be an array."""
    if params.alphas:
        return annihilated_resolvent_eval(stack, spec, params, x, t)
    lam, m = params.lam, params.m
    heads, tail = _resolvent_parts(stack, spec, params, x, t)
    out = lam**m * tail
    for n in range(m, 0, -1):
        out = out + lam ** (n - 1) * heads[n - 1]
    return _shape_like(out, x)


def annihilated_resolvent_eval(stack: IteratedKernelStack, spec: Spectrum,
                               params: MixedSeriesParams, x, t: float):
    """R from the (1 - αλ)-multiplied series, divided back by (1 - αλ).

    (1-αλ)R = K + Σ_{n=1}^{m-1} λ^n (K_{n+1} - α K_n)
              + λ^m Σ_k (1-αλ_k) ψ_k(x)ψ_k(t) / (λ_k^m (λ_k - λ))
    """
    if len(params.alphas) != 1:
        raise ValueError("annihilated form needs exactly one alpha")
    if params.m < 1:
        raise ValueError("annihilated form needs m >= 1")
    lam, m, alpha = params.lam, params.m, params.alpha
    factor = 1.0 - alpha * lam
    if abs(factor) <= ANNIHILATION_ATOL:
        raise AnnihilationError(f"1 - alpha*lambda = {factor!r} vanishes")
    weights = _annihilation_weights(alpha, spec.lambdas[: params.n_fourier].copy())
    heads, tail = _resolvent_parts(stack, spec, params, x, t, weights)
    out = heads[0] + lam**m * tail
    for n in range(1, m):
        out = out + lam**n * (heads[n] - alpha * heads[n - 1])
    return _shape_like(out / factor, x)


class MixedSolver:
    """Pre-integrated data for one right-hand side: J_1..J_m and f̂_1..f̂_N.

    Evaluation at a point costs O(m + N) once the Nyström rows for that point
    are formed.
    """

    def __init__(self, stack: IteratedKernelStack, spec: Spectrum, f: GridFunction,
                 m: Optional[int] = None, n_fourier: Optional[int] = None):
        self.stack = stack
        self.spec = spec
        self.f = f
        m = stack.depth if m is None else m
        if m > stack.depth:
            raise TruncationError(f"m = {m} exceeds stack depth {stack.depth}")
        n_fourier = spec.count if n_fourier is None else n_fourier
        self.J = [stack.apply(n, f).values for n in range(1, m + 1)]
        self.fhat = fourier_coefficients(spec, f, n_fourier)

    def pieces(self, x, m: int, N: int):
        """f(x), J_1(x)..J_m(x) (rows) and ψ_1(x)..ψ_N(x) (rows)."""
        if m > len(self.J):
            raise TruncationError(f"m = {m} exceeds the {len(self.J)} precomputed J_n")
        if N > self.fhat.size:
            raise TruncationError(f"N = {N} exceeds the {self.fhat.size} precomputed f̂_k")
        x = np.atleast_1d(np.asarray(x, dtype=float)).ravel()
        rows = self.stack.rows(x)
        fx = np.atleast_1d(self.f(x)).astype(float)
        # J_n(x) = ∫ K(x, s) J_{n-1}(s) ds with J_0 = f
        prev = [self.f.values] + self.J[: max(m - 1, 0)]
        Jx = np.array([rows @ g for g in prev[:m]]).reshape(m, x.size)
        psix = self.spec.lambdas[:N, None] * (self.spec.psis[:N] @ rows.T)
        return fx, Jx, psix

    def solve(self, params: MixedSeriesParams, x):
        lam, m, N = params.lam, params.m, params.n_fourier
        check_eigen_guard(self.spec.lambdas, lam)
        fx, Jx, psix = self.pieces(x, m, N)
        lk = self.spec.lambdas[:N]
        coef = self.fhat[:N] / (lk**m * (lk - lam))
        alpha = params.alpha
        if alpha is None:
            tail = column_fsum(coef[:, None] * psix)
            out = lam ** (m + 1) * tail
            for n in range(m, 0, -1):
                out = out + lam**n * Jx[n - 1]
            return _shape_like(fx + out, x)

        if m < 1:
            raise ValueError("annihilated form needs m >= 1")
        factor = 1.0 - alpha * lam
        if abs(factor) <= ANNIHILATION_ATOL:
            raise AnnihilationError(f"1 - alpha*lambda = {factor!r} vanishes")
        weights = _annihilation_weights(alpha, lk.copy())
        tail = column_fsum((coef * weights)[:, None] * psix)
        inner = Jx[0] + lam**m * tail
        for n in range(1, m):
            inner = inner + lam**n * (Jx[n] - alpha * Jx[n - 1])
        return _shape_like(fx + lam * inner / factor, x)


def solve_equation(stack: IteratedKernelStack, spec: Spectrum, f: GridFunction,
                   params: MixedSeriesParams, x):
    """y(x) from the truncated mixed series; ``x`` may be an array."""
    _check_truncation(spec, params)
    solver = MixedSolver(stack, spec, f, params.m, params.n_fourier)
    return solver.solve(params, x)


def exact_reference(lam: float, x):
    """Closed-form solution of y = x + λ ∫₀¹ min(x, t) y(t) dt."""
    x = np.asarray(x, dtype=float)
    if lam == 0.0:
        out = x.copy()
    elif lam > 0.0:
        s = math.sqrt(lam)
        c = math.cos(s)
        if abs(c) < 1e-12:
            k = int(round(s / math.pi + 0.5))
            raise EigenvalueHitError(lam, k, ((k - 0.5) * math.pi) ** 2)
        out = np.sin(s * x) / (s * c)
    else:
        s = math.sqrt(-lam)
        out = np.sinh(s * x) / (s * math.cosh(s))
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class ErrorProfile:
    x: np.ndarray
    errors: np.ndarray
    at_rounding_floor: bool

    @property
    def max_error(self) -> float:
        return float(self.errors.max())


def error_profile(stack: IteratedKernelStack, spec: Spectrum, f: GridFunction, lam: float,
                  m: int, N: int, grid, exact: Callable = exact_reference) -> ErrorProfile:
    """|y_approx - y_exact| over ``grid``; flagged when everything is below 1e-15."""
    grid = np.asarray(grid, dtype=float)
    params = MixedSeriesParams(lam, m, N)
    approx = np.atleast_1d(solve_equation(stack, spec, f, params, grid))
    err = np.abs(approx - np.atleast_1d(exact(lam, grid)))
    return ErrorProfile(grid, err, bool(np.all(err < ROUNDING_FLOOR)))


def resolvent_defect(stack: IteratedKernelStack, spec: Spectrum, params: MixedSeriesParams,
                     x: float, t: float, order: int = DEFECT_ORDER) -> float:
    """R̃(x,t) - K(x,t) - λ ∫ K(x,s) R̃(s,t) ds for the truncated R̃.

    The s-integral is split at x and t, where the integrand's derivative
    jumps for kernels of min/max type.
    """
    kernel = stack.kernel
    pts, wts = split_gauss(kernel.a, kernel.b, np.array([[x, t]]), order)
    pts, wts = pts[0], wts[0]
    keep = wts > 0
    pts, wts = pts[keep], wts[keep]
    r_s = np.asarray(resolvent_eval(stack, spec, params, pts, t))
    r_xt = resolvent_eval(stack, spec, params, x, t)
    integral = math.fsum(wts * kernel(x, pts) * r_s)
    return float(r_xt - float(kernel(x, t)) - params.lam * integral)
