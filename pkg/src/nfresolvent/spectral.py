"""Characteristic values and eigenfunctions of symmetric kernels (Nyström)."""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import TruncationError
from .jacobi import jacobi_eigh
from .kernel import GridFunction, Kernel, kernel_matrix, quadrature_rows
from .quadrature import QuadRule

__all__ = [
    "Spectrum",
    "eigendecompose",
    "fourier_coefficients",
    "off_grid_psi",
    "psi_values",
    "SpectrumTruncatedWarning",
]

DISCARD_RTOL = 1e-12


class SpectrumTruncatedWarning(UserWarning):
    """Fewer eigenpairs were retained than requested."""


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Eigenpairs sorted by ascending |λ_k|.

    ``psis[k-1]`` holds node samples of ψ_k, orthonormal under the rule's
    weights. ``residuals[k-1]`` is max|ψ_k - λ_k K ψ_k| / max|ψ_k| on the grid.
    """

    kernel: Kernel
    rule: QuadRule
    lambdas: np.ndarray
    psis: np.ndarray
    residuals: np.ndarray
    scheme: str = "product"
    requested: int = 0

    @property
    def count(self) -> int:
        return self.lambdas.size

    @property
    def short(self) -> bool:
        return self.count < self.requested

    def psi(self, k: int) -> GridFunction:
        self._check_index(k)
        return GridFunction(self.rule, self.psis[k - 1])

    def _check_index(self, k: int) -> None:
        if not 1 <= k <= self.count:
            raise TruncationError(f"eigenpair index {k} out of range 1..{self.count}")

    def gram(self) -> np.ndarray:
        return (self.psis * self.rule.weights) @ self.psis.T


def _orient(psis: np.ndarray) -> np.ndarray:
    """Make each row positive at its first node where |ψ| exceeds half its max."""
    mags = np.abs(psis)
    first = np.argmax(mags > 0.5 * mags.max(axis=1, keepdims=True), axis=1)
    signs = np.sign(psis[np.arange(psis.shape[0]), first])
    signs[signs == 0] = 1.0
    return psis * signs[:, None]


def eigendecompose(kernel: Kernel, rule: QuadRule, max_count: int, scheme: str = "product",
                   method: str = "jacobi", matrix: Optional[np.ndarray] = None) -> Spectrum:
    """Solve ψ = λ ∫ K ψ on the grid.

    The operator matrix [K1] is symmetrized as ``W^½ [K1] W^½``; operator
    eigenvalues μ with ``|μ| <= 1e-12 max|μ|`` are dropped and the rest give
    ``λ = 1/μ``. ``method`` is ``"jacobi"`` or ``"lapack"``; ``matrix`` may
    supply a precomputed [K1] for the same scheme.
    """
    kernel.require_symmetric()
    if int(max_count) != max_count or max_count < 1:
        raise ValueError(f"max_count must be a positive integer, got {max_count!r}")
    k1 = kernel_matrix(kernel, rule, scheme) if matrix is None else np.asarray(matrix, dtype=float)
    sw = rule.sqrt_weights
    a = sw[:, None] * k1 * sw[None, :]
    a = 0.5 * (a + a.T)
    if method == "jacobi":
        mu, vecs = jacobi_eigh(a)
    elif method == "lapack":
        mu, vecs = np.linalg.eigh(a)
    else:
        raise ValueError(f"unknown eigensolver {method!r}")

    keep = np.abs(mu) > DISCARD_RTOL * np.abs(mu).max()
    mu = mu[keep]
    vecs = vecs[:, keep]
    lambdas = 1.0 / mu
    order = np.argsort(np.abs(lambdas), kind="stable")[: int(max_count)]
    lambdas = lambdas[order]
    psis = (vecs[:, order] / sw[:, None]).T
    norms = np.sqrt((psis * psis) @ rule.weights)
    psis = _orient(psis / norms[:, None])

    image = (psis * rule.weights) @ k1.T  # rows: (K1 W ψ_k)
    residuals = np.abs(psis - lambdas[:, None] * image).max(axis=1) / np.abs(psis).max(axis=1)

    if lambdas.size < max_count:
        warnings.warn(
            f"only {lambdas.size} eigenpairs retained, {max_count} requested",
            SpectrumTruncatedWarning,
            stacklevel=2,
        )
    lambdas.setflags(write=False)
    psis.setflags(write=False)
    return Spectrum(kernel, rule, lambdas, psis, residuals, scheme, int(max_count))


def fourier_coefficients(spec: Spectrum, f: GridFunction, N: int) -> np.ndarray:
    """f̂_k = ⟨ψ_k, f⟩ for k = 1..N."""
    if N > spec.count:
        raise TruncationError(f"requested {N} Fourier coefficients, spectrum has {spec.count}")
    return spec.psis[:N] @ (spec.rule.weights * f.values)


def psi_values(spec: Spectrum, x, N: Optional[int] = None) -> np.ndarray:
    """ψ_1..ψ_N at arbitrary points via ψ_k(x) = λ_k ∫ K(x, t) ψ_k(t) dt.

    Returns shape (N, len(x)).
    """
    N = spec.count if N is None else N
    if N > spec.count:
        raise TruncationError(f"requested {N} eigenfunctions, spectrum has {spec.count}")
    rows = quadrature_rows(spec.kernel, spec.rule, x, spec.scheme)
    return spec.lambdas[:N, None] * (spec.psis[:N] @ rows.T)


def off_grid_psi(spec: Spectrum, kernel: Kernel, k: int, x):
    """Nyström extension of ψ_k to arbitrary x in [a, b]."""
    spec._check_index(k)
    rows = quadrature_rows(kernel, spec.rule, x, spec.scheme)
    vals = spec.lambdas[k - 1] * (rows @ spec.psis[k - 1])
    return float(vals[0]) if np.ndim(x) == 0 else vals.reshape(np.shape(x))
