"""Fredholm determinant Δ(λ) = Σ c_n λ^n and numerator D(x,t,λ) = Σ C_n(x,t) λ^n.

Coefficients follow the recurrences

    c_0 = 1,  C_0 = K,
    c_n = -(1/n) ∫ C_{n-1}(x, x) dx,
    C_n(x, t) = c_n K(x, t) + ∫ K(x, ξ) C_{n-1}(ξ, t) dξ,

so that R = D / Δ. Unrolling gives C_n = Σ_{j=0}^n c_j K_{n+1-j}, which is
how pointwise values are produced.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .kernel import IteratedKernelStack, Kernel, iterated_values, kernel_matrix
from .quadrature import QuadRule
from .resolvent import MixedSeriesParams, check_eigen_guard, resolvent_eval
from .spectral import Spectrum

__all__ = [
    "DetCoefficients",
    "compute_coefficients",
    "diagonal_traces",
    "delta_eval",
    "numerator_value",
    "ratio_resolvent_check",
    "symmetric_function_check",
    "c1_kernel_check",
    "DEFAULT_ORDER",
]

DEFAULT_ORDER = 12


@dataclass(frozen=True, eq=False)
class DetCoefficients:
    kernel: Kernel
    rule: QuadRule
    c: np.ndarray
    C: tuple
    scheme: str = "product"

    @property
    def order(self) -> int:
        return self.c.size - 1

    def pointwise(self, n: int, x, t: float):
        """C_n(x, t) at arbitrary points (``x`` may be an array)."""
        if not 0 <= n <= self.order:
            raise IndexError(f"C_{n} not computed (order {self.order})")
        ks = iterated_values(self.kernel, n + 1, x, t)
        out = sum(self.c[j] * ks[n - j] for j in range(n + 1))
        return float(out[0]) if np.ndim(x) == 0 else out


def diagonal_traces(kernel: Kernel, rule: QuadRule, p_max: int) -> np.ndarray:
    """T_p = ∫ K_p(x, x) dx for p = 1..p_max, from pointwise iterated kernels."""
    diag = np.array([iterated_values(kernel, p_max, [x], x)[:, 0] for x in rule.nodes])
    return rule.weights @ diag


def compute_coefficients(kernel: Kernel, rule: QuadRule, M: int = DEFAULT_ORDER,
                         scheme: str = "product", base=None) -> DetCoefficients:
    """Run the c_n / C_n recurrence up to order M on the quadrature grid.

    The trace ∫ C_{n-1}(x, x) dx is Σ_j c_j T_{n-j} with the diagonal traces
    T_p = ∫ K_p(x, x) dx taken pointwise; a trace of the node matrices would
    sum every discrete eigenvalue, whose high end is inaccurate at the 1e-9
    level for kernels with a diagonal kink.
    """
    if int(M) != M or M < 0:
        raise ValueError(f"order must be a non-negative integer, got {M!r}")
    M = int(M)
    k1 = kernel_matrix(kernel, rule, scheme) if base is None else np.asarray(base, dtype=float)
    traces = diagonal_traces(kernel, rule, M) if M else np.empty(0)
    c = [1.0]
    C = [k1]
    wk1 = k1 * rule.weights  # K W
    for n in range(1, M + 1):
        cn = -math.fsum(c[j] * traces[n - 1 - j] for j in range(n)) / n
        c.append(cn)
        C.append(cn * k1 + wk1 @ C[-1])
    c = np.array(c)
    c.setflags(write=False)
    for mat in C:
        mat.setflags(write=False)
    return DetCoefficients(kernel, rule, c, tuple(C), scheme)


def delta_eval(coeffs: DetCoefficients, lam: float) -> float:
    """Σ_{n<=M} c_n λ^n by Horner's rule."""
    acc = 0.0
    for cn in coeffs.c[::-1]:
        acc = acc * lam + cn
    return float(acc)


def numerator_value(coeffs: DetCoefficients, lam: float, x: float, t: float) -> float:
    """Truncated D(x, t, λ) = Σ_{n<=M} C_n(x, t) λ^n, pointwise."""
    M = coeffs.order
    ks = iterated_values(coeffs.kernel, M + 1, x, t)[:, 0]
    terms = []
    for n in range(M + 1):
        cn = math.fsum(coeffs.c[j] * ks[n - j] for j in range(n + 1))
        terms.append(cn * lam**n)
    return math.fsum(terms)


def ratio_resolvent_check(coeffs: DetCoefficients, stack: IteratedKernelStack, spec: Spectrum,
                          lam: float, m: int, N: int, x: float, t: float) -> float:
    """|D_M(x,t,λ) - Δ_M(λ) R_{m,N}(x,t,λ)|: a consistency diagnostic."""
    check_eigen_guard(spec.lambdas, lam)
    r = resolvent_eval(stack, spec, MixedSeriesParams(lam, m, N), x, t)
    return abs(numerator_value(coeffs, lam, x, t) - delta_eval(coeffs, lam) * r)


def symmetric_function_check(spec: Spectrum, N: int) -> tuple[float, float]:
    """Eigenvalue forms of c_1, c_2 truncated to k <= N.

    c_1 = -Σ 1/λ_k,  c_2 = Σ_{j<k} 1/(λ_j λ_k) = ((Σ 1/λ_k)² - Σ 1/λ_k²) / 2.
    """
    if not 1 <= N <= spec.count:
        raise ValueError(f"N must be in 1..{spec.count}, got {N}")
    inv = 1.0 / spec.lambdas[:N]
    s1 = math.fsum(inv)
    s2 = math.fsum(inv * inv)
    return -s1, 0.5 * (s1 * s1 - s2)


def c1_kernel_check(coeffs: DetCoefficients, spec: Spectrum, N: int) -> float:
    """Quadrature-L2 distance between C_1 and -Σ_k Σ_{j≠k} ψ_kψ_k/(λ_kλ_j).

    The double series converges only in L2, so the comparison is in that norm.
    """
    if coeffs.order < 1:
        raise ValueError("need order >= 1")
    if not 1 <= N <= spec.count:
        raise ValueError(f"N must be in 1..{spec.count}, got {N}")
    inv = 1.0 / spec.lambdas[:N]
    others = inv.sum() - inv  # Σ_{j≠k} 1/λ_j
    psi = spec.psis[:N]
    c1_eig = -(psi.T * (inv * others)) @ psi
    w = coeffs.rule.weights
    diff = coeffs.C[1] - c1_eig
    return float(np.sqrt(w @ (diff * diff) @ w))
