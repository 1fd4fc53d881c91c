"""Cyclic Jacobi eigensolver for real symmetric matrices.

Rotations are applied in round-robin (tournament) order: each of the n-1
rounds of a sweep pairs every index with exactly one partner, so the n/2
rotations of a round commute and are applied together with array
operations.
"""

from __future__ import annotations

import warnings

import numpy as np

__all__ = ["jacobi_eigh", "round_robin_pairs"]

TOL = 1e-13
MAX_SWEEPS = 30


def round_robin_pairs(n: int) -> list[tuple[np.ndarray, np.ndarray]]:
    """Pairings for one sweep over an even number ``n`` of indices.

    Returns n-1 rounds of (p, q) index arrays with p < q; across a sweep
    every unordered pair appears exactly once.
    """
    if n % 2:
        raise ValueError("round-robin schedule needs an even size")
    players = list(range(n))
    rounds = []
    for _ in range(n - 1):
        first = players[: n // 2]
        second = players[n // 2:][::-1]
        p = np.minimum(first, second)
        q = np.maximum(first, second)
        rounds.append((p, q))
        # keep players[0] fixed, rotate the rest by one
        players = [players[0], players[-1]] + players[1:-1]
    return rounds


def _off_norm(a: np.ndarray) -> float:
    off = a - np.diag(np.diag(a))
    return float(np.sqrt(np.sum(off * off)))


def jacobi_eigh(a, tol: float = TOL, max_sweeps: int = MAX_SWEEPS):
    """Eigen-decomposition of a symmetric matrix by cyclic Jacobi sweeps.

    Iterates until the off-diagonal Frobenius norm is at most
    ``tol * ||diag||``. Returns ``(w, v)`` like :func:`numpy.linalg.eigh`:
    ascending eigenvalues and orthonormal eigenvectors as columns.
    """
    a = np.array(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("expected a square matrix")
    n = a.shape[0]
    if n == 0:
        return np.empty(0), np.empty((0, 0))
    # exact symmetry keeps the simultaneous rotations consistent
    a = 0.5 * (a + a.T)
    size = n + (n % 2)
    if size != n:
        # a decoupled zero row/column is never rotated (its off-diagonals are 0)
        padded = np.zeros((size, size))
        padded[:n, :n] = a
        a = padded
    v = np.eye(size)
    rounds = round_robin_pairs(size)

    converged = False
    for _ in range(max_sweeps):
        diag_norm = float(np.linalg.norm(np.diag(a)))
        if _off_norm(a) <= tol * diag_norm:
            converged = True
            break
        for p, q in rounds:
            apq = a[p, q]
            app = a[p, p]
            aqq = a[q, q]
            active = apq != 0.0
            # subnormal apq sends tau to inf, which correctly gives t = 0
            with np.errstate(over="ignore"):
                tau = np.divide(aqq - app, 2.0 * apq, out=np.zeros_like(apq), where=active)
                t = np.where(tau >= 0.0, 1.0, -1.0) / (np.abs(tau) + np.hypot(1.0, tau))
            t = np.where(active, t, 0.0)
            c = 1.0 / np.sqrt(1.0 + t * t)
            s = t * c

            ap = a[:, p].copy()
            aq = a[:, q]
            a[:, p] = c * ap - s * aq
            a[:, q] = s * ap + c * aq
            ap = a[p, :].copy()
            aq = a[q, :]
            a[p, :] = c[:, None] * ap - s[:, None] * aq
            a[q, :] = s[:, None] * ap + c[:, None] * aq
            a[p, q] = 0.0
            a[q, p] = 0.0

            vp = v[:, p].copy()
            vq = v[:, q]
            v[:, p] = c * vp - s * vq
            v[:, q] = s * vp + c * vq
    else:
        diag_norm = float(np.linalg.norm(np.diag(a)))
        converged = _off_norm(a) <= tol * diag_norm
    if not converged:
        warnings.warn(
            f"Jacobi iteration did not converge in {max_sweeps} sweeps", RuntimeWarning, stacklevel=2
        )

    w = np.diag(a)[:n].copy()
    v = v[:n, :n]
    order = np.argsort(w, kind="stable")
    return w[order], v[:, order]
