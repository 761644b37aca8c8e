"""Small dense symmetric linear algebra: Cholesky, cyclic Jacobi, whitening."""

from __future__ import annotations

import numpy as np

from .errors import SingularMetricError

PIVOT_RTOL = 1e-12


def cholesky(g, rtol=PIVOT_RTOL):
    """Lower-triangular ``L`` with ``g = L L^T``.

    Raises :class:`SingularMetricError` when a pivot falls below
    ``rtol * max|g_ij|``, i.e. ``g`` is singular or indefinite.
    """
    g = np.asarray(g, dtype=float)
    n = g.shape[0]
    if g.shape != (n, n):
        raise ValueError("cholesky needs a square matrix")
    if not np.all(np.isfinite(g)):
        raise SingularMetricError("metric has non-finite entries")
    thresh = rtol * np.max(np.abs(g))
    L = np.zeros_like(g)
    for j in range(n):
        d = g[j, j] - L[j, :j] @ L[j, :j]
        if not d > thresh:
            raise SingularMetricError(f"metric not positive definite (pivot {j}: {d:.3e})")
        L[j, j] = np.sqrt(d)
        for i in range(j + 1, n):
            L[i, j] = (g[i, j] - L[i, :j] @ L[j, :j]) / L[j, j]
    return L


def jacobi_eigh(a, tol=1e-13, max_sweeps=50):
    """Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.

    Returns ``(w, v)`` with ascending eigenvalues ``w`` and orthonormal
    eigenvectors in the columns of ``v``.  Iteration stops once the
    off-diagonal Frobenius norm is below ``tol`` times the matrix norm.
    """
    a = np.array(a, dtype=float)
    n = a.shape[0]
    a = 0.5 * (a + a.T)
    v = np.eye(n)
    scale = np.linalg.norm(a)
    if scale == 0.0:
        return np.zeros(n), v
    for _ in range(max_sweeps):
        off = np.sqrt(np.sum(np.tril(a, -1) ** 2))
        if off <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                if theta == 0.0:
                    t = 1.0
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                rot = np.eye(n)
                rot[p, p] = rot[q, q] = c
                rot[p, q] = s
                rot[q, p] = -s
                a = rot.T @ a @ rot
                a[p, q] = a[q, p] = 0.0
                v = v @ rot
    w = np.diag(a).copy()
    order = np.argsort(w, kind="stable")
    return w[order], v[:, order]


def whitened_eigvalsh(a, g):
    """Eigenvalues of ``g^{-1} a`` for symmetric ``a`` and positive definite ``g``."""
    L = cholesky(g)
    Li = np.linalg.solve(L, np.eye(L.shape[0]))
    w, _ = jacobi_eigh(Li @ np.asarray(a, dtype=float) @ Li.T)
    return w


def elementary_symmetric(mu):
    """``[sigma_1, ..., sigma_n]`` of the values in ``mu`` (no binomial normalization)."""
    e = [1.0] + [0.0] * len(mu)
    for x in mu:
        for k in range(len(mu), 0, -1):
            e[k] += e[k - 1] * x
    return np.array(e[1:])
