"""Eigenvalues of Hermitian matrices.

The cyclic Jacobi solver is self-contained and unconditionally stable; it is
the reference path. For large ladders, ``method="auto"`` hands off to LAPACK
(``numpy.linalg.eigh``) because a Python-level Jacobi sweep of a 201x201
matrix costs seconds and the ergotropy is needed at every recorded step.
"""

from __future__ import annotations

import numpy as np

JACOBI_MAX_DIM = 48


class NotHermitianError(ValueError):
    pass


def _check_hermitian(m: np.ndarray, tol: float) -> None:
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise NotHermitianError(f"expected a square matrix, got shape {m.shape}")
    scale = max(1.0, float(np.max(np.abs(m)))) if m.size else 1.0
    dev = float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0
    if dev > tol * scale:
        raise NotHermitianError(f"matrix is not Hermitian (max |m - m^H| = {dev:.3e})")


def jacobi_eigh(m, tol: float = 1e-12, max_sweeps: int = 100, vectors: bool = True):
    """Cyclic Jacobi diagonalization of a complex Hermitian matrix.

    Each rotation first removes the phase of the pivot ``a_pq`` and then
    applies the real two-sided rotation that zeroes it. Sweeps stop once the
    off-diagonal Frobenius norm falls below ``tol * ||m||_F``.

    Returns ascending eigenvalues and, if ``vectors``, the unitary whose
    columns are the matching eigenvectors.
    """
    a = np.array(m, dtype=complex)
    n = a.shape[0]
    v = np.eye(n, dtype=complex) if vectors else None
    norm = np.linalg.norm(a)
    if n == 0 or norm == 0.0:
        w = np.zeros(n)
        return (w, v) if vectors else w
    thresh = tol * norm

    for _sweep in range(max_sweeps):
        # direct sum: norm^2 - sum|a_ii|^2 cancels catastrophically near convergence
        off = np.linalg.norm(a - np.diag(np.diag(a)))
        if off <= thresh:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                mag = abs(apq)
                if mag <= 1e-300 or mag < 1e-3 * thresh / n:
                    continue
                phase = apq / mag
                app = a[p, p].real
                aqq = a[q, q].real
                tau = (aqq - app) / (2.0 * mag)
                t = (1.0 if tau >= 0 else -1.0) / (abs(tau) + np.sqrt(1.0 + tau * tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                # U = [[c, s], [-s conj(phase), c conj(phase)]] on (p, q)
                cp = np.conj(phase)
                col_p = a[:, p].copy()
                col_q = a[:, q]
                a[:, p] = c * col_p - s * cp * col_q
                a[:, q] = s * col_p + c * cp * col_q
                row_p = a[p, :].copy()
                row_q = a[q, :]
                a[p, :] = c * row_p - s * phase * row_q
                a[q, :] = s * row_p + c * phase * row_q
                a[p, q] = a[q, p] = 0.0
                a[p, p] = app - t * mag
                a[q, q] = aqq + t * mag
                if vectors:
                    vp = v[:, p].copy()
                    vq = v[:, q]
                    v[:, p] = c * vp - s * cp * vq
                    v[:, q] = s * vp + c * cp * vq

    w = np.diag(a).real.copy()
    order = np.argsort(w, kind="stable")
    if vectors:
        return w[order], v[:, order]
    return w[order]


def hermitian_eigenvalues(m, method: str = "jacobi", hermitian_tol: float = 1e-10) -> np.ndarray:
    """Real eigenvalues of a Hermitian matrix in ascending order.

    ``method`` is ``"jacobi"``, ``"lapack"`` or ``"auto"`` (Jacobi up to
    ``JACOBI_MAX_DIM`` levels, LAPACK beyond).
    """
    m = np.asarray(m)
    _check_hermitian(m, hermitian_tol)
    if method == "auto":
        method = "jacobi" if m.shape[0] <= JACOBI_MAX_DIM else "lapack"
    if method == "jacobi":
        return jacobi_eigh(m, vectors=False)
    if method == "lapack":
        return np.linalg.eigvalsh(m)
    raise ValueError(f"unknown eigensolver method {method!r}")
