"""Seeded random states and unitaries for the brute-force cross-checks."""

from __future__ import annotations

import numpy as np


def random_density_matrix(dim: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    """Hilbert-Schmidt random state of the given rank (full rank by default)."""
    r = dim if rank is None else rank
    G = rng.normal(size=(dim, r)) + 1j * rng.normal(size=(dim, r))
    rho = G @ G.conj().T
    return rho / np.trace(rho).real


def random_hermitian(dim: int, rng: np.random.Generator) -> np.ndarray:
    G = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return 0.5 * (G + G.conj().T)


def haar_unitaries(count: int, dim: int, rng: np.random.Generator) -> np.ndarray:
    """``count`` Haar-distributed unitaries, via QR of complex Ginibre matrices with the phase fix."""
    Z = (rng.normal(size=(count, dim, dim)) + 1j * rng.normal(size=(count, dim, dim))) / np.sqrt(2.0)
    Q, R = np.linalg.qr(Z)
    d = np.diagonal(R, axis1=1, axis2=2)
    return Q * (d / np.abs(d))[:, None, :]


def best_random_extraction(rho: np.ndarray, trials: int, rng: np.random.Generator, energy_quantum: float = 1.0, batch: int = 20000) -> float:
    """Largest ``tr(H rho) - tr(H U rho U^dag)`` found among ``trials`` Haar unitaries."""
    dim = rho.shape[0]
    n = np.arange(dim) * energy_quantum
    e0 = float(n @ np.diagonal(rho).real)
    best = -np.inf
    done = 0
    while done < trials:
        m = min(batch, trials - done)
        U = haar_unitaries(m, dim, rng)
        # diagonal of U rho U^dag without forming it
        diag = np.einsum("kij,jl,kil->ki", U, rho, U.conj()).real
        best = max(best, float(np.max(e0 - diag @ n)))
        done += m
    return best
