"""Incoherent charging as a three-branch random walk on the ladder.

With diagonal qubits the battery stays diagonal, and its populations follow
a Markov chain: up with probability ``p (1-q)``, down with ``p q``, stay with
``1 - p``. At the two ends the blocked jump turns into "stay", which makes
the chain coincide with the diagonal of the exact collision map.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from qbatt.model import DegenerateRegime


@dataclass(frozen=True)
class ChargeDistribution:
    probabilities: np.ndarray

    def __post_init__(self):
        p = np.array(self.probabilities, dtype=float)
        if p.ndim != 1 or p.size < 2:
            raise ValueError("need a 1-d probability vector over at least 2 levels")
        if not np.all(np.isfinite(p)):
            raise ValueError("probabilities contain NaN or inf")
        if p.min() < -1e-12:
            raise ValueError(f"negative probability {p.min():.3e}")
        if abs(p.sum() - 1.0) > 1e-10:
            raise ValueError(f"probabilities sum to {p.sum()!r}")
        p.setflags(write=False)
        object.__setattr__(self, "probabilities", p)

    @property
    def N(self) -> int:
        return self.probabilities.size - 1

    @property
    def mean(self) -> float:
        return float(np.arange(self.N + 1) @ self.probabilities)

    @property
    def variance(self) -> float:
        n = np.arange(self.N + 1)
        m = n @ self.probabilities
        return float((n * n) @ self.probabilities - m * m)

    @classmethod
    def delta(cls, n0: int, N: int) -> "ChargeDistribution":
        p = np.zeros(N + 1)
        p[n0] = 1.0
        return cls(p)


def _check_prob(name: str, x: float) -> None:
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {x}")


def _step_array(p: np.ndarray, q: float, p_theta: float) -> np.ndarray:
    up = p_theta * (1.0 - q)
    down = p_theta * q
    out = (1.0 - p_theta) * p
    out[1:] += up * p[:-1]
    out[:-1] += down * p[1:]
    out[0] += down * p[0]
    out[-1] += up * p[-1]
    return out


def walk_step(dist: ChargeDistribution, q: float, p_theta: float) -> ChargeDistribution:
    _check_prob("q", q)
    _check_prob("p_theta", p_theta)
    return ChargeDistribution(_step_array(dist.probabilities.copy(), q, p_theta))


def walk_evolve(dist: ChargeDistribution, q: float, p_theta: float, k: int) -> ChargeDistribution:
    _check_prob("q", q)
    _check_prob("p_theta", p_theta)
    p = dist.probabilities.copy()
    for _ in range(k):
        p = _step_array(p, q, p_theta)
    return ChargeDistribution(p)


def walk_moments_trajectory(dist: ChargeDistribution, q: float, p_theta: float, k_max: int):
    """Mean and variance after each of ``0..k_max`` steps, plus the boundary weight P(0)+P(N)."""
    p = dist.probabilities.copy()
    n = np.arange(p.size)
    out = np.empty((k_max + 1, 3))
    for k in range(k_max + 1):
        if k:
            p = _step_array(p, q, p_theta)
        m = n @ p
        out[k] = m, (n * n) @ p - m * m, p[0] + p[-1]
    return out


def moments_analytic(n0_mean: float, n0_var: float, q: float, p_theta: float, k: int) -> tuple[float, float]:
    """Boundary-free mean and variance after ``k`` steps; both grow linearly."""
    if k < 0:
        raise ValueError("k must be >= 0")
    v = p_theta * (1.0 - 2.0 * q)
    return n0_mean + v * k, n0_var + (p_theta - v * v) * k


def step_factor(phi, q: float, p_theta: float):
    v = p_theta * (1.0 - 2.0 * q)
    return 1.0 - p_theta * (1.0 - np.cos(phi)) + 1j * v * np.sin(phi)


def characteristic_classical(phi, k: int, q: float, p_theta: float, chi0=1.0):
    """Characteristic function ``sum_n P(n,k) e^{i n phi}`` of the boundary-free walk."""
    return step_factor(phi, q, p_theta) ** k * chi0


def delta_characteristic(n0: int):
    return lambda phi: np.exp(1j * n0 * np.asarray(phi))


def phase_nodes(num_nodes: int) -> np.ndarray:
    """Uniform nodes on (-pi, pi]."""
    return -np.pi + 2.0 * np.pi * np.arange(1, num_nodes + 1) / num_nodes


def invert_characteristic(chi_values: np.ndarray, phi: np.ndarray, n) -> np.ndarray:
    """``P(n) = (1/2pi) int chi(phi) e^{-i n phi} dphi`` by the uniform rule on ``phi``."""
    n = np.atleast_1d(np.asarray(n))
    return (np.exp(-1j * np.outer(n, phi)) @ chi_values).real / phi.size


def characteristic_distribution(n0: int, q: float, p_theta: float, k: int, N: int, num_nodes: int | None = None) -> np.ndarray:
    """Boundary-free walk from ``|n0>`` evaluated on levels ``0..N`` by Fourier inversion.

    Uses at least ``8 (N+1)`` nodes so every level is resolved without aliasing.
    """
    M = max(num_nodes or 0, 8 * (N + 1))
    phi = phase_nodes(M)
    chi = characteristic_classical(phi, k, q, p_theta, np.exp(1j * n0 * phi))
    return invert_characteristic(chi, phi, np.arange(N + 1))


def gaussian_limit(n, k: int, n0: float, q: float, p_theta: float):
    """Large-``k`` Gaussian density of the charge; renormalize over discrete ``n`` yourself."""
    if k < 1:
        raise ValueError("k must be >= 1")
    v = p_theta * (1.0 - 2.0 * q)
    var = k * (p_theta - v * v)
    if var <= 0.0:
        raise DegenerateRegime("zero variance: the walk is deterministic and stays a delta distribution")
    n = np.asarray(n, dtype=float)
    return np.exp(-((n - n0 - v * k) ** 2) / (2.0 * var)) / math.sqrt(2.0 * math.pi * var)


def gaussian_distribution(N: int, k: int, n0: float, q: float, p_theta: float) -> ChargeDistribution:
    g = gaussian_limit(np.arange(N + 1), k, n0, q, p_theta)
    return ChargeDistribution(g / g.sum())


def gibbs_steady_state(q: float, N: int, allow_degenerate: bool = False) -> ChargeDistribution:
    """Fixed point ``P(n) ∝ ((1-q)/q)^n`` of the walk (an inverted Gibbs state for q < 1/2)."""
    _check_prob("q", q)
    if q in (0.0, 1.0):
        if not allow_degenerate:
            raise DegenerateRegime(f"q={q}: steady state is a delta at level {N if q == 0.0 else 0}")
        return ChargeDistribution.delta(N if q == 0.0 else 0, N)
    logw = np.arange(N + 1) * (math.log1p(-q) - math.log(q))
    w = np.exp(logw - logw.max())
    return ChargeDistribution(w / w.sum())


def total_variation(p, r) -> float:
    return 0.5 * float(np.abs(np.asarray(p) - np.asarray(r)).sum())
