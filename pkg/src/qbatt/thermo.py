"""Work-extraction and performance figures of merit."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from qbatt.eigen import hermitian_eigenvalues
from qbatt.model import BatteryState, CollisionConfig, DegenerateRegime, EvolutionTrace, QubitSpec


class UndefinedEfficiency(DegenerateRegime):
    """The charging qubits carry no ergotropy, so efficiency is undefined."""


class DivergentAdvantage(ZeroDivisionError):
    """The incoherent energy increment vanishes."""


@dataclass(frozen=True)
class PassiveDecomposition:
    eigenvalues_desc: np.ndarray
    energy: float
    passive_energy: float

    @property
    def ergotropy(self) -> float:
        return self.energy - self.passive_energy


@dataclass(frozen=True)
class ThermalReference:
    """Reference bath at temperature T_R, stored as the energy ``kT = k_B T_R``."""

    kT: float

    def __post_init__(self):
        if not self.kT > 0:
            raise ValueError("kT must be positive")


def _as_matrix(rho) -> tuple[np.ndarray, float]:
    if isinstance(rho, BatteryState):
        return rho.rho, rho.energy_quantum
    return np.asarray(rho), 1.0


def passive_decomposition(rho, energy_quantum: float | None = None, method: str = "auto") -> PassiveDecomposition:
    m, E = _as_matrix(rho)
    if energy_quantum is not None:
        E = energy_quantum
    n = np.arange(m.shape[0])
    r = hermitian_eigenvalues(m, method=method)[::-1]
    energy = E * float(n @ np.diagonal(m).real)
    passive = E * float(n @ r)
    return PassiveDecomposition(r, energy, passive)


def ergotropy(rho, energy_quantum: float | None = None, method: str = "auto") -> float:
    """``tr(H rho)`` minus the energy of the passive state (descending eigenvalues on ascending levels)."""
    return passive_decomposition(rho, energy_quantum, method).ergotropy


def dephased_ergotropy(rho, energy_quantum: float | None = None) -> float:
    """Ergotropy left after removing all energy coherences; only a sort is needed."""
    m, E = _as_matrix(rho)
    if energy_quantum is not None:
        E = energy_quantum
    p = np.diagonal(m).real
    n = np.arange(p.size)
    return E * float(n @ p - n @ np.sort(p)[::-1])


def qubit_ergotropy(q: float, c: float, E: float = 1.0) -> float:
    a = 1.0 - 2.0 * q
    return 0.5 * E * (a + math.sqrt(a * a + 4.0 * c * c * q * (1.0 - q)))


def qubit_entropy(q: float, c: float) -> float:
    """von Neumann entropy (nats) of the charging qubit."""
    r = math.sqrt((q - 0.5) ** 2 + c * c * q * (1.0 - q))
    s = 0.0
    for lam in (0.5 - r, 0.5 + r):
        if lam > 0.0:
            s -= lam * math.log(lam)
    return s


def free_energy_diff(q: float, c: float, E: float, ref: ThermalReference | float) -> float:
    """Free energy of the qubit relative to the Gibbs state at the reference temperature."""
    kT = ref.kT if isinstance(ref, ThermalReference) else float(ref)
    if not kT > 0:
        raise ValueError("kT must be positive")
    log_z = math.log1p(math.exp(-E / kT))
    return E * (1.0 - q) - kT * (qubit_entropy(q, c) - log_z)


def efficiency(erg_B: float, k: int, qubit: QubitSpec, E: float = 1.0) -> float:
    """Stored ergotropy over the total ergotropy handed in by ``k`` qubits."""
    if k < 1:
        raise ValueError("efficiency needs k >= 1")
    e_q = qubit_ergotropy(qubit.q, qubit.c, E)
    if e_q <= 1e-15:
        raise UndefinedEfficiency(f"qubit (q={qubit.q}, c={qubit.c}) has zero ergotropy")
    return erg_B / (k * e_q)


def thermal_efficiency(erg_B: float, k: int, qubit: QubitSpec, E: float, ref: ThermalReference | float) -> float:
    if k < 1:
        raise ValueError("efficiency needs k >= 1")
    return erg_B / (k * free_energy_diff(qubit.q, qubit.c, E, ref))


def power(n_mean: float, k: int, cfg: CollisionConfig) -> float:
    """Mean charging power ``g E n(k) / (k theta)``; the charging time is ``k theta / g``."""
    if k < 1:
        raise ValueError("power needs k >= 1")
    if not cfg.theta > 0:
        raise ValueError("power needs theta > 0")
    return cfg.g * cfg.energy_quantum * n_mean / (k * cfg.theta)


def advantage_ratio(trace_coh: EvolutionTrace, trace_inc: EvolutionTrace, k: int) -> float:
    """Coherent over incoherent single-step mean-charge increment at step ``k``."""
    d_coh = trace_coh.at(k).mean_charge - trace_coh.at(k - 1).mean_charge
    d_inc = trace_inc.at(k).mean_charge - trace_inc.at(k - 1).mean_charge
    if abs(d_inc) < 1e-14:
        raise DivergentAdvantage(f"incoherent increment vanishes at k={k}")
    return d_coh / d_inc


def advantage_bound(q: float, theta: float) -> float:
    """Upper estimate ``1 + Omega/v`` of the coherent advantage ratio."""
    if not q < 0.5:
        raise DegenerateRegime("advantage bound needs population inversion q < 1/2")
    if not 0.0 < theta < 0.5 * math.pi:
        raise DegenerateRegime("advantage bound needs 0 < theta < pi/2")
    return 1.0 + 2.0 * math.sqrt(q * (1.0 - q)) / ((1.0 - 2.0 * q) * math.tan(theta))


def incoherent_power_optimum() -> tuple[float, float]:
    """Best incoherent power (q = 0, one level per swap): maximize sin^2(theta)/theta.

    Returns ``(theta_max, P_max / gE)``; ``theta_max`` solves ``tan(theta) = 2 theta``.
    """
    from scipy.optimize import brentq

    theta = brentq(lambda t: math.tan(t) - 2.0 * t, 0.5, 1.5, xtol=1e-15)
    return theta, math.sin(theta) ** 2 / theta
