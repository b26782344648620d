"""Value types shared across the package.

The battery is an (N+1)-level ladder ``|0>, ..., |N>`` with energies ``n*E``.
Qubit states are written in the ordered basis ``(|g>, |e>)``. All density
matrices live in the frame rotating with the free Hamiltonian; because the
exchange interaction commutes with it, populations and coherence magnitudes
are frame independent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

TRACE_TOL = 1e-10
HERMITIAN_TOL = 1e-12
POSITIVITY_TOL = 1e-9


class InvariantViolation(RuntimeError):
    """A state left its physical domain (trace, Hermiticity, positivity)."""


class DegenerateRegime(ValueError):
    """Inputs fall outside the regime where a formula is defined."""


def _check_finite(name: str, value) -> None:
    if not np.all(np.isfinite(value)):
        raise ValueError(f"{name} contains NaN or inf")


@dataclass(frozen=True)
class BatteryState:
    """Density matrix of the ladder battery.

    ``rho`` is copied to a complex array on construction. Trace and
    Hermiticity are checked eagerly; positivity only via :meth:`validate`
    because it needs an eigensolve.
    """

    rho: np.ndarray
    energy_quantum: float = 1.0

    def __post_init__(self):
        rho = np.array(self.rho, dtype=complex)
        if rho.ndim != 2 or rho.shape[0] != rho.shape[1] or rho.shape[0] < 2:
            raise ValueError(f"rho must be square with at least 2 levels, got {rho.shape}")
        _check_finite("rho", rho)
        if not self.energy_quantum > 0:
            raise ValueError("energy_quantum must be positive")
        tr = np.trace(rho).real
        if abs(tr - 1.0) > TRACE_TOL:
            raise InvariantViolation(f"trace(rho) = {tr!r}")
        herm = np.max(np.abs(rho - rho.conj().T))
        if herm > HERMITIAN_TOL:
            raise InvariantViolation(f"rho not Hermitian (max deviation {herm:.3e})")
        rho.setflags(write=False)
        object.__setattr__(self, "rho", rho)

    @property
    def num_levels_minus_one(self) -> int:
        return self.rho.shape[0] - 1

    N = num_levels_minus_one

    @property
    def dim(self) -> int:
        return self.rho.shape[0]

    @property
    def populations(self) -> np.ndarray:
        return self.rho.diagonal().real.copy()

    @property
    def levels(self) -> np.ndarray:
        return np.arange(self.dim)

    def mean_charge(self) -> float:
        return float(self.levels @ self.populations)

    def charge_variance(self) -> float:
        p = self.populations
        n = self.levels
        mean = n @ p
        return float((n * n) @ p - mean * mean)

    def energy(self) -> float:
        return self.energy_quantum * self.mean_charge()

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.rho)[0])

    def validate(self, positivity_tol: float = POSITIVITY_TOL) -> "BatteryState":
        lam = self.min_eigenvalue()
        if lam < -positivity_tol:
            raise InvariantViolation(f"negative eigenvalue {lam:.3e}")
        return self

    @classmethod
    def fock(cls, n: int, N: int, energy_quantum: float = 1.0) -> "BatteryState":
        if not 0 <= n <= N:
            raise ValueError(f"level {n} outside ladder 0..{N}")
        rho = np.zeros((N + 1, N + 1), dtype=complex)
        rho[n, n] = 1.0
        return cls(rho, energy_quantum)

    @classmethod
    def from_populations(cls, p, energy_quantum: float = 1.0) -> "BatteryState":
        return cls(np.diag(np.asarray(p, dtype=float)), energy_quantum)

    @classmethod
    def from_ket(cls, psi, energy_quantum: float = 1.0) -> "BatteryState":
        psi = np.asarray(psi, dtype=complex)
        psi = psi / np.linalg.norm(psi)
        return cls(np.outer(psi, psi.conj()), energy_quantum)


@dataclass(frozen=True)
class QubitSpec:
    """Charging qubit ``q|g><g| + (1-q)|e><e| + c sqrt(q(1-q)) (e^{ia}|e><g| + h.c.)``."""

    q: float
    c: float = 0.0
    alpha: float = 0.0

    def __post_init__(self):
        _check_finite("qubit parameters", [self.q, self.c, self.alpha])
        if not 0.0 <= self.q <= 1.0:
            raise ValueError(f"q must lie in [0, 1], got {self.q}")
        if not 0.0 <= self.c <= 1.0:
            raise ValueError(f"c must lie in [0, 1], got {self.c}")

    @property
    def coherence(self) -> complex:
        """Matrix element <e|rho_Q|g>."""
        return self.c * math.sqrt(self.q * (1.0 - self.q)) * complex(math.cos(self.alpha), math.sin(self.alpha))

    def density_matrix(self) -> np.ndarray:
        z = self.coherence
        return np.array([[self.q, z.conjugate()], [z, 1.0 - self.q]], dtype=complex)

    def eigenvalues(self) -> tuple[float, float]:
        r = math.sqrt((self.q - 0.5) ** 2 + self.c**2 * self.q * (1.0 - self.q))
        return 0.5 - r, 0.5 + r

    def energy(self, energy_quantum: float = 1.0) -> float:
        return energy_quantum * (1.0 - self.q)

    def purity(self) -> float:
        lo, hi = self.eigenvalues()
        return lo * lo + hi * hi

    def ergotropy(self, energy_quantum: float = 1.0) -> float:
        from qbatt.thermo import qubit_ergotropy

        return qubit_ergotropy(self.q, self.c, energy_quantum)


@dataclass(frozen=True)
class CollisionConfig:
    """One collision: exchange coupling ``g`` switched on for ``tau = theta/g``."""

    theta: float
    g: float = 1.0
    energy_quantum: float = 1.0

    def __post_init__(self):
        _check_finite("collision parameters", [self.theta, self.g, self.energy_quantum])
        if self.theta < 0:
            raise ValueError("theta must be non-negative")
        if not self.g > 0:
            raise ValueError("g must be positive")
        if not self.energy_quantum > 0:
            raise ValueError("energy_quantum must be positive")

    @property
    def tau(self) -> float:
        return self.theta / self.g

    @property
    def p_theta(self) -> float:
        return math.sin(self.theta) ** 2

    def drift(self, q: float) -> float:
        return self.p_theta * (1.0 - 2.0 * q)

    def rabi(self, q: float) -> float:
        return math.sqrt(q * (1.0 - q)) * math.sin(2.0 * self.theta)


def jump_probability(theta: float) -> float:
    return math.sin(theta) ** 2


def drift(q: float, theta: float) -> float:
    return jump_probability(theta) * (1.0 - 2.0 * q)


def rabi(q: float, theta: float) -> float:
    return math.sqrt(q * (1.0 - q)) * math.sin(2.0 * theta)


@dataclass(frozen=True)
class TraceRecord:
    k: int
    mean_charge: float
    variance: float
    energy: float
    ergotropy: float | None
    dephased_ergotropy: float | None
    power: float | None
    efficiency: float | None


@dataclass
class EvolutionTrace:
    """Observables recorded along a charging run.

    ``power`` and ``efficiency`` are ``None`` where undefined (k = 0, or a
    zero-ergotropy qubit); ergotropy fields are ``None`` when not requested.
    """

    records: list[TraceRecord] = field(default_factory=list)

    def append(self, record: TraceRecord) -> None:
        if self.records and record.k <= self.records[-1].k:
            raise ValueError("trace records must have strictly increasing k")
        self.records.append(record)

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def __getitem__(self, i):
        return self.records[i]

    def column(self, name: str) -> np.ndarray:
        return np.array([np.nan if getattr(r, name) is None else getattr(r, name) for r in self.records], dtype=float)

    @property
    def k(self) -> np.ndarray:
        return np.array([r.k for r in self.records], dtype=int)

    def at(self, k: int) -> TraceRecord:
        for r in self.records:
            if r.k == k:
                return r
        raise KeyError(f"no record at k={k}")
