"""Exact repeated-collision dynamics of the ladder battery and its generators.

One collision applies ``U = exp[-i theta (A|e><g| + A^dag|g><e|)]`` to the
battery-qubit product and traces out the qubit. On the finite ladder the
unitary leaves ``|0,g>`` and ``|N,e>`` untouched, so the four qubit blocks of
``U`` are

    <g|U|g> = cos(theta) 1 + (1 - cos(theta)) |0><0|
    <e|U|e> = cos(theta) 1 + (1 - cos(theta)) |N><N|
    <e|U|g> = -i sin(theta) A,     <g|U|e> = -i sin(theta) A^dag

with ``A = sum_n |n-1><n|``. Every block is diagonal or a single index shift,
which gives an O(N^2) elementwise update (:class:`CollisionMap`). The dense
2(N+1)-dimensional conjugation is kept as an oracle (:func:`collide_dense`).
"""

from __future__ import annotations

import math

import numpy as np

from qbatt.model import (
    BatteryState,
    CollisionConfig,
    EvolutionTrace,
    InvariantViolation,
    QubitSpec,
    TraceRecord,
)


def _matrix(rho) -> np.ndarray:
    return rho.rho if isinstance(rho, BatteryState) else np.asarray(rho, dtype=complex)


def _check_inputs(rho: np.ndarray, cfg: CollisionConfig, energy_quantum: float | None = None) -> None:
    if not np.all(np.isfinite(rho)):
        raise ValueError("rho contains NaN or inf")
    if energy_quantum is not None and not math.isclose(energy_quantum, cfg.energy_quantum, rel_tol=1e-12):
        raise ValueError(
            f"battery energy quantum {energy_quantum} does not match collision energy {cfg.energy_quantum}"
        )


class CollisionMap:
    """Precomputed coefficients of one collision for a fixed ladder size.

    Calling the instance on an ``(N+1, N+1)`` array returns the updated array.
    """

    def __init__(self, N: int, qubit: QubitSpec, cfg: CollisionConfig):
        if N < 1:
            raise ValueError("ladder needs N >= 1")
        self.N = N
        self.qubit = qubit
        self.cfg = cfg
        q = qubit.q
        s = math.sin(cfg.theta)
        co = math.cos(cfg.theta)
        d_g = np.full(N + 1, co)
        d_g[0] = 1.0
        d_e = np.full(N + 1, co)
        d_e[-1] = 1.0
        # no-jump branches: <a|U|a> rho <a|U|a>^dag weighted by the qubit populations
        self._stay = q * np.outer(d_g, d_g) + (1.0 - q) * np.outer(d_e, d_e)
        self._down = q * s * s
        self._up = (1.0 - q) * s * s
        z = qubit.coherence  # <e|rho_Q|g>
        self.coherent = abs(z) * abs(s) > 0.0
        # off-diagonal qubit terms; the remaining two are the Hermitian conjugates
        #   X[n, m] = conj(z) i s d_g[n] rho[n, m-1]  -  conj(z) i s rho[n+1, m] d_e[m]
        self._col = (1j * s * z.conjugate()) * d_g[:, None]
        self._row = (-1j * s * z.conjugate()) * d_e[None, :]

    def __call__(self, rho: np.ndarray) -> np.ndarray:
        out = self._stay * rho
        out[:-1, :-1] += self._down * rho[1:, 1:]
        out[1:, 1:] += self._up * rho[:-1, :-1]
        if self.coherent:
            x = np.zeros_like(rho)
            x[:, 1:] = self._col * rho[:, :-1]
            x[:-1, :] += self._row * rho[1:, :]
            out += x
            out += x.conj().T
        return out


def collide_exact(rho: BatteryState, qubit: QubitSpec, cfg: CollisionConfig) -> BatteryState:
    """Battery state after one collision with a fresh qubit."""
    m = _matrix(rho)
    E = rho.energy_quantum if isinstance(rho, BatteryState) else cfg.energy_quantum
    _check_inputs(m, cfg, E)
    return BatteryState(CollisionMap(m.shape[0] - 1, qubit, cfg)(m), E)


def collision_unitary(N: int, theta: float) -> np.ndarray:
    """Dense ``U_theta`` on battery (x) qubit, built from its closed finite-ladder expansion.

    Basis index is ``2 n + a`` with ``a = 0`` for ``|g>`` and ``a = 1`` for ``|e>``.
    """
    dim = N + 1
    A = np.diag(np.ones(N), 1)
    eg = np.array([[0.0, 0.0], [1.0, 0.0]])
    ge = eg.T
    boundary = np.zeros((2 * dim, 2 * dim))
    boundary[0, 0] = 1.0
    boundary[2 * N + 1, 2 * N + 1] = 1.0
    return (
        math.cos(theta) * np.eye(2 * dim)
        - 1j * math.sin(theta) * (np.kron(A, eg) + np.kron(A.T, ge))
        + (1.0 - math.cos(theta)) * boundary
    )


def collide_dense(rho, qubit: QubitSpec, cfg: CollisionConfig, return_qubit: bool = False):
    """Explicit ``tr_Q[U (rho_B (x) rho_Q) U^dag]``; O(N^3), meant as a test oracle."""
    m = _matrix(rho)
    _check_inputs(m, cfg)
    dim = m.shape[0]
    U = collision_unitary(dim - 1, cfg.theta)
    joint = U @ np.kron(m, qubit.density_matrix()) @ U.conj().T
    joint = joint.reshape(dim, 2, dim, 2)
    rho_b = np.einsum("iaja->ij", joint)
    if return_qubit:
        return rho_b, np.einsum("iaib->ab", joint)
    return rho_b


def _ladder(N: int) -> np.ndarray:
    return np.diag(np.ones(N, dtype=complex), 1)


def dissipator(L: np.ndarray, rho: np.ndarray) -> np.ndarray:
    """``D[L] rho = L rho L^dag - {L^dag L, rho}/2``."""
    Ld = L.conj().T
    LdL = Ld @ L
    return L @ rho @ Ld - 0.5 * (LdL @ rho + rho @ LdL)


def _projector(N: int, n: int) -> np.ndarray:
    P = np.zeros((N + 1, N + 1), dtype=complex)
    P[n, n] = 1.0
    return P


def lindblad_incoherent(rho, q: float, cfg: CollisionConfig) -> np.ndarray:
    """Change of the battery state per collision with a diagonal qubit (population ``q`` in ``|g>``)."""
    m = _matrix(rho)
    _check_inputs(m, cfg)
    if not 0.0 <= q <= 1.0:
        raise ValueError("q must lie in [0, 1]")
    N = m.shape[0] - 1
    A = _ladder(N)
    s2 = math.sin(cfg.theta) ** 2
    b2 = (1.0 - math.cos(cfg.theta)) ** 2
    P0, PN = _projector(N, 0), _projector(N, N)
    return s2 * (q * dissipator(A, m) + (1.0 - q) * dissipator(A.conj().T, m)) + b2 * (
        q * dissipator(P0, m) + (1.0 - q) * dissipator(PN, m)
    )


def lindblad_coherent(rho, q: float, alpha: float, cfg: CollisionConfig) -> np.ndarray:
    """Change of the battery state per collision with the pure qubit ``sqrt(q)|g> + e^{i alpha} sqrt(1-q)|e>``."""
    m = _matrix(rho)
    _check_inputs(m, cfg)
    if not 0.0 <= q <= 1.0:
        raise ValueError("q must lie in [0, 1]")
    N = m.shape[0] - 1
    A = _ladder(N)
    Ad = A.conj().T
    s, co = math.sin(cfg.theta), math.cos(cfg.theta)
    phase = complex(math.cos(alpha), math.sin(alpha))
    P0, PN = _projector(N, 0), _projector(N, N)
    drive = math.sqrt(q * (1.0 - q)) * s * co * (A * phase.conjugate() + Ad * phase)
    L_down = math.sqrt(q) * s * A + 1j * phase * math.sqrt(1.0 - q) * (1.0 - co) * PN
    L_up = math.sqrt(1.0 - q) * s * Ad + 1j * phase.conjugate() * math.sqrt(q) * (1.0 - co) * P0
    return -1j * (drive @ m - m @ drive) + dissipator(L_down, m) + dissipator(L_up, m)


def generator(rho, qubit: QubitSpec, cfg: CollisionConfig) -> np.ndarray:
    """Mixture ``c L_coh + (1 - c) L_inc``; equals one exact collision minus the identity."""
    out = (1.0 - qubit.c) * lindblad_incoherent(rho, qubit.q, cfg)
    if qubit.c > 0.0:
        out = out + qubit.c * lindblad_coherent(rho, qubit.q, qubit.alpha, cfg)
    return out


def _record(rho: np.ndarray, k: int, qubit: QubitSpec, cfg: CollisionConfig, with_ergotropy: bool, check_positivity: bool):
    from qbatt import thermo

    E = cfg.energy_quantum
    p = rho.diagonal().real
    n = np.arange(p.size)
    mean = float(n @ p)
    var = float((n * n) @ p - mean * mean)
    erg = deph = eff = pw = None
    if with_ergotropy or check_positivity:
        w = np.linalg.eigvalsh(rho)
        if check_positivity and w[0] < -1e-6:
            raise InvariantViolation(f"positivity lost at k={k}: smallest eigenvalue {w[0]:.3e}")
        if with_ergotropy:
            erg = E * float(n @ p - n @ w[::-1])
            deph = thermo.dephased_ergotropy(rho, E)
    if k >= 1:
        if cfg.theta > 0:
            pw = thermo.power(mean, k, cfg)
        if erg is not None:
            try:
                eff = thermo.efficiency(erg, k, qubit, E)
            except thermo.UndefinedEfficiency:
                eff = None
    return TraceRecord(k, mean, var, E * mean, erg, deph, pw, eff)


def evolve(
    rho0: BatteryState,
    qubit: QubitSpec,
    cfg: CollisionConfig,
    k_max: int,
    record_every: int = 1,
    *,
    with_ergotropy: bool = True,
    check_positivity: bool = False,
    record_at=None,
) -> tuple[EvolutionTrace, BatteryState]:
    """Apply ``k_max`` collisions, recording observables every ``record_every`` steps.

    ``record_at`` optionally adds specific collision indices to the record set.
    Trace drift is checked every step; Hermiticity at each record. With
    ``check_positivity`` the spectrum at each record must stay above -1e-6.
    """
    if k_max < 0:
        raise ValueError("k_max must be >= 0")
    if record_every < 1:
        raise ValueError("record_every must be >= 1")
    m = np.array(_matrix(rho0), dtype=complex)
    E = rho0.energy_quantum if isinstance(rho0, BatteryState) else cfg.energy_quantum
    _check_inputs(m, cfg, E)
    extra = set(int(k) for k in record_at) if record_at is not None else set()
    step = CollisionMap(m.shape[0] - 1, qubit, cfg)
    trace = EvolutionTrace()
    trace.append(_record(m, 0, qubit, cfg, with_ergotropy, check_positivity))
    for k in range(1, k_max + 1):
        m = step(m)
        tr = np.trace(m).real
        if abs(tr - 1.0) > 1e-6:
            raise InvariantViolation(f"trace drifted to {tr!r} at k={k}")
        if k % record_every == 0 or k == k_max or k in extra:
            herm = float(np.max(np.abs(m - m.conj().T)))
            if herm > 1e-9:
                raise InvariantViolation(f"Hermiticity lost at k={k} (deviation {herm:.3e})")
            trace.append(_record(m, k, qubit, cfg, with_ergotropy, check_positivity))
    return trace, BatteryState(0.5 * (m + m.conj().T), E)


def energy_curve(rho0: BatteryState, qubit: QubitSpec, cfg: CollisionConfig, k_max: int) -> np.ndarray:
    """Mean charge after every collision ``0..k_max`` (no eigensolves)."""
    m = np.array(_matrix(rho0), dtype=complex)
    step = CollisionMap(m.shape[0] - 1, qubit, cfg)
    n = np.arange(m.shape[0])
    out = np.empty(k_max + 1)
    out[0] = n @ m.diagonal().real
    for k in range(1, k_max + 1):
        m = step(m)
        out[k] = n @ m.diagonal().real
    return out
