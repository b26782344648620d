"""Cross-oracle checks run by ``qbatt validate``.

Each check compares two independent routes to the same quantity and
reports the worst deviation against a tolerance taken from the config.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from qbatt import thermo
from qbatt.bessel import bessel_i, bessel_i_quadrature
from qbatt.coherent import bimodal_gaussian_average, coarse_grain, coherent_distribution
from qbatt.collision import CollisionMap, collide_dense, collide_exact, generator
from qbatt.config import ExperimentConfig
from qbatt.eigen import jacobi_eigh
from qbatt.model import BatteryState, CollisionConfig, QubitSpec
from qbatt.oracles import best_random_extraction, random_density_matrix, random_hermitian
from qbatt.walk import ChargeDistribution, moments_analytic, total_variation, walk_evolve, walk_moments_trajectory


@dataclass(frozen=True)
class CheckResult:
    name: str
    deviation: float
    tolerance: float
    detail: str = ""

    @property
    def passed(self) -> bool:
        return bool(self.deviation <= self.tolerance)

    def as_dict(self) -> dict:
        return {"name": self.name, "deviation": self.deviation, "tolerance": self.tolerance, "passed": self.passed, "detail": self.detail}


def random_collision_case(rng: np.random.Generator, max_N: int = 8):
    N = int(rng.integers(1, max_N + 1))
    rho = random_density_matrix(N + 1, rng)
    qubit = QubitSpec(float(rng.uniform()), float(rng.uniform()), float(rng.uniform(-math.pi, math.pi)))
    cfg = CollisionConfig(float(rng.uniform(0.0, math.pi)))
    return rho, qubit, cfg


def check_generator(cfg: ExperimentConfig, generator_fn: Callable = generator) -> CheckResult:
    rng = np.random.default_rng(cfg.seed)
    worst = 0.0
    for _ in range(cfg.validate_trials):
        rho, qubit, cc = random_collision_case(rng)
        exact = collide_exact(BatteryState(rho), qubit, cc).rho
        worst = max(worst, float(np.max(np.abs(rho + generator_fn(rho, qubit, cc) - exact))))
    return CheckResult("generator_vs_exact_map", worst, cfg.tol_generator, f"{cfg.validate_trials} random cases, N<=8")


def check_dense_unitary(cfg: ExperimentConfig) -> CheckResult:
    rng = np.random.default_rng(cfg.seed + 1)
    worst = 0.0
    trials = max(1, cfg.validate_trials // 10)
    for _ in range(trials):
        rho, qubit, cc = random_collision_case(rng, max_N=16)
        fast = CollisionMap(rho.shape[0] - 1, qubit, cc)(rho)
        worst = max(worst, float(np.max(np.abs(fast - collide_dense(rho, qubit, cc)))))
    return CheckResult("elementwise_map_vs_dense_unitary", worst, cfg.tol_generator, f"{trials} random cases, N<=16")


def check_walk_diagonal(cfg: ExperimentConfig) -> CheckResult:
    N, n0, k, q, theta = 50, 25, 200, 0.3, 0.7
    cc = CollisionConfig(theta)
    walk = walk_evolve(ChargeDistribution.delta(n0, N), q, cc.p_theta, k).probabilities
    step = CollisionMap(N, QubitSpec(q), cc)
    m = BatteryState.fock(n0, N).rho.copy()
    for _ in range(k):
        m = step(m)
    dev = float(np.max(np.abs(walk - m.diagonal().real)))
    return CheckResult("walk_vs_map_diagonal", dev, cfg.tol_walk, f"N={N}, k={k}, q={q}, theta={theta}")


def check_moments(cfg: ExperimentConfig) -> CheckResult:
    N, n0, q, theta, k_max = 400, 100, 0.25, math.pi / 4, 200
    p = math.sin(theta) ** 2
    traj = walk_moments_trajectory(ChargeDistribution.delta(n0, N), q, p, k_max)
    worst = 0.0
    for k in range(k_max + 1):
        mean, var = moments_analytic(n0, 0.0, q, p, k)
        worst = max(worst, abs(traj[k, 0] - mean), abs(traj[k, 1] - var))
    return CheckResult("walk_moments_vs_closed_form", float(worst), cfg.tol_moments, f"N={N}, n0={n0}, k<={k_max}")


def check_phase_space(cfg: ExperimentConfig) -> CheckResult:
    worst = 0.0
    N = 120
    for n0, k, q, c, theta, alpha in ((60, 40, 0.25, 1.0, math.pi / 4, 0.0), (60, 30, 0.4, 0.6, 0.9, 1.3)):
        step = CollisionMap(N, QubitSpec(q, c, alpha), CollisionConfig(theta))
        m = BatteryState.fock(n0, N).rho.copy()
        for _ in range(k):
            m = step(m)
        levels = np.arange(N + 1)
        chi = coherent_distribution(n0, k, q, c, theta, levels, alpha)
        worst = max(worst, float(np.max(np.abs(chi - m.diagonal().real))))
    return CheckResult("phase_space_vs_map", worst, cfg.tol_phase_space, "boundary-free runs, N=120")


def check_bimodal(cfg: ExperimentConfig) -> CheckResult:
    N, n0, k, q, theta = 400, 100, 60, 0.25, math.pi / 4
    step = CollisionMap(N, QubitSpec(q, 1.0), CollisionConfig(theta))
    m = BatteryState.fock(n0, N).rho.copy()
    for _ in range(k):
        m = step(m)
    model = bimodal_gaussian_average(np.arange(N + 1), k, n0, q, 1.0, theta)
    tv = total_variation(coarse_grain(m.diagonal().real), model / model.sum())
    return CheckResult("bimodal_average_vs_map_tv", tv, cfg.tol_analytics_tv, f"N={N}, n0={n0}, k={k}, 3-level coarse-graining")


def check_ergotropy(cfg: ExperimentConfig) -> CheckResult:
    """Positive deviation means a random unitary beat the closed form."""
    rng = np.random.default_rng(cfg.seed + 2)
    worst = -np.inf
    for N in range(1, 5):
        for rank in (1, N + 1):
            rho = random_density_matrix(N + 1, rng, rank)
            closed = thermo.ergotropy(rho, 1.0, method="jacobi")
            found = best_random_extraction(rho, cfg.unitary_trials, rng)
            worst = max(worst, found - closed)
    return CheckResult("ergotropy_vs_random_unitaries", float(worst), cfg.tol_ergotropy, f"{cfg.unitary_trials} Haar unitaries per state, N<=4")


def check_free_energy(cfg: ExperimentConfig) -> CheckResult:
    worst = -np.inf
    grid = np.linspace(0.0, 1.0, 30)
    for q in grid:
        for c in grid:
            for kT in np.linspace(0.02, 3.0, 30):
                worst = max(worst, thermo.qubit_ergotropy(q, c) - thermo.free_energy_diff(q, c, 1.0, kT))
    return CheckResult("ergotropy_below_free_energy", float(worst), 1e-12, "30^3 grid over (q, c, kT)")


def check_bessel(cfg: ExperimentConfig) -> CheckResult:
    worst = 0.0
    for nu in (-0.25, 0.25):
        for x in (1e-3, 0.1, 1.0, 5.0, 14.9, 15.1, 40.0, 200.0, 650.0):
            ref = bessel_i_quadrature(nu, x)
            worst = max(worst, abs(bessel_i(nu, x) - ref) / abs(ref))
    return CheckResult("bessel_vs_quadrature", worst, cfg.tol_bessel, "nu=+-1/4, 1e-3<=x<=650, relative")


def check_eigen(cfg: ExperimentConfig) -> CheckResult:
    rng = np.random.default_rng(cfg.seed + 3)
    worst = 0.0
    for _ in range(20):
        m = random_hermitian(8, rng)
        w = jacobi_eigh(m, vectors=False)
        roots = np.sort(np.roots(np.poly(m)).real)
        worst = max(worst, float(np.max(np.abs(w - roots))))
        worst = max(worst, float(np.max(np.abs(w - np.linalg.eigvalsh(m)))))
    return CheckResult("jacobi_vs_charpoly_and_lapack", worst, cfg.tol_eigen, "20 random 8x8 Hermitian matrices")


CHECKS = (
    check_generator,
    check_dense_unitary,
    check_walk_diagonal,
    check_moments,
    check_phase_space,
    check_bimodal,
    check_ergotropy,
    check_free_energy,
    check_bessel,
    check_eigen,
)


def run_checks(cfg: ExperimentConfig, generator_fn: Callable = generator) -> list[CheckResult]:
    out = []
    for fn in CHECKS:
        out.append(fn(cfg, generator_fn) if fn is check_generator else fn(cfg))
    return out


def format_table(results: list[CheckResult]) -> str:
    width = max(len(r.name) for r in results)
    lines = [f"{'check':<{width}}  {'deviation':>12}  {'tolerance':>10}  result"]
    for r in results:
        lines.append(f"{r.name:<{width}}  {r.deviation:12.3e}  {r.tolerance:10.1e}  {'PASS' if r.passed else 'FAIL'}")
    return "\n".join(lines)
