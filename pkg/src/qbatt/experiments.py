"""Batch drivers that emit the data behind each figure as CSV.

Every command takes an :class:`ExperimentConfig`, an output directory and a
worker count, writes its CSV files, and returns a dict of summary values
that ends up in the run manifest. Sweep cells are independent and are
merged in config order, so output bytes do not depend on ``threads``.
"""

from __future__ import annotations

import csv
import math
import os
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from qbatt import thermo
from qbatt.analysis import asymptotic_value
from qbatt.coherent import k_estimate, peak_prediction
from qbatt.collision import CollisionMap, evolve
from qbatt.config import ExperimentConfig
from qbatt.model import BatteryState, CollisionConfig, QubitSpec

UNDEFINED = "undefined"


def fmt(x) -> str:
    if x is None:
        return UNDEFINED
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    if isinstance(x, str):
        return x
    x = float(x)
    if math.isnan(x):
        return UNDEFINED
    return format(x, ".17g")


class CsvSink:
    """Collects the CSV files one command writes."""

    def __init__(self, out_dir, config: ExperimentConfig):
        self.out_dir = Path(out_dir)
        self.out_dir.mkdir(parents=True, exist_ok=True)
        self.config = config
        self.files: list[str] = []

    def write(self, name: str, header: list[str], rows) -> Path:
        path = self.out_dir / name
        with open(path, "w", newline="", encoding="utf-8") as fh:
            fh.write(f"# config_hash={self.config.hash()} experiment={self.config.experiment_name}\n")
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for row in rows:
                w.writerow([fmt(x) for x in row])
        self.files.append(name)
        return path


def _map(fn, items, threads: int):
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=min(threads, len(items))) as pool:
        return list(pool.map(fn, items))


def _run_populations(args):
    N, n0, q, c, alpha, theta, ks = args
    step = CollisionMap(N, QubitSpec(q, c, alpha), CollisionConfig(theta))
    m = BatteryState.fock(n0, N).rho.copy()
    ks = sorted(ks)
    out = {}
    k = 0
    for target in ks:
        while k < target:
            m = step(m)
            k += 1
        out[target] = m.diagonal().real.copy()
    return out


def cmd_distribution(cfg: ExperimentConfig, out_dir, threads: int = 1) -> dict:
    """Snapshots of P(n, k) for incoherent and coherent charging with the predicted means and branches."""
    sink = CsvSink(out_dir, cfg)
    jobs = [(cfg.N, cfg.n0, cfg.q, c, cfg.alpha, cfg.theta, cfg.k_grid) for c in (0.0, cfg.c)]
    inc, coh = _map(_run_populations, jobs, threads)
    v = CollisionConfig(cfg.theta).drift(cfg.q)
    rows = []
    for k in sorted(cfg.k_grid):
        pred = peak_prediction(k, cfg.n0, cfg.q, cfg.c, cfg.theta, cfg.N)
        for n in range(cfg.N + 1):
            rows.append((k, n, inc[k][n], coh[k][n], cfg.n0 + v * k, pred.n_plus, pred.n_minus))
    sink.write(
        "distribution.csv",
        ["k", "n", "P_inc", "P_coh", "mean_inc_pred", "n_plus_pred", "n_minus_pred"],
        rows,
    )
    return {"files": sink.files}


def _run_trace(args):
    N, n0, q, c, theta, k_max, every = args
    trace, _ = evolve(BatteryState.fock(n0, N), QubitSpec(q, c), CollisionConfig(theta), k_max, every)
    return trace


def cmd_energy_ergotropy(cfg: ExperimentConfig, out_dir, threads: int = 1) -> dict:
    """Energy, ergotropy and dephased ergotropy against k for each q, incoherent and coherent."""
    sink = CsvSink(out_dir, cfg)
    jobs = [(cfg.N, cfg.n0, q, c, cfg.theta, cfg.k_max, cfg.record_every) for q in cfg.q_grid for c in (0.0, cfg.c)]
    traces = _map(_run_trace, jobs, threads)
    rows = []
    summary = {}
    for i, q in enumerate(cfg.q_grid):
        inc, coh = traces[2 * i], traces[2 * i + 1]
        try:
            k_est = k_estimate(cfg.N, q, cfg.c, cfg.theta)
        except ValueError:
            k_est = None
        for a, b in zip(inc, coh):
            rows.append((q, a.k, a.energy, b.energy, a.ergotropy, b.ergotropy, b.dephased_ergotropy, k_est))
        e = coh.column("energy")
        summary[f"q={q!r}"] = {"k_est": k_est, "k_energy_max_coh": int(coh.k[int(np.argmax(e))]), "energy_max_coh": float(e.max())}
    sink.write(
        "energy_ergotropy.csv",
        ["q", "k", "energy_inc", "energy_coh", "ergotropy_inc", "ergotropy_coh", "dephased_ergotropy_coh", "k_est"],
        rows,
    )
    return {"files": sink.files, "runs": summary}


def _efficiency_cell(args):
    N, q, c, theta, k_max, every = args
    if c == 0.0 and thermo.qubit_ergotropy(q, 0.0) <= 1e-15:
        return None
    trace, _ = evolve(BatteryState.fock(0, N), QubitSpec(q, c), CollisionConfig(theta), k_max, every)
    return [(r.k, r.efficiency) for r in trace if r.k >= 1]


def cmd_efficiency_map(cfg: ExperimentConfig, out_dir, threads: int = 1) -> dict:
    """Efficiency over the (k, q) grid for c = 0 and c = cfg.c, with the optimal-k and k_est curves."""
    sink = CsvSink(out_dir, cfg)
    cs = (0.0, cfg.c)
    jobs = [(cfg.N, q, c, cfg.theta, cfg.k_max, cfg.record_every) for c in cs for q in cfg.q_grid]
    cells = _map(_efficiency_cell, jobs, threads)
    rows, curve = [], []
    best = {}
    ks = [k for k in range(1, cfg.k_max + 1) if k % cfg.record_every == 0 or k == cfg.k_max]
    for (N, q, c, theta, _, _), cell in zip(jobs, cells):
        if cell is None:
            rows.extend((c, q, k, UNDEFINED) for k in ks)
            continue
        rows.extend((c, q, k, eta) for k, eta in cell)
        k_opt, eta_opt = max(cell, key=lambda kv: kv[1])
        try:
            k_est = k_estimate(N, q, c, theta)
        except ValueError:
            k_est = None
        curve.append((c, q, k_opt, eta_opt, k_est))
        if eta_opt > best.get(c, (-1.0,))[0]:
            best[c] = (eta_opt, q, k_opt)
    sink.write("efficiency_map.csv", ["c", "q", "k", "efficiency"], rows)
    sink.write("efficiency_optimum.csv", ["c", "q", "k_opt", "efficiency_max", "k_est"], curve)
    eta_max_all = max((r[3] for r in rows if r[3] != UNDEFINED), default=float("nan"))
    return {
        "files": sink.files,
        "max_efficiency": {repr(c): {"eta": e, "q": q, "k": k} for c, (e, q, k) in best.items()},
        "max_efficiency_any": eta_max_all,
    }


def simulated_incoherent_power(theta: float, N: int = 4, k: int = 1) -> float:
    """Power of ``k`` fully excited qubits charging an empty ladder, from the exact map."""
    cc = CollisionConfig(theta)
    step = CollisionMap(N, QubitSpec(0.0), cc)
    m = BatteryState.fock(0, N).rho.copy()
    for _ in range(k):
        m = step(m)
    return thermo.power(float(np.arange(N + 1) @ m.diagonal().real), k, cc)


def locate_incoherent_optimum(theta_grid=None) -> tuple[float, float]:
    from scipy.optimize import minimize_scalar

    grid = np.linspace(0.05, 1.55, 151) if theta_grid is None or len(theta_grid) == 0 else np.asarray(theta_grid)
    vals = [simulated_incoherent_power(t) for t in grid]
    i = int(np.argmax(vals))
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, grid.size - 1)]
    res = minimize_scalar(lambda t: -simulated_incoherent_power(t), bounds=(lo, hi), method="bounded", options={"xatol": 1e-10})
    return float(res.x), float(-res.fun)


def _power_run(args):
    label, N, q, theta, ktheta_max, ktheta_step = args
    k_max = int(math.ceil(ktheta_max / theta))
    every = max(1, int(round(ktheta_step / theta)))
    k20 = int(round(20.0 / theta))
    trace, _ = evolve(
        BatteryState.fock(0, N), QubitSpec(q, 1.0), CollisionConfig(theta), k_max, every, record_at=[k20] if k20 <= k_max else None
    )
    return label, q, theta, trace


def power_runs(cfg: ExperimentConfig, theta_max: float) -> list[tuple]:
    runs = [
        ("coh_q0.26_thmax/2", cfg.N, 0.26, theta_max / 2, cfg.ktheta_max, cfg.ktheta_step),
        ("coh_q0.38_thmax/4", cfg.N, 0.38, theta_max / 4, cfg.ktheta_max, cfg.ktheta_step),
    ]
    for th in cfg.theta_grid or [0.02]:
        runs.append((f"coh_q0.5_theta{th!r}", cfg.N, 0.5, th, cfg.ktheta_max, cfg.ktheta_step))
    return runs


def cmd_power_scan(cfg: ExperimentConfig, out_dir, threads: int = 1) -> dict:
    """Incoherent power optimum over theta and coherent power / ergotropy power against k theta."""
    sink = CsvSink(out_dir, cfg)
    theta_max, p_max = locate_incoherent_optimum()
    p_max *= cfg.g * cfg.E
    grid = np.linspace(0.05, 1.55, 151)
    sink.write(
        "power_incoherent.csv",
        ["theta", "power", "power_norm"],
        [(t, simulated_incoherent_power(t), simulated_incoherent_power(t) / p_max) for t in grid],
    )
    results = _map(_power_run, power_runs(cfg, theta_max), threads)
    rows = []
    summary = {"theta_max": theta_max, "P_max_incoherent": p_max, "runs": {}}
    for label, q, theta, trace in results:
        kt, pw = [], []
        for r in trace:
            if r.k < 1:
                continue
            erg_power = cfg.g * cfg.E * r.ergotropy / (r.k * theta)
            rows.append((label, q, theta, r.k, r.k * theta, r.power, r.power / p_max, erg_power, erg_power / p_max))
            kt.append(r.k * theta)
            pw.append(r.power)
        kt, pw = np.array(kt), np.array(pw)
        info = {"q": q, "theta": theta, "power_max": float(pw.max())}
        k20 = int(round(20.0 / theta))
        if k20 <= trace.k[-1]:
            r20 = trace.at(k20)
            info["ergotropy_fraction_at_ktheta20"] = r20.ergotropy / r20.energy
            info["power_at_ktheta20"] = r20.power
        tail = kt >= 0.4 * cfg.ktheta_max
        if tail.sum() >= 3:
            info["power_asymptotic"] = asymptotic_value(kt[tail], pw[tail])
            info["ratio_to_incoherent"] = info["power_asymptotic"] / p_max
        summary["runs"][label] = info
    sink.write(
        "power_coherent.csv",
        ["run", "q", "theta", "k", "ktheta", "power", "power_norm", "ergotropy_power", "ergotropy_power_norm"],
        rows,
    )
    summary["files"] = sink.files
    return summary


def free_energy_ratio_grid(qs, kTs, c: float, E: float = 1.0) -> np.ndarray:
    out = np.empty((len(qs), len(kTs)))
    for i, q in enumerate(qs):
        e_q = thermo.qubit_ergotropy(q, c, E)
        for j, kT in enumerate(kTs):
            out[i, j] = e_q / thermo.free_energy_diff(q, c, E, kT)
    return out


def cmd_free_energy_ratio(cfg: ExperimentConfig, out_dir, threads: int = 1) -> dict:
    """Qubit ergotropy over free-energy cost on the (q, kT) grid for c = 0, c = 1 and their difference."""
    sink = CsvSink(out_dir, cfg)
    qs, kTs = list(cfg.q_grid), list(cfg.kT_grid)
    r0 = free_energy_ratio_grid(qs, kTs, 0.0, cfg.E)
    r1 = free_energy_ratio_grid(qs, kTs, 1.0, cfg.E)
    header = ["q"] + [f"kT={t!r}" for t in kTs]
    for name, mat in (("free_energy_ratio_c0.csv", r0), ("free_energy_ratio_c1.csv", r1), ("free_energy_ratio_diff.csv", r1 - r0)):
        sink.write(name, header, [(q, *row) for q, row in zip(qs, mat)])
    return {"files": sink.files, "max_ratio": float(max(r0.max(), r1.max())), "min_ratio_c1": float(r1.min())}


COMMANDS = {
    "distribution": cmd_distribution,
    "energy-ergotropy": cmd_energy_ergotropy,
    "efficiency-map": cmd_efficiency_map,
    "power-scan": cmd_power_scan,
    "free-energy-ratio": cmd_free_energy_ratio,
}


def default_threads() -> int:
    return os.cpu_count() or 1


def ergotropy_plateau(
    N: int,
    q: float,
    c: float,
    theta: float,
    window: int = 500,
    rel_tol: float = 1e-4,
    confirm: int = 4,
    k_cap: int = 200_000,
) -> dict:
    """Run from the empty battery until the ergotropy settles.

    Converged once the relative change over each of ``confirm`` consecutive
    ``window``-step blocks stays below ``rel_tol``. Returns the collision
    count and the plateau ergotropy and dephased ergotropy (``E = 1``).
    """
    step = CollisionMap(N, QubitSpec(q, c), CollisionConfig(theta))
    m = BatteryState.fock(0, N).rho.copy()
    prev = None
    calm = 0
    k = 0
    history = []
    while k < k_cap:
        for _ in range(window):
            m = step(m)
        k += window
        erg = thermo.ergotropy(0.5 * (m + m.conj().T), 1.0, method="lapack")
        history.append((k, erg))
        if prev is not None and abs(erg - prev) <= rel_tol * abs(erg):
            calm += 1
            if calm >= confirm:
                return {"k": k, "ergotropy": erg, "dephased_ergotropy": thermo.dephased_ergotropy(m, 1.0), "converged": True, "history": history}
        else:
            calm = 0
        prev = erg
    return {"k": k, "ergotropy": erg, "dephased_ergotropy": thermo.dephased_ergotropy(m, 1.0), "converged": False, "history": history}
