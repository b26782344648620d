"""Branch positions and velocities of coherent charging against the analytic predictions.

Prints the simulated forward and backward maxima next to n0 + (v +- c Omega) k,
and the forward-peak velocity of an empty battery relative to the incoherent drift.
"""

from __future__ import annotations

import math

import numpy as np

from qbatt.analysis import branch_peaks, fit_slope, forward_peak
from qbatt.coherent import coherent_distribution, peak_prediction
from qbatt.collision import CollisionMap
from qbatt.model import BatteryState, CollisionConfig, QubitSpec


def main() -> None:
    q, c, theta = 0.25, 1.0, math.pi / 4
    n0, N = 200, 400
    levels = np.arange(N + 1)
    print("k     n-_sim  n-_pred   n+_sim  n+_pred")
    for k in (40, 80, 120):
        p = coherent_distribution(n0, k, q, c, theta, levels)
        pred = peak_prediction(k, n0, q, c, theta)
        lo, hi = branch_peaks(p, n0 + CollisionConfig(theta).drift(q) * k)
        print(f"{k:<5} {lo:6d}  {pred.n_minus:7.2f}   {hi:6d}  {pred.n_plus:7.2f}")

    ks = np.arange(40, 201, 10)
    peaks = [forward_peak(coherent_distribution(0, int(k), q, c, theta, np.arange(401))) for k in ks]
    # the infinite-ladder form ignores the empty level; use the exact map for the empty battery
    step = CollisionMap(200, QubitSpec(q, c), CollisionConfig(theta))
    m = BatteryState.fock(0, 200).rho.copy()
    exact = []
    k = 0
    for target in ks:
        while k < target:
            m = step(m)
            k += 1
        exact.append(forward_peak(m.diagonal().real))
    v = CollisionConfig(theta).drift(q)
    om = CollisionConfig(theta).rabi(q)
    print(f"forward velocity, empty battery: {fit_slope(ks, exact):.4f} (v + Omega = {v + om:.4f}, v = {v:.4f})")
    print(f"ratio to incoherent drift: {fit_slope(ks, exact) / v:.3f}; excess Omega/v = {om / v:.3f}")
    print(f"infinite-ladder forward velocity from n0 = 0: {fit_slope(ks, peaks):.4f}")


if __name__ == "__main__":
    main()
