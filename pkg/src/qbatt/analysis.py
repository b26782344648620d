"""Post-processing of simulated runs: peaks, velocities, asymptotes, plateaus."""

from __future__ import annotations

import numpy as np

from qbatt.coherent import coarse_grain


def branch_peaks(p, split: float, width: int = 3) -> tuple[int, int]:
    """Positions of the coarse-grained maxima below and above ``split``."""
    pc = coarse_grain(p, width)
    s = int(round(split))
    lower = int(np.argmax(pc[:s]))
    upper = s + int(np.argmax(pc[s:]))
    return lower, upper


def forward_peak(p, width: int = 3) -> int:
    return int(np.argmax(coarse_grain(p, width)))


def fit_slope(x, y) -> float:
    return float(np.polyfit(np.asarray(x, float), np.asarray(y, float), 1)[0])


def asymptotic_value(t, y) -> float:
    """Extrapolate ``y(t) = y_inf + a/t + b/t^2`` by least squares."""
    t = np.asarray(t, float)
    A = np.column_stack([np.ones_like(t), 1.0 / t, 1.0 / t**2])
    coef, *_ = np.linalg.lstsq(A, np.asarray(y, float), rcond=None)
    return float(coef[0])


def plateau(values, window: int, rel_tol: float = 1e-4) -> tuple[int, float] | None:
    """First index after which ``values`` stays within ``rel_tol`` (relative) for ``window`` samples.

    Returns ``(index, mean over the window)`` or ``None`` when it never settles.
    """
    v = np.asarray(values, float)
    for i in range(0, v.size - window):
        seg = v[i : i + window + 1]
        ref = abs(seg[-1]) if seg[-1] != 0 else 1.0
        if (seg.max() - seg.min()) / ref < rel_tol:
            return i, float(seg.mean())
    return None

