"""Boundary-free analytics of coherent charging.

In the phase representation ``<phi|rho|phi'> = sum rho_{nn'} e^{i n' phi' - i n phi} / 2pi``
with ``Phi = (phi + phi')/2`` and ``varphi = phi' - phi``, one collision on
the infinite ladder multiplies ``chi(Phi, varphi) = <Phi - varphi/2|rho|Phi + varphi/2>``
by a scalar factor. The square ``(Phi, varphi) in (-pi, pi]^2`` is a
fundamental cell of the periodicity lattice of ``chi`` and is used in place
of the equivalent rhombus.

The coherent qubit phase ``alpha`` only rotates ``Phi`` and drops out of
every population; it defaults to 0.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from qbatt.bessel import bessel_i_scaled
from qbatt.model import DegenerateRegime


class ApproximationBreakdown(DegenerateRegime):
    """A Gaussian width ``p_theta - gamma(Phi)^2`` is not positive."""


class GridResolutionWarning(UserWarning):
    pass


def _params(q: float, theta: float):
    p = math.sin(theta) ** 2
    return p, p * (1.0 - 2.0 * q), math.sqrt(q * (1.0 - q)) * math.sin(2.0 * theta)


@dataclass(frozen=True)
class PhaseSpaceChi:
    """``chi`` sampled on ``2M`` nodes in ``Phi`` and ``M`` nodes in ``varphi``, both on (-pi, pi].

    With that aspect ratio the nodes form two interleaved square lattices in
    ``(phi, phi')``, on each of which the uniform rule integrates
    trigonometric polynomials of degree below ``M`` exactly.
    """

    Phi: np.ndarray
    varphi: np.ndarray
    values: np.ndarray

    @property
    def M(self) -> int:
        return self.varphi.size

    @staticmethod
    def grid(M: int) -> tuple[np.ndarray, np.ndarray]:
        if M < 4 or M % 2:
            raise ValueError("M must be an even integer >= 4")
        Phi = -np.pi + np.pi * np.arange(1, 2 * M + 1) / M
        varphi = -np.pi + 2.0 * np.pi * np.arange(1, M + 1) / M
        return Phi, varphi

    @classmethod
    def delta(cls, n0: int, M: int) -> "PhaseSpaceChi":
        Phi, varphi = cls.grid(M)
        row = np.exp(1j * n0 * varphi) / (2.0 * np.pi)
        return cls(Phi, varphi, np.broadcast_to(row, (Phi.size, M)).copy())

    @classmethod
    def from_populations(cls, p, M: int) -> "PhaseSpaceChi":
        """Diagonal initial state: ``chi`` does not depend on ``Phi``."""
        Phi, varphi = cls.grid(M)
        p = np.asarray(p, dtype=float)
        row = np.exp(1j * np.outer(varphi, np.arange(p.size))) @ p / (2.0 * np.pi)
        return cls(Phi, varphi, np.broadcast_to(row, (Phi.size, M)).copy())

    @classmethod
    def from_density_matrix(cls, rho, M: int) -> "PhaseSpaceChi":
        """General initial state via one 2-d FFT on the ``(phi, phi')`` grid of spacing ``pi/M``."""
        rho = np.asarray(getattr(rho, "rho", rho), dtype=complex)
        d = rho.shape[0]
        L = 2 * M
        if d > L:
            raise ValueError(f"grid M={M} too small for {d} levels")
        Phi, varphi = cls.grid(M)
        # phi_a = -pi/2 + a pi/M and phi'_b = -3pi/2 + b pi/M: offsets become the phases i^m, i^m'
        ph = 1j ** np.arange(d)
        R = np.zeros((L, L), dtype=complex)
        R[:d, :d] = rho * np.outer(ph, ph)
        F = np.fft.fft(np.fft.ifft(R, axis=1) * L, axis=0) / (2.0 * np.pi)
        j = np.arange(2 * M)[:, None]
        l = np.arange(M)[None, :]
        return cls(Phi, varphi, F[(j - l) % L, (j + l + 2) % L])

    def normalization(self) -> float:
        """``int dPhi chi(Phi, 0)``, equal to the trace of the state."""
        i0 = self.M // 2 - 1
        return float((self.values[:, i0].sum() * (np.pi / self.M)).real)


def propagation_factor(Phi, varphi, q: float, c: float, theta: float, alpha: float = 0.0):
    p, v, om = _params(q, theta)
    return (
        1.0
        - p * (1.0 - np.cos(varphi))
        + 1j * v * np.sin(varphi)
        - 2j * c * om * np.sin(Phi - alpha) * np.sin(0.5 * varphi)
    )


def chi_propagate(chi0: PhaseSpaceChi, q: float, c: float, theta: float, alpha: float = 0.0, k: int = 1) -> PhaseSpaceChi:
    """``chi`` after ``k`` collisions on the infinite ladder."""
    if k < 0:
        raise ValueError("k must be >= 0")
    if k == 0:
        return chi0
    f = propagation_factor(chi0.Phi[:, None], chi0.varphi[None, :], q, c, theta, alpha)
    return PhaseSpaceChi(chi0.Phi, chi0.varphi, chi0.values * f**k)


def distribution_from_chi(chi: PhaseSpaceChi, n, check: bool = True):
    """Populations ``P(n)`` from the phase-space function.

    The two interleaved sublattices give independent estimates; when they
    disagree by more than 1e-3 the grid aliases and a
    :class:`GridResolutionWarning` is emitted. Returns their average.
    """
    M = chi.M
    scalar = np.ndim(n) == 0
    n = np.atleast_1d(np.asarray(n))
    j = np.arange(2 * M)[:, None]
    l = np.arange(M)[None, :]
    parity = (j - l) % 2
    w = np.exp(-1j * np.outer(n, chi.varphi))
    sub = []
    for s in (0, 1):
        S = np.where(parity == s, chi.values, 0.0).sum(axis=0)
        sub.append((w @ S).real * (2.0 * np.pi / M**2))
    if check and np.max(np.abs(sub[0] - sub[1])) > 1e-3:
        warnings.warn("phase-space grid too coarse: sublattice estimates differ by more than 1e-3", GridResolutionWarning)
    out = 0.5 * (sub[0] + sub[1])
    return float(out[0]) if scalar else out


def coherent_distribution(n0: int, k: int, q: float, c: float, theta: float, levels, alpha: float = 0.0, M: int | None = None):
    """Infinite-ladder populations from ``|n0>`` after ``k`` collisions, on the requested levels."""
    levels = np.asarray(levels)
    span = int(max(np.max(np.abs(levels - (n0 - k))), np.max(np.abs(levels - (n0 + k))))) + 1
    if M is None:
        M = max(4 * (int(levels.max()) + 1), 2 * span)
        M += M % 2
    chi = chi_propagate(PhaseSpaceChi.delta(n0, M), q, c, theta, alpha, k)
    return distribution_from_chi(chi, levels)


def gamma_of_phi(Phi, q: float, c: float, theta: float):
    """Drift of the Gaussian component labelled by ``Phi``: ``v - c Omega sin(Phi)``."""
    _, v, om = _params(q, theta)
    return v - c * om * np.sin(Phi)


def _gauss_average(n, k, n0, q, c, theta, nodes):
    p, _, _ = _params(q, theta)
    Phi = -np.pi + 2.0 * np.pi * np.arange(1, nodes + 1) / nodes
    g = gamma_of_phi(Phi, q, c, theta)
    var = k * (p - g * g)
    mu = n[:, None] - n0 - k * g[None, :]
    dens = np.exp(-(mu * mu) / (2.0 * var)) / np.sqrt(2.0 * np.pi * var)
    return dens.mean(axis=1)


def bimodal_gaussian_average(n, k: int, n0, q: float, c: float, theta: float, weights=None, nodes: int = 512, tol: float = 1e-12):
    """``Phi``-average of Gaussians centred at ``n0 + k gamma(Phi)`` with variance ``k (p - gamma^2)``.

    Periodic trapezoid rule in ``Phi``, doubled from ``nodes`` until the
    result changes by less than ``tol``. ``n0`` may be a sequence of initial
    levels mixed with ``weights``.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    p, v, om = _params(q, theta)
    margin = p - (abs(v) + c * om) ** 2
    if margin <= 1e-12:
        raise ApproximationBreakdown(f"p_theta - gamma^2 reaches {margin:.3e} <= 0")
    scalar = np.ndim(n) == 0
    n = np.atleast_1d(np.asarray(n, dtype=float))
    n0s = np.atleast_1d(np.asarray(n0, dtype=float))
    wts = np.ones(n0s.size) / n0s.size if weights is None else np.asarray(weights, dtype=float)
    if wts.shape != n0s.shape:
        raise ValueError("weights must match the initial levels")

    def evaluate(m):
        return sum(w * _gauss_average(n, k, x0, q, c, theta, m) for w, x0 in zip(wts, n0s))

    m = nodes
    prev = evaluate(m)
    while m < 2**16:
        m *= 2
        cur = evaluate(m)
        if np.max(np.abs(cur - prev)) < tol:
            prev = cur
            break
        prev = cur
    return float(prev[0]) if scalar else prev


def _q_branch(mu: np.ndarray, var: float, sign: int) -> np.ndarray:
    """``e^{-x}/sqrt(4 pi var) [sqrt|mu| I_{-1/4}(x) +- sgn(mu) sqrt|mu| I_{1/4}(x)]`` with ``x = mu^2/(4 var)``.

    Near ``mu = 0`` the products are evaluated in closed form:
    ``sqrt|mu| I_{-1/4}(x) -> (8 var)^{1/4} / Gamma(3/4)`` and the ``I_{1/4}`` term vanishes.
    """
    a = np.abs(mu)
    x = mu * mu / (4.0 * var)
    out = np.empty_like(mu)
    tiny = x < 1e-8
    if tiny.any():
        lead = (8.0 * var) ** 0.25 / math.gamma(0.75)
        second = sign * np.sign(mu[tiny]) * a[tiny] / (8.0 * var) ** 0.25 / math.gamma(1.25)
        out[tiny] = (lead + second) * np.exp(-x[tiny])
    big = ~tiny
    if big.any():
        xb = x[big]
        out[big] = np.sqrt(a[big]) * (
            bessel_i_scaled(-0.25, xb) + sign * np.sign(mu[big]) * bessel_i_scaled(0.25, xb)
        )
    return out / math.sqrt(4.0 * math.pi * var)


def stationary_phase_distribution(n, k: int, n0: float, q: float, c: float, theta: float):
    """Stationary-phase form of the coherent distribution around the two branches.

    Each branch is a Gaussian-Bessel profile ``Q`` evaluated at the offset
    from ``n0 + k gamma(Phi_pm)`` with width ``k (p - gamma(Phi_pm)^2)``; the
    sum is scaled by ``1/sqrt(4 c Omega k)``. Unnormalized.
    """
    if k < 20:
        raise ValueError("the stationary-phase form needs k >= 20")
    p, v, om = _params(q, theta)
    if c * om <= 0.0:
        raise DegenerateRegime("c Omega = 0: no stationary points, use the Gaussian limit")
    scalar = np.ndim(n) == 0
    n = np.atleast_1d(np.asarray(n, dtype=float))
    total = np.zeros_like(n)
    for Phi_s, sign in ((0.5 * math.pi, +1), (-0.5 * math.pi, -1)):
        g = float(gamma_of_phi(Phi_s, q, c, theta))
        var = k * (p - g * g)
        if var <= 0.0:
            raise ApproximationBreakdown("non-positive branch width")
        total += _q_branch(n - n0 - k * g, var, sign)
    total /= math.sqrt(4.0 * c * om * k)
    return float(total[0]) if scalar else total


@dataclass(frozen=True)
class PeakPrediction:
    n_plus: float
    n_minus: float
    variance: float
    k: int
    heuristic: bool = False


def peak_prediction(k: int, n0: float, q: float, c: float, theta: float, N: int | None = None) -> PeakPrediction:
    """Branch positions ``n0 + (v +- c Omega) k`` and the variance of the coherent walk.

    With ``N`` given, ``heuristic`` marks predictions where the backward
    branch would have met the empty level or the forward one the top level.
    """
    if k < 0:
        raise ValueError("k must be >= 0")
    p, v, om = _params(q, theta)
    n_plus = n0 + (v + c * om) * k
    n_minus = n0 + (v - c * om) * k
    var = (p - v * v) * k + 0.5 * (c * om) ** 2 * k * (k - 1)
    heuristic = False
    if N is not None:
        heuristic = not (n0 - k > 0 and n0 + k < N)
    return PeakPrediction(n_plus, n_minus, var, k, heuristic)


def k_estimate(N: int, q: float, c: float, theta: float) -> int:
    """Collisions for the forward branch to cross an empty ladder of ``N`` levels."""
    _, v, om = _params(q, theta)
    speed = c * om + v
    if speed <= 0.0:
        raise DegenerateRegime("c Omega + v <= 0: the forward branch does not charge")
    return int(math.floor(N / speed + 1e-9))


def coarse_grain(p, width: int = 3) -> np.ndarray:
    """Centred moving average that removes level-to-level interference fringes."""
    p = np.asarray(p, dtype=float)
    kernel = np.ones(width) / width
    return np.convolve(p, kernel, mode="same")
