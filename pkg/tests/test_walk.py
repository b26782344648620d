import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qbatt.collision import CollisionMap
from qbatt.model import BatteryState, CollisionConfig, DegenerateRegime, QubitSpec
from qbatt.walk import (
    ChargeDistribution,
    characteristic_classical,
    characteristic_distribution,
    gaussian_distribution,
    gaussian_limit,
    gibbs_steady_state,
    moments_analytic,
    phase_nodes,
    step_factor,
    total_variation,
    walk_evolve,
    walk_moments_trajectory,
    walk_step,
)

probs = st.floats(0.0, 1.0)


def test_zero_jump_probability_is_identity():
    d = gibbs_steady_state(0.3, 6)
    assert np.array_equal(walk_step(d, 0.3, 0.0).probabilities, d.probabilities)


def test_trinomial_step():
    p = walk_step(ChargeDistribution.delta(50, 200), 0.25, 0.5).probabilities
    assert p[49:52] == pytest.approx([1 / 8, 1 / 2, 3 / 8], abs=1e-16)


@given(q=st.floats(0.01, 0.99), N=st.integers(1, 30))
def test_gibbs_fixed_point(q, N):
    d = gibbs_steady_state(q, N)
    assert np.max(np.abs(walk_step(d, q, 0.7).probabilities - d.probabilities)) < 1e-12


def test_gibbs_examples():
    assert gibbs_steady_state(0.25, 2).probabilities == pytest.approx([1 / 13, 3 / 13, 9 / 13], abs=1e-15)
    assert gibbs_steady_state(0.5, 4).probabilities == pytest.approx([0.2] * 5)


def test_gibbs_degenerate():
    with pytest.raises(DegenerateRegime):
        gibbs_steady_state(0.0, 5)
    assert gibbs_steady_state(0.0, 5, allow_degenerate=True).probabilities[5] == 1.0
    assert gibbs_steady_state(1.0, 5, allow_degenerate=True).probabilities[0] == 1.0


def test_gibbs_extreme_ratio_stays_finite():
    p = gibbs_steady_state(1e-3, 2000).probabilities
    assert np.all(np.isfinite(p)) and p.sum() == pytest.approx(1.0)


@settings(max_examples=50, deadline=None)
@given(q=probs, p=probs, seed=st.integers(0, 2**32 - 1))
def test_step_preserves_normalization(q, p, seed):
    w = np.random.default_rng(seed).uniform(size=12)
    out = walk_step(ChargeDistribution(w / w.sum()), q, p).probabilities
    assert abs(out.sum() - 1.0) < 1e-12
    assert out.min() >= 0.0


@pytest.mark.parametrize("bad", [(-0.1, 0.5), (0.5, 1.1)])
def test_step_rejects_out_of_range(bad):
    with pytest.raises(ValueError):
        walk_step(ChargeDistribution.delta(1, 3), *bad)


def test_distribution_validation():
    with pytest.raises(ValueError):
        ChargeDistribution([0.6, 0.6])
    with pytest.raises(ValueError):
        ChargeDistribution([1.1, -0.1])


@pytest.mark.parametrize("q,theta", [(0.25, math.pi / 4), (0.6, 0.4), (0.0, 1.2)])
def test_walk_equals_map_diagonal(q, theta):
    N, k = 50, 200
    cfg = CollisionConfig(theta)
    walk = walk_evolve(ChargeDistribution.delta(20, N), q, cfg.p_theta, k).probabilities
    step = CollisionMap(N, QubitSpec(q), cfg)
    m = BatteryState.fock(20, N).rho.copy()
    for _ in range(k):
        m = step(m)
    assert np.max(np.abs(walk - m.diagonal().real)) < 1e-10


def test_moments_examples():
    assert moments_analytic(50, 0, 0.25, 0.5, 100) == pytest.approx((75.0, 43.75))
    assert moments_analytic(10, 2, 0.5, 0.3, 40) == pytest.approx((10.0, 2 + 0.3 * 40))
    assert moments_analytic(7, 1.5, 0.2, 0.9, 0) == (7, 1.5)


def test_iterated_moments_match_closed_form():
    traj = walk_moments_trajectory(ChargeDistribution.delta(100, 400), 0.25, 0.5, 200)
    assert traj[:, 2].max() < 1e-12
    for k in range(201):
        mean, var = moments_analytic(100, 0, 0.25, 0.5, k)
        assert abs(traj[k, 0] - mean) < 1e-9
        assert abs(traj[k, 1] - var) < 1e-9


@given(phi=st.floats(-math.pi, math.pi), q=probs, p=probs)
def test_step_factor_bound(phi, q, p):
    bound = math.sqrt(max(0.0, 1 - 4 * p * (1 - p) * math.sin(phi / 2) ** 2))
    assert abs(step_factor(phi, q, p)) <= bound + 1e-12


def test_characteristic_special_values():
    assert characteristic_classical(0.0, 37, 0.3, 0.6, 1.0 + 0j) == pytest.approx(1.0)
    assert abs(characteristic_classical(math.pi, 1, 0.5, 0.5)) < 1e-15


def test_characteristic_inversion_matches_walk():
    N, n0, k = 120, 60, 50
    fourier = characteristic_distribution(n0, 0.3, 0.6, k, N)
    walk = walk_evolve(ChargeDistribution.delta(n0, N), 0.3, 0.6, k).probabilities
    assert np.max(np.abs(fourier - walk)) < 1e-8


def test_phase_nodes():
    phi = phase_nodes(8)
    assert phi[-1] == pytest.approx(math.pi)
    assert phi[0] > -math.pi


def test_gaussian_limit_tv():
    N, n0, k, q, p = 400, 100, 200, 0.25, 0.5
    exact = walk_evolve(ChargeDistribution.delta(n0, N), q, p, k).probabilities
    g = gaussian_distribution(N, k, n0, q, p)
    assert total_variation(exact, g.probabilities) < 0.03


def test_gaussian_moments():
    n = np.arange(-2000, 2000)
    g = gaussian_limit(n, 300, 40, 0.3, 0.6)
    mean, var = moments_analytic(40, 0, 0.3, 0.6, 300)
    assert g.sum() == pytest.approx(1.0, abs=1e-10)
    assert (n * g).sum() == pytest.approx(mean, abs=1e-8)
    assert ((n - mean) ** 2 * g).sum() == pytest.approx(var, rel=1e-8)
    assert gaussian_distribution(200, 50, 100, 0.5, 0.5).mean == pytest.approx(100.0)


@pytest.mark.parametrize("q,p", [(0.3, 0.0), (0.0, 1.0), (1.0, 1.0)])
def test_gaussian_degenerate(q, p):
    with pytest.raises(DegenerateRegime):
        gaussian_limit(0.0, 10, 5, q, p)


def test_convergence_to_gibbs():
    q, N, p = 0.25, 20, 0.5
    target = gibbs_steady_state(q, N).probabilities
    d = ChargeDistribution.delta(0, N)
    tvs = []
    for _ in range(50):
        d = walk_evolve(d, q, p, 100)
        tvs.append(total_variation(d.probabilities, target))
    assert tvs[-1] < 1e-6
    assert all(b <= a + 1e-15 for a, b in zip(tvs[5:], tvs[6:]))
