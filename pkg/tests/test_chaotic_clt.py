"""The intermittent interval map, its empirical law, and the normal limit."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import traceport as tp
from traceport.chaotic_clt import log_weights, measure_integral, scaled_birkhoff

from conftest import make_rng
from oracle_utils import normal_w1_numeric


def test_pm_map_examples():
    assert tp.pm_map(0.25, 0.0) == 0.0
    assert tp.pm_map(0.25, 0.75) == pytest.approx(0.5, abs=1e-15)
    assert tp.pm_map(0.25, 0.25) == pytest.approx(0.25 + 2 ** (-2.25), abs=1e-12)


def test_pm_map_branches():
    alpha = 0.1
    # left branch fixes 0 and is continuous up to 1/2
    left = tp.pm_map(alpha, 0.5 - 1e-12)
    right = tp.pm_map(alpha, 0.5)
    assert left == pytest.approx(1.0, abs=1e-9)
    assert right == 0.0
    for t in (0.1, 0.3, 0.49):
        assert 0.0 <= tp.pm_map(alpha, t) <= 1.0
    for t in (0.5, 0.7, 0.99):
        assert tp.pm_map(alpha, t) == pytest.approx(2 * t - 1, abs=1e-15)


def test_pm_map_domain_validation():
    with pytest.raises(tp.ValidationError):
        tp.pm_map(0.25, -0.1)
    with pytest.raises(tp.ValidationError):
        tp.pm_map(0.25, 1.1)
    with pytest.raises(tp.ValidationError):
        tp.pm_map(0.6, 0.3)


def test_orbit_prefix_and_length():
    params = tp.PMParams(alpha=0.25, seed=1, n_steps=3)
    traj = tp.orbit(params, 0.75)
    assert traj.shape == (3,)
    assert traj[0] == 0.75
    assert traj[1] == pytest.approx(0.5, abs=1e-15)
    assert traj[2] == 0.0


def test_orbit_fixed_point_stays():
    params = tp.PMParams(alpha=0.1, seed=1, n_steps=50)
    traj = tp.orbit(params, 0.0)
    assert np.all(traj == 0.0)


def test_orbit_confinement(rng):
    for seed in range(5):
        params = tp.PMParams(alpha=float(rng.uniform(0.05, 0.45)), seed=seed, n_steps=2000)
        traj = tp.orbit(params, float(rng.uniform(0.1, 0.9)))
        assert np.all((traj >= 0.0) & (traj <= 1.0))


def test_invariant_estimate_flags_degenerate_start():
    params = tp.PMParams(alpha=0.25, seed=3, n_steps=10_000)
    with pytest.warns(UserWarning, match="degenerate"):
        tp.invariant_measure_estimate(params, burn=0, t0=0.0)


def test_invariant_estimate_rejects_short_orbits():
    params = tp.PMParams(alpha=0.25, seed=3, n_steps=100)
    with pytest.raises(tp.ValidationError):
        tp.invariant_measure_estimate(params, burn=0)


def test_invariant_estimate_has_full_support():
    params = tp.PMParams(alpha=0.1, seed=5, n_steps=100_000)
    mu = tp.invariant_measure_estimate(params, burn=1000)
    edges = np.linspace(0.0, 1.0, 101)
    cdf = mu.cdf(edges)
    assert np.all(np.diff(cdf) > 0.0)


def test_invariant_estimate_stable_across_seeds():
    mus = []
    for seed in (11, 12):
        params = tp.PMParams(alpha=0.1, seed=seed, n_steps=200_000)
        mus.append(tp.invariant_measure_estimate(params, burn=1000))
    assert tp.wp_quantile(mus[0], mus[1], 1) < 0.05


def test_log_weights_sum_to_one():
    for n in (1, 2, 10, 1000):
        w = log_weights(n)
        assert w.shape == (n,)
        assert abs(w.sum() - 1.0) < 1e-12
        # weight of index k is proportional to 1/(k+1)
        assert w[0] == pytest.approx(w[-1] * n, rel=1e-9)


def test_scaled_birkhoff_normalization():
    values = np.ones(16)
    s = scaled_birkhoff(values)
    # partial sums k+1 over sqrt(k+1)
    assert s[0] == pytest.approx(1.0)
    assert s[15] == pytest.approx(4.0)


def test_center_observable_integral_is_zero():
    params = tp.PMParams(alpha=0.25, seed=9, n_steps=50_000)
    mu = tp.invariant_measure_estimate(params, burn=500)
    f = tp.PLFunction.identity()
    g = tp.center_observable(f, mu)
    assert abs(measure_integral(g, mu)) < 1e-9


def test_w1_to_normal_point_mass_closed_form():
    # a unit atom at zero: distance is sigma * E|Z|
    for sigma in (0.5, 1.0, 2.0):
        got = tp.w1_to_normal(np.array([0.0]), np.array([1.0]), sigma)
        assert got == pytest.approx(sigma * math.sqrt(2.0 / math.pi), abs=1e-12)


def test_w1_to_normal_matches_quadrature(rng):
    for _ in range(10):
        n = int(rng.integers(1, 40))
        values = rng.normal(0.0, 1.0, size=n)
        weights = rng.dirichlet(np.ones(n))
        sigma = float(rng.uniform(0.4, 2.0))
        got = tp.w1_to_normal(values, weights, sigma)
        want = normal_w1_numeric(values, weights, sigma)
        assert got == pytest.approx(want, abs=1e-5)


def test_w1_to_normal_validation():
    with pytest.raises(tp.ValidationError):
        tp.w1_to_normal(np.array([0.0]), np.array([1.0]), 0.0)
    with pytest.raises(tp.ValidationError):
        tp.w1_to_normal(np.array([]), np.array([]), 1.0)


def test_clt_experiment_rejects_flat_observable():
    params = tp.PMParams(alpha=0.25, seed=2, n_steps=5000)
    f = tp.PLFunction.constant(0.0)
    with pytest.raises(tp.DegenerateComputationError):
        tp.clt_experiment(params, f, [1000, 5000])


def test_clt_experiment_rejects_uncentered_observable():
    params = tp.PMParams(alpha=0.25, seed=2, n_steps=5000)
    f = tp.PLFunction.constant(0.7)
    with pytest.raises(tp.ValidationError):
        tp.clt_experiment(params, f, [1000, 5000])


def test_clt_experiment_checkpoint_validation():
    params = tp.PMParams(alpha=0.25, seed=2, n_steps=5000)
    f = tp.PLFunction.identity()
    with pytest.raises(tp.ValidationError):
        tp.clt_experiment(params, f, [])
    with pytest.raises(tp.ValidationError):
        tp.clt_experiment(params, f, [1000, 1000])
    with pytest.raises(tp.ValidationError):
        tp.clt_experiment(params, f, [1000, 10_000])


def _centered_experiment(alpha: float, seed: int, n: int, checkpoints):
    params = tp.PMParams(alpha=alpha, seed=seed, n_steps=n)
    mu = tp.invariant_measure_estimate(params, burn=0)
    g = tp.center_observable(tp.PLFunction.identity(), mu)
    return tp.clt_experiment(params, g, checkpoints)


def test_clt_experiment_reports_both_variances():
    res = _centered_experiment(0.25, 4, 40_000, [1000, 10_000, 40_000])
    assert res.sigma2 > 0.0
    assert res.sigma2_green_kubo > 0.0
    assert res.centering_residual < 1e-3
    # the two estimators agree in order of magnitude
    assert 0.2 < res.sigma2 / res.sigma2_green_kubo < 5.0


def test_clt_trend_median_moves_toward_normal():
    """Reduced-scale version of the full convergence run, all three regimes."""
    for alpha in (0.1, 0.25, 0.4):
        finals = []
        initials = []
        for seed in range(5):
            res = _centered_experiment(alpha, 100 + seed, 100_000, [100, 10_000, 100_000])
            values = [v for _, v in res.checkpoints]
            initials.append(values[0])
            finals.append(values[-1])
        assert np.median(finals) < np.median(initials)


@given(st.integers(min_value=0, max_value=50_000))
@settings(max_examples=20, deadline=None)
def test_property_w1_quantile_cross_check(seed):
    """The normal-distance routine agrees with generic quantile transport."""
    rng = make_rng(seed)
    n = int(rng.integers(1, 60))
    values = rng.uniform(-2.0, 2.0, size=n)
    weights = rng.dirichlet(np.ones(n))
    sigma = float(rng.uniform(0.5, 1.5))
    got = tp.w1_to_normal(values, weights, sigma)
    # replace the normal by a fine discretization and use the generic route
    grid = np.linspace(0.0005, 0.9995, 2000)
    from scipy.special import ndtri

    atoms = sigma * ndtri(grid)
    emp = _shifted_measure(values, weights)
    norm_disc = _shifted_measure(atoms, np.full(grid.size, 1.0 / grid.size))
    approx = tp.wp_quantile(emp, norm_disc, 1) * 12.0
    assert got == pytest.approx(approx, abs=5e-3)


def _merge(values, weights):
    order = np.argsort(values)
    v = np.asarray(values, dtype=float)[order]
    w = np.asarray(weights, dtype=float)[order]
    uniq, inverse = np.unique(v, return_inverse=True)
    acc = np.zeros(uniq.shape[0])
    np.add.at(acc, inverse, w)
    return uniq, acc


def _shifted_measure(values, weights):
    # transport on the unit interval needs supports in [0, 1]
    xs, ws = _merge(values, weights)
    lo, hi = -6.0, 6.0
    return tp.Measure1D.from_atoms((xs - lo) / (hi - lo), ws)


def test_shifted_measure_is_isometric_up_to_scale(rng):
    # the helper above rescales distances by (hi - lo); spot-check that
    a = rng.normal(0, 1, 5)
    b = rng.normal(0, 1, 5)
    w = np.full(5, 0.2)
    direct = tp.wp_quantile(_shifted_measure(a, w), _shifted_measure(b, w), 1) * 12.0
    assert direct == pytest.approx(np.mean(np.abs(np.sort(a) - np.sort(b))), abs=1e-9)
