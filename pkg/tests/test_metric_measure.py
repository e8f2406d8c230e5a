"""Spaces, discrete measures, and piecewise-linear CDFs on the line."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import traceport as tp

from conftest import make_rng, random_diffuse_measure, random_euclidean_space


def test_validate_metric_rejects_triangle_violation():
    d = np.array([[0.0, 1.0, 3.0], [1.0, 0.0, 1.0], [3.0, 1.0, 0.0]])
    with pytest.raises(tp.ValidationError):
        tp.FiniteMetricSpace(d)


def test_validate_metric_rejects_asymmetry():
    d = np.array([[0.0, 1.0], [2.0, 0.0]])
    with pytest.raises(tp.ValidationError):
        tp.FiniteMetricSpace(d)


def test_shortest_path_metric_path_graph():
    g = tp.GeodesicGraph(3, [(0, 1, 1.0), (1, 2, 1.0)])
    space = tp.shortest_path_metric(g)
    assert space.d[0, 2] == pytest.approx(2.0)


def test_shortest_path_metric_triangle_detour():
    g = tp.GeodesicGraph(3, [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 5.0)])
    space = tp.shortest_path_metric(g)
    assert space.d[0, 2] == pytest.approx(2.0)


def test_shortest_path_metric_single_vertex():
    g = tp.GeodesicGraph(1, [])
    space = tp.shortest_path_metric(g)
    assert space.d.shape == (1, 1)
    assert space.d[0, 0] == 0.0


def test_disconnected_graph_rejected():
    with pytest.raises(tp.ValidationError):
        tp.GeodesicGraph(4, [(0, 1, 1.0), (2, 3, 1.0)]).metric


def test_graph_paths_follow_edges():
    g = tp.GeodesicGraph(4, [(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0)])
    assert list(g.path(0, 3)) == [0, 1, 2, 3]


def test_arc_space_chordal_metric():
    arc = tp.ArcSpace(math.pi)
    pts = np.array([0.0, math.pi / 2, math.pi])
    d = arc.pairwise(pts, pts)
    assert d[0, 1] == pytest.approx(2 * math.sin(math.pi / 4))
    assert d[0, 2] == pytest.approx(2.0)
    # chord never exceeds arc length
    assert np.all(d <= np.abs(pts[:, None] - pts[None, :]) + 1e-12)


def test_arc_sampled_space_passes_validator(rng):
    arc = tp.ArcSpace(1.5 * math.pi)
    pts = np.sort(rng.uniform(0.0, 1.5 * math.pi, size=12))
    d = arc.pairwise(pts, pts)
    tp.validate_metric(d, tol=1e-9)


def test_random_shortest_path_metrics_pass_validator(rng):
    for _ in range(10):
        n = int(rng.integers(2, 12))
        extra = [
            (int(i), int(j), float(rng.uniform(0.2, 2.0)))
            for i in range(n)
            for j in range(i + 1, n)
            if rng.uniform() < 0.4
        ]
        chain = [(i, i + 1, float(rng.uniform(0.2, 2.0))) for i in range(n - 1)]
        space = tp.shortest_path_metric(tp.GeodesicGraph(n, chain + extra))
        tp.validate_metric(space.d, tol=1e-7)


def test_discrete_measure_validation():
    space = tp.UnitInterval()
    with pytest.raises(tp.ValidationError):
        tp.DiscreteMeasure(space, np.array([0.1, 0.2]), np.array([0.7, 0.7]))
    with pytest.raises(tp.ValidationError):
        tp.DiscreteMeasure(space, np.array([0.1, 0.1]), np.array([0.5, 0.5]))
    with pytest.raises(tp.ValidationError):
        tp.DiscreteMeasure(space, np.array([0.1, 0.2]), np.array([1.0, 0.0]))


def test_quantile_uniform_identity():
    mu = tp.Measure1D.uniform()
    assert tp.quantile(mu, 0.3) == pytest.approx(0.3)


def test_quantile_point_mass():
    mu = tp.Measure1D.point(0.5)
    for t in (0.0, 0.4, 0.99):
        assert tp.quantile(mu, t) == pytest.approx(0.5)


def test_quantile_square_cdf():
    mu = tp.Measure1D.from_cdf_callable(lambda x: x * x, resolution=1024)
    assert tp.quantile(mu, 0.25) == pytest.approx(0.5, abs=1e-3)


def test_quantile_domain_error():
    mu = tp.Measure1D.uniform()
    with pytest.raises(tp.ValidationError):
        tp.quantile(mu, 1.0)


def test_pushforward_identity():
    mu = tp.Measure1D.uniform()
    h = tp.MonotoneMap.identity()
    out = tp.pushforward(mu, h)
    assert tp.cdf_distance(out, mu) < 1e-12


def test_pushforward_halving():
    mu = tp.Measure1D.uniform()
    h = tp.MonotoneMap.from_breakpoints([(0.0, 0.0), (1.0, 0.5)])
    out = tp.pushforward(mu, h)
    expected = tp.Measure1D.uniform(0.0, 0.5)
    assert tp.cdf_distance(out, expected) < 1e-12


def test_pushforward_atom_relocation():
    mu = tp.Measure1D.point(0.2)
    h = tp.MonotoneMap.from_breakpoints([(0.0, 0.3), (0.7, 1.0), (1.0, 1.0)])
    out = tp.pushforward(mu, h)
    expected = tp.Measure1D.point(0.5)
    assert tp.cdf_distance(out, expected) < 1e-12


def test_pushforward_preserves_mass_and_diffuseness(rng):
    for _ in range(10):
        mu = random_diffuse_measure(rng)
        xs = np.concatenate([[0.0], np.sort(rng.uniform(0.1, 0.9, 4)), [1.0]])
        ys = np.concatenate([[0.0], np.sort(rng.uniform(0.1, 0.9, 4)), [1.0]])
        h = tp.MonotoneMap.from_breakpoints(np.column_stack([xs, ys]))
        out = tp.pushforward(mu, h)
        assert out.curve.pts[-1, 1] == pytest.approx(1.0)
        assert out.is_diffuse()


def test_pushforward_function_tent_fold():
    # both branches of the tent have slope 2, so folding Lebesgue gives Lebesgue
    mu = tp.Measure1D.uniform()
    tent = tp.PLFunction(np.array([0.0, 0.5, 1.0]), np.array([0.0, 1.0, 0.0]))
    out = tp.pushforward_function(mu, tent)
    assert tp.cdf_distance(out, mu) < 1e-12


def test_pushforward_function_atom_at_fold_minimum():
    # the atom lands exactly on the decreasing branch's lowest image, below
    # the other branch's knots; the summed CDF must stay monotone
    f = tp.PLFunction(np.array([0.0, 0.5, 1.0]), np.array([0.0, 1.0, 0.4]))
    out = tp.pushforward_function(tp.Measure1D.point(1.0), f)
    assert tp.cdf_distance(out, tp.Measure1D.point(0.4)) < 1e-12

    mixed = tp.Measure1D.from_atoms(np.array([0.25, 1.0]), np.array([0.5, 0.5]))
    out = tp.pushforward_function(mixed, f)
    expected = tp.Measure1D.from_atoms(np.array([0.4, 0.5]), np.array([0.5, 0.5]))
    assert tp.cdf_distance(out, expected) < 1e-12


def test_empirical_measure_examples():
    single = tp.empirical_measure([0.5])
    assert tp.cdf_distance(single, tp.Measure1D.point(0.5)) < 1e-12

    pair = tp.empirical_measure([0.0, 1.0])
    xs, ws = pair.atoms()
    assert np.allclose(xs, [0.0, 1.0])
    assert np.allclose(ws, [0.5, 0.5])

    merged = tp.empirical_measure([0.1, 0.1, 0.4])
    xs, ws = merged.atoms()
    assert np.allclose(xs, [0.1, 0.4])
    assert np.allclose(ws, [2.0 / 3.0, 1.0 / 3.0])


def test_empirical_measure_empty_rejected():
    with pytest.raises(tp.ValidationError):
        tp.empirical_measure([])


@given(st.integers(min_value=0, max_value=10_000), st.floats(min_value=0.0, max_value=0.999))
@settings(max_examples=80, deadline=None)
def test_property_galois_inequalities(seed, t):
    """F(quantile(t)) >= t and quantile(F(x)) <= x at continuity points."""
    rng = make_rng(seed)
    mu = random_diffuse_measure(rng)
    x = float(mu.quantile(t))
    assert mu.cdf(x) >= t - 1e-12
    fx = float(mu.cdf(min(t, 1.0)))
    if fx < 1.0:
        assert mu.quantile(fx) <= t + 1e-12


@given(st.integers(min_value=0, max_value=10_000))
@settings(max_examples=30, deadline=None)
def test_property_euclidean_spaces_pass_validator(seed):
    rng = make_rng(seed)
    space = random_euclidean_space(rng, int(rng.integers(2, 10)))
    tp.validate_metric(space.d, tol=1e-7)
