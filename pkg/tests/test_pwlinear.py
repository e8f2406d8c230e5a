"""Curve and piecewise-linear function algebra, checked against quadrature."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import traceport as tp
from traceport.pwlinear import MonotoneCurve

from conftest import make_rng, random_diffuse_measure
from oracle_utils import numeric_abs_power_integral


def test_swap_is_involution():
    curve = MonotoneCurve([[0.0, 0.0], [0.3, 0.1], [0.3, 0.6], [1.0, 1.0]])
    back = curve.swap().swap()
    assert np.allclose(back.pts, curve.pts)


def test_swap_exchanges_jumps_and_flats():
    # an atom (vertical) becomes a flat run of the inverse
    curve = MonotoneCurve([[0.0, 0.0], [0.5, 0.2], [0.5, 0.8], [1.0, 1.0]])
    inv = curve.swap()
    assert inv.eval_upper(0.5) == pytest.approx(0.5)
    assert inv.eval_upper(0.2) == pytest.approx(0.5)


def test_identity_properties():
    f = tp.PLFunction.identity()
    assert f.lipschitz_constant() == pytest.approx(1.0)
    assert f.sup_abs() == pytest.approx(1.0)
    assert f.bounds() == (0.0, 1.0)


def test_compose_matches_pointwise():
    rng = make_rng(7)
    for _ in range(25):
        xs = np.concatenate([[0.0], np.sort(rng.uniform(0.1, 0.9, 4)), [1.0]])
        f = tp.PLFunction.from_pairs(np.column_stack([xs, rng.uniform(-1, 2, xs.size)]))
        g_xs = np.concatenate([[0.0], np.sort(rng.uniform(0.1, 0.9, 3)), [1.0]])
        g = tp.PLFunction.from_pairs(np.column_stack([g_xs, np.sort(rng.uniform(0, 1, g_xs.size))]))
        comp = f.compose(g)
        ts = np.linspace(0.0, 1.0, 1001)
        assert np.max(np.abs(comp(ts) - f(g(ts)))) < 1e-12


def test_max_min_with_cut_constants():
    f = tp.PLFunction.max_with(0.4)
    assert f(0.1) == pytest.approx(0.4)
    assert f(0.9) == pytest.approx(0.9)
    g = tp.PLFunction.min_with(0.4)
    assert g(0.1) == pytest.approx(0.1)
    assert g(0.9) == pytest.approx(0.4)


def test_combine_weighted_average_with_offset():
    # (3/4) f(id) + (1/4) f(1/2) - f, with f = 2t - 1
    f = tp.PLFunction.from_pairs([(0.0, -1.0), (1.0, 1.0)])
    mix = tp.PLFunction.combine(
        [f, f.compose(tp.PLFunction.constant(0.5))],
        [0.75, 0.25],
        offset_fn=f,
    )
    assert mix.sup_abs() == pytest.approx(0.25)


def test_integrate_abs_power_exact_examples():
    ident = MonotoneCurve([[0.0, 0.0], [1.0, 1.0]])
    half = MonotoneCurve([[0.0, 0.0], [1.0, 0.5]])
    assert tp.integrate_abs_power(ident, half, 1.0) == pytest.approx(0.25)
    assert tp.integrate_abs_power(ident, half, 2.0) == pytest.approx(1.0 / 12.0)


def test_integrate_abs_power_against_quadrature():
    rng = make_rng(21)
    for p in (1.0, 2.0, 3.5):
        for _ in range(10):
            a = random_diffuse_measure(rng).quantile_curve()
            b = random_diffuse_measure(rng).quantile_curve()
            exact = tp.integrate_abs_power(a, b, p)
            approx = numeric_abs_power_integral(a.pts, b.pts, p)
            assert exact == pytest.approx(approx, abs=5e-5)


def test_integrate_abs_power_with_jumps():
    # atomic quantile curves: step functions; integral is a weighted sum
    mu = tp.Measure1D.from_atoms([0.0, 0.5], [0.5, 0.5])
    nu = tp.Measure1D.from_atoms([0.1, 0.9], [0.5, 0.5])
    val = tp.integrate_abs_power(mu.quantile_curve(), nu.quantile_curve(), 1.0)
    assert val == pytest.approx(0.25)


def test_sup_abs_diff_matches_grid():
    rng = make_rng(3)
    for _ in range(10):
        a = random_diffuse_measure(rng).quantile_curve()
        b = random_diffuse_measure(rng).quantile_curve()
        exact = tp.sup_abs_diff(a, b)
        ts = np.linspace(0.0, 1.0, 20001)
        grid = np.max(np.abs(a.eval_upper(ts) - b.eval_upper(ts)))
        assert exact >= grid - 1e-12
        assert exact == pytest.approx(grid, abs=1e-3)


def test_integrate_measure_linear_exact():
    f = tp.PLFunction.from_pairs([(0.0, -1.0), (1.0, 3.0)]).as_graph()
    uniform = tp.Measure1D.uniform().curve
    assert tp.integrate_measure(f, uniform) == pytest.approx(1.0)


def test_integrate_measure_atoms():
    f = tp.PLFunction.from_pairs([(0.0, 0.0), (1.0, 2.0)]).as_graph()
    atoms = tp.Measure1D.from_atoms([0.25, 0.75], [0.5, 0.5]).curve
    assert tp.integrate_measure(f, atoms) == pytest.approx(0.5 * 0.5 + 0.5 * 1.5)


def test_integrate_abs_power_measure_mixed():
    # gap |t - t/2| integrated against a half-atom half-uniform measure
    gap = tp.PLFunction.from_pairs([(0.0, 0.0), (1.0, 0.5)]).as_graph()
    mixed = tp.Measure1D.from_breakpoints(
        [[0.0, 0.0], [0.5, 0.25], [0.5, 0.75], [1.0, 1.0]]
    ).curve
    expected = 0.5 * 0.25 + 0.25 * (0.0 + 0.25) / 2 + 0.25 * (0.25 + 0.5) / 2
    got = tp.integrate_abs_power_measure(gap, mixed, 1.0)
    assert got == pytest.approx(expected)


@given(st.floats(min_value=1.0, max_value=8.0), st.integers(min_value=0, max_value=10_000))
@settings(max_examples=60, deadline=None)
def test_property_integral_positive_and_zero_on_equal(p, seed):
    """The p-integral of |f - f| vanishes and |f - g| is nonnegative."""
    rng = make_rng(seed)
    a = random_diffuse_measure(rng).quantile_curve()
    b = random_diffuse_measure(rng).quantile_curve()
    assert tp.integrate_abs_power(a, a, p) == pytest.approx(0.0, abs=1e-15)
    assert tp.integrate_abs_power(a, b, p) >= 0.0


@given(st.integers(min_value=0, max_value=10_000))
@settings(max_examples=40, deadline=None)
def test_property_holder_monotonicity(seed):
    """(integral |f-g|^p)^{1/p} is non-decreasing in p on a probability space."""
    rng = make_rng(seed)
    a = random_diffuse_measure(rng).quantile_curve()
    b = random_diffuse_measure(rng).quantile_curve()
    vals = [tp.integrate_abs_power(a, b, p) ** (1.0 / p) for p in (1.0, 2.0, 4.0)]
    assert vals[0] <= vals[1] + 1e-12
    assert vals[1] <= vals[2] + 1e-12
