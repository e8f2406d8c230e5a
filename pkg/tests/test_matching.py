"""Assignment and flow primitives behind the distance computations."""

import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import traceport as tp
from traceport.matching import (
    bottleneck_distance,
    bottleneck_matching,
    bottleneck_matching_value,
    common_rationalization,
    min_cost_assignment,
    rationalize_weights,
)

from conftest import make_rng
from oracle_utils import brute_winf_neighbourhood, brute_winf_uniform, permutation_table


def test_min_cost_assignment_matches_brute_force(rng):
    for _ in range(25):
        n = int(rng.integers(2, 7))
        cost = rng.uniform(0.0, 5.0, size=(n, n))
        value, perm = min_cost_assignment(cost)
        best = min(
            sum(cost[i, p[i]] for i in range(n))
            for p in itertools.permutations(range(n))
        )
        assert value == pytest.approx(best, abs=1e-12)
        assert sorted(perm) == list(range(n))
        assert cost[np.arange(n), perm].sum() == pytest.approx(value, abs=1e-12)


def test_bottleneck_matching_value_matches_brute_force(rng):
    for _ in range(25):
        n = int(rng.integers(2, 7))
        dist = rng.uniform(0.0, 3.0, size=(n, n))
        value = bottleneck_matching_value(dist)
        perms = permutation_table(n)
        assert value == brute_winf_uniform(dist)
        # the optimum is attained at an actual matrix entry
        assert np.any(np.isclose(dist, value))
        assert min(dist[np.arange(n), p].max() for p in perms) == value


def test_bottleneck_matching_witness_is_lexicographically_first(rng):
    for _ in range(15):
        n = int(rng.integers(2, 6))
        dist = rng.uniform(0.0, 3.0, size=(n, n))
        value, perm = bottleneck_matching(dist)
        assert dist[np.arange(n), perm].max() == value
        achievers = [
            p
            for p in itertools.permutations(range(n))
            if max(dist[i, p[i]] for i in range(n)) <= value
        ]
        assert tuple(perm) == min(achievers)


def test_bottleneck_distance_uniform_agrees_with_matching(rng):
    for _ in range(20):
        n = int(rng.integers(2, 7))
        dist = rng.uniform(0.0, 3.0, size=(n, n))
        w = np.full(n, 1.0 / n)
        assert bottleneck_distance(dist, w, w)[0] == bottleneck_matching_value(dist)


def test_bottleneck_distance_weighted_spec_example():
    # one atom against an even split across distance 0 and 1
    dist = np.array([[0.0, 1.0]])
    wa = np.array([1.0])
    wb = np.array([0.5, 0.5])
    value, plan = bottleneck_distance(dist, wa, wb)
    assert value == 1.0
    assert plan.sum() == pytest.approx(1.0)


def test_bottleneck_distance_weighted_matches_subset_oracle(rng):
    for _ in range(20):
        na = int(rng.integers(1, 5))
        nb = int(rng.integers(1, 5))
        dist = rng.uniform(0.0, 2.0, size=(na, nb))
        wa = rng.dirichlet(np.ones(na))
        wb = rng.dirichlet(np.ones(nb))
        got, _ = bottleneck_distance(dist, wa, wb)
        want = brute_winf_neighbourhood(dist, wa, wb)
        assert got == pytest.approx(want, abs=1e-12)


def test_rationalize_weights_exact_fractions():
    counts, denom = rationalize_weights(np.array([0.25, 0.75]))
    assert np.allclose(counts / denom, [0.25, 0.75])

    counts, denom = rationalize_weights(np.array([1 / 3, 2 / 3]))
    assert counts.tolist() == [1, 2]
    assert denom == 3


def test_rationalize_weights_rejects_oversized_lcm_and_zero_mass():
    w = np.array([1 / 101, 100 / 101])
    assert rationalize_weights(w, lcm_cap=100) is None
    assert rationalize_weights(np.array([0.0, 1.0])) is None


def test_common_rationalization_aligns_grids():
    wa = np.array([0.5, 0.5])
    wb = np.array([1 / 3, 1 / 3, 1 / 3])
    result = common_rationalization(wa, wb)
    assert result is not None
    ca, cb = result
    assert ca.sum() == cb.sum()
    assert ca.tolist() == [3, 3]
    assert cb.tolist() == [2, 2, 2]


@given(st.integers(min_value=0, max_value=10_000))
@settings(max_examples=60, deadline=None)
def test_property_bottleneck_value_is_a_matrix_entry(seed):
    rng = make_rng(seed)
    n = int(rng.integers(2, 8))
    dist = rng.uniform(0.0, 4.0, size=(n, n))
    value = bottleneck_matching_value(dist)
    assert np.any(dist == value)


@given(st.integers(min_value=0, max_value=10_000))
@settings(max_examples=40, deadline=None)
def test_property_weighted_bottleneck_never_below_uniform_subcase(seed):
    """Splitting weights can only reuse shorter edges, never force longer ones."""
    rng = make_rng(seed)
    n = int(rng.integers(2, 6))
    dist = rng.uniform(0.0, 3.0, size=(n, n))
    dist = np.maximum(dist, dist.T)
    np.fill_diagonal(dist, 0.0)
    w = np.full(n, 1.0 / n)
    assert bottleneck_distance(dist, w, w)[0] <= bottleneck_matching_value(dist) + 1e-12
