"""Seeded random generators shared across the test modules."""

import sys

import numpy as np
import pytest

import traceport as tp


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One line per release criterion whenever the acceptance module ran."""
    module = sys.modules.get("test_acceptance")
    results = getattr(module, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for num, name, ok, detail in sorted(results):
        status = "PASS" if ok else "FAIL"
        terminalreporter.write_line(f"criterion {num:02d} [{status}] {name}: {detail}")


def make_rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(seed)


def random_euclidean_space(rng, n: int) -> tp.FiniteMetricSpace:
    """Metric space from Euclidean distances of points in the unit square."""
    pts = rng.uniform(0.0, 1.0, size=(n, 2))
    d = np.sqrt(((pts[:, None, :] - pts[None, :, :]) ** 2).sum(axis=2))
    while np.any((d + np.eye(n)) < 1e-6):
        pts = rng.uniform(0.0, 1.0, size=(n, 2))
        d = np.sqrt(((pts[:, None, :] - pts[None, :, :]) ** 2).sum(axis=2))
    return tp.FiniteMetricSpace(d)


def random_uniform_pair(rng, space):
    """Two uniform measures on disjointly drawn index supports."""
    n = space.n
    idx = rng.permutation(n)
    half = max(1, n // 2)
    mu = tp.DiscreteMeasure.uniform(space, np.sort(idx[:half]))
    nu = tp.DiscreteMeasure.uniform(space, np.sort(idx[half : 2 * half]))
    return mu, nu


def random_weighted_pair(rng, space):
    """Two fully supported measures with Dirichlet weights."""
    n = space.n
    idx = np.arange(n)
    wa = rng.dirichlet(np.ones(n))
    wb = rng.dirichlet(np.ones(n))
    return (
        tp.DiscreteMeasure(space, idx, wa),
        tp.DiscreteMeasure(space, idx, wb),
    )


def random_atoms_1d(rng, n: int):
    """Distinct positions in [0,1] with uniform weights."""
    xs = np.sort(rng.choice(np.linspace(0.0, 1.0, 2048), size=n, replace=False))
    return xs, np.full(n, 1.0 / n)


def random_diffuse_measure(rng, knots: int = 6) -> tp.Measure1D:
    """Faithful diffuse measure: strictly increasing piecewise-linear CDF."""
    xs = np.concatenate([[0.0], np.sort(rng.uniform(0.05, 0.95, size=knots)), [1.0]])
    gaps = rng.uniform(0.2, 1.0, size=xs.size - 1)
    ys = np.concatenate([[0.0], np.cumsum(gaps)])
    ys /= ys[-1]
    return tp.Measure1D.from_breakpoints(np.column_stack([xs, ys]))


def random_lipschitz_function(rng, knots: int = 7) -> tp.PLFunction:
    """1-Lipschitz piecewise-linear self-map of [0,1]."""
    xs = np.concatenate([[0.0], np.sort(rng.uniform(0.05, 0.95, size=knots)), [1.0]])
    slopes = rng.uniform(-1.0, 1.0, size=xs.size - 1)
    start = rng.uniform(0.0, 1.0)
    ys = np.concatenate([[start], start + np.cumsum(slopes * np.diff(xs))])
    # clipping knot values keeps the Lipschitz constant at most 1
    ys = np.clip(ys, 0.0, 1.0)
    return tp.PLFunction.from_pairs(np.column_stack([xs, ys]))


def random_family(rng, l: int, knots: int = 5) -> tp.EigenvalueMapFamily:
    """Ordered family built by pointwise-sorting random maps on shared knots."""
    xs = np.concatenate([[0.0], np.sort(rng.uniform(0.1, 0.9, size=knots)), [1.0]])
    vals = np.sort(rng.uniform(0.0, 1.0, size=(l, xs.size)), axis=0)
    entries = [
        (tp.PLFunction.from_pairs(np.column_stack([xs, vals[i]])), 1) for i in range(l)
    ]
    return tp.EigenvalueMapFamily(entries)


@pytest.fixture
def rng() -> np.random.Generator:
    return make_rng(20240817)
