"""Distances between probability measures on finite and interval spaces.

The p-cost transport distance comes in three computable forms that agree on
their common ground and are cross-checked in the tests:

* a primal coupling optimum over a finite space (assignment after expanding
  rational weights to equal atoms, or a linear program otherwise),
* the one-dimensional quantile formula, exact on piecewise-linear quantile
  functions,
* the Lipschitz dual at p = 1.

The sup-displacement distance is solved exactly by threshold search (see
``matching``), and the Prokhorov-style neighbourhood distance by subset
enumeration on small supports. The tracial p-seminorm of an eigenvalue
profile against a single trace measure lives here as well.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np
from scipy.optimize import linprog
from scipy.sparse import csr_matrix

from .errors import DegenerateComputationError, ValidationError
from .matching import bottleneck_distance, bottleneck_matching, common_rationalization, min_cost_assignment
from .metric_measure import DiscreteMeasure, Measure1D
from .pwlinear import integrate_abs_power, integrate_abs_power_measure, sup_abs_diff

if TYPE_CHECKING:  # pragma: no cover
    from .nccw import EigenvalueProfile

__all__ = [
    "TransportPlan",
    "DistanceReport",
    "wp_primal",
    "wp_quantile",
    "winf_quantile",
    "winf",
    "w1_dual",
    "levy_prokhorov",
    "schatten_p_seminorm",
]

MARGINAL_TOL = 1e-9
EXPANSION_CAP = 10_000
# expanded cost matrices above this entry count would not fit comfortably
EXPANSION_CELL_CAP = 20_000_000
EXACT_PROKHOROV_CAP = 20


@dataclass(frozen=True, eq=False)
class TransportPlan:
    """Coupling between two discrete measures on a common space."""

    source: DiscreteMeasure
    target: DiscreteMeasure
    coupling: np.ndarray

    def __init__(self, source: DiscreteMeasure, target: DiscreteMeasure, coupling):
        pi = np.asarray(coupling, dtype=float)
        if pi.shape != (source.size, target.size):
            raise ValidationError("coupling shape must match the two supports")
        if np.any(pi < -1e-12):
            raise ValidationError("coupling masses must be nonnegative")
        pi = np.maximum(pi, 0.0)
        if float(np.max(np.abs(pi.sum(axis=1) - source.weights))) > MARGINAL_TOL:
            raise ValidationError("coupling row sums must equal the source weights")
        if float(np.max(np.abs(pi.sum(axis=0) - target.weights))) > MARGINAL_TOL:
            raise ValidationError("coupling column sums must equal the target weights")
        pi = pi.copy()
        pi.flags.writeable = False
        object.__setattr__(self, "source", source)
        object.__setattr__(self, "target", target)
        object.__setattr__(self, "coupling", pi)

    def displacement_matrix(self) -> np.ndarray:
        return self.source.space.pairwise(self.source.support, self.target.support)

    def cost(self, p: float) -> float:
        """p-cost of this plan, (sum d^p pi)^(1/p)."""
        d = self.displacement_matrix()
        return float(np.sum(d**p * self.coupling) ** (1.0 / p))

    def max_displacement(self) -> float:
        d = self.displacement_matrix()
        live = self.coupling > 1e-14
        return float(np.max(d[live])) if np.any(live) else 0.0


@dataclass(frozen=True, eq=False)
class DistanceReport:
    """A distance value together with the computation route and a witness."""

    value: float
    method: str
    plan: TransportPlan | None = None
    matching: np.ndarray | None = None
    potential: np.ndarray | None = None
    potential_support: np.ndarray | None = None

    def to_dict(self) -> dict:
        witness: dict | None = None
        if self.plan is not None:
            witness = {
                "kind": "plan",
                "source_support": self.plan.source.support.tolist(),
                "target_support": self.plan.target.support.tolist(),
                "coupling": self.plan.coupling.tolist(),
            }
            if self.matching is not None:
                witness["matching"] = self.matching.tolist()
        elif self.potential is not None:
            witness = {
                "kind": "potential",
                "support": self.potential_support.tolist(),
                "values": self.potential.tolist(),
            }
        return {"value": self.value, "method": self.method, "witness": witness}


def _check_measures(space, mu: DiscreteMeasure, nu: DiscreteMeasure) -> None:
    if mu.space is not space or nu.space is not space:
        raise ValidationError("both measures must be built on the space they are compared on")


def _check_order(p) -> float:
    p = float(p)
    if math.isinf(p):
        raise ValidationError("p must be finite; the sup-displacement distance has its own entry point")
    if not (p >= 1.0):
        raise ValidationError("the cost exponent must satisfy p >= 1")
    return p


def _distances(space, mu: DiscreteMeasure, nu: DiscreteMeasure) -> np.ndarray:
    return np.asarray(space.pairwise(mu.support, nu.support), dtype=float)


def _assignment_plan(dist: np.ndarray, ca: np.ndarray, cb: np.ndarray, p: float):
    """Exact transport by expanding integer masses into equal atoms."""
    m, n = dist.shape
    rows = np.repeat(np.arange(m), ca)
    cols = np.repeat(np.arange(n), cb)
    total_atoms = rows.shape[0]
    cost = dist[np.ix_(rows, cols)] ** p
    raw, perm = min_cost_assignment(cost)
    coupling = np.zeros((m, n))
    np.add.at(coupling, (rows, cols[perm]), 1.0 / total_atoms)
    return raw / total_atoms, coupling


def _lp_plan(dist: np.ndarray, wa: np.ndarray, wb: np.ndarray, p: float):
    """Transport linear program over the coupling polytope."""
    m, n = dist.shape
    c = (dist**p).ravel()
    row_idx = np.concatenate([np.repeat(np.arange(m), n), m + np.tile(np.arange(n), m)])
    col_idx = np.concatenate([np.arange(m * n), np.arange(m * n)])
    a_eq = csr_matrix((np.ones(2 * m * n), (row_idx, col_idx)), shape=(m + n, m * n))
    b_eq = np.concatenate([wa, wb])
    res = linprog(c, A_eq=a_eq, b_eq=b_eq, bounds=(0, None), method="highs")
    if not res.success:
        raise DegenerateComputationError(f"transport program failed: {res.message}")
    coupling = np.maximum(res.x.reshape(m, n), 0.0)
    return max(float(res.fun), 0.0), coupling


def wp_primal(space, mu: DiscreteMeasure, nu: DiscreteMeasure, p) -> DistanceReport:
    """Optimal p-cost coupling between two discrete measures.

    Rational weights with a small common denominator go through an exact
    min-cost assignment on expanded equal atoms; everything else solves the
    coupling linear program. The report carries an optimal plan either way.
    """
    _check_measures(space, mu, nu)
    p = _check_order(p)
    dist = _distances(space, mu, nu)
    dmax = float(dist.max())
    scaled = dist / dmax if dmax > 0 else dist
    counts = common_rationalization(mu.weights, nu.weights)
    if counts is not None:
        total = int(counts[0].sum())
        if total > EXPANSION_CAP or total * total > EXPANSION_CELL_CAP:
            counts = None
    if counts is not None:
        raw, coupling = _assignment_plan(scaled, counts[0], counts[1], p)
        method = "primal-assignment"
    else:
        raw, coupling = _lp_plan(scaled, mu.weights, nu.weights, p)
        method = "primal-lp"
    value = dmax * raw ** (1.0 / p) if dmax > 0 else 0.0
    return DistanceReport(value, method, plan=TransportPlan(mu, nu, coupling))


def wp_quantile(mu: Measure1D, nu: Measure1D, p) -> float:
    """p-cost distance on [0, 1] through the quantile-function formula."""
    p = _check_order(p)
    q_mu = mu.quantile_curve()
    q_nu = nu.quantile_curve()
    return integrate_abs_power(q_mu, q_nu, p) ** (1.0 / p)


def winf_quantile(mu: Measure1D, nu: Measure1D) -> float:
    """Sup-displacement distance on [0, 1]: ess-sup of the quantile gap."""
    return sup_abs_diff(mu.quantile_curve(), nu.quantile_curve())


def winf(space, mu: DiscreteMeasure, nu: DiscreteMeasure) -> DistanceReport:
    """Smallest sup-displacement over couplings, exact by threshold search.

    Uniform equal-size measures reduce to a bottleneck matching; the witness
    permutation is the lexicographically smallest optimal one. General
    weights run a max-flow feasibility search over the distance set.
    """
    _check_measures(space, mu, nu)
    dist = _distances(space, mu, nu)
    n = mu.size
    uniform = (
        nu.size == n
        and np.max(np.abs(mu.weights - 1.0 / n)) < 1e-12
        and np.max(np.abs(nu.weights - 1.0 / n)) < 1e-12
    )
    if uniform:
        value, perm = bottleneck_matching(dist)
        coupling = np.zeros((n, n))
        coupling[np.arange(n), perm] = 1.0 / n
        return DistanceReport(
            value, "bottleneck-matching", plan=TransportPlan(mu, nu, coupling), matching=perm
        )
    value, coupling = bottleneck_distance(dist, mu.weights, nu.weights)
    return DistanceReport(value, "bottleneck-flow", plan=TransportPlan(mu, nu, coupling))


def w1_dual(space, mu: DiscreteMeasure, nu: DiscreteMeasure) -> DistanceReport:
    """Best 1-Lipschitz potential separating the two measures.

    Maximizes the integral of f against (mu - nu) subject to the Lipschitz
    constraints on every support pair; the optimum equals the primal 1-cost
    distance. The potential is pinned to zero at the first support point.
    """
    _check_measures(space, mu, nu)
    union = np.union1d(mu.support, nu.support)
    k = union.shape[0]
    delta = np.zeros(k)
    pos_mu = np.searchsorted(union, mu.support)
    pos_nu = np.searchsorted(union, nu.support)
    np.add.at(delta, pos_mu, mu.weights)
    np.add.at(delta, pos_nu, -nu.weights)
    if k == 1:
        return DistanceReport(0.0, "dual-lp", potential=np.zeros(1), potential_support=union)
    dist = np.asarray(space.pairwise(union, union), dtype=float)
    ii, jj = np.triu_indices(k, 1)
    npairs = ii.shape[0]
    rows = np.repeat(np.arange(2 * npairs), 2)
    cols = np.empty(4 * npairs, dtype=int)
    data = np.empty(4 * npairs)
    cols[0::4], cols[1::4] = ii, jj
    data[0::4], data[1::4] = 1.0, -1.0
    cols[2::4], cols[3::4] = ii, jj
    data[2::4], data[3::4] = -1.0, 1.0
    a_ub = csr_matrix((data, (rows, cols)), shape=(2 * npairs, k))
    b_ub = np.repeat(dist[ii, jj], 2)
    bounds = [(0.0, 0.0)] + [(None, None)] * (k - 1)
    res = linprog(-delta, A_ub=a_ub, b_ub=b_ub, bounds=bounds, method="highs")
    if not res.success:
        raise DegenerateComputationError(f"dual program failed: {res.message}")
    return DistanceReport(
        max(-float(res.fun), 0.0), "dual-lp", potential=res.x, potential_support=union
    )


def levy_prokhorov(space, mu: DiscreteMeasure, nu: DiscreteMeasure) -> float:
    """Exact Prokhorov-style neighbourhood distance on small supports.

    For every threshold r taken from the pairwise distance set, the worst
    one-sided mass excess h(r) over all subsets of the combined support is
    evaluated by bit-parallel subset sweeps; the answer is the least r with
    h(r) <= r, which always lands in the distance set or the excess set.
    """
    _check_measures(space, mu, nu)
    union = np.union1d(mu.support, nu.support)
    k = union.shape[0]
    if k > EXACT_PROKHOROV_CAP:
        raise ValidationError("support too large for exact d_P")
    a = np.zeros(k)
    b = np.zeros(k)
    np.add.at(a, np.searchsorted(union, mu.support), mu.weights)
    np.add.at(b, np.searchsorted(union, nu.support), nu.weights)
    dist = np.asarray(space.pairwise(union, union), dtype=float)
    size = 1 << k
    bits = ((np.arange(size)[:, None] >> np.arange(k)) & 1).astype(bool)
    mu_mass = bits @ a
    nu_mass = bits @ b
    dvals = np.unique(dist)
    best = math.inf
    for t, d in enumerate(dvals):
        if d >= best:
            break
        masks = [int(np.bitwise_or.reduce(1 << np.nonzero(dist[i] <= d)[0])) for i in range(k)]
        neigh = np.zeros(size, dtype=np.int64)
        for i in range(k):
            neigh[bits[:, i]] |= masks[i]
        h = max(
            float(np.max(mu_mass - nu_mass[neigh])),
            float(np.max(nu_mass - mu_mass[neigh])),
            0.0,
        )
        next_d = dvals[t + 1] if t + 1 < dvals.shape[0] else math.inf
        if h <= d:
            best = min(best, float(d))
        elif h < next_d:
            best = min(best, h)
    return best


def schatten_p_seminorm(profile: "EigenvalueProfile", mu: Measure1D, p) -> float:
    """Uniform tracial p-seminorm of an eigenvalue profile at one trace.

    Averages |lambda_j(t)|^p over the N eigenvalue functions, integrates
    against the trace measure and takes the p-th root. The supremum over a
    family of traces is the caller's loop.
    """
    p = _check_order(p)
    total = 0.0
    for fn, count in profile.entries:
        total += float(count) * integrate_abs_power_measure(fn.as_graph(), mu.curve, p)
    return (total / float(profile.total)) ** (1.0 / p)
