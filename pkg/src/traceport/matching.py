"""Bottleneck couplings via threshold search plus flow feasibility.

The smallest max-displacement of a coupling between two finitely supported
measures is always one of the pairwise distances, and feasibility of a
threshold r (a coupling supported on pairs at distance <= r) is monotone in
r. A binary search over the sorted distinct distances with an exact
feasibility check therefore returns the infimum exactly, with no tolerance.

Feasibility runs as an integer max-flow whenever the weights have a small
common denominator (scipy's solver is exact on integers); otherwise a plain
breadth-first augmenting-path flow on floats takes over, whose augmentation
count is bounded by the edge count independently of capacities.
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_bipartite_matching, maximum_flow

from .errors import ValidationError

__all__ = [
    "rationalize_weights",
    "common_rationalization",
    "bottleneck_distance",
    "bottleneck_matching_value",
    "bottleneck_matching",
    "min_cost_assignment",
]

RATIONAL_DENOMINATOR_CAP = 10**6
RATIONAL_LCM_CAP = 10**7


def rationalize_weights(weights: np.ndarray, *, lcm_cap: int = RATIONAL_LCM_CAP):
    """Integer masses and common denominator, or None if not representable."""
    fracs = [Fraction(float(w)).limit_denominator(RATIONAL_DENOMINATOR_CAP) for w in weights]
    denom = 1
    for f in fracs:
        denom = denom * f.denominator // math.gcd(denom, f.denominator)
        if denom > lcm_cap:
            return None
    counts = np.array([int(f * denom) for f in fracs], dtype=np.int64)
    err = float(np.max(np.abs(counts / denom - np.asarray(weights, dtype=float))))
    if err > 1e-12 or np.any(counts <= 0):
        return None
    return counts, denom


def common_rationalization(wa: np.ndarray, wb: np.ndarray):
    """Both weight vectors as integers over one denominator, or None."""
    ra = rationalize_weights(wa)
    rb = rationalize_weights(wb)
    if ra is None or rb is None:
        return None
    (ca, da), (cb, db) = ra, rb
    denom = da * db // math.gcd(da, db)
    if denom > RATIONAL_LCM_CAP:
        return None
    return ca * (denom // da), cb * (denom // db)


def _flow_plan_int(adj: np.ndarray, ca: np.ndarray, cb: np.ndarray):
    """Max flow through allowed pairs with integer masses; plan or None."""
    m, n = adj.shape
    total = int(ca.sum())
    if int(cb.sum()) != total:
        return None
    src, snk = m + n, m + n + 1
    rows, cols, caps = [], [], []
    for i in range(m):
        rows.append(src)
        cols.append(i)
        caps.append(int(ca[i]))
    for j in range(n):
        rows.append(m + j)
        cols.append(snk)
        caps.append(int(cb[j]))
    ii, jj = np.nonzero(adj)
    for i, j in zip(ii, jj):
        rows.append(int(i))
        cols.append(m + int(j))
        caps.append(total)
    graph = csr_matrix((caps, (rows, cols)), shape=(m + n + 2, m + n + 2), dtype=np.int64)
    # masses are bounded by the rationalization cap, far below int32 range
    res = maximum_flow(graph.astype(np.int32), src, snk)
    if res.flow_value != total:
        return None
    flow = res.flow.tocoo()
    plan = np.zeros((m, n))
    inner = (flow.row < m) & (flow.col >= m) & (flow.col < m + n) & (flow.data > 0)
    plan[flow.row[inner], flow.col[inner] - m] = flow.data[inner]
    return plan


def _flow_plan_float(adj: np.ndarray, wa: np.ndarray, wb: np.ndarray):
    """Breadth-first augmenting flow with float masses; plan or None.

    Every augmentation runs along a shortest residual path from the set of
    unsaturated rows, so the augmentation count stays polynomial in the edge
    count no matter what the capacities are.
    """
    m, n = adj.shape
    plan = np.zeros((m, n))
    res_a = wa.astype(float).copy()
    res_b = wb.astype(float).copy()
    tol = 1e-15 * max(1.0, float(wa.sum()))
    while np.any(res_a > tol):
        prev_col = np.full(n, -2, dtype=int)
        prev_row = np.full(m, -2, dtype=int)
        frontier_rows = list(np.nonzero(res_a > tol)[0])
        for i in frontier_rows:
            prev_row[i] = -1
        sink_col = -1
        while frontier_rows and sink_col < 0:
            next_cols = []
            for i in frontier_rows:
                for j in np.nonzero(adj[i])[0]:
                    if prev_col[j] == -2:
                        prev_col[j] = i
                        if res_b[j] > tol:
                            sink_col = j
                            break
                        next_cols.append(j)
                if sink_col >= 0:
                    break
            if sink_col >= 0:
                break
            frontier_rows = []
            for j in next_cols:
                for i in np.nonzero(plan[:, j] > tol)[0]:
                    if prev_row[i] == -2:
                        prev_row[i] = j
                        frontier_rows.append(i)
        if sink_col < 0:
            return None
        # walk back to an unsaturated row, then apply the bottleneck amount
        path = []  # ("f", i, j) adds to plan[i, j]; ("b", i, j) subtracts
        j = sink_col
        amount = res_b[j]
        while True:
            i = prev_col[j]
            path.append(("f", i, j))
            if prev_row[i] == -1:
                amount = min(amount, res_a[i])
                root_row = i
                break
            jj = prev_row[i]
            amount = min(amount, plan[i, jj])
            path.append(("b", i, jj))
            j = jj
        for kind, i, j in path:
            plan[i, j] += amount if kind == "f" else -amount
        res_a[root_row] -= amount
        res_b[sink_col] -= amount
    if float(res_a.sum()) > 1e-9:
        return None
    return plan


def _feasible_plan(dist: np.ndarray, wa: np.ndarray, wb: np.ndarray, r: float, rational):
    adj = dist <= r
    if rational is not None:
        ca, cb = rational
        return _flow_plan_int(adj, ca, cb)
    return _flow_plan_float(adj, wa, wb)


def bottleneck_distance(dist: np.ndarray, wa: np.ndarray, wb: np.ndarray):
    """Smallest achievable sup-displacement and an optimal coupling.

    Returns ``(value, plan)`` where the plan rows sum to ``wa`` and columns to
    ``wb`` (up to the integer scaling used internally).
    """
    dist = np.asarray(dist, dtype=float)
    wa = np.asarray(wa, dtype=float)
    wb = np.asarray(wb, dtype=float)
    if dist.shape != (wa.shape[0], wb.shape[0]):
        raise ValidationError("distance matrix shape must match the two supports")
    rational = common_rationalization(wa, wb)
    candidates = np.unique(dist)
    lo, hi = 0, candidates.shape[0] - 1
    plan_hi = _feasible_plan(dist, wa, wb, candidates[hi], rational)
    if plan_hi is None:
        raise ValidationError("no coupling exists; weights do not balance")
    best_plan = plan_hi
    while lo < hi:
        mid = (lo + hi) // 2
        plan = _feasible_plan(dist, wa, wb, candidates[mid], rational)
        if plan is not None:
            hi = mid
            best_plan = plan
        else:
            lo = mid + 1
    value = float(candidates[hi])
    total = best_plan.sum()
    return value, best_plan / total


def _has_perfect_matching(adj: csr_matrix, n: int) -> bool:
    match = maximum_bipartite_matching(adj, perm_type="column")
    return int(np.sum(match >= 0)) == n


def bottleneck_matching_value(dist: np.ndarray) -> float:
    """Optimal bottleneck assignment value, without a witness permutation."""
    dist = np.asarray(dist, dtype=float)
    if dist.ndim != 2 or dist.shape[0] != dist.shape[1]:
        raise ValidationError("bottleneck matching needs a square distance matrix")
    n = dist.shape[0]
    candidates = np.unique(dist)
    lo, hi = 0, candidates.shape[0] - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if _has_perfect_matching(csr_matrix(dist <= candidates[mid]), n):
            hi = mid
        else:
            lo = mid + 1
    return float(candidates[hi])


def bottleneck_matching(dist: np.ndarray) -> tuple[float, np.ndarray]:
    """Optimal bottleneck assignment between equal-size point lists.

    Returns the minimal max-displacement together with the lexicographically
    smallest permutation achieving it, so witnesses are reproducible.
    """
    dist = np.asarray(dist, dtype=float)
    r = bottleneck_matching_value(dist)
    n = dist.shape[0]
    adj = dist <= r

    # greedy lexicographic refinement: fix the smallest feasible column per row
    perm = np.full(n, -1, dtype=int)
    used = np.zeros(n, dtype=bool)
    for i in range(n):
        feasible_j = -1
        for j in range(n):
            if used[j] or not adj[i, j]:
                continue
            rest_rows = np.arange(i + 1, n)
            if rest_rows.size == 0:
                feasible_j = j
                break
            rest_cols = np.nonzero(~used & (np.arange(n) != j))[0]
            sub = adj[np.ix_(rest_rows, rest_cols)]
            if _has_perfect_matching(csr_matrix(sub), rest_rows.size):
                feasible_j = j
                break
        if feasible_j < 0:
            raise ValidationError("lexicographic refinement failed")
        used[feasible_j] = True
        perm[i] = feasible_j
    return r, perm


def min_cost_assignment(cost: np.ndarray) -> tuple[float, np.ndarray]:
    """Total cost and permutation of a minimum-cost assignment."""
    rows, cols = linear_sum_assignment(cost)
    perm = np.empty(cost.shape[0], dtype=int)
    perm[rows] = cols
    return float(cost[rows, cols].sum()), perm
