"""Eigenvalue calculus for one-dimensional subhomogeneous building blocks.

Morphisms between the building blocks handled here are determined, up to
unitaries, by a finite ordered family of eigenvalue maps on [0, 1]. That
makes the interesting metrics computable at the eigenvalue level:

* ``d_diagonal`` is the uniform distance between two ordered map families,
* ``d_w_matrices`` is the bottleneck matching distance between eigenvalue
  multisets of two self-adjoint (or normal) matrices,
* ``d_w_profiles`` takes the fiberwise matching distance of two profiles and
  its supremum over a grid.

Families and profiles store distinct maps with multiplicities as exact
Python integers; the tower construction of ``jiangsu_step`` produces counts
far beyond 64-bit range, and nothing here ever materializes them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import DegenerateComputationError, ValidationError
from .matching import bottleneck_matching_value
from .metric_measure import Measure1D, pushforward_function
from .pwlinear import MonotoneCurve, PLFunction
from .wasserstein import winf_quantile, wp_quantile

__all__ = [
    "DimensionDropSpec",
    "RazakSpec",
    "EigenvalueMapFamily",
    "EigenvalueProfile",
    "StepPlan",
    "d_diagonal",
    "d_w_matrices",
    "d_w_profiles",
    "gl_profile",
    "gl_separation_check",
    "expand_multiset",
    "apply_observable",
    "dw_sampled",
    "lipschitz_battery",
    "pushforward_trace",
    "wp_diagonal_pair",
    "jiangsu_step",
    "intertwining_defect",
    "simulate_tower",
    "is_eps_dense",
]

MAP_RANGE_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class DimensionDropSpec:
    """Interval algebra with a full matrix fiber pinched at both endpoints."""

    p: int
    q: int

    def __init__(self, p: int, q: int):
        p, q = int(p), int(q)
        if p < 1 or q < 1:
            raise ValidationError("fiber orders must be positive")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "q", q)

    @property
    def prime(self) -> bool:
        return math.gcd(self.p, self.q) == 1

    @property
    def fiber_size(self) -> int:
        return self.p * self.q


@dataclass(frozen=True, eq=False)
class RazakSpec:
    """Stably projectionless building block with one pinched endpoint.

    At 0 the fiber decomposes into n equal blocks; at 1 into n - 1 equal
    blocks plus a zero block of the same size.
    """

    n: int
    k: int

    def __init__(self, n: int, k: int):
        n, k = int(n), int(k)
        if n < 2:
            raise ValidationError("a Razak-type block needs n >= 2")
        if k < 1:
            raise ValidationError("the block size k must be positive")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "k", k)

    @property
    def fiber_size(self) -> int:
        return self.n * self.k

    @property
    def boundary_multiplicities(self) -> tuple[int, int, int]:
        """(blocks at 0, blocks at 1, zero-block size at 1)."""
        return self.n, self.n - 1, self.k


def _validate_unit_map(fn: PLFunction, what: str) -> None:
    a, b = fn.domain
    if abs(a) > MAP_RANGE_TOL or abs(b - 1.0) > MAP_RANGE_TOL:
        raise ValidationError(f"{what} must be defined on [0, 1]")
    lo, hi = fn.bounds()
    if lo < -MAP_RANGE_TOL or hi > 1.0 + MAP_RANGE_TOL:
        raise ValidationError(f"{what} must take values in [0, 1]")


def _validate_entries(entries, *, what: str):
    out = []
    for item in entries:
        fn, count = item
        if not isinstance(fn, PLFunction):
            raise ValidationError(f"{what} entries must pair a piecewise-linear map with a count")
        count = int(count)
        if count < 1:
            raise ValidationError(f"{what} multiplicities must be positive")
        out.append((fn, count))
    if not out:
        raise ValidationError(f"{what} must contain at least one map")
    return tuple(out)


@dataclass(frozen=True, eq=False)
class EigenvalueMapFamily:
    """Ordered eigenvalue maps of a diagonal morphism, with multiplicities.

    Entries are (map, count) pairs; consecutive maps must be pointwise
    ordered, which is checked at the union of their breakpoints (both maps
    are linear in between, so that is conclusive). Counts are exact integers
    and may exceed 64-bit range.
    """

    entries: tuple[tuple[PLFunction, int], ...]

    def __init__(self, entries):
        entries = _validate_entries(entries, what="family")
        for fn, _ in entries:
            _validate_unit_map(fn, "an eigenvalue map")
        for (fa, _), (fb, _) in zip(entries, entries[1:]):
            knots = np.union1d(fa.knots_x, fb.knots_x)
            if np.any(fa(knots) > fb(knots) + MAP_RANGE_TOL):
                raise ValidationError("eigenvalue maps must be listed in pointwise order")
        object.__setattr__(self, "entries", entries)

    @staticmethod
    def from_maps(maps) -> "EigenvalueMapFamily":
        return EigenvalueMapFamily(tuple((m, 1) for m in maps))

    @property
    def l(self) -> int:
        return sum(count for _, count in self.entries)

    def expanded(self, limit: int = 10_000) -> list[PLFunction]:
        if self.l > limit:
            raise ValidationError("family too large to materialize map by map")
        out: list[PLFunction] = []
        for fn, count in self.entries:
            out.extend([fn] * count)
        return out

    def breakpoints(self) -> np.ndarray:
        return np.unique(np.concatenate([fn.knots_x for fn, _ in self.entries]))


@dataclass(frozen=True, eq=False)
class EigenvalueProfile:
    """Eigenvalue functions of a self-adjoint element, with multiplicities."""

    entries: tuple[tuple[PLFunction, int], ...]

    def __init__(self, entries):
        object.__setattr__(self, "entries", _validate_entries(entries, what="profile"))

    @staticmethod
    def constant(value: float, count: int = 1) -> "EigenvalueProfile":
        return EigenvalueProfile(((PLFunction.constant(float(value)), int(count)),))

    @property
    def total(self) -> int:
        return sum(count for _, count in self.entries)

    def breakpoints(self) -> np.ndarray:
        return np.unique(np.concatenate([fn.knots_x for fn, _ in self.entries]))


# ---------------------------------------------------------------------------
# distances
# ---------------------------------------------------------------------------


def _pointwise_gap(fa: PLFunction, fb: PLFunction) -> float:
    knots = np.union1d(fa.knots_x, fb.knots_x)
    return float(np.max(np.abs(fa(knots) - fb(knots))))


def d_diagonal(a: EigenvalueMapFamily, b: EigenvalueMapFamily) -> float:
    """Uniform distance between two ordered families of equal size.

    The i-th map of one family is compared with the i-th of the other;
    multiplicities are consumed in cumulative order, so equal blocks pair up
    without ever expanding the families.
    """
    if a.l != b.l:
        raise ValidationError("families must have the same number of maps")
    ia = ib = 0
    ra, rb = a.entries[0][1], b.entries[0][1]
    worst = 0.0
    while True:
        worst = max(worst, _pointwise_gap(a.entries[ia][0], b.entries[ib][0]))
        step = min(ra, rb)
        ra -= step
        rb -= step
        if ra == 0:
            ia += 1
            if ia == len(a.entries):
                break
            ra = a.entries[ia][1]
        if rb == 0:
            ib += 1
            rb = b.entries[ib][1]
    return worst


def d_w_matrices(eigs_a, eigs_b) -> float:
    """Matching distance between two eigenvalue multisets of equal size.

    The optimum over bijections of the largest modulus difference. Real
    multisets reduce to sorted alignment; genuinely complex ones run the
    threshold search over pairwise distances with a bipartite matching test.
    """
    a = np.asarray(eigs_a).ravel()
    b = np.asarray(eigs_b).ravel()
    if a.shape != b.shape:
        raise ValidationError("eigenvalue multisets must have equal sizes")
    if a.size == 0:
        return 0.0
    if not (np.iscomplexobj(a) and np.any(a.imag != 0)) and not (
        np.iscomplexobj(b) and np.any(b.imag != 0)
    ):
        return float(np.max(np.abs(np.sort(a.real) - np.sort(b.real))))
    dist = np.abs(a[:, None] - b[None, :])
    return bottleneck_matching_value(dist)


def _sorted_multiset_gap(pairs_a, pairs_b) -> float:
    """Sorted-alignment gap of two weighted real multisets of equal total.

    Each argument is a list of (value, count) with exact integer counts; the
    alignment pairs mass in sorted order, which is optimal for real values.
    """
    sa = sorted(pairs_a)
    sb = sorted(pairs_b)
    ia = ib = 0
    ra, rb = sa[0][1], sb[0][1]
    worst = 0.0
    while True:
        worst = max(worst, abs(sa[ia][0] - sb[ib][0]))
        step = min(ra, rb)
        ra -= step
        rb -= step
        if ra == 0:
            ia += 1
            if ia == len(sa):
                break
            ra = sa[ia][1]
        if rb == 0:
            ib += 1
            rb = sb[ib][1]
    return worst


def d_w_profiles(a: EigenvalueProfile, b: EigenvalueProfile, *, grid: int = 512) -> float:
    """Supremum over fibers of the matching distance between two profiles.

    Fibers are evaluated on the union of all breakpoints refined by an
    equally spaced grid (default 512 points). Between crossings of the
    eigenvalue functions the fiberwise distance is piecewise linear, so the
    result is a lower bound of the true supremum that is exact whenever all
    crossings happen at evaluated points.
    """
    if a.total != b.total:
        raise ValidationError("profiles must have equal total multiplicity")
    if grid < 2:
        raise ValidationError("the evaluation grid needs at least 2 points")
    knots = np.union1d(
        np.union1d(a.breakpoints(), b.breakpoints()), np.linspace(0.0, 1.0, grid)
    )
    vals_a = [(fn(knots), count) for fn, count in a.entries]
    vals_b = [(fn(knots), count) for fn, count in b.entries]
    worst = 0.0
    for idx in range(knots.shape[0]):
        pa = [(float(v[idx]), c) for v, c in vals_a]
        pb = [(float(v[idx]), c) for v, c in vals_b]
        worst = max(worst, _sorted_multiset_gap(pa, pb))
    return worst


# ---------------------------------------------------------------------------
# the separating positive element
# ---------------------------------------------------------------------------


def gl_profile(spec, t: float):
    """Fiberwise eigenvalue multiset of the canonical separating element.

    Returns (values, counts) with exact integer counts. For a dimension-drop
    block (or a trivial matrix bundle) every eigenvalue at fiber t equals t;
    for a Razak-type block the eigenvalues are 1 with multiplicity (n-1)k
    and 1 - t with multiplicity k.
    """
    t = float(t)
    if t < -MAP_RANGE_TOL or t > 1.0 + MAP_RANGE_TOL:
        raise ValidationError("the fiber coordinate must lie in [0, 1]")
    t = min(max(t, 0.0), 1.0)
    if isinstance(spec, DimensionDropSpec):
        return [t], [spec.fiber_size]
    if isinstance(spec, RazakSpec):
        return [1.0, 1.0 - t], [(spec.n - 1) * spec.k, spec.k]
    raise ValidationError("unsupported block specification")


def expand_multiset(values, counts, *, limit: int = 200_000) -> np.ndarray:
    total = sum(int(c) for c in counts)
    if total > limit:
        raise ValidationError("multiset too large to materialize")
    return np.repeat(np.asarray(values, dtype=float), [int(c) for c in counts])


def gl_separation_check(spec, s_tuple, t_tuple):
    """Compare the separating element's matching distance with the sup gap.

    ``lhs`` is the matching distance between the concatenated fiber multisets
    of the separating element over the two parameter tuples; ``rhs`` is the
    largest coordinatewise difference. The flag records agreement to 1e-9.
    """
    s = np.asarray(s_tuple, dtype=float).ravel()
    t = np.asarray(t_tuple, dtype=float).ravel()
    if s.shape != t.shape:
        raise ValidationError("parameter tuples must have equal lengths")
    if np.any(np.diff(s) < 0) or np.any(np.diff(t) < 0):
        raise ValidationError("parameter tuples must be sorted ascending")
    if s.size == 0:
        return 0.0, 0.0, True
    vals_s: list[np.ndarray] = []
    vals_t: list[np.ndarray] = []
    for si, ti in zip(s, t):
        vs, cs = gl_profile(spec, si)
        vt, ct = gl_profile(spec, ti)
        vals_s.append(expand_multiset(vs, cs))
        vals_t.append(expand_multiset(vt, ct))
    lhs = d_w_matrices(np.concatenate(vals_s), np.concatenate(vals_t))
    rhs = float(np.max(np.abs(s - t)))
    return lhs, rhs, abs(lhs - rhs) <= 1e-9


# ---------------------------------------------------------------------------
# observables and traces
# ---------------------------------------------------------------------------


def apply_observable(family: EigenvalueMapFamily, f: PLFunction) -> EigenvalueProfile:
    """Profile of f applied to a diagonal morphism's eigenvalue maps."""
    return EigenvalueProfile(tuple((f.compose(fn), count) for fn, count in family.entries))


def dw_sampled(a: EigenvalueMapFamily, b: EigenvalueMapFamily, observables, *, grid: int = 512) -> float:
    """Largest fiberwise matching distance over a battery of observables.

    A finite stand-in for the supremum defining the matching distance of two
    morphisms: each observable is applied to both families and the profile
    distance is taken; the identity observable alone already attains the
    diagonal distance, so batteries containing it give the exact value
    whenever the supremum is realized eigenvalue by eigenvalue.
    """
    observables = list(observables)
    if not observables:
        raise ValidationError("the observable battery must not be empty")
    return max(
        d_w_profiles(apply_observable(a, f), apply_observable(b, f), grid=grid)
        for f in observables
    )


def lipschitz_battery(seed: int, count: int = 16, knots: int = 9, *, include_identity: bool = True):
    """Seeded battery of 1-Lipschitz piecewise-linear observables on [0, 1].

    Values stay within [-1, 1]; clipping preserves the Lipschitz bound. The
    identity is prepended by default since it certifies the diagonal
    distance.
    """
    rng = np.random.default_rng(seed)
    fns: list[PLFunction] = [PLFunction.identity()] if include_identity else []
    for _ in range(count):
        inner = np.sort(rng.uniform(0.0, 1.0, size=max(knots - 2, 0)))
        xs = np.unique(np.concatenate([[0.0], inner, [1.0]]))
        vals = np.empty(xs.shape[0])
        vals[0] = rng.uniform(-1.0, 1.0)
        slopes = rng.uniform(-1.0, 1.0, size=xs.shape[0] - 1)
        for i in range(1, xs.shape[0]):
            vals[i] = vals[i - 1] + slopes[i - 1] * (xs[i] - xs[i - 1])
        vals = np.clip(vals, -1.0, 1.0)
        fns.append(PLFunction(xs, vals))
    return fns


def _mixture_curve(curves, weights) -> MonotoneCurve:
    knots = curves[0].pts[:, 0]
    for c in curves[1:]:
        knots = np.union1d(knots, c.pts[:, 0])
    lo = np.zeros(knots.shape[0])
    hi = np.zeros(knots.shape[0])
    for w, c in zip(weights, curves):
        lo += w * c.eval_lower(knots)
        hi += w * c.eval_upper(knots)
    rows = np.empty((2 * knots.shape[0], 2))
    rows[0::2, 0] = knots
    rows[0::2, 1] = lo
    rows[1::2, 0] = knots
    rows[1::2, 1] = hi
    return MonotoneCurve(rows)


def pushforward_trace(fam: EigenvalueMapFamily, mu: Measure1D) -> Measure1D:
    """Spectral measure of the composed trace: the average of the pushforwards.

    Each eigenvalue map transports mu; the results are mixed with weights
    count / l. This is the measure representing the trace precomposed with
    the diagonal morphism.
    """
    l = fam.l
    curves = []
    weights = []
    for fn, count in fam.entries:
        curves.append(pushforward_function(mu, fn).curve)
        weights.append(float(Fraction(count, l)))
    if len(curves) == 1:
        return Measure1D(curves[0])
    return Measure1D(_mixture_curve(curves, weights))


def wp_diagonal_pair(a: EigenvalueMapFamily, b: EigenvalueMapFamily, mu: Measure1D, p) -> float:
    """Transport distance between the pushed-forward spectral measures."""
    if a.l != b.l:
        raise ValidationError("families must have the same number of maps")
    push_a = pushforward_trace(a, mu)
    push_b = pushforward_trace(b, mu)
    if math.isinf(float(p)):
        return winf_quantile(push_a, push_b)
    return wp_quantile(push_a, push_b, p)


# ---------------------------------------------------------------------------
# the inductive tower
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class StepPlan:
    """One stage of the tower: parameters, map counts and the map family.

    Counts are kept by map type (identity, constant, max-type). The stored
    family lists the same multiset of maps in pointwise order, which splits
    the identity block around the constant one; fiber by fiber the two
    descriptions agree.
    """

    m: int
    p: int
    q: int
    n: int
    p_next: int
    q_next: int
    c: float
    k: int
    count_identity: int
    count_constant: int
    count_max: int
    family: EigenvalueMapFamily

    def __init__(self, m, p, q, n, p_next, q_next, c, k, count_identity, count_constant, count_max, family):
        if m < 1:
            raise ValidationError("stage index must be at least 1")
        if n < 2 * m:
            raise ValidationError("the exponent must be at least twice the stage index")
        if not (p**n > n * n * q and q**n > n * n * p):
            raise ValidationError("exponent inequalities violated")
        if min(count_identity, count_constant, count_max) < 0:
            raise ValidationError("map counts must be nonnegative")
        if count_identity + count_constant + count_max != k:
            raise ValidationError("map counts must sum to the fiber total")
        if count_identity != q**n * (p**n - q) or k - p_next != p**n * (q**n - p):
            raise ValidationError("count identities violated")
        if family.l != k:
            raise ValidationError("family size must equal the fiber total")
        for name, value in (
            ("m", m), ("p", p), ("q", q), ("n", n),
            ("p_next", p_next), ("q_next", q_next), ("k", k),
            ("count_identity", count_identity),
            ("count_constant", count_constant),
            ("count_max", count_max),
        ):
            object.__setattr__(self, name, int(value))
        object.__setattr__(self, "c", float(c))
        object.__setattr__(self, "family", family)

    @property
    def r0(self) -> int:
        return self.count_identity

    @property
    def r1(self) -> int:
        return self.k - self.p_next

    @property
    def identity_proportion(self) -> float:
        return float(Fraction(self.count_identity, self.k))

    @property
    def defect_bound(self) -> float:
        return 2.0 * (1.0 - self.identity_proportion)


def jiangsu_step(p: int, q: int, m: int, c: float, *, n_cap: int = 64) -> StepPlan:
    """Build one tower stage from coprime parameters p < q.

    Picks the minimal exponent n >= 2m with p^n > n^2 q and q^n > n^2 p
    (minimality makes the construction deterministic), then lays out
    p^n q^n eigenvalue maps: identities except for p^(n+1) constants at c
    and enough max-type maps to interpolate. The identity proportion
    exceeds 1 - 1/n^2.
    """
    p, q, m = int(p), int(q), int(m)
    c = float(c)
    if math.gcd(p, q) != 1:
        raise ValidationError("the two bases must be coprime")
    if not (1 <= p < q):
        raise ValidationError("the bases must satisfy 1 <= p < q")
    if m < 1:
        raise ValidationError("stage index must be at least 1")
    if not (0.0 <= c <= 1.0):
        raise ValidationError("the pinning constant must lie in [0, 1]")
    n = None
    for cand in range(2 * m, n_cap + 1):
        if p**cand > cand * cand * q and q**cand > cand * cand * p:
            n = cand
            break
    if n is None:
        raise DegenerateComputationError(f"no admissible exponent up to {n_cap}")
    k = p**n * q**n
    p_next = p ** (n + 1)
    q_next = q ** (n + 1)
    count_identity = k - q_next
    count_constant = p_next
    count_max = q_next - p_next
    family = EigenvalueMapFamily(
        (
            (PLFunction.min_with(c), count_constant),
            (PLFunction.identity(), count_identity - count_constant),
            (PLFunction.max_with(c), q_next),
        )
    )
    return StepPlan(
        m, p, q, n, p_next, q_next, c, k,
        count_identity, count_constant, count_max, family,
    )


def intertwining_defect(plan, fns) -> float:
    """Worst deviation of averaging over the maps from leaving f alone.

    Accepts a StepPlan or a bare EigenvalueMapFamily. For each supplied f
    with sup-norm at most 1, computes the sup-norm of (1/k) sum_i f(xi_i) - f
    exactly on the union of breakpoints; the result never exceeds twice the
    non-identity proportion.
    """
    family = plan.family if isinstance(plan, StepPlan) else plan
    fns = list(fns)
    if not fns:
        raise ValidationError("at least one test function is required")
    total = family.l
    worst = 0.0
    for f in fns:
        if f.sup_abs() > 1.0 + 1e-12:
            raise ValidationError("test functions must have sup-norm at most 1")
        composed = [f.compose(fn) for fn, _ in family.entries]
        weights = [float(Fraction(count, total)) for _, count in family.entries]
        defect = PLFunction.combine(composed, weights, offset_fn=f)
        worst = max(worst, defect.sup_abs())
    return worst


def simulate_tower(p0: int, q0: int, c_seq, M: int) -> list[StepPlan]:
    """Iterate the tower construction M times, threading the parameters."""
    M = int(M)
    if M < 0:
        raise ValidationError("the stage count must be nonnegative")
    c_seq = [float(c) for c in c_seq]
    if len(c_seq) < M:
        raise ValidationError("need one pinning constant per stage")
    plans: list[StepPlan] = []
    p, q = int(p0), int(q0)
    for m in range(1, M + 1):
        plan = jiangsu_step(p, q, m, c_seq[m - 1])
        plans.append(plan)
        p, q = plan.p_next, plan.q_next
    return plans


def is_eps_dense(values, eps: float) -> bool:
    """Whether every point of [0, 1] lies within eps of some value."""
    eps = float(eps)
    if eps <= 0:
        raise ValidationError("the density tolerance must be positive")
    vals = np.sort(np.asarray(values, dtype=float))
    if vals.size == 0:
        return False
    if vals[0] > eps or 1.0 - vals[-1] > eps:
        return False
    return not np.any(np.diff(vals) / 2.0 > eps)
