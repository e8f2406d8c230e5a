"""Metric spaces and the measures this package transports.

Finite metric spaces are given by explicit distance matrices, optionally
derived from an edge-weighted graph or sampled from a circular arc with the
chordal metric. Measures come in two flavors: finitely supported weighted
atoms on any space, and measures on [0, 1] represented exactly by a
piecewise-linear CDF that may mix atoms with density pieces.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components, shortest_path

from .errors import ValidationError
from .pwlinear import MonotoneCurve, PLFunction

__all__ = [
    "FiniteMetricSpace",
    "GeodesicGraph",
    "ArcSpace",
    "UnitInterval",
    "DiscreteMeasure",
    "Measure1D",
    "shortest_path_metric",
    "quantile",
    "pushforward",
    "pushforward_function",
    "empirical_measure",
    "cdf_distance",
]

DEFAULT_TOL = 1e-9


# ---------------------------------------------------------------------------
# spaces
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class FiniteMetricSpace:
    """A finite metric space given by its distance matrix."""

    d: np.ndarray
    labels: tuple | None = None

    def __init__(self, d, labels=None, *, tol: float = DEFAULT_TOL):
        m = np.asarray(d, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
            raise ValidationError("distance matrix must be square and non-empty")
        if not np.all(np.isfinite(m)):
            raise ValidationError("distances must be finite")
        validate_metric(m, tol=tol)
        m = m.copy()
        m.flags.writeable = False
        object.__setattr__(self, "d", m)
        object.__setattr__(self, "labels", tuple(labels) if labels is not None else None)

    @property
    def n(self) -> int:
        return self.d.shape[0]

    def validate_support(self, points) -> np.ndarray:
        idx = np.asarray(points)
        if idx.ndim != 1 or idx.size == 0:
            raise ValidationError("support must be a non-empty index list")
        if not np.issubdtype(idx.dtype, np.integer):
            if not np.all(idx == np.floor(idx)):
                raise ValidationError("support on a finite space must use integer indices")
            idx = idx.astype(int)
        if np.any(idx < 0) or np.any(idx >= self.n):
            raise ValidationError("support index out of range")
        return idx

    def pairwise(self, a, b) -> np.ndarray:
        return self.d[np.ix_(self.validate_support(a), self.validate_support(b))]


def validate_metric(d: np.ndarray, *, tol: float = DEFAULT_TOL) -> None:
    """Check symmetry, zero diagonal, positivity and the triangle inequality."""
    if np.any(np.abs(np.diag(d)) > tol):
        raise ValidationError("metric has a nonzero diagonal entry")
    if np.any(np.abs(d - d.T) > tol):
        raise ValidationError("metric is not symmetric")
    off = d[~np.eye(d.shape[0], dtype=bool)]
    if off.size and np.min(off) <= 0:
        raise ValidationError("distinct points must have positive distance")
    n = d.shape[0]
    for k in range(n):
        if np.any(d > d[:, k, None] + d[None, k, :] + tol):
            raise ValidationError("triangle inequality fails")


@dataclass(frozen=True, eq=False)
class GeodesicGraph:
    """Connected graph with positive edge weights and its path metric."""

    n_vertices: int
    edges: tuple
    _metric: FiniteMetricSpace = None
    _predecessors: np.ndarray = None

    def __init__(self, n_vertices: int, edges):
        if n_vertices < 1:
            raise ValidationError("graph needs at least one vertex")
        cleaned = []
        for e in edges:
            if len(e) != 3:
                raise ValidationError("edges must be (i, j, weight) triples")
            i, j, w = int(e[0]), int(e[1]), float(e[2])
            if not (0 <= i < n_vertices and 0 <= j < n_vertices):
                raise ValidationError("edge endpoint out of range")
            if i == j:
                raise ValidationError("self-loops are not allowed")
            if not (w > 0 and math.isfinite(w)):
                raise ValidationError("edge weights must be positive and finite")
            cleaned.append((i, j, w))
        object.__setattr__(self, "n_vertices", int(n_vertices))
        object.__setattr__(self, "edges", tuple(cleaned))

        n = self.n_vertices
        if cleaned:
            rows = [e[0] for e in cleaned] + [e[1] for e in cleaned]
            cols = [e[1] for e in cleaned] + [e[0] for e in cleaned]
            vals = [e[2] for e in cleaned] * 2
            adj = csr_matrix((vals, (rows, cols)), shape=(n, n))
        else:
            adj = csr_matrix((n, n))
        ncomp, _ = connected_components(adj, directed=False)
        if ncomp != 1:
            raise ValidationError("graph must be connected")
        dist, pred = shortest_path(adj, method="D", directed=False, return_predecessors=True)
        object.__setattr__(self, "_metric", FiniteMetricSpace(dist))
        object.__setattr__(self, "_predecessors", pred)

    @property
    def metric(self) -> FiniteMetricSpace:
        return self._metric

    def path(self, i: int, j: int) -> list[int]:
        """Vertex sequence of one shortest path from i to j."""
        n = self.n_vertices
        if not (0 <= i < n and 0 <= j < n):
            raise ValidationError("path endpoint out of range")
        out = [j]
        while out[-1] != i:
            prev = int(self._predecessors[i, out[-1]])
            if prev < 0:
                raise ValidationError("vertices are not connected")
            out.append(prev)
        return out[::-1]

    def validate_support(self, points) -> np.ndarray:
        return self._metric.validate_support(points)

    def pairwise(self, a, b) -> np.ndarray:
        return self._metric.pairwise(a, b)


def shortest_path_metric(g: GeodesicGraph) -> FiniteMetricSpace:
    """The path metric of a connected, positively weighted graph."""
    return g.metric


@dataclass(frozen=True, eq=False)
class ArcSpace:
    """Circular arc of opening ``theta``, carrying the chordal metric.

    Points are arc-length coordinates in [0, theta] on the unit circle, and
    d(s, t) = 2 sin(|s - t| / 2).
    """

    theta: float

    def __init__(self, theta: float):
        theta = float(theta)
        if not (0 < theta < 2 * math.pi):
            raise ValidationError("arc opening must lie in (0, 2*pi)")
        object.__setattr__(self, "theta", theta)

    def validate_support(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        if pts.ndim != 1 or pts.size == 0:
            raise ValidationError("support must be a non-empty coordinate list")
        if np.any(pts < -1e-12) or np.any(pts > self.theta + 1e-12):
            raise ValidationError("arc coordinate outside [0, theta]")
        return np.clip(pts, 0.0, self.theta)

    def pairwise(self, a, b) -> np.ndarray:
        a = self.validate_support(a)
        b = self.validate_support(b)
        sep = np.abs(a[:, None] - b[None, :])
        return 2.0 * np.sin(sep / 2.0)

    def sample(self, points) -> FiniteMetricSpace:
        """Finite metric space on the given arc coordinates."""
        pts = self.validate_support(points)
        if np.unique(pts).size != pts.size:
            raise ValidationError("sample points must be distinct")
        return FiniteMetricSpace(self.pairwise(pts, pts))


@dataclass(frozen=True, eq=False)
class UnitInterval:
    """The interval [0, 1] with |x - y|, for measures given by coordinates."""

    def validate_support(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        if pts.ndim != 1 or pts.size == 0:
            raise ValidationError("support must be a non-empty coordinate list")
        if np.any(pts < -1e-12) or np.any(pts > 1 + 1e-12):
            raise ValidationError("interval coordinate outside [0, 1]")
        return np.clip(pts, 0.0, 1.0)

    def pairwise(self, a, b) -> np.ndarray:
        a = self.validate_support(a)
        b = self.validate_support(b)
        return np.abs(a[:, None] - b[None, :])


# ---------------------------------------------------------------------------
# discrete measures
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class DiscreteMeasure:
    """Finitely supported probability measure on one of the spaces above."""

    space: object
    support: np.ndarray
    weights: np.ndarray

    def __init__(self, space, support, weights):
        sup = space.validate_support(support)
        w = np.asarray(weights, dtype=float)
        if w.shape != (sup.shape[0],):
            raise ValidationError("weights must match the support length")
        if np.any(w <= 0):
            raise ValidationError("weights must be positive")
        if abs(float(np.sum(w)) - 1.0) > 1e-12:
            raise ValidationError("weights must sum to 1")
        uniq = np.unique(sup)
        if uniq.size != sup.size:
            raise ValidationError("support points must be distinct")
        sup = sup.copy()
        sup.flags.writeable = False
        w = w.copy()
        w.flags.writeable = False
        object.__setattr__(self, "space", space)
        object.__setattr__(self, "support", sup)
        object.__setattr__(self, "weights", w)

    @staticmethod
    def merged(space, support, weights) -> "DiscreteMeasure":
        """Build a measure, merging weights of repeated support points."""
        sup = np.asarray(support)
        w = np.asarray(weights, dtype=float)
        uniq, inv = np.unique(sup, return_inverse=True)
        merged_w = np.zeros(uniq.shape[0])
        np.add.at(merged_w, inv, w)
        return DiscreteMeasure(space, uniq, merged_w)

    @staticmethod
    def uniform(space, support) -> "DiscreteMeasure":
        sup = np.asarray(support)
        n = sup.shape[0]
        return DiscreteMeasure(space, sup, np.full(n, 1.0 / n))

    @property
    def size(self) -> int:
        return self.support.shape[0]


# ---------------------------------------------------------------------------
# measures on [0, 1]
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Measure1D:
    """Probability measure on [0, 1] with a piecewise-linear CDF.

    Atoms are encoded by repeated abscissae in the CDF graph; everything else
    is a piecewise-constant density. The CDF always starts at (0, 0) and ends
    at (1, 1).
    """

    curve: MonotoneCurve

    def __init__(self, curve: MonotoneCurve):
        if not isinstance(curve, MonotoneCurve):
            curve = MonotoneCurve(curve)
        pts = curve.pts
        if pts[0, 0] < -1e-12 or pts[-1, 0] > 1 + 1e-12:
            raise ValidationError("CDF breakpoints must lie in [0, 1]")
        if np.any(pts[:, 1] < -1e-12) or np.any(pts[:, 1] > 1 + 1e-9):
            raise ValidationError("CDF values must lie in [0, 1]")
        if abs(pts[-1, 1] - 1.0) > 1e-9:
            raise ValidationError("CDF must reach total mass 1")
        if pts[-1, 1] != 1.0:
            # rescale away ulp-level mass dust; snapping just the endpoint
            # would smear the deficit into a sloped tail segment, which the
            # essential-sup distances then see as a phantom displacement
            pts = pts.copy()
            pts[:, 1] = pts[:, 1] / pts[-1, 1]
        if pts[0, 0] > 0 and pts[0, 1] > 0:
            raise ValidationError(
                "CDF must start at zero mass; put an atom at the left endpoint explicitly"
            )
        rows = [pts]
        if pts[0, 0] > 0 or pts[0, 1] > 0:
            rows.insert(0, np.array([[0.0, 0.0]]))
        if pts[-1, 0] < 1:
            rows.append(np.array([[1.0, pts[-1, 1]]]))
        pts = np.vstack(rows)
        pts[:, 0] = np.clip(pts[:, 0], 0.0, 1.0)
        pts[:, 1] = np.clip(pts[:, 1], 0.0, 1.0)
        pts[-1, 1] = 1.0
        pts[:, 1] = np.minimum.accumulate(pts[::-1, 1])[::-1]
        object.__setattr__(self, "curve", MonotoneCurve(pts))

    # -- constructors ----------------------------------------------------

    @staticmethod
    def from_breakpoints(pairs) -> "Measure1D":
        return Measure1D(MonotoneCurve(pairs))

    @staticmethod
    def uniform(a: float = 0.0, b: float = 1.0) -> "Measure1D":
        if not (0 <= a < b <= 1):
            raise ValidationError("uniform needs 0 <= a < b <= 1")
        return Measure1D(MonotoneCurve([[a, 0.0], [b, 1.0]]))

    @staticmethod
    def point(x: float) -> "Measure1D":
        if not (0 <= x <= 1):
            raise ValidationError("point mass must lie in [0, 1]")
        return Measure1D(MonotoneCurve([[x, 0.0], [x, 1.0]]))

    @staticmethod
    def from_atoms(positions, weights) -> "Measure1D":
        xs = np.asarray(positions, dtype=float)
        ws = np.asarray(weights, dtype=float)
        if xs.ndim != 1 or xs.shape != ws.shape or xs.size == 0:
            raise ValidationError("atoms need matching position and weight arrays")
        if np.any(ws <= 0):
            raise ValidationError("atom weights must be positive")
        if abs(float(np.sum(ws)) - 1.0) > 1e-9:
            raise ValidationError("atom weights must sum to 1")
        order = np.argsort(xs, kind="stable")
        xs, ws = xs[order], ws[order]
        uniq, start = np.unique(xs, return_index=True)
        merged = np.add.reduceat(ws, start)
        cum = np.cumsum(merged)
        cum[-1] = 1.0
        m = uniq.shape[0]
        rows = np.empty((2 * m, 2))
        rows[0::2, 0] = uniq
        rows[1::2, 0] = uniq
        rows[0::2, 1] = np.concatenate([[0.0], cum[:-1]])
        rows[1::2, 1] = cum
        return Measure1D(MonotoneCurve(rows))

    @staticmethod
    def from_cdf_callable(fn, resolution: int = 1024) -> "Measure1D":
        """Piecewise-linear approximation of a CDF on a uniform grid."""
        if resolution < 2:
            raise ValidationError("resolution must be at least 2")
        xs = np.linspace(0.0, 1.0, resolution + 1)
        ys = np.asarray([fn(x) for x in xs], dtype=float)
        return Measure1D(MonotoneCurve(np.column_stack([xs, ys])))

    # -- queries -----------------------------------------------------------

    def cdf(self, x):
        return self.curve.eval_upper(x)

    def cdf_lower(self, x):
        return self.curve.eval_lower(x)

    def quantile_curve(self) -> MonotoneCurve:
        return self.curve.swap()

    def quantile(self, t):
        """Right-continuous generalized inverse of the CDF on [0, 1)."""
        ta = np.asarray(t, dtype=float)
        if np.any(ta < 0) or np.any(ta >= 1):
            raise ValidationError("quantile argument must lie in [0, 1)")
        return self.quantile_curve().eval_upper(t)

    def atoms(self) -> tuple[np.ndarray, np.ndarray]:
        pts = self.curve.pts
        same = pts[1:, 0] == pts[:-1, 0]
        jump = pts[1:, 1] - pts[:-1, 1]
        mask = same & (jump > 0)
        return pts[:-1][mask, 0], jump[mask]

    def is_diffuse(self) -> bool:
        return self.curve.is_continuous()

    def is_faithful(self) -> bool:
        return self.curve.is_strictly_increasing()

    def mean(self) -> float:
        """Integral of the identity against the measure."""
        pts = self.curve.pts
        x, y = pts[:, 0], pts[:, 1]
        dx = np.diff(x)
        dy = np.diff(y)
        # atoms contribute x * mass, density pieces the segment mean
        return float(np.sum(dy * np.where(dx == 0, x[:-1], (x[:-1] + x[1:]) / 2.0)))


def quantile(mu: Measure1D, t: float) -> float:
    """inf{x : F(x) > t} for t in [0, 1)."""
    return float(mu.quantile(float(t)))


def empirical_measure(samples) -> Measure1D:
    """Equal-weight empirical measure of samples from [0, 1]."""
    xs = np.asarray(samples, dtype=float)
    if xs.ndim != 1 or xs.size == 0:
        raise ValidationError("samples must be a non-empty 1-D collection")
    if np.any(xs < 0) or np.any(xs > 1):
        raise ValidationError("samples must lie in [0, 1]")
    n = xs.size
    return Measure1D.from_atoms(xs, np.full(n, 1.0 / n))


def cdf_distance(mu: Measure1D, nu: Measure1D) -> float:
    """Uniform distance between the two CDFs, jump values included."""
    from .pwlinear import sup_abs_diff

    return sup_abs_diff(mu.curve, nu.curve)


# ---------------------------------------------------------------------------
# pushforward
# ---------------------------------------------------------------------------


def _map_curve(h) -> MonotoneCurve:
    curve = getattr(h, "curve", h)
    if not isinstance(curve, MonotoneCurve):
        raise ValidationError("pushforward needs a monotone piecewise-linear map")
    return curve


def pushforward(mu: Measure1D, h) -> Measure1D:
    """Image of ``mu`` under a non-decreasing piecewise-linear map of [0, 1].

    Exact: the image CDF is the curve traced by (h(t), F(t)), with the map's
    jumps traversed first so that an atom lands at the map's right-continuous
    value.
    """
    curve = _map_curve(h)
    a, b = curve.domain
    if abs(a) > 1e-12 or abs(b - 1) > 1e-12:
        raise ValidationError("transport map must be defined on all of [0, 1]")
    if np.any(curve.pts[:, 1] < -1e-12) or np.any(curve.pts[:, 1] > 1 + 1e-12):
        raise ValidationError("transport map values must lie in [0, 1]")
    traced = curve.joint(mu.curve, self_jumps_first=True)
    return Measure1D(traced)


def _measure_section(mu: Measure1D, a: float, b: float, *, include_left_atom: bool) -> MonotoneCurve:
    """Zero-based CDF of mu restricted to (a, b] (or [a, b] with the flag)."""
    pts = mu.curve.pts
    base = mu.cdf_lower(a) if include_left_atom else mu.cdf(a)
    inside = pts[(pts[:, 0] > a) & (pts[:, 0] < b)]
    rows = np.vstack(
        [
            [[a, base], [a, mu.cdf(a)]],
            inside,
            [[b, mu.cdf_lower(b)], [b, mu.cdf(b)]],
        ]
    )
    rows = rows.copy()
    rows[:, 1] = np.clip(rows[:, 1], base, None) - base
    return MonotoneCurve(rows)


def _reflect_curve(curve: MonotoneCurve, a: float, b: float) -> MonotoneCurve:
    pts = curve.pts[::-1].copy()
    pts[:, 0] = (a + b) - pts[:, 0]
    lo, hi = curve.pts[0, 1], curve.pts[-1, 1]
    pts[:, 1] = (lo + hi) - pts[:, 1]
    return MonotoneCurve(pts)


def _function_section(f: PLFunction, a: float, b: float, *, increasing: bool) -> MonotoneCurve:
    xs = f.knots_x
    inner = xs[(xs > a) & (xs < b)]
    knots = np.concatenate([[a], inner, [b]])
    rows = np.column_stack([knots, f(knots)])
    if not increasing:
        rows = rows[::-1].copy()
        rows[:, 0] = (a + b) - rows[:, 0]
    return MonotoneCurve(rows)


def pushforward_function(mu: Measure1D, f: PLFunction) -> Measure1D:
    """Image of ``mu`` under a continuous piecewise-linear map of [0, 1].

    The map need not be monotone: it is split into maximal monotone sections,
    each restricted piece of the measure is pushed through its section
    (decreasing sections via reflection), and the pieces are summed.
    """
    fa, fb = f.domain
    if abs(fa) > 1e-12 or abs(fb - 1) > 1e-12:
        raise ValidationError("map must be defined on all of [0, 1]")
    lo, hi = f.bounds()
    if lo < -1e-12 or hi > 1 + 1e-12:
        raise ValidationError("map values must lie in [0, 1]")
    pieces: list[MonotoneCurve] = []
    for idx, (a, b, increasing) in enumerate(f.monotone_sections()):
        if b <= a:
            continue
        part = _measure_section(mu, a, b, include_left_atom=(idx == 0))
        sec = _function_section(f, a, b, increasing=increasing)
        if not increasing:
            part = _reflect_curve(part, a, b)
        pieces.append(sec.joint(part, self_jumps_first=True))
    total = _add_mass_curves(pieces)
    return Measure1D(total)


def _add_mass_curves(curves: list[MonotoneCurve]) -> MonotoneCurve:
    """Pointwise sum of partial CDF curves, each constant off its domain."""
    if not curves:
        raise ValidationError("nothing to add")
    knots = np.unique(curves[0].pts[:, 0])
    for c in curves[1:]:
        knots = np.union1d(knots, c.pts[:, 0])
    lo = np.zeros_like(knots)
    hi = np.zeros_like(knots)
    for c in curves:
        c_lo = c.eval_lower(knots)
        c_hi = c.eval_upper(knots)
        # clamped evaluation would swallow a jump sitting exactly on the
        # domain edge; off-domain knots must see the flat extension instead
        x0, x1 = c.domain
        before, after = knots < x0, knots > x1
        c_lo[before] = c_hi[before] = c.pts[0, 1]
        c_lo[after] = c_hi[after] = c.pts[-1, 1]
        lo = lo + c_lo
        hi = hi + c_hi
    m = knots.shape[0]
    rows = np.empty((2 * m, 2))
    rows[0::2, 0] = knots
    rows[1::2, 0] = knots
    rows[0::2, 1] = lo
    rows[1::2, 1] = hi
    return MonotoneCurve(rows)
