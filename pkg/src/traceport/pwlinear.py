"""Piecewise-linear primitives shared by measures, maps and spectral profiles.

Two representations cover everything in this package:

* ``MonotoneCurve`` is a monotone piecewise-linear graph in the plane. Both
  coordinates are non-decreasing, and repeated abscissae encode jump
  discontinuities. Cumulative distribution functions, quantile functions and
  monotone transport maps are all curves of this kind, and the generalized
  inverse of one is literally the same point list with the coordinates
  swapped.

* ``PLFunction`` is a continuous piecewise-linear function given by knots.
  Observables, eigenvalue maps and Lipschitz test functions use it.

Evaluation follows the right-continuous convention: at a jump the function
takes its upper value. ``eval_lower`` exposes the left limit where one-sided
values matter (suprema across jumps, mass just below an atom).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

__all__ = [
    "MonotoneCurve",
    "PLFunction",
    "integrate_abs_power",
    "integrate_measure",
    "sup_abs_diff",
    "integrate_abs_power_measure",
]


def _as_points(points, *, what: str = "breakpoints") -> np.ndarray:
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 1:
        raise ValidationError(f"{what} must be a non-empty sequence of (x, y) pairs")
    if not np.all(np.isfinite(pts)):
        raise ValidationError(f"{what} must be finite")
    if pts.shape[0] > 1 and np.any(np.diff(pts[:, 0]) < 0):
        raise ValidationError(f"{what} abscissae must be non-decreasing")
    return pts


def _dedupe_rows(pts: np.ndarray) -> np.ndarray:
    """Drop consecutive identical rows."""
    if pts.shape[0] < 2:
        return pts
    keep = np.empty(pts.shape[0], dtype=bool)
    keep[0] = True
    keep[1:] = np.any(pts[1:] != pts[:-1], axis=1)
    return pts[keep]


def _simplify(pts: np.ndarray) -> np.ndarray:
    """Remove redundant interior points without changing the traced graph.

    Interior points of a vertical run collapse to the run's endpoints, and an
    interior point is dropped when it is exactly collinear with its
    neighbours. Only exact float identities are used, so the graph is never
    perturbed.
    """
    pts = _dedupe_rows(pts)
    m = pts.shape[0]
    if m < 3:
        return pts
    x, y = pts[:, 0], pts[:, 1]
    dx0 = x[1:-1] - x[:-2]
    dy0 = y[1:-1] - y[:-2]
    dx1 = x[2:] - x[1:-1]
    dy1 = y[2:] - y[1:-1]
    collinear = dx0 * dy1 == dx1 * dy0
    keep = np.ones(m, dtype=bool)
    keep[1:-1] = ~collinear
    return pts[keep]


def _eval_graph(pts: np.ndarray, q, *, upper: bool):
    """Evaluate the graph at ``q`` (scalar or array), clamped to its domain."""
    x, y = pts[:, 0], pts[:, 1]
    qa = np.asarray(q, dtype=float)
    scalar = qa.ndim == 0
    qc = np.clip(qa, x[0], x[-1])
    left = np.searchsorted(x, qc, side="left")
    right = np.searchsorted(x, qc, side="right")
    exact = left < right
    out = np.empty(qc.shape, dtype=float)
    idx = np.where(exact, np.where(upper, right - 1, left), 0)
    out[exact] = y[idx[exact]]
    between = ~exact
    if np.any(between):
        hi = right[between]
        lo = hi - 1
        x0, x1 = x[lo], x[hi]
        y0, y1 = y[lo], y[hi]
        t = (qc[between] - x0) / (x1 - x0)
        out[between] = y0 + t * (y1 - y0)
    return float(out) if scalar else out


class MonotoneCurve:
    """A monotone piecewise-linear graph; jumps encoded by repeated abscissae."""

    __slots__ = ("pts",)

    def __init__(self, points, *, simplify: bool = True):
        pts = _as_points(points)
        if pts.shape[0] > 1 and np.any(np.diff(pts[:, 1]) < 0):
            raise ValidationError("curve ordinates must be non-decreasing")
        self.pts = _simplify(pts) if simplify else _dedupe_rows(pts)

    # -- basic accessors -------------------------------------------------

    @property
    def x(self) -> np.ndarray:
        return self.pts[:, 0]

    @property
    def y(self) -> np.ndarray:
        return self.pts[:, 1]

    @property
    def domain(self) -> tuple[float, float]:
        return float(self.pts[0, 0]), float(self.pts[-1, 0])

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        a, b = self.domain
        return f"MonotoneCurve({self.pts.shape[0]} pts on [{a:g}, {b:g}])"

    def eval_upper(self, q):
        return _eval_graph(self.pts, q, upper=True)

    def eval_lower(self, q):
        return _eval_graph(self.pts, q, upper=False)

    __call__ = eval_upper

    # -- structure -------------------------------------------------------

    def swap(self) -> "MonotoneCurve":
        """Mirror the graph across the diagonal: the generalized inverse."""
        return MonotoneCurve(self.pts[:, ::-1], simplify=False)

    def is_strictly_increasing(self) -> bool:
        dx = np.diff(self.pts[:, 0])
        dy = np.diff(self.pts[:, 1])
        return not np.any((dx > 0) & (dy == 0))

    def is_continuous(self) -> bool:
        dx = np.diff(self.pts[:, 0])
        dy = np.diff(self.pts[:, 1])
        return not np.any((dx == 0) & (dy > 0))

    def joint(self, other: "MonotoneCurve", *, self_jumps_first: bool = True) -> "MonotoneCurve":
        """Curve traced by ``(self(t), other(t))`` over the shared domain.

        At a knot where both graphs jump, the jump of ``self`` is traversed
        first. The two domains must coincide.
        """
        a0, a1 = self.domain
        b0, b1 = other.domain
        if abs(a0 - b0) > 1e-12 or abs(a1 - b1) > 1e-12:
            raise ValidationError("joint requires curves over the same domain")
        knots = np.union1d(self.pts[:, 0], other.pts[:, 0])
        a_lo = self.eval_lower(knots)
        a_hi = self.eval_upper(knots)
        b_lo = other.eval_lower(knots)
        b_hi = other.eval_upper(knots)
        m = knots.shape[0]
        rows = np.empty((3 * m, 2), dtype=float)
        if self_jumps_first:
            rows[0::3, 0], rows[0::3, 1] = a_lo, b_lo
            rows[1::3, 0], rows[1::3, 1] = a_hi, b_lo
            rows[2::3, 0], rows[2::3, 1] = a_hi, b_hi
        else:
            rows[0::3, 0], rows[0::3, 1] = a_lo, b_lo
            rows[1::3, 0], rows[1::3, 1] = a_lo, b_hi
            rows[2::3, 0], rows[2::3, 1] = a_hi, b_hi
        return MonotoneCurve(rows)

    def trim_boundary_jumps(self) -> "MonotoneCurve":
        """Resolve a vertical segment at either end of the domain.

        A leading vertical keeps its upper value and a trailing vertical its
        lower value, matching the right-continuous inverse convention.
        """
        pts = self.pts
        lo = 0
        while lo + 1 < pts.shape[0] and pts[lo + 1, 0] == pts[0, 0]:
            lo += 1
        hi = pts.shape[0] - 1
        while hi - 1 > lo and pts[hi - 1, 0] == pts[-1, 0]:
            hi -= 1
        return MonotoneCurve(pts[lo : hi + 1])


@dataclass(frozen=True, eq=False)
class PLFunction:
    """Continuous piecewise-linear function defined by knots.

    ``knots_x`` is strictly increasing. Values are arbitrary reals, so the
    function need not be monotone.
    """

    knots_x: np.ndarray
    knots_y: np.ndarray

    def __init__(self, knots_x, knots_y):
        x = np.asarray(knots_x, dtype=float)
        y = np.asarray(knots_y, dtype=float)
        if x.ndim != 1 or x.shape != y.shape or x.shape[0] < 1:
            raise ValidationError("a piecewise-linear function needs matching knot arrays")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise ValidationError("knots must be finite")
        if x.shape[0] > 1 and np.any(np.diff(x) <= 0):
            raise ValidationError("knot abscissae must be strictly increasing")
        object.__setattr__(self, "knots_x", x)
        object.__setattr__(self, "knots_y", y)

    # -- constructors ------------------------------------------------------

    @staticmethod
    def from_pairs(pairs) -> "PLFunction":
        pts = _as_points(pairs, what="knots")
        return PLFunction(pts[:, 0], pts[:, 1])

    @staticmethod
    def identity(a: float = 0.0, b: float = 1.0) -> "PLFunction":
        return PLFunction([a, b], [a, b])

    @staticmethod
    def constant(c: float, a: float = 0.0, b: float = 1.0) -> "PLFunction":
        return PLFunction([a, b], [c, c])

    @staticmethod
    def max_with(c: float, a: float = 0.0, b: float = 1.0) -> "PLFunction":
        """t -> max(c, t) on [a, b]."""
        if c <= a:
            return PLFunction.identity(a, b)
        if c >= b:
            return PLFunction.constant(c, a, b)
        return PLFunction([a, c, b], [c, c, b])

    @staticmethod
    def min_with(c: float, a: float = 0.0, b: float = 1.0) -> "PLFunction":
        """t -> min(c, t) on [a, b]."""
        if c <= a:
            return PLFunction.constant(c, a, b)
        if c >= b:
            return PLFunction.identity(a, b)
        return PLFunction([a, c, b], [a, c, c])

    @staticmethod
    def from_callable(fn, knots) -> "PLFunction":
        knots = np.asarray(knots, dtype=float)
        return PLFunction(knots, np.asarray([fn(t) for t in knots], dtype=float))

    # -- evaluation and algebra --------------------------------------------

    @property
    def domain(self) -> tuple[float, float]:
        return float(self.knots_x[0]), float(self.knots_x[-1])

    def __call__(self, t):
        return np.interp(t, self.knots_x, self.knots_y)

    def scale_add(self, scale: float = 1.0, offset: float = 0.0) -> "PLFunction":
        return PLFunction(self.knots_x, scale * self.knots_y + offset)

    def sup_abs(self) -> float:
        return float(np.max(np.abs(self.knots_y)))

    def bounds(self) -> tuple[float, float]:
        return float(np.min(self.knots_y)), float(np.max(self.knots_y))

    def lipschitz_constant(self) -> float:
        if self.knots_x.shape[0] < 2:
            return 0.0
        return float(np.max(np.abs(np.diff(self.knots_y) / np.diff(self.knots_x))))

    def refine(self, extra_knots) -> "PLFunction":
        xs = np.union1d(self.knots_x, np.asarray(extra_knots, dtype=float))
        a, b = self.domain
        xs = xs[(xs >= a) & (xs <= b)]
        return PLFunction(xs, self(xs))

    def compose(self, inner: "PLFunction") -> "PLFunction":
        """Exact composition self(inner(t)).

        Knots are the knots of ``inner`` together with every preimage of a
        knot of ``self`` under a linear segment of ``inner``; between
        consecutive knots the composite is linear.
        """
        xs = [inner.knots_x]
        ix, iy = inner.knots_x, inner.knots_y
        targets = self.knots_x
        for k in range(ix.shape[0] - 1):
            y0, y1 = iy[k], iy[k + 1]
            lo, hi = (y0, y1) if y0 <= y1 else (y1, y0)
            if y0 == y1:
                continue
            inside = targets[(targets > lo) & (targets < hi)]
            if inside.size:
                t = ix[k] + (inside - y0) * (ix[k + 1] - ix[k]) / (y1 - y0)
                xs.append(t)
        knots = np.unique(np.concatenate(xs))
        return PLFunction(knots, self(inner(knots)))

    def monotone_sections(self) -> list[tuple[float, float, bool]]:
        """Maximal intervals on which the function is monotone.

        Returns ``(a, b, increasing)`` triples covering the domain. Flat
        segments attach to the current direction, so every section is
        non-decreasing or non-increasing.
        """
        x, y = self.knots_x, self.knots_y
        if x.shape[0] < 2:
            return [(float(x[0]), float(x[0]), True)]
        slopes = np.diff(y)
        sections: list[tuple[float, float, bool]] = []
        start = 0
        direction = 0  # unknown until a nonzero slope appears
        for k in range(slopes.shape[0]):
            s = 1 if slopes[k] > 0 else (-1 if slopes[k] < 0 else 0)
            if s == 0 or direction == 0 or s == direction:
                direction = direction if s == 0 else s
                continue
            sections.append((float(x[start]), float(x[k]), direction > 0))
            start = k
            direction = s
        sections.append((float(x[start]), float(x[-1]), direction >= 0))
        return sections

    def as_graph(self) -> np.ndarray:
        return np.column_stack([self.knots_x, self.knots_y])

    @staticmethod
    def combine(functions: "list[PLFunction]", weights, offset_fn: "PLFunction | None" = None) -> "PLFunction":
        """Weighted sum of functions sharing a domain, minus an optional one."""
        if not functions:
            raise ValidationError("combine needs at least one function")
        a, b = functions[0].domain
        knots = functions[0].knots_x
        pieces = list(functions) + ([offset_fn] if offset_fn is not None else [])
        for f in pieces[1:]:
            fa, fb = f.domain
            if abs(fa - a) > 1e-12 or abs(fb - b) > 1e-12:
                raise ValidationError("combine requires functions on a common domain")
            knots = np.union1d(knots, f.knots_x)
        vals = np.zeros_like(knots)
        for w, f in zip(weights, functions):
            vals = vals + float(w) * f(knots)
        if offset_fn is not None:
            vals = vals - offset_fn(knots)
        return PLFunction(knots, vals)


# -- segment integrals ------------------------------------------------------


def _abs_power_segments(d0: np.ndarray, d1: np.ndarray, w: np.ndarray, p: float) -> np.ndarray:
    """Per-segment integrals of |linear|^p over segments of widths ``w``.

    The linear function runs from ``d0`` to ``d1`` on each segment. The
    antiderivative sign(u)|u|^(p+1)/((p+1) du/ds) is smooth across a sign
    change, so no root splitting is needed. Near-flat segments fall back to a
    trapezoid of |.|^p, whose error is far below the package tolerance.
    """
    out = np.zeros_like(w, dtype=float)
    live = w > 0
    if not np.any(live):
        return out
    d0l, d1l, wl = d0[live], d1[live], w[live]
    scale = np.maximum(np.abs(d0l), np.abs(d1l))
    flat = np.abs(d1l - d0l) <= 1e-13 * np.maximum(scale, 1e-300)
    res = np.zeros_like(wl)
    if np.any(flat):
        a0 = np.abs(d0l[flat])
        a1 = np.abs(d1l[flat])
        res[flat] = 0.5 * (a0**p + a1**p) * wl[flat]
    steep = ~flat
    if np.any(steep):
        u0, u1 = d0l[steep], d1l[steep]
        b = (u1 - u0) / wl[steep]
        g1 = np.sign(u1) * np.abs(u1) ** (p + 1.0)
        g0 = np.sign(u0) * np.abs(u0) ** (p + 1.0)
        res[steep] = (g1 - g0) / (b * (p + 1.0))
    out[live] = res
    return out


def _one_sided_values(curve_pts: np.ndarray, knots: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    lo = _eval_graph(curve_pts, knots, upper=False)
    hi = _eval_graph(curve_pts, knots, upper=True)
    return lo, hi


def integrate_abs_power(a: MonotoneCurve, b: MonotoneCurve, p: float) -> float:
    """Exact integral of |a(u) - b(u)|^p du over the shared domain.

    Vertical segments have zero width and contribute nothing.
    """
    knots = np.union1d(a.pts[:, 0], b.pts[:, 0])
    a_lo, a_hi = _one_sided_values(a.pts, knots)
    b_lo, b_hi = _one_sided_values(b.pts, knots)
    d_left = a_hi[:-1] - b_hi[:-1]
    d_right = a_lo[1:] - b_lo[1:]
    widths = np.diff(knots)
    return float(np.sum(_abs_power_segments(d_left, d_right, widths, p)))


def sup_abs_diff(a: MonotoneCurve, b: MonotoneCurve) -> float:
    """Essential supremum of |a - b| over the shared domain.

    One-sided limits are compared like with like; jump values at matching
    knots never mix across sides.
    """
    knots = np.union1d(a.pts[:, 0], b.pts[:, 0])
    a_lo, a_hi = _one_sided_values(a.pts, knots)
    b_lo, b_hi = _one_sided_values(b.pts, knots)
    return float(max(np.max(np.abs(a_lo - b_lo)), np.max(np.abs(a_hi - b_hi))))


def integrate_measure(values_pts: np.ndarray, measure: MonotoneCurve) -> float:
    """Exact signed integral of a piecewise-linear g against the measure.

    Atoms take the upper value of g; on linear CDF pieces the trapezoid is
    the exact integral of a linear integrand.
    """
    g = _as_points(values_pts, what="integrand graph")
    knots = np.union1d(g[:, 0], measure.pts[:, 0])
    g_lo, g_hi = _one_sided_values(g, knots)
    f_lo, f_hi = _one_sided_values(measure.pts, knots)
    total = float(np.sum((f_hi - f_lo) * g_hi))
    seg_mass = f_lo[1:] - f_hi[:-1]
    total += float(np.sum(seg_mass * 0.5 * (g_hi[:-1] + g_lo[1:])))
    return total


def integrate_abs_power_measure(values_pts: np.ndarray, measure: MonotoneCurve, p: float) -> float:
    """Exact integral of |g|^p against the measure with CDF ``measure``.

    ``values_pts`` is a piecewise-linear graph of g (repeated abscissae allowed
    for jumps; atoms of the measure then meet the upper value). Linear pieces
    of the CDF act as constant densities; jumps act as atoms.
    """
    g = _as_points(values_pts, what="integrand graph")
    knots = np.union1d(g[:, 0], measure.pts[:, 0])
    g_lo, g_hi = _one_sided_values(g, knots)
    f_lo, f_hi = _one_sided_values(measure.pts, knots)
    total = 0.0
    # atoms
    atom_mass = f_hi - f_lo
    has_atom = atom_mass > 0
    if np.any(has_atom):
        total += float(np.sum(atom_mass[has_atom] * np.abs(g_hi[has_atom]) ** p))
    # absolutely continuous pieces
    widths = np.diff(knots)
    seg_mass = f_lo[1:] - f_hi[:-1]
    live = (widths > 0) & (seg_mass > 0)
    if np.any(live):
        dens = seg_mass[live] / widths[live]
        raw = _abs_power_segments(g_hi[:-1][live], g_lo[1:][live], widths[live], p)
        total += float(np.sum(dens * raw))
    return total
