"""Transport maps and matching witnesses.

Three constructions live here. The increasing rearrangement turns the
quantile functions of two measures on [0, 1] into a monotone map pushing one
onto the other, with its displacement never exceeding the quantile distance.
A matching witness pairs two point lists on a weighted graph through a
bottleneck-optimal matching and records the connecting shortest paths. The
arc ratio compares the best monotone (orientation-preserving or reversing)
alignment of two concentrated arc measures against their unrestricted
sup-displacement distance, giving a lower bound on how much restricting to
homeomorphisms can cost.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .matching import bottleneck_matching
from .metric_measure import ArcSpace, DiscreteMeasure, GeodesicGraph, Measure1D
from .pwlinear import MonotoneCurve, integrate_abs_power_measure
from .wasserstein import winf

__all__ = [
    "MonotoneMap",
    "TransportWitness",
    "increasing_rearrangement",
    "displacement_norm",
    "geodesic_transport_witness",
    "arc_pair",
    "arc_transport_ratio",
]


@dataclass(frozen=True, eq=False)
class MonotoneMap:
    """Non-decreasing piecewise-linear map of [0, 1] into itself.

    Jumps are encoded by repeated abscissae in the underlying curve, so a
    generalized inverse is representable. ``warning`` is set when the map was
    produced under relaxed preconditions.
    """

    curve: MonotoneCurve
    warning: str | None = None

    def __init__(self, curve: MonotoneCurve, warning: str | None = None):
        a, b = curve.domain
        if abs(a) > 1e-12 or abs(b - 1.0) > 1e-12:
            raise ValidationError("a transport map must be defined on all of [0, 1]")
        y = curve.pts[:, 1]
        if y[0] < -1e-12 or y[-1] > 1.0 + 1e-12:
            raise ValidationError("a transport map must send [0, 1] into itself")
        object.__setattr__(self, "curve", curve)
        object.__setattr__(self, "warning", warning)

    @staticmethod
    def identity() -> "MonotoneMap":
        return MonotoneMap(MonotoneCurve([(0.0, 0.0), (1.0, 1.0)]))

    @staticmethod
    def from_breakpoints(pairs, warning: str | None = None) -> "MonotoneMap":
        return MonotoneMap(MonotoneCurve(pairs), warning)

    @property
    def breakpoints(self) -> np.ndarray:
        return self.curve.pts

    def __call__(self, t):
        return self.curve.eval_upper(t)

    def is_homeomorphism(self) -> bool:
        ok_ends = abs(self.curve.pts[0, 1]) <= 1e-12 and abs(self.curve.pts[-1, 1] - 1.0) <= 1e-12
        return ok_ends and self.curve.is_continuous() and self.curve.is_strictly_increasing()


def increasing_rearrangement(nu: Measure1D, mu: Measure1D, *, relaxed: bool = False) -> MonotoneMap:
    """Monotone map h with h(nu) = mu, built from the two quantile functions.

    For faithful diffuse measures h is the unique increasing homeomorphism
    doing the job. With ``relaxed=True`` atoms and support gaps are accepted:
    the generalized inverses then make h merely non-decreasing (and possibly
    discontinuous), the pushforward identity still holds, and the returned
    map carries a warning.
    """
    defects = []
    for name, m in (("source", nu), ("target", mu)):
        if not m.is_faithful():
            defects.append(f"{name} has support gaps")
        if not m.is_diffuse():
            defects.append(f"{name} has atoms")
    if defects and not relaxed:
        raise ValidationError(
            "increasing rearrangement needs faithful diffuse measures "
            f"({'; '.join(defects)}); pass relaxed=True for generalized inverses"
        )
    source_quantile = nu.curve.swap()
    target_quantile = mu.curve.swap()
    graph = source_quantile.joint(target_quantile, self_jumps_first=True)
    graph = graph.trim_boundary_jumps()
    pts = graph.pts
    rows = [pts]
    if pts[0, 0] > 0.0:
        rows.insert(0, np.array([[0.0, pts[0, 1]]]))
    if pts[-1, 0] < 1.0:
        rows.append(np.array([[1.0, pts[-1, 1]]]))
    curve = MonotoneCurve(np.vstack(rows)) if len(rows) > 1 else graph
    warning = "; ".join(defects) if defects else None
    return MonotoneMap(curve, warning)


def displacement_norm(h: MonotoneMap, nu: Measure1D, p) -> float:
    """Size of h - id: the nu-p-norm for finite p, the sup over [0, 1] at p = inf."""
    pts = h.curve.pts
    if math.isinf(float(p)):
        return float(np.max(np.abs(pts[:, 1] - pts[:, 0])))
    p = float(p)
    if p < 1.0:
        raise ValidationError("the displacement exponent must satisfy p >= 1")
    gap = pts.copy()
    gap[:, 1] -= gap[:, 0]
    return integrate_abs_power_measure(gap, nu.curve, p) ** (1.0 / p)


@dataclass(frozen=True, eq=False)
class TransportWitness:
    """Bottleneck matching between two point lists plus connecting paths."""

    matching: np.ndarray
    paths: tuple[tuple[int, ...], ...]
    bottleneck: float
    max_displacement: float

    def __init__(self, matching, paths, bottleneck: float, max_displacement: float):
        matching = np.asarray(matching, dtype=int)
        if len(paths) != matching.shape[0]:
            raise ValidationError("one path per matched pair is required")
        object.__setattr__(self, "matching", matching)
        object.__setattr__(self, "paths", tuple(tuple(p) for p in paths))
        object.__setattr__(self, "bottleneck", float(bottleneck))
        object.__setattr__(self, "max_displacement", float(max_displacement))


def geodesic_transport_witness(graph: GeodesicGraph, xs, ys) -> TransportWitness:
    """Bottleneck-optimal pairing of xs with ys along shortest paths.

    The matching minimizes the largest endpoint distance (ties resolved
    lexicographically), so its value equals the sup-displacement distance of
    the two uniform measures on the lists.
    """
    xs = graph.validate_support(xs)
    ys = graph.validate_support(ys)
    if xs.shape[0] != ys.shape[0] or xs.shape[0] == 0:
        raise ValidationError("point lists must be non-empty and of equal length")
    dist = graph.pairwise(xs, ys)
    value, perm = bottleneck_matching(dist)
    paths = [graph.path(int(xs[i]), int(ys[perm[i]])) for i in range(xs.shape[0])]
    disp = float(np.max(dist[np.arange(xs.shape[0]), perm]))
    return TransportWitness(perm, paths, value, disp)


def arc_pair(theta: float, n: int, eps: float):
    """The two mirrored test measures on an open arc of angle theta.

    Each measure puts mass 1 - 1/n on n equally spaced points inside a width
    eps sliver at its own end of the arc and spreads the remaining 1/n over n
    equally spaced points along the whole arc. Weights are exact multiples of
    1/n^2, so couplings reduce to integer flows.
    """
    theta = float(theta)
    n = int(n)
    eps = float(eps)
    if not (0.0 < theta < 2.0 * math.pi):
        raise ValidationError("the arc angle must lie strictly between 0 and 2*pi")
    if n < 2:
        raise ValidationError("the cluster size must be at least 2")
    if not (0.0 < eps < theta / 4.0):
        raise ValidationError("the concentration width must lie in (0, theta/4)")
    space = ArcSpace(theta)
    cluster = np.linspace(0.0, eps, n)
    spread = np.linspace(0.0, theta, n)
    pos = np.concatenate([cluster, spread])
    # integer weights over the denominator n^2: cluster n-1 each, spread 1 each
    wint = np.concatenate([np.full(n, n - 1, dtype=np.int64), np.ones(n, dtype=np.int64)])
    uniq, inv = np.unique(pos, return_inverse=True)
    merged = np.zeros(uniq.shape[0], dtype=np.int64)
    np.add.at(merged, inv, wint)
    mu = DiscreteMeasure(space, uniq, merged / float(n * n))
    mirrored = np.sort(theta - uniq)
    nu = DiscreteMeasure(space, mirrored, merged[::-1] / float(n * n))
    return space, mu, nu, (uniq, merged, mirrored, merged[::-1])


def _monotone_max_chord(pos_a, wts_a, pos_b, wts_b) -> float:
    """Largest chordal displacement of the in-order mass alignment.

    Atom positions arrive in the order the alignment consumes them, with
    positive integer weights of equal total. Mass is paired cumulatively;
    each pair contributes the chord between two fixed atoms.
    """
    i = j = 0
    ra, rb = int(wts_a[0]), int(wts_b[0])
    worst = 0.0
    while True:
        sep = abs(float(pos_a[i]) - float(pos_b[j]))
        worst = max(worst, 2.0 * math.sin(sep / 2.0))
        step = min(ra, rb)
        ra -= step
        rb -= step
        if ra == 0:
            i += 1
            if i == pos_a.shape[0]:
                break
            ra = int(wts_a[i])
        if rb == 0:
            j += 1
            rb = int(wts_b[j])
    return worst


def arc_transport_ratio(theta: float, n: int, eps: float) -> float:
    """Monotone-alignment displacement over sup-displacement on the arc pair.

    The numerator minimizes the worst chordal displacement over the two
    orientation classes of arc homeomorphisms, acting on the discrete
    supports as order-preserving or order-reversing mass alignments. The
    denominator is the exact unrestricted sup-displacement distance.
    """
    space, mu, nu, raw = arc_pair(theta, n, eps)
    pos_mu, wts_mu, pos_nu, wts_nu = raw
    unrestricted = winf(space, mu, nu).value
    forward = _monotone_max_chord(pos_mu, wts_mu, pos_nu, wts_nu)
    backward = _monotone_max_chord(pos_mu, wts_mu, pos_nu[::-1], wts_nu[::-1])
    return min(forward, backward) / unrestricted
