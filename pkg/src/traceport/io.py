"""JSON and CSV input/output for spaces, measures, map families, and reports.

File formats
------------
Measure files are JSON objects with a ``type`` field:

* ``{"type": "discrete", "points": [...], "weights": [...]}`` -- an atomic
  measure.  Points are vertex indices for finite spaces and graphs, and
  coordinates for arc or interval spaces.
* ``{"type": "cdf1d", "breakpoints": [[x, F], ...]}`` -- a measure on the
  line given by its cumulative distribution function.

Space files:

* ``{"type": "matrix", "d": [[...], ...]}`` -- explicit distance matrix.
* ``{"type": "graph", "edges": [[i, j, w], ...]}`` -- weighted graph with
  the shortest-path metric.
* ``{"type": "arc", "theta": ...}`` -- circular arc of angle theta with the
  chordal metric.
* ``{"type": "interval"}`` -- the unit interval with |x - y|.

Eigenvalue-map family files:

* ``{"l": ..., "maps": [ ... ]}`` where each entry is either
  ``{"breakpoints": [[t, v], ...]}`` for a single map or
  ``{"map": {"breakpoints": ...}, "count": n}`` for a repeated block.

All loaders raise :class:`ValidationError` on malformed input, naming the
offending field.  Writers emit canonical JSON (sorted keys, fixed float
repr), so repeated runs produce byte-identical files.
"""

import csv
import json

import numpy as np

from .errors import ValidationError
from .metric_measure import (
    ArcSpace,
    DiscreteMeasure,
    FiniteMetricSpace,
    GeodesicGraph,
    Measure1D,
    UnitInterval,
)
from .nccw import EigenvalueMapFamily
from .pwlinear import PLFunction

FORMAT_VERSION = "1"

__all__ = [
    "FORMAT_VERSION",
    "load_json",
    "load_space",
    "load_measure",
    "load_measure_1d",
    "load_family",
    "family_to_dict",
    "measure_1d_to_dict",
    "map_to_dict",
    "step_plan_to_dict",
    "write_json",
    "write_csv",
]


def load_json(path):
    """Parse a JSON file, converting parse failures into ValidationError."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ValidationError(f"cannot parse {path}: {exc}") from exc


def _require(data, field, context):
    if not isinstance(data, dict):
        raise ValidationError(f"{context}: expected a JSON object")
    if field not in data:
        raise ValidationError(f"{context}: missing field '{field}'")
    return data[field]


def load_space(path):
    """Load a metric-space file.

    Returns one of FiniteMetricSpace, GeodesicGraph, ArcSpace, UnitInterval
    depending on the declared type.
    """
    data = load_json(path)
    kind = _require(data, "type", f"space file {path}")
    if kind == "matrix":
        d = _require(data, "d", f"space file {path}")
        try:
            mat = np.asarray(d, dtype=float)
        except (TypeError, ValueError) as exc:
            raise ValidationError(
                f"space file {path}: field 'd' is not a numeric matrix"
            ) from exc
        return FiniteMetricSpace(mat)
    if kind == "graph":
        edges = _require(data, "edges", f"space file {path}")
        parsed = []
        for idx, edge in enumerate(edges):
            if len(edge) != 3:
                raise ValidationError(
                    f"space file {path}: edge {idx} must be [i, j, w]"
                )
            i, j, w = edge
            parsed.append((int(i), int(j), float(w)))
        if not parsed:
            raise ValidationError(f"space file {path}: field 'edges' is empty")
        n = 1 + max(max(i, j) for i, j, _ in parsed)
        return GeodesicGraph(n, parsed)
    if kind == "arc":
        theta = _require(data, "theta", f"space file {path}")
        return ArcSpace(float(theta))
    if kind == "interval":
        return UnitInterval()
    raise ValidationError(f"space file {path}: unknown type '{kind}'")


def load_measure(path, space):
    """Load a discrete measure file against a given space."""
    data = load_json(path)
    kind = _require(data, "type", f"measure file {path}")
    if kind != "discrete":
        raise ValidationError(
            f"measure file {path}: type '{kind}' is not usable on this space;"
            " expected 'discrete'"
        )
    points = _require(data, "points", f"measure file {path}")
    weights = _require(data, "weights", f"measure file {path}")
    if len(points) != len(weights):
        raise ValidationError(
            f"measure file {path}: 'points' and 'weights' lengths differ"
        )
    if isinstance(space, (ArcSpace, UnitInterval)):
        support = np.asarray(points, dtype=float)
    else:
        support = np.asarray(points, dtype=int)
    try:
        return DiscreteMeasure.merged(space, support, np.asarray(weights, dtype=float))
    except ValidationError as exc:
        raise ValidationError(f"measure file {path}: {exc}") from exc


def load_measure_1d(path):
    """Load a measure on the line, from atoms or from CDF breakpoints."""
    data = load_json(path)
    kind = _require(data, "type", f"measure file {path}")
    try:
        if kind == "discrete":
            points = _require(data, "points", f"measure file {path}")
            weights = _require(data, "weights", f"measure file {path}")
            if len(points) != len(weights):
                raise ValidationError("'points' and 'weights' lengths differ")
            return Measure1D.from_atoms(
                np.asarray(points, dtype=float), np.asarray(weights, dtype=float)
            )
        if kind == "cdf1d":
            pairs = _require(data, "breakpoints", f"measure file {path}")
            return Measure1D.from_breakpoints([(float(x), float(f)) for x, f in pairs])
    except ValidationError as exc:
        raise ValidationError(f"measure file {path}: {exc}") from exc
    raise ValidationError(f"measure file {path}: unknown type '{kind}'")


def _parse_map(entry, context):
    if not isinstance(entry, dict):
        raise ValidationError(f"{context}: each map entry must be a JSON object")
    count = 1
    body = entry
    if "map" in entry:
        body = entry["map"]
        count = entry.get("count", 1)
        if not isinstance(body, dict):
            raise ValidationError(f"{context}: field 'map' must be a JSON object")
    if not isinstance(count, int) or count < 1:
        raise ValidationError(f"{context}: field 'count' must be a positive integer")
    pairs = _require(body, "breakpoints", context)
    try:
        fn = PLFunction.from_pairs([(float(t), float(v)) for t, v in pairs])
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"{context}: bad 'breakpoints': {exc}") from exc
    return fn, count


def load_family(path):
    """Load an ordered eigenvalue-map family file."""
    data = load_json(path)
    declared = _require(data, "l", f"family file {path}")
    maps = _require(data, "maps", f"family file {path}")
    if not maps:
        raise ValidationError(f"family file {path}: field 'maps' is empty")
    entries = []
    for idx, entry in enumerate(maps):
        entries.append(_parse_map(entry, f"family file {path}, maps[{idx}]"))
    total = sum(count for _, count in entries)
    if declared != total:
        raise ValidationError(
            f"family file {path}: field 'l' is {declared} but map counts sum to {total}"
        )
    try:
        return EigenvalueMapFamily(entries)
    except ValidationError as exc:
        raise ValidationError(f"family file {path}: {exc}") from exc


def family_to_dict(family):
    """Serialize a family with count compression."""
    return {
        "l": family.l,
        "maps": [
            {"map": {"breakpoints": _pairs(fn.as_graph())}, "count": count}
            for fn, count in family.entries
        ],
    }


def measure_1d_to_dict(mu):
    return {"type": "cdf1d", "breakpoints": _pairs(mu.curve.pts)}


def map_to_dict(mapping):
    """Serialize a monotone transport map as its graph breakpoints."""
    return {"breakpoints": _pairs(mapping.breakpoints)}


def step_plan_to_dict(plan):
    """Serialize one tower stage, counts in exact integer arithmetic."""
    return {
        "stage": plan.m,
        "p": plan.p,
        "q": plan.q,
        "exponent": plan.n,
        "p_next": plan.p_next,
        "q_next": plan.q_next,
        "c": plan.c,
        "fiber_size": plan.k,
        "count_identity": plan.count_identity,
        "count_constant": plan.count_constant,
        "count_max": plan.count_max,
        "identity_proportion": plan.identity_proportion,
        "defect_bound": plan.defect_bound,
        "family": family_to_dict(plan.family),
    }


def _pairs(pts):
    return [[float(x), float(y)] for x, y in np.asarray(pts, dtype=float)]


def write_json(path, payload):
    """Write a canonical JSON document carrying the format version."""
    doc = {"version": FORMAT_VERSION}
    doc.update(payload)
    text = json.dumps(doc, indent=2, sort_keys=True, allow_nan=False)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)
        fh.write("\n")


def _cell(value):
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def write_csv(path, header, rows):
    """Write a CSV file with a mandatory header row."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_cell(v) for v in row])
