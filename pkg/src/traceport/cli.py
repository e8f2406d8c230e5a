"""Command-line interface.

One binary, six subcommands, deterministic output:

* ``wasserstein``     -- distance between two measure files on a space file.
* ``transport-map``   -- monotone rearrangement between two 1-D measures.
* ``arc-constant``    -- monotone-vs-unrestricted transport ratio on arcs.
* ``ddrop-distance``  -- diagonal and sampled matching distances of families.
* ``jiangsu-build``   -- diagonal-map tower plans with exact integer counts.
* ``pm-clt``          -- intermittent-map almost-sure CLT experiment.

Every subcommand writes its results to ``--out`` (JSON or CSV as documented
in its help text) and prints a one-line summary to stdout.  CSV files always
start with a header row; JSON files are a single object with a ``version``
field, and every numeric result carries the method tag of the operation that
produced it.  Randomized subcommands take ``--seed`` (default 1729); with the
same inputs and seed, output files are byte-identical across runs.

Exit codes: 0 on success, 2 on validation or parse errors (the diagnostic
names the offending flag or field), 3 when a computation is infeasible or
degenerate.

The environment variable ``TRACEPORT_THREADS`` caps the worker threads used
to fan out independent seeds or grid points; results are reordered
canonically before writing, so the thread count never affects output bytes.
"""

import argparse
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor

from . import io as fileio
from .chaotic_clt import (
    PMParams,
    center_observable,
    clt_experiment,
    invariant_measure_estimate,
)
from .errors import DegenerateComputationError, ValidationError
from .metric_measure import Measure1D
from .nccw import d_diagonal, dw_sampled, lipschitz_battery, simulate_tower, wp_diagonal_pair
from .pwlinear import PLFunction
from .transport import arc_transport_ratio, displacement_norm, increasing_rearrangement
from .wasserstein import levy_prokhorov, w1_dual, winf, wp_primal

DEFAULT_SEED = 1729

__all__ = ["DEFAULT_SEED", "main"]


def _worker_count(n_items: int) -> int:
    raw = os.environ.get("TRACEPORT_THREADS")
    if raw is None:
        return max(1, min(4, n_items))
    try:
        cap = int(raw)
    except ValueError as exc:
        raise ValidationError("TRACEPORT_THREADS must be an integer") from exc
    if cap < 1:
        raise ValidationError("TRACEPORT_THREADS must be >= 1")
    return min(cap, max(1, n_items))


def _fan_out(fn, items):
    """Map fn over items, possibly on worker threads, preserving order."""
    items = list(items)
    workers = _worker_count(len(items))
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _parse_order(text: str) -> float:
    token = text.strip().lower()
    if token in {"inf", "infinity", "oo"}:
        return math.inf
    try:
        return float(token)
    except ValueError as exc:
        raise ValidationError(f"flag --p: '{text}' is not a number or 'inf'") from exc


def _parse_thetas(text: str):
    """Parse a comma list of angles; a trailing 'pi' multiplies by pi."""
    values = []
    for raw in text.split(","):
        token = raw.strip().lower()
        if not token:
            continue
        factor = 1.0
        if token.endswith("pi"):
            factor = math.pi
            token = token[:-2].strip() or "1"
        try:
            values.append(float(token) * factor)
        except ValueError as exc:
            raise ValidationError(f"flag --thetas: cannot parse '{raw.strip()}'") from exc
    if not values:
        raise ValidationError("flag --thetas: no angles given")
    return values


def _parse_checkpoints(text: str, steps: int):
    out = []
    for raw in text.split(","):
        token = raw.strip()
        if not token:
            continue
        try:
            out.append(int(token))
        except ValueError as exc:
            raise ValidationError(f"flag --checkpoints: cannot parse '{token}'") from exc
    if not out:
        raise ValidationError("flag --checkpoints: no values given")
    if sorted(set(out)) != out:
        raise ValidationError("flag --checkpoints: values must be strictly increasing")
    if out[-1] > steps:
        raise ValidationError("flag --checkpoints: largest value exceeds --steps")
    return out


def _default_checkpoints(steps: int):
    points = [10**k for k in range(3, 10) if 10**k <= steps]
    if not points or points[-1] != steps:
        points.append(steps)
    return points


def _sibling(path: str, ext: str) -> str:
    return os.path.splitext(path)[0] + ext


def _report_dict(report) -> dict:
    doc = report.to_dict()
    doc["value"] = float(doc["value"])
    return doc


def _cmd_wasserstein(args) -> int:
    space = fileio.load_space(args.space)
    mu = fileio.load_measure(args.mu, space)
    nu = fileio.load_measure(args.nu, space)
    p = _parse_order(args.p)
    if math.isinf(p):
        report = winf(space, mu, nu)
    else:
        report = wp_primal(space, mu, nu, p)
    payload = {
        "p": "inf" if math.isinf(p) else p,
        "distance": _report_dict(report),
    }
    if args.dual:
        if math.isinf(p) or p != 1.0:
            raise ValidationError("flag --dual: the dual route applies only at p=1")
        payload["dual"] = _report_dict(w1_dual(space, mu, nu))
    if args.prokhorov:
        payload["neighbourhood_distance"] = {
            "value": float(levy_prokhorov(space, mu, nu)),
            "method": "exact-subset-enumeration",
        }
    fileio.write_json(args.out, payload)
    print(
        f"wasserstein: p={args.p} value={float(report.value):.12g}"
        f" method={report.method} -> {args.out}"
    )
    return 0


def _cmd_transport_map(args) -> int:
    source = fileio.load_measure_1d(args.source)
    target = fileio.load_measure_1d(args.target)
    mapping = increasing_rearrangement(source, target, relaxed=True)
    norms = {}
    for key, order in (("p1", 1.0), ("p2", 2.0), ("sup", math.inf)):
        norms[key] = {
            "value": float(displacement_norm(mapping, source, order)),
            "method": "sup-displacement" if math.isinf(order) else "exact-segment-integral",
        }
    payload = {
        "map": {
            "breakpoints": fileio.map_to_dict(mapping)["breakpoints"],
            "method": "quantile-composition",
        },
        "displacement_norms": norms,
        "warning": mapping.warning,
    }
    fileio.write_json(args.out, payload)
    print(
        f"transport-map: |h-id|_1={norms['p1']['value']:.12g}"
        f" sup={norms['sup']['value']:.12g} -> {args.out}"
    )
    return 0


def _cmd_arc_constant(args) -> int:
    thetas = _parse_thetas(args.thetas)
    if args.points < 2:
        raise ValidationError("flag --points: need at least 2 points per arc")
    if args.eps <= 0:
        raise ValidationError("flag --eps: cluster width must be positive")
    ratios = _fan_out(lambda th: arc_transport_ratio(th, args.points, args.eps), thetas)
    rows = [
        (theta, ratio, "monotone-vs-bottleneck")
        for theta, ratio in zip(thetas, ratios)
    ]
    fileio.write_csv(args.out, ["theta", "ratio", "method"], rows)
    print(
        f"arc-constant: {len(thetas)} angles, n={args.points}, eps={args.eps},"
        f" max ratio={max(ratios):.12g} -> {args.out}"
    )
    return 0


def _cmd_ddrop_distance(args) -> int:
    fam_a = fileio.load_family(args.a)
    fam_b = fileio.load_family(args.b)
    diagonal = d_diagonal(fam_a, fam_b)
    battery = lipschitz_battery(args.seed, count=args.battery_size)
    sampled = dw_sampled(fam_a, fam_b, battery, grid=args.grid)
    trace = Measure1D.uniform()
    table = {}
    for key, order in (("p1", 1.0), ("p2", 2.0), ("sup", math.inf)):
        table[key] = {
            "value": float(wp_diagonal_pair(fam_a, fam_b, trace, order)),
            "method": "quantile-sup" if math.isinf(order) else "quantile-integral",
        }
    payload = {
        "diagonal_distance": {"value": float(diagonal), "method": "blockwise-sup-gap"},
        "sampled_matching_distance": {
            "value": float(sampled),
            "method": "lipschitz-battery-sup",
            "battery_size": len(battery),
            "battery_seed": args.seed,
            "grid": args.grid,
        },
        "wasserstein_table": table,
    }
    fileio.write_json(args.out, payload)
    print(
        f"ddrop-distance: diagonal={float(diagonal):.12g}"
        f" sampled={float(sampled):.12g} -> {args.out}"
    )
    return 0


def _cmd_jiangsu_build(args) -> int:
    if args.stages < 0:
        raise ValidationError("flag --stages: must be >= 0")
    c_values = []
    for raw in str(args.c).split(","):
        token = raw.strip()
        if token:
            c_values.append(float(token))
    if not c_values:
        raise ValidationError("flag --c: no values given")
    if len(c_values) == 1:
        c_values = c_values * args.stages
    if len(c_values) < args.stages:
        raise ValidationError("flag --c: fewer values than stages")
    plans = simulate_tower(args.p, args.q, c_values, args.stages)
    payload = {
        "p": args.p,
        "q": args.q,
        "stages": [fileio.step_plan_to_dict(plan) for plan in plans],
        "method": "exact-integer-counts",
    }
    fileio.write_json(args.out, payload)
    csv_path = _sibling(args.out, ".csv")
    rows = [
        (
            plan.m,
            plan.n,
            plan.k,
            plan.identity_proportion,
            plan.defect_bound,
            "exact-integer-counts",
        )
        for plan in plans
    ]
    fileio.write_csv(
        csv_path,
        ["stage", "exponent", "fiber_size", "identity_proportion", "defect_bound", "method"],
        rows,
    )
    if plans:
        last = plans[-1]
        print(
            f"jiangsu-build: {len(plans)} stages, final exponent={last.n},"
            f" identity proportion={last.identity_proportion:.12g}"
            f" -> {args.out}, {csv_path}"
        )
    else:
        print(f"jiangsu-build: 0 stages -> {args.out}, {csv_path}")
    return 0


def _cmd_pm_clt(args) -> int:
    if args.seeds < 1:
        raise ValidationError("flag --seeds: need at least one seed")
    if args.checkpoints is None:
        checkpoints = _default_checkpoints(args.steps)
    else:
        checkpoints = _parse_checkpoints(args.checkpoints, args.steps)
    seeds = [args.seed + i for i in range(args.seeds)]

    def one(seed: int):
        # center against the same orbit's empirical estimate so the
        # residual check reflects only the estimate's own accuracy
        params = PMParams(alpha=args.alpha, seed=seed, n_steps=args.steps)
        estimate = invariant_measure_estimate(params, burn=0)
        observable = center_observable(PLFunction.identity(), estimate)
        return clt_experiment(
            params,
            observable,
            checkpoints,
            label="centered coordinate observable",
        )

    results = _fan_out(one, seeds)
    rows = []
    for seed, result in zip(seeds, results):
        for n, w1 in result.checkpoints:
            rows.append((seed, n, w1, result.sigma2, "log-weighted-empirical-w1"))
    fileio.write_csv(args.out, ["seed", "n", "w1", "sigma2", "method"], rows)

    by_checkpoint = {}
    for result in results:
        for n, w1 in result.checkpoints:
            by_checkpoint.setdefault(n, []).append(w1)
    medians = {
        str(n): float(sorted(values)[len(values) // 2])
        if len(values) % 2
        else float(
            (sorted(values)[len(values) // 2 - 1] + sorted(values)[len(values) // 2]) / 2
        )
        for n, values in sorted(by_checkpoint.items())
    }
    summary_path = _sibling(args.out, ".json")
    payload = {
        "alpha": args.alpha,
        "steps": args.steps,
        "seeds": seeds,
        "checkpoints": checkpoints,
        "observable": results[0].observable,
        "centering_tolerance": 1e-3,
        "median_w1": {"values": medians, "method": "log-weighted-empirical-w1"},
        "sigma2": {
            "values": {
                str(seed): {
                    "block": result.sigma2,
                    "green_kubo": result.sigma2_green_kubo,
                    "centering_residual": result.centering_residual,
                }
                for seed, result in zip(seeds, results)
            },
            "method": "block-variance-with-green-kubo-check",
        },
    }
    fileio.write_json(summary_path, payload)
    final = medians[str(checkpoints[-1])]
    print(
        f"pm-clt: alpha={args.alpha} seeds={args.seeds} steps={args.steps}"
        f" final median W1={final:.12g} -> {args.out}, {summary_path}"
    )
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="traceport",
        description="Transport distances, monotone rearrangements, "
        "eigenvalue-map families, and an intermittent-map CLT harness.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    w = sub.add_parser(
        "wasserstein",
        help="distance between two measures on a common space",
        description="Reads a space file and two measure files and writes a "
        "JSON distance report with a witness (plan or potential).",
    )
    w.add_argument("--space", required=True, help="space file (matrix|graph|arc|interval)")
    w.add_argument("--mu", required=True, help="first measure file")
    w.add_argument("--nu", required=True, help="second measure file")
    w.add_argument("--p", required=True, help="cost exponent, a float >= 1 or 'inf'")
    w.add_argument("--dual", action="store_true", help="also solve the dual program (p=1 only)")
    w.add_argument(
        "--prokhorov",
        action="store_true",
        help="also compute the exact neighbourhood distance (support <= 20)",
    )
    w.add_argument("--out", default="wasserstein.json", help="output JSON path")
    w.set_defaults(handler=_cmd_wasserstein)

    t = sub.add_parser(
        "transport-map",
        help="monotone rearrangement pushing one 1-D measure onto another",
        description="Writes the rearrangement's breakpoints and its "
        "displacement norms for p in {1, 2, sup}.",
    )
    t.add_argument("--source", required=True, help="measure file being pushed forward")
    t.add_argument("--target", required=True, help="measure file to hit")
    t.add_argument("--out", default="transport-map.json", help="output JSON path")
    t.set_defaults(handler=_cmd_transport_map)

    a = sub.add_parser(
        "arc-constant",
        help="monotone-vs-unrestricted transport ratio on circular arcs",
        description="Writes a CSV with columns theta, ratio, method. Angles "
        "accept a 'pi' suffix (e.g. 0.5pi).",
    )
    a.add_argument(
        "--thetas",
        default="0.5pi,1pi,1.5pi,1.9pi",
        help="comma list of arc angles in (0, 2pi)",
    )
    a.add_argument("--points", type=int, default=50, help="atoms per cluster and per spread")
    a.add_argument("--eps", type=float, default=0.01, help="cluster width")
    a.add_argument("--out", default="arc-constant.csv", help="output CSV path")
    a.set_defaults(handler=_cmd_arc_constant)

    d = sub.add_parser(
        "ddrop-distance",
        help="diagonal distance and sampled matching distance of map families",
        description="Reads two family files and writes the diagonal distance, "
        "the battery-sampled matching distance, and a Wasserstein table "
        "for p in {1, 2, sup} under the uniform trace.",
    )
    d.add_argument("--a", required=True, help="first family file")
    d.add_argument("--b", required=True, help="second family file")
    d.add_argument("--grid", type=int, default=512, help="sampling grid size")
    d.add_argument("--battery-size", type=int, default=16, help="observables in the battery")
    d.add_argument("--seed", type=int, default=DEFAULT_SEED, help="battery seed")
    d.add_argument("--out", default="ddrop-distance.json", help="output JSON path")
    d.set_defaults(handler=_cmd_ddrop_distance)

    j = sub.add_parser(
        "jiangsu-build",
        help="diagonal-map tower with exact integer multiplicities",
        description="Writes per-stage JSON plans to --out and a CSV of "
        "identity proportions and defect bounds next to it "
        "(same name, .csv extension).",
    )
    j.add_argument("--p", type=int, required=True, help="first boundary multiplicity")
    j.add_argument("--q", type=int, required=True, help="second boundary multiplicity, coprime")
    j.add_argument("--stages", type=int, required=True, help="tower stages to build")
    j.add_argument(
        "--c",
        required=True,
        help="pinch parameter in [0,1]; one value or a comma list per stage",
    )
    j.add_argument("--out", default="jiangsu-build.json", help="output JSON path")
    j.set_defaults(handler=_cmd_jiangsu_build)

    m = sub.add_parser(
        "pm-clt",
        help="almost-sure CLT experiment for the intermittent interval map",
        description="Writes a CSV with columns seed, n, w1, sigma2, method to "
        "--out and a JSON summary next to it (same name, .json "
        "extension). Seeds are seed, seed+1, ...",
    )
    m.add_argument("--alpha", type=float, required=True, help="intermittency exponent in (0, 0.5)")
    m.add_argument("--steps", type=int, required=True, help="orbit length per seed")
    m.add_argument("--seeds", type=int, required=True, help="number of seeds")
    m.add_argument(
        "--checkpoints",
        default=None,
        help="comma list of Birkhoff lengths; default: powers of 10 up to --steps",
    )
    m.add_argument("--seed", type=int, default=DEFAULT_SEED, help="base seed")
    m.add_argument("--out", default="pm-clt.csv", help="output CSV path")
    m.set_defaults(handler=_cmd_pm_clt)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        code = exc.code
        if code is None:
            return 0
        return code if isinstance(code, int) else 2
    try:
        return args.handler(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except DegenerateComputationError as exc:
        print(f"degenerate: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
