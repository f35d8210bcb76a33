"""flowsim command line.

Exit codes: 0 success, 1 usage or configuration error, 2 a collision
happened, 3 unreachable goal / no path, 4 routing techniques disagree,
5 the run ended without collisions but with agents not parked.
"""
from __future__ import annotations

import argparse
import io
import csv
import json
import logging
import math
import os
import sys
import time

import numpy as np

from . import SCHEMA
from .ca_traffic import fundamental_diagram
from .motion import (
    ControlLimits, NoPath, check_limits, field_plan, grid_plan_points, quintic_connect, sample_plan,
)
from .road_network import NetworkError, load_network
from .routing import ALGORITHMS, Router, Unreachable
from .sim_engine import ConfigError, atomic_write, evaluate_modes, load_scenario, run, write_outputs
from .svg import path_svg, scatter_svg, trajectories_svg

EXIT_OK, EXIT_USAGE, EXIT_COLLISION, EXIT_UNREACHABLE, EXIT_DISAGREE, EXIT_NOT_PARKED = range(6)
LOG_LEVELS = {"error": logging.ERROR, "warn": logging.WARNING, "info": logging.INFO,
              "debug": logging.DEBUG}

log = logging.getLogger("flowsim")


class UsageError(Exception):
    pass


class Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_USAGE)


def _point(s):
    try:
        x, y = (float(v) for v in s.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected x,y but got {s!r}")
    return (x, y)


def build_parser():
    p = Parser(prog="flowsim", description="Agent-based traffic simulation toolkit.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=Parser)

    r = sub.add_parser("run", help="run a scenario and write trace.jsonl and metrics.json")
    r.add_argument("scenario")
    r.add_argument("--out", required=True)
    r.add_argument("--seed", type=int)

    q = sub.add_parser("route", help="shortest route between two nodes")
    q.add_argument("network")
    q.add_argument("--from", dest="source", required=True)
    q.add_argument("--to", dest="target", required=True)
    q.add_argument("--algo", default="dijkstra", help="one of " + ", ".join(ALGORITHMS))
    q.add_argument("--seed", type=int, default=0)

    b = sub.add_parser("bench", help="compare routing techniques on random queries (CSV)")
    b.add_argument("network")
    b.add_argument("--queries", type=int, default=100)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--no-timing", action="store_true", help="omit wall-clock columns")

    c = sub.add_parser("ca", help="cellular-automaton fundamental diagram (CSV)")
    c.add_argument("--length", type=int, default=1000)
    c.add_argument("--density", help="one density or a comma list; default sweeps 0..1 in 21 steps")
    c.add_argument("--vmax", type=int, default=5)
    c.add_argument("--p", type=float, default=0.3)
    c.add_argument("--steps", type=int, default=2000)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--svg")

    pl = sub.add_parser("plan", help="plan a local path on a network's occupancy grid")
    pl.add_argument("--grid", required=True, help="network file with a grid")
    pl.add_argument("--from", dest="source", required=True, type=_point)
    pl.add_argument("--to", dest="target", required=True, type=_point)
    pl.add_argument("--method", required=True, choices=["astar", "rrt", "field", "quintic"])
    pl.add_argument("--seed", type=int, default=0)
    pl.add_argument("--samples", type=int, default=20000)
    pl.add_argument("--duration", type=float, help="quintic duration in seconds")
    pl.add_argument("--out", help="write the JSON here instead of standard output")
    pl.add_argument("--svg")

    e = sub.add_parser("eval", help="run a scenario in both guidance modes and compare")
    e.add_argument("scenario")
    e.add_argument("--out", required=True)
    return p


def _setup_logging():
    level = os.environ.get("FLOWSIM_LOG", "warn").lower()
    if level not in LOG_LEVELS:
        raise UsageError(f"FLOWSIM_LOG must be one of {', '.join(LOG_LEVELS)}, not {level!r}")
    logging.basicConfig(level=LOG_LEVELS[level], stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")


def _emit(obj, out=None):
    text = json.dumps(obj, indent=2) + "\n"
    if out:
        atomic_write(out, text)
    else:
        sys.stdout.write(text)


def _scenario_exit(metrics):
    agents = metrics["agents"].values()
    if any(a["collision_count"] > 0 for a in agents):
        return EXIT_COLLISION
    if all(a["status"] == "Parked" for a in agents):
        return EXIT_OK
    return EXIT_NOT_PARKED


def cmd_run(args):
    cfg = load_scenario(args.scenario, seed=args.seed)
    _, metrics = run(cfg, out_dir=args.out)
    code = _scenario_exit(metrics)
    log.info("run finished at t=%.2f with exit code %d", metrics["t_end"], code)
    return code


def cmd_route(args):
    if args.algo not in ALGORITHMS:
        raise UsageError(f"unknown algorithm {args.algo!r}; valid names: {', '.join(ALGORITHMS)}")
    net = load_network(args.network)
    for v in (args.source, args.target):
        if v not in net.nodes:
            raise UsageError(f"unknown node {v!r}")
    t0 = time.perf_counter()
    router = Router(net, args.algo, seed=args.seed)
    t1 = time.perf_counter()
    route = router.query(args.source, args.target)
    t2 = time.perf_counter()
    _emit({"cost": route.total_cost, "path": route.node_sequence,
           "scanned_vertices": route.scanned_vertices,
           "preprocess_ms": (t1 - t0) * 1e3, "query_us": (t2 - t1) * 1e6})
    return EXIT_OK


def bench_rows(net, queries, seed, timing=True):
    """One row per technique; raises AssertionError on any cost disagreement."""
    from .routing import reach

    rng = np.random.default_rng(seed)
    ids = sorted(net.nodes)
    pairs = [(ids[i], ids[j]) for i, j in rng.integers(len(ids), size=(queries, 2))] if ids else []
    rows = []
    reference = None
    for algo in ALGORITHMS:
        row = {"algorithm": algo, "queries": queries}
        if algo == "reach" and len(ids) > reach.MAX_EXACT_VERTICES:
            row.update(mean_scanned="", cost_checksum="", unreachable="", status="skipped")
            if timing:
                row.update(preprocess_ms="", mean_query_us="")
            rows.append(row)
            continue
        if not pairs:
            rows.append(row | {"mean_scanned": "", "cost_checksum": "", "unreachable": "",
                               "status": "ok"} | ({"preprocess_ms": "", "mean_query_us": ""}
                                                  if timing else {}))
            continue
        t0 = time.perf_counter()
        router = Router(net, algo, seed=seed)
        t1 = time.perf_counter()
        costs, scanned = [], []
        for s, t in pairs:
            try:
                r = router.query(s, t)
                costs.append(r.total_cost)
                scanned.append(r.scanned_vertices)
            except Unreachable:
                costs.append(math.inf)
        t2 = time.perf_counter()
        if reference is None:
            reference = costs
        elif costs != reference:
            bad = next(i for i, (a, b) in enumerate(zip(costs, reference)) if a != b)
            raise AssertionError(f"{algo} disagrees with dijkstra on query {pairs[bad]}: "
                                 f"{costs[bad]} != {reference[bad]}")
        finite = [c for c in costs if c != math.inf]
        row.update(mean_scanned=f"{np.mean(scanned):.2f}" if scanned else "",
                   cost_checksum=f"{math.fsum(finite):.6f}", unreachable=len(costs) - len(finite),
                   status="ok")
        if timing:
            row.update(preprocess_ms=f"{(t1 - t0) * 1e3:.1f}",
                       mean_query_us=f"{(t2 - t1) * 1e6 / len(pairs):.1f}")
        rows.append(row)
    return rows


def cmd_bench(args):
    if args.queries < 0:
        raise UsageError("--queries must be non-negative")
    net = load_network(args.network)
    timing = not args.no_timing
    try:
        rows = bench_rows(net, args.queries, args.seed, timing)
    except AssertionError as exc:
        print(f"flowsim bench: {exc}", file=sys.stderr)
        return EXIT_DISAGREE
    cols = ["algorithm", "queries", "mean_scanned", "cost_checksum", "unreachable", "status"]
    if timing:
        cols += ["preprocess_ms", "mean_query_us"]
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
    w.writeheader()
    if args.queries > 0:
        w.writerows(rows)
    sys.stdout.write(buf.getvalue())
    return EXIT_OK


def cmd_ca(args):
    if args.density is None:
        densities = np.linspace(0.0, 1.0, 21)
    else:
        try:
            densities = [float(x) for x in args.density.split(",")]
        except ValueError:
            raise UsageError(f"bad --density {args.density!r}")
    if any(not 0.0 <= d <= 1.0 for d in densities):
        raise UsageError("densities must lie in [0, 1]")
    if not 0.0 <= args.p <= 1.0:
        raise UsageError("--p must lie in [0, 1]")
    if args.length < 1 or args.vmax < 1 or args.steps < 2:
        raise UsageError("--length and --vmax must be positive and --steps at least 2")
    rows = fundamental_diagram(args.length, densities, args.vmax, args.p, args.steps, args.seed)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["density", "flow", "mean_speed"])
    for r in rows:
        w.writerow([f"{r.density:.6f}", f"{r.flow:.6f}", f"{r.mean_speed:.6f}"])
    sys.stdout.write(buf.getvalue())
    if args.svg:
        atomic_write(args.svg, scatter_svg([r.density for r in rows], [r.flow for r in rows],
                                           "density", "flow"))
    return EXIT_OK


def _grid_field(grid, rho):
    blocked = np.argwhere(~grid.passable)
    centers = np.column_stack([grid.origin[0] + (blocked[:, 1] + 0.5) * grid.cell_size,
                               grid.origin[1] + (blocked[:, 0] + 0.5) * grid.cell_size])
    r = grid.cell_size / math.sqrt(2.0)

    def near(p):
        d = np.hypot(centers[:, 0] - p[0], centers[:, 1] - p[1])
        return [(tuple(c), r) for c in centers[d < rho + r]]
    return near


def cmd_plan(args):
    net = load_network(args.grid)
    grid = net.grid
    if grid is None:
        raise UsageError(f"{args.grid} has no occupancy grid")
    out = {"schema": SCHEMA, "method": args.method}
    if args.method == "astar":
        path = grid_plan_points(grid, args.source, args.target)
        out.update(kind="path", cost=path.cost, points=path.points.tolist())
        pts = path.points
    elif args.method == "rrt":
        path = sample_plan(grid, args.source, args.target, args.samples, args.seed)
        out.update(kind="path", cost=path.cost, points=path.points.tolist())
        pts = path.points
    elif args.method == "field":
        path = field_plan(args.source, args.target, _grid_field(grid, 3.0), (1.0, 2.0, 3.0),
                          step=grid.cell_size / 2)
        out.update(kind="path", cost=path.cost, points=path.points.tolist())
        pts = path.points
    else:
        d = math.dist(args.source, args.target)
        T = args.duration if args.duration else max(2.0, 2.0 * d / 5.0)
        zero = (0.0, 0.0)
        traj = quintic_connect((args.source, zero, zero), (args.target, zero, zero), T)
        violations = check_limits(traj, ControlLimits()) if len(traj) >= 3 else []
        out.update(kind="trajectory", duration=T, **traj.to_dict(),
                   violations=[v.__dict__ for v in violations])
        pts = traj.points
    _emit(out, args.out)
    if args.svg:
        atomic_write(args.svg, path_svg(grid, pts))
    return EXIT_OK


def cmd_eval(args):
    cfg = load_scenario(args.scenario)
    report, paths = evaluate_modes(cfg)
    atomic_write(os.path.join(args.out, "eval.json"), json.dumps(report, indent=2) + "\n")
    atomic_write(os.path.join(args.out, "eval.svg"), trajectories_svg(cfg.network, paths))
    return EXIT_OK


COMMANDS = {"run": cmd_run, "route": cmd_route, "bench": cmd_bench, "ca": cmd_ca,
            "plan": cmd_plan, "eval": cmd_eval}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        _setup_logging()
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"flowsim {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FileNotFoundError as exc:
        print(f"flowsim {args.command}: file not found: {exc.filename}", file=sys.stderr)
        return EXIT_USAGE
    except (Unreachable, NoPath) as exc:
        log.info("%s", exc)
        print(json.dumps({"error": "unreachable"}))
        return EXIT_UNREACHABLE
    except (ConfigError, NetworkError, ValueError) as exc:
        print(f"flowsim {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
