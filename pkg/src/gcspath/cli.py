"""Command-line front end: solve instances, run benchmark grids, and
compile control problems.

Exit codes: 0 optimal, 1 malformed input, 2 infeasible, 3 limit hit.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import statistics
import sys
import time
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import control, instances, serialization
from .bnb import BnbConfig, solve_micp
from .conic import ToleranceConfig, solve
from .duals import extract_potentials
from .formulation import TighteningOptions, build_relaxation, reconstruct
from .graph import Gcs, PathResult
from .render import RenderError, render_svg

EXIT_OK, EXIT_MALFORMED, EXIT_INFEASIBLE, EXIT_LIMIT = 0, 1, 2, 3

log = logging.getLogger("gcspath.cli")


class CliError(Exception):
    def __init__(self, message: str, code: int = EXIT_MALFORMED):
        super().__init__(message)
        self.code = code


def _setup_logging():
    level = {"quiet": logging.WARNING, "info": logging.INFO,
             "debug": logging.DEBUG}.get(os.environ.get("GCS_LOG", "quiet"))
    if level is None:
        level = logging.WARNING
    logging.basicConfig(level=level, format="%(name)s %(message)s")


def _parse_gen(spec: str, seed: int) -> Gcs:
    name, _, rest = spec.partition(":")
    args = rest.split(",") if rest else []
    try:
        if name == "hpp":
            return instances.hpp_chain(int(args[0]))
        if name == "random":
            n, nv, ne, vol = int(args[0]), int(args[1]), int(args[2]), float(args[3])
            length = args[4] if len(args) > 4 else "euclidean"
            return instances.random_instance(seed, n, nv, ne, vol, length)
        if name == "symmetry":
            return instances.symmetry_instance()
        if name == "two_dim":
            sigma = float(args[0]) if args else 1.0
            length = args[1] if len(args) > 1 else "sq_euclidean"
            return instances.two_dim_example(sigma, length)
    except (IndexError, ValueError, instances.InstanceError) as e:
        raise CliError(f"bad generator spec {spec!r}: {e}") from e
    raise CliError(f"unknown generator {name!r} "
                   "(expected hpp:m, random:n,nV,nE,vol[,length], symmetry, "
                   "two_dim[:sigma[,length]])")


def _load_gcs(args) -> Gcs:
    if args.gen:
        return _parse_gen(args.gen, args.seed)
    if not args.instance:
        raise CliError("give an instance file or --gen")
    try:
        with open(args.instance) as f:
            text = f.read()
    except OSError as e:
        raise CliError(f"cannot read {args.instance}: {e.strerror}") from e
    try:
        return serialization.load_instance(text)
    except (serialization.SerializationError, ValueError) as e:
        raise CliError(f"{args.instance}: {e}") from e


def _tols(args) -> ToleranceConfig:
    return ToleranceConfig(feas_tol=args.tol_feas, gap_tol=args.tol_gap)


def _tightening(args) -> TighteningOptions:
    if args.no_tighten:
        return TighteningOptions(degree=False, two_cycle=False)
    return TighteningOptions()


def _emit(args, result: dict):
    text = json.dumps(result, indent=2)
    if args.out:
        with open(args.out, "w") as f:
            f.write(text + "\n")
    else:
        print(text)


def _positions_json(positions):
    return {v: [float(x) for x in p] for v, p in positions.items()}


def _render(args, g, positions, path):
    if not args.svg:
        return
    proj = tuple(args.proj) if args.proj else None
    try:
        svg = render_svg(g, positions, path, proj)
    except RenderError as e:
        raise CliError(str(e)) from e
    with open(args.svg, "w") as f:
        f.write(svg)


def _solve_instance(g: Gcs, args) -> tuple[dict, int]:
    opts = _tightening(args)
    tols = _tols(args)
    result: dict = {"mode": args.mode}
    code = EXIT_OK
    t0 = time.perf_counter()
    if args.mode == "relax":
        rprog = build_relaxation(g, opts)
        sol = solve(rprog.prog, tols)
        if sol.status in ("infeasible", "unbounded"):
            return {"mode": "relax", "status": "infeasible"}, EXIT_INFEASIBLE
        if sol.status != "optimal":
            raise CliError(f"relaxation solve failed: {sol.status}")
        flow = reconstruct(rprog, sol)
        result.update(status="optimal", cost=flow.cost,
                      positions=_positions_json(flow.positions),
                      flows={f"{u}->{v}": y for (u, v), y in flow.flows.items()},
                      time=time.perf_counter() - t0)
        if not rprog.tightened:
            cert = extract_potentials(rprog, sol)
            result["certificate"] = json.loads(cert.to_json())
        return result, code

    cfg = BnbConfig(node_limit=args.node_limit, time_limit=args.time_limit,
                    jobs=args.jobs, tolerances=tols)
    rep = solve_micp(g, cfg, opts)
    if rep.status == "infeasible":
        return {"mode": "micp", "status": "infeasible",
                "nodes": rep.nodes}, EXIT_INFEASIBLE
    if rep.status in ("node-limit", "time-limit"):
        code = EXIT_LIMIT
    result.update(status=rep.status, cost=rep.cost, bound=rep.lower_bound,
                  gap=((rep.cost - rep.relaxation_cost) / rep.cost
                       if rep.cost else 0.0),
                  bnb_gap=rep.gap, nodes=rep.nodes, path=rep.path,
                  relaxation_cost=rep.relaxation_cost, time=rep.wall_time)
    if rep.incumbent is not None:
        result["positions"] = _positions_json(rep.incumbent.positions)
    return result, code


def cmd_solve(args) -> int:
    g = _load_gcs(args)
    result, code = _solve_instance(g, args)
    _emit(args, result)
    if code == EXIT_OK and "positions" in result:
        positions = {v: np.array(p) for v, p in result["positions"].items()}
        _render(args, g, positions, result.get("path"))
    return code


def _bench_one(task):
    seed, params, no_tighten = task
    n, nv, ne, vol, length = params
    row = {"seed": seed, "n": n, "nV": nv, "nE": ne, "volume": vol,
           "length": length}
    try:
        g = instances.random_instance(seed, n, nv, ne, vol, length)
        opts = TighteningOptions(degree=False, two_cycle=False) if no_tighten \
            else TighteningOptions()
        t0 = time.perf_counter()
        rep = solve_micp(g, BnbConfig(), opts)
        wall = time.perf_counter() - t0
        if not rep.optimal:
            row.update(status=rep.status)
            return row
        gap = (rep.cost - rep.relaxation_cost) / rep.cost if rep.cost else 0.0
        row.update(status="optimal", relax_cost=rep.relaxation_cost,
                   micp_cost=rep.cost, gap_pct=100.0 * gap, nodes=rep.nodes,
                   time=wall)
    except Exception as e:  # a failed row must not kill the batch
        row.update(status=f"error: {e}")
    return row


_BENCH_FIELDS = ["seed", "n", "nV", "nE", "volume", "length", "status",
                 "relax_cost", "micp_cost", "gap_pct", "nodes", "time"]


def cmd_bench(args) -> int:
    def ints(s):
        return [int(x) for x in s.split(",")]

    def floats(s):
        return [float(x) for x in s.split(",")]

    grid = [(n, nv, ne, vol, length)
            for n in ints(args.n) for nv in ints(args.nv)
            for ne in ints(args.ne) for vol in floats(args.volume)
            for length in args.length.split(",")]
    tasks = [(seed, params, args.no_tighten)
             for seed in range(args.seed, args.seed + args.seeds)
             for params in grid]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            rows = list(pool.map(_bench_one, tasks))
    else:
        rows = [_bench_one(t) for t in tasks]
    rows.sort(key=lambda r: (r["seed"], r["n"], r["nV"], r["nE"],
                             r["volume"], r["length"]))

    summaries = []
    for params in grid:
        n, nv, ne, vol, length = params
        good = [r for r in rows if r["status"] == "optimal"
                and (r["n"], r["nV"], r["nE"], r["volume"], r["length"]) == params]
        if not good:
            continue
        gaps = [r["gap_pct"] for r in good]
        times = [r["time"] for r in good]
        summaries.append({"seed": "summary", "n": n, "nV": nv, "nE": ne,
                          "volume": vol, "length": length,
                          "status": f"{len(good)} ok",
                          "gap_pct": statistics.median(gaps),
                          "time": statistics.median(times)})
        summaries.append({"seed": "summary-max", "n": n, "nV": nv, "nE": ne,
                          "volume": vol, "length": length,
                          "status": f"{len(good)} ok",
                          "gap_pct": max(gaps), "time": max(times)})

    with open(args.out, "w", newline="") as f:
        w = csv.DictWriter(f, fieldnames=_BENCH_FIELDS)
        w.writeheader()
        for r in rows + summaries:
            w.writerow(r)
    log.info("wrote %d rows to %s", len(rows) + len(summaries), args.out)
    return EXIT_OK


def cmd_control(args) -> int:
    try:
        with open(args.system) as f:
            text = f.read()
    except OSError as e:
        raise CliError(f"cannot read {args.system}: {e.strerror}") from e
    try:
        loaded = serialization.load_system(text)
    except serialization.SerializationError as e:
        raise CliError(f"{args.system}: {e}") from e

    if isinstance(loaded[0], control.LinearSystem):
        sys_, t_max = loaded
        g = control.build_min_time_gcs(sys_, t_max)
    else:
        sys_ = loaded[0]
        g = control.build_pwa_gcs(sys_)

    result, code = _solve_instance(g, args)
    if code == EXIT_OK and args.mode == "micp":
        pr = PathResult(result["path"],
                        {v: np.array(p) for v, p in result["positions"].items()},
                        result["cost"])
        if isinstance(sys_, control.LinearSystem):
            traj = control.min_time_trajectory(sys_, pr)
            result["horizon"] = traj.horizon
        else:
            traj = control.pwa_trajectory(sys_, pr)
            result["modes"] = traj.modes
        with open(args.traj, "w") as f:
            f.write(traj.to_csv())
    _emit(args, result)
    return code


def _add_common(p):
    p.add_argument("--mode", choices=["relax", "micp"], default="micp")
    p.add_argument("--tol-feas", type=float, default=1e-8)
    p.add_argument("--tol-gap", type=float, default=1e-8)
    p.add_argument("--node-limit", type=int, default=None)
    p.add_argument("--time-limit", type=float, default=None)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--no-tighten", action="store_true",
                   help="drop the degree and two-cycle rows")
    p.add_argument("--out", default=None, help="result JSON path (default stdout)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="gcspath",
        description="Shortest paths through graphs of convex sets.")
    sub = ap.add_subparsers(dest="command", required=True)

    ps = sub.add_parser("solve", help="solve one instance")
    ps.add_argument("instance", nargs="?", help="instance JSON file")
    ps.add_argument("--gen", help="generator spec, e.g. hpp:4 or "
                    "random:2,8,16,0.01")
    ps.add_argument("--svg", help="render the solved instance to this file")
    ps.add_argument("--proj", type=int, nargs=2, metavar=("I", "J"),
                    help="coordinate pair for rendering projections")
    _add_common(ps)
    ps.set_defaults(fn=cmd_solve)

    pb = sub.add_parser("bench", help="benchmark a random-instance grid")
    pb.add_argument("--n", default="2")
    pb.add_argument("--nv", default="8")
    pb.add_argument("--ne", default="16")
    pb.add_argument("--volume", default="0.01")
    pb.add_argument("--length", default="euclidean")
    pb.add_argument("--seeds", type=int, default=5)
    _add_common(pb)
    pb.set_defaults(fn=cmd_bench, out="bench.csv")

    pc = sub.add_parser("control", help="solve a control system")
    pc.add_argument("system", help="system JSON file")
    pc.add_argument("--traj", default="trajectory.csv",
                    help="trajectory CSV output path")
    _add_common(pc)
    pc.set_defaults(fn=cmd_control)
    return ap


def main(argv=None) -> int:
    _setup_logging()
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.fn(args)
    except CliError as e:
        print(f"error: {e}", file=sys.stderr)
        return e.code


if __name__ == "__main__":
    sys.exit(main())
