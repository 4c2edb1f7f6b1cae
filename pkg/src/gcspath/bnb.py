"""Branch and bound over the edge flows.

Nodes fix subsets of the flow variables to 0 or 1 and solve the conic
relaxation restricted accordingly. Node selection is best-bound; branching
picks the flow closest to 1/2 (ties by edge index). Incumbents come from
integral nodes and from a greedy rounding walk at the root.
"""

from __future__ import annotations

import heapq
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .conic import ToleranceConfig, solve
from .formulation import (FlowSolution, RelaxationProgram, TighteningOptions,
                          build_relaxation, fix_flows, reconstruct)
from .graph import Gcs, PathResult

log = logging.getLogger("gcspath.bnb")

EdgeKey = tuple[str, str]


class BnbError(RuntimeError):
    pass


@dataclass
class BnbConfig:
    integrality_tol: float = 1e-5
    rel_gap_tol: float = 1e-6
    abs_gap_tol: float = 1e-9
    node_limit: int | None = None
    time_limit: float | None = None
    jobs: int = 1
    tolerances: ToleranceConfig | None = None

    def __post_init__(self):
        if min(self.integrality_tol, self.rel_gap_tol, self.abs_gap_tol) <= 0:
            raise BnbError("tolerances must be positive")


@dataclass
class BnbReport:
    status: str  # optimal | infeasible | node-limit | time-limit
    cost: float | None
    lower_bound: float
    gap: float
    nodes: int
    wall_time: float
    incumbent: FlowSolution | None = None
    path: list[str] | None = None
    relaxation_cost: float | None = None
    node_log: list[str] = field(default_factory=list)

    @property
    def optimal(self) -> bool:
        return self.status == "optimal"


def _gap(inc: float | None, lb: float) -> float:
    if inc is None:
        return float("inf")
    return (inc - lb) / max(abs(inc), 1.0)


def _path_from_flows(g: Gcs, flows: dict[EdgeKey, float],
                     threshold: float = 0.5) -> list[str] | None:
    """Greedy walk from the source along the largest-flow unvisited edge."""
    path = [g.source]
    visited = {g.source}
    while path[-1] != g.target:
        cands = [e for e in g.out_edges(path[-1]) if e.v not in visited]
        if not cands:
            return None
        best = max(cands, key=lambda e: (flows[e.key], e.key))
        if flows[best.key] < threshold:
            return None
        path.append(best.v)
        visited.add(best.v)
    return path


def round_incumbent(rprog: RelaxationProgram, relax_sol: FlowSolution,
                    tol: ToleranceConfig | None = None) -> PathResult | None:
    """Greedy rounding: walk the largest flows to the target, then fix that
    path's flows and solve the restricted program for its exact cost."""
    g = rprog.gcs
    path = _path_from_flows(g, relax_sol.flows, threshold=0.0)
    if path is None:
        return None
    on_path = set(zip(path, path[1:]))
    yfix = {e.key: (1.0 if e.key in on_path else 0.0) for e in g.edges}
    sub = fix_flows(rprog, yfix)
    sol = solve(sub.prog, tol)
    if sol.status != "optimal":
        return None
    flow = reconstruct(sub, sol)
    positions = {v: flow.positions[v] for v in path}
    return PathResult(path, positions, flow.cost)


def _implied_zeros(g: Gcs, key: EdgeKey) -> list[EdgeKey]:
    """Edges excluded from any simple path that uses `key`."""
    u, v = key
    out = []
    for e in g.out_edges(u):
        if e.key != key:
            out.append(e.key)
    for e in g.in_edges(v):
        if e.key != key:
            out.append(e.key)
    if (v, u) in {e.key for e in g.edges}:
        out.append((v, u))
    return out


@dataclass(order=True)
class _Node:
    bound: float
    serial: int
    yfix: dict[EdgeKey, float] = field(compare=False)
    flow: FlowSolution = field(compare=False)


def solve_micp(g: Gcs, cfg: BnbConfig | None = None,
               opts: TighteningOptions | None = None) -> BnbReport:
    """Globally optimal shortest path through the graph of sets.

    Returns an integral incumbent with a proven bound, or status
    `infeasible` when no finite-cost path exists. Node and time limits
    return the best incumbent found with the open lower bound.
    """
    cfg = cfg or BnbConfig()
    t0 = time.perf_counter()
    root = build_relaxation(g, opts)
    node_log: list[str] = []
    edge_order = {e.key: i for i, e in enumerate(g.edges)}

    def note(line: str):
        node_log.append(line)
        log.info(line)

    def evaluate(yfix: dict[EdgeKey, float]):
        sub = fix_flows(root, yfix) if yfix else root
        sol = solve(sub.prog, cfg.tolerances)
        if sol.status != "optimal":
            return None, sol.status
        return reconstruct(sub, sol), sol.status

    root_flow, root_status = evaluate({})
    if root_status in ("infeasible", "unbounded"):
        note("node 0 bound inf frac 0 action infeasible")
        return BnbReport("infeasible", None, float("inf"), float("inf"), 1,
                         time.perf_counter() - t0, node_log=node_log)
    if root_flow is None:
        raise BnbError(f"root relaxation failed: {root_status}")

    incumbent: FlowSolution | None = None
    inc_cost: float | None = None
    inc_path: list[str] | None = None

    rounded = round_incumbent(root, root_flow, cfg.tolerances)
    if rounded is not None:
        inc_cost = rounded.cost
        inc_path = rounded.path
        note(f"node 0 bound {root_flow.cost:.9g} frac 0 action incumbent")

    serial = 0
    heap: list[_Node] = [_Node(root_flow.cost, serial, {}, root_flow)]
    nodes = 1
    status = "optimal"

    def fractional(flow: FlowSolution, yfix):
        fr = []
        for key, y in flow.flows.items():
            if key in yfix:
                continue
            if min(y, 1.0 - y) > cfg.integrality_tol:
                fr.append(key)
        return fr

    while heap:
        lb = heap[0].bound
        if inc_cost is not None and _gap(inc_cost, lb) <= cfg.rel_gap_tol:
            break
        if inc_cost is not None and inc_cost - lb <= cfg.abs_gap_tol:
            break
        if cfg.node_limit is not None and nodes >= cfg.node_limit:
            status = "node-limit"
            break
        if cfg.time_limit is not None and time.perf_counter() - t0 > cfg.time_limit:
            status = "time-limit"
            break

        node = heapq.heappop(heap)
        if inc_cost is not None and node.bound >= inc_cost - cfg.abs_gap_tol:
            note(f"node {node.serial} bound {node.bound:.9g} frac 0 action prune")
            continue

        frac = fractional(node.flow, node.yfix)
        if not frac:
            # integral: the relaxation value is the exact cost of this path
            path = _path_from_flows(g, node.flow.flows)
            if path is not None and (inc_cost is None or node.flow.cost < inc_cost):
                incumbent = node.flow
                inc_cost = node.flow.cost
                inc_path = path
                note(f"node {node.serial} bound {node.bound:.9g} frac 0 action incumbent")
            else:
                note(f"node {node.serial} bound {node.bound:.9g} frac 0 action prune")
            continue

        branch = min(frac, key=lambda k: (abs(node.flow.flows[k] - 0.5), edge_order[k]))
        note(f"node {node.serial} bound {node.bound:.9g} frac {len(frac)} action branch")

        children = []
        zero_fix = dict(node.yfix)
        zero_fix[branch] = 0.0
        children.append(zero_fix)
        one_fix = dict(node.yfix)
        one_fix[branch] = 1.0
        for key in _implied_zeros(g, branch):
            if one_fix.get(key, 0.0) != 1.0:
                one_fix[key] = 0.0
        children.append(one_fix)

        if cfg.jobs > 1:
            with ThreadPoolExecutor(max_workers=cfg.jobs) as pool:
                results = list(pool.map(evaluate, children))
        else:
            results = [evaluate(c) for c in children]

        for yfix, (flow, st) in zip(children, results):
            nodes += 1
            serial += 1
            if flow is None:
                note(f"node {serial} bound inf frac 0 action prune")
                continue
            # clamp: a child can not be better than its parent
            bound = max(flow.cost, node.bound)
            if inc_cost is not None and bound >= inc_cost - cfg.abs_gap_tol:
                note(f"node {serial} bound {bound:.9g} frac 0 action prune")
                continue
            heapq.heappush(heap, _Node(bound, serial, yfix, flow))

    lb = min((n.bound for n in heap), default=inc_cost if inc_cost is not None
             else float("inf"))
    if inc_cost is not None:
        lb = min(lb, inc_cost)
    wall = time.perf_counter() - t0

    if inc_cost is None:
        if status == "optimal":
            return BnbReport("infeasible", None, lb, float("inf"), nodes, wall,
                             relaxation_cost=root_flow.cost, node_log=node_log)
        return BnbReport(status, None, lb, float("inf"), nodes, wall,
                         relaxation_cost=root_flow.cost, node_log=node_log)

    if incumbent is None and inc_path is not None:
        # incumbent came from rounding only; resolve its restricted program
        on_path = set(zip(inc_path, inc_path[1:]))
        yfix = {e.key: (1.0 if e.key in on_path else 0.0) for e in g.edges}
        sub = fix_flows(root, yfix)
        sol = solve(sub.prog, cfg.tolerances)
        if sol.status == "optimal":
            incumbent = reconstruct(sub, sol)

    if incumbent is not None:
        incumbent.path = inc_path
    return BnbReport(status, inc_cost, lb, _gap(inc_cost, lb), nodes, wall,
                     incumbent, inc_path, root_flow.cost, node_log)
