"""GCS data model: directed graph pairing vertices with convex sets and
edges with length functions, plus source/target preprocessing."""

from __future__ import annotations

import graphlib
from dataclasses import dataclass, field

import numpy as np

from .costs import EdgeLength
from .geometry import ConvexSet


class GcsError(ValueError):
    pass


@dataclass(frozen=True)
class Edge:
    u: str
    v: str
    length: EdgeLength

    @property
    def key(self) -> tuple[str, str]:
        return (self.u, self.v)


@dataclass(frozen=True)
class Gcs:
    vertices: dict[str, ConvexSet]
    edges: tuple[Edge, ...]
    source: str
    target: str
    is_acyclic: bool
    warnings: tuple[str, ...] = ()

    def dim(self, v: str) -> int:
        return self.vertices[v].dim

    def edge(self, u: str, v: str) -> Edge:
        for e in self.edges:
            if e.u == u and e.v == v:
                return e
        raise KeyError((u, v))

    def in_edges(self, v: str) -> list[Edge]:
        return [e for e in self.edges if e.v == v]

    def out_edges(self, v: str) -> list[Edge]:
        return [e for e in self.edges if e.u == v]


@dataclass
class PathResult:
    path: list[str]
    positions: dict[str, np.ndarray]
    cost: float


def build(vertices: dict[str, ConvexSet], edges, source: str, target: str) -> Gcs:
    """Validate and preprocess a GCS.

    Edges entering the source or leaving the target are removed with a
    recorded warning; acyclicity is computed on the remaining edges.
    """
    if source not in vertices:
        raise GcsError(f"missing source vertex {source!r}")
    if target not in vertices:
        raise GcsError(f"missing target vertex {target!r}")
    if source == target:
        raise GcsError("source and target must differ")

    norm_edges: list[Edge] = []
    for e in edges:
        if not isinstance(e, Edge):
            e = Edge(*e)
        norm_edges.append(e)

    seen: set[tuple[str, str]] = set()
    kept: list[Edge] = []
    warnings: list[str] = []
    for e in norm_edges:
        if e.u not in vertices or e.v not in vertices:
            raise GcsError(f"edge ({e.u}, {e.v}) has a dangling endpoint")
        if e.u == e.v:
            raise GcsError(f"self-loop on vertex {e.u!r}")
        if e.key in seen:
            raise GcsError(f"duplicate edge ({e.u}, {e.v})")
        seen.add(e.key)
        n_u, n_v = vertices[e.u].dim, vertices[e.v].dim
        if (e.length.n_u, e.length.n_v) != (n_u, n_v):
            raise GcsError(
                f"edge ({e.u}, {e.v}) length is dimensioned "
                f"({e.length.n_u}, {e.length.n_v}), endpoints are ({n_u}, {n_v})"
            )
        if e.v == source or e.u == target:
            warnings.append(f"removed edge ({e.u}, {e.v}) into source or out of target")
            continue
        kept.append(e)

    sorter = graphlib.TopologicalSorter({v: set() for v in vertices})
    for e in kept:
        sorter.add(e.v, e.u)
    try:
        sorter.prepare()
        acyclic = True
    except graphlib.CycleError:
        acyclic = False

    return Gcs(dict(vertices), tuple(kept), source, target, acyclic, tuple(warnings))


def enumerate_paths(g: Gcs, max_paths: int) -> tuple[list[list[str]], bool]:
    """All simple source-target paths by DFS; overflow flag set when truncated."""
    out_adj: dict[str, list[str]] = {v: [] for v in g.vertices}
    for e in g.edges:
        out_adj[e.u].append(e.v)

    paths: list[list[str]] = []
    overflow = False
    stack = [g.source]
    on_path = {g.source}

    def dfs(v: str) -> bool:
        nonlocal overflow
        if v == g.target:
            if len(paths) >= max_paths:
                overflow = True
                return False
            paths.append(list(stack))
            return True
        for w in out_adj[v]:
            if w in on_path:
                continue
            stack.append(w)
            on_path.add(w)
            ok = dfs(w)
            stack.pop()
            on_path.remove(w)
            if not ok:
                return False
        return True

    dfs(g.source)
    return paths, overflow
