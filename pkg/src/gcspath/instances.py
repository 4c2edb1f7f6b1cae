"""Canned instance families and the seeded random generator."""

from __future__ import annotations

import numpy as np

from . import costs, geometry
from .graph import Gcs, build


class InstanceError(ValueError):
    pass


def hpp_chain(m: int) -> Gcs:
    """Complete digraph over m unit-interval vertices between the fixed
    endpoints 0 and 1, with squared length; longer paths are cheaper and
    the optimum is 1/(m+1), attained by visiting every interior vertex."""
    if m < 0:
        raise InstanceError("m must be nonnegative")
    vertices: dict[str, geometry.ConvexSet] = {
        "s": geometry.Singleton([0.0]),
        "t": geometry.Singleton([1.0]),
    }
    interior = [f"v{i}" for i in range(m)]
    for name in interior:
        vertices[name] = geometry.Box([0.0], [1.0])
    order = ["s"] + interior + ["t"]
    edges = []
    for u in order:
        for v in order:
            if u != v and u != "t" and v != "s":
                edges.append((u, v, costs.sq_euclidean(1)))
    return build(vertices, edges, "s", "t")


def _random_paths(rng: np.random.Generator, interior: list[str]) -> list[list[str]]:
    """Partition the interior vertices into a random number of disjoint
    paths, sizes drawn as a uniform random composition."""
    k = len(interior)
    nparts = int(rng.integers(1, k + 1))
    # stars and bars: nparts - 1 distinct cut points in [1, k)
    cuts = sorted(rng.choice(np.arange(1, k), size=nparts - 1, replace=False)) \
        if nparts > 1 else []
    perm = list(rng.permutation(interior))
    paths = []
    prev = 0
    for c in list(cuts) + [k]:
        paths.append(perm[prev:int(c)])
        prev = int(c)
    return paths


def random_instance(seed: int, n: int, nV: int, nE: int, volume: float,
                    length: str = "euclidean") -> Gcs:
    """Seeded random instance: fixed singleton endpoints at the corners of
    the unit cube, interior axis-aligned cubes of the given volume with
    uniform centers, edges built by first threading disjoint source-target
    paths through all interior vertices and then adding uniform random
    edges up to the requested count."""
    if nV < 3:
        raise InstanceError("need at least three vertices")
    if volume <= 0:
        raise InstanceError("volume must be positive")
    if length not in ("euclidean", "sq_euclidean"):
        raise InstanceError(f"unknown length family {length!r}")
    rng = np.random.default_rng(seed)
    half = volume ** (1.0 / n) / 2.0

    vertices: dict[str, geometry.ConvexSet] = {
        "s": geometry.Singleton(np.zeros(n)),
        "t": geometry.Singleton(np.ones(n)),
    }
    interior = [f"v{i}" for i in range(nV - 2)]
    for name in interior:
        c = rng.uniform(0.0, 1.0, size=n)
        vertices[name] = geometry.Box(c - half, c + half)

    mk = costs.euclidean if length == "euclidean" else costs.sq_euclidean
    keys: set[tuple[str, str]] = set()
    for path in _random_paths(rng, interior):
        chain = ["s"] + path + ["t"]
        for u, v in zip(chain, chain[1:]):
            keys.add((u, v))
    if nE < len(keys):
        raise InstanceError(f"need at least {len(keys)} edges for this seed")

    names = list(vertices)
    while len(keys) < nE:
        u = names[int(rng.integers(len(names)))]
        v = names[int(rng.integers(len(names)))]
        if u == v or v == "s" or u == "t" or (u, v) in keys:
            continue
        keys.add((u, v))

    edges = [(u, v, mk(n)) for u, v in sorted(keys)]
    return build(vertices, edges, "s", "t")


def symmetry_instance() -> Gcs:
    """Five-vertex instance with a mirror symmetry across the horizontal
    axis; the relaxation splits flow half-and-half over the two symmetric
    routes and lands strictly below the best single path."""
    vertices = {
        "s": geometry.Singleton([0.0, 0.0]),
        "1": geometry.Singleton([1.0, 2.0]),
        "2": geometry.Singleton([1.0, -2.0]),
        "3": geometry.Box([2.0, -2.0], [3.0, 2.0]),
        "t": geometry.Singleton([4.0, 0.0]),
    }
    e = lambda u, v: (u, v, costs.euclidean(2))
    edges = [e("s", "1"), e("s", "2"), e("1", "3"), e("2", "3"), e("3", "t")]
    return build(vertices, edges, "s", "t")


def two_dim_example(sigma: float = 1.0, length: str = "sq_euclidean") -> Gcs:
    """Nine-vertex planar instance with 22 edges and multiple cycles.

    Interior sets are boxes scaled about their centers by `sigma`; at large
    scale every box covers the whole scene and the cost is governed purely
    by the number of edges a path uses.
    """
    if sigma <= 0:
        raise InstanceError("sigma must be positive")
    mk = costs.euclidean if length == "euclidean" else costs.sq_euclidean

    centers = {
        "1": (1.5, 1.0), "2": (3.0, 1.0), "3": (4.5, 1.0), "4": (6.0, 1.0),
        "5": (3.0, -1.0), "6": (4.5, -1.0), "7": (6.0, -1.0),
    }
    vertices: dict[str, geometry.ConvexSet] = {
        "s": geometry.Singleton([0.0, 0.0]),
        "t": geometry.Singleton([9.0, 0.0]),
    }
    for name, (cx, cy) in centers.items():
        box = geometry.Box([cx - 0.5, cy - 0.5], [cx + 0.5, cy + 0.5])
        vertices[name] = box.scale(sigma, box.chebyshev_center())

    # an upper four-cycle and a lower three-cycle, cross-linked so the
    # longest simple path has seven edges but no Hamiltonian path exists
    keys = [("s", "1"), ("s", "5"),
            ("1", "2"), ("2", "3"), ("3", "4"), ("4", "1"),
            ("5", "6"), ("6", "7"), ("7", "5"),
            ("4", "t"), ("5", "t"), ("6", "t"), ("7", "t"),
            ("1", "5"), ("1", "6"), ("1", "7"),
            ("2", "5"), ("2", "6"), ("2", "7"),
            ("3", "5"), ("3", "6"), ("3", "7")]
    edges = [(u, v, mk(2)) for u, v in keys]
    return build(vertices, edges, "s", "t")
