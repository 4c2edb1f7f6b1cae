import numpy as np
import pytest

from gcspath.conic import solve
from gcspath.costs import euclidean, sq_euclidean
from gcspath.formulation import (FormulationError, TighteningOptions,
                                 build_flow_lp, build_relaxation, fix_flows,
                                 reconstruct, relax_bilinear)
from gcspath.geometry import Box, Singleton
from gcspath.graph import build
from gcspath.oracle import certify


def diamond():
    """s -> {a, b} -> t with a box detour on each side."""
    vertices = {"s": Singleton([0.0, 0.0]), "t": Singleton([4.0, 0.0]),
                "a": Box([1.0, 1.0], [3.0, 2.0]),
                "b": Box([1.0, -2.0], [3.0, -0.5])}
    edges = [(u, v, euclidean(2)) for u, v in
             [("s", "a"), ("s", "b"), ("a", "t"), ("b", "t")]]
    return build(vertices, edges, "s", "t")


def test_flow_lp_picks_shortest_route():
    g = diamond()
    lp = build_flow_lp(g, {("s", "a"): 2.0, ("s", "b"): 1.0,
                           ("a", "t"): 2.0, ("b", "t"): 1.5})
    sol = solve(lp)
    assert sol.optimal
    assert sol.objective == pytest.approx(2.5, abs=1e-7)
    with pytest.raises(FormulationError):
        build_flow_lp(g, {("s", "a"): -1.0, ("s", "b"): 1.0,
                          ("a", "t"): 2.0, ("b", "t"): 1.5})


def test_relaxation_lower_bounds_every_path():
    g = diamond()
    rprog = build_relaxation(g)
    sol = solve(rprog.prog)
    assert sol.optimal
    cost, best = certify(g)
    assert sol.objective <= cost + 1e-7
    # sides are symmetric up to geometry; the b route is shorter here
    assert best.path == ["s", "b", "t"]


def test_relaxation_exact_on_singletons():
    vertices = {"s": Singleton([0.0]), "m": Singleton([2.0]),
                "t": Singleton([3.0])}
    edges = [("s", "m", euclidean(1)), ("m", "t", euclidean(1)),
             ("s", "t", euclidean(1))]
    g = build(vertices, edges, "s", "t")
    rprog = build_relaxation(g)
    sol = solve(rprog.prog)
    lp = build_flow_lp(g, {e.key: e.length.evaluate(
        g.vertices[e.u].theta, g.vertices[e.v].theta) for e in g.edges})
    assert sol.objective == pytest.approx(solve(lp).objective, abs=1e-6)
    assert sol.objective == pytest.approx(3.0, abs=1e-6)


def test_reconstruct_membership_and_flows():
    g = diamond()
    rprog = build_relaxation(g)
    flow = reconstruct(rprog, solve(rprog.prog))
    total = flow.flows[("s", "a")] + flow.flows[("s", "b")]
    assert total == pytest.approx(1.0, abs=1e-6)
    for v, x in flow.positions.items():
        through = sum(flow.flows[e.key] for e in g.out_edges(v)) \
            if v not in (g.source, g.target) else 1.0
        if v not in flow.unvisited and through > 1e-4:
            assert g.vertices[v].contains(x, tol=1e-5)
    for key, zb in flow.zbar.items():
        if flow.flows[key] > 1e-4:
            assert g.vertices[key[0]].contains(zb, tol=1e-5)


def test_unvisited_vertices_fall_back_to_center():
    g = diamond()
    rprog = build_relaxation(g)
    forced = fix_flows(rprog, {("s", "a"): 0.0, ("a", "t"): 0.0})
    flow = reconstruct(forced, solve(forced.prog))
    assert "a" in flow.unvisited
    assert np.allclose(flow.positions["a"],
                       g.vertices["a"].chebyshev_center())


def test_fix_flows_interval_and_validation():
    g = diamond()
    rprog = build_relaxation(g)
    boxed = fix_flows(rprog, {("s", "a"): (0.4, 0.6)})
    flow = reconstruct(boxed, solve(boxed.prog))
    assert 0.4 - 1e-6 <= flow.flows[("s", "a")] <= 0.6 + 1e-6
    with pytest.raises(FormulationError):
        fix_flows(rprog, {("s", "a"): (0.8, 0.2)})
    with pytest.raises(FormulationError):
        fix_flows(rprog, {("s", "a"): 1.5})
    # the original program is untouched
    assert solve(rprog.prog).objective == pytest.approx(
        certify(g)[0], abs=1e-5)


def test_fixing_one_flow_monotonically_raises_cost():
    g = diamond()
    rprog = build_relaxation(g)
    base = solve(rprog.prog).objective
    worse = solve(fix_flows(rprog, {("s", "b"): 0.0}).prog).objective
    assert worse >= base - 1e-8
    cost_a = certify(g)[0]
    assert worse >= cost_a - 1e-8


def test_hpp_three_interior_relaxation_value():
    # complete graph over three unit intervals between 0 and 1, squared
    # length: the relaxation already attains the combinatorial optimum 1/4
    vertices = {"s": Singleton([0.0]), "t": Singleton([1.0]),
                "a": Box([0.0], [1.0]), "b": Box([0.0], [1.0]),
                "c": Box([0.0], [1.0])}
    names = ["s", "a", "b", "c", "t"]
    edges = [(u, v, sq_euclidean(1)) for u in names for v in names
             if u != v and u != "t" and v != "s"]
    g = build(vertices, edges, "s", "t")
    rprog = build_relaxation(g)
    sol = solve(rprog.prog)
    assert sol.objective == pytest.approx(0.25, abs=1e-6)


def test_tightening_options_resolution():
    assert TighteningOptions().resolved(True) == (True, True)
    assert TighteningOptions().resolved(False) == (False, False)
    assert TighteningOptions(degree=True).resolved(False) == (True, False)
    g = diamond()
    assert not build_relaxation(g).tightened
    assert build_relaxation(
        g, TighteningOptions(degree=True)).tightened


def test_degree_rows_cut_double_visits():
    # cyclic two-vertex core: without degree rows the relaxation can push
    # more than one unit of flow through a vertex
    vertices = {"s": Singleton([0.0]), "t": Singleton([1.0]),
                "a": Box([0.0], [1.0]), "b": Box([0.0], [1.0])}
    edges = [(u, v, sq_euclidean(1)) for u, v in
             [("s", "a"), ("a", "b"), ("b", "a"), ("a", "t"), ("b", "t")]]
    g = build(vertices, edges, "s", "t")
    plain = solve(build_relaxation(
        g, TighteningOptions(degree=False, two_cycle=False)).prog).objective
    tight = solve(build_relaxation(g).prog).objective
    assert tight >= plain - 1e-9


def test_mccormick_coefficients_exact():
    # X = Y = [0, 1] with generators {y >= 0, 1 - y >= 0, 1 >= 0}: rows are
    # exactly the McCormick envelope of Z = x y
    blk = relax_bilinear(Box([0.0], [1.0]),
                         [(np.array([1.0]), 0.0), (np.array([-1.0]), 1.0),
                          (np.array([0.0]), 1.0)])
    rows = {(tuple(a), a0) for a, a0 in blk.ineqs}
    assert ((0.0, -1.0, 1.0), 0.0) in rows          # Z <= y
    assert ((-1.0, 0.0, 1.0), 0.0) in rows          # Z <= x
    assert ((1.0, 1.0, -1.0), -1.0) in rows         # Z >= x + y - 1
    assert ((0.0, 0.0, -1.0), 0.0) in rows          # Z >= 0
    assert not blk.eqs and not blk.socs and not blk.rsocs


def test_relax_bilinear_requires_trivial_halfspace():
    with pytest.raises(FormulationError):
        relax_bilinear(Box([0.0], [1.0]),
                       [(np.array([1.0]), 0.0), (np.array([-1.0]), 1.0)])
