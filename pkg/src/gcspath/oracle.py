"""Independent ground truth: exhaustive path enumeration with one convex
solve per path, and extreme-point exactness checks for the bilinear
relaxation.

The per-path program is built directly from set membership and edge
epigraphs chained over shared endpoint variables; it deliberately shares
no code with the flow formulation it certifies.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .conic import Aff, ConicProgram, ToleranceConfig, solve
from .formulation import relax_bilinear
from .geometry import ConvexSet
from .graph import Gcs, PathResult, enumerate_paths


class OracleError(RuntimeError):
    pass


def solve_fixed_path(g: Gcs, path: list[str],
                     tol: ToleranceConfig | None = None) -> PathResult | None:
    """Optimal positioning along a fixed path; None when the path has
    infinite cost (infeasible edge constraints)."""
    prog = ConicProgram()
    xvar: dict[str, list[int]] = {}
    for v in path:
        xvar[v] = prog.add_vars(g.dim(v))
        exprs = [Aff.var(i) for i in xvar[v]]
        g.vertices[v].perspective().emit(prog, exprs + [Aff.constant(1.0)], ("set", v))
    for u, v in zip(path, path[1:]):
        e = g.edge(u, v)
        (it,) = prog.add_vars(1)
        prog.add_objective(Aff.var(it))
        exprs = [Aff.var(i) for i in xvar[u]] + [Aff.var(i) for i in xvar[v]]
        e.length.perspective_epigraph().emit(
            prog, exprs + [Aff.constant(1.0), Aff.var(it)], ("len", (u, v)))
    sol = solve(prog, tol)
    if sol.status != "optimal":
        return None
    positions = {v: np.array([sol.x[i] for i in xvar[v]]) for v in path}
    return PathResult(list(path), positions, float(sol.objective))


def certify(g: Gcs, max_paths: int = 10000,
            tol: ToleranceConfig | None = None) -> tuple[float, PathResult]:
    """Exact global optimum by brute force over all simple s-t paths."""
    paths, overflow = enumerate_paths(g, max_paths)
    if overflow:
        raise OracleError(f"more than {max_paths} simple paths; result would be invalid")
    best: PathResult | None = None
    for p in paths:
        res = solve_fixed_path(g, p, tol)
        if res is not None and (best is None or res.cost < best.cost):
            best = res
    if best is None:
        raise OracleError("no s-t path with finite cost")
    return best.cost, best


@dataclass
class ExactnessReport:
    trials: int
    max_violation: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.max_violation <= self.tolerance


def check_extreme_exactness(X: ConvexSet,
                            Y_halfspaces: list[tuple[np.ndarray, float]],
                            y_extreme: np.ndarray,
                            trials: int = 100,
                            rng: np.random.Generator | None = None,
                            tolerance: float = 1e-6) -> ExactnessReport:
    """Probe the bilinear relaxation at a fixed y.

    For `trials` random linear objectives over (x, Z), solves the relaxation
    with y pinned to y_extreme and reports the worst ||Z - x y^T||_inf, with
    x reconstructed as sum_j (Z c_j + d_j x) / sum_j (c_j . y + d_j). At an
    extreme point of Y the violation must vanish.
    """
    rng = rng or np.random.default_rng(0)
    y = np.asarray(y_extreme, float)
    n = X.dim
    m = y.size
    hs = [(np.atleast_1d(np.asarray(c, float)), float(d)) for c, d in Y_halfspaces]
    block = relax_bilinear(X, Y_halfspaces)

    worst = 0.0
    for _ in range(trials):
        prog = ConicProgram()
        ix = prog.add_vars(n)
        iy = prog.add_vars(m)
        iZ = prog.add_vars(n * m)
        for k in range(m):
            prog.add_eq(Aff.var(iy[k]), y[k], ("pin", k))
        block.emit(prog, [Aff.var(i) for i in ix + iy + iZ], "bilinear")
        for i in ix + iZ:
            prog.add_objective(Aff.var(i, float(rng.standard_normal())))
        sol = solve(prog)
        if sol.status != "optimal":
            raise OracleError(f"feasibility probe failed: {sol.status}")
        xv = sol.x[ix[0]:ix[0] + n]
        Z = sol.x[iZ[0]:iZ[0] + n * m].reshape(n, m)
        num = np.zeros(n)
        den = 0.0
        for c, d in hs:
            num += Z @ c + d * xv
            den += c @ y + d
        x_rec = num / den if den > 1e-12 else X.chebyshev_center()
        worst = max(worst, float(np.max(np.abs(Z - np.outer(x_rec, y)))))
    return ExactnessReport(trials, worst, tolerance)
