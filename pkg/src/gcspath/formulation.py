"""Flow formulations: classical network-flow LP, the perspective-based
conic relaxation of the mixed-integer program, the generic set-based
bilinear relaxation, and solution reconstruction."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .conic import Aff, ConicBlock, ConicProgram, ConicSolution, aff_sum
from .geometry import ConvexSet
from .graph import Gcs

ZERO_FLOW = 1e-7  # below this a flow is treated as zero during reconstruction

EdgeKey = tuple[str, str]


class FormulationError(ValueError):
    pass


@dataclass(frozen=True)
class TighteningOptions:
    """None means automatic: on for cyclic graphs, off for acyclic."""

    degree: bool | None = None
    two_cycle: bool | None = None

    def resolved(self, cyclic: bool) -> tuple[bool, bool]:
        deg = cyclic if self.degree is None else self.degree
        cyc = cyclic if self.two_cycle is None else self.two_cycle
        return deg, cyc


@dataclass(frozen=True)
class EdgeVars:
    y: int
    z: tuple[int, ...]
    zp: tuple[int, ...]
    t: int


@dataclass(frozen=True)
class VariableLayout:
    per_edge: dict[EdgeKey, EdgeVars]


@dataclass
class RelaxationProgram:
    prog: ConicProgram
    layout: VariableLayout
    gcs: Gcs
    tightened: bool

    def copy(self) -> "RelaxationProgram":
        return RelaxationProgram(self.prog.copy(), self.layout, self.gcs, self.tightened)


@dataclass
class FlowSolution:
    flows: dict[EdgeKey, float]
    z: dict[EdgeKey, np.ndarray]
    zp: dict[EdgeKey, np.ndarray]
    positions: dict[str, np.ndarray]
    unvisited: set[str]
    cost: float
    zbar: dict[EdgeKey, np.ndarray] = field(default_factory=dict)
    zbar_p: dict[EdgeKey, np.ndarray] = field(default_factory=dict)
    path: list[str] | None = None
    conic: ConicSolution | None = None


def build_flow_lp(g: Gcs, lengths: dict[EdgeKey, float]) -> ConicProgram:
    """Classical network-flow LP with scalar nonnegative edge lengths."""
    prog = ConicProgram()
    y: dict[EdgeKey, int] = {}
    for e in g.edges:
        l = lengths[e.key]
        if l < 0:
            raise FormulationError(f"negative length on edge {e.key}")
        (iy,) = prog.add_vars(1)
        y[e.key] = iy
        prog.add_objective(Aff.var(iy, l))
        prog.add_ineq(Aff.var(iy, -1.0), 0.0, ("nonneg", e.key))
    prog.add_eq(aff_sum(Aff.var(y[e.key]) for e in g.out_edges(g.source)),
                1.0, ("st", "src"))
    prog.add_eq(aff_sum(Aff.var(y[e.key]) for e in g.in_edges(g.target)),
                1.0, ("st", "tgt"))
    for v in g.vertices:
        if v in (g.source, g.target):
            continue
        expr = aff_sum(Aff.var(y[e.key]) for e in g.in_edges(v)) \
            - aff_sum(Aff.var(y[e.key]) for e in g.out_edges(v))
        prog.add_eq(expr, 0.0, ("cons_y", v))
    return prog


def build_relaxation(g: Gcs, opts: TighteningOptions | None = None) -> RelaxationProgram:
    """Conic relaxation of the mixed-integer formulation.

    Per edge e = (u, v) the program has variables (y_e, z_e, z'_e, t_e) and
    rows for: unit source/target flow, joint (z, y) conservation, perspective
    membership of (z_e, y_e) and (z'_e, y_e), and the perspective epigraph
    t_e >= length. Degree and two-cycle rows are added per the tightening
    options (by default only on cyclic graphs).
    """
    opts = opts or TighteningOptions()
    degree_on, two_cycle_on = opts.resolved(not g.is_acyclic)

    prog = ConicProgram()
    per_edge: dict[EdgeKey, EdgeVars] = {}
    for e in g.edges:
        n_u, n_v = g.dim(e.u), g.dim(e.v)
        (iy,) = prog.add_vars(1)
        iz = tuple(prog.add_vars(n_u))
        izp = tuple(prog.add_vars(n_v))
        (it,) = prog.add_vars(1)
        per_edge[e.key] = EdgeVars(iy, iz, izp, it)
        prog.add_objective(Aff.var(it))

    ev = per_edge
    prog.add_eq(aff_sum(Aff.var(ev[e.key].y) for e in g.out_edges(g.source)),
                1.0, ("st", "src"))
    prog.add_eq(aff_sum(Aff.var(ev[e.key].y) for e in g.in_edges(g.target)),
                1.0, ("st", "tgt"))

    for v in g.vertices:
        if v in (g.source, g.target):
            continue
        ins, outs = g.in_edges(v), g.out_edges(v)
        prog.add_eq(
            aff_sum(Aff.var(ev[e.key].y) for e in ins)
            - aff_sum(Aff.var(ev[e.key].y) for e in outs),
            0.0, ("cons_y", v))
        for i in range(g.dim(v)):
            prog.add_eq(
                aff_sum(Aff.var(ev[e.key].zp[i]) for e in ins)
                - aff_sum(Aff.var(ev[e.key].z[i]) for e in outs),
                0.0, ("cons_z", v))

    for e in g.edges:
        vars_e = ev[e.key]
        y_expr = Aff.var(vars_e.y)
        z_exprs = [Aff.var(i) for i in vars_e.z]
        zp_exprs = [Aff.var(i) for i in vars_e.zp]
        g.vertices[e.u].perspective().emit(prog, z_exprs + [y_expr],
                                           ("memb", e.key, "u"))
        g.vertices[e.v].perspective().emit(prog, zp_exprs + [y_expr],
                                           ("memb", e.key, "v"))
        e.length.perspective_epigraph().emit(
            prog, z_exprs + zp_exprs + [y_expr, Aff.var(vars_e.t)], ("epi", e.key))

    if degree_on:
        for v in g.vertices:
            if v in (g.source, g.target):
                continue
            outs = g.out_edges(v)
            if outs:
                prog.add_ineq(aff_sum(Aff.var(ev[e.key].y) for e in outs),
                              1.0, ("deg", v))

    if two_cycle_on:
        keys = {e.key for e in g.edges}
        for v in g.vertices:
            if v in (g.source, g.target):
                continue
            outs = g.out_edges(v)
            for e in g.in_edges(v):
                u = e.u
                if (v, u) not in keys:
                    continue
                f = g.edge(v, u)
                lam = aff_sum(Aff.var(ev[x.key].y) for x in outs) \
                    - Aff.var(ev[e.key].y) - Aff.var(ev[f.key].y)
                x_exprs = []
                for i in range(g.dim(v)):
                    x_exprs.append(
                        aff_sum(Aff.var(ev[x.key].z[i]) for x in outs)
                        - Aff.var(ev[e.key].zp[i]) - Aff.var(ev[f.key].z[i]))
                g.vertices[v].perspective().emit(
                    prog, x_exprs + [lam], ("cyc", v, e.key, f.key))

    return RelaxationProgram(prog, VariableLayout(per_edge), g,
                             degree_on or two_cycle_on)


def fix_flows(rprog: RelaxationProgram, yfix: dict[EdgeKey, object]) -> RelaxationProgram:
    """Copy with bound rows y_e in [lo, hi] appended; values may be 0, 1, or
    an (lo, hi) interval within [0, 1]."""
    out = rprog.copy()
    for key, bound in yfix.items():
        lo, hi = (bound, bound) if np.isscalar(bound) else bound
        if lo > hi or lo < 0 or hi > 1:
            raise FormulationError(f"invalid flow bound {bound} on edge {key}")
        iy = rprog.layout.per_edge[key].y
        out.prog.add_ineq(Aff.var(iy, -1.0), -lo, ("fix", key))
        out.prog.add_ineq(Aff.var(iy), hi, ("fix", key))
    return out


def reconstruct(rprog: RelaxationProgram, sol: ConicSolution) -> FlowSolution:
    """Vertex positions and per-edge surrogates from a raw solution.

    Source/target come from summed z variables; interior vertices from the
    flow-weighted mean of outgoing z, falling back to the Chebyshev center
    (flagged unvisited) when the throughflow is below the zero threshold.
    """
    g = rprog.gcs
    x = sol.x
    flows: dict[EdgeKey, float] = {}
    z: dict[EdgeKey, np.ndarray] = {}
    zp: dict[EdgeKey, np.ndarray] = {}
    zbar: dict[EdgeKey, np.ndarray] = {}
    zbar_p: dict[EdgeKey, np.ndarray] = {}
    for key, vars_e in rprog.layout.per_edge.items():
        flows[key] = float(x[vars_e.y])
        z[key] = np.array([x[i] for i in vars_e.z])
        zp[key] = np.array([x[i] for i in vars_e.zp])
        if flows[key] > ZERO_FLOW:
            zbar[key] = z[key] / flows[key]
            zbar_p[key] = zp[key] / flows[key]

    positions: dict[str, np.ndarray] = {}
    unvisited: set[str] = set()
    for v in g.vertices:
        if v == g.source:
            edges = g.out_edges(v)
            positions[v] = (sum(z[e.key] for e in edges)
                            if edges else g.vertices[v].chebyshev_center())
        elif v == g.target:
            edges = g.in_edges(v)
            positions[v] = (sum(zp[e.key] for e in edges)
                            if edges else g.vertices[v].chebyshev_center())
        else:
            outs = g.out_edges(v)
            through = sum(flows[e.key] for e in outs)
            if through > ZERO_FLOW:
                positions[v] = sum(z[e.key] for e in outs) / through
            else:
                positions[v] = g.vertices[v].chebyshev_center()
                unvisited.add(v)

    return FlowSolution(flows, z, zp, positions, unvisited,
                        float(sol.objective), zbar, zbar_p, conic=sol)


def relax_bilinear(X: ConvexSet,
                   Y_halfspaces: list[tuple[np.ndarray, float]]) -> ConicBlock:
    """Set-based relaxation of {(x, y, Z): x in X, y in Y, Z = x y^T}.

    Y is the polyhedron {y: c_j . y + d_j >= 0}; the trivial inequality
    (0, 1) must be among the generators. Columns of the returned block are
    ordered (x, y, vec(Z) row-major).
    """
    n = X.dim
    hs = [(np.atleast_1d(np.asarray(c, float)), float(d)) for c, d in Y_halfspaces]
    m = hs[0][0].size
    if not any(np.allclose(c, 0) and abs(d - 1.0) <= 1e-12 for c, d in hs):
        raise FormulationError("halfspace list must include the trivial inequality (0, 1)")

    ncols = n + m + n * m
    out = ConicBlock(ncols)
    pers = X.perspective()
    for c, d in hs:
        # bind (w, lam) = (Z c + d x, c . y + d)
        M = np.zeros((n + 1, ncols))
        m0 = np.zeros(n + 1)
        for i in range(n):
            M[i, i] = d
            for k in range(m):
                M[i, n + m + i * m + k] = c[k]
        M[n, n:n + m] = c
        m0[n] = d
        sub = pers.substitute(M, m0)
        out.eqs.extend(sub.eqs)
        out.ineqs.extend(sub.ineqs)
        out.socs.extend(sub.socs)
        out.rsocs.extend(sub.rsocs)
    return out
