"""Dual potentials of the conic relaxation.

A certificate assigns each vertex an affine potential r_v . x + p_v with
r = 0 at the source and target. It is valid when the potential drop
along every edge is bounded by the edge length pointwise over the edge's
endpoint sets; then p_s - p_t lower-bounds the cost of every path, hence
of the whole problem.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .conic import ConicSolution
from .formulation import FlowSolution, RelaxationProgram
from .graph import Gcs


class DualError(RuntimeError):
    pass


@dataclass
class PotentialCertificate:
    p: dict[str, float]
    r: dict[str, np.ndarray]
    source: str
    target: str

    @property
    def bound(self) -> float:
        """Lower bound p_s - p_t certified on the shortest-path cost."""
        return self.p[self.source] - self.p[self.target]

    def potential(self, v: str, x: np.ndarray) -> float:
        return float(self.r[v] @ x + self.p[v])

    def to_json(self) -> str:
        return json.dumps({
            "p": {v: self.p[v] for v in sorted(self.p)},
            "r": {v: list(map(float, self.r[v])) for v in sorted(self.r)},
            "source": self.source,
            "target": self.target,
            "bound": self.bound,
        }, indent=2)


def zero_certificate(g: Gcs) -> PotentialCertificate:
    """Always dual-feasible for nonnegative lengths; certifies the bound 0."""
    return PotentialCertificate(
        {v: 0.0 for v in g.vertices},
        {v: np.zeros(g.dim(v)) for v in g.vertices},
        g.source, g.target)


def extract_potentials(rprog: RelaxationProgram,
                       sol: ConicSolution) -> PotentialCertificate:
    """Read the potentials off the equality-row duals of a solved relaxation.

    Requires an untightened program: degree and two-cycle rows carry their
    own multipliers, and the potentials alone no longer certify the bound.
    """
    if sol.status != "optimal":
        raise DualError(f"cannot extract potentials from a {sol.status} solution")
    if rprog.tightened:
        raise DualError("potential extraction requires an untightened relaxation")
    g = rprog.gcs
    prog = rprog.prog

    p: dict[str, float] = {}
    r: dict[str, np.ndarray] = {}
    p[g.source] = -float(prog.eq_dual(sol, ("st", "src"))[0])
    p[g.target] = float(prog.eq_dual(sol, ("st", "tgt"))[0])
    r[g.source] = np.zeros(g.dim(g.source))
    r[g.target] = np.zeros(g.dim(g.target))
    for v in g.vertices:
        if v in (g.source, g.target):
            continue
        p[v] = float(prog.eq_dual(sol, ("cons_y", v))[0])
        r[v] = np.array(prog.eq_dual(sol, ("cons_z", v)), float)
    return PotentialCertificate(p, r, g.source, g.target)


@dataclass
class CertificateReport:
    dual_bound: float
    primal_cost: float
    gap_tol: float
    weak_duality_ok: bool
    samples_per_edge: int
    skipped_samples: int
    max_edge_violation: float
    edge_tol: float
    max_tightness_gap: float
    tight_tol: float
    violations: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def check_certificate(cert: PotentialCertificate, g: Gcs, sol: FlowSolution,
                      samples: int = 200,
                      rng: np.random.Generator | None = None,
                      gap_tol: float = 1e-6,
                      edge_tol: float = 1e-6,
                      tight_tol: float = 1e-5,
                      flow_threshold: float = 1e-4) -> CertificateReport:
    """Validate a certificate against an instance and a primal solution.

    Three checks: (i) the certified bound does not exceed the primal cost;
    (ii) the per-edge potential-drop inequality, sampled at random endpoint
    pairs (pairs with infinite length are skipped); (iii) complementary
    tightness of the drop at the per-unit-flow surrogates of every edge
    carrying flow.
    """
    rng = rng or np.random.default_rng(0)
    violations: list[str] = []

    weak_ok = cert.bound <= sol.cost + gap_tol
    if not weak_ok:
        violations.append(
            f"bound {cert.bound:.9g} exceeds primal cost {sol.cost:.9g}")

    worst_edge = 0.0
    skipped = 0
    for e in g.edges:
        for _ in range(samples):
            xu = g.vertices[e.u].sample(rng)
            xv = g.vertices[e.v].sample(rng)
            l = e.length.evaluate(xu, xv)
            if not np.isfinite(l):
                skipped += 1
                continue
            drop = cert.potential(e.u, xu) - cert.potential(e.v, xv)
            worst_edge = max(worst_edge, drop - l)
    if worst_edge > edge_tol:
        violations.append(
            f"potential drop exceeds edge length by {worst_edge:.3g}")

    worst_tight = 0.0
    for e in g.edges:
        if e.key not in sol.zbar or sol.flows[e.key] <= flow_threshold:
            continue
        zb, zbp = sol.zbar[e.key], sol.zbar_p[e.key]
        drop = cert.potential(e.u, zb) - cert.potential(e.v, zbp)
        worst_tight = max(worst_tight, abs(e.length.finite_value(zb, zbp) - drop))
    if worst_tight > tight_tol:
        violations.append(
            f"tightness gap {worst_tight:.3g} on a flow-carrying edge")

    return CertificateReport(cert.bound, sol.cost, gap_tol, weak_ok,
                             samples, skipped, worst_edge, edge_tol,
                             worst_tight, tight_tol, violations)
