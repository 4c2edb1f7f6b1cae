"""Optimal-control front ends: minimum-time regulation and fixed-horizon
piecewise-affine control, both compiled to shortest-path instances.

State and control are stacked into one vector per graph vertex, so a
vertex position reads (s, a); dynamics live on the edges as affine
equality constraints between consecutive stacked vectors.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import costs, geometry
from .graph import Gcs, PathResult, build


class ControlError(ValueError):
    pass


@dataclass(frozen=True)
class LinearSystem:
    """s+ = A s + B a with state constrained to S and control to A_set."""

    A: np.ndarray
    B: np.ndarray
    S: geometry.ConvexSet
    A_set: geometry.ConvexSet
    s0: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "A", np.atleast_2d(np.asarray(self.A, float)))
        object.__setattr__(self, "B", np.atleast_2d(np.asarray(self.B, float)))
        object.__setattr__(self, "s0", np.atleast_1d(np.asarray(self.s0, float)))
        q = self.A.shape[0]
        if self.A.shape != (q, q):
            raise ControlError("A must be square")
        if self.B.shape[0] != q:
            raise ControlError("B row count must match the state dimension")
        if self.S.dim != q or self.s0.shape != (q,):
            raise ControlError("state set and initial state must have the A dimension")
        if self.A_set.dim != self.B.shape[1]:
            raise ControlError("control set dimension must match B columns")
        if not self.S.contains(self.s0, tol=1e-9):
            raise ControlError("initial state lies outside the state set")

    @property
    def q(self) -> int:
        return self.A.shape[0]

    @property
    def r(self) -> int:
        return self.B.shape[1]


@dataclass(frozen=True)
class PwaMode:
    S: geometry.ConvexSet
    A: np.ndarray
    B: np.ndarray
    c: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "A", np.atleast_2d(np.asarray(self.A, float)))
        object.__setattr__(self, "B", np.atleast_2d(np.asarray(self.B, float)))
        object.__setattr__(self, "c", np.atleast_1d(np.asarray(self.c, float)))


@dataclass(frozen=True)
class PwaSystem:
    """Mode-switched affine dynamics s+ = A_i s + B_i a + c_i, active when
    s is in the mode's region; fixed horizon with a convex quadratic stage
    cost ||C [s; a] + d||^2 + c0 and a terminal set."""

    modes: tuple[PwaMode, ...]
    A_set: geometry.ConvexSet
    stage_C: np.ndarray
    stage_d: np.ndarray
    stage_c0: float
    T: int
    s0: np.ndarray
    terminal: geometry.ConvexSet | None = None
    terminal_C: np.ndarray | None = None
    terminal_d: np.ndarray | None = None

    def __post_init__(self):
        object.__setattr__(self, "modes", tuple(self.modes))
        object.__setattr__(self, "stage_C", np.atleast_2d(np.asarray(self.stage_C, float)))
        object.__setattr__(self, "stage_d", np.atleast_1d(np.asarray(self.stage_d, float)))
        object.__setattr__(self, "s0", np.atleast_1d(np.asarray(self.s0, float)))
        if not self.modes:
            raise ControlError("need at least one mode")
        q, r = self.q, self.r
        term = self.terminal if self.terminal is not None \
            else geometry.Singleton(np.zeros(q))
        object.__setattr__(self, "terminal", term)
        for m in self.modes:
            if m.A.shape != (q, q) or m.B.shape != (q, r) or m.c.shape != (q,) \
                    or m.S.dim != q:
                raise ControlError("inconsistent mode dimensions")
        if self.T < 1:
            raise ControlError("horizon must be at least 1")
        if self.stage_C.shape[1] != q + r:
            raise ControlError("stage cost matrix must have q + r columns")
        if term.dim != q:
            raise ControlError("terminal set must have the state dimension")
        if not any(m.S.contains(self.s0, tol=1e-9) for m in self.modes):
            raise ControlError("initial state lies in no mode region")

    @property
    def q(self) -> int:
        return self.modes[0].A.shape[0]

    @property
    def r(self) -> int:
        return self.A_set.dim


def _dynamics_constraint(A, B, c, n_v_state: int, r_v: int) -> costs.AffineEdgeConstraint:
    """A s_u + B a_u + c = s_v over stacked (s, a) endpoint vectors."""
    q = A.shape[0]
    E = np.hstack([A, B])
    F = np.hstack([-np.eye(q, n_v_state), np.zeros((q, r_v))]) if r_v \
        else -np.eye(q, n_v_state)
    return costs.AffineEdgeConstraint(E, F, -c, "eq")


def build_min_time_gcs(sys: LinearSystem, T_max: int) -> Gcs:
    """Chain of T_max + 1 stacked state-control vertices plus a target at
    the origin; every edge costs 1 and carries the dynamics, so the path
    cost is the number of steps to reach the origin."""
    if T_max < 1:
        raise ControlError("T_max must be at least 1")
    q, r = sys.q, sys.r
    zero_c = np.zeros(q)
    vertices: dict[str, geometry.ConvexSet] = {
        "v0": geometry.Product((geometry.Singleton(sys.s0), sys.A_set)),
        "t": geometry.Singleton(np.zeros(q + r)),
    }
    for k in range(1, T_max):
        vertices[f"v{k}"] = geometry.Product((sys.S, sys.A_set))

    def step_cost():
        return costs.ConstantWithConstraint(
            1.0, q + r, q + r, _dynamics_constraint(sys.A, sys.B, zero_c, q, r))

    edges = []
    for k in range(T_max):
        if k < T_max - 1:
            edges.append((f"v{k}", f"v{k + 1}", step_cost()))
        edges.append((f"v{k}", "t", step_cost()))
    return build(vertices, edges, "v0", "t")


def build_pwa_gcs(sys: PwaSystem) -> Gcs:
    """Layered graph: one vertex per (mode, stage), free mode switching
    between consecutive stages, stage costs on the dynamics edges."""
    q, r = sys.q, sys.r
    nI = len(sys.modes)
    vertices: dict[str, geometry.ConvexSet] = {
        "s": geometry.Singleton(sys.s0),
        "t": sys.terminal,
    }
    for tau in range(1, sys.T + 1):
        for i in range(nI):
            vertices[f"m{i}_t{tau}"] = geometry.Product(
                (sys.modes[i].S, sys.A_set))

    stage_C_u = np.hstack([sys.stage_C, np.zeros((sys.stage_C.shape[0], q + r))])
    stage_C_final = np.hstack([sys.stage_C, np.zeros((sys.stage_C.shape[0], q))])
    d_final = sys.stage_d
    if sys.terminal_C is not None:
        TC = np.atleast_2d(np.asarray(sys.terminal_C, float))
        Td = np.atleast_1d(np.asarray(sys.terminal_d, float))
        stage_C_final = np.vstack([
            stage_C_final,
            np.hstack([np.zeros((TC.shape[0], q + r)), TC])])
        d_final = np.concatenate([sys.stage_d, Td])

    edges = []
    # source edges: zero length, state handoff s_s = s_v
    handoff = costs.AffineEdgeConstraint(
        np.eye(q), np.hstack([-np.eye(q), np.zeros((q, r))]), np.zeros(q), "eq")
    for i in range(nI):
        edges.append(("s", f"m{i}_t1",
                      costs.ConstantWithConstraint(0.0, q, q + r, handoff)))
    for tau in range(1, sys.T):
        for i in range(nI):
            m = sys.modes[i]
            con = _dynamics_constraint(m.A, m.B, m.c, q, r)
            for j in range(nI):
                edges.append((f"m{i}_t{tau}", f"m{j}_t{tau + 1}",
                              costs.QuadraticWithConstraint(
                                  stage_C_u, sys.stage_d, sys.stage_c0,
                                  q + r, q + r, con)))
    for i in range(nI):
        m = sys.modes[i]
        con = _dynamics_constraint(m.A, m.B, m.c, q, 0)
        edges.append((f"m{i}_t{sys.T}", "t",
                      costs.QuadraticWithConstraint(
                          stage_C_final, d_final, sys.stage_c0, q + r, q, con)))
    return build(vertices, edges, "s", "t")


@dataclass
class Trajectory:
    states: list[np.ndarray]
    controls: list[np.ndarray]
    cost: float
    modes: list[int] | None = None

    @property
    def horizon(self) -> int:
        return len(self.controls)

    def to_csv(self) -> str:
        lines = ["tau," + ",".join(f"s{i}" for i in range(self.states[0].size))
                 + "," + ",".join(f"a{i}" for i in range(self.controls[0].size
                                                         if self.controls else 0))]
        for tau, s in enumerate(self.states):
            a = self.controls[tau] if tau < len(self.controls) \
                else np.full(self.controls[0].size if self.controls else 0, np.nan)
            lines.append(f"{tau}," + ",".join(f"{v:.12g}" for v in s)
                         + "," + ",".join(f"{v:.12g}" for v in a))
        return "\n".join(lines) + "\n"


def min_time_trajectory(sys: LinearSystem, res: PathResult) -> Trajectory:
    """States and controls along a solved minimum-time path; the horizon
    equals the path's edge count."""
    q = sys.q
    states, controls = [], []
    for v in res.path[:-1]:
        x = res.positions[v]
        states.append(x[:q])
        controls.append(x[q:])
    states.append(res.positions[res.path[-1]][:q])
    return Trajectory(states, controls, res.cost)


def pwa_trajectory(sys: PwaSystem, res: PathResult) -> Trajectory:
    q = sys.q
    states, controls, modes = [], [], []
    for v in res.path[1:-1]:
        x = res.positions[v]
        states.append(x[:q])
        controls.append(x[q:])
        modes.append(int(v.split("_")[0][1:]))
    states.append(res.positions[res.path[-1]][:q])
    return Trajectory(states, controls, res.cost, modes)


def dynamics_residual(traj: Trajectory, sys: LinearSystem | PwaSystem) -> float:
    """Worst one-step dynamics violation along the trajectory."""
    worst = 0.0
    for tau in range(traj.horizon):
        s, a = traj.states[tau], traj.controls[tau]
        if isinstance(sys, LinearSystem):
            pred = sys.A @ s + sys.B @ a
        else:
            m = sys.modes[traj.modes[tau]]
            pred = m.A @ s + m.B @ a + m.c
        worst = max(worst, float(np.max(np.abs(traj.states[tau + 1] - pred))))
    return worst
