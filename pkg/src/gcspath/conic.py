"""Conic program container and interior-point backend.

Programs are linear objectives over variables constrained by zero
(equality), nonnegative, second-order, and rotated-second-order cones.
The reference backend binds the Clarabel interior-point solver; rotated
cones are lowered to plain second-order cones inside the backend.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse

import clarabel


class Aff:
    """Sparse affine expression sum_i coeffs[i] * x_i + const."""

    __slots__ = ("coeffs", "const")

    def __init__(self, coeffs: dict[int, float] | None = None, const: float = 0.0):
        self.coeffs = coeffs or {}
        self.const = const

    @staticmethod
    def var(i: int, scale: float = 1.0) -> "Aff":
        return Aff({i: scale})

    @staticmethod
    def constant(c: float) -> "Aff":
        return Aff({}, c)

    def __add__(self, other):
        if not isinstance(other, Aff):
            return Aff(dict(self.coeffs), self.const + other)
        out = dict(self.coeffs)
        for i, c in other.coeffs.items():
            out[i] = out.get(i, 0.0) + c
        return Aff(out, self.const + other.const)

    __radd__ = __add__

    def __neg__(self):
        return Aff({i: -c for i, c in self.coeffs.items()}, -self.const)

    def __sub__(self, other):
        if not isinstance(other, Aff):
            return Aff(dict(self.coeffs), self.const - other)
        return self + (-other)

    def __mul__(self, a: float):
        return Aff({i: c * a for i, c in self.coeffs.items()}, self.const * a)

    __rmul__ = __mul__

    def value(self, x: np.ndarray) -> float:
        return self.const + sum(c * x[i] for i, c in self.coeffs.items())


def aff_sum(terms) -> Aff:
    out = Aff()
    for t in terms:
        out = out + t
    return out


@dataclass
class ConicBlock:
    """Conic constraints over a fixed-length tuple of scalar columns.

    Row families, with w the column vector:
      eqs:    a . w + a0  = 0
      ineqs:  a . w + a0 <= 0
      socs:   ||F w + g|| <= c . w + d
      rsocs:  ||F w + g||^2 <= (p . w + p0)(q . w + q0), both factors >= 0
    """

    ncols: int
    eqs: list[tuple[np.ndarray, float]] = field(default_factory=list)
    ineqs: list[tuple[np.ndarray, float]] = field(default_factory=list)
    socs: list[tuple[np.ndarray, np.ndarray, np.ndarray, float]] = field(default_factory=list)
    rsocs: list[tuple[np.ndarray, np.ndarray, np.ndarray, float, np.ndarray, float]] = field(
        default_factory=list
    )

    def add_eq(self, a, a0=0.0):
        self.eqs.append((np.asarray(a, float), float(a0)))

    def add_ineq(self, a, a0=0.0):
        self.ineqs.append((np.asarray(a, float), float(a0)))

    def add_soc(self, F, g, c, d):
        self.socs.append(
            (np.atleast_2d(np.asarray(F, float)), np.atleast_1d(np.asarray(g, float)),
             np.asarray(c, float), float(d))
        )

    def add_rsoc(self, F, g, p, p0, q, q0):
        self.rsocs.append(
            (np.atleast_2d(np.asarray(F, float)), np.atleast_1d(np.asarray(g, float)),
             np.asarray(p, float), float(p0), np.asarray(q, float), float(q0))
        )

    def violation(self, w) -> float:
        """Largest constraint violation at the point w (0 if feasible)."""
        w = np.asarray(w, float)
        worst = 0.0
        for a, a0 in self.eqs:
            worst = max(worst, abs(a @ w + a0))
        for a, a0 in self.ineqs:
            worst = max(worst, a @ w + a0)
        for F, g, c, d in self.socs:
            worst = max(worst, np.linalg.norm(F @ w + g) - (c @ w + d))
        for F, g, p, p0, q, q0 in self.rsocs:
            pv, qv = p @ w + p0, q @ w + q0
            worst = max(worst, -pv, -qv)
            worst = max(worst, np.linalg.norm(F @ w + g) ** 2 - pv * qv)
        return worst

    def feasible(self, w, tol: float = 0.0) -> bool:
        return self.violation(w) <= tol

    def concat(self, other: "ConicBlock", shared_last: int = 0) -> "ConicBlock":
        """Stack two blocks; the trailing `shared_last` columns are shared."""
        n_own = self.ncols - shared_last
        out = ConicBlock(n_own + other.ncols)

        def lift_self(a):
            v = np.zeros(out.ncols)
            v[:n_own] = a[:n_own]
            if shared_last:
                v[-shared_last:] += a[n_own:]
            return v

        def lift_other(a):
            v = np.zeros(out.ncols)
            v[n_own:] = a
            return v

        for lift, src in ((lift_self, self), (lift_other, other)):
            for a, a0 in src.eqs:
                out.eqs.append((lift(a), a0))
            for a, a0 in src.ineqs:
                out.ineqs.append((lift(a), a0))
            for F, g, c, d in src.socs:
                out.socs.append((np.vstack([lift(r) for r in F]), g, lift(c), d))
            for F, g, p, p0, q, q0 in src.rsocs:
                out.rsocs.append((np.vstack([lift(r) for r in F]), g, lift(p), p0, lift(q), q0))
        return out

    def substitute(self, M: np.ndarray, m0: np.ndarray) -> "ConicBlock":
        """Block over new columns W with this block's columns bound to M W + m0."""
        M = np.asarray(M, float)
        m0 = np.asarray(m0, float)
        assert M.shape[0] == self.ncols and m0.shape == (self.ncols,)
        out = ConicBlock(M.shape[1])
        for a, a0 in self.eqs:
            out.eqs.append((M.T @ a, float(a @ m0 + a0)))
        for a, a0 in self.ineqs:
            out.ineqs.append((M.T @ a, float(a @ m0 + a0)))
        for F, g, c, d in self.socs:
            out.socs.append((F @ M, F @ m0 + g, M.T @ c, float(c @ m0 + d)))
        for F, g, p, p0, q, q0 in self.rsocs:
            out.rsocs.append((F @ M, F @ m0 + g, M.T @ p, float(p @ m0 + p0),
                              M.T @ q, float(q @ m0 + q0)))
        return out

    def emit(self, prog: "ConicProgram", exprs: list[Aff], tag) -> None:
        """Instantiate the block rows in `prog` with column j bound to exprs[j]."""
        assert len(exprs) == self.ncols

        def subst(a, a0) -> Aff:
            out = Aff({}, a0)
            for j, c in enumerate(a):
                if c != 0.0:
                    out = out + exprs[j] * c
            return out

        for a, a0 in self.eqs:
            prog.add_eq(subst(a, a0), 0.0, tag)
        for a, a0 in self.ineqs:
            prog.add_ineq(subst(a, a0), 0.0, tag)
        for F, g, c, d in self.socs:
            prog.add_soc(subst(c, d), [subst(row, gi) for row, gi in zip(F, g)], tag)
        for F, g, p, p0, q, q0 in self.rsocs:
            prog.add_rsoc(subst(p, p0), subst(q, q0),
                          [subst(row, gi) for row, gi in zip(F, g)], tag)


@dataclass
class ToleranceConfig:
    feas_tol: float = 1e-8
    gap_tol: float = 1e-8
    max_iters: int = 200


@dataclass
class ConicSolution:
    status: str  # optimal | infeasible | unbounded | numerical-failure
    x: np.ndarray | None
    objective: float | None
    eq_duals: np.ndarray | None
    ineq_duals: np.ndarray | None
    iterations: int
    solve_time: float

    @property
    def optimal(self) -> bool:
        return self.status == "optimal"


class ConicProgram:
    """Minimize a linear objective subject to tagged conic rows."""

    def __init__(self):
        self.num_vars = 0
        self.obj: dict[int, float] = {}
        # each entry: (Aff or structure, tag)
        self.eqs: list[tuple[Aff, float, object]] = []
        self.ineqs: list[tuple[Aff, float, object]] = []
        self.socs: list[tuple[Aff, list[Aff], object]] = []
        self.rsocs: list[tuple[Aff, Aff, list[Aff], object]] = []

    def add_vars(self, k: int) -> list[int]:
        idx = list(range(self.num_vars, self.num_vars + k))
        self.num_vars += k
        return idx

    def add_objective(self, expr: Aff) -> None:
        for i, c in expr.coeffs.items():
            self.obj[i] = self.obj.get(i, 0.0) + c

    def add_eq(self, expr: Aff, rhs: float = 0.0, tag=None) -> None:
        """expr = rhs"""
        self.eqs.append((expr, rhs, tag))

    def add_ineq(self, expr: Aff, ub: float = 0.0, tag=None) -> None:
        """expr <= ub"""
        self.ineqs.append((expr, ub, tag))

    def add_soc(self, t: Aff, u: list[Aff], tag=None) -> None:
        """||u|| <= t"""
        self.socs.append((t, list(u), tag))

    def add_rsoc(self, p: Aff, q: Aff, u: list[Aff], tag=None) -> None:
        """||u||^2 <= p*q with p, q >= 0"""
        self.rsocs.append((p, q, list(u), tag))

    def copy(self) -> "ConicProgram":
        out = ConicProgram()
        out.num_vars = self.num_vars
        out.obj = dict(self.obj)
        out.eqs = list(self.eqs)
        out.ineqs = list(self.ineqs)
        out.socs = list(self.socs)
        out.rsocs = list(self.rsocs)
        return out

    def eq_dual(self, sol: ConicSolution, tag) -> list[float]:
        """Duals of all equality rows carrying `tag`, in emission order."""
        return [sol.eq_duals[i] for i, (_, _, t) in enumerate(self.eqs) if t == tag]

    def dump(self) -> str:
        """Text dump of the program for debugging."""
        lines = [f"vars: {self.num_vars}"]
        lines.append("min " + " + ".join(f"{c:g}*x{i}" for i, c in sorted(self.obj.items())))

        def fmt(e: Aff) -> str:
            terms = [f"{c:g}*x{i}" for i, c in sorted(e.coeffs.items())]
            if e.const or not terms:
                terms.append(f"{e.const:g}")
            return " + ".join(terms)

        for e, rhs, tag in self.eqs:
            lines.append(f"[{tag}] {fmt(e)} == {rhs:g}")
        for e, ub, tag in self.ineqs:
            lines.append(f"[{tag}] {fmt(e)} <= {ub:g}")
        for t, u, tag in self.socs:
            lines.append(f"[{tag}] ||({', '.join(fmt(e) for e in u)})|| <= {fmt(t)}")
        for p, q, u, tag in self.rsocs:
            lines.append(f"[{tag}] ||({', '.join(fmt(e) for e in u)})||^2 <= ({fmt(p)})*({fmt(q)})")
        return "\n".join(lines)


_STATUS_MAP = {
    "Solved": "optimal",
    "AlmostSolved": "optimal",
    "PrimalInfeasible": "infeasible",
    "AlmostPrimalInfeasible": "infeasible",
    "DualInfeasible": "unbounded",
    "AlmostDualInfeasible": "unbounded",
}


def solve(prog: ConicProgram, tol: ToleranceConfig | None = None) -> ConicSolution:
    """Solve the program; never raises on ill-conditioned input."""
    tol = tol or ToleranceConfig()
    n = prog.num_vars
    q = np.zeros(n)
    for i, c in prog.obj.items():
        q[i] = c

    rows_i: list[int] = []
    cols: list[int] = []
    vals: list[float] = []
    b: list[float] = []
    nrow = 0

    def put(expr: Aff, const_shift: float):
        # row contributes s = b - A x with s = const_shift - expr... callers pass
        # the affine expression whose value the slack must equal.
        nonlocal nrow
        for i, c in expr.coeffs.items():
            if c != 0.0:
                rows_i.append(nrow)
                cols.append(i)
                vals.append(-c)
        b.append(expr.const + const_shift)
        nrow += 1

    cones = []
    # zero cone: s = rhs - expr = 0
    for expr, rhs, _ in prog.eqs:
        put(-expr, rhs)
    if prog.eqs:
        cones.append(clarabel.ZeroConeT(len(prog.eqs)))
    # nonneg: s = ub - expr >= 0
    for expr, ub, _ in prog.ineqs:
        put(-expr, ub)
    if prog.ineqs:
        cones.append(clarabel.NonnegativeConeT(len(prog.ineqs)))
    # soc: s = (t, u) in SOC
    for t, u, _ in prog.socs:
        put(t, 0.0)
        for e in u:
            put(e, 0.0)
        cones.append(clarabel.SecondOrderConeT(1 + len(u)))
    # rsoc ||u||^2 <= p q  ->  ||(p - q, 2u)|| <= p + q
    for p, qq, u, _ in prog.rsocs:
        put(p + qq, 0.0)
        put(p - qq, 0.0)
        for e in u:
            put(e * 2.0, 0.0)
        cones.append(clarabel.SecondOrderConeT(2 + len(u)))

    A = sparse.csc_matrix(
        (vals, (rows_i, cols)), shape=(nrow, n)
    )
    P = sparse.csc_matrix((n, n))
    settings = clarabel.DefaultSettings()
    settings.verbose = False
    settings.tol_feas = tol.feas_tol
    settings.tol_gap_abs = tol.gap_tol
    settings.tol_gap_rel = tol.gap_tol
    settings.max_iter = tol.max_iters

    t0 = time.perf_counter()
    try:
        solver = clarabel.DefaultSolver(P, q, A, np.array(b), cones, settings)
        res = solver.solve()
    except BaseException:
        return ConicSolution("numerical-failure", None, None, None, None, 0,
                             time.perf_counter() - t0)
    wall = time.perf_counter() - t0

    status = _STATUS_MAP.get(str(res.status), "numerical-failure")
    if status != "optimal":
        return ConicSolution(status, None, None, None, None, res.iterations, wall)
    x = np.asarray(res.x)
    z = np.asarray(res.z)
    neq = len(prog.eqs)
    nin = len(prog.ineqs)
    return ConicSolution(
        "optimal", x, float(q @ x),
        z[:neq], z[neq:neq + nin], res.iterations, wall,
    )
