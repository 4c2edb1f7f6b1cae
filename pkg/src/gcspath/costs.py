"""Convex edge-length functions and their perspective epigraphs.

An edge length maps an endpoint pair (x_u, x_v) to a value in [0, inf].
Each variant knows how to emit the conic epigraph of its perspective,
over block columns ordered (z, z', y, t): the feasible points satisfy
t >= perspective(length)(z, z', y) together with the perspectivized edge
constraint, if any.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .conic import ConicBlock

CONSTRAINT_TOL = 1e-9


class CostError(ValueError):
    pass


@dataclass(frozen=True)
class AffineEdgeConstraint:
    """E x_u + F x_v (= or <=) g, the edge set coupling the endpoints."""

    E: np.ndarray
    F: np.ndarray
    g: np.ndarray
    relation: str = "eq"  # "eq" | "ineq"

    def __post_init__(self):
        object.__setattr__(self, "E", np.atleast_2d(np.asarray(self.E, float)))
        object.__setattr__(self, "F", np.atleast_2d(np.asarray(self.F, float)))
        object.__setattr__(self, "g", np.atleast_1d(np.asarray(self.g, float)))
        if self.E.shape[0] != self.F.shape[0] or self.E.shape[0] != self.g.size:
            raise CostError("edge constraint row counts differ")
        if self.relation not in ("eq", "ineq"):
            raise CostError("relation must be 'eq' or 'ineq'")

    def satisfied(self, xu, xv, tol: float = CONSTRAINT_TOL) -> bool:
        r = self.E @ xu + self.F @ xv - self.g
        if self.relation == "eq":
            return bool(np.all(np.abs(r) <= tol))
        return bool(np.all(r <= tol))


class EdgeLength:
    """Base of the closed variant family; dims are (n_u, n_v)."""

    n_u: int
    n_v: int

    def evaluate(self, xu, xv) -> float:
        xu = np.asarray(xu, float)
        xv = np.asarray(xv, float)
        if xu.shape != (self.n_u,) or xv.shape != (self.n_v,):
            raise CostError("endpoint dimension mismatch")
        return self._value(xu, xv)

    def _value(self, xu, xv) -> float:
        raise NotImplementedError

    def finite_value(self, xu, xv) -> float:
        """Value ignoring any edge constraint (useful at near-feasible points)."""
        return self.evaluate(xu, xv)

    def perspective_epigraph(self) -> ConicBlock:
        """Block over (z, z', y, t); min feasible t is the perspective value."""
        raise NotImplementedError

    def _block(self) -> ConicBlock:
        return ConicBlock(self.n_u + self.n_v + 2)

    def _col_y(self) -> int:
        return self.n_u + self.n_v

    def _col_t(self) -> int:
        return self.n_u + self.n_v + 1

    def _constraint_rows(self, blk: ConicBlock, con: AffineEdgeConstraint | None):
        """Perspective of the edge constraint: E z + F z' (= or <=) g y."""
        if con is None:
            return
        n_u, n_v, iy = self.n_u, self.n_v, self._col_y()
        for i in range(con.g.size):
            a = np.zeros(blk.ncols)
            a[:n_u] = con.E[i]
            a[n_u:n_u + n_v] = con.F[i]
            a[iy] = -con.g[i]
            if con.relation == "eq":
                blk.add_eq(a)
            else:
                blk.add_ineq(a)

    def _y_nonneg(self, blk: ConicBlock):
        a = np.zeros(blk.ncols)
        a[self._col_y()] = -1.0
        blk.add_ineq(a)


def _stacked(C: np.ndarray, d: np.ndarray, n_u: int, n_v: int):
    C = np.atleast_2d(np.asarray(C, float))
    d = np.atleast_1d(np.asarray(d, float))
    if C.shape[1] != n_u + n_v:
        raise CostError("cost matrix must have n_u + n_v columns")
    if C.shape[0] != d.size:
        raise CostError("cost matrix and offset row counts differ")
    return C, d


@dataclass(frozen=True)
class Norm2Affine(EdgeLength):
    """||C [x_u; x_v] + d||_2"""

    C: np.ndarray
    d: np.ndarray
    n_u: int
    n_v: int

    def __post_init__(self):
        C, d = _stacked(self.C, self.d, self.n_u, self.n_v)
        object.__setattr__(self, "C", C)
        object.__setattr__(self, "d", d)

    def _value(self, xu, xv):
        return float(np.linalg.norm(self.C @ np.concatenate([xu, xv]) + self.d))

    def perspective_epigraph(self):
        blk = self._block()
        F = np.zeros((self.C.shape[0], blk.ncols))
        F[:, :self.n_u + self.n_v] = self.C
        F[:, self._col_y()] = self.d
        t = np.zeros(blk.ncols)
        t[self._col_t()] = 1.0
        blk.add_soc(F, np.zeros(self.C.shape[0]), t, 0.0)
        self._y_nonneg(blk)
        return blk


@dataclass(frozen=True)
class SqNorm2Affine(EdgeLength):
    """||C [x_u; x_v] + d||_2^2"""

    C: np.ndarray
    d: np.ndarray
    n_u: int
    n_v: int

    def __post_init__(self):
        C, d = _stacked(self.C, self.d, self.n_u, self.n_v)
        object.__setattr__(self, "C", C)
        object.__setattr__(self, "d", d)

    def _value(self, xu, xv):
        return float(np.linalg.norm(self.C @ np.concatenate([xu, xv]) + self.d) ** 2)

    def perspective_epigraph(self):
        # rotated cone ||C [z; z'] + d y||^2 <= t y; at y = 0 this closes the
        # perspective by forcing C [z; z'] = 0.
        blk = self._block()
        F = np.zeros((self.C.shape[0], blk.ncols))
        F[:, :self.n_u + self.n_v] = self.C
        F[:, self._col_y()] = self.d
        t = np.zeros(blk.ncols)
        t[self._col_t()] = 1.0
        y = np.zeros(blk.ncols)
        y[self._col_y()] = 1.0
        blk.add_rsoc(F, np.zeros(self.C.shape[0]), t, 0.0, y, 0.0)
        return blk


@dataclass(frozen=True)
class ConstantWithConstraint(EdgeLength):
    """Value c on the edge-constraint set, +inf off it."""

    c: float
    n_u: int
    n_v: int
    constraint: AffineEdgeConstraint | None = None

    def __post_init__(self):
        if self.c < 0:
            raise CostError("constant edge length must be nonnegative")

    def _value(self, xu, xv):
        if self.constraint is not None and not self.constraint.satisfied(xu, xv):
            return float("inf")
        return float(self.c)

    def finite_value(self, xu, xv):
        return float(self.c)

    def perspective_epigraph(self):
        blk = self._block()
        a = np.zeros(blk.ncols)
        a[self._col_y()] = self.c
        a[self._col_t()] = -1.0
        blk.add_ineq(a)  # t >= c y
        self._y_nonneg(blk)
        self._constraint_rows(blk, self.constraint)
        return blk


@dataclass(frozen=True)
class QuadraticWithConstraint(EdgeLength):
    """||C [x_u; x_v] + d||^2 + c0 on the edge-constraint set, +inf off it."""

    C: np.ndarray
    d: np.ndarray
    c0: float
    n_u: int
    n_v: int
    constraint: AffineEdgeConstraint | None = None

    def __post_init__(self):
        C, d = _stacked(self.C, self.d, self.n_u, self.n_v)
        object.__setattr__(self, "C", C)
        object.__setattr__(self, "d", d)
        if self.c0 < 0:
            raise CostError("constant offset must be nonnegative")

    def _value(self, xu, xv):
        if self.constraint is not None and not self.constraint.satisfied(xu, xv):
            return float("inf")
        return self.finite_value(xu, xv)

    def finite_value(self, xu, xv):
        return float(np.linalg.norm(self.C @ np.concatenate([xu, xv]) + self.d) ** 2
                     + self.c0)

    def perspective_epigraph(self):
        # ||C [z; z'] + d y||^2 <= (t - c0 y) y, both factors >= 0
        blk = self._block()
        F = np.zeros((self.C.shape[0], blk.ncols))
        F[:, :self.n_u + self.n_v] = self.C
        F[:, self._col_y()] = self.d
        p = np.zeros(blk.ncols)
        p[self._col_t()] = 1.0
        p[self._col_y()] = -self.c0
        y = np.zeros(blk.ncols)
        y[self._col_y()] = 1.0
        blk.add_rsoc(F, np.zeros(self.C.shape[0]), p, 0.0, y, 0.0)
        self._constraint_rows(blk, self.constraint)
        return blk


def euclidean(n_u: int, n_v: int | None = None) -> Norm2Affine:
    """||x_v - x_u||_2 (endpoint dims must agree)."""
    n_v = n_u if n_v is None else n_v
    if n_v != n_u:
        raise CostError("euclidean length needs equal endpoint dimensions")
    C = np.hstack([-np.eye(n_u), np.eye(n_u)])
    return Norm2Affine(C, np.zeros(n_u), n_u, n_u)


def sq_euclidean(n_u: int, n_v: int | None = None) -> SqNorm2Affine:
    """||x_v - x_u||_2^2 (endpoint dims must agree)."""
    n_v = n_u if n_v is None else n_v
    if n_v != n_u:
        raise CostError("squared euclidean length needs equal endpoint dimensions")
    C = np.hstack([-np.eye(n_u), np.eye(n_u)])
    return SqNorm2Affine(C, np.zeros(n_u), n_u, n_u)
