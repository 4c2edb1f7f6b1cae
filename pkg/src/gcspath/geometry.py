"""Compact convex sets and their perspective cones.

Every set is validated as bounded and nonempty at construction, so the
perspective cone of each set is exactly {(x, lam): lam >= 0, x in lam*X}
and its lam = 0 slice is the origin.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from .conic import ConicBlock


class GeometryError(ValueError):
    pass


def perspective_block(ncols: int) -> ConicBlock:
    """Empty constraint block over columns (x_1..x_n, lam)."""
    return ConicBlock(ncols)


class ConvexSet:
    """Base for the closed family of compact convex set representations."""

    dim: int

    def perspective(self) -> ConicBlock:
        """Conic block over (x, lam) whose feasible region is the perspective cone."""
        raise NotImplementedError

    def contains(self, x, tol: float = 0.0) -> bool:
        x = np.asarray(x, float)
        if x.shape != (self.dim,):
            raise GeometryError(f"point has dimension {x.shape}, set has {self.dim}")
        if tol < 0:
            raise GeometryError("tol must be nonnegative")
        return self.perspective().feasible(np.append(x, 1.0), tol)

    def chebyshev_center(self) -> np.ndarray:
        raise NotImplementedError

    def scale(self, sigma: float, center) -> "ConvexSet":
        raise NotImplementedError

    def bounding_box(self) -> tuple[np.ndarray, np.ndarray]:
        raise NotImplementedError

    def sample(self, rng: np.random.Generator) -> np.ndarray:
        """A random point of the set (not uniform in general)."""
        raise NotImplementedError

    def support(self, c) -> np.ndarray:
        """A maximizer of c . x over the set."""
        raise NotImplementedError

    def _check_sigma(self, sigma):
        if sigma <= 0:
            raise GeometryError("scale factor must be positive")


@dataclass(frozen=True)
class Singleton(ConvexSet):
    theta: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "theta", np.atleast_1d(np.asarray(self.theta, float)))
        if self.theta.ndim != 1 or self.theta.size < 1:
            raise GeometryError("singleton needs a vector of dimension >= 1")

    @property
    def dim(self) -> int:
        return self.theta.size

    def perspective(self) -> ConicBlock:
        n = self.dim
        blk = perspective_block(n + 1)
        for i in range(n):
            a = np.zeros(n + 1)
            a[i] = 1.0
            a[n] = -self.theta[i]
            blk.add_eq(a)  # x_i = theta_i * lam
        lam = np.zeros(n + 1)
        lam[n] = -1.0
        blk.add_ineq(lam)  # lam >= 0
        return blk

    def chebyshev_center(self):
        return self.theta.copy()

    def scale(self, sigma, center):
        self._check_sigma(sigma)
        c = np.asarray(center, float)
        return Singleton(c + sigma * (self.theta - c))

    def bounding_box(self):
        return self.theta.copy(), self.theta.copy()

    def sample(self, rng):
        return self.theta.copy()

    def support(self, c):
        return self.theta.copy()


@dataclass(frozen=True)
class Box(ConvexSet):
    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "lo", np.atleast_1d(np.asarray(self.lo, float)))
        object.__setattr__(self, "hi", np.atleast_1d(np.asarray(self.hi, float)))
        if self.lo.shape != self.hi.shape or self.lo.ndim != 1:
            raise GeometryError("box bounds must be vectors of equal dimension")
        if np.any(self.lo > self.hi):
            raise GeometryError("box needs lo <= hi componentwise")

    @property
    def dim(self) -> int:
        return self.lo.size

    def perspective(self) -> ConicBlock:
        n = self.dim
        blk = perspective_block(n + 1)
        for i in range(n):
            up = np.zeros(n + 1)
            up[i], up[n] = 1.0, -self.hi[i]
            blk.add_ineq(up)  # x_i <= hi_i * lam
            dn = np.zeros(n + 1)
            dn[i], dn[n] = -1.0, self.lo[i]
            blk.add_ineq(dn)  # lo_i * lam <= x_i
        lam = np.zeros(n + 1)
        lam[n] = -1.0
        blk.add_ineq(lam)
        return blk

    def chebyshev_center(self):
        return (self.lo + self.hi) / 2.0

    def scale(self, sigma, center):
        self._check_sigma(sigma)
        c = np.asarray(center, float)
        return Box(c + sigma * (self.lo - c), c + sigma * (self.hi - c))

    def bounding_box(self):
        return self.lo.copy(), self.hi.copy()

    def sample(self, rng):
        return rng.uniform(self.lo, self.hi)

    def support(self, c):
        c = np.asarray(c, float)
        return np.where(c >= 0, self.hi, self.lo)


def _support_bounds(A: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Componentwise bounds of {x: Ax <= b} via 2n support LPs; errors if
    the set is empty or unbounded."""
    m, n = A.shape
    lo = np.empty(n)
    hi = np.empty(n)
    for i in range(n):
        c = np.zeros(n)
        c[i] = 1.0
        for sign, out in ((1.0, lo), (-1.0, hi)):
            res = linprog(sign * c, A_ub=A, b_ub=b, bounds=[(None, None)] * n,
                          method="highs")
            if res.status == 2:
                raise GeometryError("polyhedron is empty")
            if res.status == 3:
                raise GeometryError("polyhedron is unbounded")
            if not res.success:
                raise GeometryError(f"support LP failed: {res.message}")
            out[i] = sign * res.fun
    return lo, hi


@dataclass(frozen=True)
class PolyhedronH(ConvexSet):
    """{x : A x <= b}, verified bounded and nonempty at construction."""

    A: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "A", np.atleast_2d(np.asarray(self.A, float)))
        object.__setattr__(self, "b", np.atleast_1d(np.asarray(self.b, float)))
        if self.A.shape[0] != self.b.size:
            raise GeometryError("A and b row counts differ")
        lo, hi = _support_bounds(self.A, self.b)
        object.__setattr__(self, "_bbox", (lo, hi))

    @property
    def dim(self) -> int:
        return self.A.shape[1]

    def perspective(self) -> ConicBlock:
        m, n = self.A.shape
        blk = perspective_block(n + 1)
        for i in range(m):
            a = np.zeros(n + 1)
            a[:n] = self.A[i]
            a[n] = -self.b[i]
            blk.add_ineq(a)  # A x <= b * lam
        lam = np.zeros(n + 1)
        lam[n] = -1.0
        blk.add_ineq(lam)
        return blk

    def chebyshev_center(self):
        # max r s.t. A x + ||A_i|| r <= b, r >= 0
        m, n = self.A.shape
        norms = np.linalg.norm(self.A, axis=1)
        A_ub = np.hstack([self.A, norms[:, None]])
        c = np.zeros(n + 1)
        c[n] = -1.0
        res = linprog(c, A_ub=A_ub, b_ub=self.b,
                      bounds=[(None, None)] * n + [(0, None)], method="highs")
        if not res.success:
            raise GeometryError(f"Chebyshev LP failed: {res.message}")
        return res.x[:n]

    def scale(self, sigma, center):
        self._check_sigma(sigma)
        c = np.asarray(center, float)
        return PolyhedronH(self.A, sigma * self.b + (1 - sigma) * (self.A @ c))

    def bounding_box(self):
        lo, hi = self._bbox
        return lo.copy(), hi.copy()

    def sample(self, rng):
        lo, hi = self._bbox
        for _ in range(10000):
            x = rng.uniform(lo, hi)
            if np.all(self.A @ x <= self.b + 1e-12):
                return x
        # thin polytope: fall back to a random convex combination with the center
        x = rng.uniform(lo, hi)
        c = self.chebyshev_center()
        t = 1.0
        while not np.all(self.A @ (c + t * (x - c)) <= self.b + 1e-12):
            t *= 0.5
        return c + t * (x - c)

    def support(self, c):
        c = np.asarray(c, float)
        n = self.dim
        res = linprog(-c, A_ub=self.A, b_ub=self.b,
                      bounds=[(None, None)] * n, method="highs")
        if not res.success:
            raise GeometryError(f"support LP failed: {res.message}")
        return res.x


@dataclass(frozen=True)
class Ellipsoid(ConvexSet):
    """{x : ||A x + b|| <= 1} with A of full column rank."""

    A: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "A", np.atleast_2d(np.asarray(self.A, float)))
        object.__setattr__(self, "b", np.atleast_1d(np.asarray(self.b, float)))
        if self.A.shape[0] != self.b.size:
            raise GeometryError("A and b row counts differ")
        if np.linalg.matrix_rank(self.A) < self.A.shape[1]:
            raise GeometryError("ellipsoid matrix must have full column rank (bounded set)")
        center, res, *_ = np.linalg.lstsq(self.A, -self.b, rcond=None)
        if np.linalg.norm(self.A @ center + self.b) > 1.0 + 1e-12:
            raise GeometryError("ellipsoid is empty")
        object.__setattr__(self, "_center", center)

    @property
    def dim(self) -> int:
        return self.A.shape[1]

    def perspective(self) -> ConicBlock:
        m, n = self.A.shape
        blk = perspective_block(n + 1)
        F = np.hstack([self.A, self.b[:, None]])
        c = np.zeros(n + 1)
        c[n] = 1.0
        blk.add_soc(F, np.zeros(m), c, 0.0)  # ||A x + b lam|| <= lam
        return blk

    def chebyshev_center(self):
        return self._center.copy()

    def scale(self, sigma, center):
        self._check_sigma(sigma)
        c = np.asarray(center, float)
        # image of x -> c + sigma (x - c)
        return Ellipsoid(self.A / sigma, self.b + (1 - 1 / sigma) * (self.A @ c))

    def bounding_box(self):
        # half-width of {||Ax + b|| <= 1} along e_i is ||(A^+)^T e_i||
        pinv = np.linalg.pinv(self.A)
        half = np.linalg.norm(pinv, axis=1)
        return self._center - half, self._center + half

    def sample(self, rng):
        m = self.A.shape[0]
        for _ in range(10000):
            u = rng.standard_normal(m)
            u *= rng.random() ** (1.0 / m) / np.linalg.norm(u)
            x, *_ = np.linalg.lstsq(self.A, u - self.b, rcond=None)
            if np.linalg.norm(self.A @ x + self.b) <= 1.0 + 1e-12:
                return x
        return self._center.copy()

    def support(self, c):
        # maximize c . x over ||A x + b|| <= 1: closed form through (A^T A)^-1
        c = np.asarray(c, float)
        M = np.linalg.inv(self.A.T @ self.A)
        denom = float(np.sqrt(c @ M @ c))
        if denom < 1e-15:
            return self._center.copy()
        return self._center + (M @ c) / denom


@dataclass(frozen=True)
class Product(ConvexSet):
    """Cartesian product; flattens recursively into one block with a shared lam."""

    factors: tuple[ConvexSet, ...]

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(self.factors))
        if not self.factors:
            raise GeometryError("product needs at least one factor")

    @property
    def dim(self) -> int:
        return sum(f.dim for f in self.factors)

    def perspective(self) -> ConicBlock:
        blk = self.factors[0].perspective()
        for f in self.factors[1:]:
            blk = blk.concat(f.perspective(), shared_last=1)
        return blk

    def chebyshev_center(self):
        return np.concatenate([f.chebyshev_center() for f in self.factors])

    def scale(self, sigma, center):
        self._check_sigma(sigma)
        c = np.asarray(center, float)
        out, k = [], 0
        for f in self.factors:
            out.append(f.scale(sigma, c[k:k + f.dim]))
            k += f.dim
        return Product(tuple(out))

    def bounding_box(self):
        parts = [f.bounding_box() for f in self.factors]
        return (np.concatenate([p[0] for p in parts]),
                np.concatenate([p[1] for p in parts]))

    def sample(self, rng):
        return np.concatenate([f.sample(rng) for f in self.factors])

    def support(self, c):
        c = np.asarray(c, float)
        out, k = [], 0
        for f in self.factors:
            out.append(f.support(c[k:k + f.dim]))
            k += f.dim
        return np.concatenate(out)
