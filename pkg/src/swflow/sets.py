"""Closed convex sets with projection, normal-cone and tangent-cone support.

Every constraint set in the package is one of the descriptors below.  Each
knows how to

* project a point (exactly for the primitive variants, by Dykstra's
  alternating-correction scheme for intersections),
* decide membership under a scale-aware feasibility tolerance,
* project a velocity onto the tangent cone at a feasible point, and
* expose finite generator directions of its normal cone where the cone is
  polyhedral or a single ray (used by the diagnostics as cone certificates).

The tangent projection is what turns a raw descent direction into the
velocity actually followed by a constrained flow: the least-norm element of
``v - N(x)`` equals the tangent-cone projection of ``v``, so both the
integrator and the residual checks route through :meth:`ConvexSet.tangent_project`.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray

from .errors import NonConvergence, PointOutsideSet

Array = NDArray[np.float64]

#: projections count as members when dist(x, C) <= FEAS_RTOL * (1 + |x|)
FEAS_RTOL = 1e-8

DYKSTRA_MAX_SWEEPS = 10_000
DYKSTRA_TOL = 1e-10


def feasibility_tol(x: Array) -> float:
    """Scale-aware membership tolerance 1e-8 * (1 + |x|)."""
    return FEAS_RTOL * (1.0 + float(np.linalg.norm(x)))


def dykstra(projections, z: Array, max_sweeps: int = DYKSTRA_MAX_SWEEPS,
            tol: float = DYKSTRA_TOL) -> Array:
    """Project z onto an intersection via Dykstra's corrected alternation.

    ``projections`` is a sequence of exact projectors onto closed convex
    sets whose intersection is assumed nonempty.  Plain alternating
    projection converges to *some* intersection point; the Dykstra
    increments make it converge to the nearest one.  Raises
    :class:`NonConvergence` when the sweep cap is exhausted before the
    iterate settles.
    """
    x = np.array(z, dtype=float)
    increments = [np.zeros_like(x) for _ in projections]
    for _ in range(max_sweeps):
        x_prev = x.copy()
        drift = 0.0
        for i, proj in enumerate(projections):
            y = x + increments[i]
            x = proj(y)
            inc_new = y - x
            drift += float(np.linalg.norm(inc_new - increments[i]))
            increments[i] = inc_new
        # the iterate alone can sit still for a sweep while the correction
        # terms are still redistributing, so the increments must settle too
        if (np.linalg.norm(x - x_prev) + drift
                <= tol * (1.0 + np.linalg.norm(x))):
            return x
    raise NonConvergence(
        f"Dykstra did not settle within {max_sweeps} sweeps (tol {tol:g})"
    )


class ConvexSet:
    """Common interface of all constraint-set descriptors."""

    dim: int

    def project(self, x: Array) -> Array:
        raise NotImplementedError

    def project_batch(self, xs: Array) -> Array:
        """Row-wise projection; overridden where a vectorized form exists."""
        xs = np.asarray(xs, dtype=float)
        return np.stack([self.project(row) for row in xs])

    def distance(self, x: Array) -> float:
        x = np.asarray(x, dtype=float)
        return float(np.linalg.norm(x - self.project(x)))

    def distance_batch(self, xs: Array) -> Array:
        xs = np.asarray(xs, dtype=float)
        return np.linalg.norm(xs - self.project_batch(xs), axis=1)

    def contains(self, x: Array, tol: float | None = None) -> bool:
        x = np.asarray(x, dtype=float)
        if tol is None:
            tol = feasibility_tol(x)
        return self.distance(x) <= tol

    def require_member(self, x: Array) -> Array:
        x = np.asarray(x, dtype=float)
        if not self.contains(x):
            raise PointOutsideSet(
                f"point at distance {self.distance(x):.3e} from {type(self).__name__}"
            )
        return x

    def tangent_project(self, x: Array, v: Array) -> Array:
        """Projection of v onto the tangent cone at the member point x."""
        raise NotImplementedError

    def normal_generators(self, x: Array) -> Array:
        """Finite directions generating the normal cone at x, shape (g, dim).

        Exact for the polyhedral variants and the ball (single ray); for
        intersections it is the union of component generators, which spans
        the cone whenever the intersection has an interior point.
        """
        raise NotImplementedError

    def reference_point(self) -> Array:
        """Some member point, used as a sampling and alternation seed."""
        raise NotImplementedError

    def sample(self, rng: np.random.Generator) -> Array:
        """A random member point."""
        raise NotImplementedError

    def probe_points(self, x: Array, rng: np.random.Generator,
                     count: int = 64) -> Array:
        """Member points surrounding x, used as normal-cone test probes.

        Convexity makes local probes sufficient: v lies in the normal cone
        at x exactly when v . (x' - x) <= 0 for member points x' arbitrarily
        close to x in every feasible direction.
        """
        span = 1.0 + float(np.linalg.norm(x))
        pts = [self.project(x + span * rng.standard_normal(self.dim))
               for _ in range(count)]
        # small feasible perturbations catch directions the global draws miss
        for _ in range(count):
            pts.append(self.project(x + 1e-3 * span * rng.standard_normal(self.dim)))
        pts.append(self.reference_point())
        return np.stack(pts)


@dataclass(frozen=True)
class WholeSpace(ConvexSet):
    """All of R^n (the unconstrained case)."""

    dim: int

    def project(self, x: Array) -> Array:
        return np.asarray(x, dtype=float).copy()

    def project_batch(self, xs: Array) -> Array:
        return np.asarray(xs, dtype=float).copy()

    def distance(self, x: Array) -> float:
        return 0.0

    def distance_batch(self, xs: Array) -> Array:
        return np.zeros(np.asarray(xs).shape[0])

    def tangent_project(self, x: Array, v: Array) -> Array:
        return np.asarray(v, dtype=float).copy()

    def normal_generators(self, x: Array) -> Array:
        return np.zeros((0, self.dim))

    def reference_point(self) -> Array:
        return np.zeros(self.dim)

    def sample(self, rng: np.random.Generator) -> Array:
        return rng.standard_normal(self.dim)

    def probe_points(self, x, rng, count=64):
        x = np.asarray(x, dtype=float)
        span = 1.0 + float(np.linalg.norm(x))
        pts = x + span * rng.standard_normal((count, self.dim))
        axes = span * np.vstack([np.eye(self.dim), -np.eye(self.dim)])
        return np.vstack([pts, x + axes])


@dataclass(frozen=True)
class Box(ConvexSet):
    """Axis-aligned box {x : lo <= x <= hi}; +-inf entries drop that bound."""

    lower: Array
    upper: Array

    def __post_init__(self):
        lo = np.asarray(self.lower, dtype=float)
        hi = np.asarray(self.upper, dtype=float)
        if lo.shape != hi.shape or lo.ndim != 1:
            raise ValueError("box bounds must be 1-D arrays of equal length")
        if np.any(lo > hi):
            raise ValueError("box has lower > upper")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @property
    def dim(self) -> int:
        return self.lower.shape[0]

    def project(self, x: Array) -> Array:
        return np.clip(np.asarray(x, dtype=float), self.lower, self.upper)

    def project_batch(self, xs: Array) -> Array:
        return np.clip(np.asarray(xs, dtype=float), self.lower, self.upper)

    def _active(self, x: Array):
        tol = feasibility_tol(x)
        at_lo = x <= self.lower + tol
        at_hi = x >= self.upper - tol
        return at_lo, at_hi

    def tangent_project(self, x: Array, v: Array) -> Array:
        x = self.require_member(x)
        v = np.asarray(v, dtype=float)
        at_lo, at_hi = self._active(x)
        out = v.copy()
        out[at_lo] = np.maximum(out[at_lo], 0.0)
        out[at_hi] = np.minimum(out[at_hi], 0.0)
        return out

    def normal_generators(self, x: Array) -> Array:
        x = self.require_member(x)
        at_lo, at_hi = self._active(x)
        gens = []
        eye = np.eye(self.dim)
        for i in range(self.dim):
            if at_hi[i]:
                gens.append(eye[i])
            if at_lo[i]:
                gens.append(-eye[i])
        return np.stack(gens) if gens else np.zeros((0, self.dim))

    def reference_point(self) -> Array:
        lo = np.where(np.isfinite(self.lower), self.lower, -1.0)
        hi = np.where(np.isfinite(self.upper), self.upper, 1.0)
        hi = np.maximum(hi, lo)
        return 0.5 * (lo + hi)

    def sample(self, rng: np.random.Generator) -> Array:
        ref = self.reference_point()
        lo = np.where(np.isfinite(self.lower), self.lower, ref - 1 - rng.exponential(2.0, self.dim))
        hi = np.where(np.isfinite(self.upper), self.upper, ref + 1 + rng.exponential(2.0, self.dim))
        return rng.uniform(lo, hi)

    def probe_points(self, x, rng, count=64):
        x = np.asarray(x, dtype=float)
        span = 1.0 + float(np.linalg.norm(x))
        lo = np.where(np.isfinite(self.lower), self.lower, x - span)
        hi = np.where(np.isfinite(self.upper), self.upper, x + span)
        pts = [rng.uniform(lo, hi) for _ in range(count)]
        # vertices of the (clipped) box, capped at 64 to bound the cost
        n_vert = min(64, 2 ** self.dim)
        for _ in range(n_vert):
            pts.append(np.where(rng.random(self.dim) < 0.5, lo, hi))
        for _ in range(count):
            pts.append(self.project(x + 1e-3 * span * rng.standard_normal(self.dim)))
        return np.stack(pts)


@dataclass(frozen=True)
class Ball(ConvexSet):
    """Euclidean ball {x : |x - center| <= radius}."""

    center: Array
    radius: float

    def __post_init__(self):
        c = np.asarray(self.center, dtype=float)
        if c.ndim != 1:
            raise ValueError("ball center must be a 1-D array")
        if self.radius <= 0:
            raise ValueError("ball radius must be positive")
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "radius", float(self.radius))

    @property
    def dim(self) -> int:
        return self.center.shape[0]

    def project(self, x: Array) -> Array:
        x = np.asarray(x, dtype=float)
        d = x - self.center
        r = np.linalg.norm(d)
        if r <= self.radius:
            return x.copy()
        return self.center + d * (self.radius / r)

    def project_batch(self, xs: Array) -> Array:
        xs = np.asarray(xs, dtype=float)
        d = xs - self.center
        r = np.linalg.norm(d, axis=1)
        scale = np.where(r > self.radius, self.radius / np.maximum(r, 1e-300), 1.0)
        return self.center + d * scale[:, None]

    def _boundary_normal(self, x: Array) -> Array | None:
        d = x - self.center
        r = np.linalg.norm(d)
        if r >= self.radius - feasibility_tol(x):
            return d / max(r, 1e-300)
        return None

    def tangent_project(self, x: Array, v: Array) -> Array:
        x = self.require_member(x)
        v = np.asarray(v, dtype=float)
        u = self._boundary_normal(x)
        if u is None:
            return v.copy()
        outward = float(v @ u)
        if outward <= 0.0:
            return v.copy()
        return v - outward * u

    def normal_generators(self, x: Array) -> Array:
        x = self.require_member(x)
        u = self._boundary_normal(x)
        if u is None:
            return np.zeros((0, self.dim))
        return u[None, :]

    def reference_point(self) -> Array:
        return self.center.copy()

    def sample(self, rng: np.random.Generator) -> Array:
        u = rng.standard_normal(self.dim)
        u /= max(np.linalg.norm(u), 1e-300)
        t = rng.random() ** (1.0 / self.dim)
        return self.center + self.radius * t * u

    def probe_points(self, x, rng, count=64):
        x = np.asarray(x, dtype=float)
        pts = [self.sample(rng) for _ in range(count)]
        for _ in range(count):
            pts.append(self.project(x + 1e-3 * self.radius * rng.standard_normal(self.dim)))
        pts.append(self.center.copy())
        return np.stack(pts)


@dataclass(frozen=True)
class Halfspace(ConvexSet):
    """Halfspace {x : normal . x <= offset}."""

    normal: Array
    offset: float

    def __post_init__(self):
        n = np.asarray(self.normal, dtype=float)
        if n.ndim != 1 or not np.linalg.norm(n) > 0:
            raise ValueError("halfspace needs a nonzero 1-D normal")
        object.__setattr__(self, "normal", n)
        object.__setattr__(self, "offset", float(self.offset))

    @property
    def dim(self) -> int:
        return self.normal.shape[0]

    def project(self, x: Array) -> Array:
        x = np.asarray(x, dtype=float)
        slack = float(self.normal @ x) - self.offset
        if slack <= 0.0:
            return x.copy()
        return x - slack * self.normal / float(self.normal @ self.normal)

    def project_batch(self, xs: Array) -> Array:
        xs = np.asarray(xs, dtype=float)
        slack = xs @ self.normal - self.offset
        slack = np.maximum(slack, 0.0)
        return xs - np.outer(slack / float(self.normal @ self.normal), self.normal)

    def _active(self, x: Array) -> bool:
        slack = self.offset - float(self.normal @ x)
        return slack <= feasibility_tol(x) * np.linalg.norm(self.normal)

    def tangent_project(self, x: Array, v: Array) -> Array:
        x = self.require_member(x)
        v = np.asarray(v, dtype=float)
        if not self._active(x):
            return v.copy()
        outward = float(v @ self.normal)
        if outward <= 0.0:
            return v.copy()
        return v - outward * self.normal / float(self.normal @ self.normal)

    def normal_generators(self, x: Array) -> Array:
        x = self.require_member(x)
        if self._active(x):
            return self.normal[None, :] / np.linalg.norm(self.normal)
        return np.zeros((0, self.dim))

    def reference_point(self) -> Array:
        n2 = float(self.normal @ self.normal)
        return self.normal * ((self.offset - 1.0) / n2)

    def sample(self, rng: np.random.Generator) -> Array:
        z = self.reference_point() + rng.standard_normal(self.dim) * 2.0
        return self.project(z)

    def probe_points(self, x, rng, count=64):
        x = np.asarray(x, dtype=float)
        span = 1.0 + float(np.linalg.norm(x))
        pts = [self.project(x + span * rng.standard_normal(self.dim))
               for _ in range(count)]
        for _ in range(count):
            pts.append(self.project(x + 1e-3 * span * rng.standard_normal(self.dim)))
        pts.append(self.reference_point())
        return np.stack(pts)


@dataclass(frozen=True)
class AffineSubspace(ConvexSet):
    """Affine set {x : A x = b}, stored as an anchor plus tangent basis."""

    origin: Array
    basis: Array  # (dim, t) orthonormal columns spanning directions in the set

    def __post_init__(self):
        x0 = np.asarray(self.origin, dtype=float)
        U = np.asarray(self.basis, dtype=float)
        if U.ndim != 2 or U.shape[0] != x0.shape[0]:
            raise ValueError("basis must have shape (dim, t)")
        if U.shape[1]:
            q, _ = np.linalg.qr(U)
            U = q[:, : U.shape[1]]
        object.__setattr__(self, "origin", x0)
        object.__setattr__(self, "basis", U)

    @classmethod
    def from_constraints(cls, A: Array, b: Array) -> "AffineSubspace":
        """Build from equalities A x = b (least-squares anchor, SVD null space)."""
        A = np.atleast_2d(np.asarray(A, dtype=float))
        b = np.atleast_1d(np.asarray(b, dtype=float))
        x0, *_ = np.linalg.lstsq(A, b, rcond=None)
        if not np.allclose(A @ x0, b, atol=1e-9 * (1 + np.linalg.norm(b))):
            raise ValueError("equality system A x = b is infeasible")
        _, s, vt = np.linalg.svd(A)
        rank = int(np.sum(s > 1e-12 * (s[0] if s.size else 1.0)))
        U = vt[rank:].T
        return cls(origin=x0, basis=U)

    @property
    def dim(self) -> int:
        return self.origin.shape[0]

    def project(self, x: Array) -> Array:
        x = np.asarray(x, dtype=float)
        d = x - self.origin
        return self.origin + self.basis @ (self.basis.T @ d)

    def project_batch(self, xs: Array) -> Array:
        xs = np.asarray(xs, dtype=float)
        d = xs - self.origin
        return self.origin + (d @ self.basis) @ self.basis.T

    def tangent_project(self, x: Array, v: Array) -> Array:
        self.require_member(x)
        v = np.asarray(v, dtype=float)
        return self.basis @ (self.basis.T @ v)

    def _normal_basis(self) -> Array:
        # orthonormal complement of the tangent basis
        full = np.eye(self.dim)
        resid = full - self.basis @ (self.basis.T @ full)
        q, r = np.linalg.qr(resid)
        keep = np.abs(np.diag(r)) > 1e-12
        return q[:, keep]

    def normal_generators(self, x: Array) -> Array:
        self.require_member(x)
        W = self._normal_basis()
        if W.shape[1] == 0:
            return np.zeros((0, self.dim))
        return np.vstack([W.T, -W.T])

    def reference_point(self) -> Array:
        return self.origin.copy()

    def sample(self, rng: np.random.Generator) -> Array:
        t = self.basis.shape[1]
        return self.origin + self.basis @ rng.standard_normal(t)

    def probe_points(self, x, rng, count=64):
        x = np.asarray(x, dtype=float)
        span = 1.0 + float(np.linalg.norm(x))
        t = self.basis.shape[1]
        pts = [x + span * (self.basis @ rng.standard_normal(t)) for _ in range(count)]
        for j in range(t):
            pts.append(x + span * self.basis[:, j])
            pts.append(x - span * self.basis[:, j])
        pts.append(self.origin.copy())
        return np.stack(pts)


@dataclass(frozen=True)
class Product(ConvexSet):
    """Cartesian product of per-block sets, in block order."""

    factors: tuple[ConvexSet, ...]

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(self.factors))
        if not self.factors:
            raise ValueError("product needs at least one factor")

    @property
    def dim(self) -> int:
        return sum(f.dim for f in self.factors)

    def _slices(self):
        start = 0
        for f in self.factors:
            yield f, slice(start, start + f.dim)
            start += f.dim

    def project(self, x: Array) -> Array:
        x = np.asarray(x, dtype=float)
        out = np.empty_like(x)
        for f, sl in self._slices():
            out[sl] = f.project(x[sl])
        return out

    def project_batch(self, xs: Array) -> Array:
        xs = np.asarray(xs, dtype=float)
        out = np.empty_like(xs)
        for f, sl in self._slices():
            out[:, sl] = f.project_batch(xs[:, sl])
        return out

    def tangent_project(self, x: Array, v: Array) -> Array:
        x = np.asarray(x, dtype=float)
        v = np.asarray(v, dtype=float)
        out = np.empty_like(v)
        for f, sl in self._slices():
            out[sl] = f.tangent_project(x[sl], v[sl])
        return out

    def normal_generators(self, x: Array) -> Array:
        x = np.asarray(x, dtype=float)
        gens = []
        for f, sl in self._slices():
            for g in f.normal_generators(x[sl]):
                row = np.zeros(self.dim)
                row[sl] = g
                gens.append(row)
        return np.stack(gens) if gens else np.zeros((0, self.dim))

    def reference_point(self) -> Array:
        return np.concatenate([f.reference_point() for f in self.factors])

    def sample(self, rng: np.random.Generator) -> Array:
        return np.concatenate([f.sample(rng) for f in self.factors])

    def probe_points(self, x, rng, count=64):
        x = np.asarray(x, dtype=float)
        per = [f.probe_points(x[sl], rng, count) for f, sl in self._slices()]
        rows = min(p.shape[0] for p in per)
        return np.hstack([p[:rows] for p in per])


@dataclass(frozen=True)
class Intersection(ConvexSet):
    """Intersection of finitely many sets, projected by Dykstra sweeps.

    ``interior_point`` (optional) certifies the constraint qualification
    under which the normal cone of the intersection is the sum of the
    component cones and the tangent cone their intersection; it also seeds
    sampling.
    """

    components: tuple[ConvexSet, ...]
    interior_point: Array | None = None

    def __post_init__(self):
        comps = tuple(self.components)
        if len(comps) < 2:
            raise ValueError("intersection needs at least two components")
        if len({c.dim for c in comps}) != 1:
            raise ValueError("intersection components disagree on dimension")
        object.__setattr__(self, "components", comps)
        if self.interior_point is not None:
            object.__setattr__(
                self, "interior_point", np.asarray(self.interior_point, dtype=float)
            )

    @property
    def dim(self) -> int:
        return self.components[0].dim

    def project(self, x: Array) -> Array:
        x = np.asarray(x, dtype=float)
        return dykstra([c.project for c in self.components], x)

    def distance(self, x: Array) -> float:
        x = np.asarray(x, dtype=float)
        return float(np.linalg.norm(x - self.project(x)))

    def contains(self, x: Array, tol: float | None = None) -> bool:
        # membership needs no alternation: every component must contain x
        x = np.asarray(x, dtype=float)
        return all(c.contains(x, tol) for c in self.components)

    def require_member(self, x: Array) -> Array:
        x = np.asarray(x, dtype=float)
        for c in self.components:
            c.require_member(x)
        return x

    def tangent_project(self, x: Array, v: Array) -> Array:
        """Dykstra over the component tangent cones (their intersection is
        the tangent cone of the intersection under the interior-point CQ)."""
        x = self.require_member(x)
        v = np.asarray(v, dtype=float)
        projs = [
            (lambda w, c=c: c.tangent_project(x, w)) for c in self.components
        ]
        return dykstra(projs, v)

    def normal_generators(self, x: Array) -> Array:
        x = self.require_member(x)
        gens = [c.normal_generators(x) for c in self.components]
        gens = [g for g in gens if g.size]
        return np.vstack(gens) if gens else np.zeros((0, self.dim))

    def reference_point(self) -> Array:
        if self.interior_point is not None:
            return self.interior_point.copy()
        return self.project(self.components[0].reference_point())

    def sample(self, rng: np.random.Generator) -> Array:
        z = self.reference_point() + rng.standard_normal(self.dim)
        return self.project(z)

    def probe_points(self, x, rng, count=64):
        x = np.asarray(x, dtype=float)
        span = 1.0 + float(np.linalg.norm(x))
        pts = [self.project(x + span * rng.standard_normal(self.dim))
               for _ in range(count // 2)]
        for _ in range(count):
            pts.append(self.project(x + 1e-3 * span * rng.standard_normal(self.dim)))
        pts.append(self.reference_point())
        return np.stack(pts)


def normal_cone_residual(cset: ConvexSet, x: Array, v: Array,
                         rng: np.random.Generator | None = None,
                         count: int = 64) -> float:
    """Largest violation of the normal-cone inequality v . (x' - x) <= 0.

    Probes member points x' of ``cset`` around x; the result is 0.0 exactly
    when no sampled probe certifies that v leaves the normal cone at x.
    Raises :class:`PointOutsideSet` when x is not a member.
    """
    x = cset.require_member(np.asarray(x, dtype=float))
    v = np.asarray(v, dtype=float)
    if rng is None:
        rng = np.random.default_rng(0)
    probes = cset.probe_points(x, rng, count)
    worst = float(np.max((probes - x) @ v)) if probes.size else 0.0
    return max(0.0, worst)
