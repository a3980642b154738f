"""Proximal steps for convex functions restricted to constraint sets.

``prox_h(f^C)(x)`` minimizes  f(u) + |u - x|^2 / (2h)  over the set C.  It
is the resolvent of the maximal monotone operator driving a constrained
subgradient flow, hence the building block of the implicit stepping
scheme.  Dispatch order:

1. a closed form supplied by the function itself (valid on the whole
   space, composed with projection only when that composition is exact),
2. an inner projected-gradient solve for smooth functions on projectable
   sets (a contraction for every h > 0, so termination is a tolerance,
   not a hope),
3. :class:`~swflow.errors.NoProxOracle` otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray
from scipy.optimize import nnls

from .errors import NoProxOracle, NonConvergence
from .polytope import GeneratorPolytope, min_norm_point, minkowski_sum
from .sets import Box, ConvexSet, WholeSpace

Array = NDArray[np.float64]


class ConvexFunction:
    """Minimal protocol every objective-like object implements."""

    dim: int

    def value(self, x: Array) -> float:
        raise NotImplementedError

    def subdifferential(self, x: Array) -> GeneratorPolytope:
        raise NotImplementedError

    def min_norm_subgradient(self, x: Array) -> Array:
        return min_norm_point(self.subdifferential(x))

    def gradient(self, x: Array) -> Array:
        """Gradient where the function is smooth; default via subdifferential."""
        poly = self.subdifferential(x)
        if poly.count != 1:
            raise NoProxOracle("function is nonsmooth at the query point")
        return poly.generators[0].copy()

    def gradient_lipschitz(self) -> float | None:
        """A Lipschitz constant of the gradient, or None when nonsmooth."""
        return None

    def prox_free(self, x: Array, h: float) -> Array | None:
        """Closed-form unrestricted prox when available."""
        return None


@dataclass(frozen=True)
class ZeroFunction(ConvexFunction):
    dim: int

    def value(self, x):
        return 0.0

    def subdifferential(self, x):
        return GeneratorPolytope(np.zeros((1, self.dim)))

    def gradient(self, x):
        return np.zeros(self.dim)

    def gradient_lipschitz(self):
        return 0.0

    def prox_free(self, x, h):
        return np.asarray(x, dtype=float).copy()


@dataclass(frozen=True)
class IsotropicQuadratic(ConvexFunction):
    """f(x) = (weight/2) |x - center|^2."""

    weight: float
    center: Array

    def __post_init__(self):
        object.__setattr__(self, "center", np.asarray(self.center, dtype=float))
        if self.weight < 0:
            raise ValueError("quadratic weight must be nonnegative")

    @property
    def dim(self) -> int:
        return self.center.shape[0]

    def value(self, x):
        d = np.asarray(x, dtype=float) - self.center
        return 0.5 * self.weight * float(d @ d)

    def gradient(self, x):
        return self.weight * (np.asarray(x, dtype=float) - self.center)

    def subdifferential(self, x):
        return GeneratorPolytope(self.gradient(x)[None, :])

    def gradient_lipschitz(self):
        return self.weight

    def prox_free(self, x, h):
        x = np.asarray(x, dtype=float)
        return (x + h * self.weight * self.center) / (1.0 + h * self.weight)


@dataclass(frozen=True)
class L1Norm(ConvexFunction):
    """f(x) = weight * |x|_1 (separable, so prox is the soft threshold)."""

    dim: int
    weight: float = 1.0

    def value(self, x):
        return self.weight * float(np.sum(np.abs(x)))

    def subdifferential(self, x):
        x = np.asarray(x, dtype=float)
        parts = []
        eye = np.eye(self.dim)
        tie = 1e-9 * (1.0 + np.linalg.norm(x))
        for i in range(self.dim):
            if abs(x[i]) <= tie:
                parts.append(GeneratorPolytope(
                    np.stack([self.weight * eye[i], -self.weight * eye[i]])))
            else:
                parts.append(GeneratorPolytope(
                    (self.weight * np.sign(x[i]) * eye[i])[None, :]))
        return minkowski_sum(parts)

    def prox_free(self, x, h):
        x = np.asarray(x, dtype=float)
        return np.maximum(np.abs(x) - h * self.weight, 0.0) * np.sign(x)


@dataclass(frozen=True)
class SquaredDistance(ConvexFunction):
    """f(x) = (weight/2) dist(x, target)^2; smooth with Lipschitz gradient."""

    target: ConvexSet
    weight: float = 1.0

    @property
    def dim(self) -> int:
        return self.target.dim

    def value(self, x):
        return 0.5 * self.weight * self.target.distance(x) ** 2

    def gradient(self, x):
        x = np.asarray(x, dtype=float)
        return self.weight * (x - self.target.project(x))

    def subdifferential(self, x):
        return GeneratorPolytope(self.gradient(x)[None, :])

    def gradient_lipschitz(self):
        return self.weight


@dataclass(frozen=True)
class RestrictedFunction:
    """A convex function together with the set it is restricted to."""

    base: ConvexFunction
    constraint: ConvexSet

    def __post_init__(self):
        if self.base.dim != self.constraint.dim:
            raise ValueError("function and constraint dimensions disagree")

    @property
    def dim(self) -> int:
        return self.base.dim

    def value(self, x: Array) -> float:
        """f(x) on the set, +inf outside (the restricted extended value)."""
        if not self.constraint.contains(x):
            return float("inf")
        return self.base.value(x)

    def prox(self, x: Array, h: float) -> Array:
        if h <= 0:
            raise ValueError("prox needs h > 0")
        x = np.asarray(x, dtype=float)
        free = self.base.prox_free(x, h)
        whole = isinstance(self.constraint, WholeSpace)
        if free is not None and whole:
            return free
        if isinstance(self.base, (ZeroFunction, IsotropicQuadratic)):
            # isotropic objective: restricted prox = project the free prox
            return self.constraint.project(self.base.prox_free(x, h))
        if isinstance(self.base, L1Norm) and isinstance(self.constraint, Box):
            # both pieces separable per coordinate: threshold then clip
            return self.constraint.project(self.base.prox_free(x, h))
        lip = self.base.gradient_lipschitz()
        if lip is not None:
            return self._prox_inner(x, h, lip)
        raise NoProxOracle(
            f"no proximal route for {type(self.base).__name__} on "
            f"{type(self.constraint).__name__}"
        )

    def _prox_inner(self, x: Array, h: float, lip: float,
                    max_iter: int = 10_000) -> Array:
        """Projected gradient on u -> f(u) + |u-x|^2/(2h).

        Step 1/(lip + 1/h) contracts at rate 1 - 1/(1 + h*lip), so a few
        dozen iterations reach solver precision for the step sizes used
        by the integrator.
        """
        step = 1.0 / (lip + 1.0 / h)
        u = self.constraint.project(x)
        for _ in range(max_iter):
            grad = self.base.gradient(u) + (u - x) / h
            u_next = self.constraint.project(u - step * grad)
            if np.linalg.norm(u_next - u) <= 1e-13 * (1.0 + np.linalg.norm(u)):
                return u_next
            u = u_next
        raise NonConvergence("inner prox solve exhausted its iteration budget")


def prox(rf: RestrictedFunction, h: float, x: Array) -> Array:
    """Module-level convenience wrapper for :meth:`RestrictedFunction.prox`."""
    return rf.prox(x, h)


def prox_residual(rf: RestrictedFunction, h: float, x: Array, u: Array) -> float:
    """Distance of (x - u)/h to the hull of subgradients plus the normal cone.

    Zero (to tolerance) certifies u = prox_h(f^C)(x).  The cone part is
    handled by nonnegative least squares over the finite normal generators,
    the hull part by enumerating hull generators; this stays exact for the
    polyhedral-cone set variants.
    """
    x = np.asarray(x, dtype=float)
    u = np.asarray(u, dtype=float)
    w = (x - u) / h
    G = rf.base.subdifferential(u).generators
    N = rf.constraint.normal_generators(u)
    best = np.inf
    for g in G:
        r = w - g
        if N.size:
            coef, _ = nnls(N.T, r)
            r = r - N.T @ coef
        best = min(best, float(np.linalg.norm(r)))
    if G.shape[0] > 1:
        # also try the hull point closest to w (not only vertices)
        shifted = GeneratorPolytope(G - w)
        r = min_norm_point(shifted)
        if N.size:
            coef, _ = nnls(N.T, -r)
            r = r + N.T @ coef
        best = min(best, float(np.linalg.norm(r)))
    return best
