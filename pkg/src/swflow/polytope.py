"""Finitely generated polytopes and the minimum-norm-point problem.

Subdifferentials of the network objectives are carried around in
V-representation: a polytope is the convex hull of finitely many generator
vectors.  The central operation is finding the least-norm element of the
hull, which selects the velocity of a subgradient flow at nonsmooth points.

The solver is Wolfe's method (Wolfe 1976): maintain a "corral" of
affinely independent generators, alternate between adding the generator
most aligned with the current iterate and pruning vertices whose affine
weight turns nonpositive.  It terminates exactly on polytopes in general
position; a projected-gradient fallback on the simplex of hull weights
guards against the rare numerical cycle.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from .errors import NonConvergence

Array = NDArray[np.float64]

_OPT_RTOL = 1e-12


@dataclass(frozen=True)
class GeneratorPolytope:
    """Convex hull of the rows of ``generators`` (shape (g, n), g >= 1)."""

    generators: Array

    def __post_init__(self):
        G = np.atleast_2d(np.asarray(self.generators, dtype=float))
        if G.ndim != 2 or G.shape[0] < 1:
            raise ValueError("polytope needs at least one generator row")
        object.__setattr__(self, "generators", G)

    @property
    def count(self) -> int:
        return self.generators.shape[0]

    @property
    def dim(self) -> int:
        return self.generators.shape[1]

    def support(self, direction: Array) -> float:
        """Support function max_g g . direction over the hull."""
        return float(np.max(self.generators @ np.asarray(direction, dtype=float)))

    def combine(self, weights: Array) -> Array:
        return np.asarray(weights, dtype=float) @ self.generators

    def scaled(self, factor: float) -> "GeneratorPolytope":
        return GeneratorPolytope(self.generators * factor)

    def shifted(self, vector: Array) -> "GeneratorPolytope":
        return GeneratorPolytope(self.generators + np.asarray(vector, dtype=float))

    def contains(self, v: Array, tol: float = 1e-9) -> bool:
        """Hull membership, decided by projecting v onto the hull."""
        shifted = GeneratorPolytope(self.generators - np.asarray(v, dtype=float))
        w, _ = min_norm_point_weights(shifted)
        return float(np.linalg.norm(w)) <= tol


def minkowski_sum(parts: list[GeneratorPolytope], cap: int = 256,
                  rng: np.random.Generator | None = None) -> GeneratorPolytope:
    """Generators of the Minkowski sum of hulls.

    The exact sum enumerates one generator per choice tuple; when that
    product exceeds ``cap`` the enumeration switches to a deterministic
    random sample of choice tuples (the exact hull is then an outer set of
    the sampled one).  Single-generator parts are folded into a base offset
    first so only genuinely nonsmooth parts multiply.
    """
    if not parts:
        raise ValueError("empty Minkowski sum")
    dim = parts[0].dim
    base = np.zeros(dim)
    multi: list[Array] = []
    for p in parts:
        if p.count == 1:
            base = base + p.generators[0]
        else:
            multi.append(p.generators)
    if not multi:
        return GeneratorPolytope(base[None, :])
    total = 1
    for G in multi:
        total *= G.shape[0]
        if total > cap:
            break
    if total <= cap:
        combos = np.zeros((1, dim))
        for G in multi:
            combos = (combos[:, None, :] + G[None, :, :]).reshape(-1, dim)
    else:
        if rng is None:
            rng = np.random.default_rng(0)
        combos = np.zeros((cap, dim))
        for G in multi:
            combos += G[rng.integers(0, G.shape[0], size=cap)]
    return GeneratorPolytope(combos + base)


def _affine_min_norm(G: Array) -> Array:
    """Weights of the least-norm point of the affine hull of rows of G.

    Solves  min |G^T a|  s.t.  sum a = 1  via the KKT system; lstsq keeps
    degenerate corrals (affinely dependent rows) from blowing up.
    """
    s = G.shape[0]
    M = np.empty((s + 1, s + 1))
    M[0, 0] = 0.0
    M[0, 1:] = 1.0
    M[1:, 0] = 1.0
    M[1:, 1:] = G @ G.T
    rhs = np.zeros(s + 1)
    rhs[0] = 1.0
    sol, *_ = np.linalg.lstsq(M, rhs, rcond=None)
    return sol[1:]


def _simplex_project(y: Array) -> Array:
    """Euclidean projection onto the probability simplex (Duchi et al. 2008)."""
    u = np.sort(y)[::-1]
    css = np.cumsum(u) - 1.0
    ind = np.arange(1, y.size + 1)
    cond = u - css / ind > 0
    rho = ind[cond][-1]
    theta = css[cond][-1] / rho
    return np.maximum(y - theta, 0.0)


def _min_norm_simplex_pgd(G: Array, iters: int = 20_000) -> Array:
    """Fallback: minimize |G^T w|^2 over the simplex by projected gradient."""
    g = G.shape[0]
    Q = G @ G.T
    lip = float(np.linalg.norm(Q, 2))
    if lip == 0.0:
        return np.full(g, 1.0 / g)
    step = 1.0 / lip
    w = np.full(g, 1.0 / g)
    f_prev = float(w @ Q @ w)
    for _ in range(iters):
        w = _simplex_project(w - step * (Q @ w))
        f = float(w @ Q @ w)
        if f_prev - f <= 1e-18 * max(1.0, f_prev):
            break
        f_prev = f
    return w


def min_norm_point_weights(poly: GeneratorPolytope,
                           max_major: int | None = None) -> tuple[Array, Array]:
    """Least-norm hull point and its convex weights, (point, weights).

    Ties in generator selection break toward the lowest index, which makes
    the routine deterministic.  The returned weights are nonnegative, sum
    to one, and reproduce the point exactly (they are the certificate the
    property tests check).
    """
    G = poly.generators
    g, n = G.shape
    if g == 1:
        return G[0].copy(), np.ones(1)

    scale = float(np.max(np.linalg.norm(G, axis=1)))
    if scale == 0.0:
        w = np.zeros(g)
        w[0] = 1.0
        return np.zeros(n), w
    tol = _OPT_RTOL * scale * scale

    norms2 = np.einsum("ij,ij->i", G, G)
    first = int(np.argmin(norms2))
    corral = [first]
    weights = np.array([1.0])
    if max_major is None:
        max_major = 16 * (g + n)
    seen: set[tuple[int, ...]] = set()

    for _ in range(max_major):
        x = weights @ G[corral]
        scores = G @ x
        j = int(np.argmin(scores))
        if float(x @ x) <= scores[j] + tol:
            w_full = np.zeros(g)
            w_full[corral] = weights
            return x, w_full
        if j in corral:
            break  # numerical stall: fall through to the simplex solve
        key = tuple(sorted(corral + [j]))
        if key in seen:
            break  # cycle detected
        seen.add(key)
        corral.append(j)
        weights = np.append(weights, 0.0)

        while True:
            alpha = _affine_min_norm(G[corral])
            if np.all(alpha >= 1e-12):
                weights = alpha
                break
            # step from weights toward alpha until a coordinate hits zero
            diff = weights - alpha
            mask = diff > 1e-15
            with np.errstate(divide="ignore"):
                theta = np.min(weights[mask] / diff[mask])
            theta = min(1.0, float(theta))
            weights = (1 - theta) * weights + theta * alpha
            weights = np.maximum(weights, 0.0)
            keep = weights > 1e-14
            if keep.all():
                weights[np.argmin(weights)] = 0.0
                keep = weights > 0.0
            corral = [c for c, k in zip(corral, keep) if k]
            weights = weights[keep]
            weights /= weights.sum()
            if len(corral) == 1:
                break

    # fallback path: projected gradient on the full weight simplex
    w = _min_norm_simplex_pgd(G)
    x = w @ G
    if float(x @ x) > np.min(G @ x) + max(100 * tol, 1e-9 * scale * scale):
        raise NonConvergence("minimum-norm point: fallback failed to certify")
    return x, w


def min_norm_point(poly: GeneratorPolytope) -> Array:
    """Least-norm element of the hull (see :func:`min_norm_point_weights`)."""
    point, _ = min_norm_point_weights(poly)
    return point
