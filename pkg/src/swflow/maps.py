"""Monotone map descriptors for first-order flows  x' = -M(x).

A descriptor bundles a single-valued selection of a (maximal) monotone map
with a known zero and optional suggested probe points for the
demipositivity search.  Linear maps M(x) = A x are monotone exactly when
the symmetric part of A is positive semidefinite; saddle-derived maps
M(x, y) = (d/dx L, -d/dy L) of a convex-concave L are the standard
nonlinear source of monotone-but-not-gradient dynamics.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from numpy.typing import NDArray

Array = NDArray[np.float64]


@dataclass(frozen=True)
class MonotoneMapDescriptor:
    dim: int
    evaluate_fn: Callable[[Array], Array]
    anchor: tuple
    name: str = "map"
    probes: tuple = field(default=())

    def evaluate(self, x: Array) -> Array:
        return np.asarray(self.evaluate_fn(np.asarray(x, dtype=float)),
                          dtype=float)

    def anchor_point(self) -> Array:
        return np.asarray(self.anchor, dtype=float)

    def monotonicity_residual(self, rng: np.random.Generator,
                              pairs: int = 400,
                              half_width: float = 2.0) -> float:
        """min over sampled pairs of <M(a)-M(b), a-b>; >= -tol if monotone."""
        worst = np.inf
        for _ in range(pairs):
            a = rng.uniform(-half_width, half_width, self.dim)
            b = rng.uniform(-half_width, half_width, self.dim)
            gap = float(np.dot(self.evaluate(a) - self.evaluate(b), a - b))
            worst = min(worst, gap)
        return worst


def linear_map(matrix, name: str = "linear",
               probes: tuple = ()) -> MonotoneMapDescriptor:
    """M(x) = A x with zero at the origin."""
    A = np.asarray(matrix, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("need a square matrix")
    dim = A.shape[0]
    return MonotoneMapDescriptor(
        dim=dim,
        evaluate_fn=lambda x: A @ x,
        anchor=tuple(0.0 for _ in range(dim)),
        name=name,
        probes=probes,
    )


def rotation_map() -> MonotoneMapDescriptor:
    """Planar rotation M(x, y) = (-y, x): monotone (skew) with zero only
    at the origin, but x' = -M(x) orbits forever instead of converging."""
    return linear_map([[0.0, -1.0], [1.0, 0.0]], name="rotation")


def saddle_flow_map(convex_x: float = 1.0, cross: float = 1.0,
                    concave_y: float = 1.0,
                    name: str = "saddle") -> MonotoneMapDescriptor:
    """Map of the saddle flow for L(x, y) = a x^2 + b xy - c y^2.

    M(x, y) = (dL/dx, -dL/dy) = (2a x + b y, -b x + 2c y); monotone for
    a, c >= 0, strongly monotone when both are positive (the flow then
    spirals into the saddle point at the origin).  With c = 0 the second
    component degenerates to -b x and points of the form (0, y) pair to
    zero against the anchor while M is nonzero there: the map is monotone
    but not demipositive.
    """
    a, b, c = float(convex_x), float(cross), float(concave_y)
    if a < 0 or c < 0:
        raise ValueError("need convex_x >= 0 and concave_y >= 0")
    probes = ((0.0, 1.0),) if c == 0.0 and b != 0.0 else ()
    return linear_map([[2.0 * a, b], [-b, 2.0 * c]], name=name,
                      probes=probes)


def gradient_map(fn, dim: int, anchor,
                 name: str = "subgradient") -> MonotoneMapDescriptor:
    """Selection x -> least-norm element of the subdifferential of a
    convex function (objects with min_norm_subgradient, e.g. objective
    descriptors or catalog functions)."""
    return MonotoneMapDescriptor(
        dim=dim,
        evaluate_fn=lambda x: fn.min_norm_subgradient(x),
        anchor=tuple(float(v) for v in np.asarray(anchor, dtype=float)),
        name=name,
    )
