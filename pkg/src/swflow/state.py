"""Agent-block layout of flat state vectors.

A network state stacks k agent positions, each living in R^m, into a single
flat vector of length n = k*m.  Block i occupies entries [i*m, (i+1)*m).
All network-level functions in this package operate on the flat vector and
use :class:`AgentLayout` to move between the two views.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from .errors import LayoutMismatch

Array = NDArray[np.float64]


@dataclass(frozen=True)
class AgentLayout:
    """Number of agents and per-agent dimension of a stacked state."""

    agents: int
    dim: int

    def __post_init__(self):
        if self.agents < 1 or self.dim < 1:
            raise LayoutMismatch(f"need agents >= 1 and dim >= 1, got {self}")

    @property
    def size(self) -> int:
        return self.agents * self.dim

    def check(self, x: Array) -> Array:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.size,):
            raise LayoutMismatch(
                f"state has shape {x.shape}, layout expects ({self.size},)"
            )
        return x

    def blocks(self, x: Array) -> Array:
        """View of x with shape (agents, dim); no copy for contiguous input."""
        return self.check(x).reshape(self.agents, self.dim)

    def flat(self, blocks: Array) -> Array:
        blocks = np.asarray(blocks, dtype=float)
        if blocks.shape != (self.agents, self.dim):
            raise LayoutMismatch(
                f"block array has shape {blocks.shape}, expected "
                f"({self.agents}, {self.dim})"
            )
        return blocks.reshape(self.size)

    def block(self, x: Array, i: int) -> Array:
        return self.blocks(x)[i]

    def tile(self, point: Array) -> Array:
        """Stack one R^m point onto every agent (a consensus state)."""
        point = np.asarray(point, dtype=float)
        if point.shape != (self.dim,):
            raise LayoutMismatch(
                f"point has shape {point.shape}, expected ({self.dim},)"
            )
        return np.tile(point, self.agents)


def block_mean(layout: AgentLayout, x: Array) -> Array:
    """Average of the agent blocks, a point in R^m."""
    return layout.blocks(x).mean(axis=0)


def consensus_error(layout: AgentLayout, x: Array) -> float:
    """Euclidean distance from x to the consensus subspace.

    The consensus subspace collects states whose agent blocks all agree;
    the nearest such state replaces every block by the block mean.
    """
    blocks = layout.blocks(x)
    dev = blocks - blocks.mean(axis=0)
    return float(np.linalg.norm(dev))


def consensus_point(layout: AgentLayout, x: Array) -> Array:
    """Projection of x onto the consensus subspace."""
    return layout.tile(block_mean(layout, x))


def consensus_error_batch(layout: AgentLayout, states: Array) -> Array:
    """Vectorized :func:`consensus_error` over rows of ``states``."""
    states = np.asarray(states, dtype=float)
    blocks = states.reshape(states.shape[0], layout.agents, layout.dim)
    dev = blocks - blocks.mean(axis=1, keepdims=True)
    return np.linalg.norm(dev.reshape(states.shape[0], -1), axis=1)
