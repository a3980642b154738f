"""Symmetric weighted interaction graphs, optionally with sinusoidal weights.

A graph couples k agents through nonnegative symmetric weights with zero
diagonal.  Time-varying weights follow an affine-in-sine family per edge,

    w_ij(t) = base_ij + amp_ij * sin(freq_ij * t + phase_ij),

whose per-edge envelope [base - |amp|, base + |amp|] is available in closed
form; the validator requires every coupled edge to keep a positive lower
envelope, so an edge is either identically zero or uniformly bounded away
from zero.  Edge lists use 0-based agent indices in "i j w" text rows.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

Array = NDArray[np.float64]


def _check_symmetric(mat: Array, name: str) -> Array:
    mat = np.asarray(mat, dtype=float)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ValueError(f"{name} must be a square matrix")
    if not np.array_equal(mat, mat.T):
        raise ValueError(f"{name} must be symmetric")
    if np.any(np.diag(mat) != 0.0):
        raise ValueError(f"{name} must have a zero diagonal")
    return mat


@dataclass(frozen=True)
class SinusoidWeights:
    """Per-edge sinusoidal weight model (all arrays (k, k), symmetric)."""

    base: Array
    amp: Array
    freq: Array
    phase: Array

    def __post_init__(self):
        base = _check_symmetric(self.base, "base")
        amp = _check_symmetric(self.amp, "amp")
        freq = _check_symmetric(self.freq, "freq")
        phase = _check_symmetric(self.phase, "phase")
        for name, arr in (("amp", amp), ("freq", freq), ("phase", phase)):
            if arr.shape != base.shape:
                raise ValueError(f"{name} shape differs from base")
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "amp", amp)
        object.__setattr__(self, "freq", freq)
        object.__setattr__(self, "phase", phase)

    def at(self, t: float) -> Array:
        return self.base + self.amp * np.sin(self.freq * t + self.phase)

    def envelope(self) -> tuple[Array, Array]:
        spread = np.abs(self.amp)
        return self.base - spread, self.base + spread


@dataclass(frozen=True)
class WeightedGraph:
    """k-agent interaction graph; static weights or a sinusoid model."""

    agents: int
    weights: Array | None = None
    sinusoid: SinusoidWeights | None = None

    def __post_init__(self):
        if (self.weights is None) == (self.sinusoid is None):
            raise ValueError("provide exactly one of weights / sinusoid")
        if self.sinusoid is None:
            w = _check_symmetric(self.weights, "weights")
            if w.shape[0] != self.agents:
                raise ValueError("weight matrix size differs from agent count")
            if np.any(w < 0):
                raise ValueError("weights must be nonnegative")
            object.__setattr__(self, "weights", w)
        else:
            lo, hi = self.sinusoid.envelope()
            if lo.shape[0] != self.agents:
                raise ValueError("sinusoid size differs from agent count")
            coupled = (self.sinusoid.base != 0) | (self.sinusoid.amp != 0)
            np.fill_diagonal(coupled, False)
            if np.any(coupled & (lo <= 0)):
                raise ValueError(
                    "every coupled edge needs a positive lower weight envelope"
                )
            if np.any(hi < 0):
                raise ValueError("weight envelope dips below zero")

    @classmethod
    def from_edges(cls, agents: int, edges) -> "WeightedGraph":
        """Build from (i, j, w) triples with 0-based agent indices."""
        w = np.zeros((agents, agents))
        for i, j, val in edges:
            i, j, val = int(i), int(j), float(val)
            if i == j:
                raise ValueError(f"self-loop on agent {i}")
            if not (0 <= i < agents and 0 <= j < agents):
                raise ValueError(f"edge ({i}, {j}) out of range")
            if val < 0:
                raise ValueError(f"negative weight on edge ({i}, {j})")
            for a, b in ((i, j), (j, i)):
                if w[a, b] != 0.0 and w[a, b] != val:
                    raise ValueError(
                        f"conflicting weights for edge ({i}, {j}): "
                        f"{w[a, b]} vs {val}"
                    )
            w[i, j] = w[j, i] = val
        return cls(agents=agents, weights=w)

    @classmethod
    def from_edge_list_text(cls, text: str, agents: int) -> "WeightedGraph":
        """Parse "i j w" rows (blank lines and '#' comments allowed)."""
        edges = []
        for ln, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 3:
                raise ValueError(f"line {ln}: expected 'i j w', got {raw!r}")
            edges.append((int(parts[0]), int(parts[1]), float(parts[2])))
        return cls.from_edges(agents, edges)

    def to_edge_list_text(self) -> str:
        w = self.weights_at(0.0)
        rows = []
        for i in range(self.agents):
            for j in range(i + 1, self.agents):
                if self.is_coupled(i, j):
                    rows.append(f"{i} {j} {w[i, j]:.17g}")
        return "\n".join(rows) + "\n"

    @property
    def time_varying(self) -> bool:
        return self.sinusoid is not None

    def weights_at(self, t: float) -> Array:
        if self.sinusoid is not None:
            return self.sinusoid.at(t)
        return self.weights

    def is_coupled(self, i: int, j: int) -> bool:
        if self.sinusoid is not None:
            return bool(self.sinusoid.base[i, j] != 0
                        or self.sinusoid.amp[i, j] != 0)
        return bool(self.weights[i, j] != 0)

    def edges(self) -> list[tuple[int, int]]:
        """Coupled pairs (i, j) with i < j."""
        return [(i, j)
                for i in range(self.agents)
                for j in range(i + 1, self.agents)
                if self.is_coupled(i, j)]

    def weight_envelope(self) -> tuple[Array, Array]:
        """Per-edge lower/upper weight bounds over all times."""
        if self.sinusoid is not None:
            return self.sinusoid.envelope()
        return self.weights, self.weights

    def lower_weight_graph(self) -> "WeightedGraph":
        """Static graph carrying the lower envelope on every coupled edge."""
        lo, _ = self.weight_envelope()
        w = np.where(lo > 0, lo, 0.0)
        np.fill_diagonal(w, 0.0)
        return WeightedGraph(agents=self.agents, weights=w)

    def laplacian_at(self, t: float) -> Array:
        w = self.weights_at(t)
        return np.diag(w.sum(axis=1)) - w

    def connected_components(self) -> list[list[int]]:
        """Components of the coupling pattern (isolated agents included)."""
        seen = [False] * self.agents
        comps = []
        adj = [[] for _ in range(self.agents)]
        for i, j in self.edges():
            adj[i].append(j)
            adj[j].append(i)
        for start in range(self.agents):
            if seen[start]:
                continue
            stack, comp = [start], []
            seen[start] = True
            while stack:
                u = stack.pop()
                comp.append(u)
                for v in adj[u]:
                    if not seen[v]:
                        seen[v] = True
                        stack.append(v)
            comps.append(sorted(comp))
        return comps

    def is_connected(self) -> bool:
        return len(self.connected_components()) == 1


def union_graph(graphs: list[WeightedGraph]) -> WeightedGraph:
    """Static graph whose edges are the union of all coupled edges."""
    if not graphs:
        raise ValueError("empty graph list")
    agents = graphs[0].agents
    if any(g.agents != agents for g in graphs):
        raise ValueError("graphs disagree on agent count")
    w = np.zeros((agents, agents))
    for g in graphs:
        for i, j in g.edges():
            w[i, j] = w[j, i] = 1.0
    return WeightedGraph(agents=agents, weights=w)


def union_graph_connected(graphs: list[WeightedGraph]) -> bool:
    """Connectivity of the union graph (the joint-coupling condition)."""
    return union_graph(graphs).is_connected()
