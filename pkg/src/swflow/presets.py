"""Scenario descriptions, the preset registry, and JSON configs.

A Scenario bundles everything one experiment needs: the mode family (or
monotone maps), the switching signal, integrator settings, the initial
condition, anchors for the decrease checks, and a list of machine-checked
expected outcomes.  Preset scenarios cover the consensus flows (two-agent
absolute/quadratic/max-norm couplings, switched single-edge topologies,
local terms, set intersection via penalties, per-agent box projection),
the persistently-active-modes refinement, sinusoidally weighted graphs,
two saddle-derived monotone flows, and the rotation counterexample.

Configs are JSON documents with schema "swflow-scenario/1"; every
validation error names the offending field path.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray

from .errors import ConfigInvalid, UnknownPreset
from .graphs import SinusoidWeights, WeightedGraph
from .integrate import StepScheme
from .maps import MonotoneMapDescriptor, linear_map, rotation_map, \
    saddle_flow_map
from .objectives import InfNormCoupling, ModeDescriptor, \
    ObjectiveDescriptor, PNormCoupling
from .prox import IsotropicQuadratic, SquaredDistance
from .sets import Ball, Box, ConvexSet, Product, WholeSpace
from .state import AgentLayout
from .switching import SwitchingSignal, make_constant, make_random_dwell, \
    make_round_robin

Array = NDArray[np.float64]

CONFIG_SCHEMA = "swflow-scenario/1"


@dataclass(frozen=True)
class CheckSpec:
    """One expected outcome: a named check plus the pass/fail expectation.

    ``expect=False`` inverts the expectation (the counterexample presets
    document failures on purpose; the run succeeds when the check fails).
    """
    kind: str
    expect: bool = True
    params: dict = field(default_factory=dict)


@dataclass
class Scenario:
    name: str
    kind: str                 # "subgradient" or "monotone"
    horizon: float
    scheme: StepScheme
    x0: Array
    signal: SwitchingSignal
    modes: tuple = ()
    maps: tuple = ()
    layout: AgentLayout | None = None
    anchor: Array | None = None          # common decrease anchor
    mode_anchors: tuple | None = None    # per-mode anchors (default: anchor)
    residual_sets: tuple | None = None   # W_q = distance to set, per mode
    checks: tuple = ()
    seed: int = 0
    description: str = ""

    def __post_init__(self):
        self.x0 = np.asarray(self.x0, dtype=float)
        if self.kind not in ("subgradient", "monotone"):
            raise ValueError(f"unknown scenario kind {self.kind!r}")
        count = len(self.modes) if self.kind == "subgradient" else \
            len(self.maps)
        if count == 0:
            raise ValueError("scenario has no modes")
        if int(self.signal.modes.max()) >= count:
            raise ValueError("signal references a mode index out of range")

    def mode_count(self) -> int:
        return len(self.modes) if self.kind == "subgradient" else \
            len(self.maps)

    def anchors_per_mode(self):
        if self.mode_anchors is not None:
            return [np.asarray(a, dtype=float) for a in self.mode_anchors]
        if self.anchor is None:
            return None
        return [np.asarray(self.anchor, dtype=float)] * self.mode_count()


# ---------------------------------------------------------------------------
# small builders


def _quad() -> PNormCoupling:
    return PNormCoupling(2, squared=True)


def _pair_graph(agents: int, edges) -> WeightedGraph:
    return WeightedGraph.from_edges(agents, edges)


def _consensus_mode(layout, edges, coupling=None, local_terms=(),
                    constraint=None, name="") -> ModeDescriptor:
    graph = _pair_graph(layout.agents, edges)
    obj = ObjectiveDescriptor(
        layout=layout,
        coupling=coupling if coupling is not None else _quad(),
        graph=graph,
        local_terms=tuple(local_terms),
    )
    cset = constraint if constraint is not None else WholeSpace(layout.size)
    return ModeDescriptor(objective=obj, constraint=cset, name=name)


def _tile(layout: AgentLayout, point) -> Array:
    return np.tile(np.asarray(point, dtype=float), layout.agents)


# ---------------------------------------------------------------------------
# preset scenarios


def _example1_p2() -> Scenario:
    layout = AgentLayout(2, 1)
    mode = _consensus_mode(layout, [(0, 1, 1.0)], name="pair-quadratic")
    return Scenario(
        name="example1_p2",
        kind="subgradient",
        horizon=5.0,
        scheme=StepScheme("explicit", 1e-3),
        x0=np.array([1.0, 0.0]),
        signal=make_constant(),
        modes=(mode,),
        layout=layout,
        anchor=np.array([0.5, 0.5]),
        checks=(
            CheckSpec("lyapunov"),
            CheckSpec("nonexpansiveness"),
            CheckSpec("conservation", params={"tol_per_time": 1e-9}),
            CheckSpec("consensus", params={"tol": 1e-4}),
            CheckSpec("limit_at", params={"point": [0.5, 0.5], "tol": 1e-4}),
            CheckSpec("limit_detect", params={"eps": 1e-3}),
            CheckSpec("residual_all", params={"eps": 1e-5}),
        ),
        description=(
            "Two agents, quadratic coupling on one unit edge.  The "
            "difference obeys d' = -2d, so both agents reach the initial "
            "midpoint with rate e^{-2t}."
        ),
    )


def _example1_p1_sign() -> Scenario:
    layout = AgentLayout(2, 1)
    mode = _consensus_mode(layout, [(0, 1, 1.0)],
                           coupling=PNormCoupling(1, squared=False),
                           name="pair-absolute")
    return Scenario(
        name="example1_p1_sign",
        kind="subgradient",
        horizon=5.0,
        scheme=StepScheme("proximal", 1e-3),
        x0=np.array([1.0, 0.0]),
        signal=make_constant(),
        modes=(mode,),
        layout=layout,
        anchor=np.array([0.5, 0.5]),
        checks=(
            CheckSpec("lyapunov"),
            CheckSpec("nonexpansiveness"),
            CheckSpec("conservation", params={"tol_per_time": 1e-9}),
            CheckSpec("consensus", params={"tol": 1e-4}),
            CheckSpec("limit_at", params={"point": [0.5, 0.5], "tol": 1e-4}),
            CheckSpec("limit_detect", params={"eps": 1e-6}),
            CheckSpec("residual_all", params={"eps": 1e-5}),
        ),
        description=(
            "Two agents, absolute-value coupling: the difference moves at "
            "unit speed and hits exact consensus at t = |x1(0)-x2(0)|.  The "
            "proximal scheme reproduces the finite-time arrival exactly "
            "(soft threshold), with no terminal chatter."
        ),
    )


def _example2_infnorm() -> Scenario:
    layout = AgentLayout(2, 2)
    mode = _consensus_mode(layout, [(0, 1, 1.0)],
                           coupling=InfNormCoupling(squared=True),
                           name="pair-maxnorm")
    return Scenario(
        name="example2_infnorm",
        kind="subgradient",
        horizon=20.0,
        scheme=StepScheme("explicit", 1e-3),
        x0=np.array([1.0, 0.5, 0.0, 0.0]),
        signal=make_constant(),
        modes=(mode,),
        layout=layout,
        anchor=np.array([0.5, 0.25, 0.5, 0.25]),
        checks=(
            CheckSpec("lyapunov"),
            CheckSpec("nonexpansiveness"),
            CheckSpec("conservation", params={"tol_per_time": 1e-9}),
            CheckSpec("consensus", params={"tol": 1e-4}),
            CheckSpec("limit_at",
                      params={"point": [0.5, 0.25, 0.5, 0.25], "tol": 1e-4}),
            CheckSpec("limit_detect", params={"eps": 1e-5}),
            CheckSpec("residual_all", params={"eps": 1e-5}),
        ),
        description=(
            "Two planar agents coupled through the squared max norm: only "
            "the largest coordinate gap contracts at any instant, so the "
            "gap coordinates decay one at a time until they tie, then "
            "shrink together to the coordinate-wise midpoint."
        ),
    )


def _example3_switched_quadratic() -> Scenario:
    layout = AgentLayout(3, 1)
    mode01 = _consensus_mode(layout, [(0, 1, 1.0)], name="edge-01")
    mode12 = _consensus_mode(layout, [(1, 2, 1.0)], name="edge-12")
    return Scenario(
        name="example3_switched_quadratic",
        kind="subgradient",
        horizon=100.0,
        scheme=StepScheme("explicit", 1e-3),
        x0=np.array([1.0, 0.0, -1.0]),
        signal=make_round_robin(2, dwell=0.5, horizon=100.0),
        modes=(mode01, mode12),
        layout=layout,
        anchor=np.array([0.0, 0.0, 0.0]),
        checks=(
            CheckSpec("lyapunov"),
            CheckSpec("nonexpansiveness"),
            CheckSpec("conservation", params={"tol_per_time": 1e-9}),
            CheckSpec("consensus", params={"tol": 1e-4}),
            CheckSpec("limit_at",
                      params={"point": [0.0, 0.0, 0.0], "tol": 1e-4}),
            CheckSpec("limit_detect", params={"eps": 1e-5}),
            CheckSpec("residual_all", params={"eps": 1e-5}),
        ),
        description=(
            "Three agents, two single-edge modes alternating every 0.5 "
            "time units.  Neither edge set is connected alone but their "
            "union is, so the team still reaches consensus; the sum is "
            "conserved, pinning the limit at the initial average."
        ),
    )


def _example4_local_terms() -> Scenario:
    layout = AgentLayout(3, 1)
    locals_ = tuple((i, IsotropicQuadratic(weight=1.0, center=[1.0]))
                    for i in range(3))
    mode = _consensus_mode(
        layout, [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)],
        local_terms=locals_, name="wells")
    return Scenario(
        name="example4_local_terms",
        kind="subgradient",
        horizon=20.0,
        scheme=StepScheme("explicit", 1e-3),
        x0=np.array([2.0, 0.5, -1.0]),
        signal=make_constant(),
        modes=(mode,),
        layout=layout,
        anchor=np.array([1.0, 1.0, 1.0]),
        checks=(
            CheckSpec("lyapunov"),
            CheckSpec("nonexpansiveness"),
            CheckSpec("consensus", params={"tol": 1e-4}),
            CheckSpec("limit_at",
                      params={"point": [1.0, 1.0, 1.0], "tol": 1e-4}),
            CheckSpec("limit_detect", params={"eps": 1e-5}),
            CheckSpec("residual_all", params={"eps": 1e-5}),
        ),
        description=(
            "Complete coupling plus one quadratic well per agent, all "
            "centered at 1: the team objective has the unique minimizer "
            "(1, 1, 1) and the strongly convex flow converges there."
        ),
    )


def _example4_set_intersection() -> Scenario:
    layout = AgentLayout(2, 1)
    d1 = Box([0.0], [2.0])
    d2 = Box([1.0], [3.0])
    locals_ = ((0, SquaredDistance(d1, weight=1.0)),
               (1, SquaredDistance(d2, weight=1.0)))
    mode = _consensus_mode(layout, [(0, 1, 1.0)], local_terms=locals_,
                           name="intersection-penalty")
    return Scenario(
        name="example4_set_intersection",
        kind="subgradient",
        horizon=40.0,
        scheme=StepScheme("explicit", 1e-3),
        x0=np.array([-1.0, 4.0]),
        signal=make_constant(),
        modes=(mode,),
        layout=layout,
        anchor=np.array([1.5, 1.5]),
        checks=(
            CheckSpec("lyapunov"),
            CheckSpec("nonexpansiveness"),
            CheckSpec("consensus", params={"tol": 1e-5}),
            CheckSpec("limit_consensus_in_box",
                      params={"lo": [1.0], "hi": [2.0], "tol": 1e-5}),
            CheckSpec("limit_detect", params={"eps": 1e-5}),
            CheckSpec("residual_all", params={"eps": 1e-5}),
        ),
        description=(
            "Two agents, one holding interval [0,2] and the other [1,3] "
            "through half-squared-distance penalties, plus a quadratic "
            "coupling edge: the flow settles on a common point of the "
            "intersection [1,2]."
        ),
    )


def _example5_projected_boxes() -> Scenario:
    layout = AgentLayout(3, 2)
    boxes = (Box([0.0, 0.0], [2.0, 2.0]),
             Box([1.0, -1.0], [3.0, 2.0]),
             Box([0.5, 0.0], [2.5, 4.0]))
    constraint = Product(boxes)
    mode = _consensus_mode(
        layout, [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)],
        constraint=constraint, name="boxes")
    return Scenario(
        name="example5_projected_boxes",
        kind="subgradient",
        horizon=40.0,
        scheme=StepScheme("explicit", 1e-3),
        x0=np.array([0.0, 0.0, 3.0, 2.0, 2.5, 4.0]),
        signal=make_constant(),
        modes=(mode,),
        layout=layout,
        anchor=_tile(layout, [1.5, 1.0]),
        checks=(
            CheckSpec("lyapunov"),
            CheckSpec("nonexpansiveness"),
            CheckSpec("feasible_throughout", params={"tol": 1e-6}),
            CheckSpec("consensus", params={"tol": 1e-4}),
            CheckSpec("limit_consensus_in_box",
                      params={"lo": [1.0, 0.0], "hi": [2.0, 2.0],
                              "tol": 1e-5}),
            CheckSpec("limit_detect", params={"eps": 1e-5}),
            CheckSpec("residual_all", params={"eps": 1e-5}),
        ),
        description=(
            "Each agent is confined to its own planar box (projection "
            "applied agent-wise, so it is computable locally); the boxes "
            "overlap on [1,2]x[0,2] and the coupled flow meets there."
        ),
    )


def _corollary_a_infty() -> Scenario:
    layout = AgentLayout(3, 1)
    mode01 = _consensus_mode(layout, [(0, 1, 1.0)], name="edge-01")
    mode12 = _consensus_mode(layout, [(1, 2, 1.0)], name="edge-12")
    signal = SwitchingSignal(breakpoints=np.array([0.0, 1.0]),
                             modes=np.array([1, 0]))
    return Scenario(
        name="corollary_A_infty",
        kind="subgradient",
        horizon=100.0,
        scheme=StepScheme("explicit", 1e-3),
        x0=np.array([0.0, 0.0, 3.0]),
        signal=signal,
        modes=(mode01, mode12),
        layout=layout,
        anchor=np.array([1.0, 1.0, 1.0]),
        checks=(
            CheckSpec("lyapunov"),
            CheckSpec("nonexpansiveness"),
            CheckSpec("conservation", params={"tol_per_time": 1e-9}),
            CheckSpec("residual_persistent", params={"eps": 1e-5}),
            CheckSpec("consensus", expect=False, params={"tol": 0.1}),
            CheckSpec("limit_in_persistent_argmin", params={"tol": 1e-4}),
            CheckSpec("limit_detect", params={"eps": 1e-5}),
        ),
        description=(
            "Edge {1,2} acts only on [0,1); edge {0,1} acts forever after. "
            "The limit equalizes agents 0 and 1 (the persistently active "
            "requirement) but keeps agent 2 displaced, so the run settles "
            "in the persistent minimizer set without global consensus."
        ),
    )


def _timevarying_sin_weights() -> Scenario:
    layout = AgentLayout(3, 1)

    def sin_graph(edges):
        k = layout.agents
        base = np.zeros((k, k))
        amp = np.zeros((k, k))
        freq = np.zeros((k, k))
        phase = np.zeros((k, k))
        for i, j, f, p in edges:
            base[i, j] = base[j, i] = 1.0
            amp[i, j] = amp[j, i] = 0.5
            freq[i, j] = freq[j, i] = f
            phase[i, j] = phase[j, i] = p
        return WeightedGraph(
            layout.agents,
            sinusoid=SinusoidWeights(base=base, amp=amp, freq=freq,
                                     phase=phase),
        )

    def sin_mode(edges, name):
        obj = ObjectiveDescriptor(layout=layout, coupling=_quad(),
                                  graph=sin_graph(edges), local_terms=())
        return ModeDescriptor(objective=obj,
                              constraint=WholeSpace(layout.size), name=name)

    mode_a = sin_mode([(0, 1, 1.0, 0.0), (1, 2, 1.3, 1.0)], "path-012")
    mode_b = sin_mode([(0, 2, 0.7, 2.0), (1, 2, 1.1, 0.5)], "path-021")
    return Scenario(
        name="timevarying_sin_weights",
        kind="subgradient",
        horizon=100.0,
        scheme=StepScheme("explicit", 1e-3),
        x0=np.array([2.0, -1.0, 2.0]),
        signal=make_round_robin(2, dwell=0.5, horizon=100.0),
        modes=(mode_a, mode_b),
        layout=layout,
        anchor=np.array([1.0, 1.0, 1.0]),
        checks=(
            CheckSpec("lyapunov"),
            CheckSpec("nonexpansiveness"),
            CheckSpec("conservation", params={"tol_per_time": 1e-9}),
            CheckSpec("consensus", params={"tol": 1e-4}),
            CheckSpec("limit_at",
                      params={"point": [1.0, 1.0, 1.0], "tol": 1e-4}),
            CheckSpec("limit_detect", params={"eps": 1e-5}),
            CheckSpec("residual_all", params={"eps": 1e-5}),
            CheckSpec("envelope",
                      params={"samples": 10_000, "seed": 0,
                              "half_width": 3.0, "tol": 1e-9}),
        ),
        description=(
            "Two connected-path modes whose edge weights oscillate "
            "sinusoidally inside [0.5, 1.5].  The positive lower envelope "
            "keeps every active edge effective, so consensus at the "
            "(conserved) average is reached; the envelope objective lower "
            "bounds the true objective at every sampled time."
        ),
    )


def _demipositive_saddle() -> Scenario:
    return Scenario(
        name="demipositive_saddle",
        kind="monotone",
        horizon=20.0,
        scheme=StepScheme("explicit", 1e-3),
        x0=np.array([1.5, -1.0]),
        signal=make_constant(),
        maps=(saddle_flow_map(1.0, 1.0, 1.0, name="strict-saddle"),),
        anchor=np.array([0.0, 0.0]),
        checks=(
            CheckSpec("lyapunov"),
            CheckSpec("nonexpansiveness"),
            CheckSpec("limit_at", params={"point": [0.0, 0.0], "tol": 1e-4}),
            CheckSpec("limit_detect", params={"eps": 1e-5}),
            CheckSpec("demipositivity", expect=False,
                      params={"samples": 10_000, "seed": 0,
                              "half_width": 2.0}),
        ),
        description=(
            "Saddle flow of L(x,y) = x^2 + xy - y^2 (strictly convex in x, "
            "strictly concave in y): the map is strongly monotone, no "
            "demipositivity witness exists, and the spiral converges to "
            "the saddle point at the origin."
        ),
    )


def _demipositive_violation_probe() -> Scenario:
    return Scenario(
        name="demipositive_violation_probe",
        kind="monotone",
        horizon=20.0,
        scheme=StepScheme("explicit", 1e-3),
        x0=np.array([1.5, -1.0]),
        signal=make_constant(),
        maps=(saddle_flow_map(1.0, 1.0, 0.0, name="degenerate-saddle"),),
        anchor=np.array([0.0, 0.0]),
        checks=(
            CheckSpec("lyapunov"),
            CheckSpec("nonexpansiveness"),
            CheckSpec("limit_at", params={"point": [0.0, 0.0], "tol": 1e-4}),
            CheckSpec("limit_detect", params={"eps": 1e-5}),
            CheckSpec("demipositivity", expect=True,
                      params={"samples": 10_000, "seed": 0,
                              "half_width": 2.0}),
        ),
        description=(
            "Map (2x+y, -x) of the saddle function x^2 + xy (only linear "
            "in y): still monotone, and this linear flow happens to "
            "converge, but the probe exhibits the witness (0, 1) where "
            "motion pairs to zero against the anchor while M is nonzero - "
            "demipositivity fails."
        ),
    )


def _counterexample_rotation() -> Scenario:
    inf = np.inf
    quadrants = (
        Box([0.0, -inf], [inf, 0.0]),    # x >= 0, y <= 0
        Box([-inf, -inf], [0.0, 0.0]),   # x <= 0, y <= 0
        Box([-inf, 0.0], [0.0, inf]),    # x <= 0, y >= 0
        Box([0.0, 0.0], [inf, inf]),     # x >= 0, y >= 0
    )
    half_pi = math.pi / 2.0
    signal = SwitchingSignal(
        breakpoints=np.array([0.0, half_pi, 2 * half_pi, 3 * half_pi]),
        modes=np.array([0, 1, 2, 3]),
    )
    rot = rotation_map()
    origin = np.array([0.0, 0.0])
    return Scenario(
        name="counterexample_rotation",
        kind="monotone",
        horizon=2.0 * math.pi,
        scheme=StepScheme("explicit", 1e-4),
        x0=np.array([1.0, 0.0]),
        signal=signal,
        maps=(rot, rot, rot, rot),
        anchor=origin,
        mode_anchors=(origin, origin, origin, origin),
        residual_sets=quadrants,
        checks=(
            # the discrete orbit lags the true phase by pi*h^2/6 per quarter
            # turn, so the k-th switch node sits k*pi*h^2/6 (up to ~1.6e-8
            # at h=1e-4) outside the incoming quadrant; the decrease check
            # carries an h^2-sized absolute allowance to cover that
            CheckSpec("lyapunov", params={"atol": 5e-8}),
            CheckSpec("nonexpansiveness"),
            CheckSpec("radius_band", params={"lo": 1.0, "hi": 1.0 + 5e-4}),
            CheckSpec("limit_detect", expect=False, params={"eps": 1e-5}),
        ),
        description=(
            "Clockwise unit rotation with four modes whose residuals "
            "measure the distance to the quadrant currently hosting the "
            "orbit.  Every decrease hypothesis checks out (both sides of "
            "the bound vanish), yet the state circles forever: the "
            "conclusion genuinely needs the missing common-minimizer "
            "hypothesis, not just the bookkeeping ones."
        ),
    )


_PRESET_BUILDERS = {
    "example1_p2": _example1_p2,
    "example1_p1_sign": _example1_p1_sign,
    "example2_infnorm": _example2_infnorm,
    "example3_switched_quadratic": _example3_switched_quadratic,
    "example4_local_terms": _example4_local_terms,
    "example4_set_intersection": _example4_set_intersection,
    "example5_projected_boxes": _example5_projected_boxes,
    "corollary_A_infty": _corollary_a_infty,
    "timevarying_sin_weights": _timevarying_sin_weights,
    "demipositive_saddle": _demipositive_saddle,
    "demipositive_violation_probe": _demipositive_violation_probe,
    "counterexample_rotation": _counterexample_rotation,
}

PRESET_NAMES = tuple(_PRESET_BUILDERS)


def preset(name: str) -> Scenario:
    try:
        builder = _PRESET_BUILDERS[name]
    except KeyError:
        known = ", ".join(PRESET_NAMES)
        raise UnknownPreset(f"{name!r}; known presets: {known}") from None
    return builder()


# ---------------------------------------------------------------------------
# randomized scenarios (for the decrease/nonexpansiveness suites)


def random_scenario(seed: int, horizon: float = 5.0,
                    h: float = 1e-3) -> Scenario:
    """A random consensus scenario with a known common minimizer.

    Couplings, weights, per-agent wells, an optional shared box constraint
    and the switching signal are all drawn from the seed; the wells and
    the box are centered on a common consensus point, so the anchor is an
    exact minimizer of every mode and the decrease checks apply.
    """
    rng = np.random.default_rng(seed)
    k = int(rng.integers(2, 5))
    m = int(rng.integers(1, 3))
    layout = AgentLayout(k, m)
    center = rng.uniform(-1.0, 1.0, m)
    anchor = np.tile(center, k)

    n_modes = int(rng.integers(1, 4))
    if rng.random() < 0.3:
        box = Box(center - 1.5, center + 1.5)
        constraint: ConvexSet = Product(tuple(box for _ in range(k)))
    else:
        constraint = WholeSpace(layout.size)
    modes = []
    for _ in range(n_modes):
        order = rng.permutation(k)
        edges = []
        for a, b in zip(order[:-1], order[1:]):
            edges.append((int(a), int(b), float(rng.uniform(0.5, 1.5))))
        extra = int(rng.integers(0, k))
        for _ in range(extra):
            i, j = rng.integers(0, k, 2)
            if i != j and not any({int(i), int(j)} == {e[0], e[1]}
                                  for e in edges):
                edges.append((int(i), int(j), float(rng.uniform(0.5, 1.5))))
        roll = rng.random()
        if roll < 0.4:
            coupling = _quad()
        elif roll < 0.7:
            coupling = PNormCoupling(1, squared=False)
        else:
            coupling = InfNormCoupling(squared=True)
        local_terms = []
        if rng.random() < 0.5:
            for i in range(k):
                if rng.random() < 0.6:
                    local_terms.append(
                        (i, IsotropicQuadratic(
                            weight=float(rng.uniform(0.5, 1.5)),
                            center=center)))
        modes.append(_consensus_mode(layout, edges, coupling=coupling,
                                     local_terms=tuple(local_terms),
                                     constraint=constraint))

    if n_modes == 1:
        signal = make_constant()
    elif rng.random() < 0.5:
        signal = make_round_robin(n_modes, dwell=float(rng.uniform(0.2, 0.8)),
                                  horizon=horizon)
    else:
        signal = make_random_dwell(n_modes, (0.2, 0.8), horizon=horizon,
                                   seed=int(rng.integers(0, 2**31)))

    x0 = rng.uniform(-2.5, 2.5, layout.size)
    x0 = modes[int(signal.mode_at(0.0))].constraint.project(x0)
    return Scenario(
        name=f"random-{seed}",
        kind="subgradient",
        horizon=horizon,
        scheme=StepScheme("explicit", h),
        x0=x0,
        signal=signal,
        modes=tuple(modes),
        layout=layout,
        anchor=anchor,
        checks=(CheckSpec("lyapunov"), CheckSpec("nonexpansiveness")),
        seed=seed,
        description="randomized consensus scenario with a shared minimizer",
    )


# ---------------------------------------------------------------------------
# JSON configs


def _req(cfg: dict, key: str, path: str):
    if key not in cfg:
        raise ConfigInvalid(f"{path}.{key}" if path else key,
                            "required field is missing")
    return cfg[key]


def _floats(value, path: str) -> Array:
    try:
        arr = np.asarray(value, dtype=float)
    except (TypeError, ValueError):
        raise ConfigInvalid(path, "expected an array of numbers") from None
    return arr


def _parse_coupling(cfg, path: str):
    if cfg is None:
        return None
    kind = _req(cfg, "kind", path)
    if kind == "none":
        return None
    if kind == "pnorm":
        p = cfg.get("p", 2)
        if p not in (1, 2):
            raise ConfigInvalid(f"{path}.p", "supported p values are 1 and 2")
        return PNormCoupling(int(p), squared=bool(cfg.get("squared", p == 2)))
    if kind == "infnorm":
        return InfNormCoupling(squared=bool(cfg.get("squared", True)))
    raise ConfigInvalid(f"{path}.kind", f"unknown coupling kind {kind!r}")


def _parse_graph(cfg, agents: int, path: str):
    if cfg is None:
        return None
    if "sinusoid" in cfg:
        scfg = cfg["sinusoid"]
        shape = (agents, agents)
        base = np.zeros(shape)
        amp = np.zeros(shape)
        freq = np.zeros(shape)
        phase = np.zeros(shape)
        for idx, entry in enumerate(_req(scfg, "edges", f"{path}.sinusoid")):
            epath = f"{path}.sinusoid.edges[{idx}]"
            try:
                i, j = int(entry["i"]), int(entry["j"])
            except (KeyError, TypeError, ValueError):
                raise ConfigInvalid(epath, "need integer fields i and j") \
                    from None
            if not (0 <= i < agents and 0 <= j < agents) or i == j:
                raise ConfigInvalid(epath, "edge endpoints out of range")
            base[i, j] = base[j, i] = float(entry.get("base", 1.0))
            amp[i, j] = amp[j, i] = float(entry.get("amp", 0.0))
            freq[i, j] = freq[j, i] = float(entry.get("freq", 1.0))
            phase[i, j] = phase[j, i] = float(entry.get("phase", 0.0))
        try:
            sin = SinusoidWeights(base=base, amp=amp, freq=freq, phase=phase)
            return WeightedGraph(agents, sinusoid=sin)
        except ValueError as exc:
            raise ConfigInvalid(f"{path}.sinusoid", str(exc)) from None
    edges = _req(cfg, "edges", path)
    parsed = []
    for idx, entry in enumerate(edges):
        epath = f"{path}.edges[{idx}]"
        if not isinstance(entry, (list, tuple)) or len(entry) != 3:
            raise ConfigInvalid(epath, "expected [i, j, weight]")
        i, j, w = entry
        parsed.append((int(i), int(j), float(w)))
    try:
        return WeightedGraph.from_edges(agents, parsed)
    except ValueError as exc:
        raise ConfigInvalid(f"{path}.edges", str(exc)) from None


def _parse_local_terms(cfg, m: int, agents: int, path: str):
    terms = []
    for idx, entry in enumerate(cfg or []):
        epath = f"{path}[{idx}]"
        agent = int(_req(entry, "agent", epath))
        if not (0 <= agent < agents):
            raise ConfigInvalid(f"{epath}.agent", "agent index out of range")
        kind = _req(entry, "kind", epath)
        weight = float(entry.get("weight", 1.0))
        if kind == "iso_quad":
            center = _floats(_req(entry, "center", epath), f"{epath}.center")
            if center.shape != (m,):
                raise ConfigInvalid(f"{epath}.center",
                                    f"expected {m} coordinates")
            terms.append((agent, IsotropicQuadratic(weight=weight,
                                                    center=center)))
        elif kind == "sq_dist_box":
            lo = _floats(_req(entry, "lo", epath), f"{epath}.lo")
            hi = _floats(_req(entry, "hi", epath), f"{epath}.hi")
            if lo.shape != (m,) or hi.shape != (m,):
                raise ConfigInvalid(epath, f"expected {m}-coordinate bounds")
            terms.append((agent, SquaredDistance(Box(lo, hi),
                                                 weight=weight)))
        else:
            raise ConfigInvalid(f"{epath}.kind",
                                f"unknown local term kind {kind!r}")
    return tuple(terms)


def _parse_constraint(cfg, layout: AgentLayout, path: str) -> ConvexSet:
    if cfg is None:
        return WholeSpace(layout.size)
    kind = _req(cfg, "kind", path)
    if kind == "whole":
        return WholeSpace(layout.size)
    if kind == "box":
        lo = _floats(_req(cfg, "lo", path), f"{path}.lo")
        hi = _floats(_req(cfg, "hi", path), f"{path}.hi")
        if lo.shape != (layout.size,) or hi.shape != (layout.size,):
            raise ConfigInvalid(path, f"expected {layout.size}-coordinate "
                                      f"bounds")
        return Box(lo, hi)
    if kind == "ball":
        center = _floats(_req(cfg, "center", path), f"{path}.center")
        if center.shape != (layout.size,):
            raise ConfigInvalid(f"{path}.center",
                                f"expected {layout.size} coordinates")
        return Ball(center, float(_req(cfg, "radius", path)))
    if kind == "product_box":
        lo = _floats(_req(cfg, "lo", path), f"{path}.lo")
        hi = _floats(_req(cfg, "hi", path), f"{path}.hi")
        want = (layout.agents, layout.dim)
        if lo.shape != want or hi.shape != want:
            raise ConfigInvalid(path, f"expected bounds of shape {want}")
        return Product(tuple(Box(lo[i], hi[i])
                             for i in range(layout.agents)))
    raise ConfigInvalid(f"{path}.kind", f"unknown constraint kind {kind!r}")


def _parse_signal(cfg, horizon: float, path: str) -> SwitchingSignal:
    if cfg is None:
        return make_constant()
    kind = _req(cfg, "kind", path)
    try:
        if kind == "constant":
            return make_constant(int(cfg.get("mode", 0)))
        if kind == "round_robin":
            return make_round_robin(int(_req(cfg, "modes", path)),
                                    dwell=float(_req(cfg, "dwell", path)),
                                    horizon=horizon)
        if kind == "random_dwell":
            return make_random_dwell(
                int(_req(cfg, "modes", path)),
                (float(cfg.get("min_dwell", 0.2)),
                 float(cfg.get("max_dwell", 1.0))),
                horizon=horizon,
                seed=int(cfg.get("seed", 0)))
        if kind == "explicit":
            return SwitchingSignal(
                breakpoints=_floats(_req(cfg, "breakpoints", path),
                                    f"{path}.breakpoints"),
                modes=np.asarray(_req(cfg, "modes", path), dtype=np.int64),
            )
    except ConfigInvalid:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigInvalid(path, str(exc)) from None
    raise ConfigInvalid(f"{path}.kind", f"unknown signal kind {kind!r}")


def _parse_map(cfg, path: str) -> MonotoneMapDescriptor:
    kind = _req(cfg, "kind", path)
    if kind == "rotation":
        return rotation_map()
    if kind == "saddle":
        return saddle_flow_map(float(cfg.get("convex_x", 1.0)),
                               float(cfg.get("cross", 1.0)),
                               float(cfg.get("concave_y", 1.0)))
    if kind == "linear":
        matrix = _floats(_req(cfg, "matrix", path), f"{path}.matrix")
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise ConfigInvalid(f"{path}.matrix", "expected a square matrix")
        return linear_map(matrix)
    raise ConfigInvalid(f"{path}.kind", f"unknown map kind {kind!r}")


def _parse_checks(cfg, path: str):
    checks = []
    for idx, entry in enumerate(cfg or []):
        epath = f"{path}[{idx}]"
        if not isinstance(entry, dict):
            raise ConfigInvalid(epath, "expected a check object")
        kind = _req(entry, "kind", epath)
        expect = bool(entry.get("expect", True))
        params = {k: v for k, v in entry.items()
                  if k not in ("kind", "expect")}
        checks.append(CheckSpec(str(kind), expect=expect, params=params))
    return tuple(checks)


def scenario_from_config(cfg: dict) -> Scenario:
    if not isinstance(cfg, dict):
        raise ConfigInvalid("$", "top-level config must be an object")
    schema = cfg.get("schema")
    if schema != CONFIG_SCHEMA:
        raise ConfigInvalid("schema",
                            f"expected {CONFIG_SCHEMA!r}, got {schema!r}")
    horizon = float(_req(cfg, "horizon", ""))
    if horizon <= 0:
        raise ConfigInvalid("horizon", "must be positive")
    icfg = cfg.get("integrator", {})
    try:
        scheme = StepScheme(str(icfg.get("scheme", "explicit")),
                            float(icfg.get("h", 1e-3)))
    except ValueError as exc:
        raise ConfigInvalid("integrator", str(exc)) from None

    kind = cfg.get("kind", "subgradient")
    signal = _parse_signal(cfg.get("signal"), horizon, "signal")
    x0 = _floats(_req(cfg, "x0", ""), "x0")
    checks = _parse_checks(cfg.get("checks"), "checks")
    anchor = None
    if cfg.get("anchor") is not None:
        anchor = _floats(cfg["anchor"], "anchor")
    needs_anchor = {"lyapunov", "nonexpansiveness"}
    if anchor is None and any(c.kind in needs_anchor for c in checks):
        raise ConfigInvalid("anchor",
                            "decrease checks need an anchor point")

    if kind == "monotone":
        maps_cfg = _req(cfg, "maps", "")
        if not maps_cfg:
            raise ConfigInvalid("maps", "need at least one map")
        maps = tuple(_parse_map(mc, f"maps[{i}]")
                     for i, mc in enumerate(maps_cfg))
        if x0.shape != (maps[0].dim,):
            raise ConfigInvalid("x0", f"expected {maps[0].dim} coordinates")
        try:
            return Scenario(
                name=str(cfg.get("name", "config")),
                kind="monotone",
                horizon=horizon,
                scheme=scheme,
                x0=x0,
                signal=signal,
                maps=maps,
                anchor=anchor,
                checks=checks,
                seed=int(cfg.get("seed", 0)),
            )
        except ValueError as exc:
            raise ConfigInvalid("$", str(exc)) from None

    if kind != "subgradient":
        raise ConfigInvalid("kind", f"unknown scenario kind {kind!r}")
    acfg = _req(cfg, "agents", "")
    try:
        layout = AgentLayout(int(_req(acfg, "count", "agents")),
                             int(_req(acfg, "dim", "agents")))
    except (TypeError, ValueError) as exc:
        raise ConfigInvalid("agents", str(exc)) from None
    if x0.shape != (layout.size,):
        raise ConfigInvalid("x0", f"expected {layout.size} coordinates")

    modes_cfg = _req(cfg, "modes", "")
    if not modes_cfg:
        raise ConfigInvalid("modes", "need at least one mode")
    modes = []
    for i, mcfg in enumerate(modes_cfg):
        mpath = f"modes[{i}]"
        coupling = _parse_coupling(mcfg.get("coupling"), f"{mpath}.coupling")
        graph = _parse_graph(mcfg.get("graph"), layout.agents,
                             f"{mpath}.graph")
        if coupling is not None and graph is None:
            raise ConfigInvalid(f"{mpath}.graph",
                                "coupling requires a graph")
        local_terms = _parse_local_terms(mcfg.get("local_terms"),
                                         layout.dim, layout.agents,
                                         f"{mpath}.local_terms")
        constraint = _parse_constraint(mcfg.get("constraint"), layout,
                                       f"{mpath}.constraint")
        try:
            obj = ObjectiveDescriptor(layout=layout, coupling=coupling,
                                      graph=graph, local_terms=local_terms)
            modes.append(ModeDescriptor(objective=obj, constraint=constraint,
                                        name=str(mcfg.get("name", ""))))
        except Exception as exc:
            raise ConfigInvalid(mpath, str(exc)) from None
    try:
        return Scenario(
            name=str(cfg.get("name", "config")),
            kind="subgradient",
            horizon=horizon,
            scheme=scheme,
            x0=x0,
            signal=signal,
            modes=tuple(modes),
            layout=layout,
            anchor=anchor,
            checks=checks,
            seed=int(cfg.get("seed", 0)),
        )
    except ValueError as exc:
        raise ConfigInvalid("$", str(exc)) from None


def load_config(path: str) -> Scenario:
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except OSError as exc:
        raise ConfigInvalid("$", f"cannot read config: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigInvalid("$", f"invalid JSON: {exc}") from None
    return scenario_from_config(cfg)
