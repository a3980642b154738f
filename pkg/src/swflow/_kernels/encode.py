"""Flattening of a mode into plain arrays the stepping kernels understand.

Only the common fast-path structure is encodable: the four core couplings,
at most one isotropic-quadratic or half-squared-distance local term per
agent, and box/ball/halfspace-shaped sets.  ``encode_mode`` returns None
for anything else, which routes the mode through the generic Python step.

Kernel tie conventions (both backends): the sign coupling uses sign(0) = 0
per coordinate and the max-norm coupling moves the first maximal
coordinate.  These are particular subgradient selections that coincide
with the least-norm selection away from ties, so they only matter on a
measure-zero set of states.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

F8 = NDArray[np.float64]
I4 = NDArray[np.int32]

COUPLING_NONE = 0
COUPLING_QUAD = 1
COUPLING_SIGN = 2
COUPLING_INFSQ = 3

SET_WHOLE = 0
SET_BOX = 1
SET_BALL = 2
SET_HALFSPACE = 3

LOCAL_NONE = 0
LOCAL_HALF_SQ_DIST = 1
LOCAL_ISO_QUAD = 2

CON_WHOLE = 0
CON_BOX = 1
CON_BALL = 2
CON_HALFSPACE = 3
CON_PRODUCT = 4

DIVERGE_NORM = 1e9


@dataclass
class KernelModeSpec:
    agents: int
    dim: int            # per-agent dimension m
    size: int           # total state dimension k*m
    coupling: int
    time_varying: int
    edges_i: I4
    edges_j: I4
    w_base: F8
    w_amp: F8
    w_freq: F8
    w_phase: F8
    loc_kind: I4
    loc_weight: F8
    loc_center: F8      # (k, m)
    loc_set_kind: I4
    loc_box_lo: F8      # (k, m)
    loc_box_hi: F8
    loc_ball_c: F8
    loc_ball_r: F8      # (k,)
    loc_hs_n: F8
    loc_hs_b: F8
    con_kind: int
    con_box_lo: F8      # (size,)
    con_box_hi: F8
    con_ball_c: F8
    con_ball_r: float
    con_hs_n: F8
    con_hs_b: float
    pro_set_kind: I4
    pro_box_lo: F8      # (k, m)
    pro_box_hi: F8
    pro_ball_c: F8
    pro_ball_r: F8
    pro_hs_n: F8
    pro_hs_b: F8


def _zeros(shape):
    return np.zeros(shape, dtype=np.float64)


def _encode_primitive(cset, m):
    """(kind, box_lo, box_hi, ball_c, ball_r, hs_n, hs_b) or None."""
    from ..sets import Ball, Box, Halfspace, WholeSpace

    box_lo, box_hi = _zeros(m), _zeros(m)
    ball_c, hs_n = _zeros(m), _zeros(m)
    ball_r, hs_b = 0.0, 0.0
    if isinstance(cset, WholeSpace):
        kind = SET_WHOLE
    elif isinstance(cset, Box):
        kind = SET_BOX
        box_lo, box_hi = cset.lower.copy(), cset.upper.copy()
    elif isinstance(cset, Ball):
        kind = SET_BALL
        ball_c, ball_r = cset.center.copy(), cset.radius
    elif isinstance(cset, Halfspace):
        kind = SET_HALFSPACE
        hs_n, hs_b = cset.normal.copy(), cset.offset
    else:
        return None
    return kind, box_lo, box_hi, ball_c, ball_r, hs_n, hs_b


def encode_mode(mode) -> KernelModeSpec | None:
    """Kernel spec for the mode, or None when it needs the generic path."""
    from ..objectives import InfNormCoupling, PNormCoupling
    from ..prox import IsotropicQuadratic, SquaredDistance, ZeroFunction
    from ..sets import Ball, Box, Halfspace, Product, WholeSpace

    obj = mode.objective
    k, m = obj.layout.agents, obj.layout.dim
    n = k * m

    if obj.coupling is None:
        coupling = COUPLING_NONE
        edges = []
    elif isinstance(obj.coupling, PNormCoupling) and obj.coupling.p == 2.0:
        coupling = COUPLING_QUAD
        edges = obj.graph.edges()
    elif (isinstance(obj.coupling, PNormCoupling) and obj.coupling.p == 1.0
          and not obj.coupling.squared):
        coupling = COUPLING_SIGN
        edges = obj.graph.edges()
    elif isinstance(obj.coupling, InfNormCoupling) and obj.coupling.squared:
        coupling = COUPLING_INFSQ
        edges = obj.graph.edges()
    else:
        return None

    E = len(edges)
    ei = np.array([e[0] for e in edges], dtype=np.int32)
    ej = np.array([e[1] for e in edges], dtype=np.int32)
    if obj.graph is not None and obj.graph.time_varying:
        s = obj.graph.sinusoid
        w_base = s.base[ei, ej].astype(np.float64)
        w_amp = s.amp[ei, ej].astype(np.float64)
        w_freq = s.freq[ei, ej].astype(np.float64)
        w_phase = s.phase[ei, ej].astype(np.float64)
        tv = 1
    else:
        w = obj.graph.weights if obj.graph is not None else None
        w_base = (w[ei, ej].astype(np.float64) if E else _zeros(0))
        w_amp, w_freq, w_phase = _zeros(E), _zeros(E), _zeros(E)
        tv = 0

    loc_kind = np.zeros(k, dtype=np.int32)
    loc_weight = _zeros(k)
    loc_center = _zeros((k, m))
    loc_set_kind = np.zeros(k, dtype=np.int32)
    loc_box_lo, loc_box_hi = _zeros((k, m)), _zeros((k, m))
    loc_ball_c, loc_ball_r = _zeros((k, m)), _zeros(k)
    loc_hs_n, loc_hs_b = _zeros((k, m)), _zeros(k)
    seen = set()
    for i, term in obj.local_terms:
        if isinstance(term, ZeroFunction):
            continue
        if i in seen:
            return None  # one term per agent in the kernels
        seen.add(i)
        if isinstance(term, IsotropicQuadratic):
            loc_kind[i] = LOCAL_ISO_QUAD
            loc_weight[i] = term.weight
            loc_center[i] = term.center
        elif isinstance(term, SquaredDistance):
            enc = _encode_primitive(term.target, m)
            if enc is None or enc[0] == SET_WHOLE:
                return None
            loc_kind[i] = LOCAL_HALF_SQ_DIST
            loc_weight[i] = term.weight
            (loc_set_kind[i], loc_box_lo[i], loc_box_hi[i],
             loc_ball_c[i], loc_ball_r[i], loc_hs_n[i], loc_hs_b[i]) = enc
        else:
            return None

    con_box_lo, con_box_hi = _zeros(n), _zeros(n)
    con_ball_c, con_hs_n = _zeros(n), _zeros(n)
    con_ball_r, con_hs_b = 0.0, 0.0
    pro_set_kind = np.zeros(k, dtype=np.int32)
    pro_box_lo, pro_box_hi = _zeros((k, m)), _zeros((k, m))
    pro_ball_c, pro_ball_r = _zeros((k, m)), _zeros(k)
    pro_hs_n, pro_hs_b = _zeros((k, m)), _zeros(k)

    cset = mode.constraint
    if isinstance(cset, WholeSpace):
        con_kind = CON_WHOLE
    elif isinstance(cset, Box):
        con_kind = CON_BOX
        con_box_lo, con_box_hi = cset.lower.copy(), cset.upper.copy()
    elif isinstance(cset, Ball):
        con_kind = CON_BALL
        con_ball_c, con_ball_r = cset.center.copy(), cset.radius
    elif isinstance(cset, Halfspace):
        con_kind = CON_HALFSPACE
        con_hs_n, con_hs_b = cset.normal.copy(), cset.offset
    elif isinstance(cset, Product) and len(cset.factors) == k:
        if any(f.dim != m for f in cset.factors):
            return None
        con_kind = CON_PRODUCT
        for a, f in enumerate(cset.factors):
            enc = _encode_primitive(f, m)
            if enc is None:
                return None
            (pro_set_kind[a], pro_box_lo[a], pro_box_hi[a],
             pro_ball_c[a], pro_ball_r[a], pro_hs_n[a], pro_hs_b[a]) = enc
    else:
        return None

    return KernelModeSpec(
        agents=k, dim=m, size=n,
        coupling=coupling, time_varying=tv,
        edges_i=ei, edges_j=ej,
        w_base=w_base, w_amp=w_amp, w_freq=w_freq, w_phase=w_phase,
        loc_kind=loc_kind, loc_weight=loc_weight, loc_center=loc_center,
        loc_set_kind=loc_set_kind,
        loc_box_lo=loc_box_lo, loc_box_hi=loc_box_hi,
        loc_ball_c=loc_ball_c, loc_ball_r=loc_ball_r,
        loc_hs_n=loc_hs_n, loc_hs_b=loc_hs_b,
        con_kind=con_kind,
        con_box_lo=con_box_lo, con_box_hi=con_box_hi,
        con_ball_c=con_ball_c, con_ball_r=con_ball_r,
        con_hs_n=con_hs_n, con_hs_b=con_hs_b,
        pro_set_kind=pro_set_kind,
        pro_box_lo=pro_box_lo, pro_box_hi=pro_box_hi,
        pro_ball_c=pro_ball_c, pro_ball_r=pro_ball_r,
        pro_hs_n=pro_hs_n, pro_hs_b=pro_hs_b,
    )
