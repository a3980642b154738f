"""Pure NumPy stepping kernel (reference backend).

Semantically identical to the compiled backend: explicit subgradient Euler
steps with the kernel tie conventions, weights sampled at each step's left
endpoint, projection after every step, divergence guard on the state norm.
"""

from __future__ import annotations

import numpy as np

from .encode import (CON_BALL, CON_BOX, CON_HALFSPACE, CON_PRODUCT, CON_WHOLE,
                     COUPLING_INFSQ, COUPLING_NONE, COUPLING_QUAD,
                     COUPLING_SIGN, DIVERGE_NORM, LOCAL_HALF_SQ_DIST,
                     LOCAL_ISO_QUAD, SET_BALL, SET_BOX, SET_HALFSPACE,
                     KernelModeSpec)

name = "pure"


def _project_primitive(kind, xi, box_lo, box_hi, ball_c, ball_r, hs_n, hs_b):
    if kind == SET_BOX:
        return np.clip(xi, box_lo, box_hi)
    if kind == SET_BALL:
        d = xi - ball_c
        r = np.linalg.norm(d)
        if r > ball_r:
            return ball_c + d * (ball_r / r)
        return xi
    if kind == SET_HALFSPACE:
        slack = float(hs_n @ xi) - hs_b
        if slack > 0.0:
            return xi - slack * hs_n / float(hs_n @ hs_n)
        return xi
    return xi


def prepare(spec: KernelModeSpec) -> KernelModeSpec:
    return spec


def run_span(spec: KernelModeSpec, x, ts, dts, out_states, out_gnorms):
    """Advance len(dts) steps from x; returns (status, steps_written).

    status 0: all steps completed; 1: divergence guard tripped (the final
    written row is the diverged state).
    """
    k, m = spec.agents, spec.dim
    X = np.array(x, dtype=float).reshape(k, m)
    S = dts.shape[0]
    E = spec.edges_i.shape[0]
    g = np.zeros((k, m))

    for s in range(S):
        t = ts[s]
        g[:] = 0.0
        if spec.coupling != COUPLING_NONE and E:
            if spec.time_varying:
                w = spec.w_base + spec.w_amp * np.sin(spec.w_freq * t
                                                      + spec.w_phase)
            else:
                w = spec.w_base
            for e in range(E):
                i, j = spec.edges_i[e], spec.edges_j[e]
                d = X[i] - X[j]
                if spec.coupling == COUPLING_QUAD:
                    contrib = w[e] * d
                elif spec.coupling == COUPLING_SIGN:
                    contrib = 0.5 * w[e] * np.sign(d)
                else:  # COUPLING_INFSQ: move the first maximal coordinate
                    contrib = np.zeros(m)
                    l = int(np.argmax(np.abs(d)))
                    contrib[l] = w[e] * d[l]
                g[i] += contrib
                g[j] -= contrib
        for a in range(k):
            kind = spec.loc_kind[a]
            if kind == LOCAL_ISO_QUAD:
                g[a] += spec.loc_weight[a] * (X[a] - spec.loc_center[a])
            elif kind == LOCAL_HALF_SQ_DIST:
                p = _project_primitive(
                    spec.loc_set_kind[a], X[a],
                    spec.loc_box_lo[a], spec.loc_box_hi[a],
                    spec.loc_ball_c[a], spec.loc_ball_r[a],
                    spec.loc_hs_n[a], spec.loc_hs_b[a])
                g[a] += spec.loc_weight[a] * (X[a] - p)

        out_gnorms[s] = np.linalg.norm(g)
        X = X - dts[s] * g

        if spec.con_kind == CON_BOX:
            flat = np.clip(X.reshape(-1), spec.con_box_lo, spec.con_box_hi)
            X = flat.reshape(k, m)
        elif spec.con_kind == CON_BALL:
            flat = X.reshape(-1)
            d = flat - spec.con_ball_c
            r = np.linalg.norm(d)
            if r > spec.con_ball_r:
                X = (spec.con_ball_c + d * (spec.con_ball_r / r)).reshape(k, m)
        elif spec.con_kind == CON_HALFSPACE:
            flat = X.reshape(-1)
            slack = float(spec.con_hs_n @ flat) - spec.con_hs_b
            if slack > 0.0:
                flat = flat - slack * spec.con_hs_n / float(
                    spec.con_hs_n @ spec.con_hs_n)
                X = flat.reshape(k, m)
        elif spec.con_kind == CON_PRODUCT:
            for a in range(k):
                X[a] = _project_primitive(
                    spec.pro_set_kind[a], X[a],
                    spec.pro_box_lo[a], spec.pro_box_hi[a],
                    spec.pro_ball_c[a], spec.pro_ball_r[a],
                    spec.pro_hs_n[a], spec.pro_hs_b[a])

        out_states[s] = X.reshape(-1)
        if not np.isfinite(out_gnorms[s]) or \
                np.linalg.norm(out_states[s]) > DIVERGE_NORM:
            return 1, s + 1
    return 0, S
