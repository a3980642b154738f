# cython: language_level=3
"""Compiled stepping kernel.  _ref.py is the semantics reference; the two
backends must stay step-for-step interchangeable."""

import numpy as np

cimport numpy as cnp
from libc.math cimport fabs, isfinite, sin, sqrt

cnp.import_array()

name = "compiled"

DEF SET_BOX = 1
DEF SET_BALL = 2
DEF SET_HALFSPACE = 3


def prepare(spec):
    return spec


cdef void _project_rows(cnp.int32_t[::1] kinds, double[::1] X, int k, int m,
                        double[:, ::1] box_lo, double[:, ::1] box_hi,
                        double[:, ::1] ball_c, double[::1] ball_r,
                        double[:, ::1] hs_n, double[::1] hs_b) noexcept nogil:
    """In-place projection of each agent row onto its primitive set."""
    cdef int a, l, off
    cdef double r2, scale, slack, n2
    for a in range(k):
        off = a * m
        if kinds[a] == SET_BOX:
            for l in range(m):
                if X[off + l] < box_lo[a, l]:
                    X[off + l] = box_lo[a, l]
                elif X[off + l] > box_hi[a, l]:
                    X[off + l] = box_hi[a, l]
        elif kinds[a] == SET_BALL:
            r2 = 0.0
            for l in range(m):
                r2 += (X[off + l] - ball_c[a, l]) ** 2
            if r2 > ball_r[a] * ball_r[a]:
                scale = ball_r[a] / sqrt(r2)
                for l in range(m):
                    X[off + l] = ball_c[a, l] + (X[off + l] - ball_c[a, l]) * scale
        elif kinds[a] == SET_HALFSPACE:
            slack = -hs_b[a]
            n2 = 0.0
            for l in range(m):
                slack += hs_n[a, l] * X[off + l]
                n2 += hs_n[a, l] * hs_n[a, l]
            if slack > 0.0 and n2 > 0.0:
                for l in range(m):
                    X[off + l] -= slack * hs_n[a, l] / n2


def run_span(spec, double[::1] x, double[::1] ts, double[::1] dts,
             double[:, ::1] out_states, double[::1] out_gnorms):
    """Advance len(dts) steps from x; returns (status, steps_written)."""
    cdef int k = spec.agents
    cdef int m = spec.dim
    cdef int n = spec.size
    cdef int coupling = spec.coupling
    cdef int tv = spec.time_varying
    cdef int con_kind = spec.con_kind

    cdef cnp.int32_t[::1] ei = spec.edges_i
    cdef cnp.int32_t[::1] ej = spec.edges_j
    cdef double[::1] w_base = spec.w_base
    cdef double[::1] w_amp = spec.w_amp
    cdef double[::1] w_freq = spec.w_freq
    cdef double[::1] w_phase = spec.w_phase

    cdef cnp.int32_t[::1] loc_kind = spec.loc_kind
    cdef double[::1] loc_weight = spec.loc_weight
    cdef double[:, ::1] loc_center = spec.loc_center
    cdef cnp.int32_t[::1] loc_set_kind = spec.loc_set_kind
    cdef double[:, ::1] loc_box_lo = spec.loc_box_lo
    cdef double[:, ::1] loc_box_hi = spec.loc_box_hi
    cdef double[:, ::1] loc_ball_c = spec.loc_ball_c
    cdef double[::1] loc_ball_r = spec.loc_ball_r
    cdef double[:, ::1] loc_hs_n = spec.loc_hs_n
    cdef double[::1] loc_hs_b = spec.loc_hs_b

    cdef double[::1] con_box_lo = spec.con_box_lo
    cdef double[::1] con_box_hi = spec.con_box_hi
    cdef double[::1] con_ball_c = spec.con_ball_c
    cdef double con_ball_r = spec.con_ball_r
    cdef double[::1] con_hs_n = spec.con_hs_n
    cdef double con_hs_b = spec.con_hs_b

    cdef cnp.int32_t[::1] pro_set_kind = spec.pro_set_kind
    cdef double[:, ::1] pro_box_lo = spec.pro_box_lo
    cdef double[:, ::1] pro_box_hi = spec.pro_box_hi
    cdef double[:, ::1] pro_ball_c = spec.pro_ball_c
    cdef double[::1] pro_ball_r = spec.pro_ball_r
    cdef double[:, ::1] pro_hs_n = spec.pro_hs_n
    cdef double[::1] pro_hs_b = spec.pro_hs_b

    cdef int S = dts.shape[0]
    cdef int E = ei.shape[0]

    X_arr = np.array(x, dtype=np.float64)
    P_arr = np.zeros(m, dtype=np.float64)
    G_arr = np.zeros(n, dtype=np.float64)
    cdef double[::1] X = X_arr
    cdef double[::1] P = P_arr
    cdef double[::1] G = G_arr

    cdef int s, e, a, l, i, j, li, lj, lbest, off
    cdef int status = 0
    cdef int filled = S
    cdef double t, dt, w, d, contrib, gn, r2, slack, scale, best, ad, n2, xn2

    with nogil:
        for s in range(S):
            t = ts[s]
            dt = dts[s]
            for l in range(n):
                G[l] = 0.0

            for e in range(E):
                w = w_base[e]
                if tv:
                    w = w + w_amp[e] * sin(w_freq[e] * t + w_phase[e])
                i = ei[e]
                j = ej[e]
                li = i * m
                lj = j * m
                if coupling == 1:      # quadratic
                    for l in range(m):
                        d = X[li + l] - X[lj + l]
                        contrib = w * d
                        G[li + l] += contrib
                        G[lj + l] -= contrib
                elif coupling == 2:    # coordinatewise sign
                    for l in range(m):
                        d = X[li + l] - X[lj + l]
                        if d > 0.0:
                            contrib = 0.5 * w
                        elif d < 0.0:
                            contrib = -0.5 * w
                        else:
                            contrib = 0.0
                        G[li + l] += contrib
                        G[lj + l] -= contrib
                elif coupling == 3:    # max-norm squared, first max coordinate
                    best = -1.0
                    lbest = 0
                    for l in range(m):
                        ad = fabs(X[li + l] - X[lj + l])
                        if ad > best:
                            best = ad
                            lbest = l
                    d = X[li + lbest] - X[lj + lbest]
                    contrib = w * d
                    G[li + lbest] += contrib
                    G[lj + lbest] -= contrib

            for a in range(k):
                off = a * m
                if loc_kind[a] == 2:   # isotropic quadratic
                    for l in range(m):
                        G[off + l] += loc_weight[a] * (X[off + l] - loc_center[a, l])
                elif loc_kind[a] == 1:  # half squared distance
                    for l in range(m):
                        P[l] = X[off + l]
                    if loc_set_kind[a] == SET_BOX:
                        for l in range(m):
                            if P[l] < loc_box_lo[a, l]:
                                P[l] = loc_box_lo[a, l]
                            elif P[l] > loc_box_hi[a, l]:
                                P[l] = loc_box_hi[a, l]
                    elif loc_set_kind[a] == SET_BALL:
                        r2 = 0.0
                        for l in range(m):
                            r2 += (P[l] - loc_ball_c[a, l]) ** 2
                        if r2 > loc_ball_r[a] * loc_ball_r[a]:
                            scale = loc_ball_r[a] / sqrt(r2)
                            for l in range(m):
                                P[l] = loc_ball_c[a, l] + (P[l] - loc_ball_c[a, l]) * scale
                    elif loc_set_kind[a] == SET_HALFSPACE:
                        slack = -loc_hs_b[a]
                        n2 = 0.0
                        for l in range(m):
                            slack += loc_hs_n[a, l] * P[l]
                            n2 += loc_hs_n[a, l] * loc_hs_n[a, l]
                        if slack > 0.0 and n2 > 0.0:
                            for l in range(m):
                                P[l] -= slack * loc_hs_n[a, l] / n2
                    for l in range(m):
                        G[off + l] += loc_weight[a] * (X[off + l] - P[l])

            gn = 0.0
            for l in range(n):
                gn += G[l] * G[l]
            gn = sqrt(gn)
            out_gnorms[s] = gn

            for l in range(n):
                X[l] -= dt * G[l]

            if con_kind == 1:          # box
                for l in range(n):
                    if X[l] < con_box_lo[l]:
                        X[l] = con_box_lo[l]
                    elif X[l] > con_box_hi[l]:
                        X[l] = con_box_hi[l]
            elif con_kind == 2:        # ball
                r2 = 0.0
                for l in range(n):
                    r2 += (X[l] - con_ball_c[l]) ** 2
                if r2 > con_ball_r * con_ball_r:
                    scale = con_ball_r / sqrt(r2)
                    for l in range(n):
                        X[l] = con_ball_c[l] + (X[l] - con_ball_c[l]) * scale
            elif con_kind == 3:        # halfspace
                slack = -con_hs_b
                n2 = 0.0
                for l in range(n):
                    slack += con_hs_n[l] * X[l]
                    n2 += con_hs_n[l] * con_hs_n[l]
                if slack > 0.0 and n2 > 0.0:
                    for l in range(n):
                        X[l] -= slack * con_hs_n[l] / n2
            elif con_kind == 4:        # per-agent product
                _project_rows(pro_set_kind, X, k, m,
                              pro_box_lo, pro_box_hi,
                              pro_ball_c, pro_ball_r,
                              pro_hs_n, pro_hs_b)

            xn2 = 0.0
            for l in range(n):
                out_states[s, l] = X[l]
                xn2 += X[l] * X[l]
            if not isfinite(gn) or xn2 > 1e18:
                status = 1
                filled = s + 1
                break

    return status, filled
