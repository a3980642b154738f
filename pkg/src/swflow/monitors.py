"""Trajectory monitors: decrease checks, residuals, limits, probes.

Every check works on the discrete trajectory produced by the integrator
and uses tolerances derived from the recorded step data.  For one explicit
step  x+ = P_C(x - h g)  against an anchor a that minimizes f over C,

    |x+ - a|^2 <= |x - a|^2 - 2 h (f(x) - f(a)) + h^2 |g|^2,

so the Lyapunov rate obeys  dV/dt <= -W(x) + h |g|^2 / 2  and the
per-step tolerance  tol = h * g^2 / 2  (plus a tiny absolute term) never
flags a correct run while any genuine increase beyond discretization
noise is reported.  Proximal steps satisfy the same inequalities with the
residual evaluated at the right endpoint.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from .errors import AnchorNotInA, AnchorNotInAq, AnchorNotZero, GridMismatch
from .integrate import Trajectory
from .maps import MonotoneMapDescriptor
from .objectives import ModeDescriptor, MinimizerOracle, argmin_oracle
from .state import consensus_error_batch
from .switching import recurrence_report

Array = NDArray[np.float64]

WITNESS_PAIRING_TOL = 1e-9
WITNESS_NORM_FLOOR = 1e-6
ANCHOR_RESIDUAL_TOL = 1e-8


# ---------------------------------------------------------------------------
# shared helpers


def _is_modes(modes) -> bool:
    return bool(modes) and isinstance(modes[0], ModeDescriptor)


def _oracles_for(modes, oracles):
    if oracles is None:
        oracles = [argmin_oracle(m) for m in modes]
    return list(oracles)


def _mode_w_batch(mode: ModeDescriptor, oracle: MinimizerOracle,
                  states: Array, times) -> Array:
    vals = mode.objective.value_batch(states, times)
    return vals - oracle.min_value


def _fn_w_batch(fn, states: Array) -> Array:
    out = np.asarray(fn(states), dtype=float)
    if out.shape == (states.shape[0],):
        return out
    return np.array([float(fn(row)) for row in states])


def _spans(values: NDArray[np.int64]):
    start = 0
    for i in range(1, values.size + 1):
        if i == values.size or values[i] != values[start]:
            yield start, i, int(values[start])
            start = i


def _check_anchor_residuals(anchor: Array, modes, oracles, residual_fns,
                            error_cls):
    """anchor must satisfy W_q(anchor) <= 1e-8 for every mode q."""
    if residual_fns is not None:
        for q, fn in enumerate(residual_fns):
            w = float(_fn_w_batch(fn, anchor[None, :])[0])
            if w > ANCHOR_RESIDUAL_TOL:
                raise error_cls(f"anchor residual {w:.3e} in mode {q}")
        return
    if _is_modes(modes):
        for q, (mode, oracle) in enumerate(zip(modes, oracles)):
            if not mode.constraint.contains(anchor):
                raise error_cls(f"anchor outside constraint set of mode {q}")
            w = mode.objective.value(anchor, 0.0) - oracle.min_value
            if w > ANCHOR_RESIDUAL_TOL:
                raise error_cls(f"anchor residual {w:.3e} in mode {q}")


# ---------------------------------------------------------------------------
# Lyapunov decrease


@dataclass
class LyapunovReport:
    anchor: Array
    v_series: Array
    w_series: Array          # active-mode residual used per step
    rates: Array             # (V_{n+1} - V_n) / h_n
    max_positive_increment: float
    violations: int
    worst_excess: float
    passed: bool


def lyapunov_check(traj: Trajectory, anchor: Array, modes=None, *,
                   oracles=None, residual_fns=None,
                   atol: float = 1e-10) -> LyapunovReport:
    """Discrete decrease check  dV/dt <= -W_active(x) + tol  along a run.

    V(x) = 0.5 |x - anchor|^2.  The active-mode residual W is computed
    from the mode objectives and their argmin oracles, or from
    ``residual_fns`` (one callable per mode, batch rows -> values) when
    the flow is not objective-driven; with neither, W = 0 and the check
    reduces to near-monotonicity of V, valid for any monotone dynamics
    with M(anchor) = 0.

    The anchor must have residual <= 1e-8 in every mode (AnchorNotInA).
    """
    anchor = np.asarray(anchor, dtype=float)
    if _is_modes(modes):
        oracles = _oracles_for(modes, oracles)
    _check_anchor_residuals(anchor, modes, oracles, residual_fns,
                            AnchorNotInA)

    diffs = traj.states - anchor
    v = 0.5 * np.einsum("ij,ij->i", diffs, diffs)
    steps = traj.step_count
    hs = traj.step_sizes()
    rates = np.diff(v) / hs

    w = np.zeros(steps)
    # implicit steps satisfy the decrease bound at the right endpoint
    right = traj.scheme.kind == "proximal"
    if residual_fns is not None or _is_modes(modes):
        step_modes = traj.step_modes()
        for a, b, q in _spans(step_modes):
            sl = slice(a + 1, b + 1) if right else slice(a, b)
            block = traj.states[sl]
            if residual_fns is not None:
                w[a:b] = _fn_w_batch(residual_fns[q], block)
            else:
                w[a:b] = _mode_w_batch(modes[q], oracles[q], block,
                                       traj.times[a:b])
    w = np.maximum(w, 0.0)

    # dividing the V difference by a short sub-step (a switch breakpoint
    # just after a grid node) amplifies V's own rounding error, so the
    # tolerance carries an explicit eps*(1+V)/dt float term
    eps = np.finfo(float).eps
    fp_slack = 16.0 * eps * (1.0 + np.maximum(v[:-1], v[1:])) / hs
    tol = 0.5 * hs * traj.step_norms ** 2 + atol + fp_slack
    excess = rates + w - tol
    violations = int(np.count_nonzero(excess > 0))
    worst = float(np.max(excess)) if steps else 0.0
    return LyapunovReport(
        anchor=anchor,
        v_series=v,
        w_series=w,
        rates=rates,
        max_positive_increment=float(np.max(np.diff(v), initial=0.0)),
        violations=violations,
        worst_excess=worst,
        passed=violations == 0,
    )


# ---------------------------------------------------------------------------
# per-mode residuals


@dataclass
class ResidualReport:
    w_series: Array              # (modes, nodes); +inf where infeasible
    terminal: Array              # (modes,)
    limit_estimate: Array
    eps: float
    persistent_modes: tuple
    all_below: bool
    persistent_below: bool


def residuals(traj: Trajectory, modes, *, oracles=None,
              eps: float = 1e-6) -> ResidualReport:
    """Residual series W_q(x(t)) = f_q(x(t)) - min_{C_q} f_q for every
    mode, +inf off the mode's constraint set; terminal verdicts for the
    full mode family and for the persistently active modes."""
    oracles = _oracles_for(modes, oracles)
    n_nodes = traj.times.size
    w = np.empty((len(modes), n_nodes))
    for q, (mode, oracle) in enumerate(zip(modes, oracles)):
        w[q] = _mode_w_batch(mode, oracle, traj.states, traj.times)
        dist = mode.constraint.distance_batch(traj.states)
        scale = 1e-8 * (1.0 + np.linalg.norm(traj.states, axis=1))
        w[q, dist > scale] = np.inf
    w = np.where(np.isfinite(w), np.maximum(w, 0.0), w)

    report = recurrence_report(traj.signal, horizon=traj.final_time)
    persistent = tuple(int(q) for q in report.persistent_modes)
    terminal = w[:, -1].copy()
    all_below = bool(np.all(terminal <= eps))
    persistent_below = bool(all(terminal[q] <= eps for q in persistent)) \
        if persistent else all_below
    return ResidualReport(
        w_series=w,
        terminal=terminal,
        limit_estimate=traj.final_state.copy(),
        eps=eps,
        persistent_modes=persistent,
        all_below=all_below,
        persistent_below=persistent_below,
    )


# ---------------------------------------------------------------------------
# nonexpansiveness


@dataclass
class NonexpansivenessReport:
    violations: int
    worst_excess: float
    runs_checked: int
    passed: bool


def per_mode_nonexpansiveness(traj: Trajectory, anchors, modes=None, *,
                              oracles=None, residual_fns=None,
                              atol: float = 1e-12) -> NonexpansivenessReport:
    """On each maximal interval with constant mode q, |x(t) - a_q| must be
    nonincreasing up to the per-step discretization slack h^2 g^2.

    Each anchor a_q must minimize mode q's residual (AnchorNotInAq);
    validation runs when ``modes`` or ``residual_fns`` are supplied.
    """
    anchors = [np.asarray(a, dtype=float) for a in anchors]
    if _is_modes(modes):
        oracles = _oracles_for(modes, oracles)
    for q, a in enumerate(anchors):
        single_fns = None if residual_fns is None else [residual_fns[q]]
        single_modes = None if not _is_modes(modes) else [modes[q]]
        single_oracles = None if oracles is None else [oracles[q]]
        _check_anchor_residuals(a, single_modes, single_oracles, single_fns,
                                AnchorNotInAq)

    hs = traj.step_sizes()
    g = traj.step_norms
    violations = 0
    worst = -np.inf
    runs = 0
    for a_idx, b_idx, q in _spans(traj.step_modes()):
        runs += 1
        block = traj.states[a_idx:b_idx + 1] - anchors[q]
        d2 = np.einsum("ij,ij->i", block, block)
        slack = hs[a_idx:b_idx] ** 2 * g[a_idx:b_idx] ** 2 \
            + atol * (1.0 + d2[:-1])
        excess = np.diff(d2) - slack
        violations += int(np.count_nonzero(excess > 0))
        if excess.size:
            worst = max(worst, float(np.max(excess)))
    return NonexpansivenessReport(
        violations=violations,
        worst_excess=worst if np.isfinite(worst) else 0.0,
        runs_checked=runs,
        passed=violations == 0,
    )


@dataclass
class ContractionReport:
    distances: Array
    violations: int
    worst_excess: float
    passed: bool


def pairwise_contraction_check(a: Trajectory, b: Trajectory, *,
                               atol: float = 1e-12) -> ContractionReport:
    """Two runs under the same signal and scheme: |x_a(t) - x_b(t)| must
    be nonincreasing up to the per-step slack h^2 (g_a + g_b)^2."""
    if a.times.shape != b.times.shape or not np.array_equal(a.times, b.times):
        raise GridMismatch("trajectories live on different time grids")
    if not np.array_equal(a.modes, b.modes):
        raise GridMismatch("trajectories follow different mode sequences")
    diff = a.states - b.states
    d2 = np.einsum("ij,ij->i", diff, diff)
    hs = a.step_sizes()
    slack = hs ** 2 * (a.step_norms + b.step_norms) ** 2 \
        + atol * (1.0 + d2[:-1])
    excess = np.diff(d2) - slack
    violations = int(np.count_nonzero(excess > 0))
    return ContractionReport(
        distances=np.sqrt(d2),
        violations=violations,
        worst_excess=float(np.max(excess)) if excess.size else 0.0,
        passed=violations == 0,
    )


# ---------------------------------------------------------------------------
# limits


@dataclass
class LimitReport:
    is_cauchy: bool
    limit_estimate: Array
    max_pairwise: float
    tail_nodes: int


def limit_detect(traj: Trajectory, tail_fraction: float = 0.2,
                 eps: float = 1e-5, max_nodes: int = 1024) -> LimitReport:
    """Cauchy test on the trailing portion of the run: maximal pairwise
    distance among tail states (evenly subsampled) <= eps."""
    if not (0 < tail_fraction <= 1):
        raise ValueError("tail_fraction must lie in (0, 1]")
    t0, t1 = float(traj.times[0]), float(traj.times[-1])
    cut = t1 - tail_fraction * (t1 - t0)
    start = int(np.searchsorted(traj.times, cut, side="left"))
    tail = traj.states[start:]
    if tail.shape[0] > max_nodes:
        idx = np.linspace(0, tail.shape[0] - 1, max_nodes).astype(int)
        tail = tail[idx]
    sq = np.einsum("ij,ij->i", tail, tail)
    gram = tail @ tail.T
    pair2 = sq[:, None] + sq[None, :] - 2.0 * gram
    max_pair = float(np.sqrt(max(float(np.max(pair2)), 0.0)))
    return LimitReport(
        is_cauchy=max_pair <= eps,
        limit_estimate=traj.final_state.copy(),
        max_pairwise=max_pair,
        tail_nodes=int(tail.shape[0]),
    )


def consensus_series(traj: Trajectory) -> Array:
    if traj.layout is None:
        raise ValueError("trajectory has no agent layout")
    return consensus_error_batch(traj.layout, traj.states)


# ---------------------------------------------------------------------------
# demipositivity


@dataclass
class ProbeReport:
    is_violated: bool
    witness: Array | None
    witness_pairing: float
    min_pairing_ratio: float
    samples_checked: int


def demipositivity_probe(map_desc, anchor: Array | None = None,
                         samples: int = 10_000, *, seed: int = 0,
                         half_width: float = 2.0,
                         probes=()) -> ProbeReport:
    """Sampling refutation of demipositivity around a known zero.

    A witness is a point x whose selection v = M(x) is orthogonal to
    x - anchor, judged relative to the natural scale of the pairing:
    |v . (x - anchor)| <= 1e-9 |v| |x - anchor| while |v| > 1e-6.  The
    relative form matters: near a flat direction the raw pairing can
    shrink faster than |v| does (cubic couplings shrink it like d^3
    against |v| ~ d^2), and an absolute cutoff would misread those
    points as witnesses.  Suggested probe points (from the descriptor
    or the caller) are checked before random samples.  Finding a
    witness is conclusive; finding none is not a certificate.
    """
    if anchor is None:
        anchor = np.asarray(getattr(map_desc, "anchor", None), dtype=float)
    else:
        anchor = np.asarray(anchor, dtype=float)
    v0 = np.asarray(map_desc.evaluate(anchor), dtype=float)
    if float(np.linalg.norm(v0)) > WITNESS_NORM_FLOOR:
        raise AnchorNotZero(
            f"|M(anchor)| = {np.linalg.norm(v0):.3e} exceeds "
            f"{WITNESS_NORM_FLOOR:g}"
        )

    dim = anchor.size
    rng = np.random.default_rng(seed)
    candidates = [np.asarray(p, dtype=float)
                  for p in (*getattr(map_desc, "probes", ()), *probes)]
    min_abs = np.inf
    checked = 0
    witness = None
    pairing = np.nan

    def consider(x: Array) -> bool:
        nonlocal min_abs, witness, pairing, checked
        checked += 1
        v = np.asarray(map_desc.evaluate(x), dtype=float)
        nv = float(np.linalg.norm(v))
        if nv <= WITNESS_NORM_FLOOR:
            return False
        scale = nv * float(np.linalg.norm(x - anchor))
        if scale == 0.0:
            return False
        s = float(np.dot(v, x - anchor))
        ratio = abs(s) / scale
        min_abs = min(min_abs, ratio)
        if ratio <= WITNESS_PAIRING_TOL:
            witness = x.copy()
            pairing = s
            return True
        return False

    found = any(consider(p) for p in candidates)
    if not found:
        draws = rng.uniform(-half_width, half_width, size=(samples, dim))
        for row in draws:
            if consider(anchor + row):
                found = True
                break
    return ProbeReport(
        is_violated=found,
        witness=witness,
        witness_pairing=float(pairing) if witness is not None else np.nan,
        min_pairing_ratio=float(min_abs) if np.isfinite(min_abs) else np.nan,
        samples_checked=checked,
    )
