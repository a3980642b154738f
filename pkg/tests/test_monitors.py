"""Monitor tests: discrete decrease checks, per-mode nonexpansiveness,
pairwise contraction, residual series, limit detection and the
demipositivity probe.

The decrease monitors are validated two ways: real runs with known
behavior must pass, and hand-built trajectories that move uphill or
overclaim the residual must be flagged.
"""

import numpy as np
import pytest

from swflow.errors import (
    AnchorNotInA,
    AnchorNotInAq,
    AnchorNotZero,
    GridMismatch,
)
from swflow.graphs import WeightedGraph
from swflow.integrate import (
    COMPLETED,
    StepScheme,
    Termination,
    Trajectory,
    simulate,
    simulate_monotone,
)
from swflow.maps import linear_map, rotation_map, saddle_flow_map
from swflow.monitors import (
    consensus_series,
    demipositivity_probe,
    limit_detect,
    lyapunov_check,
    pairwise_contraction_check,
    per_mode_nonexpansiveness,
    residuals,
)
from swflow.objectives import (
    ModeDescriptor,
    ObjectiveDescriptor,
    PNormCoupling,
)
from swflow.sets import Box, Product, WholeSpace
from swflow.state import AgentLayout
from swflow.switching import SwitchingSignal, make_constant, make_round_robin

LAYOUT = AgentLayout(2, 1)


def quad_mode(w=1.0, constraint=None):
    g = WeightedGraph.from_edges(2, [(0, 1, w)])
    f = ObjectiveDescriptor(layout=LAYOUT,
                            coupling=PNormCoupling(2, squared=True), graph=g)
    return ModeDescriptor(objective=f,
                          constraint=constraint or WholeSpace(2),
                          name=f"quad_w{w}")


def sign_mode(w=1.0):
    g = WeightedGraph.from_edges(2, [(0, 1, w)])
    f = ObjectiveDescriptor(layout=LAYOUT,
                            coupling=PNormCoupling(1), graph=g)
    return ModeDescriptor(objective=f, constraint=WholeSpace(2), name="sign")


def quad_run(horizon=2.0, h=1e-3, x0=(1.0, 0.0)):
    return simulate([quad_mode()], make_constant(), np.array(x0, float),
                    horizon, StepScheme("explicit", h))


def manual_trajectory(times, states, step_norms=None):
    times = np.asarray(times, dtype=float)
    states = np.asarray(states, dtype=float)
    steps = times.size - 1
    if step_norms is None:
        step_norms = np.zeros(steps)
    return Trajectory(
        times=times,
        states=states,
        modes=np.zeros(times.size, dtype=np.int64),
        step_norms=np.asarray(step_norms, dtype=float),
        termination=Termination(COMPLETED, float(times[-1]), 0),
        scheme=StepScheme("explicit", float(times[1] - times[0])),
        signal=make_constant(),
    )


# ---------------------------------------------------------------------------
# lyapunov_check


def test_lyapunov_passes_on_quadratic_run():
    traj = quad_run()
    mode = quad_mode()
    rep = lyapunov_check(traj, np.array([0.5, 0.5]), [mode])
    assert rep.passed and rep.violations == 0
    assert rep.v_series.shape == traj.times.shape
    assert rep.w_series.shape == (traj.step_count,)
    assert np.all(rep.w_series >= 0.0)
    # the pair flow contracts monotonically: no positive V increment at all
    assert rep.max_positive_increment == 0.0
    assert rep.v_series[-1] < 1e-3 * rep.v_series[0]


def test_lyapunov_rate_dominates_residual():
    # explicit quad pair: dV/dt = -<g, x - a> = -d^2 while W = 0.5 d^2,
    # so the measured rates must sit around twice the residual
    traj = quad_run(horizon=0.5)
    rep = lyapunov_check(traj, np.array([0.5, 0.5]), [quad_mode()])
    mask = rep.w_series > 1e-6
    ratio = -rep.rates[mask] / rep.w_series[mask]
    assert np.all(ratio > 1.9)
    assert np.all(ratio < 2.1)


def test_lyapunov_flags_uphill_trajectory():
    traj = manual_trajectory([0.0, 1.0, 2.0], [[1.0], [2.0], [3.0]])
    rep = lyapunov_check(traj, np.array([0.0]))
    assert not rep.passed
    assert rep.violations == 2
    # V = 0.5, 2.0, 4.5 so the worst rate is 2.5
    assert rep.worst_excess == pytest.approx(2.5, abs=1e-6)


def test_lyapunov_anchor_must_minimize_every_mode():
    traj = quad_run(horizon=0.1)
    with pytest.raises(AnchorNotInA):
        lyapunov_check(traj, np.array([1.0, 0.0]), [quad_mode()])


def test_lyapunov_rejects_overclaimed_residual():
    # a residual five times the available decrease rate cannot be met
    traj = quad_run(horizon=0.5)

    def too_big(rows):
        d = rows[:, 0] - rows[:, 1]
        return 5.0 * d ** 2

    rep = lyapunov_check(traj, np.array([0.5, 0.5]), residual_fns=[too_big])
    assert not rep.passed
    assert rep.violations > 100


def test_lyapunov_accepts_honest_residual_fn():
    traj = quad_run(horizon=0.5)

    def w_fn(rows):
        d = rows[:, 0] - rows[:, 1]
        return 0.5 * d ** 2

    rep = lyapunov_check(traj, np.array([0.5, 0.5]), residual_fns=[w_fn])
    assert rep.passed


# ---------------------------------------------------------------------------
# per-mode nonexpansiveness


def test_nonexpansiveness_on_switched_run():
    modes = [quad_mode(1.0), sign_mode(0.5)]
    sig = make_round_robin(2, 0.25, 1.0)
    traj = simulate(modes, sig, np.array([1.0, 0.0]), 1.0,
                    StepScheme("explicit", 1e-3))
    anchors = [np.array([0.5, 0.5]), np.array([0.5, 0.5])]
    rep = per_mode_nonexpansiveness(traj, anchors, modes)
    assert rep.passed and rep.violations == 0
    assert rep.runs_checked == 4
    assert rep.worst_excess <= 0.0


def test_nonexpansiveness_rejects_bad_anchor():
    modes = [quad_mode()]
    traj = quad_run(horizon=0.1)
    with pytest.raises(AnchorNotInAq):
        per_mode_nonexpansiveness(traj, [np.array([2.0, 0.0])], modes)


def test_nonexpansiveness_flags_expanding_run():
    traj = manual_trajectory([0.0, 1.0], [[1.0, 0.0], [2.0, 0.0]])
    rep = per_mode_nonexpansiveness(traj, [np.array([0.0, 0.0])])
    assert not rep.passed and rep.violations == 1


# ---------------------------------------------------------------------------
# pairwise contraction


def test_contraction_on_paired_runs():
    mode = quad_mode()
    kw = dict(signal=make_constant(), horizon=1.0,
              scheme=StepScheme("explicit", 1e-3))
    a = simulate([mode], kw["signal"], np.array([1.0, 0.0]),
                 kw["horizon"], kw["scheme"])
    b = simulate([mode], kw["signal"], np.array([-0.5, 0.25]),
                 kw["horizon"], kw["scheme"])
    rep = pairwise_contraction_check(a, b)
    assert rep.passed and rep.violations == 0
    assert rep.distances[-1] <= rep.distances[0]


def test_contraction_grid_mismatch():
    mode = quad_mode()
    a = simulate([mode], make_constant(), np.array([1.0, 0.0]), 0.2,
                 StepScheme("explicit", 1e-3))
    b = simulate([mode], make_constant(), np.array([0.5, 0.0]), 0.2,
                 StepScheme("explicit", 2e-3))
    with pytest.raises(GridMismatch):
        pairwise_contraction_check(a, b)


def test_contraction_mode_mismatch():
    modes = [quad_mode(1.0), quad_mode(2.0)]
    h = StepScheme("explicit", 1e-1)
    a = simulate(modes, make_constant(0), np.array([1.0, 0.0]), 1.0, h)
    b = simulate(modes, make_round_robin(2, 0.5, 1.0),
                 np.array([1.0, 0.0]), 1.0, h)
    assert np.array_equal(a.times, b.times)
    with pytest.raises(GridMismatch):
        pairwise_contraction_check(a, b)


# ---------------------------------------------------------------------------
# residual series


def test_residuals_converged_run():
    traj = quad_run(horizon=8.0)
    rep = residuals(traj, [quad_mode()])
    assert rep.w_series.shape == (1, traj.times.size)
    assert rep.all_below and rep.persistent_below
    assert rep.terminal[0] <= rep.eps
    assert np.allclose(rep.limit_estimate, [0.5, 0.5], atol=1e-3)


def test_residuals_infinite_off_constraint():
    box = Product((Box([-1.0], [1.0]), Box([-1.0], [1.0])))
    mode = quad_mode(constraint=box)
    traj = manual_trajectory([0.0, 1.0], [[5.0, 5.0], [0.2, 0.2]])
    rep = residuals(traj, [mode])
    assert np.isinf(rep.w_series[0, 0])
    assert rep.w_series[0, 1] == pytest.approx(0.0, abs=1e-12)
    assert rep.all_below


def test_residuals_respect_persistent_modes():
    # mode 1 never returns after t = 1, so only mode 0 must settle
    modes = [quad_mode(1.0), quad_mode(4.0)]
    sig = SwitchingSignal(breakpoints=np.array([0.0, 0.5, 1.0]),
                          modes=np.array([0, 1, 0]))
    traj = simulate(modes, sig, np.array([1.0, 0.0]), 12.0,
                    StepScheme("explicit", 1e-3))
    rep = residuals(traj, modes)
    assert rep.persistent_modes == (0,)
    assert rep.persistent_below


# ---------------------------------------------------------------------------
# limit detection and consensus series


def test_limit_detect_converged():
    traj = quad_run(horizon=10.0)
    rep = limit_detect(traj)
    assert rep.is_cauchy
    assert rep.max_pairwise <= 1e-5
    assert rep.tail_nodes <= 1024
    assert np.allclose(rep.limit_estimate, [0.5, 0.5], atol=1e-3)


def test_limit_detect_orbit_never_settles():
    traj = simulate_monotone([rotation_map()], make_constant(),
                             np.array([1.0, 0.0]), 10.0, h=1e-3)
    rep = limit_detect(traj)
    assert not rep.is_cauchy
    assert rep.max_pairwise > 0.1


def test_limit_detect_validates_fraction():
    traj = quad_run(horizon=0.1)
    with pytest.raises(ValueError):
        limit_detect(traj, tail_fraction=0.0)


def test_consensus_series_decreases():
    traj = quad_run()
    errs = consensus_series(traj)
    assert errs.shape == traj.times.shape
    assert errs[0] == pytest.approx(np.sqrt(0.5), abs=1e-12)
    assert np.all(np.diff(errs) <= 1e-12)


def test_consensus_series_needs_layout():
    traj = manual_trajectory([0.0, 1.0], [[1.0], [0.5]])
    with pytest.raises(ValueError):
        consensus_series(traj)


# ---------------------------------------------------------------------------
# demipositivity probe


def test_probe_finds_degenerate_saddle_witness():
    m = saddle_flow_map(1.0, 1.0, 0.0)
    rep = demipositivity_probe(m)
    assert rep.is_violated
    assert np.allclose(rep.witness, [0.0, 1.0])
    assert abs(rep.witness_pairing) <= 1e-9
    # the suggested probe point is checked before any random draw
    assert rep.samples_checked == 1


def test_probe_clears_strict_saddle():
    # pairing v . x = 2|x|^2 > 0 away from the origin: no witness exists
    m = saddle_flow_map(1.0, 1.0, 1.0)
    rep = demipositivity_probe(m, samples=10_000, seed=3)
    assert not rep.is_violated
    assert rep.witness is None
    assert rep.min_pairing_ratio > 1e-9
    assert rep.samples_checked == 10_000


def test_probe_pairing_test_is_scale_relative():
    # near consensus a cubic coupling's pairing shrinks like d^3 while
    # the gradient norm shrinks like d^2, so an absolute pairing cutoff
    # would misread those points; the relative test must stay clean
    from swflow.graphs import WeightedGraph
    from swflow.maps import gradient_map
    from swflow.objectives import ObjectiveDescriptor, PNormCoupling
    from swflow.state import AgentLayout

    obj = ObjectiveDescriptor(
        layout=AgentLayout(2, 1),
        coupling=PNormCoupling(3),
        graph=WeightedGraph.from_edges(2, [(0, 1, 1.0)]),
    )
    m = gradient_map(obj, dim=2, anchor=(0.0, 0.0))
    rep = demipositivity_probe(m, samples=10_000, seed=11)
    assert not rep.is_violated
    # hand it the worst kind of point directly: barely off consensus
    d = 8e-4
    rep = demipositivity_probe(m, probes=((1.0 + d, 1.0),), samples=100)
    assert not rep.is_violated


def test_probe_flags_pure_rotation_immediately():
    # skew maps pair to zero against the origin everywhere, so the very
    # first sample with |M(x)| above the floor is already a witness
    rep = demipositivity_probe(rotation_map(), seed=0)
    assert rep.is_violated
    assert abs(rep.witness_pairing) <= 1e-15


def test_probe_requires_zero_anchor():
    m = saddle_flow_map(1.0, 1.0, 1.0)
    with pytest.raises(AnchorNotZero):
        demipositivity_probe(m, anchor=np.array([1.0, 1.0]))
