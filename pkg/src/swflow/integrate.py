"""Time stepping for switched constrained subgradient flows.

Two schemes advance a state under the active mode:

* explicit projected subgradient:  x+ = P_C(x - h g),  g the least-norm
  subgradient at the left endpoint (kernel-encodable modes run in the
  selected stepping backend),
* proximal (implicit):             x+ = prox_h(f^C)(x).

The time grid is the uniform h-grid refined so every switch instant of the
signal lands on a grid node exactly once; steps adjacent to a switch are
simply shorter.  Mode weights and subgradients are always sampled at the
left endpoint of a step, matching the right-continuity of the signal.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray

from . import _kernels
from .errors import GridMismatch, InitialConditionOutsideSet
from .objectives import ModeDescriptor
from .state import AgentLayout
from .switching import SwitchingSignal

Array = NDArray[np.float64]

DIVERGE_NORM = 1e9

COMPLETED = "completed"
LEFT_CONSTRAINT = "left_constraint"
DIVERGED = "diverged"

TERMINATE_ON_SWITCH = "terminate"
REPROJECT_ON_SWITCH = "reproject"


@dataclass(frozen=True)
class StepScheme:
    kind: str = "explicit"   # "explicit" or "proximal"
    h: float = 1e-3

    def __post_init__(self):
        if self.kind not in ("explicit", "proximal"):
            raise ValueError(f"unknown scheme kind {self.kind!r}")
        if not (self.h > 0):
            raise ValueError("step size must be positive")


@dataclass(frozen=True)
class Termination:
    status: str
    time: float
    mode: int


@dataclass
class Trajectory:
    """Discrete solution: grid times, states, active modes and step data.

    ``modes[j]`` is the mode governing the step that starts at ``times[j]``
    (the last entry repeats the final step's mode so the arrays align).
    ``step_norms[j]`` records the driving velocity magnitude of step j:
    the selected subgradient norm for the explicit scheme, |x+ - x|/h for
    the proximal scheme, |M(x)| for monotone-map flows.
    """

    times: Array
    states: Array
    modes: NDArray[np.int64]
    step_norms: Array
    termination: Termination
    scheme: StepScheme
    signal: SwitchingSignal
    layout: AgentLayout | None = None
    extras: dict = field(default_factory=dict)

    @property
    def step_count(self) -> int:
        return self.times.size - 1

    @property
    def final_time(self) -> float:
        return float(self.times[-1])

    @property
    def final_state(self) -> Array:
        return self.states[-1]

    def step_sizes(self) -> Array:
        return np.diff(self.times)

    def step_modes(self) -> NDArray[np.int64]:
        return self.modes[:-1]


def build_grid(h: float, horizon: float, breakpoints: Array) -> Array:
    """Uniform h-grid on [0, horizon] refined by the switch instants.

    Grid nodes within a relative tolerance of a switch instant are snapped
    onto it, so every switch instant in (0, horizon) appears exactly once.
    """
    if not (h > 0 and horizon > 0):
        raise ValueError("need h > 0 and horizon > 0")
    count = int(np.floor(horizon / h * (1 + 1e-12)))
    base = np.arange(count + 1) * h
    base = base[base < horizon * (1 - 1e-12)]
    pts = [(float(t), False) for t in base]
    pts.append((float(horizon), False))
    for b in np.asarray(breakpoints, dtype=float):
        if 0.0 < b < horizon:
            pts.append((float(b), True))
    pts.sort(key=lambda p: p[0])
    tol = 1e-9 * h
    merged: list[tuple[float, bool]] = []
    for t, is_switch in pts:
        if merged and t - merged[-1][0] <= tol:
            prev_t, prev_switch = merged[-1]
            # switch instants win the merge so they appear exactly
            merged[-1] = (t if is_switch else prev_t,
                          prev_switch or is_switch)
        else:
            merged.append((t, is_switch))
    return np.array([t for t, _ in merged])


def explicit_step(mode: ModeDescriptor, x: Array, h: float,
                  t: float = 0.0) -> Array:
    """One projected subgradient step (generic path)."""
    x = mode.constraint.require_member(np.asarray(x, dtype=float))
    g = mode.objective.min_norm_subgradient(x, t)
    return mode.constraint.project(x - h * g)


def proximal_step(mode: ModeDescriptor, x: Array, h: float,
                  t: float = 0.0) -> Array:
    x = mode.constraint.require_member(np.asarray(x, dtype=float))
    return mode.prox_step(x, h, t)


def step(mode: ModeDescriptor, scheme: StepScheme, x: Array,
         t: float = 0.0) -> Array:
    if scheme.kind == "proximal":
        return proximal_step(mode, x, scheme.h, t)
    return explicit_step(mode, x, scheme.h, t)


def _spans(step_modes: NDArray[np.int64]):
    """Maximal runs of equal values: yields (start, stop, mode)."""
    start = 0
    for i in range(1, step_modes.size + 1):
        if i == step_modes.size or step_modes[i] != step_modes[start]:
            yield start, i, int(step_modes[start])
            start = i


def simulate(modes: list[ModeDescriptor], signal: SwitchingSignal, x0: Array,
             horizon: float, scheme: StepScheme = StepScheme(),
             switch_policy: str = TERMINATE_ON_SWITCH) -> Trajectory:
    """Integrate the switched flow on [0, horizon].

    At each switch instant the state must be feasible for the incoming
    mode; the ``terminate`` policy ends the run there with a
    ``left_constraint`` termination, the ``reproject`` policy projects the
    state onto the incoming constraint set and continues.
    """
    if switch_policy not in (TERMINATE_ON_SWITCH, REPROJECT_ON_SWITCH):
        raise ValueError(f"unknown switch policy {switch_policy!r}")
    if not modes:
        raise ValueError("need at least one mode")
    layout = modes[0].layout
    dim = modes[0].dim
    if any(m.dim != dim for m in modes):
        raise ValueError("modes disagree on state dimension")
    if int(signal.modes.max()) >= len(modes):
        raise ValueError("signal references a mode index out of range")

    x0 = np.asarray(x0, dtype=float)
    first_mode = modes[signal.mode_at(0.0)]
    if not first_mode.constraint.contains(x0):
        raise InitialConditionOutsideSet(
            f"x0 at distance {first_mode.constraint.distance(x0):.3e} from "
            f"the initial constraint set"
        )

    grid = build_grid(scheme.h, horizon, signal.breakpoints)
    N = grid.size
    states = np.empty((N, dim))
    gnorms = np.zeros(max(N - 1, 0))
    states[0] = x0
    step_mode_ids = signal.modes_at(grid[:-1]) if N > 1 else np.zeros(
        0, dtype=np.int64)

    termination = Termination(COMPLETED, float(grid[-1]),
                              int(signal.mode_at(grid[-1])))
    filled = N
    x = x0.copy()
    kernel_cache: dict[int, object] = {}
    explicit = scheme.kind == "explicit"

    stop = False
    for a, b, q in _spans(step_mode_ids):
        mode = modes[q]
        t_switch = float(grid[a])
        if a > 0:
            # entering a new mode: enforce feasibility per the policy
            if not mode.constraint.contains(x):
                if switch_policy == TERMINATE_ON_SWITCH:
                    termination = Termination(LEFT_CONSTRAINT, t_switch, q)
                    filled = a + 1
                    stop = True
                    break
                x = mode.constraint.project(x)
                states[a] = x

        spec = None
        if explicit:
            if q not in kernel_cache:
                raw = _kernels.encode_mode(mode)
                kernel_cache[q] = (_kernels.prepare(raw)
                                   if raw is not None else None)
            spec = kernel_cache[q]

        if spec is not None:
            ts = np.ascontiguousarray(grid[a:b])
            dts = np.ascontiguousarray(np.diff(grid[a:b + 1]))
            status, done = _kernels.run_span(
                spec, np.ascontiguousarray(x), ts, dts,
                states[a + 1:b + 1], gnorms[a:b])
            x = states[a + done].copy()
            if status != 0:
                termination = Termination(DIVERGED, float(grid[a + done]), q)
                filled = a + done + 1
                stop = True
                break
        else:
            for s in range(a, b):
                t = float(grid[s])
                dt = float(grid[s + 1] - grid[s])
                if explicit:
                    g = mode.objective.min_norm_subgradient(x, t)
                    gnorms[s] = float(np.linalg.norm(g))
                    x = mode.constraint.project(x - dt * g)
                else:
                    u = mode.prox_step(x, dt, t)
                    gnorms[s] = float(np.linalg.norm(x - u)) / dt
                    x = u
                states[s + 1] = x
                if not np.all(np.isfinite(x)) or \
                        np.linalg.norm(x) > DIVERGE_NORM:
                    termination = Termination(DIVERGED, float(grid[s + 1]), q)
                    filled = s + 2
                    stop = True
                    break
        if stop:
            break

    times = grid[:filled]
    mode_series = signal.modes_at(times)
    if filled > 1:
        mode_series = np.append(step_mode_ids[:filled - 1],
                                step_mode_ids[filled - 2])
    return Trajectory(
        times=times,
        states=states[:filled],
        modes=mode_series,
        step_norms=gnorms[:max(filled - 1, 0)],
        termination=termination,
        scheme=scheme,
        signal=signal,
        layout=layout,
    )


def simulate_monotone(maps, signal: SwitchingSignal, x0: Array,
                      horizon: float, h: float = 1e-3) -> Trajectory:
    """Explicit Euler for switched monotone-map flows  x' = -M_q(x).

    ``maps`` is a sequence of objects with an ``evaluate(x)`` method (see
    :mod:`swflow.maps`); no constraints are involved.
    """
    maps = list(maps)
    x0 = np.asarray(x0, dtype=float)
    grid = build_grid(h, horizon, signal.breakpoints)
    N = grid.size
    states = np.empty((N, x0.size))
    gnorms = np.zeros(max(N - 1, 0))
    states[0] = x0
    step_mode_ids = signal.modes_at(grid[:-1]) if N > 1 else np.zeros(
        0, dtype=np.int64)
    termination = Termination(COMPLETED, float(grid[-1]),
                              int(signal.mode_at(grid[-1])))
    filled = N
    x = x0.copy()
    for s in range(N - 1):
        q = int(step_mode_ids[s])
        v = np.asarray(maps[q].evaluate(x), dtype=float)
        gnorms[s] = float(np.linalg.norm(v))
        x = x - (grid[s + 1] - grid[s]) * v
        states[s + 1] = x
        if not np.all(np.isfinite(x)) or np.linalg.norm(x) > DIVERGE_NORM:
            termination = Termination(DIVERGED, float(grid[s + 1]), q)
            filled = s + 2
            break
    times = grid[:filled]
    mode_series = signal.modes_at(times)
    if filled > 1:
        mode_series = np.append(step_mode_ids[:filled - 1],
                                step_mode_ids[filled - 2])
    return Trajectory(
        times=times,
        states=states[:filled],
        modes=mode_series,
        step_norms=gnorms[:max(filled - 1, 0)],
        termination=termination,
        scheme=StepScheme("explicit", h),
        signal=signal,
        layout=None,
    )


def pairwise_distance_series(a: Trajectory, b: Trajectory) -> Array:
    """|x_a(t) - x_b(t)| on the shared grid; grids must match exactly."""
    if a.times.shape != b.times.shape or not np.array_equal(a.times, b.times):
        raise GridMismatch("trajectories live on different time grids")
    return np.linalg.norm(a.states - b.states, axis=1)


# ---------------------------------------------------------------------------
# trace files


def write_trajectory_csv(path: str, traj: Trajectory) -> None:
    """CSV trace: header  t,q,x_0,...,x_{n-1}  and one row per grid node.

    Floats are written with shortest round-trip formatting, so identical
    trajectories produce byte-identical files.
    """
    n = traj.states.shape[1]
    header = "t,q," + ",".join(f"x_{i}" for i in range(n))
    lines = [header]
    for t, q, row in zip(traj.times, traj.modes, traj.states):
        lines.append(f"{float(t)!r},{int(q)}," + ",".join(repr(float(v))
                                                          for v in row))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def trajectory_summary(traj: Trajectory) -> dict:
    return {
        "schema": "swflow-trace/1",
        "scheme": traj.scheme.kind,
        "h": traj.scheme.h,
        "steps": int(traj.step_count),
        "backend": _kernels.BACKEND,
        "termination": {
            "status": traj.termination.status,
            "time": traj.termination.time,
            "mode": traj.termination.mode,
        },
        "final_time": traj.final_time,
        "final_state": [float(v) for v in traj.final_state],
        "max_step_norm": (float(np.max(traj.step_norms))
                          if traj.step_norms.size else 0.0),
    }


def write_trajectory(path_base: str, traj: Trajectory) -> tuple[str, str]:
    """Write CSV + JSON sidecar; returns both paths."""
    csv_path = path_base + ".csv"
    json_path = path_base + ".json"
    write_trajectory_csv(csv_path, traj)
    with open(json_path, "w") as fh:
        json.dump(trajectory_summary(traj), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return csv_path, json_path


def read_trajectory_csv(path: str) -> tuple[Array, NDArray[np.int64], Array]:
    """(times, modes, states) back from a CSV trace."""
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        if header[:2] != ["t", "q"]:
            raise ValueError(f"{os.path.basename(path)}: not a trajectory CSV")
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    times = data[:, 0]
    modes = data[:, 1].astype(np.int64)
    states = data[:, 2:]
    return times, modes, states
