"""Piecewise-constant, right-continuous mode signals.

A signal is a strictly increasing breakpoint grid starting at 0 together
with one mode index per breakpoint; mode ``modes[j]`` is active on
[breakpoints[j], breakpoints[j+1]) and the final mode holds forever.
Mode indices are 0-based positions into the scenario's mode list.
Consecutive repeats are merged on construction so each stored breakpoint
is a genuine switch.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

Array = NDArray[np.float64]


@dataclass(frozen=True)
class SwitchingSignal:
    breakpoints: Array
    modes: NDArray[np.int64]

    def __post_init__(self):
        bp = np.asarray(self.breakpoints, dtype=float)
        md = np.asarray(self.modes, dtype=np.int64)
        if bp.ndim != 1 or md.shape != bp.shape or bp.size == 0:
            raise ValueError("breakpoints and modes must be equal-length 1-D")
        if bp[0] != 0.0:
            raise ValueError("signal must start at t = 0")
        if np.any(np.diff(bp) <= 0):
            raise ValueError("breakpoints must be strictly increasing")
        if np.any(md < 0):
            raise ValueError("mode indices must be nonnegative")
        keep = np.ones(bp.size, dtype=bool)
        keep[1:] = md[1:] != md[:-1]
        object.__setattr__(self, "breakpoints", bp[keep])
        object.__setattr__(self, "modes", md[keep])

    @property
    def switch_count(self) -> int:
        return self.breakpoints.size - 1

    def mode_at(self, t: float) -> int:
        """Active mode at time t >= 0 (right-continuous)."""
        if t < 0:
            raise ValueError("signals are defined on t >= 0")
        j = int(np.searchsorted(self.breakpoints, t, side="right")) - 1
        return int(self.modes[j])

    def modes_at(self, ts: Array) -> NDArray[np.int64]:
        ts = np.asarray(ts, dtype=float)
        idx = np.searchsorted(self.breakpoints, ts, side="right") - 1
        return self.modes[np.maximum(idx, 0)]

    def mode_set(self) -> list[int]:
        return sorted(set(int(q) for q in self.modes))

    def switch_times_until(self, horizon: float) -> Array:
        """Interior switch instants in (0, horizon)."""
        bp = self.breakpoints
        return bp[(bp > 0) & (bp < horizon)]

    # -- algebra --------------------------------------------------------------

    def truncate(self, horizon: float) -> "SwitchingSignal":
        """Restriction to [0, horizon] (last mode still extends forever)."""
        if horizon <= 0:
            raise ValueError("horizon must be positive")
        keep = self.breakpoints <= horizon
        return SwitchingSignal(self.breakpoints[keep], self.modes[keep])

    def concatenate(self, other: "SwitchingSignal",
                    at: float) -> "SwitchingSignal":
        """This signal on [0, at), then ``other`` shifted to start at ``at``."""
        if at <= 0:
            raise ValueError("concatenation point must be positive")
        keep = self.breakpoints < at
        bp = np.concatenate([self.breakpoints[keep], other.breakpoints + at])
        md = np.concatenate([self.modes[keep], other.modes])
        return SwitchingSignal(bp, md)

    # -- measures -------------------------------------------------------------

    def interval_lengths(self, horizon: float) -> tuple[Array, Array]:
        """(modes, lengths) of the constancy intervals partitioning [0, horizon]."""
        bp = self.breakpoints[self.breakpoints < horizon]
        md = self.modes[: bp.size]
        ends = np.append(bp[1:], horizon)
        return md, ends - bp

    def mode_measures(self, horizon: float, mode_count: int | None = None,
                      start: float = 0.0) -> Array:
        """Lebesgue measure each mode occupies within [start, horizon].

        Interval lengths are combined with compensated summation so the
        per-mode measures partition the window to near machine precision.
        """
        if mode_count is None:
            mode_count = int(self.modes.max()) + 1
        bp = self.breakpoints[self.breakpoints < horizon]
        md = self.modes[: bp.size]
        ends = np.append(bp[1:], horizon)
        clipped = np.maximum(np.minimum(ends, horizon) - np.maximum(bp, start),
                             0.0)
        sums: list[list[float]] = [[] for _ in range(mode_count)]
        for q, length in zip(md, clipped):
            sums[int(q)].append(float(length))
        return np.array([math.fsum(s) for s in sums])


@dataclass(frozen=True)
class RecurrenceReport:
    """Which modes keep accumulating activation time as the horizon grows."""

    horizon: float
    measures: Array           # per-mode measure on [0, horizon]
    tail_measures: Array      # per-mode measure on [horizon/2, horizon]
    rates: Array              # measures / horizon
    persistent_modes: list[int]
    all_persistent: bool


def recurrence_report(signal: SwitchingSignal, horizon: float,
                      mode_count: int | None = None) -> RecurrenceReport:
    """Surrogate for eventual activity: a mode counts as persistent when it
    occupies positive measure on the second half window [horizon/2, horizon].
    """
    if mode_count is None:
        mode_count = int(signal.modes.max()) + 1
    measures = signal.mode_measures(horizon, mode_count)
    tail = signal.mode_measures(horizon, mode_count, start=horizon / 2.0)
    persistent = [q for q in range(mode_count) if tail[q] > 0.0]
    return RecurrenceReport(
        horizon=horizon,
        measures=measures,
        tail_measures=tail,
        rates=measures / horizon,
        persistent_modes=persistent,
        all_persistent=len(persistent) == mode_count,
    )


def make_constant(mode: int = 0) -> SwitchingSignal:
    return SwitchingSignal(np.array([0.0]), np.array([mode]))


def make_round_robin(mode_count: int, dwell: float,
                     horizon: float) -> SwitchingSignal:
    """Cycle 0, 1, ..., mode_count-1 with a fixed dwell, covering [0, horizon]."""
    if mode_count < 1 or dwell <= 0 or horizon <= 0:
        raise ValueError("need mode_count >= 1, dwell > 0, horizon > 0")
    count = int(np.ceil(horizon / dwell))
    bp = np.arange(count) * dwell
    keep = bp < horizon
    bp = bp[keep]
    modes = np.arange(bp.size) % mode_count
    return SwitchingSignal(bp, modes)


def make_random_dwell(mode_count: int, dwell_range: tuple[float, float],
                      horizon: float, seed: int) -> SwitchingSignal:
    """Uniformly random dwells; consecutive modes always differ (seeded)."""
    lo, hi = dwell_range
    if not (0 < lo <= hi):
        raise ValueError("need 0 < dwell_lo <= dwell_hi")
    rng = np.random.default_rng(seed)
    times = [0.0]
    modes = [int(rng.integers(0, mode_count))]
    t = float(rng.uniform(lo, hi))
    while t < horizon:
        times.append(t)
        if mode_count == 1:
            nxt = 0
        else:
            nxt = int(rng.integers(0, mode_count - 1))
            if nxt >= modes[-1]:
                nxt += 1
        modes.append(nxt)
        t += float(rng.uniform(lo, hi))
    return SwitchingSignal(np.array(times), np.array(modes))


def signal_to_json(signal: SwitchingSignal) -> str:
    """Serialize as a JSON array of [t_j, q_j] pairs."""
    pairs = [[float(t), int(q)]
             for t, q in zip(signal.breakpoints, signal.modes)]
    return json.dumps(pairs)


def signal_from_json(text: str) -> SwitchingSignal:
    pairs = json.loads(text)
    bp = np.array([p[0] for p in pairs], dtype=float)
    md = np.array([p[1] for p in pairs], dtype=np.int64)
    return SwitchingSignal(bp, md)
