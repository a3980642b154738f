"""Scenario execution, expected-outcome evaluation, and report files.

``run_scenario`` integrates the flow and grades every check the scenario
declares; a check with ``expect=False`` counts as OK exactly when the
underlying verdict is negative (documented counterexamples).  The report
writer emits a trajectory CSV, a JSON report, and a plain-text summary,
all byte-deterministic for a fixed scenario.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .integrate import COMPLETED, StepScheme, Trajectory, simulate, \
    simulate_monotone, write_trajectory
from .monitors import demipositivity_probe, limit_detect, lyapunov_check, \
    per_mode_nonexpansiveness, residuals
from .objectives import argmin_oracle, intersect_oracles
from .presets import CheckSpec, Scenario, preset
from .sets import Box
from .state import block_mean, consensus_error
from .switching import make_round_robin, recurrence_report

REPORT_SCHEMA = "swflow-report/1"


@dataclass
class CheckResult:
    kind: str
    observed: bool
    expected: bool
    detail: str

    @property
    def ok(self) -> bool:
        return self.observed == self.expected

    def as_json(self) -> dict:
        return {
            "kind": self.kind,
            "observed": self.observed,
            "expected": self.expected,
            "ok": self.ok,
            "detail": self.detail,
        }


class _Context:
    """Lazily computed shared pieces (oracles, residual callables)."""

    def __init__(self, scenario: Scenario, traj: Trajectory):
        self.scenario = scenario
        self.traj = traj
        self._oracles = None
        self._residual_report = None

    @property
    def modes(self):
        return list(self.scenario.modes) if self.scenario.kind == \
            "subgradient" else None

    @property
    def oracles(self):
        if self._oracles is None and self.scenario.kind == "subgradient":
            self._oracles = [argmin_oracle(m) for m in self.scenario.modes]
        return self._oracles

    @property
    def residual_fns(self):
        sets = self.scenario.residual_sets
        if sets is None:
            return None
        return [lambda X, s=s: s.distance_batch(np.atleast_2d(X))
                for s in sets]

    def residual_report(self, eps: float):
        if self._residual_report is None or \
                self._residual_report.eps != eps:
            self._residual_report = residuals(self.traj, self.modes,
                                              oracles=self.oracles, eps=eps)
        return self._residual_report


def _fmt(x: float) -> str:
    return f"{x:.3e}"


def _check_lyapunov(ctx: _Context, p: dict) -> tuple[bool, str]:
    rep = lyapunov_check(ctx.traj, ctx.scenario.anchor, modes=ctx.modes,
                         oracles=ctx.oracles,
                         residual_fns=ctx.residual_fns,
                         atol=float(p.get("atol", 1e-10)))
    return rep.passed, (f"violations={rep.violations}, "
                        f"worst_excess={_fmt(rep.worst_excess)}")


def _check_nonexpansiveness(ctx: _Context, p: dict) -> tuple[bool, str]:
    anchors = ctx.scenario.anchors_per_mode()
    if anchors is None:
        raise ValueError("nonexpansiveness check needs anchors")
    rep = per_mode_nonexpansiveness(ctx.traj, anchors, modes=ctx.modes,
                                    oracles=ctx.oracles,
                                    residual_fns=ctx.residual_fns,
                                    atol=float(p.get("atol", 1e-12)))
    return rep.passed, (f"violations={rep.violations}, "
                        f"worst_excess={_fmt(rep.worst_excess)}, "
                        f"runs={rep.runs_checked}")


def _check_residual_all(ctx: _Context, p: dict) -> tuple[bool, str]:
    rep = ctx.residual_report(float(p.get("eps", 1e-6)))
    return rep.all_below, "terminal=" + ",".join(_fmt(v)
                                                 for v in rep.terminal)


def _check_residual_persistent(ctx: _Context, p: dict) -> tuple[bool, str]:
    rep = ctx.residual_report(float(p.get("eps", 1e-6)))
    vals = ",".join(_fmt(rep.terminal[q]) for q in rep.persistent_modes)
    return rep.persistent_below, (f"persistent={rep.persistent_modes}, "
                                  f"terminal=[{vals}]")


def _check_limit_detect(ctx: _Context, p: dict) -> tuple[bool, str]:
    rep = limit_detect(ctx.traj,
                       tail_fraction=float(p.get("tail_fraction", 0.2)),
                       eps=float(p.get("eps", 1e-5)))
    return rep.is_cauchy, (f"max_pairwise={_fmt(rep.max_pairwise)} over "
                           f"{rep.tail_nodes} tail nodes")


def _check_consensus(ctx: _Context, p: dict) -> tuple[bool, str]:
    layout = ctx.scenario.layout
    if layout is None:
        raise ValueError("consensus check needs an agent layout")
    err = consensus_error(layout, ctx.traj.final_state)
    tol = float(p.get("tol", 1e-4))
    return err <= tol, f"consensus_error={_fmt(err)} vs tol={_fmt(tol)}"


def _check_limit_at(ctx: _Context, p: dict) -> tuple[bool, str]:
    point = np.asarray(p["point"], dtype=float)
    dist = float(np.linalg.norm(ctx.traj.final_state - point))
    tol = float(p.get("tol", 1e-4))
    return dist <= tol, f"distance={_fmt(dist)} vs tol={_fmt(tol)}"


def _check_limit_consensus_in_box(ctx: _Context, p: dict) -> tuple[bool, str]:
    layout = ctx.scenario.layout
    tol = float(p.get("tol", 1e-5))
    err = consensus_error(layout, ctx.traj.final_state)
    mean = block_mean(layout, ctx.traj.final_state)
    box = Box(np.asarray(p["lo"], dtype=float),
              np.asarray(p["hi"], dtype=float))
    dist = box.distance(mean)
    ok = err <= tol and dist <= tol
    return ok, (f"consensus_error={_fmt(err)}, "
                f"box_distance={_fmt(dist)} vs tol={_fmt(tol)}")


def _check_limit_in_persistent_argmin(ctx: _Context,
                                      p: dict) -> tuple[bool, str]:
    rep = recurrence_report(ctx.traj.signal, horizon=ctx.traj.final_time)
    persistent = [int(q) for q in rep.persistent_modes]
    oracle = intersect_oracles(
        ctx.scenario.layout,
        [ctx.oracles[q] for q in persistent])
    dist = oracle.distance(ctx.traj.final_state)
    tol = float(p.get("tol", 1e-4))
    return dist <= tol, (f"distance={_fmt(dist)} to argmin of modes "
                         f"{persistent} vs tol={_fmt(tol)}")


def _check_conservation(ctx: _Context, p: dict) -> tuple[bool, str]:
    layout = ctx.scenario.layout
    if layout is None:
        raise ValueError("conservation check needs an agent layout")
    blocks = ctx.traj.states.reshape(-1, layout.agents, layout.dim)
    sums = blocks.sum(axis=1)
    drift = float(np.max(np.abs(sums - sums[0])))
    budget = float(p.get("tol_per_time", 1e-9)) * max(ctx.traj.final_time,
                                                      1.0)
    return drift <= budget, f"drift={_fmt(drift)} vs budget={_fmt(budget)}"


def _check_feasible_throughout(ctx: _Context, p: dict) -> tuple[bool, str]:
    tol = float(p.get("tol", 1e-6))
    worst = 0.0
    for a, b, q in _mode_spans(ctx.traj):
        cset = ctx.scenario.modes[q].constraint
        dists = cset.distance_batch(ctx.traj.states[a:b + 1])
        worst = max(worst, float(np.max(dists)))
    return worst <= tol, f"max_distance={_fmt(worst)} vs tol={_fmt(tol)}"


def _check_radius_band(ctx: _Context, p: dict) -> tuple[bool, str]:
    radii = np.linalg.norm(ctx.traj.states, axis=1)
    lo, hi = float(p["lo"]), float(p["hi"])
    slack = float(p.get("slack", 1e-12))
    ok = bool(radii.min() >= lo - slack and radii.max() <= hi + slack)
    return ok, (f"radius range [{_fmt(float(radii.min()))}, "
                f"{_fmt(float(radii.max()))}] vs band [{lo}, {hi}]")


def _check_demipositivity(ctx: _Context, p: dict) -> tuple[bool, str]:
    if ctx.scenario.kind != "monotone":
        raise ValueError("demipositivity check needs a monotone scenario")
    map_desc = ctx.scenario.maps[int(p.get("map", 0))]
    rep = demipositivity_probe(
        map_desc, anchor=ctx.scenario.anchor,
        samples=int(p.get("samples", 10_000)),
        seed=int(p.get("seed", 0)),
        half_width=float(p.get("half_width", 2.0)))
    if rep.witness is not None:
        detail = ("witness=" + np.array2string(rep.witness, precision=6)
                  + f", pairing={_fmt(rep.witness_pairing)}")
    else:
        detail = (f"no witness in {rep.samples_checked} samples, "
                  f"min_pairing_ratio={_fmt(rep.min_pairing_ratio)}")
    return rep.is_violated, detail


def _check_envelope(ctx: _Context, p: dict) -> tuple[bool, str]:
    """Static lower-envelope objective never exceeds the true objective."""
    rng = np.random.default_rng(int(p.get("seed", 0)))
    samples = int(p.get("samples", 10_000))
    hw = float(p.get("half_width", 3.0))
    tol = float(p.get("tol", 1e-9))
    worst = -np.inf
    modes = ctx.scenario.modes
    per_mode = max(samples // len(modes), 1)
    for mode in modes:
        env = mode.objective.lower_envelope()
        xs = rng.uniform(-hw, hw, size=(per_mode, mode.dim))
        ts = rng.uniform(0.0, ctx.traj.final_time, size=per_mode)
        gap = env.value_batch(xs, 0.0) - mode.objective.value_batch(xs, ts)
        worst = max(worst, float(np.max(gap)))
    return worst <= tol, f"max(envelope - value)={_fmt(worst)}"


def _mode_spans(traj: Trajectory):
    sm = traj.step_modes()
    start = 0
    for i in range(1, sm.size + 1):
        if i == sm.size or sm[i] != sm[start]:
            yield start, i, int(sm[start])
            start = i


_CHECKS = {
    "lyapunov": _check_lyapunov,
    "nonexpansiveness": _check_nonexpansiveness,
    "residual_all": _check_residual_all,
    "residual_persistent": _check_residual_persistent,
    "limit_detect": _check_limit_detect,
    "consensus": _check_consensus,
    "limit_at": _check_limit_at,
    "limit_consensus_in_box": _check_limit_consensus_in_box,
    "limit_in_persistent_argmin": _check_limit_in_persistent_argmin,
    "conservation": _check_conservation,
    "feasible_throughout": _check_feasible_throughout,
    "radius_band": _check_radius_band,
    "demipositivity": _check_demipositivity,
    "envelope": _check_envelope,
}


def evaluate_checks(scenario: Scenario,
                    traj: Trajectory) -> list[CheckResult]:
    ctx = _Context(scenario, traj)
    results = [CheckResult(
        kind="completed",
        observed=traj.termination.status == COMPLETED,
        expected=True,
        detail=(f"termination={traj.termination.status} at "
                f"t={traj.termination.time:g}"),
    )]
    for spec in scenario.checks:
        fn = _CHECKS.get(spec.kind)
        if fn is None:
            raise ValueError(f"unknown check kind {spec.kind!r}")
        observed, detail = fn(ctx, spec.params)
        results.append(CheckResult(kind=spec.kind, observed=bool(observed),
                                   expected=spec.expect, detail=detail))
    return results


def run_scenario(scenario: Scenario) -> tuple[Trajectory, list[CheckResult]]:
    if scenario.kind == "subgradient":
        traj = simulate(list(scenario.modes), scenario.signal, scenario.x0,
                        scenario.horizon, scheme=scenario.scheme)
    else:
        traj = simulate_monotone(list(scenario.maps), scenario.signal,
                                 scenario.x0, scenario.horizon,
                                 h=scenario.scheme.h)
    return traj, evaluate_checks(scenario, traj)


# ---------------------------------------------------------------------------
# artifact emission


def report_json(scenario: Scenario, traj: Trajectory,
                results: list[CheckResult]) -> dict:
    return {
        "schema": REPORT_SCHEMA,
        "scenario": scenario.name,
        "kind": scenario.kind,
        "backend": _kernels.BACKEND,
        "scheme": scenario.scheme.kind,
        "h": scenario.scheme.h,
        "horizon": scenario.horizon,
        "seed": scenario.seed,
        "termination": traj.termination.status,
        "final_state": [float(v) for v in traj.final_state],
        "checks": [r.as_json() for r in results],
        "all_ok": all(r.ok for r in results),
    }


def summary_text(scenario: Scenario, traj: Trajectory,
                 results: list[CheckResult]) -> str:
    lines = [
        f"scenario: {scenario.name}",
        f"scheme:   {scenario.scheme.kind} (h={scenario.scheme.h:g}), "
        f"horizon {scenario.horizon:g}, backend {_kernels.BACKEND}",
        f"steps:    {traj.step_count}, termination "
        f"{traj.termination.status}",
    ]
    if scenario.description:
        lines.append(f"about:    {scenario.description}")
    lines.append("")
    for r in results:
        flag = "ok  " if r.ok else "FAIL"
        expect = "" if r.expected else " [expected-fail]"
        lines.append(f"  {flag} {r.kind:26}{expect} {r.detail}")
    lines.append("")
    lines.append("result: " + ("all checks ok"
                               if all(r.ok for r in results)
                               else "CHECK FAILURES"))
    return "\n".join(lines) + "\n"


def write_outputs(scenario: Scenario, traj: Trajectory,
                  results: list[CheckResult], out_dir: str) -> dict:
    os.makedirs(out_dir, exist_ok=True)
    base = os.path.join(out_dir, scenario.name)
    csv_path, trace_json = write_trajectory(base + "_trace", traj)
    report_path = base + "_report.json"
    with open(report_path, "w") as fh:
        json.dump(report_json(scenario, traj, results), fh, indent=2,
                  sort_keys=True)
        fh.write("\n")
    summary_path = base + "_summary.txt"
    with open(summary_path, "w") as fh:
        fh.write(summary_text(scenario, traj, results))
    return {
        "trace_csv": csv_path,
        "trace_json": trace_json,
        "report": report_path,
        "summary": summary_path,
    }


# ---------------------------------------------------------------------------
# parameter sweeps


def _with_param(base_name: str | None, scenario: Scenario, param: str,
                value: float) -> Scenario:
    from dataclasses import replace

    from .presets import random_scenario
    if base_name == "random" and param == "seed":
        return random_scenario(int(value))
    fresh = preset(base_name) if base_name else replace(scenario)
    if param == "h":
        fresh.scheme = StepScheme(fresh.scheme.kind, float(value))
    elif param == "horizon":
        fresh.horizon = float(value)
    elif param == "dwell":
        count = int(fresh.signal.modes.max()) + 1
        fresh.signal = make_round_robin(count, dwell=float(value),
                                        horizon=fresh.horizon)
    elif param == "seed":
        fresh.seed = int(value)
    else:
        raise ValueError(f"unknown sweep parameter {param!r}; "
                         f"use h, horizon, dwell, or seed")
    return fresh


def sweep(scenario: Scenario, param: str, values, *,
          base_name: str | None = None) -> dict:
    """Run the scenario once per parameter value.

    Returns a JSON-ready report with one row per cell: check verdicts plus
    the endpoint.  For an h-sweep the endpoint errors are measured against
    the extrapolated limit of the two finest runs; successive error ratios
    near h_new/h_old indicate the expected first-order accuracy.
    """
    values = [float(v) for v in values]
    rows = []
    finals = []
    for v in values:
        cell = _with_param(base_name, scenario, param, v)
        traj, results = run_scenario(cell)
        finals.append(traj.final_state.copy())
        rows.append({
            "param": param,
            "value": v,
            "all_ok": all(r.ok for r in results),
            "failed": [r.kind for r in results if not r.ok],
            "final_state": [float(x) for x in traj.final_state],
        })

    order = None
    if param == "h" and len(values) >= 3:
        idx = np.argsort(values)          # fine grids last
        fine, second = finals[idx[0]], finals[idx[1]]
        reference = 2.0 * np.asarray(fine) - np.asarray(second)
        errors = {}
        for i in idx:
            errors[i] = float(np.linalg.norm(finals[i] - reference))
        ratios = []
        orders = []
        ordered = list(idx[::-1])         # coarse -> fine
        for a, b in zip(ordered[:-1], ordered[1:]):
            rows[a]["error"] = errors[a]
            rows[b]["error"] = errors[b]
            if errors[a] > 0 and errors[b] > 0:
                ratios.append(errors[b] / errors[a])
                orders.append(np.log(errors[b] / errors[a])
                              / np.log(values[b] / values[a]))
        if ratios:
            order = {
                "ratios": [float(r) for r in ratios],
                "estimated_order": float(np.mean(orders)),
            }
    return {
        "schema": "swflow-sweep/1",
        "scenario": base_name or scenario.name,
        "param": param,
        "cells": rows,
        "order_estimate": order,
        "all_ok": all(r["all_ok"] for r in rows),
    }
