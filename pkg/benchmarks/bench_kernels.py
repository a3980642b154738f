"""Benchmark the stepping kernels: compiled extension vs pure NumPy.

Both backends run the same encoded mode over the same grid from the same
start point.  The script reports steps per second for each backend, the
speedup, and the worst disagreement between the two trajectories, which
should sit at rounding level.

Usage:
    python3 benchmarks/bench_kernels.py [--agents 10] [--dim 2]
                                        [--steps 100000] [--repeats 3]
"""

import argparse
import time

import numpy as np

from swflow import AgentLayout, Box, ObjectiveDescriptor, PNormCoupling, Product
from swflow._kernels import available_backends, encode_mode
from swflow.graphs import WeightedGraph
from swflow.objectives import ModeDescriptor


def build_mode(agents: int, dim: int) -> ModeDescriptor:
    layout = AgentLayout(agents, dim)
    edges = [(i, j, 1.0 / agents) for i in range(agents)
             for j in range(i + 1, agents)]
    graph = WeightedGraph.from_edges(agents, edges)
    objective = ObjectiveDescriptor(layout=layout,
                                    coupling=PNormCoupling(2, squared=True),
                                    graph=graph)
    cell = Box(np.full(dim, -5.0), np.full(dim, 5.0))
    constraint = Product(tuple(cell for _ in range(agents)))
    return ModeDescriptor(objective=objective, constraint=constraint,
                          name="bench")


def run_backend(backend, spec, x0, ts, dts):
    n = ts.size
    states = np.empty((n, x0.size))
    gnorms = np.empty(n)
    x = x0.copy()
    t0 = time.perf_counter()
    status, done = backend.run_span(backend.prepare(spec), x, ts, dts,
                                    states, gnorms)
    elapsed = time.perf_counter() - t0
    if status != 0 or done != n:
        raise RuntimeError(f"backend {backend.name} stopped early "
                           f"(status={status}, done={done})")
    return elapsed, states, gnorms


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--agents", type=int, default=10)
    ap.add_argument("--dim", type=int, default=2)
    ap.add_argument("--steps", type=int, default=100_000)
    ap.add_argument("--repeats", type=int, default=3)
    ap.add_argument("--h", type=float, default=1e-4)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    mode = build_mode(args.agents, args.dim)
    spec = encode_mode(mode)
    if spec is None:
        print("mode is not kernel-encodable; nothing to benchmark")
        return 1

    rng = np.random.default_rng(args.seed)
    x0 = rng.uniform(-3.0, 3.0, args.agents * args.dim)
    x0 = mode.constraint.project(x0)
    ts = np.arange(args.steps, dtype=float) * args.h
    dts = np.full(args.steps, args.h)

    backends = available_backends()
    print(f"state size {x0.size}, {args.steps} steps, h={args.h:g}, "
          f"backends: {', '.join(sorted(backends))}")

    timings = {}
    results = {}
    for name in sorted(backends):
        best = np.inf
        for _ in range(args.repeats):
            elapsed, states, gnorms = run_backend(backends[name], spec,
                                                  x0, ts, dts)
            best = min(best, elapsed)
        timings[name] = best
        results[name] = (states, gnorms)
        print(f"  {name:10s} {best:8.3f}s   "
              f"{args.steps / best:12,.0f} steps/s")

    if len(results) == 2:
        sa, ga = results["pure"]
        sb, gb = results["compiled"]
        dstate = float(np.max(np.abs(sa - sb)))
        dnorm = float(np.max(np.abs(ga - gb)))
        print(f"  agreement: max state diff {dstate:.3e}, "
              f"max gnorm diff {dnorm:.3e}")
        print(f"  speedup: {timings['pure'] / timings['compiled']:.1f}x")
        if dstate > 1e-9 or dnorm > 1e-9:
            print("  MISMATCH above 1e-9")
            return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
