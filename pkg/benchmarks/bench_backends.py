#!/usr/bin/env python3
"""Benchmark the numba kernels against the pure-numpy fallback.

Times coverage computation and signal-aware routing on a paper-scale
scene for both backends and prints a small table. Run as:

    python3 benchmarks/bench_backends.py [--repeat N]
"""

import argparse
import statistics
import time

from ctmap.dataset import sample_pairs
from ctmap.envmodel import generate_random_environment
from ctmap.gridgraph import build_graph
from ctmap.propagation import compute_coverage
from ctmap.routing import plan_signal_aware


def timed(fn, repeat):
    fn()  # warm-up (numba JIT compile on first call)
    samples = []
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        samples.append(time.perf_counter() - start)
    return statistics.median(samples)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--width", type=float, default=700.0)
    parser.add_argument("--height", type=float, default=600.0)
    args = parser.parse_args()

    env, stations = generate_random_environment(
        42, width_m=args.width, height_m=args.height, n_blocks=25,
        block_size_range=(20, 60), n_stations=4)
    print(f"scene: {env.width_m:.0f}x{env.height_m:.0f} m, "
          f"{len(env.buildings)} buildings, {len(stations)} stations")

    results = {}
    for backend in ("numba", "numpy"):
        cov_t = timed(lambda: compute_coverage(env, stations, backend=backend),
                      args.repeat)
        cov = compute_coverage(env, stations, backend=backend)
        graph = build_graph(cov)
        pairs = sample_pairs(cov, 5, seed=1, min_separation_m=200.0)

        def route_all():
            for s, d in pairs:
                plan_signal_aware(graph, cov, s, d, backend=backend)

        route_t = timed(route_all, args.repeat) / len(pairs)
        results[backend] = (cov_t, route_t)

    print(f"\n{'backend':<8} {'coverage (s)':>14} {'route (s/query)':>17}")
    for backend, (cov_t, route_t) in results.items():
        print(f"{backend:<8} {cov_t:>14.4f} {route_t:>17.4f}")
    cov_speedup = results["numpy"][0] / results["numba"][0]
    route_speedup = results["numpy"][1] / results["numba"][1]
    print(f"\nnumba speedup: coverage {cov_speedup:.1f}x, "
          f"routing {route_speedup:.1f}x")


if __name__ == "__main__":
    main()
