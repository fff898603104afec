#!/usr/bin/env python3
"""Benchmark the compiled menu-evaluation kernel against the pure-numpy one.

The hot loop of the package is batched menu evaluation (grid-search oracles
and per-step environment rewards).  This script times both backends on the
same workloads and verifies they agree.

Usage: python scripts/benchmark_kernels.py [--repeats N]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from contractlab._kernels import available_backends
from contractlab.economics import quantize_types, type_probabilities


def make_workload(rng: np.random.Generator, n: int, K: int):
    grid = quantize_types(rng.uniform(5, 10), rng.uniform(10, 15), K)
    delta = type_probabilities(grid, 1.3, 1.7)
    quality = rng.uniform(0.0, 10.0, size=K)
    candidates = rng.uniform(0.0, 20.0, size=(n, K))
    return (quality, candidates, grid.phi, delta, 1.0,
            rng.uniform(1, 3), rng.uniform(5, 10), 0.0)


def time_backend(module, workload, repeats: int) -> float:
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        module.batch_menu_rewards(*workload)
        best = min(best, time.perf_counter() - start)
    return best


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    backends = available_backends()
    print(f"available backends: {', '.join(backends)}")
    if "compiled" not in backends:
        print("compiled kernel not built; nothing to compare")
        return 1

    rng = np.random.default_rng(0)
    print(f"{'workload':>24} {'pure':>12} {'compiled':>12} {'speedup':>9}")
    for K in (2, 3):
        for n in (1_000, 40_000, 200 ** 2):
            workload = make_workload(rng, n, K)
            v_pure, f_pure = backends["pure"].batch_menu_rewards(*workload)
            v_comp, f_comp = backends["compiled"].batch_menu_rewards(*workload)
            assert np.array_equal(np.asarray(f_pure), np.asarray(f_comp))
            assert np.allclose(v_pure, v_comp, atol=1e-10)
            t_pure = time_backend(backends["pure"], workload, args.repeats)
            t_comp = time_backend(backends["compiled"], workload,
                                  args.repeats)
            label = f"K={K}, n={n}"
            print(f"{label:>24} {t_pure * 1e3:>10.2f}ms "
                  f"{t_comp * 1e3:>10.2f}ms {t_pure / t_comp:>8.2f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
