"""Timing comparison between the compiled kernels and the numpy fallback.

Run from the repository root:

    python3 benchmarks/bench_kernels.py [--repeats 5]

Each row samples every band of a graph on an n x n grid through both
backends and reports the best wall time per backend plus the speedup.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from zonefold._kernels import _pure
from zonefold.floquet import grid_axis
from zonefold.graph import build_diamond, build_hexagonal, build_hypercubic

try:
    from zonefold._kernels import _fast
except ImportError:
    _fast = None


def assembly_args(graph, n: int):
    from zonefold.floquet import _plan

    plan = _plan(graph)
    axes = [grid_axis(n) for _ in range(graph.dimension)]
    mesh = np.meshgrid(*axes, indexing="ij")
    kpts = np.stack([m.ravel() for m in mesh], axis=1)
    return (
        plan.nu, plan.base_diag, plan.loop_v, plan.loop_off,
        plan.pair_u, plan.pair_v, plan.pair_off, kpts,
    )


def best_time(fn, args, repeats: int) -> float:
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - start)
    return best


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=5)
    ns = parser.parse_args()

    cases = [
        ("hexagonal 64x64", build_hexagonal(1.0), 64),
        ("hexagonal 128x128", build_hexagonal(1.0), 128),
        ("cubic3 32x32x32", build_hypercubic(3), 32),
        ("diamond 48x48x48", build_diamond(1.0), 48),
    ]

    print(f"{'case':<20} {'points':>8} {'pure':>10} {'compiled':>10} {'speedup':>8}")
    for name, graph, n in cases:
        args = assembly_args(graph, n)
        npts = args[-1].shape[0]
        t_pure = best_time(_pure.sample_bands, args, ns.repeats)
        if _fast is None:
            print(f"{name:<20} {npts:>8} {t_pure:>9.4f}s {'n/a':>10} {'n/a':>8}")
            continue
        t_fast = best_time(_fast.sample_bands, args, ns.repeats)
        a = _pure.sample_bands(*args)
        b = _fast.sample_bands(*args)
        drift = np.abs(a - b).max()
        print(f"{name:<20} {npts:>8} {t_pure:>9.4f}s {t_fast:>9.4f}s "
              f"{t_pure / t_fast:>7.1f}x  (max drift {drift:.2e})")


if __name__ == "__main__":
    main()
