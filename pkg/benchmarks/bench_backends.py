#!/usr/bin/env python3
"""Benchmark the numba kernels against the pure-numpy fallback.

Both implementations come from the same source (unitons.kernels.PY_IMPLS);
the numba path is the same functions under @njit.  Timings cover the raw
chain-build kernel and the end-to-end harmonicity residual, which is the
dominant cost of the verification suite.

Run:  python benchmarks/bench_backends.py [--points 200] [--residuals 20]
"""

import argparse
import time

import numpy as np

from unitons import HarmonicMapSampler, draw_sample_points, harmonicity_residual, random_data
from unitons import kernels
from unitons.builder import _tables
from unitons.meromorphic import POLE_TOL
from unitons.projections import RANK_TOL


def build_backends():
    backends = {"numpy": (kernels.PY_IMPLS["eval_table"], kernels.PY_IMPLS["build_chain"])}
    try:
        import numba

        backends["numba"] = (
            numba.njit(cache=True)(kernels.PY_IMPLS["eval_table"]),
            numba.njit(cache=True)(kernels.PY_IMPLS["build_chain"]),
        )
    except ImportError:
        print("numba not importable; benchmarking the numpy path only")
    return backends


def time_kernel(eval_table, build_chain, tables, points):
    t0 = time.perf_counter()
    for z in points:
        vals, ok = eval_table(tables.nums, tables.dens, tables.dnorms, z, POLE_TOL)
        build_chain(vals, RANK_TOL)
    return time.perf_counter() - t0


def time_residuals(sampler, points):
    t0 = time.perf_counter()
    for z in points:
        harmonicity_residual(sampler.map_at, z)
    return time.perf_counter() - t0


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--points", type=int, default=200, help="chain builds per backend")
    ap.add_argument("--residuals", type=int, default=20, help="harmonicity residuals per backend")
    args = ap.parse_args()

    data = random_data(4, 3, 3, sparsity_pattern=(1, 1, 1), seed=1)
    tables = _tables(data)
    sampler = HarmonicMapSampler(data)
    pts = draw_sample_points(data, args.residuals, seed=2, stencil_h=1e-3)
    grid = [complex(x, y) for x in np.linspace(-1.5, 1.5, args.points // 10 or 1)
            for y in np.linspace(-1.5, 1.5, 10)]

    backends = build_backends()
    results = {}
    for name, (eval_table, build_chain) in backends.items():
        # warm up (JIT compile on the numba path)
        time_kernel(eval_table, build_chain, tables, grid[:2])
        t_kernel = time_kernel(eval_table, build_chain, tables, grid)
        # route the whole builder through this backend for the end-to-end number
        saved = kernels.eval_table, kernels.build_chain
        kernels.eval_table, kernels.build_chain = eval_table, build_chain
        try:
            time_residuals(sampler, pts[:1])  # warm caches
            t_e2e = time_residuals(sampler, pts)
        finally:
            kernels.eval_table, kernels.build_chain = saved
        results[name] = (t_kernel, t_e2e)
        print(f"{name:6s}  chain builds: {1e3 * t_kernel / len(grid):8.3f} ms/fiber   "
              f"harmonicity: {1e3 * t_e2e / len(pts):8.2f} ms/point")

    if "numba" in results and "numpy" in results:
        ker = results["numpy"][0] / results["numba"][0]
        e2e = results["numpy"][1] / results["numba"][1]
        print(f"speedup numba vs numpy: kernel {ker:.1f}x, end-to-end {e2e:.1f}x")


if __name__ == "__main__":
    main()
