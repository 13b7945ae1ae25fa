#!/usr/bin/env python3
"""Benchmark: compiled CSR exponential kernel vs the NumPy/SciPy fallback.

Times (a) raw exp(M) @ v applies on the Hamiltonian sparsity pattern of a
representative charging instance and (b) a short end-to-end trajectory,
for each available backend.

    python benchmarks/bench_kernels.py [--quick]
"""

import argparse
import time

import numpy as np

from dickeqb import ModelParams, PropagationConfig, propagate
from dickeqb._kernels import HAVE_COMPILED, CsrExpm
from dickeqb.dynamics import _Stepper


def time_call(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_raw_apply(params, backend, repeats):
    stepper = _Stepper(params, backend=backend)
    kern = stepper.kernel
    data = (-1e-3j) * stepper.data_on
    rng = np.random.default_rng(0)
    v = rng.normal(size=kern.dim) + 1j * rng.normal(size=kern.dim)
    v /= np.linalg.norm(v)
    # one warm-up, then best-of-N
    kern.apply(data, v)
    return time_call(lambda: kern.apply(data, v), repeats)


def bench_trajectory(params, backend, t_max):
    cfg = PropagationConfig(t_max=t_max, dt=1e-3, sample_stride=50)
    t0 = time.perf_counter()
    propagate(params, cfg, backend=backend)
    return time.perf_counter() - t0


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--quick", action="store_true", help="smaller workload")
    args = parser.parse_args()

    params = ModelParams(N=5, g=0.5, Omega=1.0, eta=0.8)  # dim 672
    repeats = 20 if args.quick else 100
    t_max = 0.5 if args.quick else 2.0

    backends = ["fallback"] + (["compiled"] if HAVE_COMPILED else [])
    if not HAVE_COMPILED:
        print("note: compiled extension not built (python setup.py build_ext --inplace)")

    print(f"instance: N={params.N}, N_ph={params.photon_cutoff}, "
          f"dim={params.dims.total_dim}")
    print(f"{'backend':<10} {'exp(M)v [ms]':>14} {'trajectory [s]':>16}")
    results = {}
    for backend in backends:
        raw = bench_raw_apply(params, backend, repeats) * 1e3
        traj = bench_trajectory(params, backend, t_max)
        results[backend] = (raw, traj)
        print(f"{backend:<10} {raw:>14.3f} {traj:>16.3f}")

    if len(results) == 2:
        raw_speedup = results["fallback"][0] / results["compiled"][0]
        traj_speedup = results["fallback"][1] / results["compiled"][1]
        print(f"\ncompiled speedup: {raw_speedup:.2f}x on raw applies, "
              f"{traj_speedup:.2f}x end-to-end")


if __name__ == "__main__":
    main()
