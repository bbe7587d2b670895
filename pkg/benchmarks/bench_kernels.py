"""Benchmark the kernel-matrix assembly backends.

The propagator's cost is dominated by building the dense N x N oscillatory
kernel.  This script times the compiled extension against the NumPy reference
on identical inputs and reports the median wall time and speedup per size.

Usage: python benchmarks/bench_kernels.py [--sizes 512,1024,2048] [--repeats 7]
"""

import argparse
import math
import time

import numpy as np

from hartree_exact import ModelParams
from hartree_exact._kernels import backend_name, build_kernel, numpy_build_kernel


def kernel_args(n: int):
    params = ModelParams(
        m=1.0, k=1.0, omega=0.9, hbar=1.0, E_field=0.1, a=0.5, b=0.3, c=0.2, kappa=0.4
    )
    freqs = params.frequencies()
    x = np.linspace(-25.0, 25.0, n)
    theta = freqs.Omega * 1.1
    pref = math.sqrt(params.m * freqs.Omega / (2.0 * math.pi * abs(math.sin(theta))))
    return dict(
        x=x,
        y=x,
        X_t=0.21,
        X_s=0.19,
        P_t=-0.05,
        P_s=0.0,
        dS=-0.37,
        hbar=params.hbar,
        m_omega=params.m * freqs.Omega,
        cos_th=math.cos(theta),
        sin_th=math.sin(theta),
        pref=pref * complex(math.cos(-math.pi / 4), math.sin(-math.pi / 4)),
    )


def median_time(fn, args, repeats: int) -> float:
    times = []
    for _ in range(repeats):
        start = time.perf_counter()
        fn(**args)
        times.append(time.perf_counter() - start)
    times.sort()
    return times[len(times) // 2]


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sizes", default="512,1024,2048")
    ap.add_argument("--repeats", type=int, default=7)
    opts = ap.parse_args()
    sizes = [int(s) for s in opts.sizes.split(",")]

    print(f"active backend: {backend_name()}")
    print(f"{'N':>6} {'compiled (ms)':>14} {'numpy (ms)':>12} {'speedup':>8}")
    for n in sizes:
        args = kernel_args(n)
        fast = build_kernel(**args)
        ref = numpy_build_kernel(**args)
        assert np.allclose(fast, ref, rtol=1e-12, atol=1e-13)
        t_fast = median_time(build_kernel, args, opts.repeats)
        t_ref = median_time(numpy_build_kernel, args, opts.repeats)
        print(f"{n:>6} {1e3 * t_fast:>14.2f} {1e3 * t_ref:>12.2f} {t_ref / t_fast:>8.2f}")


if __name__ == "__main__":
    main()
