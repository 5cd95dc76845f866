"""Time each kernel on the numpy and numba backends.

    python3 benchmarks/bench_kernels.py [--repeat 5] [--drops 20000]

The first numba call per kernel compiles (or loads the on-disk cache); it
is reported separately and excluded from the steady-state timings.
"""

import argparse
import time

import numpy as np

from sparse_ula import kernels
from sparse_ula.array import ArrayConfig
from sparse_ula.channel import OneRingParams
from sparse_ula.montecarlo import Scenario, simulate_rates


def inputs(drops, K=18, M=32, paths=11, seed=0):
    g = np.random.default_rng(seed)
    delta = np.linspace(-2, 2, 1 << 20)
    sin_paths = np.ascontiguousarray(g.uniform(-0.2, 0.2, size=(drops, K, paths)))
    gains = np.ascontiguousarray(g.normal(size=(drops, K, paths))
                                 + 1j * g.normal(size=(drops, K, paths)))
    H = kernels.get_impl("numpy").synthesize_channels(sin_paths, gains, M, 4.0)
    H = np.ascontiguousarray(H)
    snr = np.full(K, 100.0)
    users = np.zeros(drops, dtype=np.int64)
    return {
        "beam_gain": (delta, M, 4.0),
        "two_lobe_gain": (delta, M, 4.0, 1.6, 0.57, 5e-3),
        "synthesize_channels": (sin_paths, gains, M, 4.0),
        "mrc_sinr": (H, snr, users),
        "zf_sinr": (H, snr, users, 1e12),
        "mmse_sinr": (H, snr, users),
    }


def best_of(fn, args, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--drops", type=int, default=2000, help="batch size for the SINR kernels")
    ap.add_argument("--sim-drops", type=int, default=20000, help="drops for the end-to-end run")
    args = ap.parse_args()

    backends = kernels.available_backends()
    data = inputs(args.drops)
    print(f"{'kernel':<22}" + "".join(f"{b:>12}" for b in backends) + f"{'speedup':>10}")
    for name in kernels.KERNELS:
        row = {}
        for b in backends:
            fn = getattr(kernels.get_impl(b), name)
            t0 = time.perf_counter()
            fn(*data[name])
            first = time.perf_counter() - t0
            row[b] = best_of(fn, data[name], args.repeat)
            if b == "numba":
                row["compile"] = first
        line = f"{name:<22}" + "".join(f"{row[b] * 1e3:>10.2f}ms" for b in backends)
        if "numba" in row:
            line += f"{row['numpy'] / row['numba']:>9.1f}x  (first call {row['compile']:.2f}s)"
        print(line)

    print()
    before = kernels.BACKEND
    sc = Scenario(ArrayConfig(6, 8.0), 3, np.radians(6), 20.0, "mmse", OneRingParams(),
                  args.sim_drops, seed=1)
    for b in backends:
        kernels.set_backend(b)
        t0 = time.perf_counter()
        simulate_rates(sc)
        print(f"end-to-end one-ring MMSE, {args.sim_drops} drops, {b}: "
              f"{time.perf_counter() - t0:.2f}s")
    kernels.set_backend(before)


if __name__ == "__main__":
    main()
