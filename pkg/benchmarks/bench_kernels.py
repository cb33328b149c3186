#!/usr/bin/env python3
"""Benchmark the compiled kernels against the NumPy fallback.

Times the three hot kernels at several array sizes, then (optionally) an
end-to-end desk-scale solve per backend.  Run after building the extension:

    python benchmarks/bench_kernels.py [--end-to-end]
"""

import argparse
import os
import subprocess
import sys
import time

import numpy as np

from irsec.kernels import available_backends


def time_call(fn, *args, repeat=2000):
    best = float("inf")
    for _ in range(5):
        t0 = time.perf_counter()
        for _ in range(repeat):
            fn(*args)
        best = min(best, (time.perf_counter() - t0) / repeat)
    return best


def bench_kernels():
    backends = available_backends()
    if len(backends) < 2:
        print("note: compiled backend not built; timing the fallback only")
    rng = np.random.default_rng(0)
    print(f"{'kernel':<28}{'size':>6}" + "".join(f"{n:>14}" for n in backends))
    for m in (16, 64, 256, 1024):
        x = (rng.standard_normal(m) + 1j * rng.standard_normal(m)) / np.sqrt(m)
        a = np.sqrt(1.0 / (2 * m))
        rows = {
            "smoothed_box_penalty": (x, a, 1e-2),
            "smoothed_box_penalty_grad": (x, a, 1e-2),
        }
        for name, args in rows.items():
            times = [time_call(getattr(impl, name), *args) for impl in backends.values()]
            print(f"{name:<28}{m:>6}" + "".join(f"{t*1e6:>12.2f}us" for t in times))
        mu = np.sort(rng.uniform(0, 3, min(m, 64)))
        mu[0] = 0.0
        csq = rng.uniform(0.1, 2, mu.size)
        args = (mu, csq, 1.0, -0.5 + 1e-12)
        times = [
            time_call(impl.unit_norm_shift_root, *args, repeat=500)
            for impl in backends.values()
        ]
        print(f"{'unit_norm_shift_root':<28}{mu.size:>6}" + "".join(f"{t*1e6:>12.2f}us" for t in times))


def bench_end_to_end():
    script = (
        "import time, irsec;"
        "from irsec import experiments;"
        "cfg = irsec.SystemConfig.desk_scale();"
        "t0 = time.perf_counter();"
        "recs = [experiments.run_trial(cfg, s, seed) for seed in range(3)"
        " for s in ('wmmse_pdd', 'epprgd')];"
        "print(f'{time.perf_counter() - t0:.2f}')"
    )
    print("\nend-to-end: 3 seeds x (wmmse_pdd + epprgd) at desk scale")
    for forced, label in (("0", "auto (compiled if built)"), ("1", "pure python")):
        env = dict(os.environ, IRSEC_PURE_PYTHON=forced)
        out = subprocess.run(
            [sys.executable, "-c", script], env=env, capture_output=True, text=True
        )
        print(f"  {label:<26} {out.stdout.strip()}s")


if __name__ == "__main__":
    parser = argparse.ArgumentParser()
    parser.add_argument("--end-to-end", action="store_true")
    args = parser.parse_args()
    bench_kernels()
    if args.end_to_end:
        bench_end_to_end()
