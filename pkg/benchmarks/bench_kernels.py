"""Timing comparison of the compiled kernels against the pure-Python fallback.

Run with:  python3 benchmarks/bench_kernels.py [--sizes 10000,100000] [--repeat 5]

Both backends are imported directly, side-stepping the ARMSHAPER_PURE_PY
switch, so one process can time them against each other.
"""

import argparse
import time

import numpy as np

from armshaper import _kernels_py

try:
    from armshaper import _kernels as _kernels_c
except ImportError:
    _kernels_c = None


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def bench_modal_response(mod, u, dt):
    return lambda: mod.modal_response(u, dt, 2 * np.pi * 1.9, 0.01)


def bench_shape_channel(mod, y, amps, delays, n_out):
    return lambda: mod.shape_channel(y, amps, delays, n_out)


def run(sizes, repeat):
    rng = np.random.default_rng(0)
    rows = []
    for n in sizes:
        u = rng.normal(size=n).cumsum()
        amps = np.array([0.25, 0.25, 0.25, 0.25])
        delays = np.array([0.0, 13.2, 26.3, 39.5])
        n_out = n + 40

        cases = [
            (f"modal_response n={n}", bench_modal_response(_kernels_py, u, 0.01),
             bench_modal_response(_kernels_c, u, 0.01) if _kernels_c else None),
            (f"shape_channel  n={n}", bench_shape_channel(_kernels_py, u, amps, delays, n_out),
             bench_shape_channel(_kernels_c, u, amps, delays, n_out) if _kernels_c else None),
        ]
        for label, pure_fn, comp_fn in cases:
            t_pure = best_of(pure_fn, repeat)
            t_comp = best_of(comp_fn, repeat) if comp_fn else None
            rows.append((label, t_pure, t_comp))
    return rows


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", default="10000,100000",
                    help="comma separated input lengths")
    ap.add_argument("--repeat", type=int, default=5, help="take the best of N runs")
    args = ap.parse_args()
    sizes = [int(s) for s in args.sizes.split(",")]

    if _kernels_c is None:
        print("compiled extension not available; timing the fallback only\n")

    rows = run(sizes, args.repeat)
    header = f"{'kernel':<28}{'pure (ms)':>12}{'compiled (ms)':>16}{'speedup':>10}"
    print(header)
    print("-" * len(header))
    for label, t_pure, t_comp in rows:
        if t_comp is None:
            print(f"{label:<28}{t_pure * 1e3:>12.3f}{'n/a':>16}{'n/a':>10}")
        else:
            print(f"{label:<28}{t_pure * 1e3:>12.3f}{t_comp * 1e3:>16.3f}"
                  f"{t_pure / t_comp:>9.1f}x")


if __name__ == "__main__":
    main()
