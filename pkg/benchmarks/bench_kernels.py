"""Compare the numba and pure-numpy implementations of the hot kernels.

Run with ``python3 benchmarks/bench_kernels.py [--repeat N]``. Each kernel
is called once to trigger compilation, then timed as the best of N runs.
The script also reports the maximum difference between the two outputs.
"""
import argparse
import time

import numpy as np

from cuspkit import kernels
from cuspkit._accel import HAVE_NUMBA


def best_of(fn, repeat):
    best = np.inf
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def _maxdiff(a, b):
    if isinstance(a, tuple):
        return max(_maxdiff(x, y) for x, y in zip(a, b))
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b))))


def cases():
    s = np.linspace(0.0, 40.0, 400).astype(complex)
    yield ("xi_trapezoid (400 s, 4096 panels)",
           lambda: kernels.xi_trapezoid_numpy(s, 1.3, 4096),
           lambda: kernels.xi_trapezoid_numba(s, 1.3, 4096))

    s_g = np.linspace(0.5, 30.0, 200).astype(complex)
    r_g = np.linspace(0.5, 6.0, 120)
    mask = np.ones((r_g.size, s_g.size), dtype=bool)
    yield ("xi_series_grid (120 r x 200 s)",
           lambda: kernels.xi_series_grid_numpy(s_g, r_g, mask),
           lambda: kernels.xi_series_grid_numba(s_g, r_g, mask))

    dr = 2e-3
    grid = np.arange(2501) * dr
    coth = np.zeros(grid.size)
    coth[1:] = 1.0 / np.tanh(grid[1:])
    u0 = np.exp(-20.0 * grid ** 2)
    yield ("leapfrog (2501 points, 2000 steps)",
           lambda: kernels.leapfrog_numpy(u0, u0, dr, 0.4 * dr, 2000, coth),
           lambda: kernels.leapfrog_numba(u0, u0, dr, 0.4 * dr, 2000, coth))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    if not HAVE_NUMBA:
        print("numba is not importable; only numpy timings are meaningful")
    print(f"{'kernel':40s} {'numpy [s]':>10s} {'numba [s]':>10s} {'speedup':>8s} {'max diff':>10s}")
    for name, f_np, f_nb in cases():
        f_nb()  # compile
        t_np, out_np = best_of(f_np, args.repeat)
        t_nb, out_nb = best_of(f_nb, args.repeat)
        print(f"{name:40s} {t_np:10.4f} {t_nb:10.4f} {t_np / t_nb:8.1f} {_maxdiff(out_np, out_nb):10.2e}")


if __name__ == "__main__":
    main()
