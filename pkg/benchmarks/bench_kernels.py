"""Timing of the numba kernels against their numpy fallbacks.

    python3 benchmarks/bench_kernels.py [--repeat N]

Each kernel is run once to trigger compilation, then timed; the two paths
are also compared for agreement.
"""

import argparse
import time

import numpy as np

from degenwave import _accel
from degenwave.kernels import oscillator_sweep, q1_element_stiffness


def best_of(fn, repeat):
    fn()
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_sweep(m, K, repeat):
    rng = np.random.default_rng(0)
    omega = np.sqrt(np.sort(rng.uniform(1.0, 1e4, m)))
    y0, v0 = rng.standard_normal((2, m))
    g = rng.standard_normal((K + 1, m))
    dt = 1.0 / K
    out = {}
    for flag in (False, True):
        out[flag] = best_of(lambda: oscillator_sweep(omega, y0, v0, g, dt, use_numba=flag), repeat)
    Yn, _ = oscillator_sweep(omega, y0, v0, g, dt, use_numba=False)
    Yj, _ = oscillator_sweep(omega, y0, v0, g, dt, use_numba=True)
    return out, float(np.abs(Yn - Yj).max() / np.abs(Yn).max())


def bench_stiffness(n_el, repeat):
    rng = np.random.default_rng(1)
    wq = rng.uniform(0.0, 2.0, (n_el, 16))
    G = rng.standard_normal((16, 4, 4))
    out = {}
    for flag in (False, True):
        out[flag] = best_of(lambda: q1_element_stiffness(wq, G, use_numba=flag), repeat)
    a = q1_element_stiffness(wq, G, use_numba=False)
    b = q1_element_stiffness(wq, G, use_numba=True)
    return out, float(np.abs(a - b).max() / np.abs(a).max())


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if not _accel.HAVE_NUMBA:
        print("numba not installed; only the numpy path is available")
        return
    print(f"{'kernel':<32s}{'numpy [s]':>12s}{'numba [s]':>12s}{'speedup':>10s}{'rel diff':>11s}")
    cases = [(f"sweep m={m} K={K}", lambda m=m, K=K: bench_sweep(m, K, args.repeat))
             for m, K in ((32, 2000), (64, 10000), (256, 10000))]
    cases += [(f"q1 stiffness {n}^2 elements", lambda n=n: bench_stiffness(n * n, args.repeat))
              for n in (40, 160, 400)]
    for name, run in cases:
        t, diff = run()
        print(f"{name:<32s}{t[False]:>12.4g}{t[True]:>12.4g}{t[False] / t[True]:>10.2f}{diff:>11.2e}")


if __name__ == "__main__":
    main()
