"""Time the grid kernels under the numba and the pure-numpy backends.

    python3 benchmarks/bench_kernels.py [--points 1000000] [--repeat 5]

Each kernel is warmed up once (numba compilation is excluded), then the best
of ``--repeat`` runs is reported together with the max deviation between
the two backends.
"""

import argparse
import time

import numpy as np

from blaschke_threshold import _accel, kernels
from blaschke_threshold.construction import ThresholdTarget, adaptive_construction, uniform_stack


def best_time(fn, repeat):
    fn()
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def cases(n_points, seed=0):
    rng = np.random.default_rng(seed)
    xs = rng.uniform(-20.0, 20.0, n_points)
    ys = np.exp(rng.uniform(np.log(1e-3), np.log(1e6), n_points))
    uspec, uw = uniform_stack(1.0, 1.0, 8)
    aspec, aw = adaptive_construction(ThresholdTarget.from_alpha(1.0), n_levels=4)
    k = uspec.kind
    v = np.array([p.z for p in aw.v])
    return {
        "log_rows_sum (adaptive rows)": lambda: kernels.log_rows_sum(aspec.alphas, aspec.gammas, xs, ys),
        "uniform_log_sum (certified tail)": lambda: kernels.uniform_log_sum(k.alpha, k.beta, k.rho, 8, 1e-10, xs, ys)[0],
        "log_factor_sum (witness f)": lambda: kernels.log_factor_sum(v.real, v.imag, xs, ys),
        "min_dist_rows (covering)": lambda: kernels.min_dist_rows(aspec.alphas, aspec.gammas, xs, ys),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--points", type=int, default=1_000_000)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--threads", type=int, default=0, help="numba threads (0 = default)")
    args = ap.parse_args()

    _accel.set_threads(args.threads)
    backends = ["numba", "numpy"] if _accel.HAVE_NUMBA else ["numpy"]
    print(f"{args.points} points, best of {args.repeat}")
    print(f"{'kernel':34s} " + " ".join(f"{b:>10s}" for b in backends) + "   speedup   max |diff|")
    old = _accel.backend()
    try:
        for name, fn in cases(args.points).items():
            times, outs = [], []
            for b in backends:
                _accel.set_backend(b)
                t, out = best_time(fn, args.repeat)
                times.append(t)
                outs.append(np.asarray(out))
            line = f"{name:34s} " + " ".join(f"{t * 1e3:8.1f}ms" for t in times)
            if len(times) == 2:
                diff = float(np.max(np.abs(outs[0] - outs[1])))
                line += f"   {times[1] / times[0]:6.1f}x   {diff:.1e}"
            print(line)
    finally:
        _accel.set_backend(old)


if __name__ == "__main__":
    main()
