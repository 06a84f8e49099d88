"""Time the compiled kernels against their numpy fallbacks.

    python benchmarks/bench_kernels.py [--nodes N] [--repeat R]

Each row reports the best of R runs after one warm-up call (which also
triggers numba compilation) and the largest difference between the two
results.
"""
import argparse
import time

import numpy as np

from fharmonic import _kernels as K


def best_of(fn, repeat):
    fn()
    times = []
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        times.append(time.perf_counter() - start)
    return min(times)


def cases(n, rng):
    Y = rng.standard_normal((n, 5))
    Y /= np.linalg.norm(Y, axis=1, keepdims=True)
    u = rng.standard_normal(5)
    u /= np.linalg.norm(u)
    x = rng.standard_normal(n)
    y0 = Y[0].copy()
    return [
        ("pairwise_sum", lambda: K.pairwise_sum_numpy(x), lambda: K.pairwise_sum_numba(x)),
        ("flow_points", lambda: K.flow_points_numpy(u, Y, 1.3),
         lambda: K.flow_points_numba(u, Y, 1.3)),
        ("conformal_factors", lambda: K.conformal_factors_numpy(u, Y, 1.3),
         lambda: K.conformal_factors_numba(u, Y, 1.3)),
        ("rk4_flow (2000 steps)", lambda: K.rk4_flow_numpy(u, y0, 1.3, 2000),
         lambda: K.rk4_flow_numba(u, y0, 1.3, 2000)),
    ]


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--nodes", type=int, default=221184, help="points per call (S^3 at res 48)")
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    if not K.HAVE_NUMBA:
        print("numba is not importable; nothing to compare")
        return 1
    rng = np.random.default_rng(0)
    print(f"{'kernel':24s} {'numpy [ms]':>11s} {'numba [ms]':>11s} {'speedup':>8s} {'max diff':>10s}")
    for name, slow, fast in cases(args.nodes, rng):
        t_np, t_nb = best_of(slow, args.repeat), best_of(fast, args.repeat)
        diff = float(np.max(np.abs(np.asarray(slow()) - np.asarray(fast()))))
        print(f"{name:24s} {1e3 * t_np:11.3f} {1e3 * t_nb:11.3f} {t_np / t_nb:8.1f} {diff:10.1e}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
