"""Time the numba kernels against their numpy fallbacks.

    python benchmarks/bench_kernels.py [--sizes 100 200 400] [--repeat 5]
"""

import argparse
import time

import numpy as np

from rccmo import _kernels_numba as nb
from rccmo import _kernels_numpy as npk


def _best_of(fn, args, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def _cases(n, m, rng):
    objs = rng.random((n, m))
    viol = np.where(rng.random(n) < 0.5, 0.0, rng.random(n))
    dom = npk.dominance_matrix(objs, viol)
    k = int(np.sqrt(n))
    return {
        "dominance_matrix": (objs, viol),
        "cross_dominance": (objs, rng.random((n, m))),
        "front_ranks": (dom,),
        "strength_raw": (dom,),
        "kth_distance": (objs, k),
    }


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--sizes", type=int, nargs="+", default=[100, 200, 400])
    ap.add_argument("--m", type=int, default=3)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    rng = np.random.default_rng(0)

    # compile outside the timed region
    for name, a in _cases(8, args.m, rng).items():
        getattr(nb, name)(*a)

    print(f"{'kernel':<18}{'n':>6}{'numpy ms':>12}{'numba ms':>12}{'speedup':>10}")
    for n in args.sizes:
        for name, a in _cases(n, args.m, rng).items():
            t_np = _best_of(getattr(npk, name), a, args.repeat)
            t_nb = _best_of(getattr(nb, name), a, args.repeat)
            print(f"{name:<18}{n:>6}{t_np * 1e3:>12.3f}{t_nb * 1e3:>12.3f}{t_np / t_nb:>10.1f}")


if __name__ == "__main__":
    main()
