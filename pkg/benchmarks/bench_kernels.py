"""Benchmark the compiled rate kernel against the pure-numpy fallback.

The measured operation is the PSO inner loop: evaluating the closed-form sum
rate for one whole swarm of candidate phase vectors.  Run as

    python benchmarks/bench_kernels.py [--swarm 100] [--repeats 200]
"""
import argparse
import time

import numpy as np

import rismimo as rm
from rismimo import _ratecore_py
from rismimo.rates import RateContext

try:
    from rismimo import _ratecore
except ImportError:
    _ratecore = None


def time_backend(fn, batch, args, repeats):
    fn(batch, *args)  # warm up
    t0 = time.perf_counter()
    for _ in range(repeats):
        fn(batch, *args)
    return (time.perf_counter() - t0) / repeats


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--swarm", type=int, default=100)
    ap.add_argument("--repeats", type=int, default=200)
    args = ap.parse_args()

    print(f"selected backend at import: {rm.KERNEL_BACKEND}")
    rng = np.random.default_rng(0)
    header = f"{'M':>4} {'N':>5} {'K':>3} {'swarm':>6} {'numpy':>12} {'compiled':>12} {'speedup':>8}"
    print(header)
    print("-" * len(header))
    for m_ant, n_ris, k_users in [(64, 16, 6), (64, 36, 6), (64, 64, 6), (64, 256, 6)]:
        cfg = rm.make_config(M=m_ant, N=n_ris, K=k_users, seed=1)
        gains, _ = rm.build_scene(cfg)
        ctx = RateContext.from_scenario(cfg, gains)
        batch = np.ascontiguousarray(rng.uniform(0, 2 * np.pi, size=(args.swarm, n_ris)))
        kargs = ctx._args()

        t_py = time_backend(_ratecore_py.sum_rate_batch, batch, kargs, args.repeats)
        if _ratecore is not None:
            t_c = time_backend(_ratecore.sum_rate_batch, batch, kargs, args.repeats)
            a = _ratecore_py.sum_rate_batch(batch, *kargs)
            b = _ratecore.sum_rate_batch(batch, *kargs)
            err = float(np.max(np.abs(a - b) / np.abs(a)))
            print(f"{m_ant:>4} {n_ris:>5} {k_users:>3} {args.swarm:>6} "
                  f"{t_py * 1e6:>10.1f}us {t_c * 1e6:>10.1f}us {t_py / t_c:>7.1f}x"
                  f"   (max rel diff {err:.1e})")
        else:
            print(f"{m_ant:>4} {n_ris:>5} {k_users:>3} {args.swarm:>6} "
                  f"{t_py * 1e6:>10.1f}us {'n/a':>12} {'n/a':>8}")
    if _ratecore is None:
        print("compiled backend not available; numpy fallback timings only")


if __name__ == "__main__":
    main()
