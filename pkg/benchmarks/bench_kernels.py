#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure-Python fallback.

Times the three hot operations on identical inputs:

  * ftilde            -- one adaptive quadrature of the density integrand
  * batch (direct)    -- -ln p(Y) per sample, quadrature inside the loop
  * batch (grid)      -- -ln p(Y) per sample from the interpolation table

Run:  python benchmarks/bench_kernels.py [--batch 2048]
"""

import argparse
import importlib
import time

import numpy as np

from blockfade.density import DensityEvaluator, build_grid
from blockfade.model import ChannelConfig, sample_gram_spectra


def _load_backends():
    backends = {}
    fallback = importlib.import_module("blockfade._kernels.fallback")
    backends["python"] = fallback
    try:
        backends["native"] = importlib.import_module("blockfade._kernels._native")
    except ImportError:
        print("compiled backend not built; timing the fallback only")
    return backends


def _time(fn, min_time=0.5):
    fn()  # warm up
    n = 1
    while True:
        t0 = time.perf_counter()
        for _ in range(n):
            fn()
        dt = time.perf_counter() - t0
        if dt >= min_time:
            return dt / n
        n = max(n + 1, int(n * min_time / max(dt, 1e-9)))


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--batch", type=int, default=2048)
    parser.add_argument("--nt", type=int, default=2)
    parser.add_argument("--nr", type=int, default=2)
    parser.add_argument("--nb", type=int, default=10)
    parser.add_argument("--snr-db", type=float, default=10.0)
    args = parser.parse_args()

    config = ChannelConfig(args.nt, args.nr, args.nb, 10 ** (args.snr_db / 10))
    grid = build_grid(DensityEvaluator(config)).grid
    d = sample_gram_spectra(config, np.random.default_rng(0), args.batch)
    xs = np.geomspace(0.1, 3 * config.n_b * (1 + config.snr), 64)
    backends = _load_backends()

    rows = []
    for name, mod in backends.items():
        t_ft = _time(lambda: mod.ftilde_many(
            xs, 1, config.n_t, config.n_r, config.n_b, config.snr, 1e-9, 200))
        t_direct = _time(lambda: mod.neg_log_density_batch(
            d, config.n_t, config.n_r, config.n_b, config.snr, 1e-9, 200, 1e-9))
        t_grid = _time(lambda: mod.neg_log_density_batch(
            d, config.n_t, config.n_r, config.n_b, config.snr, 1e-9, 200, 1e-9,
            grid.knots, grid.values, grid.derivs, grid.x_max))
        rows.append((name, t_ft / len(xs), t_direct / args.batch,
                     t_grid / args.batch))

    print(f"\nconfig ({args.nt},{args.nr},{args.nb}) @ {args.snr_db:g} dB, "
          f"batch {args.batch}")
    print(f"{'backend':<8} {'ftilde':>12} {'batch direct':>14} {'batch grid':>12}")
    for name, ft, direct, grd in rows:
        print(f"{name:<8} {ft * 1e6:>10.1f}us {direct * 1e6:>12.1f}us "
              f"{grd * 1e6:>10.2f}us")
    if len(rows) == 2:
        base = {r[0]: r[1:] for r in rows}
        speedups = [base["python"][i] / base["native"][i] for i in range(3)]
        print(f"{'speedup':<8} {speedups[0]:>11.1f}x {speedups[1]:>13.1f}x "
              f"{speedups[2]:>11.1f}x")

    # agreement check on the same inputs
    if len(backends) == 2:
        a, _ = backends["native"].neg_log_density_batch(
            d, config.n_t, config.n_r, config.n_b, config.snr, 1e-9, 200, 1e-9)
        b, _ = backends["python"].neg_log_density_batch(
            d, config.n_t, config.n_r, config.n_b, config.snr, 1e-9, 200, 1e-9)
        print(f"max |delta ln p| native vs python: {np.nanmax(np.abs(a - b)):.2e}")


if __name__ == "__main__":
    main()
