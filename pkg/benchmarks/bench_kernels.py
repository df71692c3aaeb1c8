"""Compare the compiled and pure-Python criterion kernels.

Usage::

    python benchmarks/bench_kernels.py [--n 100] [--M 1000] [--betas 729] [--repeat 3]

Reports the best wall time per backend for a batch of criterion evaluations
and checks the two backends agree.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from ntunet import kernels
from ntunet.criterion import TetradPlan, build_pair_table
from ntunet.dgp import baseline_config, draw_population, rho_matrix


def _best(fn, repeat):
    best, out = np.inf, None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--M", type=int, default=1000)
    p.add_argument("--betas", type=int, default=729)
    p.add_argument("--repeat", type=int, default=3)
    args = p.parse_args(argv)

    cfg = baseline_config(n=args.n, seed=0)
    pop = draw_population(cfg)
    table = build_pair_table(rho_matrix(pop, cfg), cfg.w.matrix(pop.covariates),
                             TetradPlan.sample(args.n, args.M, seed=0), "scaled_normal_cdf")
    betas = np.random.default_rng(0).normal(size=(args.betas, cfg.d))
    betas /= np.linalg.norm(betas, axis=1)[:, None]

    available = ["python"]
    try:
        kernels.get_backend("cython")
        available.append("cython")
    except ImportError:
        print("compiled backend not built; timing the python backend only")

    results = {}
    print(f"n={args.n} pairs={table.n_pairs} entries={table.k_u.shape[0] + table.l_u.shape[0]} betas={args.betas}")
    for name in available:
        t, vals = _best(lambda: table.totals(betas, backend=name), args.repeat)
        results[name] = vals
        print(f"{name:>7}: criterion_totals {t * 1e3:9.2f} ms  ({t / args.betas * 1e6:8.2f} us per direction)")
    if len(results) == 2:
        diff = np.max(np.abs(results["python"] - results["cython"]))
        print(f"max |python - cython| = {diff:.3e}")


if __name__ == "__main__":
    main()
