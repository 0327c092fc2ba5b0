"""Time the numba kernels against the pure-numpy fallback.

    python3 benchmarks/bench_kernels.py [--n 16000] [--repeat 3] [--json out.json]
"""

from __future__ import annotations

import argparse
import json
import time

import numpy as np

from thinlayer._accel import HAVE_NUMBA
from thinlayer.problems import build_catenary
from thinlayer.spectral import default_ladder, discretize, lowest_eigenpairs, make_grid, refine_to_convergence
from thinlayer.spectral._kernels import get_kernels, pivot_floor


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def bench(backend, n, repeat):
    K = get_kernels(backend)
    problem = build_catenary(1.0)
    pencil = discretize(problem, make_grid(problem, 160.0 / n))
    d, e = pencil.reduced()
    e2 = e * e
    pm = pivot_floor(e2)
    lo, hi = float(d.min() - 2 * np.abs(e).max()), float(d.max() + 2 * np.abs(e).max())
    rhs = np.random.default_rng(0).standard_normal(d.size)
    lam = K.bisect(d, e2, 0, 1, lo, hi, pm)[0]
    # first call compiles (numba) or warms caches (numpy)
    K.sturm_count(d, e2, 0.0, pm)
    K.shifted_solve(d, e, lam, rhs, 1e-300)
    return {
        "sturm_count": best_of(lambda: K.sturm_count(d, e2, 0.0, pm), repeat),
        "bisect_lowest3": best_of(lambda: K.bisect(d, e2, 0, 3, lo, hi, pm), repeat),
        "shifted_solve": best_of(lambda: K.shifted_solve(d, e, lam, rhs, 1e-300), repeat),
        "eigenpairs3": best_of(lambda: lowest_eigenpairs(pencil, 3, backend), repeat),
        "catenary_refine": best_of(lambda: refine_to_convergence(problem, default_ladder(0.005, 3),
                                                                 backend=backend), 1),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=16000, help="grid points for the kernel timings")
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--json", help="write timings to this file")
    args = ap.parse_args(argv)
    backends = ["numpy"] + (["numba"] if HAVE_NUMBA else [])
    results = {b: bench(b, args.n, args.repeat) for b in backends}
    print(f"{'kernel':<18}" + "".join(f"{b:>12}" for b in backends) + ("   speedup" if len(backends) > 1 else ""))
    for key in results["numpy"]:
        row = f"{key:<18}" + "".join(f"{results[b][key]:>11.4f}s" for b in backends)
        if len(backends) > 1:
            row += f"  {results['numpy'][key] / results['numba'][key]:>7.1f}x"
        print(row)
    if args.json:
        with open(args.json, "w") as fh:
            json.dump({"n": args.n, "repeat": args.repeat, "seconds": results}, fh, indent=2)


if __name__ == "__main__":
    main()
