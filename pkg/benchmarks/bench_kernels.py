"""Time the numba kernels against their pure-numpy twins.

Run from the repository root::

    python3 benchmarks/bench_kernels.py [--repeat 5]

Both backends are imported directly, so ``HUPLAB_NUMBA`` does not matter
here.  Every numba kernel is called once before timing to exclude JIT
compilation, and each pair of outputs is checked for agreement.
"""
import argparse
import time

import numpy as np

from huplab.kernels import _numba as nb
from huplab.kernels import _numpy as npk


def _cases(rng):
    p, beta = 1.0, 0.5
    xs = rng.uniform(-p, p, 1_000_000)
    vals = rng.normal(size=1024).astype(complex)
    grid = rng.uniform(-p, p, 2048)
    lo = np.array([-0.25, 0.05])
    hi = np.array([-0.05, 0.25])
    return [
        ("gauss_u_array 1e6", "gauss_u_array", (xs, p, beta)),
        ("partial_fraction 256 x J=1e5", "partial_fraction", (xs[:256].copy(), p, 100_000)),
        ("branch_sum_grid 2048 x J=500", "branch_sum_grid", (vals, p, beta, grid, 500)),
        ("ulam_coo n=1024 J=200", "ulam_coo", (1024, p, beta, 200, 8)),
        ("survival_steps 1e6 x 20", "survival_steps", (xs, p, beta, 20)),
        ("pullback eps=1e-10", "pullback", (lo, hi, p, beta, 1e-10, 10**8)),
    ]


def _best(fn, args, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn(*args)
        times.append(time.perf_counter() - t0)
    return min(times), out


def _first(out):
    return np.asarray(out[0] if isinstance(out, tuple) else out)


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)
    print(f"{'kernel':34s} {'numpy [s]':>11s} {'numba [s]':>11s} {'speedup':>9s}  agree")
    for label, name, call in _cases(rng):
        f_nb, f_np = getattr(nb, name), getattr(npk, name)
        f_nb(*call)  # compile
        t_nb, o_nb = _best(f_nb, call, args.repeat)
        t_np, o_np = _best(f_np, call, args.repeat)
        a, b = _first(o_nb), _first(o_np)
        agree = a.shape == b.shape and np.allclose(np.sort(a.ravel()), np.sort(b.ravel()),
                                                   rtol=1e-10, atol=1e-13)
        print(f"{label:34s} {t_np:11.4f} {t_nb:11.4f} {t_np / t_nb:9.1f}  {agree}")


if __name__ == "__main__":
    main()
