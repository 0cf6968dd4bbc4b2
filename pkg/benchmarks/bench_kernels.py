"""Compare the compiled and pure-Python kernel backends.

    python3 benchmarks/bench_kernels.py [--n 4096] [--repeat 200]

Also checks that both backends agree before timing them.
"""
import argparse
import timeit

import numpy as np

from logcrit import kernels
from logcrit.radial import BASIS_LEFT, BASIS_RIGHT, make_grid


def cases(grid, rng):
    x = np.abs(rng.normal(size=grid.n))
    y = np.abs(rng.normal(size=grid.n))
    q = np.abs(rng.normal(size=grid.qweights.size))
    w = grid.qweights
    factors = {k: k.tridiag_factor(grid.stiff_diag, grid.stiff_off)
               for k in kernels.available_backends().values()}
    return {
        "tridiag_solve": lambda k: k.tridiag_solve(factors[k], x),
        "stiff_apply": lambda k: k.stiff_apply(grid.coupling, grid.boundary_coupling, x),
        "stiff_form": lambda k: k.stiff_form(grid.coupling, grid.boundary_coupling, x),
        "to_points": lambda k: k.to_points(x, BASIS_LEFT, BASIS_RIGHT),
        "from_points": lambda k: k.from_points(q, BASIS_LEFT, BASIS_RIGHT),
        "positive_moments": lambda k: k.positive_moments(q, w),
        "cross_moment": lambda k: k.cross_moment(q, q[::-1].copy(), w),
        "reaction": lambda k: k.reaction(x, y, 1.0, 1.0, -1.0, 0.5),
    }


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=4096)
    ap.add_argument("--repeat", type=int, default=200)
    args = ap.parse_args()
    backends = kernels.available_backends()
    grid = make_grid(1.0, args.n)
    table = cases(grid, np.random.default_rng(0))
    print(f"n = {args.n}, backends: {', '.join(sorted(backends))}")
    print(f"{'kernel':18s}" + "".join(f"{b:>14s}" for b in sorted(backends)) + f"{'speedup':>10s}")
    for name, fn in table.items():
        outs = {b: np.asarray(fn(k), dtype=float) for b, k in backends.items()}
        if len(outs) == 2:
            a, b = outs["cython"], outs["python"]
            err = float(np.max(np.abs(a - b)) / max(1e-300, float(np.max(np.abs(b)))))
            if err > 1e-12:
                raise SystemExit(f"{name}: backends disagree ({err:.2e})")
        times = {b: min(timeit.repeat(lambda: fn(k), number=args.repeat, repeat=3)) / args.repeat
                 for b, k in backends.items()}
        row = f"{name:18s}" + "".join(f"{times[b] * 1e6:12.2f}us" for b in sorted(times))
        if len(times) == 2:
            row += f"{times['python'] / times['cython']:9.1f}x"
        print(row)


if __name__ == "__main__":
    main()
