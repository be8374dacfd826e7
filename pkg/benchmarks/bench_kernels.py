#!/usr/bin/env python3
"""Timing comparison of the integration kernels: numpy cumsum vs numba loop.

Both implementations apply the same float operations in the same order, so
besides the timing table the script asserts bitwise identical output.  Run
with LPAI_DISABLE_NUMBA=1 to see the fallback-only picture.
"""

import argparse
import time

import numpy as np

from lpai import _kernels


def make_problem(n: int, seed: int):
    rng = np.random.default_rng(seed)
    h = rng.uniform(1e-5, 1e-3, size=n)
    a_left = rng.normal(0.0, 50.0, size=n)
    a_mid = a_left + rng.normal(0.0, 1.0, size=n)
    a_right = a_left + rng.normal(0.0, 1.0, size=n)
    return h, a_left, a_mid, a_right


def best_of(repeats: int, fn, *args):
    best = float("inf")
    out = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, out


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--steps", type=int, default=1_000_000, help="number of grid steps")
    parser.add_argument("--repeats", type=int, default=7, help="timing repeats, best is kept")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    h, a_left, a_mid, a_right = make_problem(args.steps, args.seed)
    print(f"steps = {args.steps}, repeats = {args.repeats}, numba active = {_kernels.using_numba()}")

    rows = []
    t_numpy, out_numpy = best_of(
        args.repeats, _kernels.march_rk4_numpy, h, a_left, a_mid, a_right, 0.0, 0.0
    )
    rows.append(("march_rk4 numpy cumsum", t_numpy))

    if _kernels.using_numba():
        # warm up the compiled kernel before timing it
        _kernels.march_rk4(h[:16], a_left[:16], a_mid[:16], a_right[:16], 0.0, 0.0)
        t_numba, out_numba = best_of(
            args.repeats, _kernels.march_rk4, h, a_left, a_mid, a_right, 0.0, 0.0
        )
        rows.append(("march_rk4 numba loop", t_numba))
        assert np.array_equal(out_numpy[0], out_numba[0])
        assert np.array_equal(out_numpy[1], out_numba[1])

        _kernels.march_gradient(h[:16], a_left[:16], a_mid[:16], a_right[:16], 0.2, 0.0, 0.0)
        t_grad, out_grad = best_of(
            args.repeats, _kernels.march_gradient, h, a_left, a_mid, a_right, 0.2, 0.0, 0.0
        )
        rows.append(("march_gradient numba loop", t_grad))
        loop_args = (h, a_left, a_mid, a_right, 0.2, 0.0, 0.0)
        t_py, out_py = best_of(1, _kernels._march_gradient_loop, *loop_args)
        rows.append(("march_gradient python loop", t_py))
        assert np.array_equal(out_grad[0], out_py[0])
        assert np.array_equal(out_grad[1], out_py[1])

    width = max(len(name) for name, _ in rows)
    print(f"{'kernel'.ljust(width)}  best [ms]  steps/s")
    for name, t in rows:
        print(f"{name.ljust(width)}  {1e3 * t:9.3f}  {args.steps / t:.3e}")
    if len(rows) > 1:
        print(f"speedup over numpy: {rows[0][1] / rows[1][1]:.2f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
