"""Timing comparison: jitted kernels vs the plain numpy fallback.

Both paths run in one process, so the numbers are directly comparable:
the jitted entry points live next to their *_py aliases in
flocksim.kernels.  Run from the repo root:

    python3 benchmarks/bench_kernels.py
    python3 benchmarks/bench_kernels.py --repeat 9 --inner 200

With FLOCKSIM_NO_NUMBA=1 both columns time the same plain function; the
script says so instead of printing a fake speedup.
"""

import argparse
import timeit

import numpy as np

from flocksim import kernels
from flocksim._accel import JIT_ENABLED


def build_cases(rng):
    # shapes mirror the simulator hot path: 10 updates of dim 16,
    # training batches of 256x16, the 1024-sample oracle eval
    reals = rng.normal(0.0, 2.0, size=100_000)
    updates_small = rng.integers(-(2**20), 2**20, size=(10, 16), dtype=np.int64)
    updates_wide = rng.integers(-(2**20), 2**20, size=(64, 1024), dtype=np.int64)
    X_train = rng.normal(size=(256, 16))
    y_train = rng.normal(size=256)
    X_oracle = rng.normal(size=(1024, 16))
    y_oracle = rng.normal(size=1024)
    w = rng.normal(size=16)
    return [
        ("quantize 100k", kernels.quantize_core, kernels.quantize_core_py,
         (reals,)),
        ("fedavg 10x16", kernels.fedavg_core, kernels.fedavg_core_py,
         (updates_small,)),
        ("fedavg 64x1024", kernels.fedavg_core, kernels.fedavg_core_py,
         (updates_wide,)),
        ("mse 256x16", kernels.mse_core, kernels.mse_core_py,
         (X_train, w, y_train)),
        ("mse 1024x16", kernels.mse_core, kernels.mse_core_py,
         (X_oracle, w, y_oracle)),
        ("mse_grad 256x16", kernels.mse_grad_core, kernels.mse_grad_core_py,
         (X_train, w, y_train)),
        ("gd_steps 256x16 x5", kernels.gd_steps_core, kernels.gd_steps_core_py,
         (X_train, y_train, w, 0.01, 5)),
    ]


def best_time(func, args, repeat, inner):
    timer = timeit.Timer(lambda: func(*args))
    return min(timer.repeat(repeat=repeat, number=inner)) / inner


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5,
                        help="timing repetitions, best is kept (default 5)")
    parser.add_argument("--inner", type=int, default=100,
                        help="calls per repetition (default 100)")
    args = parser.parse_args()

    rng = np.random.default_rng(1234)
    cases = build_cases(rng)

    if not JIT_ENABLED:
        print("JIT disabled (flag or numba missing); both columns below "
              "time the plain numpy path.")
    else:
        for _, jit_fn, _, call_args in cases:
            jit_fn(*call_args)  # compile / load from cache outside the timing

    header = f"{'kernel':22s} {'jit':>12s} {'numpy':>12s} {'speedup':>9s}"
    print(header)
    print("-" * len(header))
    for name, jit_fn, py_fn, call_args in cases:
        t_jit = best_time(jit_fn, call_args, args.repeat, args.inner)
        t_py = best_time(py_fn, call_args, args.repeat, args.inner)
        ratio = t_py / t_jit if t_jit > 0 else float("inf")
        print(f"{name:22s} {t_jit * 1e6:10.1f}us {t_py * 1e6:10.1f}us "
              f"{ratio:8.1f}x")


if __name__ == "__main__":
    main()
