"""Numeric kernels shared by the model plane and the learning task.

Each kernel exists in two callable forms: the module-level name (numba
compiled when enabled, see _accel) and a ``*_py`` alias that is always the
plain-python version.  Both run identical source, so outputs agree bitwise.

np.dot dispatches single-row matrix-vector and single-column vector-matrix
products to different BLAS entry points in the compiled and interpreted
paths, which reorders the reduction by one ulp.  Those degenerate shapes
are therefore handled by explicit sequential loops inline in each kernel.

Fixed-point parameters use int64 with scale 2**16.  Quantization rounds
half away from zero upward: q = floor(x * 65536 + 0.5).  Aggregation sums
exactly in int64 and floor-divides (toward minus infinity) by the count.
"""

from __future__ import annotations

import numpy as np

from ._accel import maybe_jit

SCALE_BITS = 16
SCALE = 1 << SCALE_BITS  # 65536


def _quantize(x):
    return np.floor(x * 65536.0 + 0.5).astype(np.int64)


def _dequantize(q):
    return q / 65536.0


def _fedavg(stack):
    # Exact int64 column sums, then floor division by the row count.
    n = stack.shape[0]
    total = np.zeros(stack.shape[1], dtype=np.int64)
    for i in range(n):
        total += stack[i]
    return total // n


def _mse(X, w, y):
    n = X.shape[0]
    d = X.shape[1]
    if n == 1:
        s = 0.0
        for j in range(d):
            s += X[0, j] * w[j]
        e = s - y[0]
        return e * e
    if d == 1:
        r = X[:, 0] * w[0] - y
        return np.dot(r, r) / n
    r = np.dot(X, w) - y
    return np.dot(r, r) / n


def _mse_grad(X, w, y):
    n = X.shape[0]
    d = X.shape[1]
    if n == 1:
        s = 0.0
        for j in range(d):
            s += X[0, j] * w[j]
        e = s - y[0]
        return (2.0 / n) * (e * X[0])
    if d == 1:
        r = X[:, 0] * w[0] - y
        s = 0.0
        for i in range(n):
            s += r[i] * X[i, 0]
        g = np.empty(1)
        g[0] = (2.0 / n) * s
        return g
    r = np.dot(X, w) - y
    return (2.0 / n) * np.dot(r, X)


def _gd_steps(X, y, w, lr, steps):
    w = w.copy()
    n = X.shape[0]
    d = X.shape[1]
    for _ in range(steps):
        if n == 1:
            s = 0.0
            for j in range(d):
                s += X[0, j] * w[j]
            e = s - y[0]
            g = (2.0 / n) * (e * X[0])
        elif d == 1:
            r = X[:, 0] * w[0] - y
            s = 0.0
            for i in range(n):
                s += r[i] * X[i, 0]
            g = np.empty(1)
            g[0] = (2.0 / n) * s
        else:
            r = np.dot(X, w) - y
            g = (2.0 / n) * np.dot(r, X)
        w = w - lr * g
    return w


quantize_core = maybe_jit(_quantize)
dequantize_core = maybe_jit(_dequantize)
fedavg_core = maybe_jit(_fedavg)
mse_core = maybe_jit(_mse)
mse_grad_core = maybe_jit(_mse_grad)
gd_steps_core = maybe_jit(_gd_steps)

quantize_core_py = _quantize
dequantize_core_py = _dequantize
fedavg_core_py = _fedavg
mse_core_py = _mse
mse_grad_core_py = _mse_grad
gd_steps_core_py = _gd_steps
