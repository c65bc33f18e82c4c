"""Optional numba acceleration for the numeric kernels.

Kernels are written once as plain numpy functions and wrapped with
``maybe_jit``.  The wrapper applies ``numba.njit`` when numba is importable
and JIT has not been disabled, otherwise it returns the function unchanged.
Both paths execute the same source and the same BLAS calls, so results are
bit-identical; tests assert exact equality between the two paths.

Set ``FLOCKSIM_NO_NUMBA=1`` (or ``NUMBA_DISABLE_JIT=1``) in the environment
before import to force the pure-numpy path.
"""

from __future__ import annotations

import os


def _env_disabled() -> bool:
    for var in ("FLOCKSIM_NO_NUMBA", "NUMBA_DISABLE_JIT"):
        if os.environ.get(var, "").strip().lower() in ("1", "true", "yes", "on"):
            return True
    return False


try:
    import numba

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba installed
    numba = None
    HAS_NUMBA = False

JIT_ENABLED = HAS_NUMBA and not _env_disabled()


def maybe_jit(func):
    """Compile func with njit when enabled, else return it untouched.

    fastmath stays off so float results match the interpreted path exactly.
    """
    if JIT_ENABLED:
        return numba.njit(cache=True, fastmath=False)(func)
    return func
