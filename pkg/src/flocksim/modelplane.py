"""Fixed-point model parameters and on-chain aggregation.

Parameters live on chain as int64 vectors at scale 2**16.  Aggregation is
an exact integer mean: column sums in int64, then floor division by the
contributor count.  Because every step is integer arithmetic, aggregation
is associative-order independent and reproducible across platforms, which
is what lets miners recompute and compare results bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels


class ModelPlaneError(ValueError):
    """Raised on malformed parameter vectors or aggregation inputs."""


@dataclass(frozen=True)
class ParamVector:
    """Immutable fixed-point parameter vector (int64, scale 2**16)."""

    values: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.values)
        if arr.ndim != 1 or arr.size == 0:
            raise ModelPlaneError("ParamVector requires a non-empty 1-D array")
        if arr.dtype != np.int64:
            raise ModelPlaneError(f"ParamVector requires int64, got {arr.dtype}")
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    @property
    def dim(self) -> int:
        return int(self.values.shape[0])

    def __eq__(self, other) -> bool:
        if not isinstance(other, ParamVector):
            return NotImplemented
        return self.values.shape == other.values.shape and bool(
            np.array_equal(self.values, other.values))

    def __hash__(self):
        return hash(self.values.tobytes())

    def to_list(self) -> list:
        return [int(v) for v in self.values]

    @classmethod
    def from_list(cls, values: list) -> "ParamVector":
        return cls(np.asarray(values, dtype=np.int64))


def quantize(reals: np.ndarray) -> ParamVector:
    """Quantize float64 values: q = floor(x * 65536 + 0.5)."""
    arr = np.asarray(reals, dtype=np.float64)
    if arr.ndim != 1:
        raise ModelPlaneError("quantize expects a 1-D array")
    if not np.all(np.isfinite(arr)):
        raise ModelPlaneError("quantize requires finite values")
    return ParamVector(kernels.quantize_core(arr))


def dequantize(pv: ParamVector) -> np.ndarray:
    return kernels.dequantize_core(pv.values)


def zeros(dim: int) -> ParamVector:
    return ParamVector(np.zeros(dim, dtype=np.int64))


@dataclass(frozen=True)
class AggregationResult:
    global_params: ParamVector
    contributor_ids: tuple
    valid: bool


def fedavg(updates: list) -> ParamVector:
    """Exact integer mean of parameter vectors (floor toward -inf)."""
    if not updates:
        raise ModelPlaneError("fedavg requires at least one update")
    dim = updates[0].dim
    for u in updates:
        if u.dim != dim:
            raise ModelPlaneError(f"dimension mismatch: {u.dim} != {dim}")
    stack = np.stack([u.values for u in updates])
    return ParamVector(kernels.fedavg_core(stack))


def validity_vote(updates: list, published: ParamVector, n_miners: int) -> bool:
    """Each miner recomputes the aggregate; all must match the published one.

    Recomputation is deterministic, so honest miners always agree; the vote
    only fails when the published vector differs from the true aggregate.
    """
    if n_miners < 1:
        raise ModelPlaneError("validity_vote requires at least one miner")
    expected = fedavg(updates)
    return all(expected == published for _ in range(n_miners))
