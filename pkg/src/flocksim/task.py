"""Synthetic linear regression task used as the federated learning workload.

Each node owns a private dataset drawn from y = X w* + noise with a shared
hidden weight vector w*.  Local training is full-batch gradient descent on
the mean squared error, starting from the dequantized global parameters.
All data generation is a pure function of (task, seed), so any node's
dataset can be regenerated independently on any platform.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import kernels, seeds
from .modelplane import ParamVector, dequantize, quantize


class TaskError(ValueError):
    """Raised on invalid task parameters or dataset misuse."""


@dataclass(frozen=True)
class TaskSpec:
    dim: int = 16
    noise_sigma: float = 0.1
    n_train: int = 256
    n_test: int = 128
    # Slow schedule: local training contracts the error gently enough that
    # committee scores stay informative for the whole default run length.
    lr: float = 0.00075
    local_steps: int = 5

    def validate(self) -> None:
        if self.dim < 1:
            raise TaskError(f"dim must be >= 1, got {self.dim}")
        if self.noise_sigma < 0:
            raise TaskError(f"noise_sigma must be >= 0, got {self.noise_sigma}")
        if self.n_train < 1 or self.n_test < 1:
            raise TaskError("n_train and n_test must be >= 1")
        if not (self.lr > 0 and np.isfinite(self.lr)):
            raise TaskError(f"lr must be positive and finite, got {self.lr}")
        if self.local_steps < 1:
            raise TaskError(f"local_steps must be >= 1, got {self.local_steps}")


@dataclass(frozen=True)
class ClientDataset:
    features: np.ndarray  # (n, dim) float64
    targets: np.ndarray   # (n,) float64
    role: str             # "train" or "test"

    def __post_init__(self):
        if self.role not in ("train", "test"):
            raise TaskError(f"role must be 'train' or 'test', got {self.role!r}")
        if self.features.ndim != 2 or self.targets.ndim != 1:
            raise TaskError("features must be 2-D and targets 1-D")
        if self.features.shape[0] != self.targets.shape[0]:
            raise TaskError("features and targets disagree on sample count")

    @property
    def n(self) -> int:
        return int(self.targets.shape[0])


def make_true_weights(task: TaskSpec, seed: int,
                      explicit: Optional[list] = None) -> np.ndarray:
    """Hidden regression weights: explicit values or a unit-norm draw."""
    if explicit is not None:
        w = np.asarray(explicit, dtype=np.float64)
        if w.shape != (task.dim,):
            raise TaskError(f"true_weights must have length {task.dim}")
        return w
    rng = seeds.numpy_rng(seed)
    w = rng.standard_normal(task.dim)
    return w / np.linalg.norm(w)


def generate_client_data(task: TaskSpec, w_star: np.ndarray, seed: int,
                         role: str, n: Optional[int] = None) -> ClientDataset:
    """Draw a dataset from the shared linear model, deterministically in seed."""
    task.validate()
    if n is None:
        n = task.n_train if role == "train" else task.n_test
    rng = seeds.numpy_rng(seed)
    X = rng.standard_normal((n, task.dim))
    noise = rng.standard_normal(n) if task.noise_sigma > 0 else 0.0
    y = X @ w_star + task.noise_sigma * noise
    return ClientDataset(X, y, role)


def honest_train(global_params: ParamVector, data: ClientDataset,
                 task: TaskSpec) -> ParamVector:
    """Local gradient descent from the global parameters, requantized."""
    if data.role != "train":
        raise TaskError("honest_train requires a training dataset")
    if global_params.dim != task.dim:
        raise TaskError(f"parameter dim {global_params.dim} != task dim {task.dim}")
    w = dequantize(global_params)
    w = kernels.gd_steps_core(data.features, data.targets, w, task.lr,
                              task.local_steps)
    return quantize(w)


def evaluate(params: ParamVector, data: ClientDataset) -> float:
    """MSE of the dequantized parameters on a held-out test dataset."""
    if data.role != "test":
        raise TaskError("evaluate requires a test dataset")
    w = dequantize(params)
    if w.shape[0] != data.features.shape[1]:
        raise TaskError("parameter/feature dimension mismatch")
    return float(kernels.mse_core(data.features, w, data.targets))


def training_loss(params: ParamVector, data: ClientDataset) -> float:
    """MSE on a node's own training data (descent checks, diagnostics)."""
    w = dequantize(params)
    return float(kernels.mse_core(data.features, w, data.targets))


def mse_gradient(X: np.ndarray, w: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Analytic MSE gradient: (2/n) X'(Xw - y)."""
    return kernels.mse_grad_core(X, w, y)
