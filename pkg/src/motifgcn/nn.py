"""Dense/sparse neural-network primitives with manual gradients.

Everything operates on plain float64 numpy arrays. There are no bias
terms anywhere; layers compute activation(S @ H @ W) or
activation(H @ W). The model module assembles these into a full
forward/backward pass.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .graph import SparseMatrix

__all__ = [
    "Activation",
    "LayerParams",
    "OptimizerConfig",
    "glorot_init",
    "spmm",
    "relu",
    "softmax_rows",
    "gcn_layer_forward",
    "mlp_layer_forward",
    "cross_entropy_loss",
    "adam_step",
    "dropout_forward",
]

RELU = "relu"
SOFTMAX = "softmax"
NONE = "none"

Activation = str  # one of RELU / SOFTMAX / NONE

PROB_FLOOR = 1e-12


@dataclass
class LayerParams:
    """Weight matrix of one layer plus its Adam moment estimates."""

    W: np.ndarray
    adam_m: np.ndarray = field(default=None)
    adam_v: np.ndarray = field(default=None)

    def __post_init__(self):
        self.W = np.asarray(self.W, dtype=np.float64)
        if self.adam_m is None:
            self.adam_m = np.zeros_like(self.W)
        if self.adam_v is None:
            self.adam_v = np.zeros_like(self.W)
        if self.adam_m.shape != self.W.shape or self.adam_v.shape != self.W.shape:
            raise ValueError("optimizer state shape must match W")

    def copy(self) -> "LayerParams":
        return LayerParams(self.W.copy(), self.adam_m.copy(), self.adam_v.copy())


@dataclass(frozen=True)
class OptimizerConfig:
    """Adam + regularization settings (defaults follow the standard GCN recipe)."""

    learning_rate: float = 0.01
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    weight_decay: float = 5e-4  # L2 on the first layer only
    dropout_rate: float = 0.5

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if not 0 <= self.dropout_rate < 1:
            raise ValueError("dropout_rate must be in [0, 1)")


def glorot_init(in_dim: int, out_dim: int, rng) -> np.ndarray:
    """Glorot/Xavier uniform init in [-s, s], s = sqrt(6 / (in + out))."""
    if in_dim < 1 or out_dim < 1:
        raise ValueError("dimensions must be >= 1")
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)
    s = np.sqrt(6.0 / (in_dim + out_dim))
    return rng.uniform(-s, s, size=(in_dim, out_dim))


def spmm(S: SparseMatrix, X: np.ndarray) -> np.ndarray:
    """Sparse @ dense product."""
    X = np.asarray(X, dtype=np.float64)
    if S.n != X.shape[0]:
        raise ValueError(f"dimension mismatch: {S.n} vs {X.shape[0]}")
    return S.to_scipy() @ X


def relu(X: np.ndarray) -> np.ndarray:
    return np.maximum(X, 0.0)


def softmax_rows(X: np.ndarray) -> np.ndarray:
    shifted = X - X.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def _activate(pre: np.ndarray, activation: Activation) -> np.ndarray:
    if activation == RELU:
        return relu(pre)
    if activation == SOFTMAX:
        return softmax_rows(pre)
    if activation == NONE:
        return pre
    raise ValueError(f"unknown activation {activation!r}")


def gcn_layer_forward(S: SparseMatrix, H: np.ndarray, params: LayerParams,
                      activation: Activation) -> np.ndarray:
    """activation(S @ H @ W): weighted aggregation over motif-matrix neighbors."""
    if H.shape[1] != params.W.shape[0]:
        raise ValueError("H.cols must equal W.in_dim")
    return _activate(spmm(S, H @ params.W), activation)


def mlp_layer_forward(H: np.ndarray, params: LayerParams,
                      activation: Activation) -> np.ndarray:
    """activation(H @ W): per-node transform without aggregation."""
    if H.shape[1] != params.W.shape[0]:
        raise ValueError("H.cols must equal W.in_dim")
    return _activate(H @ params.W, activation)


def cross_entropy_loss(Z: np.ndarray, labels: np.ndarray, mask: np.ndarray) -> float:
    """Mean categorical cross-entropy -log Z[v, y_v] over the masked rows."""
    mask = np.asarray(mask)
    if mask.dtype == bool:
        idx = np.flatnonzero(mask)
    else:
        idx = np.asarray(mask, dtype=np.int64)
    if idx.size == 0:
        raise ValueError("cross_entropy_loss: empty mask")
    p = np.clip(Z[idx, np.asarray(labels)[idx]], PROB_FLOOR, None)
    return float(-np.mean(np.log(p)))


def adam_step(params: LayerParams, grad: np.ndarray, config: OptimizerConfig,
              t: int) -> None:
    """In-place Adam update with bias correction; t is 1-based."""
    if t < 1:
        raise ValueError("Adam step index must be >= 1")
    b1, b2 = config.beta1, config.beta2
    params.adam_m = b1 * params.adam_m + (1 - b1) * grad
    params.adam_v = b2 * params.adam_v + (1 - b2) * grad * grad
    m_hat = params.adam_m / (1 - b1 ** t)
    v_hat = params.adam_v / (1 - b2 ** t)
    params.W = params.W - config.learning_rate * m_hat / (np.sqrt(v_hat) + config.epsilon)


def dropout_forward(H: np.ndarray, rate: float, rng, training: bool):
    """Inverted dropout. Returns (output, keep-scale mask).

    The mask already folds in the 1/(1-rate) rescale, so the backward
    pass is just an elementwise multiply with it.
    """
    if not 0 <= rate < 1:
        raise ValueError("dropout rate must be in [0, 1)")
    if not training or rate == 0.0:
        return H, None
    keep = rng.random(H.shape) >= rate
    mask = keep / (1.0 - rate)
    return H * mask, mask
