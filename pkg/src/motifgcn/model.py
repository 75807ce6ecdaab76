"""End-to-end model: motif-GCN layers feeding MLP layers, plus training.

The architecture is h1 graph-convolution layers over the mixed matrix
followed by h2 perceptron layers. The final layer always applies
softmax (when h2 = 0 the last GCN layer takes it); every earlier layer
uses ReLU. Training is full-batch Adam with early stopping on
validation loss and best-epoch weight restoration.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .graph import Graph, SparseMatrix
from .motifs import MixRecipe, mix_matrices
from . import nn
from .nn import LayerParams, OptimizerConfig

__all__ = [
    "ModelConfig",
    "Model",
    "TrainReport",
    "TrainingDiverged",
    "build_model",
    "forward",
    "train",
    "evaluate",
    "run_protocol",
    "grid_search",
]

GCN = "gcn"
MLP = "mlp"


class TrainingDiverged(RuntimeError):
    def __init__(self, epoch: int):
        super().__init__(f"loss became non-finite at epoch {epoch}")
        self.epoch = epoch


@dataclass(frozen=True)
class ModelConfig:
    h1: int = 2
    h2: int = 1
    hidden_dim: int = 16
    recipe: MixRecipe = field(default_factory=lambda: MixRecipe((("edge", 1.0),)))
    optimizer: OptimizerConfig = field(default_factory=OptimizerConfig)
    max_epochs: int = 200
    patience: int = 10
    seed: int = 0

    def __post_init__(self):
        if self.h1 < 1:
            raise ValueError("need at least one graph-convolution layer")
        if self.h2 < 0:
            raise ValueError("h2 must be >= 0")
        if self.hidden_dim < 1:
            raise ValueError("hidden_dim must be >= 1")


@dataclass
class Layer:
    params: LayerParams
    role: str        # GCN or MLP
    activation: str  # nn.RELU or nn.SOFTMAX


@dataclass
class Model:
    mixed_matrix: SparseMatrix
    layers: list
    config: ModelConfig

    def layer_dims(self):
        return [self.layers[0].params.W.shape[0]] + [
            l.params.W.shape[1] for l in self.layers
        ]


@dataclass
class TrainReport:
    train_losses: list
    val_losses: list
    val_accuracies: list
    best_epoch: int  # 1-based
    epochs_run: int
    test_accuracy: float
    wall_clock_seconds: float


def build_model(config: ModelConfig, graph: Graph,
                mixed: SparseMatrix | None = None) -> Model:
    """Assemble mixed matrix and Glorot-initialized layers.

    Layer widths run feature_dim -> hidden (h1+h2-1 times) -> n_classes.
    ``mixed`` lets callers reuse a precomputed mixed matrix across runs.
    """
    if graph.features is None or graph.labels is None:
        raise ValueError("graph must carry features and labels")
    if graph.n_classes < 1:
        raise ValueError("graph has no label classes")
    if mixed is None:
        mixed = mix_matrices(config.recipe, graph)
    n_layers = config.h1 + config.h2
    dims = [graph.feature_dim] + [config.hidden_dim] * (n_layers - 1) + [graph.n_classes]
    rng = np.random.default_rng(config.seed)
    layers = []
    for k in range(n_layers):
        role = GCN if k < config.h1 else MLP
        activation = nn.SOFTMAX if k == n_layers - 1 else nn.RELU
        W = nn.glorot_init(dims[k], dims[k + 1], rng)
        layers.append(Layer(LayerParams(W), role, activation))
    return Model(mixed, layers, config)


def forward(model: Model, X: np.ndarray, training: bool = False, rng=None,
            with_tape: bool = False):
    """Run the network; returns Z, or (Z, tape) when with_tape is set.

    Dropout hits each layer's input and is active only in training mode.
    """
    if X.shape[0] != model.mixed_matrix.n:
        raise ValueError("feature rows must match mixed-matrix dimension")
    rate = model.config.optimizer.dropout_rate
    H = np.asarray(X, dtype=np.float64)
    tape = []
    for layer in model.layers:
        Hin, mask = nn.dropout_forward(H, rate, rng, training)
        if layer.role == GCN:
            pre = nn.spmm(model.mixed_matrix, Hin @ layer.params.W)
        else:
            pre = Hin @ layer.params.W
        H = nn._activate(pre, layer.activation)
        tape.append((Hin, mask, pre, H))
    return (H, tape) if with_tape else H


def backward(model: Model, tape, labels: np.ndarray, train_idx: np.ndarray):
    """Analytic gradients of the masked cross-entropy + L2 term w.r.t. every W.

    The softmax output layer and the loss are fused: the pre-activation
    gradient on masked rows is (Z - onehot(y)) / |mask|.
    """
    if len(tape) != len(model.layers):
        raise ValueError("tape length does not match layer count")
    Z = tape[-1][3]
    n_mask = train_idx.size
    d_pre = np.zeros_like(Z)
    d_pre[train_idx] = Z[train_idx]
    d_pre[train_idx, labels[train_idx]] -= 1.0
    d_pre /= n_mask

    grads = [None] * len(model.layers)
    for k in range(len(model.layers) - 1, -1, -1):
        layer = model.layers[k]
        Hin, mask, _, _ = tape[k]
        if layer.role == GCN:
            # pre = S (Hin W) with S symmetric, so dW = Hin^T (S dPre)
            s_dpre = nn.spmm(model.mixed_matrix, d_pre)
            grads[k] = Hin.T @ s_dpre
            d_hin = s_dpre @ layer.params.W.T
        else:
            grads[k] = Hin.T @ d_pre
            d_hin = d_pre @ layer.params.W.T
        if mask is not None:
            d_hin = d_hin * mask
        if k > 0:
            prev_pre = tape[k - 1][2]
            if model.layers[k - 1].activation == nn.RELU:
                d_pre = d_hin * (prev_pre > 0)
            else:
                d_pre = d_hin
    wd = model.config.optimizer.weight_decay
    if wd:
        grads[0] = grads[0] + wd * model.layers[0].params.W
    return grads


def regularized_loss(model: Model, Z: np.ndarray, labels, mask_idx) -> float:
    """Cross-entropy plus the L2 penalty on the first layer."""
    loss = nn.cross_entropy_loss(Z, labels, mask_idx)
    wd = model.config.optimizer.weight_decay
    if wd:
        loss += 0.5 * wd * float(np.sum(model.layers[0].params.W ** 2))
    return loss


def evaluate(model: Model, X: np.ndarray, labels: np.ndarray, mask) -> float:
    """Fraction of masked nodes whose argmax prediction matches the label."""
    idx = _as_index(mask)
    if idx.size == 0:
        raise ValueError("evaluate: empty mask")
    Z = forward(model, X, training=False)
    pred = Z[idx].argmax(axis=1)
    return float(np.mean(pred == np.asarray(labels)[idx]))


def _as_index(mask) -> np.ndarray:
    mask = np.asarray(mask)
    if mask.dtype == bool:
        return np.flatnonzero(mask)
    return mask.astype(np.int64)


def train(config: ModelConfig, dataset, splits,
          mixed: SparseMatrix | None = None):
    """Full-batch training loop. Returns (model, TrainReport).

    Deterministic given config.seed; one dropout RNG stream is drawn
    from the same seed as the weight init.
    """
    graph = dataset.graph
    t0 = time.perf_counter()
    model = build_model(config, graph, mixed=mixed)
    rng = np.random.default_rng((config.seed, 0xD0))  # dropout stream
    X = graph.features
    y = graph.labels
    train_idx = _as_index(splits.train)
    val_idx = _as_index(splits.validation)
    if train_idx.size == 0:
        raise ValueError("train split is empty")

    train_losses, val_losses, val_accs = [], [], []
    best_val = np.inf
    best_epoch = 0
    best_weights = None
    for epoch in range(1, config.max_epochs + 1):
        Z, tape = forward(model, X, training=True, rng=rng, with_tape=True)
        loss = regularized_loss(model, Z, y, train_idx)
        if not np.isfinite(loss):
            raise TrainingDiverged(epoch)
        grads = backward(model, tape, y, train_idx)
        for layer, g in zip(model.layers, grads):
            nn.adam_step(layer.params, g, config.optimizer, epoch)

        Z_eval = forward(model, X, training=False)
        val_loss = nn.cross_entropy_loss(Z_eval, y, val_idx)
        pred = Z_eval[val_idx].argmax(axis=1)
        val_acc = float(np.mean(pred == y[val_idx]))
        train_losses.append(loss)
        val_losses.append(val_loss)
        val_accs.append(val_acc)

        if val_loss < best_val:
            best_val = val_loss
            best_epoch = epoch
            best_weights = [l.params.copy() for l in model.layers]
        elif epoch - best_epoch >= config.patience:
            break

    for layer, saved in zip(model.layers, best_weights):
        layer.params = saved
    test_acc = evaluate(model, X, y, splits.test)
    report = TrainReport(
        train_losses=train_losses,
        val_losses=val_losses,
        val_accuracies=val_accs,
        best_epoch=best_epoch,
        epochs_run=len(train_losses),
        test_accuracy=test_acc,
        wall_clock_seconds=time.perf_counter() - t0,
    )
    return model, report


def run_protocol(config: ModelConfig, dataset, splits, n_runs: int,
                 threads: int = 1):
    """Repeat training with seeds seed+0 ... seed+n_runs-1.

    Returns {"mean", "max", "accuracies"}; results are merged by run
    index so the output is independent of scheduling.
    """
    if n_runs < 1:
        raise ValueError("n_runs must be >= 1")
    mixed = mix_matrices(config.recipe, dataset.graph)

    def one(i):
        cfg = replace(config, seed=config.seed + i)
        _, report = train(cfg, dataset, splits, mixed=mixed)
        return report.test_accuracy

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            accs = list(pool.map(one, range(n_runs)))
    else:
        accs = [one(i) for i in range(n_runs)]
    return {
        "mean": float(np.mean(accs)),
        "max": float(np.max(accs)),
        "accuracies": accs,
    }


def grid_search(dataset, splits, ratio_grid, base_config: ModelConfig,
                n_seeds: int = 5):
    """Pick the recipe with the best mean validation accuracy.

    Scoring never touches the test split. Ties break toward the earlier
    grid entry.
    """
    if not ratio_grid:
        raise ValueError("ratio grid is empty")
    rows = []
    X, y = dataset.graph.features, dataset.graph.labels
    val_idx = _as_index(splits.validation)
    for recipe in ratio_grid:
        cfg_r = replace(base_config, recipe=recipe)
        mixed = mix_matrices(recipe, dataset.graph)
        scores = []
        for s in range(n_seeds):
            cfg = replace(cfg_r, seed=base_config.seed + s)
            model, _ = train(cfg, dataset, splits, mixed=mixed)
            Z = forward(model, X, training=False)
            scores.append(float(np.mean(Z[val_idx].argmax(axis=1) == y[val_idx])))
        rows.append({"recipe": str(recipe), "val_accuracy_mean": float(np.mean(scores)),
                     "val_accuracies": scores})
    best_i = int(np.argmax([r["val_accuracy_mean"] for r in rows]))
    return ratio_grid[best_i], rows
