"""Synthetic planted-partition datasets used for sanity checks and fixtures."""

from __future__ import annotations

import numpy as np

from .data import Dataset
from .graph import Graph

__all__ = ["two_community_dataset", "write_generic_files"]


def two_community_dataset(n: int = 20, seed: int = 0, p_in: float = 0.8,
                          p_out: float = 0.05, feature_dim: int = 5,
                          noise: float = 0.3) -> Dataset:
    """Two planted communities with community-indicating noisy features."""
    rng = np.random.default_rng(seed)
    half = n // 2
    community = np.array([0] * half + [1] * (n - half))
    edges = []
    for i in range(n):
        for j in range(i + 1, n):
            p = p_in if community[i] == community[j] else p_out
            if rng.random() < p:
                edges.append((i, j))
    signal = np.where(community[:, None] == 0, 1.0, -1.0)
    X = signal * np.ones((n, feature_dim)) + noise * rng.standard_normal((n, feature_dim))
    graph = Graph(n, np.array(edges), features=X, labels=community, n_classes=2)
    return Dataset(graph, f"two_community_n{n}_s{seed}")


def write_generic_files(dataset: Dataset, directory) -> None:
    """Dump a dataset in the generic edges/features/labels fixture format."""
    from pathlib import Path

    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    g = dataset.graph
    with open(directory / "edges.txt", "w") as fh:
        fh.write(f"# edge list for {dataset.name}\n")
        for u, v in g.edges:
            fh.write(f"{u} {v}\n")
    with open(directory / "features.csv", "w") as fh:
        for i, row in enumerate(g.features):
            fh.write(",".join([str(i)] + [repr(float(v)) for v in row]) + "\n")
    with open(directory / "labels.csv", "w") as fh:
        for i, lab in enumerate(g.labels):
            fh.write(f"{i},{int(lab)}\n")
