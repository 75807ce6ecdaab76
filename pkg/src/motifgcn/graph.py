"""Core graph and sparse-matrix types shared by every other module.

Nodes are contiguous integers in [0, N). Loaders are responsible for
remapping external IDs before a Graph is constructed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

__all__ = [
    "Graph",
    "SparseMatrix",
    "build_adjacency",
    "degree",
    "max_degree",
]

SYMMETRY_TOL = 1e-12

# Label value for nodes that carry no label.
UNLABELED = -1


class GraphError(ValueError):
    """Raised when graph construction input violates an invariant."""


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class SparseMatrix:
    """Symmetric real matrix in CSR form.

    Column indices are sorted within each row and no explicit zeros are
    stored. Instances are immutable; all arrays are read-only.
    """

    n: int
    row_offsets: np.ndarray
    col_indices: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "row_offsets", _freeze(np.asarray(self.row_offsets, dtype=np.int64)))
        object.__setattr__(self, "col_indices", _freeze(np.asarray(self.col_indices, dtype=np.int64)))
        object.__setattr__(self, "values", _freeze(np.asarray(self.values, dtype=np.float64)))
        if self.row_offsets.shape != (self.n + 1,):
            raise GraphError("row_offsets must have length n+1")
        if self.col_indices.shape != self.values.shape:
            raise GraphError("col_indices and values must align")

    @classmethod
    def from_scipy(cls, m) -> "SparseMatrix":
        m = sp.csr_matrix(m)
        m.sum_duplicates()
        m.eliminate_zeros()
        m.sort_indices()
        return cls(m.shape[0], m.indptr, m.indices, m.data)

    @classmethod
    def from_dense(cls, a: np.ndarray) -> "SparseMatrix":
        return cls.from_scipy(sp.csr_matrix(np.asarray(a, dtype=np.float64)))

    def to_scipy(self) -> sp.csr_matrix:
        return sp.csr_matrix(
            (self.values, self.col_indices, self.row_offsets), shape=(self.n, self.n)
        )

    def to_dense(self) -> np.ndarray:
        return self.to_scipy().toarray()

    @property
    def nnz(self) -> int:
        return int(self.values.shape[0])

    def diagonal(self) -> np.ndarray:
        return self.to_scipy().diagonal()

    def row_sums(self) -> np.ndarray:
        return np.asarray(self.to_scipy().sum(axis=1)).ravel()

    def is_symmetric(self, tol: float = SYMMETRY_TOL) -> bool:
        m = self.to_scipy()
        d = m - m.T
        return d.nnz == 0 or np.abs(d.data).max() <= tol

    def check_symmetric(self, tol: float = SYMMETRY_TOL) -> None:
        if not self.is_symmetric(tol):
            raise GraphError("matrix is not symmetric")


@dataclass(frozen=True)
class Graph:
    """Immutable undirected graph with optional node features and labels.

    Attributes:
        n_nodes: number of nodes N; nodes are the integers [0, N).
        edges: (m, 2) int array of unordered pairs with u < v, no
            duplicates, no self-loops.
        features: dense (N, T) float array, or None.
        labels: (N,) int array of class indices; UNLABELED marks
            unlabeled nodes. None when the graph carries no labels.
        n_classes: class count L (0 when unlabeled).
        dropped_self_loops: self-loop lines discarded at construction.
        dropped_duplicates: duplicate edge lines discarded at construction.
    """

    n_nodes: int
    edges: np.ndarray
    features: np.ndarray | None = None
    labels: np.ndarray | None = None
    n_classes: int = 0
    dropped_self_loops: int = 0
    dropped_duplicates: int = 0
    _neighbors: sp.csr_matrix = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        edges = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        if edges.size:
            if edges.min() < 0 or edges.max() >= self.n_nodes:
                raise GraphError("edge endpoint out of range")
            if (edges[:, 0] == edges[:, 1]).any():
                raise GraphError("self-loop in edge list")
            lo = np.minimum(edges[:, 0], edges[:, 1])
            hi = np.maximum(edges[:, 0], edges[:, 1])
            edges = np.stack([lo, hi], axis=1)
            order = np.lexsort((edges[:, 1], edges[:, 0]))
            edges = edges[order]
            if edges.shape[0] > 1 and (np.diff(edges, axis=0) == 0).all(axis=1).any():
                raise GraphError("duplicate edge in edge list")
        object.__setattr__(self, "edges", _freeze(edges))
        if self.features is not None:
            feats = np.asarray(self.features, dtype=np.float64)
            if feats.shape[0] != self.n_nodes:
                raise GraphError("features row count must equal n_nodes")
            object.__setattr__(self, "features", _freeze(feats))
        if self.labels is not None:
            labels = np.asarray(self.labels, dtype=np.int64)
            if labels.shape != (self.n_nodes,):
                raise GraphError("labels must be one entry per node")
            present = labels[labels != UNLABELED]
            if present.size and (present.min() < 0 or present.max() >= self.n_classes):
                raise GraphError("label out of range [0, n_classes)")
            object.__setattr__(self, "labels", _freeze(labels))
        # Adjacency in scipy form, built once and reused for neighbor queries.
        n = self.n_nodes
        if edges.size:
            rows = np.concatenate([edges[:, 0], edges[:, 1]])
            cols = np.concatenate([edges[:, 1], edges[:, 0]])
            adj = sp.csr_matrix((np.ones(rows.size), (rows, cols)), shape=(n, n))
        else:
            adj = sp.csr_matrix((n, n))
        adj.sort_indices()
        object.__setattr__(self, "_neighbors", adj)

    @classmethod
    def from_edge_list(cls, n_nodes, raw_edges, **kwargs) -> "Graph":
        """Build a graph from a possibly messy edge list.

        Self-loops are dropped and duplicate pairs collapsed; the counts
        of dropped lines are kept on the instance.
        """
        raw = np.asarray(list(raw_edges), dtype=np.int64).reshape(-1, 2)
        loops = int((raw[:, 0] == raw[:, 1]).sum()) if raw.size else 0
        raw = raw[raw[:, 0] != raw[:, 1]] if raw.size else raw
        if raw.size:
            lo = np.minimum(raw[:, 0], raw[:, 1])
            hi = np.maximum(raw[:, 0], raw[:, 1])
            pairs = np.unique(np.stack([lo, hi], axis=1), axis=0)
            dupes = raw.shape[0] - pairs.shape[0]
        else:
            pairs = raw.reshape(0, 2)
            dupes = 0
        return cls(
            n_nodes,
            pairs,
            dropped_self_loops=loops,
            dropped_duplicates=int(dupes),
            **kwargs,
        )

    @property
    def n_edges(self) -> int:
        return int(self.edges.shape[0])

    @property
    def feature_dim(self) -> int:
        return 0 if self.features is None else int(self.features.shape[1])

    def neighbors(self, v: int) -> np.ndarray:
        if not 0 <= v < self.n_nodes:
            raise GraphError(f"node {v} out of range [0, {self.n_nodes})")
        a = self._neighbors
        return a.indices[a.indptr[v] : a.indptr[v + 1]]

    def degrees(self) -> np.ndarray:
        return np.diff(self._neighbors.indptr).astype(np.int64)


def build_adjacency(graph: Graph) -> SparseMatrix:
    """Binary symmetric adjacency matrix A with zero diagonal, nnz = 2|E|."""
    return SparseMatrix.from_scipy(graph._neighbors)


def degree(graph: Graph, v: int) -> int:
    """Number of neighbors of node v."""
    return int(graph.neighbors(v).size)


def max_degree(graph: Graph) -> int:
    """Maximum degree over all nodes; 0 for an empty graph."""
    if graph.n_nodes == 0:
        return 0
    return int(graph.degrees().max())
