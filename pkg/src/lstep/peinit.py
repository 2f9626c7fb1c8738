"""Initial positional encodings from a static snapshot of early events.

The snapshot is the undirected simple graph of a batch of events
(duplicate edges collapsed, self-loops dropped). Two spectral choices:
rows of the d_P lowest eigenvectors of the symmetric normalized
Laplacian, or diagonal return probabilities of k-step random walks.
Nodes absent from the snapshot keep exactly-zero rows.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .eigen import DEFAULT_SIZE_CAP, symmetric_eig

__all__ = ["InitialPE", "snapshot_graph", "laplacian_pe", "random_walk_pe", "zero_pe"]


@dataclass(frozen=True)
class InitialPE:
    """Per-node starting encodings; ``present`` lists snapshot nodes."""

    table: np.ndarray
    method: str
    present: np.ndarray

    @property
    def d_p(self) -> int:
        return int(self.table.shape[1])


def snapshot_graph(
    src: np.ndarray, dst: np.ndarray, num_nodes: int
) -> tuple[np.ndarray, np.ndarray]:
    """Collapse events to simple undirected edges plus the present-node set."""
    src = np.asarray(src, dtype=np.int64)
    dst = np.asarray(dst, dtype=np.int64)
    if src.size == 0:
        raise ValueError("snapshot has no events")
    if src.min() < 0 or dst.min() < 0 or max(src.max(), dst.max()) >= num_nodes:
        raise ValueError("snapshot node id outside [0, num_nodes)")
    present = np.unique(np.concatenate([src, dst]))
    lo = np.minimum(src, dst)
    hi = np.maximum(src, dst)
    keep = lo != hi
    edges = np.unique(np.stack([lo[keep], hi[keep]], axis=1), axis=0)
    if edges.size == 0:
        edges = edges.reshape(0, 2)
    return edges, present


def _adjacency(edges: np.ndarray, present: np.ndarray) -> np.ndarray:
    pos = {int(node): i for i, node in enumerate(present.tolist())}
    n = present.shape[0]
    a = np.zeros((n, n))
    for u, v in edges.tolist():
        i, j = pos[int(u)], pos[int(v)]
        a[i, j] = 1.0
        a[j, i] = 1.0
    return a


def laplacian_pe(
    src: np.ndarray,
    dst: np.ndarray,
    num_nodes: int,
    d_p: int,
    size_cap: int = DEFAULT_SIZE_CAP,
) -> InitialPE:
    """Rows of the d_p smallest-eigenvalue eigenvectors of I - D^-1/2 A D^-1/2.

    The constant (zero-eigenvalue) eigenvector is kept. Isolated present
    nodes use the convention 0^(-1/2) = 0. When the snapshot has fewer
    than d_p present nodes the trailing dimensions are zero-padded.
    """
    edges, present = snapshot_graph(src, dst, num_nodes)
    a = _adjacency(edges, present)
    n = a.shape[0]
    deg = a.sum(axis=1)
    with np.errstate(divide="ignore"):
        dis = np.where(deg > 0.0, deg, 1.0) ** -0.5
    dis = np.where(deg > 0.0, dis, 0.0)
    lap = np.eye(n) - (dis[:, None] * a) * dis[None, :]
    _, vecs = symmetric_eig(lap, size_cap=size_cap)
    take = min(d_p, n)
    table = np.zeros((num_nodes, d_p))
    table[present, :take] = vecs[:, :take]
    return InitialPE(table, "laplacian", present)


def random_walk_pe(
    src: np.ndarray, dst: np.ndarray, num_nodes: int, d_p: int
) -> InitialPE:
    """PE_k(u) = k-step return probability diag((D^-1 A)^k)_u, k = 1..d_p."""
    edges, present = snapshot_graph(src, dst, num_nodes)
    a = _adjacency(edges, present)
    deg = a.sum(axis=1)
    p = a / np.where(deg > 0.0, deg, 1.0)[:, None]
    table = np.zeros((num_nodes, d_p))
    walk = p.copy()
    for k in range(d_p):
        table[present, k] = np.diag(walk)
        if k + 1 < d_p:
            walk = walk @ p
    return InitialPE(table, "random_walk", present)


def zero_pe(num_nodes: int, d_p: int) -> InitialPE:
    return InitialPE(
        np.zeros((num_nodes, d_p)), "zero", np.zeros(0, dtype=np.int64)
    )
