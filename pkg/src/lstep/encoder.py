"""Temporal node representations and the link predictor head.

A node's representation at query time t fuses three views: its feature
vector plus the mean of neighbor features inside a look-back window, a
pooled encoding of its K most recent interactions (time encoding and
edge features per interaction), and a gated refinement of its current
positional encoding against the positional encodings of those same K
interaction partners. The link predictor is a two-layer MLP over the
concatenated endpoint representations.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .autodiff import (
    Tensor,
    add,
    add_n,
    concat,
    matmul,
    relu,
    sigmoid,
    tanh,
    transpose,
    weighted_sum_cols,
)
from .events import EventStream, RecentInteractions
from .timeenc import TimeEncoderConfig, time_encode_many

__all__ = [
    "EncoderParams",
    "node_encoding",
    "link_encoding",
    "temporal_representation",
    "predict_link",
]


@dataclass
class EncoderParams:
    """Learnable pieces of the representation and predictor heads.

    ``pe_w1/pe_w2/pe_w_self`` refine the positional branch; by default
    they are the same tensors the commit update uses.
    """

    link_w1: Tensor  # (d_t + d_e, d_t + d_e)
    link_w2: Tensor  # (d_t + d_e, d_t + d_e)
    link_sum_pool: Tensor  # (K, 1)
    fuse_w: Tensor  # (d_n, d_n + d_t + d_e)
    out_w: Tensor  # (d_n, d_n + d_p)
    pe_w1: Tensor  # (d_p, d_p + d_t)
    pe_w2: Tensor  # (d_p, d_p)
    pe_w_self: Tensor  # (d_p, d_p)
    pred_w1: Tensor  # (2 d_n, d_n)
    pred_w2: Tensor  # (d_n, 1)

    @property
    def recent_k(self) -> int:
        return int(self.link_sum_pool.data.shape[0])


def node_encoding(
    stream: EventStream, node: int, t: float, t_gap: float
) -> np.ndarray:
    """x_u plus the mean feature vector of neighbors seen in [t - t_gap, t)."""
    x = stream.node_features[node].copy()
    nbrs, _ = stream.window_neighbors(node, t, t_gap)
    if nbrs.size == 0:
        return x
    return x + stream.node_features[nbrs].mean(axis=0)


def _interaction_rows(
    stream: EventStream,
    recent: RecentInteractions,
    t: float,
    time_cfg: TimeEncoderConfig,
) -> np.ndarray:
    """(K, d_t + d_e) rows of concat(time encoding, edge features).

    Padded slots stay exactly zero across the whole row.
    """
    k = len(recent)
    rows = np.zeros((k, time_cfg.dim + stream.d_e))
    real = ~recent.pad_mask
    if real.any():
        deltas = t - recent.times[real]
        rows[real, : time_cfg.dim] = time_encode_many(deltas, time_cfg)
        rows[real, time_cfg.dim :] = stream.edge_features[recent.event_ids[real]]
    return rows


def link_encoding(
    stream: EventStream,
    node: int,
    t: float,
    params: EncoderParams,
    time_cfg: TimeEncoderConfig,
    recent: RecentInteractions | None = None,
) -> Tensor:
    """Pooled encoding of the K most recent interactions strictly before t."""
    if recent is None:
        recent = stream.recent_interactions(node, t, params.recent_k)
    rows = Tensor(_interaction_rows(stream, recent, t, time_cfg))
    mixed = matmul(rows, params.link_w1)  # (K, d_t + d_e)
    pooled = weighted_sum_cols(transpose(mixed), params.link_sum_pool)
    return matmul(params.link_w2, relu(pooled))


def temporal_representation(
    stream: EventStream,
    node: int,
    t: float,
    params: EncoderParams,
    time_cfg: TimeEncoderConfig,
    t_gap: float,
    get_ptilde: Callable[[int], Tensor],
) -> Tensor:
    """Fused (d_n,) representation of ``node`` at query time ``t``.

    ``get_ptilde`` maps a node id to its current approximate positional
    encoding; it is consulted for the node itself and for its K most
    recent interaction partners.
    """
    recent = stream.recent_interactions(node, t, params.recent_k)

    h_n = Tensor(node_encoding(stream, node, t, t_gap))
    h_e = link_encoding(stream, node, t, params, time_cfg, recent=recent)
    h_ne = matmul(params.fuse_w, concat(h_n, h_e))

    p_tilde = get_ptilde(node)
    real = ~recent.pad_mask
    if real.any():
        tau_sum = Tensor(
            time_encode_many(t - recent.times[real], time_cfg).sum(axis=0)
        )
        nbr_sum = add_n([get_ptilde(int(v)) for v in recent.neighbors[real]])
        h_hat_p = concat(tau_sum, nbr_sum)
    else:
        h_hat_p = Tensor(np.zeros(time_cfg.dim + p_tilde.data.shape[0]))
    gate = tanh(
        add(
            matmul(params.pe_w_self, p_tilde),
            matmul(params.pe_w2, relu(matmul(params.pe_w1, h_hat_p))),
        )
    )
    h_p = add(p_tilde, gate)
    return matmul(params.out_w, concat(h_ne, h_p))


def predict_link(h_u: Tensor, h_v: Tensor, params: EncoderParams) -> Tensor:
    """Link probability in (0, 1), shape (1,)."""
    hidden = relu(matmul(concat(h_u, h_v), params.pred_w1))
    return sigmoid(matmul(hidden, params.pred_w2))
