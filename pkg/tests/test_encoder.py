"""Node, link, and fused temporal representations against hand traces."""
import numpy as np
import pytest

from lstep.autodiff import GradientTape, Tensor, backward, sum_all
from lstep.encoder import (
    EncoderParams,
    link_encoding,
    node_encoding,
    predict_link,
    temporal_representation,
)
from lstep.events import EventStream
from lstep.timeenc import TimeEncoderConfig, time_encode


def _stream(d_n=3, d_e=2):
    # (0,1)@1  (1,2)@2  (0,2)@3 with recognizable features
    node_features = np.arange(9.0).reshape(3, 3) if d_n == 3 else None
    edge_features = np.array([[1.0, 0.0], [0.0, 1.0], [2.0, 2.0]])
    return EventStream(
        np.array([0, 1, 0]),
        np.array([1, 2, 2]),
        np.array([1.0, 2.0, 3.0]),
        edge_features=edge_features,
        node_features=node_features,
    )


def _params(rng, d_n=3, d_e=2, d_p=2, d_t=4, k=2):
    def w(*shape):
        return Tensor(rng.normal(size=shape) * 0.4, learnable=True)

    return EncoderParams(
        link_w1=w(d_t + d_e, d_t + d_e),
        link_w2=w(d_t + d_e, d_t + d_e),
        link_sum_pool=w(k, 1),
        fuse_w=w(d_n, d_n + d_t + d_e),
        out_w=w(d_n, d_n + d_p),
        pe_w1=w(d_p, d_p + d_t),
        pe_w2=w(d_p, d_p),
        pe_w_self=w(d_p, d_p),
        pred_w1=w(2 * d_n, d_n),
        pred_w2=w(d_n, 1),
    )


def test_node_encoding_averages_window_neighbors():
    s = _stream()
    # at t=3.5 with gap 3: node 0 saw 1@1.0 and 2@3.0
    got = node_encoding(s, 0, 3.5, t_gap=3.0)
    want = s.node_features[0] + (s.node_features[1] + s.node_features[2]) / 2.0
    assert np.allclose(got, want, atol=1e-12)


def test_node_encoding_empty_window_is_raw_feature():
    s = _stream()
    got = node_encoding(s, 0, 1.0, t_gap=0.5)
    assert np.array_equal(got, s.node_features[0])
    got[:] = -1.0  # must be a copy, not a view into the table
    assert s.node_features[0, 0] == 0.0


def test_link_encoding_matches_hand_trace():
    rng = np.random.default_rng(61)
    s = _stream()
    p = _params(rng)
    cfg = TimeEncoderConfig(dim=4)
    t = 4.0
    got = link_encoding(s, 0, t, p, cfg).data

    # node 0 history: (1, 1.0, event 0), (2, 3.0, event 2)
    rows = np.zeros((2, 6))
    rows[0] = np.concatenate([time_encode(3.0, cfg), s.edge_features[0]])
    rows[1] = np.concatenate([time_encode(1.0, cfg), s.edge_features[2]])
    pooled = (rows @ p.link_w1.data).T @ p.link_sum_pool.data.ravel()
    want = p.link_w2.data @ np.maximum(pooled, 0.0)
    assert np.max(np.abs(got - want)) < 1e-12


def test_link_encoding_padded_rows_contribute_nothing():
    rng = np.random.default_rng(62)
    s = _stream()
    p = _params(rng, k=5)  # node 0 has only 2 interactions, 3 pads
    cfg = TimeEncoderConfig(dim=4)
    got = link_encoding(s, 0, 4.0, p, cfg).data

    rows = np.zeros((5, 6))
    rows[3] = np.concatenate([time_encode(3.0, cfg), s.edge_features[0]])
    rows[4] = np.concatenate([time_encode(1.0, cfg), s.edge_features[2]])
    pooled = (rows @ p.link_w1.data).T @ p.link_sum_pool.data.ravel()
    want = p.link_w2.data @ np.maximum(pooled, 0.0)
    assert np.max(np.abs(got - want)) < 1e-12


def test_temporal_representation_matches_hand_trace():
    rng = np.random.default_rng(63)
    s = _stream()
    p = _params(rng)
    cfg = TimeEncoderConfig(dim=4)
    t = 4.0
    ptil = {0: np.array([0.5, -0.5]), 1: np.array([1.0, 2.0]), 2: np.array([-1.0, 3.0])}
    got = temporal_representation(
        s, 0, t, p, cfg, t_gap=10.0, get_ptilde=lambda v: Tensor(ptil[v])
    ).data

    h_n = node_encoding(s, 0, t, 10.0)
    h_e = link_encoding(s, 0, t, p, cfg).data
    h_ne = p.fuse_w.data @ np.concatenate([h_n, h_e])
    tau = time_encode(3.0, cfg) + time_encode(1.0, cfg)
    h_hat = np.concatenate([tau, ptil[1] + ptil[2]])
    gate = np.tanh(
        p.pe_w_self.data @ ptil[0]
        + p.pe_w2.data @ np.maximum(p.pe_w1.data @ h_hat, 0.0)
    )
    want = p.out_w.data @ np.concatenate([h_ne, ptil[0] + gate])
    assert np.max(np.abs(got - want)) < 1e-12


def test_temporal_representation_no_history_uses_zero_context():
    rng = np.random.default_rng(64)
    s = _stream()
    p = _params(rng)
    cfg = TimeEncoderConfig(dim=4)
    ptil = np.array([0.25, 0.75])
    # node 2 has no interaction strictly before t=2.0
    got = temporal_representation(
        s, 2, 2.0, p, cfg, t_gap=0.5, get_ptilde=lambda v: Tensor(ptil)
    ).data

    h_n = s.node_features[2]
    rows = np.zeros((2, 6))
    pooled = (rows @ p.link_w1.data).T @ p.link_sum_pool.data.ravel()
    h_e = p.link_w2.data @ np.maximum(pooled, 0.0)
    h_ne = p.fuse_w.data @ np.concatenate([h_n, h_e])
    gate = np.tanh(
        p.pe_w_self.data @ ptil
        + p.pe_w2.data @ np.maximum(p.pe_w1.data @ np.zeros(6), 0.0)
    )
    want = p.out_w.data @ np.concatenate([h_ne, ptil + gate])
    assert np.max(np.abs(got - want)) < 1e-12


def test_predict_link_hand_trace_and_range():
    rng = np.random.default_rng(65)
    p = _params(rng)
    hu = rng.normal(size=3)
    hv = rng.normal(size=3)
    got = predict_link(Tensor(hu), Tensor(hv), p).data
    hidden = np.maximum(np.concatenate([hu, hv]) @ p.pred_w1.data, 0.0)
    want = 1.0 / (1.0 + np.exp(-(hidden @ p.pred_w2.data)))
    assert got.shape == (1,)
    assert abs(got[0] - want[0]) < 1e-12
    assert 0.0 < got[0] < 1.0


def test_predict_link_zero_weights_gives_half():
    rng = np.random.default_rng(66)
    p = _params(rng)
    p.pred_w2.data[:] = 0.0
    got = predict_link(Tensor(np.ones(3)), Tensor(np.ones(3)), p).data
    assert got[0] == 0.5


def test_gradients_reach_all_encoder_parameters():
    rng = np.random.default_rng(67)
    s = _stream()
    p = _params(rng)
    cfg = TimeEncoderConfig(dim=4)
    ptab = {n: Tensor(rng.normal(size=2), learnable=True) for n in range(3)}
    with GradientTape() as tape:
        hu = temporal_representation(
            s, 0, 4.0, p, cfg, t_gap=10.0, get_ptilde=lambda v: ptab[v]
        )
        hv = temporal_representation(
            s, 2, 4.0, p, cfg, t_gap=10.0, get_ptilde=lambda v: ptab[v]
        )
        loss = sum_all(predict_link(hu, hv, p))
    params = {
        "link_w1": p.link_w1,
        "link_w2": p.link_w2,
        "link_sum_pool": p.link_sum_pool,
        "fuse_w": p.fuse_w,
        "out_w": p.out_w,
        "pe_w1": p.pe_w1,
        "pe_w2": p.pe_w2,
        "pe_w_self": p.pe_w_self,
        "pred_w1": p.pred_w1,
        "pred_w2": p.pred_w2,
        "ptilde_0": ptab[0],
    }
    grads = backward(tape, loss, params)
    for name, g in grads.items():
        assert np.any(g != 0.0), f"no gradient reached {name}"
