"""Negative sampling strategies and their exclusion invariant."""
import numpy as np
import pytest

from lstep.events import EventStream, chronological_split
from lstep.sampling import NegativeSampler, Sample, sample_negatives


def _stream():
    rng = np.random.default_rng(81)
    n_ev = 40
    src = rng.integers(0, 10, size=n_ev)
    dst = (src + 1 + rng.integers(0, 9, size=n_ev)) % 10
    return EventStream(src, dst, np.arange(1.0, n_ev + 1.0))


def test_random_keeps_source_and_shares_timestamp():
    s = _stream()
    split = chronological_split(s)
    idx = np.arange(0, 8)
    neg = sample_negatives(s, split, idx, "random", seed=3)
    assert isinstance(neg, Sample)
    assert np.array_equal(neg.src, s.src[idx])
    assert np.array_equal(neg.ts, s.ts[idx])
    assert neg.strategy == "random"


def test_negatives_never_collide_with_batch_positives():
    s = _stream()
    split = chronological_split(s)
    for strategy in ("random", "historical", "inductive"):
        for seed in range(20):
            sampler = NegativeSampler(s, split, strategy, seed=seed)
            for lo in range(0, split.train_end, 5):
                idx = np.arange(lo, min(lo + 5, split.train_end))
                neg = sampler.sample(idx)
                positives = {
                    (int(u), int(v), float(t))
                    for u, v, t in zip(s.src[idx], s.dst[idx], s.ts[idx])
                }
                for u, v, t in zip(neg.src, neg.dst, neg.ts):
                    assert (int(u), int(v), float(t)) not in positives


def test_historical_pool_only_holds_past_pairs():
    s = _stream()
    split = chronological_split(s)
    sampler = NegativeSampler(s, split, "historical", seed=5)
    idx = np.arange(10, 16)
    neg = sampler.sample(idx)
    assert neg.fallbacks == 0
    # the pool for the last positive (t = 16) spans events with ts < 16
    past = {(int(u), int(v)) for u, v in zip(s.src[:15], s.dst[:15])}
    for u, v in zip(neg.src, neg.dst):
        assert (int(u), int(v)) in past


def test_historical_empty_pool_falls_back_to_random():
    s = _stream()
    split = chronological_split(s)
    sampler = NegativeSampler(s, split, "historical", seed=7)
    neg = sampler.sample(np.array([0]))  # nothing strictly earlier exists
    assert neg.fallbacks == 1
    assert neg.strategy == "historical"
    assert (int(neg.src[0]), int(neg.dst[0])) != (int(s.src[0]), int(s.dst[0]))


def test_inductive_pool_is_post_boundary_pairs():
    s = _stream()
    split = chronological_split(s)
    allowed = {
        (int(u), int(v))
        for u, v in zip(s.src[split.train_end :], s.dst[split.train_end :])
    }
    sampler = NegativeSampler(s, split, "inductive", seed=9)
    neg = sampler.sample(np.arange(split.val_end, s.num_events))
    assert neg.fallbacks == 0
    for u, v in zip(neg.src, neg.dst):
        assert (int(u), int(v)) in allowed


def test_same_seed_reproduces_draws():
    s = _stream()
    split = chronological_split(s)
    a = sample_negatives(s, split, np.arange(5, 15), "random", seed=11)
    b = sample_negatives(s, split, np.arange(5, 15), "random", seed=11)
    assert np.array_equal(a.dst, b.dst)
    c = sample_negatives(s, split, np.arange(5, 15), "random", seed=12)
    assert not np.array_equal(a.dst, c.dst)


def test_two_node_graph_forces_untied_destination():
    # with nodes {0, 1} and positive (0, 1), the only admissible negative
    # destination for source 0 is 0 itself
    s = EventStream(np.array([0, 0]), np.array([1, 1]), np.array([1.0, 2.0]))
    split = chronological_split(s, (0.5, 0.25, 0.25))
    neg = sample_negatives(s, split, np.array([0]), "random", seed=0)
    assert neg.src[0] == 0 and neg.dst[0] == 0


def test_unknown_strategy_rejected():
    s = _stream()
    split = chronological_split(s)
    with pytest.raises(ValueError, match="unknown strategy"):
        NegativeSampler(s, split, "uniform")


def test_empty_batch_rejected():
    s = _stream()
    split = chronological_split(s)
    sampler = NegativeSampler(s, split, "random")
    with pytest.raises(ValueError, match="empty batch"):
        sampler.sample(np.array([], dtype=int))
