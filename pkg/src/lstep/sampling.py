"""Negative sampling for temporal link prediction.

One negative per positive, sharing its timestamp. Three strategies:

* ``random`` keeps the source and redraws the destination uniformly.
* ``historical`` draws a (src, dst) pair already observed strictly
  before the positive's timestamp.
* ``inductive`` draws a pair first observed after the training boundary.

A drawn negative is rejected while it coincides with any positive of the
same batch at the same timestamp; empty or exhausted pools fall back to
the random strategy and the fallback count is reported.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .events import ChronoSplit, EventStream

__all__ = ["STRATEGIES", "Sample", "NegativeSampler", "sample_negatives"]

STRATEGIES = ("random", "historical", "inductive")
_MAX_TRIES = 100


@dataclass(frozen=True)
class Sample:
    """Negative endpoints aligned with a batch of positives."""

    src: np.ndarray
    dst: np.ndarray
    ts: np.ndarray
    strategy: str
    fallbacks: int = 0


class NegativeSampler:
    """Stateful sampler; pools grow incrementally as batches advance."""

    def __init__(
        self,
        stream: EventStream,
        split: ChronoSplit,
        strategy: str,
        seed: int = 0,
    ):
        if strategy not in STRATEGIES:
            raise ValueError(
                f"unknown strategy {strategy!r}, expected one of {STRATEGIES}"
            )
        self.stream = stream
        self.split = split
        self.strategy = strategy
        self.rng = np.random.default_rng(seed)
        self._ptr = 0  # events with index < _ptr are in the historical pool
        self._pool: list[tuple[int, int]] = []
        self._pool_set: set[tuple[int, int]] = set()
        if strategy == "inductive":
            first_seen: dict[tuple[int, int], int] = {}
            for i in range(stream.num_events):
                key = (int(stream.src[i]), int(stream.dst[i]))
                first_seen.setdefault(key, i)
            self._pool = sorted(
                k for k, i in first_seen.items() if i >= split.train_end
            )
            self._pool_set = set(self._pool)

    def _advance_pool(self, t: float) -> None:
        src, dst, ts = self.stream.src, self.stream.dst, self.stream.ts
        n = self.stream.num_events
        while self._ptr < n and ts[self._ptr] < t:
            key = (int(src[self._ptr]), int(dst[self._ptr]))
            if key not in self._pool_set:
                self._pool_set.add(key)
                self._pool.append(key)
            self._ptr += 1

    def _random_dst(self, u: int, t: float, blocked: set[tuple[int, int]]) -> int:
        n = self.stream.num_nodes
        for _ in range(_MAX_TRIES):
            v = int(self.rng.integers(0, n))
            if (u, v) not in blocked:
                return v
        start = int(self.rng.integers(0, n))
        for off in range(n):
            v = (start + off) % n
            if (u, v) not in blocked:
                return v
        raise RuntimeError(f"no admissible negative destination for node {u} at t={t}")

    def _pool_draw(
        self, t: float, blocked: set[tuple[int, int]]
    ) -> tuple[int, int] | None:
        pool = self._pool
        if not pool:
            return None
        for _ in range(min(_MAX_TRIES, 4 * len(pool))):
            u, v = pool[int(self.rng.integers(0, len(pool)))]
            if (u, v) not in blocked:
                return u, v
        for u, v in pool:  # deterministic sweep before giving up
            if (u, v) not in blocked:
                return u, v
        return None

    def sample(self, batch_indices: np.ndarray) -> Sample:
        """One negative per positive event in ``batch_indices``."""
        idx = np.asarray(batch_indices, dtype=np.int64)
        if idx.size == 0:
            raise ValueError("empty batch")
        src = self.stream.src[idx]
        dst = self.stream.dst[idx]
        ts = self.stream.ts[idx]
        by_time: dict[float, set[tuple[int, int]]] = {}
        for u, v, t in zip(src.tolist(), dst.tolist(), ts.tolist()):
            by_time.setdefault(t, set()).add((u, v))

        neg_src = np.empty_like(src)
        neg_dst = np.empty_like(dst)
        fallbacks = 0
        for i, (u, t) in enumerate(zip(src.tolist(), ts.tolist())):
            blocked = by_time[t]
            if self.strategy == "random":
                neg_src[i] = u
                neg_dst[i] = self._random_dst(u, t, blocked)
                continue
            if self.strategy == "historical":
                self._advance_pool(t)
            pair = self._pool_draw(t, blocked)
            if pair is None:
                fallbacks += 1
                neg_src[i] = u
                neg_dst[i] = self._random_dst(u, t, blocked)
            else:
                neg_src[i], neg_dst[i] = pair
        return Sample(neg_src, neg_dst, ts.copy(), self.strategy, fallbacks)


def sample_negatives(
    stream: EventStream,
    split: ChronoSplit,
    batch_indices: np.ndarray,
    strategy: str,
    seed: int = 0,
) -> Sample:
    """One-shot sampling for a single batch."""
    return NegativeSampler(stream, split, strategy, seed).sample(batch_indices)
