"""Learnable positional encodings driven by a per-node history ring.

Each node stores its last L committed encodings, one per discrete step
(a step is one processed batch). The approximation filters the d_P x L
history matrix along the time axis in the frequency domain, multiplies
by a learnable complex filter, transforms back, and pools the columns
with learnable weights. Commits add a gated MLP correction built from
the node's most recent interactions and are stored detached, so no
gradient crosses batch boundaries.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import autodiff
from .autodiff import ComplexTensor, Tensor, weighted_sum_cols
from .fourier import complex_elementwise_mul, dft_time_axis, idft_time_axis
from .peinit import InitialPE
from .timeenc import TimeEncoderConfig, time_encode_many

__all__ = [
    "LpeParams",
    "PositionalStore",
    "BoundReport",
    "approximate_pe",
    "commit_pe",
    "ring_eigenvalues",
    "theorem1_check",
]


@dataclass
class LpeParams:
    """Learnable pieces of the positional-encoding update."""

    filter: ComplexTensor  # (d_p, L) frequency response
    sum_pool: Tensor  # (L, 1) column pooling weights
    w1: Tensor  # (d_p, d_p + d_t)
    w2: Tensor  # (d_p, d_p)
    w_self: Tensor  # (d_p, d_p)

    @property
    def d_p(self) -> int:
        return int(self.filter.shape[0])

    @property
    def history_len(self) -> int:
        return int(self.filter.shape[1])


class PositionalStore:
    """Ring buffer of up to ``history_len`` committed encodings per node."""

    def __init__(self, num_nodes: int, d_p: int, history_len: int):
        if history_len < 1:
            raise ValueError(f"history length must be >= 1, got {history_len}")
        self.num_nodes = int(num_nodes)
        self.d_p = int(d_p)
        self.history_len = int(history_len)
        self._ring = np.zeros((num_nodes, history_len, d_p))
        self._steps = np.full((num_nodes, history_len), -1, dtype=np.int64)
        self._count = np.zeros(num_nodes, dtype=np.int64)
        self._head = np.zeros(num_nodes, dtype=np.int64)
        self.step = 0

    def reset(self, initial: InitialPE | None = None) -> None:
        """Clear all rings; seed snapshot nodes with their initial rows at step 0."""
        self._ring[:] = 0.0
        self._steps[:] = -1
        self._count[:] = 0
        self._head[:] = 0
        self.step = 0
        if initial is not None:
            if initial.table.shape != (self.num_nodes, self.d_p):
                raise ValueError(
                    f"initial PE shape {initial.table.shape} != "
                    f"({self.num_nodes}, {self.d_p})"
                )
            for node in initial.present.tolist():
                self.commit(int(node), initial.table[int(node)])
        self.advance()

    def commit(self, node: int, vec: np.ndarray) -> None:
        """Store a detached encoding for ``node`` at the current step."""
        vec = np.asarray(vec, dtype=np.float64)
        if vec.shape != (self.d_p,):
            raise ValueError(f"commit shape {vec.shape} != ({self.d_p},)")
        last = (self._head[node] - 1) % self.history_len
        if self._count[node] > 0 and self._steps[node, last] == self.step:
            self._ring[node, last] = vec  # same-step recommit overwrites
            return
        pos = self._head[node]
        self._ring[node, pos] = vec
        self._steps[node, pos] = self.step
        self._head[node] = (pos + 1) % self.history_len
        self._count[node] = min(self._count[node] + 1, self.history_len)

    def advance(self) -> None:
        self.step += 1

    def history_matrix(self, node: int) -> np.ndarray:
        """(d_p, L) with columns oldest to newest; missing oldest are zero."""
        length = self.history_len
        out = np.zeros((self.d_p, length))
        cnt = int(self._count[node])
        if cnt == 0:
            return out
        head = int(self._head[node])
        idx = (np.arange(cnt) + head - cnt) % length
        out[:, length - cnt :] = self._ring[node, idx].T
        return out

    def entries(self, node: int) -> list[tuple[int, np.ndarray]]:
        """(step, encoding) pairs oldest to newest."""
        cnt = int(self._count[node])
        head = int(self._head[node])
        idx = (np.arange(cnt) + head - cnt) % self.history_len
        return [
            (int(self._steps[node, i]), self._ring[node, i].copy()) for i in idx
        ]

    def snapshot(self) -> dict[str, np.ndarray]:
        return {
            "ring": self._ring.copy(),
            "steps": self._steps.astype(np.float64),
            "count": self._count.astype(np.float64),
            "head": self._head.astype(np.float64),
            "step": np.asarray([float(self.step)]),
        }

    def restore(self, blob: dict[str, np.ndarray]) -> None:
        ring = np.asarray(blob["ring"], dtype=np.float64)
        if ring.shape != self._ring.shape:
            raise ValueError(
                f"store snapshot shape {ring.shape} != {self._ring.shape}"
            )
        self._ring = ring.copy()
        self._steps = np.asarray(blob["steps"]).astype(np.int64)
        self._count = np.asarray(blob["count"]).astype(np.int64)
        self._head = np.asarray(blob["head"]).astype(np.int64)
        self.step = int(np.asarray(blob["step"]).ravel()[0])


def _filter_is_identity(params: LpeParams) -> bool:
    return bool(
        np.all(params.filter.real.data == 1.0)
        and np.all(params.filter.imag.data == 0.0)
    )


def approximate_pe(history: Tensor | np.ndarray, params: LpeParams) -> Tensor:
    """Filtered, pooled encoding of one node's (d_p, L) history matrix.

    An exactly-identity filter is a mathematical no-op for the transform
    chain; outside of gradient recording the chain is skipped so the
    pass-through configuration reproduces the newest column bit-exactly.
    """
    h = history if isinstance(history, Tensor) else Tensor(history)
    if h.data.shape != (params.d_p, params.history_len):
        raise ValueError(
            f"history shape {h.data.shape} != "
            f"({params.d_p}, {params.history_len})"
        )
    if autodiff._ACTIVE_TAPE is None and _filter_is_identity(params):
        p_hat = h
    else:
        spectrum = dft_time_axis(h)
        p_hat = idft_time_axis(complex_elementwise_mul(params.filter, spectrum))
    return weighted_sum_cols(p_hat, params.sum_pool)


def commit_pe(
    p_tilde: np.ndarray,
    neighbor_entries: list[tuple[float, np.ndarray | None]],
    params: LpeParams,
    time_cfg: TimeEncoderConfig,
) -> np.ndarray:
    """Committed encoding p = p~ + tanh(W_self p~ + W2 relu(W1 q)).

    ``neighbor_entries`` are (time delta, neighbor p~) pairs for the K
    most recent interactions inclusive of the commit time; padded slots
    (vector ``None``) contribute exact zeros to the pooled q. Runs
    detached from any tape.
    """
    p_tilde = np.asarray(p_tilde, dtype=np.float64)
    d_p = params.d_p
    tau_sum = np.zeros(time_cfg.dim)
    nbr_sum = np.zeros(d_p)
    deltas = [d for d, vec in neighbor_entries if vec is not None]
    if deltas:
        tau_sum = time_encode_many(np.asarray(deltas), time_cfg).sum(axis=0)
        for _, vec in neighbor_entries:
            if vec is not None:
                nbr_sum += np.asarray(vec, dtype=np.float64)
    q = np.concatenate([tau_sum, nbr_sum])
    w1, w2, w_self = params.w1.data, params.w2.data, params.w_self.data
    hidden = w2 @ np.maximum(w1 @ q, 0.0)
    return p_tilde + np.tanh(w_self @ p_tilde + hidden)


@dataclass(frozen=True)
class BoundReport:
    max_step_diff: float
    bound: float
    satisfied: bool


def ring_eigenvalues(length: int) -> np.ndarray:
    """lambda_k = 2 - cos(2 pi k / L), k = 1..L."""
    k = np.arange(1, length + 1, dtype=np.float64)
    return 2.0 - np.cos(2.0 * np.pi * k / length)


def theorem1_check(trace: np.ndarray, params: LpeParams) -> BoundReport:
    """Compare the worst step-to-step drift of a PE trace to its bound.

    The bound is (sum_k lambda_k * |filter|_k) * (2L - 2) with lambda the
    ring-graph eigenvalue ladder and |filter| the complex modulus averaged
    over the d_p encoding rows.
    """
    trace = np.asarray(trace, dtype=np.float64)
    if trace.ndim != 2 or trace.shape[0] < 2:
        raise ValueError(
            f"trace must hold at least 2 encodings, got shape {trace.shape}"
        )
    diffs = np.linalg.norm(np.diff(trace, axis=0), axis=1)
    max_step_diff = float(diffs.max())
    length = params.history_len
    mag = params.filter.modulus().mean(axis=0)
    bound = float(np.sum(ring_eigenvalues(length) * mag) * (2.0 * length - 2.0))
    return BoundReport(max_step_diff, bound, max_step_diff <= bound)
