"""Reverse-mode automatic differentiation over numpy arrays.

A ``GradientTape`` records every operation executed while it is active.
Recording order is creation order, which is already a valid topological
order, so the backward pass is a single reverse sweep over the tape.
All tensors are float64.
"""
from __future__ import annotations

import numpy as np

__all__ = [
    "Tensor",
    "ComplexTensor",
    "GradientTape",
    "backward",
    "matmul",
    "add",
    "sub",
    "add_n",
    "concat",
    "relu",
    "tanh",
    "sigmoid",
    "log",
    "clamp",
    "elementwise_mul",
    "scale",
    "mean_rows",
    "weighted_sum_cols",
    "sum_all",
    "norm2",
    "transpose",
]

_ACTIVE_TAPE: "GradientTape | None" = None


class Tensor:
    """A float64 array plus bookkeeping for the tape.

    ``learnable`` marks an optimizable leaf; ``_rec`` is set on any tensor
    produced by a recorded operation.
    """

    __slots__ = ("data", "learnable", "name", "_rec")

    def __init__(self, data, learnable: bool = False, name: str | None = None):
        self.data = np.asarray(data, dtype=np.float64)
        self.learnable = learnable
        self.name = name
        self._rec = False

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    def detach(self) -> "Tensor":
        """Copy of the value with no tape history."""
        return Tensor(self.data.copy())

    def __repr__(self) -> str:
        tag = f" name={self.name!r}" if self.name else ""
        return f"Tensor(shape={self.data.shape}{tag}, learnable={self.learnable})"


class ComplexTensor:
    """Complex-valued tensor stored as independent real and imaginary parts."""

    __slots__ = ("real", "imag")

    def __init__(self, real: Tensor, imag: Tensor):
        if real.shape != imag.shape:
            raise ValueError(
                f"real/imag shape mismatch: {real.shape} vs {imag.shape}"
            )
        self.real = real
        self.imag = imag

    @property
    def shape(self) -> tuple[int, ...]:
        return self.real.shape

    def modulus(self) -> np.ndarray:
        return np.hypot(self.real.data, self.imag.data)


class GradientTape:
    """Ordered record of operations; inputs always precede their consumers."""

    def __init__(self):
        self._nodes: list[tuple[tuple[Tensor, ...], tuple[Tensor, ...], object]] = []

    def __enter__(self) -> "GradientTape":
        global _ACTIVE_TAPE
        if _ACTIVE_TAPE is not None:
            raise RuntimeError("a gradient tape is already active")
        _ACTIVE_TAPE = self
        return self

    def __exit__(self, exc_type, exc, tb) -> None:
        global _ACTIVE_TAPE
        _ACTIVE_TAPE = None

    def __len__(self) -> int:
        return len(self._nodes)

    def record(self, outs, inputs, vjp) -> None:
        for o in outs:
            o._rec = True
        self._nodes.append((outs, inputs, vjp))


def backward(
    tape: GradientTape,
    loss: Tensor,
    params: dict[str, Tensor] | None = None,
) -> dict[str, np.ndarray]:
    """Reverse sweep from ``loss``; returns gradients for learnable leaves.

    When ``params`` is given the result covers every entry, zero-filled for
    parameters the loss does not depend on. Without it, only learnable
    leaves actually reached by the sweep appear, keyed by tensor name.
    """
    if loss.data.size != 1:
        raise ValueError(f"loss must be scalar, got shape {loss.data.shape}")
    if not loss._rec and not loss.learnable:
        raise ValueError("loss is not recorded on this tape")

    grads: dict[int, np.ndarray] = {id(loss): np.ones_like(loss.data)}
    leaf_grads: dict[int, np.ndarray] = {}

    def _absorb(t: Tensor, g: np.ndarray) -> None:
        key = id(t)
        if key in grads:
            grads[key] = grads[key] + g
        else:
            grads[key] = g

    for outs, inputs, vjp in reversed(tape._nodes):
        gouts = tuple(grads.pop(id(o), None) for o in outs)
        if all(g is None for g in gouts):
            continue
        gouts = tuple(
            np.zeros_like(o.data) if g is None else g for o, g in zip(outs, gouts)
        )
        gins = vjp(*gouts)
        for t, g in zip(inputs, gins):
            if g is None:
                continue
            _absorb(t, g)
            if t.learnable:
                leaf_grads[id(t)] = grads[id(t)]

    if loss.learnable:
        leaf_grads[id(loss)] = np.ones_like(loss.data)

    if params is not None:
        return {
            name: leaf_grads.get(id(t), np.zeros_like(t.data))
            for name, t in params.items()
        }
    out: dict[str, np.ndarray] = {}
    for t_id, g in leaf_grads.items():
        out[str(t_id)] = g
    return out


def _as_tensor(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


def _emit(out_data, inputs: tuple[Tensor, ...], vjp) -> Tensor:
    out = Tensor(out_data)
    if _ACTIVE_TAPE is not None:
        _ACTIVE_TAPE.record((out,), inputs, vjp)
    return out


def matmul(a: Tensor, b: Tensor) -> Tensor:
    """Matrix/vector product with numpy ``@`` semantics (1-D and 2-D only)."""
    a, b = _as_tensor(a), _as_tensor(b)
    ad, bd = a.data, b.data
    if ad.ndim not in (1, 2) or bd.ndim not in (1, 2):
        raise ValueError(f"matmul supports 1-D/2-D, got {ad.shape} @ {bd.shape}")
    if ad.shape[-1] != bd.shape[0]:
        raise ValueError(f"matmul shape mismatch: {ad.shape} @ {bd.shape}")
    out_data = ad @ bd

    def vjp(g):
        if ad.ndim == 2 and bd.ndim == 2:
            return g @ bd.T, ad.T @ g
        if ad.ndim == 1 and bd.ndim == 2:
            return g @ bd.T, np.outer(ad, g)
        if ad.ndim == 2 and bd.ndim == 1:
            return np.outer(g, bd), ad.T @ g
        return g * bd, g * ad

    return _emit(out_data, (a, b), vjp)


def add(a: Tensor, b: Tensor) -> Tensor:
    a, b = _as_tensor(a), _as_tensor(b)
    if a.data.shape != b.data.shape:
        raise ValueError(f"add shape mismatch: {a.data.shape} vs {b.data.shape}")
    return _emit(a.data + b.data, (a, b), lambda g: (g, g))


def sub(a: Tensor, b: Tensor) -> Tensor:
    a, b = _as_tensor(a), _as_tensor(b)
    if a.data.shape != b.data.shape:
        raise ValueError(f"sub shape mismatch: {a.data.shape} vs {b.data.shape}")
    return _emit(a.data - b.data, (a, b), lambda g: (g, -g))


def add_n(terms: list[Tensor]) -> Tensor:
    """Sum of same-shape tensors as a single tape node."""
    if not terms:
        raise ValueError("add_n needs at least one term")
    terms = [_as_tensor(t) for t in terms]
    shape = terms[0].data.shape
    for t in terms[1:]:
        if t.data.shape != shape:
            raise ValueError(f"add_n shape mismatch: {shape} vs {t.data.shape}")
    total = terms[0].data.copy()
    for t in terms[1:]:
        total += t.data
    return _emit(total, tuple(terms), lambda g: tuple(g for _ in terms))


def concat(a: Tensor, b: Tensor) -> Tensor:
    """Concatenate two 1-D tensors."""
    a, b = _as_tensor(a), _as_tensor(b)
    if a.data.ndim != 1 or b.data.ndim != 1:
        raise ValueError(
            f"concat expects 1-D inputs, got {a.data.shape} and {b.data.shape}"
        )
    na = a.data.shape[0]
    return _emit(
        np.concatenate([a.data, b.data]),
        (a, b),
        lambda g: (g[:na], g[na:]),
    )


def relu(x: Tensor) -> Tensor:
    x = _as_tensor(x)
    mask = x.data > 0.0
    return _emit(np.where(mask, x.data, 0.0), (x,), lambda g: (g * mask,))


def tanh(x: Tensor) -> Tensor:
    x = _as_tensor(x)
    y = np.tanh(x.data)
    return _emit(y, (x,), lambda g: (g * (1.0 - y * y),))


def sigmoid(x: Tensor) -> Tensor:
    x = _as_tensor(x)
    # stable in both tails
    y = np.where(
        x.data >= 0.0,
        1.0 / (1.0 + np.exp(-np.abs(x.data))),
        np.exp(-np.abs(x.data)) / (1.0 + np.exp(-np.abs(x.data))),
    )
    return _emit(y, (x,), lambda g: (g * y * (1.0 - y),))


def log(x: Tensor) -> Tensor:
    x = _as_tensor(x)
    return _emit(np.log(x.data), (x,), lambda g: (g / x.data,))


def clamp(x: Tensor, lo: float, hi: float) -> Tensor:
    """Clip to [lo, hi]; gradient passes only through the interior."""
    x = _as_tensor(x)
    mask = (x.data > lo) & (x.data < hi)
    return _emit(np.clip(x.data, lo, hi), (x,), lambda g: (g * mask,))


def elementwise_mul(a: Tensor, b) -> Tensor:
    """Hadamard product; ``b`` may be a python scalar."""
    a = _as_tensor(a)
    if isinstance(b, (int, float)):
        s = float(b)
        return _emit(a.data * s, (a,), lambda g: (g * s,))
    b = _as_tensor(b)
    if a.data.shape != b.data.shape:
        raise ValueError(
            f"elementwise_mul shape mismatch: {a.data.shape} vs {b.data.shape}"
        )
    ad, bd = a.data, b.data
    return _emit(ad * bd, (a, b), lambda g: (g * bd, g * ad))


def scale(x: Tensor, s: float) -> Tensor:
    return elementwise_mul(x, float(s))


def mean_rows(x: Tensor) -> Tensor:
    """Mean over the rows of a 2-D tensor; (m, n) -> (n,)."""
    x = _as_tensor(x)
    if x.data.ndim != 2:
        raise ValueError(f"mean_rows expects 2-D, got {x.data.shape}")
    m = x.data.shape[0]
    return _emit(
        x.data.mean(axis=0),
        (x,),
        lambda g: (np.broadcast_to(g / m, x.data.shape).copy(),),
    )


def weighted_sum_cols(x: Tensor, w: Tensor) -> Tensor:
    """Weighted sum of the columns of x: (d, L) x (L, 1) -> (d,)."""
    x, w = _as_tensor(x), _as_tensor(w)
    if x.data.ndim != 2:
        raise ValueError(f"weighted_sum_cols expects 2-D input, got {x.data.shape}")
    wv = w.data.reshape(-1)
    if wv.shape[0] != x.data.shape[1]:
        raise ValueError(
            f"weighted_sum_cols shape mismatch: {x.data.shape} vs {w.data.shape}"
        )

    def vjp(g):
        return np.outer(g, wv), (x.data.T @ g).reshape(w.data.shape)

    return _emit(x.data @ wv, (x, w), vjp)


def transpose(x: Tensor) -> Tensor:
    x = _as_tensor(x)
    if x.data.ndim != 2:
        raise ValueError(f"transpose expects 2-D, got {x.data.shape}")
    return _emit(x.data.T.copy(), (x,), lambda g: (g.T,))


def sum_all(x: Tensor) -> Tensor:
    x = _as_tensor(x)
    return _emit(
        np.asarray(x.data.sum()),
        (x,),
        lambda g: (np.broadcast_to(g, x.data.shape).copy(),),
    )


def norm2(x: Tensor) -> Tensor:
    """Euclidean norm of a 1-D tensor; subgradient 0 at the origin."""
    x = _as_tensor(x)
    if x.data.ndim != 1:
        raise ValueError(f"norm2 expects 1-D, got {x.data.shape}")
    n = float(np.sqrt(np.dot(x.data, x.data)))

    def vjp(g):
        if n == 0.0:
            return (np.zeros_like(x.data),)
        return (g * x.data / n,)

    return _emit(np.asarray(n), (x,), vjp)
