"""Named parameter bundle tying the positional and encoder heads together."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .autodiff import ComplexTensor, Tensor
from .config import RunConfig
from .encoder import EncoderParams
from .lpe import LpeParams

__all__ = ["ModelDims", "ModelParams", "init_model_params"]


@dataclass(frozen=True)
class ModelDims:
    d_t: int
    d_n: int
    d_e: int
    d_p: int
    history_len: int
    recent_k: int

    @staticmethod
    def from_config(cfg: RunConfig) -> "ModelDims":
        return ModelDims(cfg.d_t, cfg.d_n, cfg.d_e, cfg.d_p, cfg.history_len, cfg.recent_k)


def _shapes(dims: ModelDims, share_pe_mlp: bool) -> dict[str, tuple[tuple[int, ...], int]]:
    """name -> (shape, fan_in); fan_in is the contraction width in use."""
    d_t, d_n, d_e, d_p = dims.d_t, dims.d_n, dims.d_e, dims.d_p
    link = d_t + d_e
    spec: dict[str, tuple[tuple[int, ...], int]] = {
        "filter_real": ((d_p, dims.history_len), 0),
        "filter_imag": ((d_p, dims.history_len), 0),
        "pe_sum_pool": ((dims.history_len, 1), dims.history_len),
        "pe_w1": ((d_p, d_p + d_t), d_p + d_t),
        "pe_w2": ((d_p, d_p), d_p),
        "pe_w_self": ((d_p, d_p), d_p),
        "link_w1": ((link, link), link),
        "link_w2": ((link, link), link),
        "link_sum_pool": ((dims.recent_k, 1), dims.recent_k),
        "fuse_w": ((d_n, d_n + link), d_n + link),
        "out_w": ((d_n, d_n + d_p), d_n + d_p),
        "pred_w1": ((2 * d_n, d_n), 2 * d_n),
        "pred_w2": ((d_n, 1), d_n),
    }
    if not share_pe_mlp:
        spec["enc_pe_w1"] = spec["pe_w1"]
        spec["enc_pe_w2"] = spec["pe_w2"]
        spec["enc_pe_w_self"] = spec["pe_w_self"]
    return spec


class ModelParams:
    """All learnable tensors keyed by name, with typed views on top."""

    def __init__(
        self,
        dims: ModelDims,
        tensors: dict[str, Tensor],
        share_pe_mlp: bool = True,
    ):
        self.dims = dims
        self.share_pe_mlp = share_pe_mlp
        expected = _shapes(dims, share_pe_mlp)
        if set(tensors) != set(expected):
            missing = sorted(set(expected) - set(tensors))
            extra = sorted(set(tensors) - set(expected))
            raise ValueError(f"parameter set mismatch: missing={missing} extra={extra}")
        for name, (shape, _) in expected.items():
            if tensors[name].data.shape != shape:
                raise ValueError(
                    f"parameter {name!r} has shape {tensors[name].data.shape}, "
                    f"expected {shape}"
                )
        self.tensors = tensors

    @property
    def lpe(self) -> LpeParams:
        t = self.tensors
        return LpeParams(
            filter=ComplexTensor(t["filter_real"], t["filter_imag"]),
            sum_pool=t["pe_sum_pool"],
            w1=t["pe_w1"],
            w2=t["pe_w2"],
            w_self=t["pe_w_self"],
        )

    @property
    def encoder(self) -> EncoderParams:
        t = self.tensors
        prefix = "pe" if self.share_pe_mlp else "enc_pe"
        return EncoderParams(
            link_w1=t["link_w1"],
            link_w2=t["link_w2"],
            link_sum_pool=t["link_sum_pool"],
            fuse_w=t["fuse_w"],
            out_w=t["out_w"],
            pe_w1=t[f"{prefix}_w1"],
            pe_w2=t[f"{prefix}_w2"],
            pe_w_self=t[f"{prefix}_w_self"],
            pred_w1=t["pred_w1"],
            pred_w2=t["pred_w2"],
        )

    def state_arrays(self) -> dict[str, np.ndarray]:
        return {name: t.data.copy() for name, t in self.tensors.items()}

    def load_state_arrays(self, state: dict[str, np.ndarray]) -> None:
        for name, t in self.tensors.items():
            arr = np.asarray(state[name], dtype=np.float64)
            if arr.shape != t.data.shape:
                raise ValueError(
                    f"parameter {name!r}: stored shape {arr.shape} != {t.data.shape}"
                )
            t.data = arr.copy()


def init_model_params(
    dims: ModelDims, seed: int = 0, share_pe_mlp: bool = True
) -> ModelParams:
    """Uniform +-1/sqrt(fan_in) init; the filter starts as the identity 1+0i."""
    rng = np.random.default_rng(seed)
    tensors: dict[str, Tensor] = {}
    for name, (shape, fan_in) in _shapes(dims, share_pe_mlp).items():
        if name == "filter_real":
            data = np.ones(shape)
        elif name == "filter_imag":
            data = np.zeros(shape)
        else:
            bound = 1.0 / np.sqrt(fan_in)
            data = rng.uniform(-bound, bound, size=shape)
        tensors[name] = Tensor(data, learnable=True, name=name)
    return ModelParams(dims, tensors, share_pe_mlp)
