"""Run configuration: flat key-value files, presets, and stable hashes."""
from __future__ import annotations

import hashlib
from dataclasses import dataclass, fields, replace
from pathlib import Path

__all__ = [
    "RunConfig",
    "PRESETS",
    "parse_config",
    "parse_config_file",
    "serialize_config",
    "config_hash",
    "shape_hash",
    "apply_preset",
    "config_problems",
    "validate_config",
]


@dataclass(frozen=True)
class RunConfig:
    """Every knob of a run; per-dataset fields default to 0 (= required)."""

    dataset: str = "unnamed"
    data: str = ""
    d_t: int = 100
    d_n: int = 172
    d_e: int = 172
    d_p: int = 172
    alpha: float = 10.0
    beta: float = 10.0
    history_len: int = 0  # L
    t_gap: float = 0.0
    recent_k: int = 0  # K
    batch_size: int = 0  # B
    lr: float = 1e-4
    max_epochs: int = 200
    patience: int = 10
    alpha_neg: float = 0.3
    alpha_pe: float = 0.5
    train_ratio: float = 0.70
    val_ratio: float = 0.15
    pe_init: str = "laplacian"
    share_pe_mlp: bool = True
    eigen_size_cap: int = 5000
    seed: int = 0


# (history_len, t_gap, recent_k, batch_size[, extra overrides])
PRESETS: dict[str, dict[str, object]] = {
    "wikipedia": {"history_len": 100, "t_gap": 1000.0, "recent_k": 15, "batch_size": 128},
    "reddit": {"history_len": 100, "t_gap": 1000.0, "recent_k": 20, "batch_size": 200},
    "mooc": {"history_len": 100, "t_gap": 2000.0, "recent_k": 30, "batch_size": 128},
    "lastfm": {"history_len": 100, "t_gap": 1000.0, "recent_k": 30, "batch_size": 128},
    "enron": {"history_len": 100, "t_gap": 1000.0, "recent_k": 20, "batch_size": 64},
    "social_evo": {
        "history_len": 100,
        "t_gap": 1000.0,
        "recent_k": 20,
        "batch_size": 128,
        "d_p": 72,
    },
    "uci": {"history_len": 200, "t_gap": 500.0, "recent_k": 30, "batch_size": 100},
    "flights": {"history_len": 100, "t_gap": 1000.0, "recent_k": 30, "batch_size": 128},
    "can_parl": {"history_len": 20, "t_gap": 2.0, "recent_k": 10, "batch_size": 64},
    "us_legis": {"history_len": 50, "t_gap": 2.0, "recent_k": 10, "batch_size": 200},
    "un_trade": {"history_len": 200, "t_gap": 6.0, "recent_k": 30, "batch_size": 200},
    "un_vote": {"history_len": 100, "t_gap": 10.0, "recent_k": 20, "batch_size": 128},
    "contact": {"history_len": 200, "t_gap": 10.0, "recent_k": 20, "batch_size": 128},
}

_REQUIRED_POSITIVE = ("history_len", "t_gap", "recent_k", "batch_size")


def _coerce(kind: type, raw: str, key: str):
    raw = raw.strip()
    try:
        if kind is bool:
            low = raw.lower()
            if low in ("true", "1", "yes"):
                return True
            if low in ("false", "0", "no"):
                return False
            raise ValueError(f"not a boolean: {raw!r}")
        if kind is int:
            return int(raw)
        if kind is float:
            return float(raw)
        return raw
    except ValueError as exc:
        raise ValueError(f"config field {key!r}: {exc}") from None


def parse_config(text: str, base: RunConfig | None = None) -> RunConfig:
    """Parse ``key = value`` lines over a base config; '#' starts a comment."""
    cfg = base or RunConfig()
    types = {f.name: f.type for f in fields(RunConfig)}
    py_types = {"int": int, "float": float, "str": str, "bool": bool}
    updates: dict[str, object] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ValueError(f"config line {lineno}: missing '=' in {line!r}")
        key, raw = (part.strip() for part in stripped.split("=", 1))
        if key not in types:
            raise ValueError(f"config line {lineno}: unknown field {key!r}")
        kind = py_types[str(types[key])] if isinstance(types[key], str) else types[key]
        updates[key] = _coerce(kind, raw, key)
    return replace(cfg, **updates)


def parse_config_file(path: str | Path, base: RunConfig | None = None) -> RunConfig:
    return parse_config(Path(path).read_text(), base=base)


def serialize_config(cfg: RunConfig) -> str:
    lines = []
    for f in sorted(fields(RunConfig), key=lambda f: f.name):
        value = getattr(cfg, f.name)
        if isinstance(value, bool):
            value = "true" if value else "false"
        elif isinstance(value, float):
            value = repr(value)
        lines.append(f"{f.name} = {value}")
    return "\n".join(lines) + "\n"


def config_hash(cfg: RunConfig) -> str:
    return hashlib.sha256(serialize_config(cfg).encode()).hexdigest()[:16]


def shape_hash(cfg: RunConfig) -> str:
    """Hash of the fields that fix parameter shapes."""
    key = (
        f"{cfg.d_t}:{cfg.d_n}:{cfg.d_e}:{cfg.d_p}:"
        f"{cfg.history_len}:{cfg.recent_k}:{int(cfg.share_pe_mlp)}"
    )
    return hashlib.sha256(key.encode()).hexdigest()[:16]


def apply_preset(cfg: RunConfig, name: str) -> RunConfig:
    if name not in PRESETS:
        raise ValueError(
            f"unknown preset {name!r}; available: {', '.join(sorted(PRESETS))}"
        )
    return replace(cfg, dataset=name, **PRESETS[name])  # type: ignore[arg-type]


def config_problems(cfg: RunConfig) -> list[str]:
    """Every validation problem, not just the first."""
    problems = []
    for key in _REQUIRED_POSITIVE:
        if getattr(cfg, key) <= 0:
            problems.append(f"config field {key!r} must be set to a positive value")
    for key in ("d_t", "d_n", "d_e", "d_p"):
        if getattr(cfg, key) < 1:
            problems.append(f"config field {key!r} must be >= 1")
    if cfg.pe_init not in ("laplacian", "random_walk", "zero"):
        problems.append(f"unknown pe_init {cfg.pe_init!r}")
    for key in ("alpha_neg", "alpha_pe"):
        if not 0.0 < getattr(cfg, key) < 1.0:
            problems.append(f"config field {key!r} must lie in (0, 1)")
    if not 0.0 < cfg.train_ratio < 1.0 or not 0.0 < cfg.val_ratio < 1.0:
        problems.append("split ratios must lie in (0, 1)")
    elif cfg.train_ratio + cfg.val_ratio >= 1.0:
        problems.append("train_ratio + val_ratio must leave room for a test split")
    return problems


def validate_config(cfg: RunConfig) -> None:
    problems = config_problems(cfg)
    if problems:
        raise ValueError("; ".join(problems))
