"""Versioned JSON checkpoint: config, vocabulary, and named parameter tensors.

Values are stored row-major as JSON numbers. Python's float repr is the
shortest string that round-trips the IEEE double, so save/load is bit-exact
at 64 bits.
"""
from __future__ import annotations

import json
from dataclasses import asdict
from pathlib import Path

import numpy as np

from ..config import ModelConfig, _from_dict
from .tensor import Tensor

FORMAT_VERSION = 1


def save_checkpoint(path: str | Path, config: ModelConfig, vocab_tokens: list[str],
                    params: dict[str, Tensor], meta: dict | None = None) -> None:
    payload = {
        "format_version": FORMAT_VERSION,
        "config": asdict(config),
        "vocab": list(vocab_tokens),
        "params": {
            name: {"shape": list(t.data.shape), "values": t.data.reshape(-1).tolist()}
            for name, t in params.items()
        },
        "meta": meta or {},
    }
    Path(path).write_text(json.dumps(payload, allow_nan=False))


def load_checkpoint(path: str | Path) -> tuple[ModelConfig, list[str], dict[str, np.ndarray], dict]:
    payload = json.loads(Path(path).read_text())
    version = payload.get("format_version")
    if version != FORMAT_VERSION:
        raise ValueError(f"unsupported checkpoint format_version {version!r}")
    config = _from_dict(ModelConfig, payload["config"])
    params = {
        name: np.array(entry["values"], dtype=np.float64).reshape(entry["shape"])
        for name, entry in payload["params"].items()
    }
    return config, payload["vocab"], params, payload.get("meta", {})
