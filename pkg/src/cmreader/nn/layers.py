"""Transformer building blocks on top of the autograd tensor.

Modules hold their parameters as attributes and expose them through
``named_params`` so checkpoints can address every tensor by name.
"""
from __future__ import annotations

import numpy as np

from .tensor import (
    Array,
    Tensor,
    dropout,
    layer_norm,
    parameter,
    relu,
    softmax,
    take_rows,
)

NamedParams = list[tuple[str, Tensor]]


def _uniform_fan_in(rng: np.random.Generator, fan_in: int, shape: tuple[int, ...]) -> Array:
    bound = 1.0 / np.sqrt(fan_in)
    return rng.uniform(-bound, bound, size=shape)


class Linear:
    def __init__(self, d_in: int, d_out: int, rng: np.random.Generator, bias: bool = True):
        self.weight = parameter(_uniform_fan_in(rng, d_in, (d_in, d_out)))
        self.bias = parameter(np.zeros(d_out)) if bias else None

    def __call__(self, x: Tensor) -> Tensor:
        out = x @ self.weight
        if self.bias is not None:
            out = out + self.bias
        return out

    def named_params(self, prefix: str) -> NamedParams:
        out = [(f"{prefix}.weight", self.weight)]
        if self.bias is not None:
            out.append((f"{prefix}.bias", self.bias))
        return out


class LayerNorm:
    def __init__(self, d: int, eps: float = 1e-5):
        self.gain = parameter(np.ones(d))
        self.bias = parameter(np.zeros(d))
        self.eps = eps

    def __call__(self, x: Tensor) -> Tensor:
        return layer_norm(x, self.gain, self.bias, self.eps)

    def named_params(self, prefix: str) -> NamedParams:
        return [(f"{prefix}.gain", self.gain), (f"{prefix}.bias", self.bias)]


class Embedding:
    def __init__(self, n: int, d: int, rng: np.random.Generator, std: float = 0.02):
        self.weight = parameter(rng.normal(0.0, std, size=(n, d)))

    def __call__(self, ids: Array) -> Tensor:
        ids = np.asarray(ids)
        n = self.weight.shape[0]
        if ids.size and (ids.min() < 0 or ids.max() >= n):
            raise IndexError(f"embedding id out of range [0, {n})")
        return take_rows(self.weight, ids)

    def named_params(self, prefix: str) -> NamedParams:
        return [(f"{prefix}.weight", self.weight)]


class MultiHeadSelfAttention:
    """Scaled dot-product self-attention over a (T, d) sequence.

    `mask` marks key positions that may be attended to; masked positions get
    attention weight exactly 0 from every query. No positional information is
    added inside the op, so it is permutation-equivariant.
    """

    def __init__(self, d_model: int, n_heads: int, rng: np.random.Generator):
        if d_model % n_heads != 0:
            raise ValueError("d_model must be divisible by n_heads")
        self.d_model = d_model
        self.n_heads = n_heads
        self.d_head = d_model // n_heads
        self.wq = Linear(d_model, d_model, rng)
        self.wk = Linear(d_model, d_model, rng)
        self.wv = Linear(d_model, d_model, rng)
        self.wo = Linear(d_model, d_model, rng)

    def __call__(self, x: Tensor, mask: Array | None = None) -> Tensor:
        t = x.shape[0]
        mask = np.ones(t, dtype=bool) if mask is None else np.asarray(mask, dtype=bool)
        if not mask.any():
            raise ValueError("attention requires at least one unmasked position")

        def split(z: Tensor) -> Tensor:  # (T', d) -> (H, T', dh)
            return z.reshape(z.shape[0], self.n_heads, self.d_head).swapaxes(0, 1)

        # Keys/values are compacted to the unmasked positions. Masked positions
        # then carry weight exactly 0, and appending masked tokens leaves the
        # outputs of unmasked positions bit-identical (reduction lengths match).
        keep = x if mask.all() else take_rows(x, np.where(mask)[0])
        q = split(self.wq(x))
        k = split(self.wk(keep))
        v = split(self.wv(keep))
        scores = (q @ k.swapaxes(1, 2)) * (1.0 / np.sqrt(self.d_head))
        weights = softmax(scores, axis=-1)  # (H, T, T_kept)
        attended = weights @ v  # (H, T, dh)
        merged = attended.swapaxes(0, 1).reshape(t, self.d_model)
        return self.wo(merged)

    def attention_weights(self, x: Tensor, mask: Array | None = None) -> Array:
        """Forward-only (H, T, T) attention weights, for inspection and tests."""
        t = x.shape[0]
        mask = np.ones(t, dtype=bool) if mask is None else np.asarray(mask, dtype=bool)
        if not mask.any():
            raise ValueError("attention requires at least one unmasked position")
        kept = np.where(mask)[0]
        q = (self.wq(x)).data.reshape(t, self.n_heads, self.d_head).swapaxes(0, 1)
        k_full = (self.wk(x)).data[kept]
        k = k_full.reshape(kept.size, self.n_heads, self.d_head).swapaxes(0, 1)
        scores = Tensor(q @ k.swapaxes(1, 2) / np.sqrt(self.d_head))
        compact = softmax(scores, axis=-1).data
        full = np.zeros((self.n_heads, t, t))
        full[:, :, kept] = compact
        return full

    def named_params(self, prefix: str) -> NamedParams:
        out: NamedParams = []
        for name, lin in (("wq", self.wq), ("wk", self.wk), ("wv", self.wv), ("wo", self.wo)):
            out.extend(lin.named_params(f"{prefix}.{name}"))
        return out


class FeedForward:
    def __init__(self, d_model: int, d_ff: int, rng: np.random.Generator):
        self.lin1 = Linear(d_model, d_ff, rng)
        self.lin2 = Linear(d_ff, d_model, rng)

    def __call__(self, x: Tensor) -> Tensor:
        return self.lin2(relu(self.lin1(x)))

    def named_params(self, prefix: str) -> NamedParams:
        return self.lin1.named_params(f"{prefix}.lin1") + self.lin2.named_params(f"{prefix}.lin2")


class TransformerLayer:
    """Post-norm encoder block: LN(x + drop(attn(x))), then LN(y + drop(ffn(y)))."""

    def __init__(self, d_model: int, n_heads: int, d_ff: int, dropout_rate: float,
                 rng: np.random.Generator):
        self.attn = MultiHeadSelfAttention(d_model, n_heads, rng)
        self.ffn = FeedForward(d_model, d_ff, rng)
        self.norm1 = LayerNorm(d_model)
        self.norm2 = LayerNorm(d_model)
        self.dropout_rate = dropout_rate

    def __call__(self, x: Tensor, mask: Array | None = None, training: bool = False,
                 rng: np.random.Generator | None = None) -> Tensor:
        if training and self.dropout_rate > 0 and rng is None:
            raise ValueError("training-mode dropout needs an rng")
        h = self.attn(x, mask)
        if training:
            h = dropout(h, self.dropout_rate, rng, training)
        y = self.norm1(x + h)
        h2 = self.ffn(y)
        if training:
            h2 = dropout(h2, self.dropout_rate, rng, training)
        return self.norm2(y + h2)

    def named_params(self, prefix: str) -> NamedParams:
        return (
            self.attn.named_params(f"{prefix}.attn")
            + self.ffn.named_params(f"{prefix}.ffn")
            + self.norm1.named_params(f"{prefix}.norm1")
            + self.norm2.named_params(f"{prefix}.norm2")
        )
