"""Entailment-driven decision making.

Sentence vectors from the token encoder pass through inter-sentence
transformer layers (full self-attention, so conditions see each other and all
user-provided information). Each condition gets three entailment confidence
scores, which mix three learned entailment vectors into a per-condition
fulfillment representation. An attention head pools the per-condition
[fulfillment; condition] pairs into a summary that a linear head maps to the
four decision logits (Yes, No, Inquire, Irrelevant).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .config import ModelConfig
from .data import DecisionLabel
from .encoding import EncodedSequence, InputAssembly, TokenEncoder
from .nn import Tensor, concat, cross_entropy, cross_entropy_rows, parameter, softmax, take_rows
from .nn.layers import Linear, NamedParams, TransformerLayer
from .weak_supervision import EntailmentLabel


@dataclass
class ModelOutput:
    decision_logits: Tensor      # (4,)
    attention: Tensor            # (N,) pooling weights over conditions
    entailment_scores: Tensor    # (N, 3) raw confidence scores
    condition_vectors: Tensor    # (N, d) transformed condition representations


@dataclass
class Prediction:
    decision: DecisionLabel
    entailment_states: list[EntailmentLabel]
    attention: np.ndarray
    decision_logits: np.ndarray
    entailment_scores: np.ndarray


class DecisionModel:
    def __init__(self, config: ModelConfig, seed: int = 0):
        self.config = config
        rng = np.random.default_rng(seed)
        self.encoder = TokenEncoder(config, rng)
        self.inter_layers = [
            TransformerLayer(config.d_model, config.n_heads, config.ffn_dim,
                             config.dropout_rate, rng)
            for _ in range(config.n_inter_layers)
        ]
        self.entail_head = Linear(config.d_model, 3, rng)
        # rows: Entailment, Contradiction, Neutral
        self.entail_vectors = parameter(rng.normal(0.0, 0.02, size=(3, config.d_model)))
        self.attn_head = Linear(2 * config.d_model, 1, rng)
        self.decision_head = Linear(2 * config.d_model, 4, rng)

    # -- pieces ---------------------------------------------------------------

    def inter_sentence_encode(self, sentence_vectors: Tensor, training: bool = False,
                              rng: np.random.Generator | None = None) -> Tensor:
        """Full self-attention over the N+2+M sentence vectors (no masking)."""
        if sentence_vectors.shape[0] == 0:
            raise ValueError("no sentence vectors to encode")
        x = sentence_vectors
        for layer in self.inter_layers:
            x = layer(x, mask=None, training=training, rng=rng)
        return x

    def entailment_scores(self, condition_vectors: Tensor) -> Tensor:
        """(N, 3) confidence scores; weights shared across conditions."""
        return self.entail_head(condition_vectors)

    def mix_entailment_vectors(self, scores: Tensor) -> Tensor:
        """Per-condition fulfillment vector: score-weighted sum of the three
        learned entailment vectors (raw scores by default)."""
        coeff = softmax(scores, axis=-1) if self.config.normalized_entail_mix else scores
        return coeff @ self.entail_vectors

    def decide(self, condition_vectors: Tensor, fulfillment_vectors: Tensor
               ) -> tuple[Tensor, Tensor]:
        """Attention-pooled decision logits; the pooling softmax ranges over
        conditions only."""
        if condition_vectors.shape[0] < 1:
            raise ValueError("decide needs at least one condition")
        paired = concat([fulfillment_vectors, condition_vectors], axis=1)  # (N, 2d)
        raw = self.attn_head(paired).reshape(paired.shape[0])
        attn = softmax(raw)
        summary = attn @ paired  # (2d,)
        logits = self.decision_head(summary)
        return logits, attn

    # -- full forward -----------------------------------------------------------

    def forward(self, assembly: InputAssembly, training: bool = False,
                rng: np.random.Generator | None = None) -> ModelOutput:
        encoded: EncodedSequence = self.encoder(assembly, training=training, rng=rng)
        transformed = self.inter_sentence_encode(encoded.sentence_vectors,
                                                 training=training, rng=rng)
        cond = take_rows(transformed, np.arange(assembly.n_conditions))
        scores = self.entailment_scores(cond)
        fulfill = self.mix_entailment_vectors(scores)
        logits, attn = self.decide(cond, fulfill)
        return ModelOutput(decision_logits=logits, attention=attn,
                           entailment_scores=scores, condition_vectors=cond)

    def predict(self, assembly: InputAssembly) -> Prediction:
        out = self.forward(assembly, training=False)
        scores = out.entailment_scores.data
        return Prediction(
            decision=DecisionLabel(int(np.argmax(out.decision_logits.data))),
            entailment_states=[EntailmentLabel(int(i)) for i in scores.argmax(axis=1)],
            attention=out.attention.data.copy(),
            decision_logits=out.decision_logits.data.copy(),
            entailment_scores=scores.copy(),
        )

    def named_params(self, prefix: str = "decision") -> dict[str, Tensor]:
        pairs: NamedParams = self.encoder.named_params(f"{prefix}.encoder")
        for i, layer in enumerate(self.inter_layers):
            pairs.extend(layer.named_params(f"{prefix}.inter{i}"))
        pairs.extend(self.entail_head.named_params(f"{prefix}.entail_head"))
        pairs.append((f"{prefix}.entail_vectors", self.entail_vectors))
        pairs.extend(self.attn_head.named_params(f"{prefix}.attn_head"))
        pairs.extend(self.decision_head.named_params(f"{prefix}.decision_head"))
        return dict(pairs)

    def load_params(self, values: dict[str, np.ndarray], prefix: str = "decision") -> None:
        own = self.named_params(prefix)
        missing = set(own) - set(values)
        if missing:
            raise ValueError(f"checkpoint missing parameters: {sorted(missing)[:3]}...")
        for name, tensor in own.items():
            arr = values[name]
            if arr.shape != tensor.data.shape:
                raise ValueError(f"shape mismatch for {name}: {arr.shape} vs {tensor.data.shape}")
            tensor.data = arr.astype(np.float64).copy()


# -- losses -------------------------------------------------------------------

def entailment_loss(scores: Tensor, labels: Sequence[EntailmentLabel]) -> Tensor:
    """Mean cross entropy over the given conditions."""
    if scores.shape[0] != len(labels):
        raise ValueError("one label per condition required")
    targets = np.array([int(l) for l in labels])
    return cross_entropy_rows(scores, targets, reduction="mean")


def entailment_loss_sum(scores: Tensor, labels: Sequence[EntailmentLabel]) -> Tensor:
    """Summed cross entropy; batch code divides by the batch-wide condition
    count so the loss is normalized across the whole batch."""
    if scores.shape[0] != len(labels):
        raise ValueError("one label per condition required")
    targets = np.array([int(l) for l in labels])
    return cross_entropy_rows(scores, targets, reduction="sum")


def decision_loss(logits: Tensor, gold: DecisionLabel) -> Tensor:
    return cross_entropy(logits, int(gold))


def total_loss(dec_loss: Tensor | float, entail: Tensor | float, lam: float):
    if lam < 0:
        raise ValueError("lambda must be >= 0")
    return dec_loss + lam * entail
