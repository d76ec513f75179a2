"""Tokenization, vocabulary, input assembly with sequence markers, and the
token-level transformer encoder.

The assembled layout interleaves a SEQ_START sentinel before every unit and a
TYPE_END marker after every input type:

    [S c1] .. [S cN] E [S question] E [S scenario] E [S q1 a1] .. [S qM aM] E

Sentence-level vectors are read off at the sentinel positions, giving exactly
N + 2 + M vectors per example.
"""
from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass
from enum import IntEnum
from typing import Iterable, Sequence

import numpy as np

from .nn import Tensor, take_rows
from .nn.layers import Embedding, NamedParams, TransformerLayer
from .config import ModelConfig

PAD, UNK, SEQ_START, TYPE_END = 0, 1, 2, 3
RESERVED_TOKENS = ["<pad>", "<unk>", "<s>", "</s>"]

_TOKEN_RE = re.compile(r"[a-z0-9]+|[^a-z0-9\s]")


def tokenize(text: str) -> list[str]:
    """Lowercase, split on whitespace, and split punctuation into single-char
    tokens. Deterministic; empty text gives an empty list."""
    return _TOKEN_RE.findall(text.lower())


def tokenize_with_offsets(text: str) -> tuple[list[str], list[tuple[int, int]]]:
    tokens, offsets = [], []
    for m in _TOKEN_RE.finditer(text.lower()):
        tokens.append(m.group())
        offsets.append((m.start(), m.end()))
    return tokens, offsets


class SegmentKind(IntEnum):
    CONDITION = 0
    QUESTION = 1
    SCENARIO = 2
    HISTORY = 3


@dataclass
class Vocabulary:
    tokens: list[str]
    index: dict[str, int]

    @classmethod
    def build(cls, corpus: Iterable[str], min_freq: int = 1) -> "Vocabulary":
        counts: Counter[str] = Counter()
        for text in corpus:
            counts.update(tokenize(text))
        kept = sorted(
            (tok for tok, c in counts.items() if c >= min_freq and tok not in RESERVED_TOKENS),
            key=lambda tok: (-counts[tok], tok),
        )
        tokens = RESERVED_TOKENS + kept
        return cls(tokens=tokens, index={tok: i for i, tok in enumerate(tokens)})

    @classmethod
    def from_tokens(cls, tokens: Sequence[str]) -> "Vocabulary":
        if list(tokens[:4]) != RESERVED_TOKENS:
            raise ValueError("vocabulary must start with the reserved tokens")
        return cls(tokens=list(tokens), index={tok: i for i, tok in enumerate(tokens)})

    def __len__(self) -> int:
        return len(self.tokens)

    def id(self, token: str) -> int:
        return self.index.get(token, UNK)

    def encode(self, tokens: Iterable[str]) -> list[int]:
        return [self.index.get(tok, UNK) for tok in tokens]


@dataclass
class HistoryTurn:
    follow_up_question: str
    answer: str  # normalized "yes" | "no"

    def __post_init__(self):
        norm = self.answer.strip().lower()
        if norm not in ("yes", "no"):
            raise ValueError(f"turn answer must be yes/no, got {self.answer!r}")
        self.answer = norm


class AssemblyOverflowError(ValueError):
    pass


@dataclass
class InputAssembly:
    token_ids: np.ndarray        # (T,) int
    kinds: np.ndarray            # (T,) int, SegmentKind per token
    unit_ids: np.ndarray         # (T,) int, condition index for condition body tokens, else -1
    sentinel_positions: np.ndarray  # (N + 2 + M,) int, strictly increasing
    n_conditions: int
    n_history: int

    def __len__(self) -> int:
        return len(self.token_ids)


def assemble(
    condition_texts: Sequence[str],
    question: str,
    scenario: str,
    history: Sequence[HistoryTurn],
    vocab: Vocabulary,
    max_sequence_length: int,
) -> InputAssembly:
    """Build the marker-interleaved id sequence.

    Overflow is handled by dropping history turns oldest-first, then
    truncating the scenario body from its tail. Condition and question tokens
    are never truncated; if they alone exceed the budget this raises.
    """
    if not condition_texts:
        raise ValueError("assemble requires at least one condition")

    cond_tokens = [vocab.encode(tokenize(c)) for c in condition_texts]
    question_tokens = vocab.encode(tokenize(question))
    scenario_tokens = vocab.encode(tokenize(scenario))
    turn_tokens = [vocab.encode(tokenize(t.follow_up_question) + tokenize(t.answer))
                   for t in history]

    fixed = (
        sum(len(t) + 1 for t in cond_tokens) + 1   # sentinels + TYPE_END
        + len(question_tokens) + 2                  # question sentinel + TYPE_END
        + 1 + 1                                     # scenario sentinel + TYPE_END
        + 1                                         # history TYPE_END
    )
    if fixed > max_sequence_length:
        raise AssemblyOverflowError(
            f"conditions and question need {fixed} tokens, budget is {max_sequence_length}")

    kept_turns = list(turn_tokens)
    total = fixed + len(scenario_tokens) + sum(len(t) + 1 for t in kept_turns)
    while total > max_sequence_length and kept_turns:
        dropped = kept_turns.pop(0)  # oldest first
        total -= len(dropped) + 1
    if total > max_sequence_length:
        scenario_tokens = scenario_tokens[: max(0, len(scenario_tokens) - (total - max_sequence_length))]
        total = fixed + len(scenario_tokens)

    ids: list[int] = []
    kinds: list[int] = []
    units: list[int] = []
    sentinels: list[int] = []

    def emit(token_id: int, kind: SegmentKind, unit: int = -1) -> None:
        ids.append(token_id)
        kinds.append(int(kind))
        units.append(unit)

    for ci, toks in enumerate(cond_tokens):
        sentinels.append(len(ids))
        emit(SEQ_START, SegmentKind.CONDITION)
        for t in toks:
            emit(t, SegmentKind.CONDITION, unit=ci)
    emit(TYPE_END, SegmentKind.CONDITION)

    sentinels.append(len(ids))
    emit(SEQ_START, SegmentKind.QUESTION)
    for t in question_tokens:
        emit(t, SegmentKind.QUESTION)
    emit(TYPE_END, SegmentKind.QUESTION)

    sentinels.append(len(ids))
    emit(SEQ_START, SegmentKind.SCENARIO)
    for t in scenario_tokens:
        emit(t, SegmentKind.SCENARIO)
    emit(TYPE_END, SegmentKind.SCENARIO)

    for toks in kept_turns:
        sentinels.append(len(ids))
        emit(SEQ_START, SegmentKind.HISTORY)
        for t in toks:
            emit(t, SegmentKind.HISTORY)
    emit(TYPE_END, SegmentKind.HISTORY)

    assert len(ids) == total, "assembled length must match the budget computation"
    return InputAssembly(
        token_ids=np.array(ids, dtype=np.intp),
        kinds=np.array(kinds, dtype=np.intp),
        unit_ids=np.array(units, dtype=np.intp),
        sentinel_positions=np.array(sentinels, dtype=np.intp),
        n_conditions=len(condition_texts),
        n_history=len(kept_turns),
    )


@dataclass
class EncodedSequence:
    token_vectors: Tensor     # (T, d)
    sentence_vectors: Tensor  # (N + 2 + M, d)


class TokenEncoder:
    """Token + learned positional + segment-kind embeddings, through
    transformer layers with PAD masked out."""

    def __init__(self, config: ModelConfig, rng: np.random.Generator):
        if config.vocab_size < len(RESERVED_TOKENS):
            raise ValueError("vocab_size must cover the reserved tokens")
        self.config = config
        self.tok_emb = Embedding(config.vocab_size, config.d_model, rng)
        self.pos_emb = Embedding(config.max_sequence_length, config.d_model, rng)
        self.kind_emb = Embedding(len(SegmentKind), config.d_model, rng)
        self.layers = [
            TransformerLayer(config.d_model, config.n_heads, config.ffn_dim,
                             config.dropout_rate, rng)
            for _ in range(config.n_encoder_layers)
        ]

    def __call__(self, assembly: InputAssembly, training: bool = False,
                 rng: np.random.Generator | None = None) -> EncodedSequence:
        ids = assembly.token_ids
        if ids.size and ids.max() >= self.config.vocab_size:
            raise IndexError("token id outside the vocabulary")
        if len(ids) > self.config.max_sequence_length:
            raise AssemblyOverflowError("assembly longer than max_sequence_length")
        positions = np.arange(len(ids))
        x = self.tok_emb(ids) + self.pos_emb(positions) + self.kind_emb(assembly.kinds)
        mask = ids != PAD
        for layer in self.layers:
            x = layer(x, mask=mask, training=training, rng=rng)
        sent = take_rows(x, assembly.sentinel_positions)
        return EncodedSequence(token_vectors=x, sentence_vectors=sent)

    def named_params(self, prefix: str) -> NamedParams:
        out = (
            self.tok_emb.named_params(f"{prefix}.tok_emb")
            + self.pos_emb.named_params(f"{prefix}.pos_emb")
            + self.kind_emb.named_params(f"{prefix}.kind_emb")
        )
        for i, layer in enumerate(self.layers):
            out.extend(layer.named_params(f"{prefix}.layer{i}"))
        return out
