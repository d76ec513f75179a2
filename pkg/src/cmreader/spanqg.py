"""Follow-up question generation: extract the underspecified rule-text span
(same-sentence constraint) and rephrase it into a question via templates.

The span extractor is a separate model with its own encoder, trained
independently of decision making. Rule units for this model are sentences
(bullet items count as their line's sentence); scoring runs over
non-punctuation rule tokens so span indices line up with the weak span
labels.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .config import ModelConfig
from .encoding import (
    HistoryTurn,
    InputAssembly,
    TokenEncoder,
    Vocabulary,
    assemble,
    tokenize_with_offsets,
)
from .nn import Tensor, cross_entropy, parameter, take_rows
from .nn.layers import NamedParams
from .segmenter import detect_bullets, split_sentences


@dataclass(frozen=True)
class SpanPrediction:
    sentence_index: int
    token_start: int  # inclusive, in rule-token space
    token_end: int    # inclusive
    score: float


@dataclass
class SpanInput:
    """Span-model view of one example: assembly plus rule-token bookkeeping."""
    assembly: InputAssembly
    sentence_texts: list[str]
    rule_positions: np.ndarray      # assembly position of each rule token
    token_sentence: np.ndarray      # sentence index of each rule token
    token_within: np.ndarray        # within-sentence index of each rule token
    token_offsets: list[tuple[int, int]]  # char offsets into the sentence text
    sentence_tokens: list[list[str]]      # non-punctuation tokens per sentence


def rule_sentence_texts(rule_text: str) -> list[str]:
    """Rule units for span extraction: sentences, with bullet lines replaced
    by their item text (marker stripped)."""
    sentences = split_sentences(rule_text)
    bullets = detect_bullets(rule_text)
    units = []
    for s_start, s_end in sentences:
        item = next((b for b in bullets if s_start <= b[0] and b[1] <= s_end), None)
        start, end = item if item is not None else (s_start, s_end)
        units.append(rule_text[start:end])
    return units


def prepare_span_input(rule_text: str, question: str, scenario: str,
                       history: Sequence[HistoryTurn], vocab: Vocabulary,
                       max_sequence_length: int) -> SpanInput:
    sentence_texts = rule_sentence_texts(rule_text)
    assembly = assemble(sentence_texts, question, scenario, history, vocab,
                        max_sequence_length)
    positions: list[int] = []
    sent_ids: list[int] = []
    within: list[int] = []
    offsets: list[tuple[int, int]] = []
    sentence_tokens: list[list[str]] = []
    for k, text in enumerate(sentence_texts):
        body_positions = np.where(assembly.unit_ids == k)[0]
        tokens, tok_offsets = tokenize_with_offsets(text)
        assert len(tokens) == len(body_positions), "assembly bodies must mirror tokenize()"
        kept: list[str] = []
        for t, tok in enumerate(tokens):
            if not any(ch.isalnum() for ch in tok):
                continue  # skip punctuation-only tokens
            positions.append(int(body_positions[t]))
            sent_ids.append(k)
            within.append(len(kept))
            offsets.append(tok_offsets[t])
            kept.append(tok)
        sentence_tokens.append(kept)
    return SpanInput(
        assembly=assembly,
        sentence_texts=sentence_texts,
        rule_positions=np.array(positions, dtype=np.intp),
        token_sentence=np.array(sent_ids, dtype=np.intp),
        token_within=np.array(within, dtype=np.intp),
        token_offsets=offsets,
        sentence_tokens=sentence_tokens,
    )


class SpanModel:
    """Own encoder plus start/end scoring vectors."""

    def __init__(self, config: ModelConfig, seed: int = 0):
        self.config = config
        rng = np.random.default_rng(seed)
        self.encoder = TokenEncoder(config, rng)
        bound = 1.0 / np.sqrt(config.d_model)
        self.start_vector = parameter(rng.uniform(-bound, bound, size=config.d_model))
        self.end_vector = parameter(rng.uniform(-bound, bound, size=config.d_model))

    def span_scores(self, span_input: SpanInput, training: bool = False,
                    rng: np.random.Generator | None = None) -> tuple[Tensor, Tensor]:
        """Start and end score per rule token (dot products with the learned
        start/end vectors)."""
        encoded = self.encoder(span_input.assembly, training=training, rng=rng)
        rule_vecs = take_rows(encoded.token_vectors, span_input.rule_positions)
        return rule_vecs @ self.start_vector, rule_vecs @ self.end_vector

    def named_params(self, prefix: str = "span") -> dict[str, Tensor]:
        pairs: NamedParams = self.encoder.named_params(f"{prefix}.encoder")
        pairs.append((f"{prefix}.start_vector", self.start_vector))
        pairs.append((f"{prefix}.end_vector", self.end_vector))
        return dict(pairs)

    def load_params(self, values: dict[str, np.ndarray], prefix: str = "span") -> None:
        own = self.named_params(prefix)
        missing = set(own) - set(values)
        if missing:
            raise ValueError(f"checkpoint missing parameters: {sorted(missing)[:3]}...")
        for name, tensor in own.items():
            arr = values[name]
            if arr.shape != tensor.data.shape:
                raise ValueError(f"shape mismatch for {name}: {arr.shape} vs {tensor.data.shape}")
            tensor.data = arr.astype(np.float64).copy()


def extract_span(start_scores: np.ndarray, end_scores: np.ndarray,
                 token_sentence: np.ndarray, token_within: np.ndarray,
                 max_span: int = 30) -> SpanPrediction:
    """argmax of start[i] + end[j] over same-sentence pairs with i <= j.

    Ties resolve to the smallest sentence, then start, then end; candidates
    are scanned in that order with strict improvement only.
    """
    if len(start_scores) == 0:
        raise ValueError("no rule tokens to extract from")
    best: SpanPrediction | None = None
    for k in np.unique(token_sentence):
        idx = np.where(token_sentence == k)[0]
        s = start_scores[idx]
        e = end_scores[idx]
        n = len(idx)
        for i in range(n):
            hi = min(n, i + max_span)
            for j in range(i, hi):
                score = s[i] + e[j]
                if best is None or score > best.score:
                    best = SpanPrediction(int(k), int(token_within[idx[i]]),
                                          int(token_within[idx[j]]), float(score))
    assert best is not None
    return best


def span_loss(start_scores: Tensor, end_scores: Tensor,
              gold_start_flat: int, gold_end_flat: int) -> Tensor:
    """Sum of start and end cross entropies under a global softmax over all
    rule tokens (the same-sentence constraint applies only at decode time)."""
    n = start_scores.shape[0]
    if not (0 <= gold_start_flat < n and 0 <= gold_end_flat < n):
        raise IndexError("gold span position outside the rule token range")
    return cross_entropy(start_scores, gold_start_flat) + \
        cross_entropy(end_scores, gold_end_flat)


def span_text(span_input: SpanInput, pred: SpanPrediction) -> str:
    """Original sentence substring covered by the predicted span."""
    sent = span_input.sentence_texts[pred.sentence_index]
    flat = np.where((span_input.token_sentence == pred.sentence_index)
                    & (span_input.token_within >= pred.token_start)
                    & (span_input.token_within <= pred.token_end))[0]
    start = span_input.token_offsets[flat[0]][0]
    end = span_input.token_offsets[flat[-1]][1]
    return sent[start:end]


# -- template rephrasing ------------------------------------------------------

@dataclass(frozen=True)
class QuestionTemplate:
    pattern_id: str
    trigger: str  # leading-token class this template fires on
    pattern: re.Pattern
    build: Callable[[re.Match, str], str]


_SUBORDINATOR_PREFIX = re.compile(
    r"^(?:if|unless|when|whenever|while|because|although|though|after|before|since)\b[,:]?\s*",
    re.IGNORECASE)

_PRONOUN_MAP = [
    (re.compile(r"\bthey're\b", re.IGNORECASE), "you're"),
    (re.compile(r"\bthemselves\b", re.IGNORECASE), "yourself"),
    (re.compile(r"\btheir\b", re.IGNORECASE), "your"),
    (re.compile(r"\bthey\b", re.IGNORECASE), "you"),
    (re.compile(r"\bthem\b", re.IGNORECASE), "you"),
]

_PAST_PARTICIPLES = (
    "been|worked|lived|applied|received|paid|completed|agreed|held|served|earned|"
    "got|gotten|taken|registered|filed|submitted|saved"
)

# simple-past verbs that front as "Did you <stem> ...?"
_PAST_VERB_STEMS = {
    "applied": "apply", "moved": "move", "registered": "register",
    "started": "start", "married": "marry", "served": "serve",
    "joined": "join", "worked": "work", "left": "leave", "lost": "lose",
}

TEMPLATES: list[QuestionTemplate] = [
    QuestionTemplate(
        "you-are", "copular 'you are'",
        re.compile(r"^you are\s+(.*)$", re.IGNORECASE),
        lambda m, _: f"Are you {m.group(1)}?"),
    QuestionTemplate(
        "you-were", "past copular 'you were'",
        re.compile(r"^you were\s+(.*)$", re.IGNORECASE),
        lambda m, _: f"Were you {m.group(1)}?"),
    QuestionTemplate(
        "you-re", "contracted copular",
        re.compile(r"^you're\s+(.*)$", re.IGNORECASE),
        lambda m, _: f"Are you {m.group(1)}?"),
    QuestionTemplate(
        "perfect-it", "perfect 'it has been'",
        re.compile(r"^(it|he|she)(?:'s| has)\s+been\s+(.*)$", re.IGNORECASE),
        lambda m, _: f"Has {m.group(1).lower()} been {m.group(2)}?"),
    QuestionTemplate(
        "you-have-participle", "perfect 'you have <participle>'",
        re.compile(rf"^you(?:'ve| have)\s+({_PAST_PARTICIPLES})\b\s*(.*)$", re.IGNORECASE),
        lambda m, _: f"Have you {m.group(1)} {m.group(2)}?"),
    QuestionTemplate(
        "you-have-np", "possession 'you have <thing>'",
        re.compile(r"^you have\s+(.*)$", re.IGNORECASE),
        lambda m, _: f"Do you have {m.group(1)}?"),
    QuestionTemplate(
        "it-is", "copular 'it is'",
        re.compile(r"^it(?:'s| is)\s+(.*)$", re.IGNORECASE),
        lambda m, _: f"Is it {m.group(1)}?"),
    QuestionTemplate(
        "aux-front", "span already starts with an auxiliary",
        re.compile(r"^(are|were|do|does|did|can|have|has|is|was)\s+(.*)$", re.IGNORECASE),
        lambda m, _: _front_auxiliary(m.group(1), m.group(2))),
    QuestionTemplate(
        "participle", "bare past participle",
        re.compile(r"^(born|married|enrolled|employed|insured)\b\s*(.*)$", re.IGNORECASE),
        lambda m, _: f"Were you {m.group(1)} {m.group(2)}?"),
    QuestionTemplate(
        "you-did", "second-person simple past",
        re.compile(rf"^you\s+({'|'.join(_PAST_VERB_STEMS)})\b\s*(.*)$", re.IGNORECASE),
        lambda m, _: f"Did you {_PAST_VERB_STEMS[m.group(1).lower()]} {m.group(2)}?"),
    QuestionTemplate(
        "you-verb", "second-person verb phrase",
        re.compile(r"^you\s+(?!will\b|must\b|may\b|shall\b)(.*)$", re.IGNORECASE),
        lambda m, _: f"Do you {m.group(1)}?"),
    QuestionTemplate(
        "noun-phrase", "determiner/number-led noun phrase",
        re.compile(r"^(?!.*\b(?:must|should|will|would|shall|may|might|cannot)\b)"
                   r"(?:a|an|the|your|his|her|its|at least|over|under|more|less|fewer|one|two|three|\d).*$",
                   re.IGNORECASE),
        lambda m, s: f"Are you {s}?"),
]


def _front_auxiliary(aux: str, rest: str) -> str:
    aux_l = aux.lower()
    first = rest.split(None, 1)[0].lower() if rest.strip() else ""
    subjects = {"you", "it", "they", "he", "she", "we", "i", "the", "this", "that"}
    if first in subjects:
        return f"{aux.capitalize()} {rest}?"
    filler = "it" if aux_l in ("is", "was", "has") else "you"
    return f"{aux.capitalize()} {filler} {rest}?"


def _clean(text: str) -> str:
    out = text.strip()
    out = _SUBORDINATOR_PREFIX.sub("", out, count=1)
    for pat, repl in _PRONOUN_MAP:
        out = pat.sub(repl, out)
    return out.strip().strip(",;:").strip()


def rephrase(span: str) -> str:
    """Deterministic template rephrasing of an extracted span into a
    follow-up question. Total: unclassifiable spans fall back to a generic
    confirmation question. Output always ends with '?'."""
    cleaned = _clean(span)
    if cleaned:
        for template in TEMPLATES:
            m = template.pattern.match(cleaned)
            if m:
                q = template.build(m, cleaned)
                return _polish(q)
    base = cleaned if cleaned else span.strip()
    return _polish(f"Is the following true: {base}?")


def _polish(q: str) -> str:
    q = re.sub(r"\s+", " ", q).strip()
    q = q.rstrip("?.,;: ").rstrip() + "?"
    return q[0].upper() + q[1:] if q else "?"
