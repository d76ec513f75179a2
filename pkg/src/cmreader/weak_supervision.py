"""Noisy training signals via minimum edit distance.

Follow-up questions are matched to conditions to derive per-condition
entailment labels; span labels for question generation come from the
rule-text span closest to the to-be-asked question. Matching happens at the
token level after lowercasing and punctuation removal.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum
from typing import Sequence

from .encoding import HistoryTurn, tokenize

MAX_SPAN_TOKENS = 30


class EntailmentLabel(IntEnum):
    ENTAILMENT = 0
    CONTRADICTION = 1
    NEUTRAL = 2


@dataclass(frozen=True)
class SpanLabel:
    sentence_index: int
    token_start: int  # inclusive
    token_end: int    # inclusive

    def __post_init__(self):
        if self.token_start > self.token_end:
            raise ValueError("token_start must be <= token_end")


def normalize_tokens(text: str) -> list[str]:
    """Lowercased word tokens with punctuation-only tokens removed."""
    return [t for t in tokenize(text) if any(ch.isalnum() for ch in t)]


def token_edit_distance(a: Sequence[str], b: Sequence[str]) -> int:
    """Levenshtein distance over tokens with unit insert/delete/substitute."""
    n, m = len(a), len(b)
    if n == 0:
        return m
    if m == 0:
        return n
    row = list(range(m + 1))
    for i in range(1, n + 1):
        prev_diag = row[0]
        row[0] = i
        for j in range(1, m + 1):
            cur = row[j]
            cost = 0 if a[i - 1] == b[j - 1] else 1
            row[j] = min(cur + 1, row[j - 1] + 1, prev_diag + cost)
            prev_diag = cur
    return row[m]


def match_turn_to_condition(turn: HistoryTurn, conditions: Sequence[str]) -> int:
    """Index of the condition closest to the turn's question; ties go to the
    smallest index."""
    if not conditions:
        raise ValueError("cannot match against an empty condition list")
    q = normalize_tokens(turn.follow_up_question)
    best_idx, best_dist = 0, None
    for i, cond in enumerate(conditions):
        d = token_edit_distance(q, normalize_tokens(cond))
        if best_dist is None or d < best_dist:
            best_idx, best_dist = i, d
    return best_idx


def label_conditions(conditions: Sequence[str],
                     history: Sequence[HistoryTurn]) -> list[EntailmentLabel]:
    """Entailment for yes-answered matches, Contradiction for no-answered,
    Neutral for conditions no turn matched. Later turns override earlier ones
    on the same condition."""
    labels = [EntailmentLabel.NEUTRAL] * len(conditions)
    if not conditions:
        return labels
    for turn in history:
        idx = match_turn_to_condition(turn, conditions)
        labels[idx] = (EntailmentLabel.ENTAILMENT if turn.answer == "yes"
                       else EntailmentLabel.CONTRADICTION)
    return labels


def derive_span_label(sentences: Sequence[Sequence[str]], target_question: str,
                      max_span: int = MAX_SPAN_TOKENS) -> SpanLabel:
    """Single-sentence token span minimizing edit distance to the question.

    Ties resolve to the earliest sentence, then earliest start, then shortest
    span. Candidates are scanned in exactly that order, so keeping the first
    strict minimum implements the tie rule.
    """
    if not sentences or all(len(s) == 0 for s in sentences):
        raise ValueError("cannot derive a span label from an empty rule")
    q = normalize_tokens(target_question)
    m = len(q)
    best: tuple[int, SpanLabel] | None = None
    for k, sent in enumerate(sentences):
        sent = [t.lower() for t in sent]
        n = len(sent)
        for i in range(n):
            # incremental DP: extending the span by one token adds one row
            row = list(range(m + 1))
            for j in range(i, min(n, i + max_span)):
                prev_diag = row[0]
                row[0] = j - i + 1
                tok = sent[j]
                for col in range(1, m + 1):
                    cur = row[col]
                    cost = 0 if tok == q[col - 1] else 1
                    row[col] = min(cur + 1, row[col - 1] + 1, prev_diag + cost)
                    prev_diag = cur
                dist = row[m]
                if best is None or dist < best[0]:
                    best = (dist, SpanLabel(k, i, j))
                    if dist == 0:
                        return best[1]
    assert best is not None
    return best[1]
