"""Evaluation metrics: micro/macro decision accuracy, corpus BLEU, subset
filters, and the combined metrics report."""
from __future__ import annotations

import json
import math
import warnings
from collections import Counter
from dataclasses import asdict, dataclass, field
from typing import Sequence

from .data import CMRExample, DecisionLabel
from .encoding import tokenize


def evaluate_decisions(predictions: Sequence[DecisionLabel],
                       golds: Sequence[DecisionLabel]) -> dict:
    """Micro accuracy, per-gold-class accuracy, and macro accuracy averaged
    over the classes present in the gold set."""
    if len(predictions) != len(golds):
        raise ValueError("predictions and golds must have equal length")
    if not golds:
        raise ValueError("cannot evaluate an empty example set")
    correct = sum(1 for p, g in zip(predictions, golds) if p == g)
    per_class: dict[str, float] = {}
    for label in DecisionLabel:
        pairs = [(p, g) for p, g in zip(predictions, golds) if g == label]
        if pairs:
            per_class[label.to_str()] = sum(1 for p, g in pairs if p == g) / len(pairs)
    macro = sum(per_class.values()) / len(per_class)
    return {
        "micro": correct / len(golds),
        "macro": macro,
        "class_accuracy": per_class,
        "n": len(golds),
    }


def _ngrams(tokens: list[str], n: int) -> Counter:
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def bleu(hypotheses: Sequence[str], references: Sequence[str], max_n: int = 4) -> float:
    """Corpus-level BLEU in [0, 1]: modified n-gram precision with brevity
    penalty, no smoothing (any zero n-gram precision gives 0). An empty pair
    list is defined as 0 with a warning."""
    if len(hypotheses) != len(references):
        raise ValueError("hypotheses and references must pair up")
    if not hypotheses:
        warnings.warn("BLEU over an empty pair list is defined as 0", stacklevel=2)
        return 0.0
    matches = [0] * max_n
    totals = [0] * max_n
    hyp_len = 0
    ref_len = 0
    for hyp, ref in zip(hypotheses, references):
        h = tokenize(hyp)
        r = tokenize(ref)
        hyp_len += len(h)
        ref_len += len(r)
        for n in range(1, max_n + 1):
            hgrams = _ngrams(h, n)
            rgrams = _ngrams(r, n)
            totals[n - 1] += max(0, len(h) - n + 1)
            matches[n - 1] += sum(min(c, rgrams[g]) for g, c in hgrams.items())
    if hyp_len == 0:
        return 0.0
    precisions = []
    for m, t in zip(matches, totals):
        if t == 0 or m == 0:
            return 0.0
        precisions.append(m / t)
    log_avg = sum(math.log(p) for p in precisions) / max_n
    brevity = 1.0 if hyp_len > ref_len else math.exp(1.0 - ref_len / hyp_len)
    return brevity * math.exp(log_avg)


SUBSET_KINDS = ("answerable", "dialog_history_only", "scenario_only", "evidence_substituted")


def subset_filter(examples: Sequence[CMRExample], kind: str) -> list[CMRExample]:
    """Evaluation subsets: answerable drops Irrelevant golds;
    dialog_history_only keeps empty-scenario examples; scenario_only keeps
    empty-history examples; evidence_substituted swaps the scenario for its
    evidence turns (appended to the history)."""
    if kind == "answerable":
        return [e for e in examples if e.decision != DecisionLabel.IRRELEVANT]
    if kind == "dialog_history_only":
        return [e for e in examples if not e.scenario.strip()]
    if kind == "scenario_only":
        return [e for e in examples if not e.history]
    if kind == "evidence_substituted":
        out = []
        for i, e in enumerate(examples):
            if not e.scenario.strip():
                out.append(e)
                continue
            if e.evidence is None:
                raise ValueError(f"example {i} has a scenario but no evidence turns")
            out.append(CMRExample(
                rule_text=e.rule_text, question=e.question, scenario="",
                history=list(e.history) + list(e.evidence),
                decision=e.decision, follow_up=e.follow_up,
                evidence=e.evidence, ids=e.ids, meta=e.meta,
            ))
        return out
    raise ValueError(f"unknown subset kind {kind!r}; expected one of {SUBSET_KINDS}")


@dataclass
class MetricsReport:
    micro: float
    macro: float
    class_accuracy: dict[str, float]
    n_examples: int
    bleu1: float | None = None
    bleu4: float | None = None
    bleu_mode: str | None = None  # "oracle" | "end_to_end"
    n_bleu_pairs: int = 0
    by_logical_type: dict[str, dict] = field(default_factory=dict)
    by_subset: dict[str, dict] = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)

    def to_table(self) -> str:
        rows: list[tuple[str, str]] = [
            ("examples", str(self.n_examples)),
            ("micro accuracy", f"{self.micro:.4f}"),
            ("macro accuracy", f"{self.macro:.4f}"),
        ]
        for cls in ("Yes", "No", "Inquire", "Irrelevant"):
            if cls in self.class_accuracy:
                rows.append((f"accuracy[{cls}]", f"{self.class_accuracy[cls]:.4f}"))
        if self.bleu1 is not None:
            rows.append((f"BLEU1 ({self.bleu_mode}, {self.n_bleu_pairs} pairs)",
                         f"{self.bleu1:.4f}"))
            rows.append((f"BLEU4 ({self.bleu_mode}, {self.n_bleu_pairs} pairs)",
                         f"{self.bleu4:.4f}"))
        for name, stats in self.by_logical_type.items():
            rows.append((f"micro[{name}]", f"{stats['micro']:.4f} (n={stats['n']})"))
        for name, stats in self.by_subset.items():
            rows.append((f"micro[{name}]", f"{stats['micro']:.4f} (n={stats['n']})"))
        width = max(len(name) for name, _ in rows)
        return "\n".join(f"{name.ljust(width)}  {value}" for name, value in rows)
