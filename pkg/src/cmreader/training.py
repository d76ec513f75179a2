"""Training loops for the decision and span models, example preparation with
weak labels, the checkpoint bundle, and evaluation over corpora.

The decision loss over a batch is the mean decision cross entropy plus
lambda times the entailment cross entropy normalized by the total number of
conditions in the batch. Gradients accumulate example by example, so the
logged loss decomposition is exact.
"""
from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .config import ModelConfig, TrainingConfig
from .data import CMRExample, DecisionLabel
from .encoding import InputAssembly, Vocabulary, assemble
from .metrics import MetricsReport, bleu, evaluate_decisions
from .model import DecisionModel, decision_loss, entailment_loss_sum
from .nn import Adam, backward
from .nn.checkpoint import load_checkpoint, save_checkpoint
from .segmenter import parse_rule, sentence_conditions
from .spanqg import (
    SpanInput,
    SpanModel,
    extract_span,
    prepare_span_input,
    rephrase,
    span_loss,
    span_text,
)
from .weak_supervision import EntailmentLabel, derive_span_label, label_conditions


class TrainingDivergedError(RuntimeError):
    pass


# -- preparation ----------------------------------------------------------------

def conditions_for(rule_text: str, segmentation: str) -> list[str]:
    parser = parse_rule if segmentation == "edu" else sentence_conditions
    _, conds = parser(rule_text)
    return [c.text for c in conds]


@dataclass
class PreparedDecisionExample:
    example: CMRExample
    conditions: list[str]
    assembly: InputAssembly
    entail_labels: list[EntailmentLabel]
    decision: DecisionLabel


@dataclass
class PreparedSpanExample:
    example: CMRExample
    span_input: SpanInput
    gold_start: int  # flat rule-token index
    gold_end: int


def prepare_decision_examples(examples: Sequence[CMRExample], vocab: Vocabulary,
                              config: ModelConfig, segmentation: str,
                              pool_follow_ups: bool = False
                              ) -> list[PreparedDecisionExample]:
    condition_cache: dict[str, list[str]] = {}
    for ex in examples:
        if ex.rule_text not in condition_cache:
            condition_cache[ex.rule_text] = conditions_for(ex.rule_text, segmentation)
    # Pooled mode matches each distinct follow-up against its rule once, over
    # all turns observed in the corpus; per-example mode matches per turn.
    # Matching is a pure function of the question string, so labels agree.
    table = _pooled_match_table(examples, condition_cache) if pool_follow_ups else None
    prepared = []
    for ex in examples:
        conds = condition_cache[ex.rule_text]
        if table is None:
            labels = label_conditions(conds, ex.history)
        else:
            labels = [EntailmentLabel.NEUTRAL] * len(conds)
            for turn in ex.history:
                idx = table[(ex.rule_text, turn.follow_up_question)]
                labels[idx] = (EntailmentLabel.ENTAILMENT if turn.answer == "yes"
                               else EntailmentLabel.CONTRADICTION)
        assembly = assemble(conds, ex.question, ex.scenario, ex.history, vocab,
                            config.max_sequence_length)
        prepared.append(PreparedDecisionExample(ex, conds, assembly, labels, ex.decision))
    return prepared


def _pooled_match_table(examples: Sequence[CMRExample],
                        condition_cache: dict[str, list[str]]) -> dict[tuple[str, str], int]:
    from .weak_supervision import match_turn_to_condition
    table: dict[tuple[str, str], int] = {}
    for ex in examples:
        conds = condition_cache[ex.rule_text]
        turns = list(ex.history)
        if ex.follow_up:
            turns = turns + [HistoryTurnLike(ex.follow_up)]
        for turn in turns:
            key = (ex.rule_text, turn.follow_up_question)
            if key not in table:
                table[key] = match_turn_to_condition(turn, conds)
    return table


class HistoryTurnLike:
    """Question-only stand-in so gold follow-ups can join the match table."""

    def __init__(self, question: str):
        self.follow_up_question = question
        self.answer = "yes"


def prepare_span_examples(examples: Sequence[CMRExample], vocab: Vocabulary,
                          config: ModelConfig) -> list[PreparedSpanExample]:
    """Span supervision exists only for examples with a gold follow-up."""
    prepared = []
    label_cache: dict[tuple[str, str], tuple[int, int, int]] = {}
    for ex in examples:
        if ex.decision != DecisionLabel.INQUIRE or not ex.follow_up:
            continue
        si = prepare_span_input(ex.rule_text, ex.question, ex.scenario, ex.history,
                                vocab, config.max_sequence_length)
        key = (ex.rule_text, ex.follow_up)
        if key not in label_cache:
            label = derive_span_label(si.sentence_tokens, ex.follow_up)
            label_cache[key] = (label.sentence_index, label.token_start, label.token_end)
        k, start, end = label_cache[key]
        flat = np.where((si.token_sentence == k) & (si.token_within >= start)
                        & (si.token_within <= end))[0]
        prepared.append(PreparedSpanExample(ex, si, int(flat[0]), int(flat[-1])))
    return prepared


def build_vocab(examples: Sequence[CMRExample], min_freq: int = 1) -> Vocabulary:
    corpus: list[str] = ["yes no"]
    for ex in examples:
        corpus.append(ex.rule_text)
        corpus.append(ex.question)
        corpus.append(ex.scenario)
        for t in ex.history:
            corpus.append(t.follow_up_question)
        if ex.follow_up:
            corpus.append(ex.follow_up)
    return Vocabulary.build(corpus, min_freq=min_freq)


# -- decision training -------------------------------------------------------------

def decision_train_step(model: DecisionModel, batch: Sequence[PreparedDecisionExample],
                        optimizer: Adam, lam: float,
                        drop_rng: np.random.Generator | None,
                        lr: float | None = None) -> dict:
    """One forward/backward/update over a batch; returns the logged losses."""
    optimizer.zero_grad()
    b = len(batch)
    k_total = sum(len(p.entail_labels) for p in batch)
    dec_sum = 0.0
    ent_sum = 0.0
    for p in batch:
        out = model.forward(p.assembly, training=True, rng=drop_rng)
        dec = decision_loss(out.decision_logits, p.decision)
        ent = entailment_loss_sum(out.entailment_scores, p.entail_labels)
        combined = dec * (1.0 / b) + ent * (lam / k_total)
        backward(combined)
        dec_sum += dec.item()
        ent_sum += ent.item()
    loss_dec = dec_sum / b
    loss_entail = ent_sum / k_total
    loss = loss_dec + lam * loss_entail
    if not math.isfinite(loss):
        raise TrainingDivergedError(
            f"non-finite loss at step {optimizer.state.step_count + 1}: "
            f"L_dec={loss_dec!r} L_entail={loss_entail!r}")
    used_lr = optimizer.step(lr=lr)
    return {"lr": used_lr, "L_dec": loss_dec, "L_entail": loss_entail, "L": loss}


def train_decision_model(train_examples: Sequence[CMRExample],
                         model_config: ModelConfig, training: TrainingConfig,
                         vocab: Vocabulary) -> tuple[DecisionModel, list[str]]:
    model_config.vocab_size = len(vocab)
    model = DecisionModel(model_config, seed=training.seed)
    prepared = prepare_decision_examples(train_examples, vocab, model_config,
                                         training.segmentation, training.pool_follow_ups)
    steps_per_epoch = math.ceil(len(prepared) / training.batch_size) if prepared else 0
    total_steps = max(1, training.epochs * steps_per_epoch)
    optimizer = Adam(model.named_params(), peak_lr=training.learning_rate,
                     total_steps=total_steps, warmup_fraction=training.warmup_fraction)
    drop_rng = np.random.default_rng(training.seed + 1)
    order_rng = random.Random(training.seed + 2)
    log_lines: list[str] = []
    step = 0
    for _epoch in range(training.epochs):
        indices = list(range(len(prepared)))
        order_rng.shuffle(indices)
        for start in range(0, len(indices), training.batch_size):
            batch = [prepared[i] for i in indices[start:start + training.batch_size]]
            stats = decision_train_step(model, batch, optimizer,
                                        model_config.lambda_entail, drop_rng)
            step += 1
            log_lines.append(json.dumps({"step": step, **stats}, sort_keys=True))
    return model, log_lines


# -- span training ---------------------------------------------------------------

def span_train_step(model: SpanModel, batch: Sequence[PreparedSpanExample],
                    optimizer: Adam, drop_rng: np.random.Generator | None,
                    lr: float | None = None) -> dict:
    optimizer.zero_grad()
    b = len(batch)
    total = 0.0
    for p in batch:
        start_scores, end_scores = model.span_scores(p.span_input, training=True,
                                                     rng=drop_rng)
        loss = span_loss(start_scores, end_scores, p.gold_start, p.gold_end)
        backward(loss * (1.0 / b))
        total += loss.item()
    mean_loss = total / b
    if not math.isfinite(mean_loss):
        raise TrainingDivergedError(
            f"non-finite span loss at step {optimizer.state.step_count + 1}")
    used_lr = optimizer.step(lr=lr)
    return {"lr": used_lr, "L_span": mean_loss}


def train_span_model(train_examples: Sequence[CMRExample], model_config: ModelConfig,
                     training: TrainingConfig, vocab: Vocabulary
                     ) -> tuple[SpanModel, list[str]]:
    model_config.vocab_size = len(vocab)
    model = SpanModel(model_config, seed=training.seed + 100)
    prepared = prepare_span_examples(train_examples, vocab, model_config)
    steps_per_epoch = math.ceil(len(prepared) / training.batch_size) if prepared else 0
    total_steps = max(1, training.epochs * steps_per_epoch)
    optimizer = Adam(model.named_params(), peak_lr=training.learning_rate,
                     total_steps=total_steps, warmup_fraction=training.warmup_fraction)
    drop_rng = np.random.default_rng(training.seed + 101)
    order_rng = random.Random(training.seed + 102)
    log_lines: list[str] = []
    step = 0
    for _epoch in range(training.epochs):
        indices = list(range(len(prepared)))
        order_rng.shuffle(indices)
        for start in range(0, len(indices), training.batch_size):
            batch = [prepared[i] for i in indices[start:start + training.batch_size]]
            stats = span_train_step(model, batch, optimizer, drop_rng)
            step += 1
            log_lines.append(json.dumps({"step": step, **stats}, sort_keys=True))
    return model, log_lines


# -- bundle ------------------------------------------------------------------------

@dataclass
class ModelBundle:
    config: ModelConfig
    vocab: Vocabulary
    decision: DecisionModel | None
    span: SpanModel | None
    segmentation: str = "edu"

    def save(self, path: str | Path, extra_meta: dict | None = None) -> None:
        params = {}
        if self.decision is not None:
            params.update(self.decision.named_params("decision"))
        if self.span is not None:
            params.update(self.span.named_params("span"))
        meta = {"segmentation": self.segmentation}
        meta.update(extra_meta or {})
        save_checkpoint(path, self.config, self.vocab.tokens, params, meta)

    @classmethod
    def load(cls, path: str | Path) -> "ModelBundle":
        config, tokens, params, meta = load_checkpoint(path)
        vocab = Vocabulary.from_tokens(tokens)
        decision = None
        span = None
        if any(name.startswith("decision.") for name in params):
            decision = DecisionModel(config, seed=0)
            decision.load_params(params, "decision")
        if any(name.startswith("span.") for name in params):
            span = SpanModel(config, seed=0)
            span.load_params(params, "span")
        return cls(config=config, vocab=vocab, decision=decision, span=span,
                   segmentation=meta.get("segmentation", "edu"))


# -- evaluation ----------------------------------------------------------------------

def predict_decisions(model: DecisionModel,
                      prepared: Sequence[PreparedDecisionExample]) -> list[DecisionLabel]:
    return [model.predict(p.assembly).decision for p in prepared]


def generate_follow_up(span: SpanModel, example: CMRExample, vocab: Vocabulary,
                       config: ModelConfig) -> str:
    si = prepare_span_input(example.rule_text, example.question, example.scenario,
                            example.history, vocab, config.max_sequence_length)
    start_scores, end_scores = span.span_scores(si)
    pred = extract_span(start_scores.data, end_scores.data,
                        si.token_sentence, si.token_within)
    return rephrase(span_text(si, pred))


def evaluate_model(bundle: ModelBundle, examples: Sequence[CMRExample],
                   qg_mode: str = "oracle") -> MetricsReport:
    """Decision metrics plus BLEU for follow-up questions.

    qg_mode "oracle" scores BLEU wherever the gold decision is Inquire;
    "end_to_end" scores it only where gold and predicted decisions are both
    Inquire.
    """
    if bundle.decision is None:
        raise ValueError("checkpoint has no decision model")
    if qg_mode not in ("oracle", "end_to_end"):
        raise ValueError("qg_mode must be 'oracle' or 'end_to_end'")
    prepared = prepare_decision_examples(examples, bundle.vocab, bundle.config,
                                         bundle.segmentation)
    predictions = predict_decisions(bundle.decision, prepared)
    golds = [p.decision for p in prepared]
    stats = evaluate_decisions(predictions, golds)

    by_type: dict[str, dict] = {}
    groups: dict[str, list[int]] = {}
    for i, ex in enumerate(examples):
        if ex.meta and "logical_type" in ex.meta:
            groups.setdefault(ex.meta["logical_type"], []).append(i)
    for name, idx in sorted(groups.items()):
        sub = evaluate_decisions([predictions[i] for i in idx], [golds[i] for i in idx])
        by_type[name] = {"micro": sub["micro"], "macro": sub["macro"], "n": sub["n"]}

    bleu1 = bleu4 = None
    n_pairs = 0
    if bundle.span is not None:
        hyps, refs = [], []
        for i, ex in enumerate(examples):
            if ex.decision != DecisionLabel.INQUIRE or not ex.follow_up:
                continue
            if qg_mode == "end_to_end" and predictions[i] != DecisionLabel.INQUIRE:
                continue
            hyps.append(generate_follow_up(bundle.span, ex, bundle.vocab, bundle.config))
            refs.append(ex.follow_up)
        n_pairs = len(hyps)
        if n_pairs:
            bleu1 = bleu(hyps, refs, max_n=1)
            bleu4 = bleu(hyps, refs, max_n=4)
        else:
            bleu1 = bleu4 = 0.0

    return MetricsReport(
        micro=stats["micro"], macro=stats["macro"],
        class_accuracy=stats["class_accuracy"], n_examples=stats["n"],
        bleu1=bleu1, bleu4=bleu4,
        bleu_mode=qg_mode if bundle.span is not None else None,
        n_bleu_pairs=n_pairs, by_logical_type=by_type,
    )
