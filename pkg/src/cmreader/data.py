"""Example data model and ShARC-format JSON ingestion."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import IntEnum
from pathlib import Path

from .encoding import HistoryTurn


class DecisionLabel(IntEnum):
    YES = 0
    NO = 1
    INQUIRE = 2
    IRRELEVANT = 3

    def to_str(self) -> str:
        return _DECISION_NAMES[self]

    @classmethod
    def from_str(cls, name: str) -> "DecisionLabel":
        try:
            return _DECISION_BY_NAME[name.strip().lower()]
        except KeyError:
            raise ValueError(f"unknown decision {name!r}") from None


_DECISION_NAMES = {
    DecisionLabel.YES: "Yes",
    DecisionLabel.NO: "No",
    DecisionLabel.INQUIRE: "Inquire",
    DecisionLabel.IRRELEVANT: "Irrelevant",
}
_DECISION_BY_NAME = {v.lower(): k for k, v in _DECISION_NAMES.items()}


@dataclass
class CMRExample:
    rule_text: str
    question: str
    scenario: str
    history: list[HistoryTurn]
    decision: DecisionLabel
    follow_up: str | None = None  # gold follow-up question iff decision is Inquire
    evidence: list[HistoryTurn] | None = None
    ids: dict = field(default_factory=dict)
    meta: dict | None = None

    def __post_init__(self):
        if (self.decision == DecisionLabel.INQUIRE) != (self.follow_up is not None):
            raise ValueError("follow_up must be present exactly when the decision is Inquire")


def _parse_turns(raw, where: str) -> list[HistoryTurn]:
    turns = []
    for t in raw or []:
        q = t.get("follow_up_question")
        a = t.get("follow_up_answer")
        if q is None or a is None:
            raise ValueError(f"{where} turn missing follow_up_question/follow_up_answer")
        turns.append(HistoryTurn(q, a))
    return turns


def record_to_example(record: dict) -> CMRExample:
    rule_text = record.get("snippet", record.get("rule_text"))
    if rule_text is None:
        raise ValueError("record has neither 'snippet' nor 'rule_text'")
    answer = record.get("answer", "")
    lowered = str(answer).strip().lower()
    if lowered in ("yes", "no", "irrelevant"):
        decision = DecisionLabel.from_str(lowered)
        follow_up = None
    else:
        decision = DecisionLabel.INQUIRE
        follow_up = str(answer)
    evidence_raw = record.get("evidence")
    ids = {k: record[k] for k in ("utterance_id", "tree_id", "source_url") if k in record}
    return CMRExample(
        rule_text=rule_text,
        question=record.get("question", ""),
        scenario=record.get("scenario", "") or "",
        history=_parse_turns(record.get("history"), "history"),
        decision=decision,
        follow_up=follow_up,
        evidence=_parse_turns(evidence_raw, "evidence") if evidence_raw else None,
        ids=ids,
        meta=record.get("meta"),
    )


def example_to_record(ex: CMRExample) -> dict:
    record = {
        "snippet": ex.rule_text,
        "question": ex.question,
        "scenario": ex.scenario,
        "history": [
            {"follow_up_question": t.follow_up_question, "follow_up_answer": t.answer}
            for t in ex.history
        ],
        "answer": ex.follow_up if ex.decision == DecisionLabel.INQUIRE else ex.decision.to_str(),
    }
    if ex.evidence is not None:
        record["evidence"] = [
            {"follow_up_question": t.follow_up_question, "follow_up_answer": t.answer}
            for t in ex.evidence
        ]
    record.update(ex.ids)
    if ex.meta is not None:
        record["meta"] = ex.meta
    return record


def load_sharc(path: str | Path) -> list[CMRExample]:
    """Load a ShARC-style JSON array with tolerant field mapping."""
    try:
        raw = json.loads(Path(path).read_text())
    except json.JSONDecodeError as e:
        raise ValueError(f"malformed JSON in {path}: {e}") from e
    if not isinstance(raw, list):
        raise ValueError(f"{path}: expected a JSON array of records")
    examples = []
    for i, record in enumerate(raw):
        try:
            examples.append(record_to_example(record))
        except (ValueError, TypeError, AttributeError) as e:
            raise ValueError(f"{path}: record {i}: {e}") from e
    return examples


def save_corpus(examples: list[CMRExample], path: str | Path) -> None:
    records = [example_to_record(ex) for ex in examples]
    Path(path).write_text(json.dumps(records, indent=1))
