import json

import pytest

from cmreader.data import (
    CMRExample,
    DecisionLabel,
    example_to_record,
    load_sharc,
    record_to_example,
    save_corpus,
)
from cmreader.encoding import HistoryTurn


def test_load_empty_array(tmp_path):
    path = tmp_path / "empty.json"
    path.write_text("[]")
    assert load_sharc(path) == []


def test_load_single_handcrafted_record(tmp_path):
    record = {
        "utterance_id": "u-1",
        "tree_id": "t-1",
        "source_url": "https://example.gov/rule",
        "snippet": "You can apply if you are over 18 years old.",
        "question": "Can I apply?",
        "scenario": "I am 25 years old.",
        "history": [
            {"follow_up_question": "Are you over 18 years old?", "follow_up_answer": "Yes"}
        ],
        "evidence": [
            {"follow_up_question": "Are you over 18 years old?", "follow_up_answer": "Yes"}
        ],
        "answer": "Yes",
    }
    path = tmp_path / "one.json"
    path.write_text(json.dumps([record]))
    (ex,) = load_sharc(path)
    assert ex.rule_text == record["snippet"]
    assert ex.question == "Can I apply?"
    assert ex.scenario == "I am 25 years old."
    assert ex.history == [HistoryTurn("Are you over 18 years old?", "yes")]
    assert ex.evidence == [HistoryTurn("Are you over 18 years old?", "yes")]
    assert ex.decision == DecisionLabel.YES and ex.follow_up is None
    assert ex.ids == {"utterance_id": "u-1", "tree_id": "t-1",
                      "source_url": "https://example.gov/rule"}


def test_load_irrelevant_answer_maps_to_decision(tmp_path):
    path = tmp_path / "irr.json"
    path.write_text(json.dumps([{"snippet": "rule text", "answer": "Irrelevant"}]))
    (ex,) = load_sharc(path)
    assert ex.decision == DecisionLabel.IRRELEVANT


def test_load_other_answer_becomes_inquire_with_follow_up(tmp_path):
    path = tmp_path / "inq.json"
    path.write_text(json.dumps([{"snippet": "rule", "answer": "Are you over 18 years old?"}]))
    (ex,) = load_sharc(path)
    assert ex.decision == DecisionLabel.INQUIRE
    assert ex.follow_up == "Are you over 18 years old?"


def test_load_reports_record_index_on_malformed_record(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps([{"snippet": "ok", "answer": "Yes"}, {"answer": "Yes"}]))
    with pytest.raises(ValueError, match="record 1"):
        load_sharc(path)


def test_load_rejects_malformed_json(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{not json")
    with pytest.raises(ValueError, match="malformed JSON"):
        load_sharc(path)


def test_roundtrip_through_records(tmp_path):
    ex = CMRExample(
        rule_text="You can apply if you rent your home.",
        question="Can I apply?",
        scenario="",
        history=[HistoryTurn("Do you rent your home?", "no")],
        decision=DecisionLabel.INQUIRE,
        follow_up="Do you rent your home?",
        evidence=None,
        ids={"utterance_id": "x"},
        meta={"logical_type": "simple"},
    )
    path = tmp_path / "corpus.json"
    save_corpus([ex], path)
    (back,) = load_sharc(path)
    assert example_to_record(back) == example_to_record(ex)


def test_example_invariant_follow_up_iff_inquire():
    with pytest.raises(ValueError):
        CMRExample("r", "q", "", [], DecisionLabel.YES, follow_up="Why?")
    with pytest.raises(ValueError):
        CMRExample("r", "q", "", [], DecisionLabel.INQUIRE, follow_up=None)


def test_record_answer_case_insensitive():
    ex = record_to_example({"snippet": "r", "answer": "YES"})
    assert ex.decision == DecisionLabel.YES
