import math
from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cmreader.data import CMRExample, DecisionLabel
from cmreader.encoding import HistoryTurn
from cmreader.metrics import MetricsReport, bleu, evaluate_decisions, subset_filter

Y, N, I, R = (DecisionLabel.YES, DecisionLabel.NO, DecisionLabel.INQUIRE,
              DecisionLabel.IRRELEVANT)


def make_example(decision=Y, scenario="", history=(), evidence=None, follow_up=None):
    if decision == I and follow_up is None:
        follow_up = "Are you over 18 years old?"
    return CMRExample(
        rule_text="You can apply if you are over 18 years old.",
        question="Can I apply?",
        scenario=scenario,
        history=list(history),
        decision=decision,
        follow_up=follow_up,
        evidence=evidence,
    )


# -- evaluate_decisions --------------------------------------------------------

def test_all_correct_gives_perfect_scores():
    golds = [Y, N, I, R]
    stats = evaluate_decisions(golds, golds)
    assert stats["micro"] == 1.0 and stats["macro"] == 1.0


def test_two_class_partial_case():
    stats = evaluate_decisions([Y, Y], [Y, N])
    assert stats["micro"] == 0.5
    assert stats["class_accuracy"] == {"Yes": 1.0, "No": 0.0}
    assert stats["macro"] == 0.5  # averaged over present classes only


def test_evaluate_rejects_empty():
    with pytest.raises(ValueError):
        evaluate_decisions([], [])


def test_random_fixture_matches_confusion_matrix_oracle():
    import random
    rng = random.Random(0)
    golds = [rng.choice(list(DecisionLabel)) for _ in range(100)]
    preds = [rng.choice(list(DecisionLabel)) for _ in range(100)]
    stats = evaluate_decisions(preds, golds)

    # independent tally via a confusion matrix
    confusion = Counter((g, p) for g, p in zip(golds, preds))
    total_correct = sum(c for (g, p), c in confusion.items() if g == p)
    assert stats["micro"] == total_correct / 100
    per_class = {}
    for label in DecisionLabel:
        support = sum(c for (g, _), c in confusion.items() if g == label)
        if support:
            per_class[label.to_str()] = confusion[(label, label)] / support
    assert stats["class_accuracy"] == per_class
    assert stats["macro"] == pytest.approx(sum(per_class.values()) / len(per_class))


@settings(max_examples=30, deadline=None)
@given(st.permutations(list(range(12))))
def test_micro_accuracy_permutation_invariant(perm):
    import random
    rng = random.Random(7)
    golds = [rng.choice(list(DecisionLabel)) for _ in range(12)]
    preds = [rng.choice(list(DecisionLabel)) for _ in range(12)]
    base = evaluate_decisions(preds, golds)["micro"]
    shuffled = evaluate_decisions([preds[i] for i in perm], [golds[i] for i in perm])["micro"]
    assert base == shuffled


def test_macro_invariant_to_class_frequencies():
    # class-wise accuracies fixed at Yes=1.0, No=0.5; frequencies differ
    golds1 = [Y, N, N]
    preds1 = [Y, N, Y]   # Yes 1.0, No 0.5
    golds2 = [Y, Y, Y, Y, N, N]
    preds2 = [Y, Y, Y, Y, N, Y]  # Yes 1.0, No 0.5
    m1 = evaluate_decisions(preds1, golds1)["macro"]
    m2 = evaluate_decisions(preds2, golds2)["macro"]
    assert m1 == pytest.approx(m2)


# -- bleu ------------------------------------------------------------------------

def test_bleu_identical_corpus_is_exactly_one():
    hyps = ["are you a for-profit business ?", "do you have a valid passport ?"]
    assert bleu(hyps, hyps, max_n=1) == 1.0
    assert bleu(hyps, hyps, max_n=4) == 1.0


def test_bleu_disjoint_vocabulary_is_zero():
    assert bleu(["alpha beta"], ["gamma delta"], max_n=1) == 0.0


def test_bleu_hand_computed_brevity_case():
    # hypothesis "the cat sat" vs reference "the cat sat down":
    # unigram precision 3/3, brevity penalty exp(1 - 4/3)
    expected = math.exp(1.0 - 4.0 / 3.0)
    assert bleu(["the cat sat"], ["the cat sat down"], max_n=1) == \
        pytest.approx(expected, abs=1e-9)
    # all 1..3-gram precisions are exactly 1, so BLEU3 equals the brevity penalty
    assert bleu(["the cat sat"], ["the cat sat down"], max_n=3) == \
        pytest.approx(expected, abs=1e-9)
    # no 4-gram in a 3-token hypothesis and no smoothing: BLEU4 is 0
    assert bleu(["the cat sat"], ["the cat sat down"], max_n=4) == 0.0


def test_bleu_empty_pair_list_is_zero_with_warning():
    with pytest.warns(UserWarning):
        assert bleu([], [], max_n=4) == 0.0


def test_bleu_requires_paired_lists():
    with pytest.raises(ValueError):
        bleu(["a"], [])


# -- subset_filter -----------------------------------------------------------------

def test_answerable_drops_irrelevant_only():
    examples = [make_example(Y), make_example(R), make_example(I)]
    kept = subset_filter(examples, "answerable")
    assert [e.decision for e in kept] == [Y, I]


def test_answerable_is_identity_without_irrelevant():
    examples = [make_example(Y), make_example(N)]
    assert subset_filter(examples, "answerable") == examples


def test_dialog_history_only_keeps_empty_scenarios():
    examples = [make_example(scenario=""), make_example(scenario="I am 25 years old.")]
    kept = subset_filter(examples, "dialog_history_only")
    assert kept == [examples[0]]


def test_scenario_only_keeps_empty_history():
    with_history = make_example(history=[HistoryTurn("Are you over 18 years old?", "yes")])
    without = make_example()
    assert subset_filter([with_history, without], "scenario_only") == [without]


def test_evidence_substitution_moves_turns():
    ev = [HistoryTurn("Are you over 18 years old?", "yes")]
    prior = [HistoryTurn("Do you rent your home?", "no")]
    ex = make_example(scenario="I am 25 years old.", history=prior, evidence=ev)
    out = subset_filter([ex], "evidence_substituted")[0]
    assert out.scenario == ""
    assert out.history == prior + ev  # evidence appended in order


def test_evidence_substitution_requires_evidence():
    ex = make_example(scenario="I am 25 years old.", evidence=None)
    with pytest.raises(ValueError):
        subset_filter([ex], "evidence_substituted")


def test_unknown_subset_kind_rejected():
    with pytest.raises(ValueError):
        subset_filter([], "everything")


# -- report ---------------------------------------------------------------------------

def test_report_serializes_and_tabulates():
    report = MetricsReport(micro=0.9, macro=0.85, class_accuracy={"Yes": 1.0},
                           n_examples=10, bleu1=0.5, bleu4=0.25, bleu_mode="oracle",
                           n_bleu_pairs=4)
    as_json = report.to_json()
    assert '"micro": 0.9' in as_json
    table = report.to_table()
    assert "micro accuracy" in table and "0.9000" in table
