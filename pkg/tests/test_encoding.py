import json
from collections import Counter
from pathlib import Path

import numpy as np
import pytest

from cmreader.config import ModelConfig
from cmreader.encoding import (
    PAD,
    SEQ_START,
    TYPE_END,
    UNK,
    AssemblyOverflowError,
    HistoryTurn,
    InputAssembly,
    SegmentKind,
    TokenEncoder,
    Vocabulary,
    assemble,
    tokenize,
    tokenize_with_offsets,
)

FIXTURES = Path(__file__).parent / "fixtures"


def small_vocab(extra: str = "") -> Vocabulary:
    corpus = [
        "you are over 18", "you live in the united kingdom", "are you a veteran",
        "yes no", "can i apply for the grant", extra,
    ]
    return Vocabulary.build(corpus, min_freq=1)


# -- tokenize ----------------------------------------------------------------

def test_tokenize_question():
    assert tokenize("Are you disabled?") == ["are", "you", "disabled", "?"]


def test_tokenize_empty():
    assert tokenize("") == []


def test_tokenize_gold_fixture():
    cases = json.loads((FIXTURES / "tokenizer_gold.json").read_text())["cases"]
    assert len(cases) == 50
    for case in cases:
        assert tokenize(case["text"]) == case["tokens"], case["text"]


def test_tokenize_with_offsets_matches_tokenize():
    text = "Are you a for-profit business?"
    tokens, offsets = tokenize_with_offsets(text)
    assert tokens == tokenize(text)
    for tok, (s, e) in zip(tokens, offsets):
        assert text[s:e].lower() == tok


# -- vocabulary --------------------------------------------------------------

def test_vocab_contains_every_token_at_min_freq_one():
    v = Vocabulary.build(["alpha beta", "beta gamma"], min_freq=1)
    for tok in ("alpha", "beta", "gamma"):
        assert v.id(tok) >= 4  # after reserved ids


def test_vocab_unseen_token_maps_to_unk():
    v = Vocabulary.build(["alpha beta"], min_freq=1)
    assert v.id("omega") == UNK


def test_vocab_frequency_threshold_matches_counting_oracle():
    corpus = ["a a a b b c", "a b d", "e e"]
    counts = Counter()
    for text in corpus:
        counts.update(tokenize(text))
    for min_freq in (1, 2, 3):
        v = Vocabulary.build(corpus, min_freq=min_freq)
        expected = sum(1 for c in counts.values() if c >= min_freq)
        assert len(v) == 4 + expected


def test_vocab_reserved_ids_dense_and_distinct():
    v = Vocabulary.build(["x"], min_freq=1)
    assert v.tokens[:4] == ["<pad>", "<unk>", "<s>", "</s>"]
    ids = [v.index[t] for t in v.tokens]
    assert ids == list(range(len(v)))


def test_vocab_roundtrip_from_tokens():
    v = Vocabulary.build(["alpha beta gamma"], min_freq=1)
    again = Vocabulary.from_tokens(v.tokens)
    assert again.index == v.index


# -- assemble ----------------------------------------------------------------

def test_assemble_minimal_example_three_sentinels():
    v = small_vocab()
    a = assemble(["you are over 18"], "can i apply", "", [], v, 64)
    assert len(a.sentinel_positions) == 3  # N=1 + question + scenario, M=0
    assert a.n_conditions == 1 and a.n_history == 0


def test_assemble_sentinel_arithmetic():
    v = small_vocab()
    history = [HistoryTurn("are you a veteran", "yes"), HistoryTurn("you are over 18", "no")]
    a = assemble(["c one here", "c two here", "c three here"], "q", "s", history, v, 128)
    assert len(a.sentinel_positions) == 3 + 2 + 2


def test_assemble_layout_markers():
    v = small_vocab()
    a = assemble(["you are over 18"], "can i apply", "", [HistoryTurn("are you a veteran", "yes")], v, 64)
    ids = a.token_ids
    # every sentinel position holds SEQ_START
    assert all(ids[p] == SEQ_START for p in a.sentinel_positions)
    # exactly four TYPE_END markers, one per input type
    assert int((ids == TYPE_END).sum()) == 4
    # sentinels strictly increasing
    assert (np.diff(a.sentinel_positions) > 0).all()


def test_assemble_empty_scenario_still_has_sentinel_without_body():
    v = small_vocab()
    a = assemble(["you are over 18"], "q", "", [], v, 64)
    scenario_sentinel = a.sentinel_positions[2]
    assert a.token_ids[scenario_sentinel] == SEQ_START
    assert a.token_ids[scenario_sentinel + 1] == TYPE_END


def test_assemble_truncates_history_oldest_first():
    v = small_vocab()
    filler = "you live in the united kingdom"
    history = [HistoryTurn(filler, "yes"), HistoryTurn("are you a veteran", "no")]
    length_needed = len(assemble(["you are over 18"], "q", "", history, v, 256).token_ids)
    a = assemble(["you are over 18"], "q", "", history, v, length_needed - 1)
    assert a.n_history == 1
    # the remaining turn is the newest one
    kept_tokens = [v.id(t) for t in tokenize("are you a veteran") + ["no"]]
    hist_positions = np.where(a.kinds == int(SegmentKind.HISTORY))[0]
    hist_ids = [int(a.token_ids[p]) for p in hist_positions
                if a.token_ids[p] not in (SEQ_START, TYPE_END)]
    assert hist_ids == kept_tokens


def test_assemble_truncates_scenario_tail_after_history():
    v = small_vocab()
    scenario = "you live in the united kingdom"
    base = assemble(["you are over 18"], "q", scenario, [], v, 256)
    a = assemble(["you are over 18"], "q", scenario, [], v, len(base.token_ids) - 2)
    scen_positions = np.where(a.kinds == int(SegmentKind.SCENARIO))[0]
    scen_ids = [int(a.token_ids[p]) for p in scen_positions
                if a.token_ids[p] not in (SEQ_START, TYPE_END)]
    full = v.encode(tokenize(scenario))
    assert scen_ids == full[:-2]  # tail removed, head kept


def test_assemble_errors_when_conditions_do_not_fit():
    v = small_vocab()
    with pytest.raises(AssemblyOverflowError):
        assemble(["you are over 18 and you live in the united kingdom"] * 4, "q", "", [], v, 16)


def test_assemble_requires_a_condition():
    with pytest.raises(ValueError):
        assemble([], "q", "", [], small_vocab(), 64)


# -- encoder -----------------------------------------------------------------

def encoder_setup(seed=0, dropout=0.0):
    v = small_vocab()
    cfg = ModelConfig(d_model=16, n_heads=2, n_encoder_layers=1, n_inter_layers=1,
                      dropout_rate=dropout, max_sequence_length=64, vocab_size=len(v),
                      ffn_dim=32)
    enc = TokenEncoder(cfg, np.random.default_rng(seed))
    return v, cfg, enc


def test_encoder_eval_mode_deterministic():
    v, cfg, enc = encoder_setup()
    a = assemble(["you are over 18"], "can i apply", "", [], v, cfg.max_sequence_length)
    out1 = enc(a)
    out2 = enc(a)
    np.testing.assert_array_equal(out1.sentence_vectors.data, out2.sentence_vectors.data)


def test_encoder_pad_extension_changes_nothing_exactly():
    v, cfg, enc = encoder_setup()
    a = assemble(["you are over 18"], "can i apply", "", [], v, cfg.max_sequence_length)
    out = enc(a)
    padded = InputAssembly(
        token_ids=np.concatenate([a.token_ids, np.full(5, PAD, dtype=np.intp)]),
        kinds=np.concatenate([a.kinds, np.zeros(5, dtype=np.intp)]),
        unit_ids=np.concatenate([a.unit_ids, np.full(5, -1, dtype=np.intp)]),
        sentinel_positions=a.sentinel_positions,
        n_conditions=a.n_conditions,
        n_history=a.n_history,
    )
    out_padded = enc(padded)
    np.testing.assert_array_equal(out.sentence_vectors.data, out_padded.sentence_vectors.data)
    np.testing.assert_array_equal(out.token_vectors.data,
                                  out_padded.token_vectors.data[: len(a.token_ids)])


def test_encoder_sentence_vectors_are_gathered_at_sentinels():
    v, cfg, enc = encoder_setup()
    a = assemble(["you are over 18", "you live in the united kingdom"], "q", "s",
                 [HistoryTurn("are you a veteran", "yes")], v, cfg.max_sequence_length)
    out = enc(a)
    np.testing.assert_array_equal(
        out.sentence_vectors.data, out.token_vectors.data[a.sentinel_positions])


def test_encoder_rejects_out_of_vocab_id():
    v, cfg, enc = encoder_setup()
    a = assemble(["you are over 18"], "q", "", [], v, cfg.max_sequence_length)
    a.token_ids[0] = cfg.vocab_size
    with pytest.raises(IndexError):
        enc(a)
