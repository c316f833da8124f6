from __future__ import annotations

import pytest
from hypothesis import given, settings, strategies as st

from bibi.corpus import MinimalPair, Polarity, Task, ingest_sentiment, tokenize
from bibi.validation import (
    AdjudicationStatus,
    ValidationConfig,
    ValidationError,
    ViolationCode,
    adjudicate,
    apply_script,
    token_diff,
    validate_pair,
)

words = st.sampled_from(["the", "movie", "was", "good", "bad", "not", "very", "film", "a"])
sentences = st.lists(words, min_size=1, max_size=8).map(" ".join)


class TestTokenDiff:
    def test_example_pair_cost_three(self):
        script = token_diff("I love this movie!", "I'm mad for this movie!")
        assert script.cost == 3

    def test_identical_strings_empty_script(self):
        script = token_diff("same thing", "same thing")
        assert script.cost == 0
        assert script.ops == ()

    def test_single_substitution(self):
        script = token_diff(
            "he forges moments of staggering emotional power",
            "he forges moments of staggering emotional pain",
        )
        assert script.cost == 1
        (op,) = script.ops
        assert op.kind == "SUBSTITUTE" and op.old == "power" and op.new == "pain"

    def test_empty_sequence_rejected(self):
        with pytest.raises(ValidationError):
            token_diff("", "something")

    def test_deterministic(self):
        a, b = "the good movie", "a bad film"
        assert token_diff(a, b) == token_diff(a, b)

    @settings(max_examples=300)
    @given(sentences, sentences)
    def test_round_trip(self, a, b):
        script = token_diff(a, b)
        assert apply_script(tokenize(a), script) == tokenize(b)

    @settings(max_examples=200)
    @given(sentences, sentences, sentences)
    def test_metric_properties(self, a, b, c):
        dab = token_diff(a, b).cost
        dba = token_diff(b, a).cost
        assert dab == dba
        assert (dab == 0) == (tokenize(a) == tokenize(b))
        assert token_diff(a, c).cost <= dab + token_diff(b, c).cost


def _sentiment_pair(original, modified, original_id="s1", gold_orig=1, gold_mod=1, team="t"):
    return MinimalPair(
        pair_id="p1",
        team=team,
        task=Task.SENTIMENT,
        original_item_id=original_id,
        original={"text": original},
        modified={"text": modified},
        gold_original=Polarity(gold_orig),
        gold_modified=Polarity(gold_mod),
    )


def _qasrl_pair(**overrides):
    fields = {
        "pair_id": "q1",
        "team": "t",
        "task": Task.QASRL,
        "original_item_id": "s1",
        "original": {"sentence": "Terry fed Parker .", "question": "Who fed Parker?"},
        "modified": {"sentence": "Terry kept feeding Parker .", "question": "Who fed Parker?"},
        "gold_original": ("Terry",),
        "gold_modified": ("Terry",),
    }
    fields.update(overrides)
    return MinimalPair(**fields)


@pytest.fixture
def starter(starter_file):
    return ingest_sentiment(starter_file)


class TestValidatePair:
    def test_sample_pairs_all_clean(self, sample_pairs, starter):
        for pair in sample_pairs:
            assert validate_pair(pair, starter) == []

    def test_not_from_starter(self, starter):
        pair = _sentiment_pair("unknown sentence", "unknown sentence!", original_id="nope")
        codes = {v.code for v in validate_pair(pair, starter)}
        assert ViolationCode.NOT_FROM_STARTER in codes

    def test_original_must_be_byte_identical(self, starter):
        pair = _sentiment_pair(
            "Exactly the kind of unexpected delight one hopes for every time the lights go down",
            "Exactly the kind of thrill one hopes for every time the lights go down.",
            original_id="st-m1",  # starter text ends with a period
        )
        codes = [v.code for v in validate_pair(pair, starter)]
        assert codes == [ViolationCode.NOT_FROM_STARTER]

    def test_trailing_newline_tolerated(self, starter):
        text = starter.by_id["st-m1"].text
        pair = _sentiment_pair(text + "\n", text.replace("delight", "thrill"), original_id="st-m1")
        assert validate_pair(pair, starter) == []

    def test_edit_too_large(self, starter):
        text = starter.by_id["st-m1"].text
        pair = _sentiment_pair(text, "totally different words in every single position here now yes", original_id="st-m1")
        codes = [v.code for v in validate_pair(pair, starter)]
        assert codes == [ViolationCode.EDIT_TOO_LARGE]

    def test_question_changed_single_code(self):
        from bibi.corpus import QasrlDataset, QasrlItem

        item = QasrlItem(
            id="s1",
            sentence="Terry fed Parker .",
            predicate_token_index=1,
            predicate="fed",
            question="Who fed Parker?",
            answers=("Terry",),
        )
        starter = QasrlDataset([item])
        pair = _qasrl_pair(
            modified={"sentence": "Parker was fed .", "question": "Who was fed?"},
            gold_modified=("Parker",),
        )
        codes = [v.code for v in validate_pair(pair, starter)]
        assert codes == [ViolationCode.QUESTION_CHANGED]

    def test_qasrl_answer_must_be_substring_of_modified(self):
        from bibi.corpus import QasrlDataset, QasrlItem

        item = QasrlItem(
            id="s1",
            sentence="Terry fed Parker .",
            predicate_token_index=1,
            predicate="fed",
            question="Who fed Parker?",
            answers=("Terry",),
        )
        starter = QasrlDataset([item])
        pair = _qasrl_pair(
            modified={"sentence": "Parker was fed .", "question": "Who fed Parker?"},
            gold_modified=("Terry",),
        )
        codes = {v.code for v in validate_pair(pair, starter)}
        assert ViolationCode.ANSWER_NOT_SUBSTRING in codes

    def test_custom_edit_budget(self, starter):
        pair = _sentiment_pair(
            starter.by_id["st-m2"].text,
            "This doesn't get any more meaty and muscular than American drama.",
            original_id="st-m2",
        )
        assert validate_pair(pair, starter) == []
        config = ValidationConfig(max_edit_cost=2)
        codes = [v.code for v in validate_pair(pair, starter, config)]
        assert codes == [ViolationCode.EDIT_TOO_LARGE]

    def test_deterministic(self, sample_pairs, starter):
        for pair in sample_pairs:
            assert validate_pair(pair, starter) == validate_pair(pair, starter)


class TestAdjudicate:
    def test_majority_confirms(self):
        pair = _sentiment_pair("a", "b", gold_orig=1, gold_mod=1)
        (result,) = adjudicate(pair, {"orig": [1, 1, -1]})
        assert result.status is AdjudicationStatus.CONFIRMED

    def test_majority_against_contests(self):
        pair = _sentiment_pair("a", "b", gold_orig=1, gold_mod=1)
        (result,) = adjudicate(pair, {"orig": [-1, -1, 1]})
        assert result.status is AdjudicationStatus.CONTESTED

    def test_tie_is_contested(self):
        pair = _sentiment_pair("a", "b", gold_orig=1, gold_mod=1)
        (result,) = adjudicate(pair, {"orig": [1, -1]})
        assert result.status is AdjudicationStatus.CONTESTED

    def test_both_sides(self):
        pair = _sentiment_pair("a", "b", gold_orig=1, gold_mod=-1)
        results = adjudicate(pair, {"orig": [1], "mod": [-1]})
        assert [r.side for r in results] == ["orig", "mod"]
        assert all(r.status is AdjudicationStatus.CONFIRMED for r in results)

    def test_empty_labels_rejected(self):
        pair = _sentiment_pair("a", "b")
        with pytest.raises(ValidationError):
            adjudicate(pair, {"orig": []})
