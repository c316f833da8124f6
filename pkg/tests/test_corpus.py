from __future__ import annotations

import json

import pytest
from hypothesis import given, strategies as st

from bibi.corpus import (
    CorpusError,
    DependencyParse,
    Polarity,
    Task,
    ingest_pairs,
    ingest_parses,
    ingest_predictions,
    ingest_qasrl,
    ingest_sentiment,
    map_sentiment_value,
    tokenize,
    tokenize_with_spans,
)

FIGURE_SENTENCE = (
    "UCD finished the 2006 championship as Dublin champions, "
    "by beating St Vincents in the final."
)


class TestMapSentimentValue:
    @pytest.mark.parametrize(
        "value,expected",
        [
            (0.3, Polarity.NEGATIVE),
            (0.75, Polarity.POSITIVE),
            (0.5, Polarity.NEUTRAL),
            (0.4, Polarity.NEUTRAL),
            (0.6, Polarity.NEUTRAL),
            (0.0, Polarity.NEGATIVE),
            (1.0, Polarity.POSITIVE),
        ],
    )
    def test_mapping(self, value, expected):
        assert map_sentiment_value(value) is expected

    @pytest.mark.parametrize("value", [-0.1, 1.1, 2.0])
    def test_out_of_range(self, value):
        with pytest.raises(CorpusError):
            map_sentiment_value(value)

    @given(st.floats(0, 1), st.floats(0, 1))
    def test_monotone(self, v1, v2):
        if v1 > v2:
            v1, v2 = v2, v1
        assert map_sentiment_value(v1).value <= map_sentiment_value(v2).value


class TestTokenizer:
    def test_splits_trailing_punctuation(self):
        assert tokenize("I love this movie!") == ["I", "love", "this", "movie", "!"]

    def test_keeps_internal_punctuation(self):
        assert tokenize("I'm mad for this movie!") == ["I'm", "mad", "for", "this", "movie", "!"]

    def test_leading_punctuation(self):
        assert tokenize("[Bettis] has")[:3] == ["[", "Bettis", "]"]

    def test_spans_cover_forms(self):
        text = "A bizarre (and sometimes repulsive) exercise."
        for form, start, end in tokenize_with_spans(text):
            assert text[start:end] == form

    @given(st.text(max_size=60))
    def test_never_crashes_and_spans_match(self, text):
        for form, start, end in tokenize_with_spans(text):
            assert text[start:end] == form
            assert form


class TestIngestSentiment:
    def test_single_positive(self, tmp_path):
        path = tmp_path / "s.jsonl"
        path.write_text(json.dumps({"id": "s1", "text": "I love this movie!", "value": 0.9}) + "\n")
        ds = ingest_sentiment(path)
        assert len(ds) == 1
        assert ds.by_id["s1"].polarity is Polarity.POSITIVE
        assert not ds.by_id["s1"].excluded_from_training

    def test_neutral_flagged_excluded(self, tmp_path):
        path = tmp_path / "s.jsonl"
        path.write_text(json.dumps({"id": "s1", "text": "meh", "value": 0.5}) + "\n")
        ds = ingest_sentiment(path)
        assert ds.by_id["s1"].excluded_from_training
        assert ds.training_items() == []

    def test_duplicate_id(self, tmp_path):
        path = tmp_path / "s.jsonl"
        rec = json.dumps({"id": "s1", "text": "x", "value": 0.9})
        path.write_text(rec + "\n" + rec + "\n")
        with pytest.raises(CorpusError, match="s1"):
            ingest_sentiment(path)

    def test_malformed_line_reports_line_number(self, tmp_path):
        path = tmp_path / "s.jsonl"
        path.write_text('{"id": "s1", "text": "x", "value": 0.9}\nnot json\n')
        with pytest.raises(CorpusError, match=":2"):
            ingest_sentiment(path)

    def test_idempotent(self, tmp_path):
        path = tmp_path / "s.jsonl"
        path.write_text(
            json.dumps({"id": "s1", "text": "x", "value": 0.9, "phrases": [["x", 0.8]]}) + "\n"
        )
        assert ingest_sentiment(path).items == ingest_sentiment(path).items


class TestIngestQasrl:
    def _record(self, **overrides):
        rec = {
            "id": "q1",
            "sentence": FIGURE_SENTENCE,
            "pred_index": 10,
            "predicate": "beating",
            "question": "Who beat someone?",
            "answers": ["UCD"],
        }
        rec.update(overrides)
        return rec

    def test_figure_item_valid(self, tmp_path):
        path = tmp_path / "q.jsonl"
        path.write_text(json.dumps(self._record()) + "\n")
        ds = ingest_qasrl(path)
        assert len(ds) == 1
        item = ds.by_id["q1"]
        assert item.predicate == "beating"
        assert tokenize(item.sentence)[item.predicate_token_index] == "beating"

    def test_answer_not_substring_rejected(self, tmp_path):
        path = tmp_path / "q.jsonl"
        path.write_text(json.dumps(self._record(answers=["wins"])) + "\n")
        with pytest.raises(CorpusError, match="q1"):
            ingest_qasrl(path)

    def test_predicate_index_mismatch_rejected(self, tmp_path):
        path = tmp_path / "q.jsonl"
        path.write_text(json.dumps(self._record(pred_index=0)) + "\n")
        with pytest.raises(CorpusError, match="predicate"):
            ingest_qasrl(path)

    def test_empty_file_warns(self, tmp_path):
        path = tmp_path / "q.jsonl"
        path.write_text("")
        with pytest.warns(UserWarning):
            ds = ingest_qasrl(path)
        assert len(ds) == 0

    def test_all_loaded_items_satisfy_substring_property(self, tmp_path):
        path = tmp_path / "q.jsonl"
        path.write_text(json.dumps(self._record()) + "\n")
        for item in ingest_qasrl(path):
            for answer in item.answers:
                assert answer in item.sentence


class TestIngestParses:
    def test_hand_built_tree(self, tmp_path):
        path = tmp_path / "p.conll"
        path.write_text(
            "#id s1\n"
            "1\tUCD\t2\tnsubj\n"
            "2\tbeat\t0\troot\n"
            "3\tVincents\t2\tdobj\n"
        )
        parses = ingest_parses(path)
        assert set(parses) == {"s1"}
        assert parses["s1"].heads == (1, -1, 1)

    def test_cycle_rejected(self, tmp_path):
        path = tmp_path / "p.conll"
        path.write_text(
            "#id s1\n"
            "1\ta\t2\tdep\n"
            "2\tb\t1\tdep\n"
            "3\tc\t0\troot\n"
        )
        with pytest.raises(CorpusError, match="s1"):
            ingest_parses(path)

    def test_multiple_roots_rejected(self, tmp_path):
        path = tmp_path / "p.conll"
        path.write_text("#id s1\n1\ta\t0\troot\n2\tb\t0\troot\n")
        with pytest.raises(CorpusError, match="root"):
            ingest_parses(path)

    def test_unknown_id_retained(self, tmp_path):
        path = tmp_path / "p.conll"
        path.write_text("#id mystery\n1\tx\t0\troot\n")
        assert "mystery" in ingest_parses(path)


class TestIngestPairs:
    def test_table_record(self, sample_pairs):
        assert len(sample_pairs) == 7
        utrecht1 = sample_pairs[0]
        assert utrecht1.pair_id == "Utrecht-1"
        assert utrecht1.gold_original is Polarity.POSITIVE
        assert utrecht1.original["text"].endswith("emotional power")
        assert utrecht1.modified["text"].endswith("emotional pain")

    def test_pair_ids_unique(self, sample_pairs):
        ids = [p.pair_id for p in sample_pairs]
        assert len(ids) == len(set(ids))

    def test_qasrl_changed_question_rejected(self, tmp_path):
        path = tmp_path / "p.jsonl"
        path.write_text(
            json.dumps(
                {
                    "pair_id": "q1",
                    "team": "t",
                    "task": "qasrl",
                    "original_id": "s1",
                    "original": {"sentence": "Terry fed Parker", "question": "Who fed Parker?"},
                    "modified": {"sentence": "Parker was fed", "question": "Who was fed?"},
                    "gold_original": "Terry",
                    "gold_modified": "Parker",
                }
            )
            + "\n"
        )
        with pytest.raises(CorpusError, match="question"):
            ingest_pairs(path)

    def test_sentiment_label_out_of_domain_rejected(self, tmp_path):
        path = tmp_path / "p.jsonl"
        path.write_text(
            json.dumps(
                {
                    "pair_id": "p1",
                    "team": "t",
                    "task": "sentiment",
                    "original_id": "s1",
                    "original": {"text": "a"},
                    "modified": {"text": "b"},
                    "gold_original": 0,
                    "gold_modified": 1,
                }
            )
            + "\n"
        )
        with pytest.raises(CorpusError, match="-1 or \\+1"):
            ingest_pairs(path)

    def test_missing_field_rejected(self, tmp_path):
        path = tmp_path / "p.jsonl"
        path.write_text(json.dumps({"pair_id": "p1"}) + "\n")
        with pytest.raises(CorpusError, match="missing required field"):
            ingest_pairs(path)

    def test_unknown_task_rejected(self, tmp_path):
        path = tmp_path / "p.jsonl"
        path.write_text(
            json.dumps(
                {
                    "pair_id": "p1",
                    "team": "t",
                    "task": "parsing",
                    "original_id": "s1",
                    "original": {},
                    "modified": {},
                    "gold_original": 1,
                    "gold_modified": 1,
                }
            )
            + "\n"
        )
        with pytest.raises(CorpusError, match="unknown task"):
            ingest_pairs(path)


class TestIngestPredictions:
    def test_table4_entries(self, sample_predictions):
        assert sample_predictions.get("Strawman", "Utrecht-1:orig") == "+1"
        assert sample_predictions.get("RNTN", "Melbourne-1:mod") == "0"
        assert len(sample_predictions) == 7 * 2 * 6

    def test_duplicate_key_rejected(self, tmp_path):
        path = tmp_path / "pred.tsv"
        path.write_text("Strawman\tUtrecht-1:orig\t+1\nStrawman\tUtrecht-1:orig\t-1\n")
        with pytest.raises(CorpusError, match="duplicate"):
            ingest_predictions(path, Task.SENTIMENT)

    def test_bad_payload_rejected_with_line(self, tmp_path):
        path = tmp_path / "pred.tsv"
        path.write_text("Strawman\tUtrecht-1:orig\t+1\nStrawman\tUtrecht-1:mod\tmaybe\n")
        with pytest.raises(CorpusError, match=":2"):
            ingest_predictions(path, Task.SENTIMENT)


def test_dependency_parse_requires_tree():
    with pytest.raises(CorpusError):
        DependencyParse(("a", "b"), (1, 0), ("dep", "dep"))  # 2-cycle, no root
