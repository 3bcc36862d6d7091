from __future__ import annotations

import json
from collections import Counter
from datetime import datetime

import pytest
from hypothesis import given, strategies as st

from trendgram.config import CorpusConfig
from trendgram.ingest import (
    IngestReport,
    extract_ngrams,
    ingest_corpus,
    iter_documents,
    parse_record,
    tokenize,
)
from trendgram.store import open_snapshot


class TestTokenize:
    def test_lowercase_and_punctuation_strip(self):
        assert tokenize('The cat, the "dog"!') == ["the", "cat", "the", "dog"]

    def test_interior_hyphen_and_apostrophe_survive(self):
        assert tokenize("Basket-ball isn't dead.") == ["basket-ball", "isn't", "dead"]

    def test_tokens_that_normalize_to_nothing_are_dropped(self):
        assert tokenize("wait -- what ...") == ["wait", "what"]

    def test_rule_order_is_respected(self):
        # strip before lowercase gives the same result here; the order
        # is still honored literally.
        assert tokenize("Hey!", ("strip_punctuation", "lowercase")) == ["hey"]

    def test_empty_text(self):
        assert tokenize("") == []


class TestExtractNgrams:
    def test_orders_up_to_n_max(self):
        counts = extract_ngrams(["a", "b", "a"], 2)
        assert counts == Counter({
            ("a",): 2, ("b",): 1, ("a", "b"): 1, ("b", "a"): 1,
        })

    def test_empty_tokens(self):
        assert extract_ngrams([], 3) == Counter()

    @given(st.lists(st.sampled_from("ab"), max_size=30),
           st.integers(min_value=1, max_value=5))
    def test_total_count_matches_window_arithmetic(self, tokens, n_max):
        counts = extract_ngrams(tokens, n_max)
        expected = sum(max(0, len(tokens) - n + 1) for n in range(1, n_max + 1))
        assert sum(counts.values()) == expected


class TestParseRecord:
    def test_good_record(self):
        line = json.dumps({"id": "a", "date": "1900-01-01", "source": "s", "text": "t"})
        assert parse_record(line)["id"] == "a"

    @pytest.mark.parametrize("line", [
        "not json",
        json.dumps(["a", "list"]),
        json.dumps({"id": "a", "date": "1900-01-01", "source": "s"}),  # no text
        json.dumps({"id": "", "date": "1900-01-01", "source": "s", "text": "t"}),
        json.dumps({"id": "a", "date": 1900, "source": "s", "text": "t"}),
    ])
    def test_malformed(self, line):
        assert parse_record(line) is None


def _config() -> CorpusConfig:
    return CorpusConfig("mini", "yearly", datetime(1900, 1, 1),
                        datetime(1902, 12, 31), n_max=2)


def _record(i: int, date: str, text: str) -> str:
    return json.dumps({"id": f"d{i}", "date": date, "source": "s", "text": text})


class TestIterDocuments:
    def test_rejections_are_counted_not_fatal(self):
        lines = [
            _record(1, "1900-05-01", "one two"),
            "garbage",
            _record(2, "1899-01-01", "too early"),
            _record(3, "whenever", "bad date"),
            _record(1, "1901-01-01", "duplicate id"),
            _record(4, "1902-06-01", "fine"),
        ]
        report = IngestReport()
        docs = list(iter_documents(lines, _config(), report))
        assert [d.doc_id for d, _ in docs] == ["d1", "d4"]
        assert report.docs_ingested == 2
        assert report.docs_malformed == 2
        assert report.docs_out_of_range == 1
        assert report.docs_duplicate == 1

    def test_rejected_documents_never_reach_counts(self):
        lines = [_record(1, "1905-01-01", "way out of range")]
        report = IngestReport()
        assert list(iter_documents(lines, _config(), report)) == []
        assert report.tokens_per_bucket == Counter()

    def test_blank_lines_skipped_silently(self):
        report = IngestReport()
        docs = list(iter_documents(["", "  ", _record(1, "1900-01-01", "x")],
                                   _config(), report))
        assert len(docs) == 1
        assert report.docs_malformed == 0


class TestIngestCorpus:
    def test_fixture_report(self, fixture_corpus):
        report = fixture_corpus.report
        assert report.docs_ingested == 200
        assert report.docs_malformed == 0
        assert report.docs_out_of_range == 0
        assert report.docs_duplicate == 0
        assert len(report.tokens_per_bucket) == 31

    def test_empty_stream_builds_a_valid_empty_store(self, tmp_path):
        report = ingest_corpus([], _config(), tmp_path / "empty")
        assert report.docs_ingested == 0
        snapshot = open_snapshot(tmp_path / "empty")
        assert snapshot.n_docs == 0
        series = snapshot.get_series("anything")
        assert series.unseen
        assert series.counts.sum() == 0

    def test_summary_mentions_the_numbers(self, fixture_corpus):
        text = fixture_corpus.report.summary()
        assert "200 docs" in text
        assert "31 buckets" in text
