from __future__ import annotations

import json
from collections import Counter
from datetime import datetime

import numpy as np
import pytest

import trendgram.store as store_mod
from trendgram.config import CorpusConfig
from trendgram.ingest import extract_ngrams, ingest_corpus, tokenize
from trendgram.store import (
    StoreBuilder,
    StoreCorruptError,
    StoreStateError,
    dense_ranks,
    make_snippet,
    open_snapshot,
)


class TestDenseRanks:
    def test_spec_bucket(self):
        ranks = dense_ranks([50, 30, 10, 10])
        assert ranks == {50: 1, 30: 2, 10: 3}

    def test_all_tied(self):
        assert dense_ranks([5, 5]) == {5: 1}

    def test_contiguous_from_one(self):
        ranks = dense_ranks([7, 3, 3, 9, 1])
        assert sorted(ranks.values()) == [1, 2, 3, 4]


def _recount(lines: list[str], config: CorpusConfig) -> dict[int, Counter]:
    """Independent per-order recount straight from the NDJSON lines."""
    per_order: dict[int, Counter] = {n: Counter() for n in range(1, config.n_max + 1)}
    for line in lines:
        record = json.loads(line)
        bucket = config.bucket_of(datetime.fromisoformat(record["date"]))
        tokens = tokenize(record["text"], config.normalization)
        for ngram, count in extract_ngrams(tokens, config.n_max).items():
            per_order[len(ngram)][(" ".join(ngram), bucket)] += count
    return per_order


class TestRoundTrip:
    def test_counts_match_independent_recount(self, fixture_corpus):
        snapshot = fixture_corpus.snapshot
        recount = _recount(fixture_corpus.lines, fixture_corpus.config)
        for order in (1, 2):
            totals = np.zeros(snapshot.buckets, dtype=np.int64)
            for ngram in snapshot.iter_ngrams(order):
                series = snapshot.get_series(ngram)
                totals += series.counts
                for t in range(snapshot.buckets):
                    assert series.counts[t] == recount[order].get((ngram, t), 0)
            want_totals, _, _ = snapshot.order_stats(order)
            assert (totals == want_totals).all()

    def test_bucket_totals_are_exact_sums(self, fixture_corpus):
        snapshot = fixture_corpus.snapshot
        recount = _recount(fixture_corpus.lines, fixture_corpus.config)
        for order in (1, 2, 3):
            totals, _, _ = snapshot.order_stats(order)
            by_bucket = Counter()
            for (_, bucket), count in recount[order].items():
                by_bucket[bucket] += count
            assert totals.tolist() == [by_bucket[t] for t in range(snapshot.buckets)]

    def test_reopen_gives_identical_answers(self, fixture_corpus):
        again = open_snapshot(fixture_corpus.dir)
        a = fixture_corpus.snapshot.get_series("hoopball")
        b = again.get_series("hoopball")
        assert (a.counts == b.counts).all() and (a.ranks == b.ranks).all()


class TestBucketStats:
    def test_spec_rank_example(self, tmp_path):
        config = CorpusConfig("ranks", "yearly", datetime(1900, 1, 1),
                              datetime(1900, 12, 31), n_max=1)
        text = " ".join(["the"] * 50 + ["of"] * 30 + ["cat"] * 10 + ["dog"] * 10)
        line = json.dumps({"id": "d1", "date": "1900-06-01", "source": "s", "text": text})
        ingest_corpus([line], config, tmp_path / "ranks")
        snapshot = open_snapshot(tmp_path / "ranks")
        stats = snapshot.get_bucket_stats(0)
        assert stats.n_total[0] == 100
        assert stats.distinct[0] == 3
        assert not stats.empty
        assert snapshot.get_series("the").ranks[0] == 1
        assert snapshot.get_series("of").ranks[0] == 2
        assert snapshot.get_series("cat").ranks[0] == 3
        assert snapshot.get_series("dog").ranks[0] == 3
        # absent n-gram sits at the zero-frequency rank D+1
        assert snapshot.get_series("bird").ranks[0] == 4

    def test_empty_bucket(self, gappy_corpus):
        stats = gappy_corpus.snapshot.get_bucket_stats(3)  # 1903 has no docs
        assert stats.empty
        assert stats.n_total == (0, 0)
        assert stats.distinct == (0, 0)
        assert stats.harmonic == (0.0, 0.0)

    def test_harmonic_positive_when_occupied(self, fixture_corpus):
        stats = fixture_corpus.snapshot.get_bucket_stats(0)
        assert all(h > 0 for h, n in zip(stats.harmonic, stats.n_total) if n >= 1)

    def test_bucket_out_of_range(self, fixture_corpus):
        with pytest.raises(IndexError):
            fixture_corpus.snapshot.get_bucket_stats(31)


class TestGetSeries:
    def test_zero_iff_zero_rank_rule(self, fixture_corpus):
        snapshot = fixture_corpus.snapshot
        series = snapshot.get_series("hoopball")
        _, distinct, _ = snapshot.order_stats(1)
        for t in range(snapshot.buckets):
            if series.counts[t] == 0:
                assert series.ranks[t] == distinct[t] + 1
            else:
                assert series.ranks[t] <= distinct[t]

    def test_unseen_flag(self, fixture_corpus):
        series = fixture_corpus.snapshot.get_series("zeppelin")
        assert series.unseen
        assert series.counts.sum() == 0

    def test_order_above_n_max_rejected(self, fixture_corpus):
        with pytest.raises(ValueError):
            fixture_corpus.snapshot.get_series("a b c d")


class TestPostings:
    def test_soundness_and_completeness(self, fixture_corpus):
        snapshot = fixture_corpus.snapshot
        config = fixture_corpus.config
        # every fixture doc containing the bigram in 1893 is listed, and
        # every listed doc really contains it
        want = set()
        for line in fixture_corpus.lines:
            record = json.loads(line)
            tokens = tokenize(record["text"], config.normalization)
            bucket = config.bucket_of(datetime.fromisoformat(record["date"]))
            grams = extract_ngrams(tokens, 2)
            if bucket == 3 and grams.get(("hoop", "ball"), 0) > 0:
                want.add(record["id"])
        page = snapshot.list_documents("hoop ball", 3, page=1, page_size=50)
        got = {item.doc_id for item in page.items}
        assert got == want
        assert page.total == len(want)
        assert not page.truncated

    def test_snippet_contains_the_ngram(self, fixture_corpus):
        page = fixture_corpus.snapshot.list_documents("hoop ball", 25)
        assert page.items
        for item in page.items:
            assert "hoop ball" in item.snippet

    def test_ordering_is_by_doc_id(self, fixture_corpus):
        page = fixture_corpus.snapshot.list_documents("hoopball", 25, page_size=50)
        ids = [item.doc_id for item in page.items]
        assert ids == sorted(ids)

    def test_pagination_past_end_is_empty_with_total(self, fixture_corpus):
        first = fixture_corpus.snapshot.list_documents("hoopball", 25)
        beyond = fixture_corpus.snapshot.list_documents("hoopball", 25, page=40)
        assert beyond.items == []
        assert beyond.total == first.total

    def test_absent_term_in_bucket(self, fixture_corpus):
        page = fixture_corpus.snapshot.list_documents("hoopball", 0)
        assert page.total == 0 and page.items == []

    def test_cap_sets_truncation_flag(self, tmp_path, monkeypatch):
        monkeypatch.setattr(store_mod, "POSTING_CAP", 3)
        config = CorpusConfig("cap", "yearly", datetime(1900, 1, 1),
                              datetime(1900, 12, 31), n_max=1)
        lines = [json.dumps({"id": f"d{i}", "date": "1900-02-01", "source": "s",
                             "text": "stopword filler"})
                 for i in range(5)]
        ingest_corpus(lines, config, tmp_path / "cap")
        page = open_snapshot(tmp_path / "cap").list_documents("stopword", 0, page_size=10)
        assert page.total == 5
        assert page.truncated
        assert len(page.items) == 3


class TestSnippet:
    def test_width_is_bounded(self):
        tokens = ["pad"] * 200 + ["needle"] + ["pad"] * 200
        snippet = make_snippet(tokens, ["needle"])
        assert len(snippet) == 240
        assert "needle" in snippet

    def test_short_text_returned_whole(self):
        assert make_snippet(["tiny", "text"], ["text"]) == "tiny text"

    def test_window_centers_on_first_occurrence(self):
        tokens = ["x"] * 300 + ["needle"] + ["y"] * 300
        snippet = make_snippet(tokens, ["needle"])
        assert "needle" in snippet
        assert "x" in snippet and "y" in snippet


class TestLifecycle:
    def test_open_during_ingest_is_a_state_error(self, tmp_path):
        config = CorpusConfig("part", "yearly", datetime(1900, 1, 1),
                              datetime(1900, 12, 31), n_max=1)
        builder = StoreBuilder(config, tmp_path / "part")
        with pytest.raises(StoreStateError):
            open_snapshot(tmp_path / "part")
        builder.finish()
        assert open_snapshot(tmp_path / "part").n_docs == 0

    def test_aborted_build_stays_unopenable(self, tmp_path):
        config = CorpusConfig("part", "yearly", datetime(1900, 1, 1),
                              datetime(1900, 12, 31), n_max=1)
        StoreBuilder(config, tmp_path / "part")  # never finished
        with pytest.raises(StoreStateError):
            open_snapshot(tmp_path / "part")

    def test_checksum_corruption_names_the_segment(self, tmp_path):
        config = CorpusConfig("corrupt", "yearly", datetime(1900, 1, 1),
                              datetime(1900, 12, 31), n_max=1)
        line = json.dumps({"id": "d", "date": "1900-03-01", "source": "s",
                           "text": "alpha beta"})
        ingest_corpus([line], config, tmp_path / "corrupt")
        target = tmp_path / "corrupt" / "series.dat"
        data = bytearray(target.read_bytes())
        data[0] ^= 0xFF
        target.write_bytes(bytes(data))
        with pytest.raises(StoreCorruptError, match="series.dat"):
            open_snapshot(tmp_path / "corrupt")

    def test_missing_directory(self, tmp_path):
        with pytest.raises(StoreStateError):
            open_snapshot(tmp_path / "nowhere")
