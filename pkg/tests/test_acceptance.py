"""Acceptance gate: nine end-to-end criteria over the full stack.

Each criterion emits exactly one verdict line, echoed after the run
summary by the conftest terminal hook, and enforces its own runtime
budget.  Tolerances and seeds are pinned; loosening them to make a
failing criterion pass is never acceptable.
"""

from __future__ import annotations

import functools
import json
import time

import numpy as np
import pytest

from trendgram.changepoint import detect_group_changepoints, exhaustive_oracle
from trendgram.cli import main as cli_main
from trendgram.ingest import ingest_corpus
from trendgram.pipeline import execute, parse_query
from trendgram.series import (
    ScoredSeries,
    harmonic_number,
    linear_fit,
    rank_score,
    wilson_interval,
    word_rank_score,
)
from trendgram.store import MANIFEST, SEGMENT_FILES, dense_ranks, open_snapshot
from trendgram.synthetic import fixture_corpus_lines, step_matrix

ACCEPTANCE_LINES: list[str] = []


def criterion(number: int, name: str, budget_seconds: float):
    """Time the criterion, enforce its budget, record one verdict line."""

    def wrap(fn):
        @functools.wraps(fn)
        def run(*args, **kwargs):
            started = time.monotonic()
            try:
                detail = fn(*args, **kwargs)
            except BaseException as exc:
                ACCEPTANCE_LINES.append(
                    f"ACCEPTANCE {number} {name}: FAIL ({type(exc).__name__}: {exc})")
                raise
            elapsed = time.monotonic() - started
            if elapsed >= budget_seconds:
                ACCEPTANCE_LINES.append(
                    f"ACCEPTANCE {number} {name}: FAIL "
                    f"(runtime {elapsed:.2f}s over the {budget_seconds:.0f}s budget)")
                raise AssertionError(
                    f"criterion {number} exceeded its {budget_seconds:.0f}s budget")
            suffix = f"; {detail}" if detail else ""
            ACCEPTANCE_LINES.append(
                f"ACCEPTANCE {number} {name}: PASS ({elapsed:.2f}s{suffix})")

        return run

    return wrap


@criterion(1, "relative frequencies sum to one per bucket", 5.0)
def test_criterion_1_normalization_identity(fixture_corpus):
    snapshot = fixture_corpus.snapshot
    cells = 0
    for order in range(1, snapshot.config.n_max + 1):
        totals, _, _ = snapshot.order_stats(order)
        sums = np.zeros(snapshot.buckets, dtype=np.float64)
        for ngram in snapshot.iter_ngrams(order):
            sums += snapshot.get_series(ngram).counts
        live = totals > 0
        assert live.any()
        np.testing.assert_allclose(sums[live] / totals[live], 1.0, atol=1e-9)
        cells += int(live.sum())
    return f"{cells} non-empty (order, bucket) cells"


@criterion(2, "word-rank score calibration", 5.0)
def test_criterion_2_word_rank_calibration(fixture_corpus):
    snapshot = fixture_corpus.snapshot
    checked_absent = 0
    for order in range(1, snapshot.config.n_max + 1):
        totals, distinct, harmonic = snapshot.order_stats(order)
        by_rank: list[dict[int, float]] = [{} for _ in range(snapshot.buckets)]
        for ngram in snapshot.iter_ngrams(order):
            cs = snapshot.get_series(ngram)
            scored = word_rank_score(cs.ranks, distinct, harmonic, totals, ngram)
            absent = cs.counts == 0
            assert np.all(scored.values[absent] == 0.0)
            checked_absent += int(absent.sum())
            for b in np.nonzero(~absent)[0]:
                rank, value = int(cs.ranks[b]), float(scored.values[b])
                previous = by_rank[b].setdefault(rank, value)
                assert previous == value  # tied counts share the score
        for table in by_rank:
            scores = [table[r] for r in sorted(table)]
            assert all(a > b for a, b in zip(scores, scores[1:]))
            assert all(v > 0 for v in scores)
    return f"{checked_absent} absent cells exactly zero"


@criterion(3, "word-rank robustness under junk vocabulary", 10.0)
def test_criterion_3_rank_robustness():
    # One Zipf(1) bucket: counts round(C/k) for ranks k = 1..1000.
    C = 13350
    true_counts = [round(C / k) for k in range(1, 1001)]
    true_mass = sum(true_counts)
    junk_words = round(true_mass / 9)  # singletons carrying 10% of the mass
    top = true_counts[:100]
    assert min(true_counts) > 1  # junk count sits strictly below every true word

    ranks_before = dense_ranks(true_counts)
    ranks_after = dense_ranks(true_counts + [1])
    assert [ranks_after[c] for c in top] == [ranks_before[c] for c in top]

    n0, n1 = true_mass, true_mass + junk_words
    d0, d1 = len(true_counts), len(true_counts) + junk_words
    h0, h1 = harmonic_number(n0), harmonic_number(n1)
    wrs_before = [rank_score(ranks_before[c], d0 + 1, h0) for c in top]
    wrs_after = [rank_score(ranks_after[c], d1 + 1, h1) for c in top]
    assert all(a > b for a, b in zip(wrs_before, wrs_before[1:]))
    assert all(a > b for a, b in zip(wrs_after, wrs_after[1:]))

    rf_shift = float(np.median(
        [abs(c / n1 - c / n0) / (c / n0) for c in top]))
    wrs_shift = float(np.median(
        [abs(b - a) / a for a, b in zip(wrs_before, wrs_after)]))
    assert wrs_shift < rf_shift
    return (f"median shift {wrs_shift:.2%} (word rank) vs "
            f"{rf_shift:.2%} (relative frequency)")


@criterion(4, "Wilson interval coverage", 60.0)
def test_criterion_4_wilson_coverage():
    rng = np.random.default_rng(416)
    worst = 1.0
    for p in (0.01, 0.1, 0.5):
        for n in (20, 100, 1000):
            draws = rng.binomial(n, p, size=10_000)
            bounds = {int(c): wilson_interval(int(c), n)
                      for c in np.unique(draws)}
            covered = sum(1 for c in draws
                          if bounds[int(c)][0] <= p <= bounds[int(c)][1])
            coverage = covered / 10_000
            worst = min(worst, coverage)
            assert coverage >= 0.945, (p, n, coverage)
    return f"min cell coverage {worst:.4f} (floor 0.9450)"


@criterion(5, "regression exactness", 5.0)
def test_criterion_5_regression():
    def plain(values) -> ScoredSeries:
        return ScoredSeries(np.asarray(values, dtype=np.float64), "s",
                            "relative_frequency", (), None)

    for slope, intercept in [(2.0, 1.0), (-0.5, 3.0), (0.0, 7.0)]:
        fit = linear_fit(plain([slope * t + intercept for t in range(40)]))
        assert abs(fit.slope - slope) < 1e-9
        assert abs(fit.intercept - intercept) < 1e-9
        assert fit.stderr < 1e-9

    rng = np.random.default_rng(99)
    for _ in range(20):
        l = int(rng.integers(3, 60))
        y = rng.normal(size=l)
        x = np.arange(l, dtype=np.float64)
        design = np.array([[float(l), x.sum()], [x.sum(), (x * x).sum()]])
        intercept, slope = np.linalg.solve(design, [y.sum(), (x * y).sum()])
        fit = linear_fit(plain(y))
        assert abs(fit.slope - slope) < 1e-9
        assert abs(fit.intercept - intercept) < 1e-9
    return "noiseless exact; 20 random series match the normal-equations oracle"


@criterion(6, "change-point detection equals the exhaustive oracle", 60.0)
def test_criterion_6_oracle_equivalence():
    rng = np.random.default_rng(0)
    matches = 0
    worst_ratio = 1.0
    for _ in range(50):
        l = int(rng.integers(14, 31))
        m = int(rng.integers(1, 4))
        k = int(rng.integers(1, 3))
        while True:
            breaks = np.sort(rng.choice(np.arange(3, l - 2), size=k,
                                        replace=False))
            if k == 1 or breaks[1] - breaks[0] >= 4:
                break
        heights = {int(b): float(rng.uniform(1.0, 2.0) * rng.choice([-1.0, 1.0]))
                   for b in breaks}
        sigma = float(rng.uniform(0.05, 0.25))
        F = step_matrix(l, m, heights, sigma, rng)
        got = detect_group_changepoints(F, K=k)
        oracle = exhaustive_oracle(F, k)
        if got.breakpoints == oracle.breakpoints:
            matches += 1
        ratio = got.residual / oracle.residual if oracle.residual > 0 else 1.0
        worst_ratio = max(worst_ratio, ratio)
        assert ratio <= 1.01, (got.breakpoints, oracle.breakpoints, ratio)
    assert matches >= 48, matches
    return f"{matches}/50 exact matches, worst residual ratio {worst_ratio:.4f}"


@criterion(7, "change-point count and position recovery", 60.0)
def test_criterion_7_recovery():
    chose_two = 0
    within_two = 0
    for s in range(100):
        rng = np.random.default_rng(1000 + s)
        F = step_matrix(100, 3, {30: 1.0, 70: 1.0}, 0.1, rng)
        result = detect_group_changepoints(F)
        if result.K == 2:
            chose_two += 1
            first, second = sorted(result.breakpoints)
            if abs(first - 30) <= 2 and abs(second - 70) <= 2:
                within_two += 1
    assert chose_two >= 95, chose_two
    assert within_two >= 95, within_two
    return f"K=2 in {chose_two}/100 runs, both within +-2 in {within_two}/100"


@criterion(8, "case-study workflow on the planted fixture", 30.0)
def test_criterion_8_case_study(fixture_corpus):
    config = fixture_corpus.config
    snapshot = fixture_corpus.snapshot
    onset_bucket = 3   # 1893
    shift_bucket = 21  # 1911

    # unsmoothed: the onset bucket must be the first nonzero one
    rf = execute(parse_query({"q": "hoopball"}, config), snapshot).series[0]
    assert int(np.nonzero(rf.values)[0][0]) == onset_bucket

    result = execute(parse_query({"q": "[hoopball + hoop ball]",
                                  "changepoints": "auto"}, config), snapshot)
    index = result.series[0].values

    # the index of the two variants tracks their combined usage level
    pre = index[:onset_bucket].mean()
    mid = index[onset_bucket:shift_bucket].mean()
    post = index[shift_bucket:].mean()
    assert pre < mid < post
    ca = snapshot.get_series("hoopball")
    cb = snapshot.get_series("hoop ball")
    t1, _, _ = snapshot.order_stats(1)
    t2, _, _ = snapshot.order_stats(2)
    combined = ca.counts / t1 + cb.counts / t2
    corr = float(np.corrcoef(index, combined)[0, 1])
    assert corr > 0.99

    hits = [p for p in result.changepoint_positions
            if abs(p - shift_bucket) <= 1]
    assert hits, result.changepoint_positions
    return (f"onset at bucket {onset_bucket}, index corr {corr:.4f}, "
            f"shift flagged at {hits[0]}")


@criterion(9, "determinism and interface round-trips", 30.0)
def test_criterion_9_determinism(fixture_corpus, api_client, tmp_path,
                                 capsysbinary):
    # (a) ingest is byte-deterministic
    first = tmp_path / "a"
    second = tmp_path / "b"
    ingest_corpus(iter(fixture_corpus_lines()), fixture_corpus.config, first)
    ingest_corpus(iter(fixture_corpus_lines()), fixture_corpus.config, second)
    for name in (*SEGMENT_FILES, MANIFEST):
        assert (first / name).read_bytes() == (second / name).read_bytes(), name

    # (b) CSV parses back to the JSON series values
    csv_checks = 0
    for params in ({"q": "hoopball"},
                   {"q": "hoopball", "score": "word_rank_score"},
                   {"q": "hoopball,basketball", "smooth": "5"}):
        full = {"corpus": "fixture", **params}
        body = json.loads(api_client.get("/api/series", params=full).content)
        csv_rows = api_client.get("/api/export.csv",
                                  params=full).text.strip().split("\n")[1:]
        for t, row in enumerate(csv_rows):
            cells = row.split(",")[1:]
            for s, cell in zip(body["series"], cells):
                expected = s["values"][t]
                if expected is None:
                    assert cell == ""
                else:
                    assert abs(float(cell) - expected) <= 1e-12
                    csv_checks += 1

    # (c) the CLI emits the exact API bytes
    cli_args = ["query", "--corpus", str(fixture_corpus.dir),
                "[hoopball + hoop ball]", "--regression",
                "--changepoints", "auto"]
    api_params = {"corpus": "fixture", "q": "[hoopball + hoop ball]",
                  "regression": "1", "changepoints": "auto"}
    assert cli_main([*cli_args, "--json"]) == 0
    json_bytes = capsysbinary.readouterr().out
    assert json_bytes == api_client.get("/api/series", params=api_params).content
    assert cli_main([*cli_args, "--csv", "-"]) == 0
    csv_bytes = capsysbinary.readouterr().out
    assert csv_bytes == api_client.get("/api/export.csv",
                                       params=api_params).content
    return f"segments byte-identical, {csv_checks} CSV cells within 1e-12"
