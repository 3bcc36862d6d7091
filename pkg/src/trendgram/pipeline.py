"""Query parsing and execution against a finalized corpus snapshot.

Stage order per term group: fetch counts, score, optional smoothing,
optional confidence band, optional standardization, multi-term merge,
then per-series regression and cross-series change-point detection.
With a from/to range, every stage sees only the cropped window, so
fits and breakpoints describe the visible window.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from datetime import datetime
from typing import Mapping, Sequence

import numpy as np

from trendgram import changepoint as cp
from trendgram import series as sm
from trendgram.config import ConfigError, CorpusConfig, parse_date
from trendgram.ingest import tokenize
from trendgram.store import Snapshot

SCORE_KINDS = (sm.KIND_RELATIVE_FREQUENCY, sm.KIND_WORD_RANK_SCORE)

# Breakpoints are dropped when they fall inside a masked gap at least
# this long in every series; interpolation invents the data there.
MASKED_GAP_SUPPRESSION = 3

CSV_FLOAT_FORMAT = "%.12g"


class QueryError(Exception):
    """Client-fault query problem (HTTP 400)."""

    status = 400
    code = "bad_request"

    def __init__(self, message: str) -> None:
        super().__init__(message)
        self.message = message


class InvalidCombinationError(QueryError):
    """Structurally valid flags that cannot be combined (HTTP 422)."""

    status = 422
    code = "invalid_combination"


class UnknownCorpusError(Exception):
    """No corpus under the requested id (HTTP 404)."""

    status = 404
    code = "unknown_corpus"

    def __init__(self, corpus_id: str) -> None:
        super().__init__(f"unknown corpus: {corpus_id!r}")
        self.message = str(self)


@dataclass(frozen=True)
class Query:
    corpus_id: str
    groups: tuple[tuple[str, ...], ...]
    score: str = sm.KIND_RELATIVE_FREQUENCY
    smoothing: int | None = None
    ci: bool = False
    standardize: bool = False
    regression: bool = False
    changepoints: bool = False
    changepoint_k: int | None = None   # None with changepoints=True: auto
    bucket_range: tuple[int, int] | None = None  # inclusive indices


@dataclass
class QueryResult:
    corpus_id: str
    score: str
    timeline: list[str]                 # cropped bucket labels
    range_from: int                     # global index of first shown bucket
    series: list[sm.ScoredSeries]
    fits: list[sm.FitResult | None] | None
    changepoints: cp.ChangePointResult | None
    changepoint_positions: list[int]    # global bucket indices
    warnings: list[str]


_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off", ""}


def _parse_flag(params: Mapping[str, str], name: str) -> bool:
    raw = params.get(name)
    if raw is None:
        return False
    value = raw.strip().lower()
    if value in _TRUE:
        return True
    if value in _FALSE:
        return False
    raise QueryError(f"parameter {name}: expected a boolean, got {raw!r}")


def normalize_term(raw: str, config: CorpusConfig) -> str:
    tokens = tokenize(raw, config.normalization)
    if not tokens:
        raise QueryError(f"term {raw!r} is empty after normalization")
    if len(tokens) > config.n_max:
        raise QueryError(
            f"term {raw!r} has {len(tokens)} tokens; corpus indexes up to {config.n_max}"
        )
    return " ".join(tokens)


def _split_groups(q: str) -> list[str]:
    chunks: list[str] = []
    depth = 0
    current: list[str] = []
    for ch in q:
        if ch == "[":
            depth += 1
        elif ch == "]":
            depth -= 1
            if depth < 0:
                raise QueryError("unbalanced ']' in query")
        if ch == "," and depth == 0:
            chunks.append("".join(current))
            current = []
        else:
            current.append(ch)
    if depth != 0:
        raise QueryError("unbalanced '[' in query")
    chunks.append("".join(current))
    return chunks


def parse_terms(q: str, config: CorpusConfig) -> tuple[tuple[str, ...], ...]:
    """Comma-separated terms; '[a + b]' merges terms into one group."""
    if not q or not q.strip():
        raise QueryError("empty query")
    groups: list[tuple[str, ...]] = []
    for chunk in _split_groups(q):
        chunk = chunk.strip()
        if not chunk:
            raise QueryError("empty term in query")
        if chunk.startswith("["):
            if not chunk.endswith("]"):
                raise QueryError(f"malformed group {chunk!r}")
            inner = chunk[1:-1]
            if "[" in inner or "]" in inner:
                raise QueryError(f"nested groups are not supported: {chunk!r}")
            parts = [p.strip() for p in inner.split("+")]
            if any(not p for p in parts):
                raise QueryError(f"malformed group {chunk!r}")
            groups.append(tuple(normalize_term(p, config) for p in parts))
        else:
            if "[" in chunk or "]" in chunk:
                raise QueryError(f"malformed term {chunk!r}: groups look like [a + b]")
            groups.append((normalize_term(chunk, config),))
    return tuple(groups)


_QUARTER_LABEL = re.compile(r"(\d{4})-Q([1-4])$")
_MONTH_LABEL = re.compile(r"(\d{4})-(\d{2})$")
_HOUR_LABEL = re.compile(r"(\d{4}-\d{2}-\d{2})T(\d{2})$")


def _parse_range_point(text: str) -> datetime:
    text = text.strip()
    m = _QUARTER_LABEL.match(text)
    if m:
        return datetime(int(m.group(1)), 3 * (int(m.group(2)) - 1) + 1, 1)
    m = _MONTH_LABEL.match(text)
    if m:
        return datetime(int(m.group(1)), int(m.group(2)), 1)
    m = _HOUR_LABEL.match(text)
    if m:
        day = datetime.fromisoformat(m.group(1))
        return day.replace(hour=int(m.group(2)))
    try:
        return parse_date(text)
    except ConfigError as exc:
        raise QueryError(str(exc)) from exc


def _parse_range(params: Mapping[str, str], config: CorpusConfig) -> tuple[int, int] | None:
    lo_raw, hi_raw = params.get("from"), params.get("to")
    if lo_raw is None and hi_raw is None:
        return None
    lo = 0
    hi = config.buckets - 1
    try:
        if lo_raw is not None and lo_raw.strip():
            lo = config.bucket_of(_parse_range_point(lo_raw))
        if hi_raw is not None and hi_raw.strip():
            hi = config.bucket_of(_parse_range_point(hi_raw))
    except ValueError as exc:
        raise QueryError(str(exc)) from exc
    if lo > hi:
        raise QueryError(f"empty range: from bucket {lo} after to bucket {hi}")
    if (lo, hi) == (0, config.buckets - 1):
        return None
    return (lo, hi)


def parse_query(params: Mapping[str, str], config: CorpusConfig) -> Query:
    """Build a validated Query from request-style string parameters."""
    q = params.get("q", "")
    groups = parse_terms(q, config)

    score = params.get("score", sm.KIND_RELATIVE_FREQUENCY).strip()
    if score not in SCORE_KINDS:
        raise QueryError(f"score must be one of {SCORE_KINDS}, got {score!r}")

    smoothing: int | None = None
    raw_smooth = params.get("smooth")
    if raw_smooth is not None and raw_smooth.strip():
        try:
            smoothing = int(raw_smooth)
        except ValueError as exc:
            raise QueryError(f"smooth must be an odd integer, got {raw_smooth!r}") from exc
        if smoothing < 1 or smoothing % 2 == 0:
            raise QueryError(f"smooth must be an odd integer >= 1, got {smoothing}")

    ci = _parse_flag(params, "ci")
    standardize = _parse_flag(params, "standardize")
    regression = _parse_flag(params, "regression")

    changepoints = False
    changepoint_k: int | None = None
    raw_cp = params.get("changepoints")
    if raw_cp is not None:
        value = raw_cp.strip().lower()
        if value in ("", "auto"):
            changepoints = True
        else:
            try:
                changepoint_k = int(value)
            except ValueError as exc:
                raise QueryError(
                    f"changepoints must be 'auto' or an integer, got {raw_cp!r}"
                ) from exc
            if changepoint_k < 0:
                raise QueryError("changepoints count must be >= 0")
            changepoints = True

    if ci:
        if standardize:
            raise InvalidCombinationError(
                "confidence bands apply to raw proportions; they cannot be "
                "combined with standardization"
            )
        if any(len(g) > 1 for g in groups):
            raise InvalidCombinationError(
                "confidence bands apply to single-term series, not merged indices"
            )
        if score != sm.KIND_RELATIVE_FREQUENCY:
            raise InvalidCombinationError(
                "confidence bands are defined for relative frequency only"
            )

    return Query(
        corpus_id=config.corpus_id,
        groups=groups,
        score=score,
        smoothing=smoothing,
        ci=ci,
        standardize=standardize,
        regression=regression,
        changepoints=changepoints,
        changepoint_k=changepoint_k,
        bucket_range=_parse_range(params, config),
    )


def group_label(group: tuple[str, ...]) -> str:
    if len(group) == 1:
        return group[0]
    return "[" + " + ".join(group) + "]"


def _build_member(term: str, query: Query, snapshot: Snapshot,
                  lo: int, hi: int, warnings: list[str]) -> sm.ScoredSeries:
    counts_series = snapshot.get_series(term)
    totals, distinct, harmonic = snapshot.order_stats(counts_series.order)
    window = slice(lo, hi + 1)
    counts = counts_series.counts[window]
    totals = totals[window]
    if counts_series.unseen:
        warnings.append(f"term not found in corpus: {term!r}")

    if query.score == sm.KIND_RELATIVE_FREQUENCY:
        scored = sm.relative_frequency(counts, totals, term, unseen=counts_series.unseen)
    else:
        scored = sm.word_rank_score(counts_series.ranks[window], distinct[window],
                                    harmonic[window], totals, term,
                                    unseen=counts_series.unseen)

    if query.ci:
        scored.ci_low, scored.ci_high = sm.wilson_band(counts, totals)

    if query.smoothing is not None:
        if query.smoothing > len(scored.values):
            raise QueryError(
                f"smoothing window {query.smoothing} exceeds range length {len(scored.values)}"
            )
        scored = sm.smooth(scored, query.smoothing)
    if query.ci:
        scored.applied = scored.applied + ("wilson_ci",)
    return scored


def _detection_matrix(series_list: Sequence[sm.ScoredSeries]) -> tuple[np.ndarray, np.ndarray]:
    """Column-stack series for detection: standardize raw scores so no
    single high-frequency term dominates the group norm, and fill
    masked buckets by linear interpolation."""
    columns: list[np.ndarray] = []
    masks: list[np.ndarray] = []
    for s in series_list:
        if s.kind in SCORE_KINDS:
            s = sm.standardize(s)
        values = s.values.copy()
        mask = s.mask
        live = ~mask
        if mask.any() and live.any():
            idx = np.arange(len(values), dtype=np.float64)
            values[mask] = np.interp(idx[mask], idx[live], values[live])
        columns.append(values)
        masks.append(mask)
    F = np.column_stack(columns)
    common_mask = np.logical_and.reduce(masks)
    return F, common_mask


def _suppress_gap_breakpoints(result: cp.ChangePointResult, F: np.ndarray,
                              common_mask: np.ndarray) -> cp.ChangePointResult:
    if not result.breakpoints or not common_mask.any():
        return result
    drop: set[int] = set()
    run_start = None
    for t, flag in enumerate(common_mask):
        if flag and run_start is None:
            run_start = t
        if (not flag or t == len(common_mask) - 1) and run_start is not None:
            run_end = t - 1 if not flag else t
            if run_end - run_start + 1 >= MASKED_GAP_SUPPRESSION:
                drop.update(range(run_start + 1, run_end + 1))
            run_start = None
    kept = tuple(b for b in result.breakpoints if b not in drop)
    if kept == result.breakpoints:
        return result
    A = cp.segment_means(F, kept)
    return cp.ChangePointResult(kept, A, float(((F - A) ** 2).sum()),
                                len(kept), result.shortfall)


def execute(query: Query, snapshot: Snapshot) -> QueryResult:
    """Run the scoring pipeline for one query against one snapshot."""
    l = snapshot.buckets
    lo, hi = query.bucket_range if query.bucket_range is not None else (0, l - 1)
    if not (0 <= lo <= hi < l):
        raise QueryError(f"range [{lo}, {hi}] outside timeline of {l} buckets")
    warnings: list[str] = []

    outputs: list[sm.ScoredSeries] = []
    for group in query.groups:
        members = [_build_member(term, query, snapshot, lo, hi, warnings)
                   for term in group]
        if len(members) == 1:
            out = members[0]
            if query.standardize:
                out = sm.standardize(out)
        else:
            out = sm.multi_term_index(members, group_label(group))
            if query.standardize:
                standardized = sm.standardize(out)
                out = standardized
                out.kind = sm.KIND_INDEX
        if out.degenerate:
            warnings.append(f"flat series, standardization degenerate: {out.label!r}")
        outputs.append(out)

    fits: list[sm.FitResult | None] | None = None
    if query.regression:
        fits = []
        for s in outputs:
            if int((~s.mask).sum()) < 2:
                warnings.append(f"too few points to fit: {s.label!r}")
                fits.append(None)
            else:
                fits.append(sm.linear_fit(s))

    cp_result: cp.ChangePointResult | None = None
    positions: list[int] = []
    if query.changepoints:
        if hi - lo + 1 < 2:
            raise QueryError("change-point detection needs at least 2 buckets in range")
        F, common_mask = _detection_matrix(outputs)
        try:
            cp_result = cp.detect_group_changepoints(F, query.changepoint_k)
        except ValueError as exc:
            raise QueryError(str(exc)) from exc
        cp_result = _suppress_gap_breakpoints(cp_result, F, common_mask)
        if cp_result.shortfall:
            warnings.append(
                f"only {cp_result.K} change-points supported by the data; "
                f"{query.changepoint_k} requested"
            )
        positions = [lo + b for b in cp_result.breakpoints]

    timeline = snapshot.timeline()[lo : hi + 1]
    return QueryResult(
        corpus_id=snapshot.corpus_id,
        score=query.score,
        timeline=timeline,
        range_from=lo,
        series=outputs,
        fits=fits,
        changepoints=cp_result,
        changepoint_positions=positions,
        warnings=warnings,
    )


def _series_values_json(s: sm.ScoredSeries) -> list[float | None]:
    return [None if s.mask[t] else float(s.values[t]) for t in range(len(s.values))]


def _band_json(s: sm.ScoredSeries, band: np.ndarray | None) -> list[float | None] | None:
    if band is None:
        return None
    return [None if s.mask[t] else float(band[t]) for t in range(len(band))]


def result_to_jsonable(result: QueryResult) -> dict:
    """Plain-data form of a result; the single wire format for API and CLI."""
    series = []
    for s in result.series:
        series.append({
            "label": s.label,
            "kind": s.kind,
            "applied": list(s.applied),
            "values": _series_values_json(s),
            "ci_low": _band_json(s, s.ci_low),
            "ci_high": _band_json(s, s.ci_high),
            "degenerate": bool(s.degenerate),
            "unseen": bool(s.unseen),
        })
    fits = None
    if result.fits is not None:
        fits = [None if f is None else
                {"slope": float(f.slope), "intercept": float(f.intercept),
                 "stderr": float(f.stderr)}
                for f in result.fits]
    changepoints = None
    if result.changepoints is not None:
        r = result.changepoints
        changepoints = {
            "k": int(r.K),
            "breakpoints": [result.timeline[p - result.range_from]
                            for p in result.changepoint_positions],
            "positions": [int(p) for p in result.changepoint_positions],
            "residual": float(r.residual),
            "shortfall": bool(r.shortfall),
        }
    return {
        "corpus": result.corpus_id,
        "score": result.score,
        "timeline": result.timeline,
        "series": series,
        "fits": fits,
        "changepoints": changepoints,
        "warnings": result.warnings,
    }


def _csv_field(text: str) -> str:
    if any(ch in text for ch in ",\"\n\r"):
        return '"' + text.replace('"', '""') + '"'
    return text


def render_csv(result: QueryResult) -> str:
    """CSV export: date column plus one column per series, 12 significant
    digits, masked buckets empty, LF line endings."""
    header = "date," + ",".join(_csv_field(s.label) for s in result.series)
    lines = [header]
    for t, label in enumerate(result.timeline):
        row = [label]
        for s in result.series:
            row.append("" if s.mask[t] else CSV_FLOAT_FORMAT % s.values[t])
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"
