"""Per-series statistics over bucketed n-gram counts.

All functions are pure.  A series carries a boolean mask marking
buckets with no data (empty corpus buckets); masked points are excluded
from window averages, means, fits, and standardization denominators,
and their stored value is 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

EULER_GAMMA = 0.5772156649015329
DEFAULT_Z = 1.95996
DEFAULT_SMOOTHING_WINDOW = 3

# Below this, sum 1/j directly; above, the asymptotic expansion is
# already accurate to ~1e-26 and far cheaper.
_EXACT_HARMONIC_LIMIT = 10**6

KIND_RELATIVE_FREQUENCY = "relative_frequency"
KIND_WORD_RANK_SCORE = "word_rank_score"
KIND_STANDARDIZED = "standardized"
KIND_INDEX = "index"


def harmonic_number(n: int) -> float:
    """H_n = sum of 1/j for j in 1..n; asymptotic form for huge n."""
    if n < 1:
        raise ValueError(f"harmonic number needs n >= 1, got {n}")
    if n <= _EXACT_HARMONIC_LIMIT:
        return math.fsum(1.0 / j for j in range(1, n + 1))
    return math.log(n) + EULER_GAMMA + 1.0 / (2.0 * n) - 1.0 / (12.0 * n * n)


def rank_score(rank: int, zero_rank: int, harmonic: float) -> float:
    """Zipf-calibrated score of a dense rank against the zero-frequency rank.

    Both terms share the same float expression shape, so rank == zero_rank
    gives exactly 0.0.
    """
    return 1.0 / (rank * harmonic) - 1.0 / (zero_rank * harmonic)


@dataclass
class ScoredSeries:
    values: np.ndarray                 # float64, one value per bucket
    label: str
    kind: str
    applied: tuple[str, ...] = ()
    mask: np.ndarray | None = None     # True where the bucket has no data
    ci_low: np.ndarray | None = None
    ci_high: np.ndarray | None = None
    degenerate: bool = False
    unseen: bool = False

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.mask is None:
            self.mask = np.zeros(len(self.values), dtype=bool)
        else:
            self.mask = np.asarray(self.mask, dtype=bool)
        if len(self.mask) != len(self.values):
            raise ValueError("mask and values must have equal length")


@dataclass(frozen=True)
class FitResult:
    slope: float
    intercept: float
    stderr: float


def relative_frequency(counts: np.ndarray, totals: np.ndarray, label: str,
                       unseen: bool = False) -> ScoredSeries:
    """counts[t] / totals[t]; empty buckets are masked and read 0."""
    counts = np.asarray(counts, dtype=np.float64)
    totals = np.asarray(totals, dtype=np.float64)
    if counts.shape != totals.shape:
        raise ValueError("counts and totals must have equal length")
    mask = totals == 0
    safe = np.where(mask, 1.0, totals)
    values = np.where(mask, 0.0, counts / safe)
    applied = ("relative_frequency",) + (("empty_bucket_mask",) if mask.any() else ())
    return ScoredSeries(values, label, KIND_RELATIVE_FREQUENCY, applied,
                        mask, unseen=unseen)


def word_rank_score(ranks: np.ndarray, distinct: np.ndarray, harmonic: np.ndarray,
                    totals: np.ndarray, label: str, unseen: bool = False) -> ScoredSeries:
    """1/(k·H) − 1/(k_zero·H) per bucket; absent terms score exactly 0."""
    ranks = np.asarray(ranks, dtype=np.float64)
    zero_rank = np.asarray(distinct, dtype=np.float64) + 1.0
    totals = np.asarray(totals)
    mask = totals == 0
    safe_h = np.where(mask, 1.0, np.asarray(harmonic, dtype=np.float64))
    values = 1.0 / (ranks * safe_h) - 1.0 / (zero_rank * safe_h)
    values = np.where(mask, 0.0, values)
    applied = ("word_rank_score",) + (("empty_bucket_mask",) if mask.any() else ())
    return ScoredSeries(values, label, KIND_WORD_RANK_SCORE, applied,
                        mask, unseen=unseen)


def _windowed_mean(values: np.ndarray, mask: np.ndarray, window: int) -> np.ndarray:
    """Centered moving average; truncated at boundaries; masked points
    drop out of both numerator and divisor."""
    half = window // 2
    l = len(values)
    out = np.zeros(l, dtype=np.float64)
    for t in range(l):
        if mask[t]:
            continue
        lo, hi = max(0, t - half), min(l, t + half + 1)
        live = ~mask[lo:hi]
        out[t] = float(values[lo:hi][live].sum()) / int(live.sum())
    return out


def smooth(series: ScoredSeries, window: int = DEFAULT_SMOOTHING_WINDOW) -> ScoredSeries:
    """Centered moving average of odd width; boundary windows shrink."""
    l = len(series.values)
    if window % 2 == 0 or window < 1:
        raise ValueError(f"smoothing window must be odd and >= 1, got {window}")
    if window > l:
        raise ValueError(f"smoothing window {window} exceeds series length {l}")
    if window == 1:
        return replace(series, applied=series.applied + (f"smooth:{window}",))
    values = _windowed_mean(series.values, series.mask, window)
    ci_low = ci_high = None
    if series.ci_low is not None and series.ci_high is not None:
        ci_low = _windowed_mean(series.ci_low, series.mask, window)
        ci_high = _windowed_mean(series.ci_high, series.mask, window)
    return replace(series, values=values, ci_low=ci_low, ci_high=ci_high,
                   applied=series.applied + (f"smooth:{window}",))


def wilson_interval(c: float, n: float, z: float = DEFAULT_Z) -> tuple[float, float]:
    """Continuity-corrected Wilson bounds for c successes out of n.

    Root arguments are clamped at 0, the bounds at [0, 1], and the
    observed proportion is always enclosed.  n = 0 has no defined
    interval and returns (nan, nan).
    """
    if n < 1:
        return (math.nan, math.nan)
    if not 0 <= c <= n:
        raise ValueError(f"count {c} outside [0, {n}]")
    p = c / n
    z2 = z * z
    denom = 2.0 * (n + z2)
    base = 2.0 * n * p + z2
    spread = z2 - 1.0 / n + 4.0 * n * p * (1.0 - p)
    hi_root = math.sqrt(max(0.0, spread - (4.0 * p - 2.0)))
    lo_root = math.sqrt(max(0.0, spread + (4.0 * p - 2.0)))
    high = min(1.0, (base + (z * hi_root + 1.0)) / denom)
    low = max(0.0, (base - (z * lo_root + 1.0)) / denom)
    # The root clamps alone do not pin the boundary cases (c=0, c=n);
    # enclosing p does, and costs nothing elsewhere.
    return (min(low, p), max(high, p))


def wilson_band(counts: np.ndarray, totals: np.ndarray,
                z: float = DEFAULT_Z) -> tuple[np.ndarray, np.ndarray]:
    """Per-bucket Wilson bounds; empty buckets get (0, 0) and stay masked."""
    counts = np.asarray(counts, dtype=np.float64)
    totals = np.asarray(totals, dtype=np.float64)
    low = np.zeros(len(counts), dtype=np.float64)
    high = np.zeros(len(counts), dtype=np.float64)
    for t in range(len(counts)):
        if totals[t] >= 1:
            low[t], high[t] = wilson_interval(counts[t], totals[t], z)
    return low, high


def standardize(series: ScoredSeries) -> ScoredSeries:
    """Zero-mean, unit-variance rescaling over non-masked buckets.

    Population (not sample) standard deviation.  A flat series has no
    scale; it becomes all zeros with the degenerate flag set.
    """
    if len(series.values) < 2:
        raise ValueError("standardize needs a series of length >= 2")
    live = ~series.mask
    if live.sum() == 0:
        return replace(series, values=np.zeros_like(series.values),
                       kind=KIND_STANDARDIZED, ci_low=None, ci_high=None,
                       applied=series.applied + ("standardize",), degenerate=True)
    mean = float(series.values[live].mean())
    std = float(series.values[live].std())  # population: divisor is m
    if std == 0.0:
        values = np.zeros_like(series.values)
        degenerate = True
    else:
        values = np.where(series.mask, 0.0, (series.values - mean) / std)
        degenerate = False
    return replace(series, values=values, kind=KIND_STANDARDIZED,
                   ci_low=None, ci_high=None,
                   applied=series.applied + ("standardize",),
                   degenerate=degenerate or series.degenerate)


def multi_term_index(members: Sequence[ScoredSeries], label: str) -> ScoredSeries:
    """Per-bucket mean of the members' standardized values.

    Members are standardized here over the buckets where every member
    has data, so the index itself is exactly zero-mean there.  The
    index is masked wherever any member is masked.
    """
    if not members:
        raise ValueError("multi_term_index needs at least one member")
    l = len(members[0].values)
    for m in members:
        if len(m.values) != l:
            raise ValueError("all index members must share one timeline")
    mask = np.zeros(l, dtype=bool)
    for m in members:
        mask |= m.mask
    live = ~mask
    total = np.zeros(l, dtype=np.float64)
    degenerate = False
    if live.sum() == 0:
        degenerate = True
    else:
        for m in members:
            mean = float(m.values[live].mean())
            std = float(m.values[live].std())
            if std == 0.0:
                degenerate = True
                continue
            total += np.where(mask, 0.0, (m.values - mean) / std)
    values = total / len(members)
    values[mask] = 0.0
    applied = ("standardize_members", f"index:{len(members)}")
    unseen = all(m.unseen for m in members)
    return ScoredSeries(values, label, KIND_INDEX, applied, mask,
                        degenerate=degenerate, unseen=unseen)


def linear_fit(series: ScoredSeries) -> FitResult:
    """Ordinary least squares of value against bucket position.

    Positions are 0-based within the series as given (the cropped
    range, when one applies).  stderr is the residual standard error
    with m−2 degrees of freedom, 0 for a two-point fit.
    """
    live = ~series.mask
    m = int(live.sum())
    if m < 2:
        raise ValueError(f"linear fit needs >= 2 non-masked points, got {m}")
    x = np.arange(len(series.values), dtype=np.float64)[live]
    y = series.values[live]
    xm, ym = x.mean(), y.mean()
    sxx = float(((x - xm) ** 2).sum())
    slope = float(((x - xm) * (y - ym)).sum()) / sxx
    intercept = ym - slope * xm
    if m == 2:
        return FitResult(slope, float(intercept), 0.0)
    resid = y - (slope * x + intercept)
    stderr = math.sqrt(float((resid ** 2).sum()) / (m - 2))
    return FitResult(slope, float(intercept), stderr)
