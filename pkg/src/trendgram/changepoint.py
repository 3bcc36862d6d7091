"""Shared change-point detection across a matrix of time series.

A breakpoint b in {1..l-1} separates rows b-1 and b.  Candidates come
from a greedy group-LARS pass over the column-centered matrix (each
step picks the position whose weighted step-basis correlation with the
residual has the largest Euclidean norm, then refits segment means).
An exact dynamic program over the candidate positions then chooses the
best K-subset.  Squared segment-mean loss throughout.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

# Largest breakpoint count tried by model selection.
MODEL_SELECTION_CAP = 10
# A K-th breakpoint must cut at least this fraction of the zero-break
# residual to be accepted by model selection.
RESIDUAL_DROP_FRACTION = 0.02
# Brute-force enumeration bound for the test oracle.
ORACLE_PLACEMENT_LIMIT = 10**6


@dataclass(frozen=True)
class SeriesMatrix:
    F: np.ndarray          # l rows (time) x m columns (series)
    labels: tuple[str, ...]

    def __post_init__(self) -> None:
        F = np.asarray(self.F, dtype=np.float64)
        object.__setattr__(self, "F", F)
        if F.ndim != 2 or F.shape[0] < 2 or F.shape[1] < 1:
            raise ValueError("series matrix must be l x m with l >= 2, m >= 1")
        if not np.isfinite(F).all():
            raise ValueError("series matrix must be fully observed and finite")
        if len(self.labels) != F.shape[1]:
            raise ValueError("one label per column required")


@dataclass(frozen=True)
class ChangePointResult:
    breakpoints: tuple[int, ...]  # sorted, each in 1..l-1
    A: np.ndarray                 # piecewise-constant segment means, l x m
    residual: float               # squared Frobenius error of A
    K: int                        # len(breakpoints)
    shortfall: bool = False       # fewer breakpoints available than asked


def tv_weights(l: int) -> np.ndarray:
    """Boundary-correcting position weights for i in 1..l-1."""
    if l < 2:
        raise ValueError(f"need l >= 2, got {l}")
    i = np.arange(1, l, dtype=np.float64)
    return np.sqrt(l / (i * (l - i)))


def segment_means(F: np.ndarray, breakpoints: tuple[int, ...]) -> np.ndarray:
    """Column means within each segment delimited by the breakpoints."""
    l = F.shape[0]
    A = np.empty_like(F)
    bounds = [0, *breakpoints, l]
    for a, b in itertools.pairwise(bounds):
        A[a:b, :] = F[a:b, :].mean(axis=0)
    return A


def gflars_candidates(F: np.ndarray, k_max: int) -> list[int]:
    """Greedy breakpoint candidates, in selection order.

    Works on the column-centered matrix; selection scores that vanish
    (relative to the matrix scale) end the search early, so fewer than
    k_max candidates may come back.
    """
    F = np.asarray(F, dtype=np.float64)
    l = F.shape[0]
    if not 1 <= k_max <= l - 1:
        raise ValueError(f"k_max must be in [1, {l - 1}], got {k_max}")
    centered = F - F.mean(axis=0)
    scale = float(np.linalg.norm(centered))
    weights = tv_weights(l)
    residual = centered.copy()
    selected: list[int] = []
    for _ in range(k_max):
        suffix = np.cumsum(residual[::-1], axis=0)[::-1]  # suffix[i] = sum of rows >= i
        scores = weights * np.linalg.norm(suffix[1:], axis=1)
        for b in selected:
            scores[b - 1] = -1.0
        best = int(np.argmax(scores))
        if scores[best] <= scale * 1e-12:
            break
        selected.append(best + 1)
        refit = segment_means(centered, tuple(sorted(selected)))
        residual = centered - refit
    return selected


class _SegmentCost:
    """O(1) squared segment-mean cost via prefix sums."""

    def __init__(self, F: np.ndarray) -> None:
        l, m = F.shape
        self._sums = np.zeros((l + 1, m), dtype=np.float64)
        self._sums[1:] = np.cumsum(F, axis=0)
        self._sq = np.zeros(l + 1, dtype=np.float64)
        self._sq[1:] = np.cumsum((F * F).sum(axis=1))

    def cost(self, a: int, b: int) -> float:
        span = self._sums[b] - self._sums[a]
        return float(self._sq[b] - self._sq[a] - (span * span).sum() / (b - a))


def dp_refine(F: np.ndarray, candidates: list[int], K: int) -> ChangePointResult:
    """Exact best K-subset of the candidate breakpoints.

    Asking for more breakpoints than exist among the candidates returns
    the best achievable count with the shortfall flag raised.
    """
    F = np.asarray(F, dtype=np.float64)
    l = F.shape[0]
    if K < 0:
        raise ValueError("K must be >= 0")
    cands = sorted(set(candidates))
    if any(not 1 <= b <= l - 1 for b in cands):
        raise ValueError("candidate breakpoints must lie in 1..l-1")
    shortfall = K > len(cands)
    k_eff = min(K, len(cands))
    if k_eff == 0:
        A = segment_means(F, ())
        return ChangePointResult((), A, float(((F - A) ** 2).sum()), 0, shortfall)

    nodes = [0, *cands, l]
    p = len(nodes)
    cost = _SegmentCost(F)
    inf = math.inf
    # best[e][v]: minimal cost of covering rows [0, nodes[v]) with e segments,
    # every segment ending at a node.
    best = np.full((k_eff + 2, p), inf)
    back = np.zeros((k_eff + 2, p), dtype=np.int64)
    for v in range(1, p):
        best[1][v] = cost.cost(0, nodes[v])
    for e in range(2, k_eff + 2):
        for v in range(e, p):
            options = [best[e - 1][u] + cost.cost(nodes[u], nodes[v])
                       for u in range(e - 1, v)]
            u_rel = int(np.argmin(options))
            best[e][v] = options[u_rel]
            back[e][v] = u_rel + e - 1
    breaks: list[int] = []
    v = p - 1
    for e in range(k_eff + 1, 1, -1):
        v = int(back[e][v])
        breaks.append(nodes[v])
    breakpoints = tuple(sorted(breaks))
    A = segment_means(F, breakpoints)
    return ChangePointResult(breakpoints, A, float(((F - A) ** 2).sum()),
                             len(breakpoints), shortfall)


def _slack(K: int, l: int) -> int:
    return min(2 * K, l - 1 - K)


def detect_group_changepoints(F: np.ndarray, K: int | None = None) -> ChangePointResult:
    """Find breakpoints shared across all columns of F.

    With K given, greedy candidates (K plus slack) feed the exact DP.
    Without K, the count is chosen by residual drop: the largest K whose
    marginal residual reduction is at least 2% of the no-break residual.
    """
    F = np.asarray(F, dtype=np.float64)
    l = F.shape[0]
    if l < 2:
        raise ValueError("need at least 2 time points")
    if K is not None:
        if not 0 <= K <= l - 1:
            raise ValueError(f"K must be in [0, {l - 1}], got {K}")
        if K == 0:
            return dp_refine(F, [], 0)
        cands = gflars_candidates(F, K + _slack(K, l))
        return dp_refine(F, cands, K)

    k_cap = min(MODEL_SELECTION_CAP, l // 5)
    base = dp_refine(F, [], 0)
    if k_cap == 0 or base.residual == 0.0:
        return base
    cands = gflars_candidates(F, k_cap + _slack(k_cap, l))
    if not cands:
        return base
    k_cap = min(k_cap, len(cands))
    residuals = [base.residual]
    results = [base]
    for k in range(1, k_cap + 1):
        r = dp_refine(F, cands, k)
        results.append(r)
        residuals.append(r.residual)
    threshold = RESIDUAL_DROP_FRACTION * base.residual
    chosen = 0
    for k in range(1, k_cap + 1):
        if residuals[k - 1] - residuals[k] >= threshold:
            chosen = k
    return results[chosen]


def exhaustive_oracle(F: np.ndarray, K: int) -> ChangePointResult:
    """Global optimum by enumerating every K-breakpoint placement.

    Test support only; refuses when the search space tops 10^6.
    """
    F = np.asarray(F, dtype=np.float64)
    l = F.shape[0]
    if not 0 <= K <= l - 1:
        raise ValueError(f"K must be in [0, {l - 1}], got {K}")
    if math.comb(l - 1, K) > ORACLE_PLACEMENT_LIMIT:
        raise ValueError("search space exceeds enumeration limit")
    cost = _SegmentCost(F)
    best_combo: tuple[int, ...] = ()
    best_cost = math.inf
    for combo in itertools.combinations(range(1, l), K):
        bounds = [0, *combo, l]
        total = 0.0
        for a, b in itertools.pairwise(bounds):
            total += cost.cost(a, b)
            if total >= best_cost:
                break
        if total < best_cost:
            best_cost = total
            best_combo = combo
    A = segment_means(F, best_combo)
    return ChangePointResult(best_combo, A, float(((F - A) ** 2).sum()),
                             len(best_combo), False)
