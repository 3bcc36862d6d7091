#!/usr/bin/env python3
"""Recovery benchmark for the group change-point detector.

Plants two shared steps (heights +1 and +1) at one third and two
thirds of the timeline, sweeps the noise level, and reports how often
model selection recovers K = 2 and localizes both breaks within +-2
positions:

    python3 scripts/changepoint_benchmark.py --noise 0.05 0.1 0.2 0.4
"""

from __future__ import annotations

import argparse
import sys
import time

import numpy as np

from trendgram.changepoint import detect_group_changepoints
from trendgram.synthetic import step_matrix


def run_cell(length: int, series: int, sigma: float, runs: int,
             seed_base: int) -> tuple[float, float, float]:
    first, second = length // 3, 2 * length // 3
    chose_k2 = within = 0
    started = time.monotonic()
    for s in range(runs):
        rng = np.random.default_rng(seed_base + s)
        F = step_matrix(length, series, {first: 1.0, second: 1.0}, sigma, rng)
        result = detect_group_changepoints(F)
        if result.K == 2:
            chose_k2 += 1
            low, high = sorted(result.breakpoints)
            if abs(low - first) <= 2 and abs(high - second) <= 2:
                within += 1
    elapsed = (time.monotonic() - started) / runs
    return chose_k2 / runs, within / runs, elapsed


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--runs", type=int, default=100)
    parser.add_argument("--length", type=int, default=100)
    parser.add_argument("--series", type=int, default=3)
    parser.add_argument("--noise", type=float, nargs="+",
                        default=[0.05, 0.1, 0.2, 0.4])
    parser.add_argument("--seed", type=int, default=1000)
    args = parser.parse_args(argv)

    print(f"l={args.length} m={args.series} runs={args.runs} "
          f"steps at {args.length // 3} and {2 * args.length // 3}")
    print(f"{'sigma':>8} {'K=2':>8} {'within +-2':>12} {'ms/run':>8}")
    for sigma in args.noise:
        k2_rate, within_rate, per_run = run_cell(
            args.length, args.series, sigma, args.runs, args.seed)
        print(f"{sigma:>8.3f} {k2_rate:>8.2%} {within_rate:>12.2%} "
              f"{per_run * 1000:>8.1f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
