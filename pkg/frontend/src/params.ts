/**
 * Pure chart-state logic: which requests a state produces and which
 * control combinations the service would reject.
 */

import { ChartState, ScoreKind } from "./types.js";

export const DEFAULT_SCORE: ScoreKind = "relative_frequency";

export function initialState(corpus: string): ChartState {
  return {
    corpus,
    query: "",
    score: DEFAULT_SCORE,
    smooth: null,
    ci: false,
    standardize: false,
    regression: false,
    changepoints: "off",
    rangeFrom: null,
    rangeTo: null,
    selected: null,
  };
}

/** True when any bracketed chunk of the query merges two or more terms. */
export function queryHasMultiTermGroup(query: string): boolean {
  let depth = 0;
  let sawPlus = false;
  for (const ch of query) {
    if (ch === "[") {
      depth += 1;
      sawPlus = false;
    } else if (ch === "]") {
      if (depth > 0 && sawPlus) {
        return true;
      }
      depth = Math.max(0, depth - 1);
    } else if (ch === "+" && depth > 0) {
      sawPlus = true;
    }
  }
  return false;
}

/**
 * Why the confidence-band control is locked, or null when it is allowed.
 * Mirrors the service's own validation so the page never issues a
 * request the service would reject.
 */
export function ciDisabledReason(state: ChartState): string | null {
  if (state.standardize) {
    return "confidence bands apply to raw proportions; turn off standardization first";
  }
  if (queryHasMultiTermGroup(state.query)) {
    return "confidence bands apply to single-term series, not merged indices";
  }
  if (state.score !== DEFAULT_SCORE) {
    return "confidence bands are defined for relative frequency only";
  }
  return null;
}

/** Drop the confidence-band flag when the rest of the state forbids it. */
export function admissible(state: ChartState): ChartState {
  if (state.ci && ciDisabledReason(state) !== null) {
    return { ...state, ci: false };
  }
  return state;
}

/**
 * Query-string pairs for /api/series and /api/export.csv, in a fixed
 * order. Inactive toggles are omitted entirely so the request reads
 * exactly like the toolbar.
 */
export function buildSeriesParams(state: ChartState): [string, string][] {
  const pairs: [string, string][] = [
    ["corpus", state.corpus],
    ["q", state.query],
    ["score", state.score],
  ];
  if (state.smooth !== null) {
    pairs.push(["smooth", String(state.smooth)]);
  }
  if (state.ci) {
    pairs.push(["ci", "1"]);
  }
  if (state.standardize) {
    pairs.push(["standardize", "1"]);
  }
  if (state.regression) {
    pairs.push(["regression", "1"]);
  }
  if (state.changepoints !== "off") {
    const value = state.changepoints === "auto" ? "auto" : String(state.changepoints);
    pairs.push(["changepoints", value]);
  }
  if (state.rangeFrom !== null) {
    pairs.push(["from", state.rangeFrom]);
  }
  if (state.rangeTo !== null) {
    pairs.push(["to", state.rangeTo]);
  }
  return pairs;
}

export function encodeParams(pairs: [string, string][]): string {
  return pairs
    .map(([key, value]) => `${encodeURIComponent(key)}=${encodeURIComponent(value)}`)
    .join("&");
}

/**
 * Member terms of a merged-group label like "[a + b]", or null for a
 * plain single-term label. The service renders group labels in exactly
 * this shape, so splitting on " + " is lossless.
 */
export function groupMembers(label: string): string[] | null {
  if (!label.startsWith("[") || !label.endsWith("]")) {
    return null;
  }
  const parts = label
    .slice(1, -1)
    .split(" + ")
    .map((part) => part.trim())
    .filter((part) => part.length > 0);
  return parts.length > 0 ? parts : null;
}
