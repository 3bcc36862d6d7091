/**
 * Wire formats of the trendgram HTTP service and the client-side
 * chart state that drives requests against it.
 */

/** One corpus as listed by GET /api/corpora. */
export interface CorpusDescriptor {
  id: string;
  title: string;
  resolution: string;
  n_max: number;
  buckets: number;
  timeline: string[];
  documents: number;
}

/** One plotted series inside a /api/series response. */
export interface SeriesPayload {
  label: string;
  kind: string;
  applied: string[];
  /** Per-bucket score; null marks a masked (empty) bucket. */
  values: (number | null)[];
  ci_low: (number | null)[] | null;
  ci_high: (number | null)[] | null;
  degenerate: boolean;
  unseen: boolean;
}

export interface FitPayload {
  slope: number;
  intercept: number;
  stderr: number;
}

export interface ChangePointPayload {
  k: number;
  /** Bucket labels of the detected level shifts, within the response timeline. */
  breakpoints: string[];
  positions: number[];
  residual: number;
  shortfall: boolean;
}

/** GET /api/series response body. */
export interface SeriesResult {
  corpus: string;
  score: string;
  timeline: string[];
  series: SeriesPayload[];
  fits: (FitPayload | null)[] | null;
  changepoints: ChangePointPayload | null;
  warnings: string[];
}

export interface DocumentHit {
  doc_id: string;
  date: string;
  source: string;
  snippet: string;
}

/** GET /api/documents response body. */
export interface DocumentsPage {
  corpus: string;
  ngram: string;
  bucket: string;
  total: number;
  truncated: boolean;
  page: number;
  page_size: number;
  items: DocumentHit[];
}

export type ScoreKind = "relative_frequency" | "word_rank_score";

/**
 * Everything the toolbar controls. The chart never derives numbers from
 * this; it only decides which request to issue next.
 */
export interface ChartState {
  corpus: string;
  /** Raw query text, e.g. "cat,dog" or "[basket ball + basketball]". */
  query: string;
  score: ScoreKind;
  /** Odd smoothing window, or null for no smoothing. */
  smooth: number | null;
  ci: boolean;
  standardize: boolean;
  regression: boolean;
  changepoints: "off" | "auto" | number;
  /** Zoom window as bucket labels; null means the timeline edge. */
  rangeFrom: string | null;
  rangeTo: string | null;
  /** Point picked for document drill-down, or null. */
  selected: { series: number; bucket: number } | null;
}
