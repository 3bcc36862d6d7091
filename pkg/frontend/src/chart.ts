/**
 * SVG line chart for series results: one line per series with legend,
 * confidence bands, regression overlays, vertical change-point markers,
 * and gaps at masked buckets. Clicking a point (or a bucket column)
 * reports the selection for document drill-down; dragging across
 * buckets reports a zoom range.
 *
 * The chart is a pure view over one response: every plotted number was
 * provided by the service.
 */

import { SeriesResult } from "./types.js";

export interface ChartCallbacks {
  onPointClick(series: number, bucket: number): void;
  onRangeSelect(fromLabel: string, toLabel: string): void;
}

export const CHART_WIDTH = 860;
export const CHART_HEIGHT = 380;

const MARGIN = { top: 18, right: 18, bottom: 36, left: 70 };
const INNER_W = CHART_WIDTH - MARGIN.left - MARGIN.right;
const INNER_H = CHART_HEIGHT - MARGIN.top - MARGIN.bottom;

const PALETTE = ["#2563eb", "#dc2626", "#059669", "#9333ea", "#ea580c", "#0891b2"];
const SVG_NS = "http://www.w3.org/2000/svg";

let clipSequence = 0;

function svgEl<K extends keyof SVGElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
): SVGElementTagNameMap[K] {
  const node = document.createElementNS(SVG_NS, tag);
  for (const [key, value] of Object.entries(attrs)) {
    node.setAttribute(key, value);
  }
  return node;
}

function tickText(value: number): string {
  // toPrecision then re-parse so 0.039400 prints as 0.0394 and 1e-07 stays short
  return String(Number(value.toPrecision(4)));
}

export class TrendChart {
  readonly root: HTMLElement;

  private readonly callbacks: ChartCallbacks;
  private readonly plotHost: HTMLElement;
  private readonly legend: HTMLElement;
  private readonly fitCaptions: HTMLElement;
  private svg: SVGSVGElement | null = null;
  private result: SeriesResult | null = null;

  // Drag-zoom state: anchor bucket and the live preview rectangle.
  private dragAnchor: number | null = null;
  private dragPreview: SVGRectElement | null = null;

  constructor(host: HTMLElement, callbacks: ChartCallbacks) {
    this.callbacks = callbacks;
    this.root = document.createElement("div");
    this.root.className = "trend-chart";
    this.plotHost = document.createElement("div");
    this.plotHost.className = "trend-plot";
    this.legend = document.createElement("div");
    this.legend.className = "trend-legend";
    this.fitCaptions = document.createElement("div");
    this.fitCaptions.className = "trend-fits";
    this.root.append(this.plotHost, this.legend, this.fitCaptions);
    host.appendChild(this.root);
  }

  get width(): number {
    return CHART_WIDTH;
  }

  get height(): number {
    return CHART_HEIGHT;
  }

  /** Serialized SVG of the current plot, for figure export. */
  svgMarkup(): string | null {
    return this.svg === null ? null : this.svg.outerHTML;
  }

  render(result: SeriesResult | null): void {
    this.result = result;
    this.plotHost.textContent = "";
    this.legend.textContent = "";
    this.fitCaptions.textContent = "";
    this.svg = null;
    this.dragAnchor = null;
    this.dragPreview = null;

    if (result === null) {
      const empty = document.createElement("p");
      empty.className = "chart-placeholder";
      empty.textContent = "enter one or more terms to plot their trend";
      this.plotHost.appendChild(empty);
      return;
    }

    this.renderLegend(result);
    this.renderFits(result);
    this.renderSvg(result);
  }

  private renderLegend(result: SeriesResult): void {
    result.series.forEach((series, i) => {
      const item = document.createElement("span");
      item.className = "legend-item";
      const swatch = document.createElement("span");
      swatch.className = "legend-swatch";
      swatch.style.background = PALETTE[i % PALETTE.length];
      const label = document.createElement("span");
      label.className = "legend-label";
      label.textContent = series.label;
      item.append(swatch, label);
      this.legend.appendChild(item);
    });
  }

  private renderFits(result: SeriesResult): void {
    if (result.fits === null) {
      return;
    }
    result.fits.forEach((fit, i) => {
      const series = result.series[i];
      const caption = document.createElement("div");
      caption.className = "fit-caption";
      if (fit === null) {
        caption.textContent = `${series.label}: not enough points for a trend line`;
      } else {
        const fmt = (x: number) => String(Number(x.toPrecision(6)));
        caption.textContent =
          `${series.label}: gradient ${fmt(fit.slope)}, ` +
          `intercept ${fmt(fit.intercept)}, stderr ${fmt(fit.stderr)}`;
      }
      this.fitCaptions.appendChild(caption);
    });
  }

  private renderSvg(result: SeriesResult): void {
    const n = result.timeline.length;
    const svg = svgEl("svg", {
      class: "trend-svg",
      viewBox: `0 0 ${CHART_WIDTH} ${CHART_HEIGHT}`,
      width: String(CHART_WIDTH),
      height: String(CHART_HEIGHT),
    });
    this.svg = svg;
    this.plotHost.appendChild(svg);

    const domain = this.valueDomain(result);
    if (n === 0 || domain === null) {
      svg.appendChild(
        svgEl("rect", {
          x: "0",
          y: "0",
          width: String(CHART_WIDTH),
          height: String(CHART_HEIGHT),
          fill: "#fafafa",
        }),
      );
      const message = svgEl("text", {
        class: "chart-empty",
        x: String(CHART_WIDTH / 2),
        y: String(CHART_HEIGHT / 2),
        "text-anchor": "middle",
        fill: "#6b7280",
      });
      message.textContent = "no data in range";
      svg.appendChild(message);
      return;
    }

    const [lo, hi] = domain;
    const step = INNER_W / Math.max(1, n - 1);
    const x = (t: number) => (n === 1 ? MARGIN.left + INNER_W / 2 : MARGIN.left + t * step);
    const y = (v: number) => MARGIN.top + (hi - v) * (INNER_H / (hi - lo));

    const clipId = `plot-clip-${clipSequence++}`;
    const defs = svgEl("defs");
    const clip = svgEl("clipPath", { id: clipId });
    clip.appendChild(
      svgEl("rect", {
        x: String(MARGIN.left),
        y: String(MARGIN.top),
        width: String(INNER_W),
        height: String(INNER_H),
      }),
    );
    defs.appendChild(clip);
    svg.appendChild(defs);

    svg.appendChild(
      svgEl("rect", {
        class: "plot-background",
        x: String(MARGIN.left),
        y: String(MARGIN.top),
        width: String(INNER_W),
        height: String(INNER_H),
        fill: "#fcfcfd",
        stroke: "#d1d5db",
      }),
    );

    this.renderAxes(svg, result.timeline, lo, hi, x, y);
    this.renderBucketColumns(svg, result, n, x, step);

    result.series.forEach((series, i) => {
      const color = PALETTE[i % PALETTE.length];
      this.renderBand(svg, series.ci_low, series.ci_high, x, y, color);
    });
    this.renderChangePoints(svg, result, x);
    result.series.forEach((series, i) => {
      const color = PALETTE[i % PALETTE.length];
      this.renderLine(svg, i, series.values, x, y, color);
    });
    this.renderFitLines(svg, result, n, x, y, clipId);
    result.series.forEach((series, i) => {
      const color = PALETTE[i % PALETTE.length];
      this.renderPoints(svg, i, series.values, x, y, color);
    });

    this.attachDragZoom(svg, result, n);
  }

  /** Plot domain over every value and band edge; null when all masked. */
  private valueDomain(result: SeriesResult): [number, number] | null {
    let lo = Infinity;
    let hi = -Infinity;
    const see = (v: number | null) => {
      if (v !== null && Number.isFinite(v)) {
        lo = Math.min(lo, v);
        hi = Math.max(hi, v);
      }
    };
    for (const series of result.series) {
      series.values.forEach(see);
      if (series.ci_low !== null) {
        series.ci_low.forEach(see);
      }
      if (series.ci_high !== null) {
        series.ci_high.forEach(see);
      }
    }
    if (lo === Infinity) {
      return null;
    }
    if (lo === hi) {
      const pad = Math.abs(hi) || 1;
      return [lo - pad, hi + pad];
    }
    const pad = (hi - lo) * 0.06;
    return [lo - pad, hi + pad];
  }

  private renderAxes(
    svg: SVGSVGElement,
    timeline: string[],
    lo: number,
    hi: number,
    x: (t: number) => number,
    y: (v: number) => number,
  ): void {
    const n = timeline.length;
    const stride = Math.max(1, Math.ceil(n / 7));
    for (let t = 0; t < n; t += stride) {
      const label = svgEl("text", {
        class: "x-tick",
        x: String(x(t)),
        y: String(CHART_HEIGHT - MARGIN.bottom + 18),
        "text-anchor": "middle",
        "font-size": "11",
        fill: "#374151",
      });
      label.textContent = timeline[t];
      svg.appendChild(label);
    }
    const steps = 4;
    for (let i = 0; i <= steps; i++) {
      const v = lo + ((hi - lo) * i) / steps;
      svg.appendChild(
        svgEl("line", {
          class: "grid-line",
          x1: String(MARGIN.left),
          x2: String(MARGIN.left + INNER_W),
          y1: String(y(v)),
          y2: String(y(v)),
          stroke: "#e5e7eb",
          "pointer-events": "none",
        }),
      );
      const label = svgEl("text", {
        class: "y-tick",
        x: String(MARGIN.left - 8),
        y: String(y(v) + 4),
        "text-anchor": "end",
        "font-size": "11",
        fill: "#374151",
      });
      label.textContent = tickText(v);
      svg.appendChild(label);
    }
  }

  /**
   * One transparent hit column per bucket, beneath the points. Points
   * are the precise selector; the column is a coarse fallback that also
   * lets masked buckets be inspected. It resolves to the first series
   * that has data at the bucket, or series 0 when all are masked.
   */
  private renderBucketColumns(
    svg: SVGSVGElement,
    result: SeriesResult,
    n: number,
    x: (t: number) => number,
    step: number,
  ): void {
    if (result.series.length === 0) {
      return;
    }
    const half = (n === 1 ? INNER_W : step) / 2;
    for (let t = 0; t < n; t++) {
      const left = Math.max(MARGIN.left, x(t) - half);
      const right = Math.min(MARGIN.left + INNER_W, x(t) + half);
      const rect = svgEl("rect", {
        class: "bucket-hit",
        "data-bucket": String(t),
        x: String(left),
        y: String(MARGIN.top),
        width: String(Math.max(1, right - left)),
        height: String(INNER_H),
        fill: "transparent",
      });
      rect.addEventListener("click", () => {
        const r = this.result;
        if (r === null || r.series.length === 0) {
          return;
        }
        let s = r.series.findIndex((series) => series.values[t] !== null);
        if (s < 0) {
          s = 0;
        }
        this.callbacks.onPointClick(s, t);
      });
      svg.appendChild(rect);
    }
  }

  private renderBand(
    svg: SVGSVGElement,
    low: (number | null)[] | null,
    high: (number | null)[] | null,
    x: (t: number) => number,
    y: (v: number) => number,
    color: string,
  ): void {
    if (low === null || high === null) {
      return;
    }
    // Contiguous unmasked runs each become one closed band polygon.
    for (const [start, end] of unmaskedRuns(low, high)) {
      if (end - start < 1) {
        continue;
      }
      const forward: string[] = [];
      const backward: string[] = [];
      for (let t = start; t <= end; t++) {
        forward.push(`${x(t)},${y(high[t] as number)}`);
        backward.push(`${x(t)},${y(low[t] as number)}`);
      }
      backward.reverse();
      svg.appendChild(
        svgEl("polygon", {
          class: "ci-band",
          points: [...forward, ...backward].join(" "),
          fill: color,
          "fill-opacity": "0.14",
          stroke: "none",
          "pointer-events": "none",
        }),
      );
    }
  }

  private renderLine(
    svg: SVGSVGElement,
    seriesIndex: number,
    values: (number | null)[],
    x: (t: number) => number,
    y: (v: number) => number,
    color: string,
  ): void {
    for (const [start, end] of unmaskedRuns(values)) {
      if (end - start < 1) {
        continue; // isolated points get a circle only
      }
      const points: string[] = [];
      for (let t = start; t <= end; t++) {
        points.push(`${t === start ? "M" : "L"}${x(t)} ${y(values[t] as number)}`);
      }
      svg.appendChild(
        svgEl("path", {
          class: "series-line",
          "data-series": String(seriesIndex),
          d: points.join(" "),
          fill: "none",
          stroke: color,
          "stroke-width": "2",
          "pointer-events": "none",
        }),
      );
    }
  }

  private renderPoints(
    svg: SVGSVGElement,
    seriesIndex: number,
    values: (number | null)[],
    x: (t: number) => number,
    y: (v: number) => number,
    color: string,
  ): void {
    values.forEach((value, t) => {
      if (value === null) {
        return;
      }
      const circle = svgEl("circle", {
        class: "point",
        "data-series": String(seriesIndex),
        "data-bucket": String(t),
        cx: String(x(t)),
        cy: String(y(value)),
        r: "3.5",
        fill: color,
        cursor: "pointer",
      });
      circle.addEventListener("click", (event) => {
        event.stopPropagation();
        this.callbacks.onPointClick(seriesIndex, t);
      });
      svg.appendChild(circle);
    });
  }

  private renderChangePoints(svg: SVGSVGElement, result: SeriesResult, x: (t: number) => number): void {
    if (result.changepoints === null) {
      return;
    }
    for (const label of result.changepoints.breakpoints) {
      const t = result.timeline.indexOf(label);
      if (t < 0) {
        continue;
      }
      svg.appendChild(
        svgEl("line", {
          class: "changepoint-marker",
          "data-label": label,
          x1: String(x(t)),
          x2: String(x(t)),
          y1: String(MARGIN.top),
          y2: String(MARGIN.top + INNER_H),
          stroke: "#111827",
          "stroke-dasharray": "5 4",
          "stroke-width": "1.5",
          "pointer-events": "none",
        }),
      );
    }
  }

  private renderFitLines(
    svg: SVGSVGElement,
    result: SeriesResult,
    n: number,
    x: (t: number) => number,
    y: (v: number) => number,
    clipId: string,
  ): void {
    if (result.fits === null || n < 2) {
      return;
    }
    result.fits.forEach((fit, i) => {
      if (fit === null) {
        return;
      }
      const color = PALETTE[i % PALETTE.length];
      svg.appendChild(
        svgEl("line", {
          class: "fit-line",
          "data-series": String(i),
          x1: String(x(0)),
          y1: String(y(fit.intercept)),
          x2: String(x(n - 1)),
          y2: String(y(fit.slope * (n - 1) + fit.intercept)),
          stroke: color,
          "stroke-width": "1.5",
          "stroke-dasharray": "7 4",
          opacity: "0.75",
          "clip-path": `url(#${clipId})`,
          "pointer-events": "none",
        }),
      );
    });
  }

  /**
   * Drag across buckets to zoom: the selection is reported as a pair of
   * bucket labels and the server is re-queried with from/to, so
   * change points and fits always reflect the visible window. A plain
   * click (no horizontal movement) falls through to point selection.
   */
  private attachDragZoom(svg: SVGSVGElement, result: SeriesResult, n: number): void {
    const bucketAt = (clientX: number): number | null => {
      const rect = svg.getBoundingClientRect();
      if (rect.width <= 0 || n < 2) {
        return null;
      }
      const px = ((clientX - rect.left) / rect.width) * CHART_WIDTH;
      const step = INNER_W / (n - 1);
      const t = Math.round((px - MARGIN.left) / step);
      return Math.min(n - 1, Math.max(0, t));
    };

    svg.addEventListener("pointerdown", (event) => {
      this.dragAnchor = bucketAt(event.clientX);
    });
    svg.addEventListener("pointermove", (event) => {
      if (this.dragAnchor === null) {
        return;
      }
      const current = bucketAt(event.clientX);
      if (current === null || current === this.dragAnchor) {
        this.clearDragPreview();
        return;
      }
      const [a, b] = [Math.min(this.dragAnchor, current), Math.max(this.dragAnchor, current)];
      this.showDragPreview(svg, result, a, b, n);
    });
    const finish = (event: PointerEvent) => {
      const anchor = this.dragAnchor;
      this.dragAnchor = null;
      this.clearDragPreview();
      if (anchor === null) {
        return;
      }
      const released = bucketAt(event.clientX);
      if (released === null || released === anchor) {
        return;
      }
      const [a, b] = [Math.min(anchor, released), Math.max(anchor, released)];
      this.callbacks.onRangeSelect(result.timeline[a], result.timeline[b]);
    };
    svg.addEventListener("pointerup", finish);
    svg.addEventListener("pointerleave", () => {
      this.dragAnchor = null;
      this.clearDragPreview();
    });
  }

  private showDragPreview(
    svg: SVGSVGElement,
    result: SeriesResult,
    a: number,
    b: number,
    n: number,
  ): void {
    const step = INNER_W / Math.max(1, n - 1);
    const left = MARGIN.left + a * step;
    const width = (b - a) * step;
    if (this.dragPreview === null) {
      this.dragPreview = svgEl("rect", {
        class: "zoom-preview",
        y: String(MARGIN.top),
        height: String(INNER_H),
        fill: "#2563eb",
        "fill-opacity": "0.12",
        "pointer-events": "none",
      });
      svg.appendChild(this.dragPreview);
    }
    this.dragPreview.setAttribute("x", String(left));
    this.dragPreview.setAttribute("width", String(Math.max(1, width)));
  }

  private clearDragPreview(): void {
    if (this.dragPreview !== null) {
      this.dragPreview.remove();
      this.dragPreview = null;
    }
  }
}

/** Contiguous index runs where every given array is non-null. */
function unmaskedRuns(...arrays: (number | null)[][]): [number, number][] {
  const n = arrays[0].length;
  const runs: [number, number][] = [];
  let start: number | null = null;
  for (let t = 0; t <= n; t++) {
    const live = t < n && arrays.every((arr) => arr[t] !== null);
    if (live && start === null) {
      start = t;
    } else if (!live && start !== null) {
      runs.push([start, t - 1]);
      start = null;
    }
  }
  return runs;
}
