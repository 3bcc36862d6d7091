/**
 * The playground page: a toolbar of query controls, the trend chart,
 * dismissible banners, and the document drill-down panel.
 *
 * Request discipline: every control change applies one state patch and
 * issues exactly one /api/series request whose parameters mirror the
 * new state. Responses carry a sequence number; anything superseded by
 * a newer request is discarded, so the chart always shows the latest
 * state even when responses arrive out of order.
 */

import { ApiError, PlaygroundApi } from "./api.js";
import { TrendChart } from "./chart.js";
import { DocumentPanel } from "./documents.js";
import { rasterizeSvg, saveBlob } from "./export.js";
import {
  admissible,
  buildSeriesParams,
  ciDisabledReason,
  initialState,
} from "./params.js";
import { ChartState, CorpusDescriptor, ScoreKind, SeriesResult } from "./types.js";

const SMOOTH_CHOICES = [3, 5, 7, 9];
const CHANGEPOINT_CHOICES = [1, 2, 3, 4, 5];
const CI_HINT = "Wilson confidence band around the plotted proportion";

export interface PlaygroundOptions {
  api?: PlaygroundApi;
  /** Download seam; defaults to a real anchor-click download. */
  saveFile?: (name: string, blob: Blob) => void;
  /** Figure rasterizer seam; defaults to the canvas implementation. */
  rasterize?: (svgMarkup: string, width: number, height: number) => Promise<Blob>;
}

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className !== undefined) {
    node.className = className;
  }
  if (text !== undefined) {
    node.textContent = text;
  }
  return node;
}

function labeled(text: string, control: HTMLElement): HTMLLabelElement {
  const wrap = el("label", "control");
  wrap.append(el("span", "control-name", text), control);
  return wrap;
}

function describeError(err: unknown): string {
  if (err instanceof ApiError) {
    return err.message;
  }
  if (err instanceof Error) {
    return `network error: ${err.message}`;
  }
  return String(err);
}

export class Playground {
  readonly root: HTMLElement;

  private readonly api: PlaygroundApi;
  private readonly saveFile: (name: string, blob: Blob) => void;
  private readonly rasterize: (markup: string, width: number, height: number) => Promise<Blob>;

  private corpora: CorpusDescriptor[] = [];
  private state: ChartState = initialState("");
  private lastResult: SeriesResult | null = null;
  private seq = 0;
  private exportReady = false;

  private readonly banners: HTMLElement;
  private readonly toolbar: HTMLElement;
  private chart!: TrendChart;
  private panel!: DocumentPanel;

  private corpusSel!: HTMLSelectElement;
  private queryInput!: HTMLInputElement;
  private goButton!: HTMLButtonElement;
  private scoreSel!: HTMLSelectElement;
  private smoothSel!: HTMLSelectElement;
  private ciBox!: HTMLInputElement;
  private ciLabel!: HTMLLabelElement;
  private standardizeBox!: HTMLInputElement;
  private regressionBox!: HTMLInputElement;
  private cpSel!: HTMLSelectElement;
  private fromSel!: HTMLSelectElement;
  private toSel!: HTMLSelectElement;
  private resetZoomButton!: HTMLButtonElement;
  private csvButton!: HTMLButtonElement;
  private figureButton!: HTMLButtonElement;

  // Which corpus the range selects are currently populated for.
  private rangeCorpus: string | null = null;

  constructor(host: HTMLElement, options: PlaygroundOptions = {}) {
    this.api = options.api ?? new PlaygroundApi();
    this.saveFile = options.saveFile ?? saveBlob;
    this.rasterize = options.rasterize ?? rasterizeSvg;
    this.root = el("div", "playground");
    this.banners = el("div", "banners");
    this.toolbar = el("div", "toolbar");
    this.root.append(this.banners, this.toolbar);
    host.appendChild(this.root);
  }

  /** Load the corpus list and build the page. */
  async start(): Promise<void> {
    let corpora: CorpusDescriptor[];
    try {
      corpora = await this.api.corpora();
    } catch (err) {
      this.showError(describeError(err));
      return;
    }
    if (corpora.length === 0) {
      this.showError("the service exposes no corpora");
      return;
    }
    this.corpora = corpora;
    this.state = initialState(corpora[0].id);
    this.buildToolbar();

    const stage = el("div", "stage");
    this.chart = new TrendChart(stage, {
      onPointClick: (series, bucket) => this.openDocuments(series, bucket),
      onRangeSelect: (fromLabel, toLabel) =>
        this.apply({ rangeFrom: fromLabel, rangeTo: toLabel }),
    });
    this.panel = new DocumentPanel(stage, this.api);
    this.root.appendChild(stage);

    this.chart.render(null);
    this.syncControls();
  }

  private buildToolbar(): void {
    this.corpusSel = el("select");
    this.corpusSel.id = "corpus";
    for (const corpus of this.corpora) {
      const option = el("option", undefined, corpus.title);
      option.value = corpus.id;
      this.corpusSel.appendChild(option);
    }
    this.corpusSel.addEventListener("change", () =>
      this.apply({ corpus: this.corpusSel.value, rangeFrom: null, rangeTo: null, selected: null }),
    );

    this.queryInput = el("input");
    this.queryInput.id = "query";
    this.queryInput.type = "text";
    this.queryInput.placeholder = "terms, e.g. cat,dog or [basket ball + basketball]";
    this.queryInput.addEventListener("keydown", (event) => {
      if (event.key === "Enter") {
        this.apply({ query: this.queryInput.value.trim() });
      }
    });
    this.goButton = el("button", undefined, "plot");
    this.goButton.id = "go";
    this.goButton.type = "button";
    this.goButton.addEventListener("click", () =>
      this.apply({ query: this.queryInput.value.trim() }),
    );

    this.scoreSel = el("select");
    this.scoreSel.id = "score";
    for (const [value, text] of [
      ["relative_frequency", "relative frequency"],
      ["word_rank_score", "word rank score"],
    ] as const) {
      const option = el("option", undefined, text);
      option.value = value;
      this.scoreSel.appendChild(option);
    }
    this.scoreSel.addEventListener("change", () =>
      this.apply({ score: this.scoreSel.value as ScoreKind }),
    );

    this.smoothSel = el("select");
    this.smoothSel.id = "smooth";
    const off = el("option", undefined, "off");
    off.value = "";
    this.smoothSel.appendChild(off);
    for (const window of SMOOTH_CHOICES) {
      const option = el("option", undefined, `${window} buckets`);
      option.value = String(window);
      this.smoothSel.appendChild(option);
    }
    this.smoothSel.addEventListener("change", () =>
      this.apply({ smooth: this.smoothSel.value === "" ? null : Number(this.smoothSel.value) }),
    );

    this.ciBox = el("input");
    this.ciBox.id = "ci";
    this.ciBox.type = "checkbox";
    this.ciBox.addEventListener("change", () => this.apply({ ci: this.ciBox.checked }));

    this.standardizeBox = el("input");
    this.standardizeBox.id = "standardize";
    this.standardizeBox.type = "checkbox";
    this.standardizeBox.addEventListener("change", () =>
      this.apply({ standardize: this.standardizeBox.checked }),
    );

    this.regressionBox = el("input");
    this.regressionBox.id = "regression";
    this.regressionBox.type = "checkbox";
    this.regressionBox.addEventListener("change", () =>
      this.apply({ regression: this.regressionBox.checked }),
    );

    this.cpSel = el("select");
    this.cpSel.id = "changepoints";
    for (const value of ["off", "auto", ...CHANGEPOINT_CHOICES.map(String)]) {
      const option = el("option", undefined, value);
      option.value = value;
      this.cpSel.appendChild(option);
    }
    this.cpSel.addEventListener("change", () => {
      const value = this.cpSel.value;
      this.apply({
        changepoints: value === "off" ? "off" : value === "auto" ? "auto" : Number(value),
      });
    });

    this.fromSel = el("select");
    this.fromSel.id = "range-from";
    this.toSel = el("select");
    this.toSel.id = "range-to";
    this.fromSel.addEventListener("change", () => this.applyRange("from", this.fromSel.value));
    this.toSel.addEventListener("change", () => this.applyRange("to", this.toSel.value));
    this.resetZoomButton = el("button", undefined, "reset zoom");
    this.resetZoomButton.id = "reset-zoom";
    this.resetZoomButton.type = "button";
    this.resetZoomButton.addEventListener("click", () =>
      this.apply({ rangeFrom: null, rangeTo: null }),
    );

    this.csvButton = el("button", undefined, "download csv");
    this.csvButton.id = "export-csv";
    this.csvButton.type = "button";
    this.csvButton.addEventListener("click", () => void this.downloadCsv());
    this.figureButton = el("button", undefined, "download figure");
    this.figureButton.id = "export-figure";
    this.figureButton.type = "button";
    this.figureButton.addEventListener("click", () => void this.downloadFigure());

    this.ciLabel = labeled("confidence band", this.ciBox);
    this.ciLabel.id = "ci-control";
    this.toolbar.append(
      labeled("corpus", this.corpusSel),
      labeled("terms", this.queryInput),
      this.goButton,
      labeled("score", this.scoreSel),
      labeled("smoothing", this.smoothSel),
      this.ciLabel,
      labeled("standardize", this.standardizeBox),
      labeled("trend line", this.regressionBox),
      labeled("change points", this.cpSel),
      labeled("from", this.fromSel),
      labeled("to", this.toSel),
      this.resetZoomButton,
      this.csvButton,
      this.figureButton,
    );
  }

  /** Range endpoints snap together instead of producing an empty window. */
  private applyRange(which: "from" | "to", raw: string): void {
    const value = raw === "" ? null : raw;
    const patch: Partial<ChartState> =
      which === "from" ? { rangeFrom: value } : { rangeTo: value };
    if (value !== null) {
      const timeline = this.descriptor().timeline;
      const index = timeline.indexOf(value);
      const other = which === "from" ? this.state.rangeTo : this.state.rangeFrom;
      if (other !== null) {
        const otherIndex = timeline.indexOf(other);
        if (which === "from" && index > otherIndex) {
          patch.rangeTo = value;
        }
        if (which === "to" && index < otherIndex) {
          patch.rangeFrom = value;
        }
      }
    }
    this.apply(patch);
  }

  private descriptor(): CorpusDescriptor {
    const found = this.corpora.find((corpus) => corpus.id === this.state.corpus);
    if (found === undefined) {
      throw new Error(`unknown corpus in state: ${this.state.corpus}`);
    }
    return found;
  }

  /** One state patch, one control sync, at most one series request. */
  private apply(patch: Partial<ChartState>): void {
    this.state = admissible({ ...this.state, ...patch });
    this.syncControls();
    if (this.state.query === "") {
      this.seq++; // orphan any in-flight response
      this.lastResult = null;
      this.exportReady = false;
      this.chart.render(null);
      this.setWarnings([]);
      this.syncExportButtons();
      return;
    }
    void this.runQuery();
  }

  private async runQuery(): Promise<void> {
    const seq = ++this.seq;
    this.exportReady = false;
    this.syncExportButtons();
    const pairs = buildSeriesParams(this.state);
    let result: SeriesResult;
    try {
      result = await this.api.series(pairs);
    } catch (err) {
      if (seq !== this.seq) {
        return; // superseded while in flight
      }
      this.showError(describeError(err));
      return;
    }
    if (seq !== this.seq) {
      return;
    }
    this.lastResult = result;
    this.exportReady = true;
    this.clearError();
    this.setWarnings(result.warnings);
    this.chart.render(result);
    this.syncExportButtons();
  }

  private openDocuments(series: number, bucket: number): void {
    const result = this.lastResult;
    if (result === null || series >= result.series.length) {
      return;
    }
    this.state = { ...this.state, selected: { series, bucket } };
    const payload = result.series[series];
    this.panel.open(
      result.corpus,
      payload.label,
      result.timeline[bucket],
      payload.values[bucket] === null,
    );
  }

  private async downloadCsv(): Promise<void> {
    if (!this.exportReady) {
      return;
    }
    const pairs = buildSeriesParams(this.state);
    try {
      const bytes = await this.api.exportCsv(pairs);
      this.saveFile(`${this.state.corpus}-trends.csv`, new Blob([bytes], { type: "text/csv" }));
    } catch (err) {
      this.showError(describeError(err));
    }
  }

  private async downloadFigure(): Promise<void> {
    if (!this.exportReady) {
      return;
    }
    const markup = this.chart.svgMarkup();
    if (markup === null) {
      return;
    }
    try {
      const blob = await this.rasterize(markup, this.chart.width, this.chart.height);
      this.saveFile(`${this.state.corpus}-trends.png`, blob);
    } catch (err) {
      this.showError(describeError(err));
    }
  }

  private syncControls(): void {
    this.corpusSel.value = this.state.corpus;
    this.queryInput.value = this.state.query;
    this.scoreSel.value = this.state.score;
    this.smoothSel.value = this.state.smooth === null ? "" : String(this.state.smooth);

    const reason = ciDisabledReason(this.state);
    this.ciBox.checked = this.state.ci;
    this.ciBox.disabled = reason !== null;
    this.ciLabel.title = reason ?? CI_HINT;

    this.standardizeBox.checked = this.state.standardize;
    this.regressionBox.checked = this.state.regression;
    this.cpSel.value = this.state.changepoints === "off" ? "off"
      : this.state.changepoints === "auto" ? "auto"
      : String(this.state.changepoints);

    if (this.rangeCorpus !== this.state.corpus) {
      this.populateRangeSelects();
      this.rangeCorpus = this.state.corpus;
    }
    this.fromSel.value = this.state.rangeFrom ?? "";
    this.toSel.value = this.state.rangeTo ?? "";

    this.syncExportButtons();
  }

  /** Zoom endpoints only ever offer the corpus timeline, so the range
   *  invariant holds by construction. */
  private populateRangeSelects(): void {
    const timeline = this.descriptor().timeline;
    for (const [select, edge] of [
      [this.fromSel, "start"],
      [this.toSel, "end"],
    ] as const) {
      select.textContent = "";
      const edgeOption = el("option", undefined, `(${edge})`);
      edgeOption.value = "";
      select.appendChild(edgeOption);
      for (const label of timeline) {
        const option = el("option", undefined, label);
        option.value = label;
        select.appendChild(option);
      }
    }
  }

  private syncExportButtons(): void {
    this.csvButton.disabled = !this.exportReady;
    this.figureButton.disabled = !this.exportReady;
  }

  private banner(kind: "error" | "warning", text: string): HTMLElement {
    const banner = el("div", `banner banner-${kind}`);
    banner.appendChild(el("span", "banner-text", text));
    const dismiss = el("button", "banner-dismiss", "×");
    dismiss.type = "button";
    dismiss.addEventListener("click", () => banner.remove());
    banner.appendChild(dismiss);
    return banner;
  }

  /** One error banner at a time: a newer failure replaces the old one. */
  private showError(text: string): void {
    this.clearError();
    this.banners.appendChild(this.banner("error", text));
  }

  private clearError(): void {
    for (const node of Array.from(this.banners.querySelectorAll(".banner-error"))) {
      node.remove();
    }
  }

  /** Warning banners always reflect the latest response. */
  private setWarnings(warnings: string[]): void {
    for (const node of Array.from(this.banners.querySelectorAll(".banner-warning"))) {
      node.remove();
    }
    for (const text of warnings) {
      this.banners.appendChild(this.banner("warning", text));
    }
  }
}
