/**
 * Drill-down panel: the corpus documents behind one plotted point.
 * Multi-term index series first offer a member-term picker, since
 * documents are indexed per term. Pages come straight from
 * /api/documents; a failed fetch leaves a retry control.
 */

import { ApiError, PlaygroundApi } from "./api.js";
import { groupMembers } from "./params.js";
import { DocumentsPage } from "./types.js";

const PAGE_SIZE = 10;

export class DocumentPanel {
  readonly root: HTMLElement;

  private readonly api: PlaygroundApi;
  private readonly title: HTMLElement;
  private readonly body: HTMLElement;

  private corpus = "";
  private bucketLabel = "";
  // Monotone counter so a late response for a superseded selection is dropped.
  private seq = 0;

  constructor(host: HTMLElement, api: PlaygroundApi) {
    this.api = api;
    this.root = document.createElement("aside");
    this.root.className = "doc-panel";
    this.root.hidden = true;

    const header = document.createElement("div");
    header.className = "doc-panel-header";
    this.title = document.createElement("h3");
    this.title.className = "doc-panel-title";
    const close = document.createElement("button");
    close.type = "button";
    close.className = "doc-panel-close";
    close.textContent = "×";
    close.addEventListener("click", () => this.close());
    header.append(this.title, close);

    this.body = document.createElement("div");
    this.body.className = "doc-panel-body";
    this.root.append(header, this.body);
    host.appendChild(this.root);
  }

  close(): void {
    this.seq++;
    this.root.hidden = true;
  }

  /** Open for one (series, bucket) selection; masked buckets hold no documents. */
  open(corpus: string, seriesLabel: string, bucketLabel: string, masked: boolean): void {
    this.seq++;
    this.root.hidden = false;
    this.corpus = corpus;
    this.bucketLabel = bucketLabel;
    this.title.textContent = `${seriesLabel} in ${bucketLabel}`;

    if (masked) {
      this.body.textContent = "";
      const note = document.createElement("p");
      note.className = "doc-empty";
      note.textContent = `no data in ${bucketLabel}`;
      this.body.appendChild(note);
      return;
    }

    const members = groupMembers(seriesLabel);
    if (members !== null && members.length > 1) {
      this.renderPicker(members);
      return;
    }
    this.load(members !== null ? members[0] : seriesLabel, 1);
  }

  private renderPicker(members: string[]): void {
    this.body.textContent = "";
    const prompt = document.createElement("p");
    prompt.className = "member-prompt";
    prompt.textContent = "documents are listed per term; pick one member of this index:";
    this.body.appendChild(prompt);
    const picker = document.createElement("div");
    picker.className = "member-picker";
    for (const member of members) {
      const button = document.createElement("button");
      button.type = "button";
      button.className = "member-term";
      button.textContent = member;
      button.addEventListener("click", () => this.load(member, 1));
      picker.appendChild(button);
    }
    this.body.appendChild(picker);
  }

  private load(term: string, page: number): void {
    const seq = ++this.seq;
    this.body.textContent = "";
    const loading = document.createElement("p");
    loading.className = "doc-loading";
    loading.textContent = "loading documents…";
    this.body.appendChild(loading);

    this.api.documents(this.corpus, term, this.bucketLabel, page, PAGE_SIZE).then(
      (docs) => {
        if (seq === this.seq) {
          this.renderPage(term, docs);
        }
      },
      (err: unknown) => {
        if (seq === this.seq) {
          this.renderFailure(term, page, err);
        }
      },
    );
  }

  private renderPage(term: string, docs: DocumentsPage): void {
    this.body.textContent = "";

    if (docs.total === 0) {
      const note = document.createElement("p");
      note.className = "doc-empty";
      note.textContent = `no documents match ${docs.ngram} in ${docs.bucket}`;
      this.body.appendChild(note);
      return;
    }

    const summary = document.createElement("p");
    summary.className = "doc-summary";
    summary.textContent =
      `${docs.total} matching documents` + (docs.truncated ? " (listing capped)" : "");
    this.body.appendChild(summary);

    const list = document.createElement("ul");
    list.className = "doc-list";
    for (const hit of docs.items) {
      const item = document.createElement("li");
      item.className = "doc-item";
      const head = document.createElement("div");
      head.className = "doc-head";
      const id = document.createElement("span");
      id.className = "doc-id";
      id.textContent = hit.doc_id;
      const source = document.createElement("span");
      source.className = "doc-source";
      source.textContent = hit.source;
      const date = document.createElement("span");
      date.className = "doc-date";
      date.textContent = hit.date;
      head.append(id, source, date);
      const snippet = document.createElement("p");
      snippet.className = "doc-snippet";
      snippet.textContent = hit.snippet;
      item.append(head, snippet);
      list.appendChild(item);
    }
    this.body.appendChild(list);

    const pages = Math.max(1, Math.ceil(docs.total / docs.page_size));
    const pager = document.createElement("div");
    pager.className = "doc-pager";
    const prev = document.createElement("button");
    prev.type = "button";
    prev.className = "docs-prev";
    prev.textContent = "previous";
    prev.disabled = docs.page <= 1;
    prev.addEventListener("click", () => this.load(term, docs.page - 1));
    const info = document.createElement("span");
    info.className = "docs-page-info";
    info.textContent = `page ${docs.page} of ${pages}`;
    const next = document.createElement("button");
    next.type = "button";
    next.className = "docs-next";
    next.textContent = "next";
    next.disabled = docs.page >= pages;
    next.addEventListener("click", () => this.load(term, docs.page + 1));
    pager.append(prev, info, next);
    this.body.appendChild(pager);
  }

  private renderFailure(term: string, page: number, err: unknown): void {
    this.body.textContent = "";
    const note = document.createElement("p");
    note.className = "doc-error";
    note.textContent =
      err instanceof ApiError ? err.message : "network error, could not load documents";
    this.body.appendChild(note);
    const retry = document.createElement("button");
    retry.type = "button";
    retry.className = "docs-retry";
    retry.textContent = "retry";
    retry.addEventListener("click", () => this.load(term, page));
    this.body.appendChild(retry);
  }
}
