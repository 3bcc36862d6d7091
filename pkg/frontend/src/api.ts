/**
 * Thin typed client for the trendgram HTTP service. All numbers shown
 * anywhere in the page come from these responses; the client never
 * recomputes statistics.
 */

import { CorpusDescriptor, DocumentsPage, SeriesResult } from "./types.js";
import { encodeParams } from "./params.js";

/** Error body produced by the service, carried with its HTTP status. */
export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

export class PlaygroundApi {
  constructor(private readonly baseUrl: string = "") {}

  async corpora(): Promise<CorpusDescriptor[]> {
    return await this.getJson<CorpusDescriptor[]>("/api/corpora");
  }

  async series(pairs: [string, string][]): Promise<SeriesResult> {
    return await this.getJson<SeriesResult>(`/api/series?${encodeParams(pairs)}`);
  }

  /** Raw body bytes so a download can mirror the response exactly. */
  async exportCsv(pairs: [string, string][]): Promise<Uint8Array<ArrayBuffer>> {
    const res = await fetch(`${this.baseUrl}/api/export.csv?${encodeParams(pairs)}`);
    if (!res.ok) {
      throw await this.asError(res);
    }
    return new Uint8Array(await res.arrayBuffer());
  }

  async documents(
    corpus: string,
    term: string,
    bucket: string,
    page: number,
    pageSize: number,
  ): Promise<DocumentsPage> {
    const pairs: [string, string][] = [
      ["corpus", corpus],
      ["q", term],
      ["bucket", bucket],
      ["page", String(page)],
      ["page_size", String(pageSize)],
    ];
    return await this.getJson<DocumentsPage>(`/api/documents?${encodeParams(pairs)}`);
  }

  private async getJson<T>(path: string): Promise<T> {
    const res = await fetch(this.baseUrl + path);
    if (!res.ok) {
      throw await this.asError(res);
    }
    return (await res.json()) as T;
  }

  private async asError(res: Response): Promise<ApiError> {
    let code = "http_error";
    let message = `request failed with status ${res.status}`;
    try {
      const body = (await res.json()) as { error?: { code?: string; message?: string } };
      if (body && body.error) {
        code = body.error.code ?? code;
        message = body.error.message ?? message;
      }
    } catch {
      // not a JSON error body; keep the generic message
    }
    return new ApiError(res.status, code, message);
  }
}
