/**
 * End-to-end behavior of the playground against a recorded mock
 * service: request discipline for every toggle, document drill-down
 * from a plotted point, byte-exact CSV export, and the lockout rules
 * for the confidence-band control.
 */

import { afterEach, describe, expect, it, vi } from "vitest";

import {
  blobBytes,
  clickSvg,
  control,
  Harness,
  mount,
  paramsOf,
  requestsTo,
  selectValue,
  setQuery,
  settle,
  toggle,
} from "./harness.js";

afterEach(() => {
  vi.unstubAllGlobals();
  document.body.textContent = "";
});

/** Run one interaction and assert it produced exactly one series request. */
async function step(
  harness: Harness,
  act: () => void | Promise<void>,
  expected: Record<string, string>,
): Promise<void> {
  harness.requests.length = 0;
  await act();
  await settle();
  expect(harness.requests).toHaveLength(1);
  const series = requestsTo(harness, "/api/series");
  expect(series).toHaveLength(1);
  expect(paramsOf(series[0])).toEqual(expected);
}

describe("request discipline", () => {
  it("issues exactly one series request per control change, with parameters mirroring the toolbar", async () => {
    const harness = await mount();

    // Nothing is fetched until a query is applied.
    expect(requestsTo(harness, "/api/series")).toHaveLength(0);

    await step(harness, () => setQuery("hoopball"), {
      corpus: "fixture",
      q: "hoopball",
      score: "relative_frequency",
    });

    await step(harness, () => selectValue("score", "word_rank_score"), {
      corpus: "fixture",
      q: "hoopball",
      score: "word_rank_score",
    });

    await step(harness, () => selectValue("smooth", "5"), {
      corpus: "fixture",
      q: "hoopball",
      score: "word_rank_score",
      smooth: "5",
    });

    await step(harness, () => toggle("regression"), {
      corpus: "fixture",
      q: "hoopball",
      score: "word_rank_score",
      smooth: "5",
      regression: "1",
    });

    await step(harness, () => selectValue("changepoints", "auto"), {
      corpus: "fixture",
      q: "hoopball",
      score: "word_rank_score",
      smooth: "5",
      regression: "1",
      changepoints: "auto",
    });

    await step(harness, () => selectValue("changepoints", "2"), {
      corpus: "fixture",
      q: "hoopball",
      score: "word_rank_score",
      smooth: "5",
      regression: "1",
      changepoints: "2",
    });

    await step(harness, () => selectValue("range-from", "1895"), {
      corpus: "fixture",
      q: "hoopball",
      score: "word_rank_score",
      smooth: "5",
      regression: "1",
      changepoints: "2",
      from: "1895",
    });

    await step(harness, () => selectValue("range-to", "1910"), {
      corpus: "fixture",
      q: "hoopball",
      score: "word_rank_score",
      smooth: "5",
      regression: "1",
      changepoints: "2",
      from: "1895",
      to: "1910",
    });

    await step(
      harness,
      async () => {
        control<HTMLButtonElement>("#reset-zoom").click();
        await settle();
      },
      {
        corpus: "fixture",
        q: "hoopball",
        score: "word_rank_score",
        smooth: "5",
        regression: "1",
        changepoints: "2",
      },
    );

    await step(harness, () => toggle("standardize"), {
      corpus: "fixture",
      q: "hoopball",
      score: "word_rank_score",
      smooth: "5",
      standardize: "1",
      regression: "1",
      changepoints: "2",
    });

    await step(harness, () => toggle("standardize"), {
      corpus: "fixture",
      q: "hoopball",
      score: "word_rank_score",
      smooth: "5",
      regression: "1",
      changepoints: "2",
    });

    await step(harness, () => selectValue("score", "relative_frequency"), {
      corpus: "fixture",
      q: "hoopball",
      score: "relative_frequency",
      smooth: "5",
      regression: "1",
      changepoints: "2",
    });

    await step(harness, () => toggle("ci"), {
      corpus: "fixture",
      q: "hoopball",
      score: "relative_frequency",
      smooth: "5",
      ci: "1",
      regression: "1",
      changepoints: "2",
    });

    // Switching corpus keeps the toggles but clears the zoom window.
    await step(harness, () => selectValue("corpus", "gappy"), {
      corpus: "gappy",
      q: "hoopball",
      score: "relative_frequency",
      smooth: "5",
      ci: "1",
      regression: "1",
      changepoints: "2",
    });
  });
});

describe("document drill-down", () => {
  it("clicking a plotted point opens the panel with the documents behind that bucket", async () => {
    const harness = await mount();
    await setQuery("hoopball");

    harness.requests.length = 0;
    clickSvg('.point[data-series="0"][data-bucket="3"]');
    await settle();

    const docRequests = requestsTo(harness, "/api/documents");
    expect(harness.requests).toHaveLength(1);
    expect(docRequests).toHaveLength(1);
    expect(paramsOf(docRequests[0])).toEqual({
      corpus: "fixture",
      q: "hoopball",
      bucket: "1893",
      page: "1",
      page_size: "10",
    });

    const panel = control<HTMLElement>(".doc-panel");
    expect(panel.hidden).toBe(false);
    expect(control(".doc-panel-title").textContent).toBe("hoopball in 1893");
    const ids = Array.from(document.querySelectorAll(".doc-item .doc-id")).map(
      (node) => node.textContent,
    );
    expect(ids).toEqual(["doc-0003", "doc-0034"]);
    const snippets = Array.from(document.querySelectorAll(".doc-snippet")).map(
      (node) => node.textContent ?? "",
    );
    expect(snippets).toHaveLength(2);
    for (const snippet of snippets) {
      expect(snippet).toContain("hoopball");
    }
    expect(control(".doc-summary").textContent).toBe("2 matching documents");
  });

});

describe("csv export", () => {
  it("downloads the export body byte for byte and with the current query parameters", async () => {
    const csvBytes = new Uint8Array([
      0xef,
      0xbb,
      0xbf,
      ...new TextEncoder().encode("date,naïve ☃\n1895,0.002\n1896,\n"),
    ]);
    const harness = await mount({ "/api/export.csv": { bytes: csvBytes } });

    await setQuery("hoopball");
    await selectValue("smooth", "5");
    await selectValue("range-from", "1895");
    await selectValue("range-to", "1910");

    const seriesSoFar = requestsTo(harness, "/api/series");
    const lastSeries = seriesSoFar[seriesSoFar.length - 1];
    expect(lastSeries).toBeDefined();

    harness.requests.length = 0;
    control<HTMLButtonElement>("#export-csv").click();
    await settle();

    const exports = requestsTo(harness, "/api/export.csv");
    expect(harness.requests).toHaveLength(1);
    expect(exports).toHaveLength(1);
    // The export carries the same parameters as the chart on screen,
    // zoom window included.
    expect(paramsOf(exports[0])).toEqual(paramsOf(lastSeries));
    expect(paramsOf(exports[0]).from).toBe("1895");
    expect(paramsOf(exports[0]).to).toBe("1910");

    expect(harness.saved).toHaveLength(1);
    expect(harness.saved[0].name).toBe("fixture-trends.csv");
    const got = await blobBytes(harness.saved[0].blob);
    expect(Array.from(got)).toEqual(Array.from(csvBytes));
  });
});

describe("confidence-band lockout", () => {
  it("disables the control whenever standardization, a merged group, or a rank score is active", async () => {
    await mount();
    await setQuery("hoopball");
    const ciBox = control<HTMLInputElement>("#ci");
    const ciLabel = control<HTMLElement>("#ci-control");
    expect(ciBox.disabled).toBe(false);

    await toggle("standardize");
    expect(ciBox.disabled).toBe(true);
    expect(ciLabel.title).toContain("standardization");

    await toggle("standardize");
    expect(ciBox.disabled).toBe(false);

    await setQuery("[hoop ball + hoopball]");
    expect(ciBox.disabled).toBe(true);
    expect(ciLabel.title).toContain("single-term");

    await setQuery("hoopball");
    expect(ciBox.disabled).toBe(false);

    await selectValue("score", "word_rank_score");
    expect(ciBox.disabled).toBe(true);
    expect(ciLabel.title).toContain("relative frequency");

    await selectValue("score", "relative_frequency");
    expect(ciBox.disabled).toBe(false);
  });

  it("drops the band from the very request that turns standardization on", async () => {
    const harness = await mount();
    await setQuery("hoopball");
    await toggle("ci");
    const ciBox = control<HTMLInputElement>("#ci");
    expect(ciBox.checked).toBe(true);

    harness.requests.length = 0;
    await toggle("standardize");

    const series = requestsTo(harness, "/api/series");
    expect(harness.requests).toHaveLength(1);
    expect(series).toHaveLength(1);
    const params = paramsOf(series[0]);
    expect(params.standardize).toBe("1");
    expect(params).not.toHaveProperty("ci");
    expect(ciBox.checked).toBe(false);
    expect(ciBox.disabled).toBe(true);
  });
});
