"""HTTP query service over finalized corpus snapshots.

The service owns no mutable state: every response is a pure function
of the query string and the immutable snapshots loaded at startup.
JSON bodies are serialized with sorted keys and no whitespace so that
repeated identical calls produce identical bytes.
"""

from __future__ import annotations

import json
import logging
import time
from pathlib import Path
from typing import Iterable, Mapping

from fastapi import FastAPI, Request
from fastapi.responses import Response

from trendgram.pipeline import (
    InvalidCombinationError,
    QueryError,
    UnknownCorpusError,
    execute,
    normalize_term,
    parse_query,
    render_csv,
    result_to_jsonable,
)
from trendgram.store import Snapshot, StoreError, open_snapshot

log = logging.getLogger("trendgram.api")

SERIES_PARAMS = frozenset(
    {"corpus", "q", "score", "smooth", "ci", "standardize", "regression",
     "changepoints", "from", "to"}
)
DOCUMENT_PARAMS = frozenset({"corpus", "q", "bucket", "page", "page_size"})
MAX_PAGE_SIZE = 200


def to_json_bytes(payload) -> bytes:
    return json.dumps(payload, sort_keys=True, separators=(",", ":")).encode("utf-8")


def _json_response(payload, status: int = 200) -> Response:
    return Response(content=to_json_bytes(payload), status_code=status,
                    media_type="application/json")


def _error(status: int, code: str, message: str) -> Response:
    return _json_response({"error": {"code": code, "message": message}}, status)


def load_snapshots(corpus_dirs: Iterable) -> dict[str, Snapshot]:
    registry: dict[str, Snapshot] = {}
    for directory in corpus_dirs:
        snapshot = open_snapshot(directory)
        if snapshot.corpus_id in registry:
            raise StoreError(f"duplicate corpus id {snapshot.corpus_id!r} in {directory}")
        registry[snapshot.corpus_id] = snapshot
    return registry


def _descriptor(snapshot: Snapshot) -> dict:
    cfg = snapshot.config
    return {
        "id": cfg.corpus_id,
        "title": cfg.title,
        "resolution": cfg.resolution,
        "n_max": cfg.n_max,
        "buckets": snapshot.buckets,
        "timeline": snapshot.timeline(),
        "documents": snapshot.n_docs,
    }


def create_app(corpus_dirs: Iterable) -> FastAPI:
    """Build the service over the given finalized corpus directories."""
    registry = load_snapshots(corpus_dirs)
    app = FastAPI(title="trendgram", docs_url=None, redoc_url=None)
    app.state.registry = registry

    def resolve(params: Mapping[str, str]) -> Snapshot:
        corpus_id = params.get("corpus", "").strip()
        if not corpus_id:
            raise QueryError("missing required parameter: corpus")
        snapshot = registry.get(corpus_id)
        if snapshot is None:
            raise UnknownCorpusError(corpus_id)
        return snapshot

    def check_params(params: Mapping[str, str], allowed: frozenset) -> None:
        unknown = sorted(set(params) - allowed)
        if unknown:
            raise QueryError(f"unknown parameters: {', '.join(unknown)}")

    @app.middleware("http")
    async def request_log(request: Request, call_next):
        started = time.monotonic()
        response = await call_next(request)
        log.info(json.dumps({
            "method": request.method,
            "path": request.url.path,
            "query": str(request.url.query),
            "status": response.status_code,
            "ms": round((time.monotonic() - started) * 1000.0, 2),
        }, sort_keys=True))
        return response

    @app.get("/api/corpora")
    def corpora() -> Response:
        payload = [_descriptor(registry[cid]) for cid in sorted(registry)]
        return _json_response(payload)

    def run_series_query(request: Request):
        params = dict(request.query_params)
        check_params(params, SERIES_PARAMS)
        snapshot = resolve(params)
        query = parse_query(params, snapshot.config)
        return execute(query, snapshot)

    @app.get("/api/series")
    def series(request: Request) -> Response:
        try:
            result = run_series_query(request)
        except (QueryError, UnknownCorpusError) as exc:
            return _error(exc.status, exc.code, exc.message)
        return _json_response(result_to_jsonable(result))

    @app.get("/api/export.csv")
    def export_csv(request: Request) -> Response:
        try:
            result = run_series_query(request)
        except (QueryError, UnknownCorpusError) as exc:
            return _error(exc.status, exc.code, exc.message)
        return Response(content=render_csv(result),
                        media_type="text/csv; charset=utf-8")

    @app.get("/api/documents")
    def documents(request: Request) -> Response:
        params = dict(request.query_params)
        try:
            check_params(params, DOCUMENT_PARAMS)
            snapshot = resolve(params)
            raw_term = params.get("q", "")
            term = normalize_term(raw_term, snapshot.config)
            raw_bucket = params.get("bucket", "").strip()
            if not raw_bucket:
                raise QueryError("missing required parameter: bucket")
            # Bucket labels win over raw indices: on a yearly corpus
            # "1893" must mean the year, not bucket number 1893.
            timeline = snapshot.timeline()
            if raw_bucket in timeline:
                bucket = timeline.index(raw_bucket)
            else:
                try:
                    bucket = int(raw_bucket)
                except ValueError:
                    raise QueryError(f"unknown bucket label {raw_bucket!r}") from None
            if not 0 <= bucket < snapshot.buckets:
                raise QueryError(f"bucket {bucket} outside [0, {snapshot.buckets})")
            try:
                page = int(params.get("page", "1"))
                page_size = int(params.get("page_size", "20"))
            except ValueError as exc:
                raise QueryError("page and page_size must be integers") from exc
            if page < 1 or not 1 <= page_size <= MAX_PAGE_SIZE:
                raise QueryError(
                    f"page must be >= 1 and page_size in [1, {MAX_PAGE_SIZE}]"
                )
            hits = snapshot.list_documents(term, bucket, page, page_size)
        except (QueryError, UnknownCorpusError) as exc:
            return _error(exc.status, exc.code, exc.message)
        return _json_response({
            "corpus": snapshot.corpus_id,
            "ngram": term,
            "bucket": snapshot.config.bucket_label(bucket),
            "total": hits.total,
            "truncated": hits.truncated,
            "page": hits.page,
            "page_size": hits.page_size,
            "items": [
                {"doc_id": h.doc_id, "date": h.date, "source": h.source,
                 "snippet": h.snippet}
                for h in hits.items
            ],
        })

    return app
