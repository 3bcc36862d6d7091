"""Immutable on-disk n-gram store.

One directory per corpus.  After finalize the directory holds six
segment files plus a plain-text manifest recording the corpus config,
timeline length, and a sha256 checksum per segment (verified on open):

- keys.dat       sorted key table: order, n-gram, segment offsets
- series.dat     sparse (bucket, count, rank) runs per key
- stats.dat      fixed-width per-order per-bucket totals/distinct/harmonic
- postings.dat   per key, per bucket: doc row list (capped) + total
- docs.dat       one JSON document per line, sorted by doc id
- docs.idx       fixed-width (offset, length) per doc row

Segments are never mutated after finalize, so a snapshot is just an
open handle.  A `.building` marker file makes partially written state
unopenable until a fresh finalize completes.
"""

from __future__ import annotations

import hashlib
import json
import mmap
import struct
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator

import numpy as np

from trendgram.config import CorpusConfig
from trendgram.ingest import Document, tokenize
from trendgram.series import harmonic_number

POSTING_CAP = 10_000
SNIPPET_WIDTH = 240
FORMAT_VERSION = "1"

MANIFEST = "manifest.txt"
BUILDING_MARKER = ".building"
SEGMENT_FILES = ("keys.dat", "series.dat", "stats.dat", "postings.dat", "docs.dat", "docs.idx")

_SERIES_HEAD = struct.Struct("<I")     # run count
_SERIES_REC = struct.Struct("<IQI")    # bucket, count, rank
_STATS_REC = struct.Struct("<QQd")     # total, distinct, harmonic
_POST_HEAD = struct.Struct("<I")       # bucket-entry count
_POST_BUCKET = struct.Struct("<IQIB")  # bucket, total hits, kept, truncated
_POST_DOC = struct.Struct("<I")        # doc row
_DOC_IDX = struct.Struct("<QI")        # byte offset, byte length


class StoreError(Exception):
    """Base class for store faults."""


class StoreStateError(StoreError):
    """Store is not in the state the operation requires."""


class StoreCorruptError(StoreError):
    """A segment failed checksum verification."""


def dense_ranks(counts: list[int]) -> dict[int, int]:
    """Map each distinct count to its dense rank (most frequent = 1)."""
    return {c: i for i, c in enumerate(sorted(set(counts), reverse=True), start=1)}


@dataclass(frozen=True)
class CountsSeries:
    ngram: str
    corpus_id: str
    order: int
    counts: np.ndarray  # int64, length l
    ranks: np.ndarray   # int64, length l; zero-count buckets carry D(t)+1
    unseen: bool


@dataclass(frozen=True)
class BucketStats:
    bucket: int
    n_total: tuple[int, ...]     # per order 1..n_max
    distinct: tuple[int, ...]    # D(t) per order
    harmonic: tuple[float, ...]  # H_{n(t)} per order, 0.0 for empty
    empty: bool


@dataclass(frozen=True)
class DocumentHit:
    doc_id: str
    date: str
    source: str
    snippet: str


@dataclass(frozen=True)
class DocumentPage:
    total: int
    truncated: bool
    page: int
    page_size: int
    items: list[DocumentHit]


def make_snippet(tokens: list[str], ngram_tokens: list[str]) -> str:
    """Fixed-width window of normalized text centered on the first hit."""
    text = " ".join(tokens)
    n = len(ngram_tokens)
    offset = 0
    for i in range(len(tokens) - n + 1):
        if tokens[i : i + n] == ngram_tokens:
            offset = len(" ".join(tokens[:i])) + (1 if i else 0)
            break
    span = len(" ".join(ngram_tokens))
    mid = offset + span // 2
    start = max(0, min(mid - SNIPPET_WIDTH // 2, len(text) - SNIPPET_WIDTH))
    return text[start : start + SNIPPET_WIDTH]


class StoreBuilder:
    """Exclusive writer; accumulates counts, writes segments on finish."""

    def __init__(self, config: CorpusConfig, out_dir) -> None:
        self.config = config
        self.dir = Path(out_dir)
        self.dir.mkdir(parents=True, exist_ok=True)
        # Any prior finalized state becomes unreachable until we finish.
        (self.dir / BUILDING_MARKER).write_text("ingest in progress\n", encoding="utf-8")
        (self.dir / MANIFEST).unlink(missing_ok=True)
        self._docs: list[Document] = []
        self._counts: dict[tuple[int, str], Counter] = {}
        self._postings: dict[tuple[int, str], dict[int, list]] = {}
        self._finished = False

    def add_document(self, doc: Document, ngram_counts: Counter) -> None:
        if self._finished:
            raise StoreStateError("builder already finished")
        row = len(self._docs)
        self._docs.append(doc)
        for ngram_tuple, count in ngram_counts.items():
            key = (len(ngram_tuple), " ".join(ngram_tuple))
            bucket_counts = self._counts.get(key)
            if bucket_counts is None:
                bucket_counts = self._counts[key] = Counter()
            bucket_counts[doc.bucket] += count
            per_bucket = self._postings.get(key)
            if per_bucket is None:
                per_bucket = self._postings[key] = {}
            acc = per_bucket.get(doc.bucket)
            if acc is None:
                acc = per_bucket[doc.bucket] = [0, []]
            acc[0] += 1
            if len(acc[1]) < POSTING_CAP:
                acc[1].append(row)

    def finish(self) -> None:
        if self._finished:
            raise StoreStateError("builder already finished")
        cfg = self.config
        l = cfg.buckets

        order_by_id = sorted(range(len(self._docs)), key=lambda r: self._docs[r].doc_id)
        row_of = {old: new for new, old in enumerate(order_by_id)}

        doc_index: list[bytes] = []
        with open(self.dir / "docs.dat", "wb") as fh:
            offset = 0
            for old in order_by_id:
                doc = self._docs[old]
                payload = {
                    "id": doc.doc_id,
                    "date": doc.date,
                    "source": doc.source,
                    "text": doc.text,
                    "bucket": doc.bucket,
                }
                line = json.dumps(payload, ensure_ascii=False, sort_keys=True,
                                  separators=(",", ":")).encode("utf-8") + b"\n"
                fh.write(line)
                doc_index.append(_DOC_IDX.pack(offset, len(line)))
                offset += len(line)
        (self.dir / "docs.idx").write_bytes(b"".join(doc_index))

        # Per-(order, bucket) count lists drive totals, D(t), and ranks.
        per_bucket_counts: dict[tuple[int, int], list[int]] = {}
        for (order, _), bucket_counts in self._counts.items():
            for bucket, count in bucket_counts.items():
                per_bucket_counts.setdefault((order, bucket), []).append(count)

        totals = np.zeros((cfg.n_max, l), dtype=np.uint64)
        distinct = np.zeros((cfg.n_max, l), dtype=np.uint64)
        harmonic = np.zeros((cfg.n_max, l), dtype=np.float64)
        rank_maps: dict[tuple[int, int], dict[int, int]] = {}
        for (order, bucket), counts in per_bucket_counts.items():
            totals[order - 1, bucket] = sum(counts)
            rank_maps[(order, bucket)] = dense_ranks(counts)
            distinct[order - 1, bucket] = len(rank_maps[(order, bucket)])
        for order in range(1, cfg.n_max + 1):
            for bucket in range(l):
                total = int(totals[order - 1, bucket])
                if total >= 1:
                    harmonic[order - 1, bucket] = harmonic_number(total)

        stats_records = []
        for order in range(1, cfg.n_max + 1):
            for bucket in range(l):
                stats_records.append(_STATS_REC.pack(
                    int(totals[order - 1, bucket]),
                    int(distinct[order - 1, bucket]),
                    float(harmonic[order - 1, bucket]),
                ))
        (self.dir / "stats.dat").write_bytes(b"".join(stats_records))

        keys = sorted(self._counts)
        key_lines: list[str] = []
        with open(self.dir / "series.dat", "wb") as series_fh, \
                open(self.dir / "postings.dat", "wb") as post_fh:
            series_off = post_off = 0
            for order, ngram in keys:
                bucket_counts = self._counts[(order, ngram)]
                runs = sorted(bucket_counts.items())
                chunk = [_SERIES_HEAD.pack(len(runs))]
                for bucket, count in runs:
                    rank = rank_maps[(order, bucket)][count]
                    chunk.append(_SERIES_REC.pack(bucket, count, rank))
                blob = b"".join(chunk)
                series_fh.write(blob)

                per_bucket = self._postings[(order, ngram)]
                entries = sorted(per_bucket.items())
                pchunk = [_POST_HEAD.pack(len(entries))]
                for bucket, (total, rows) in entries:
                    kept = sorted(row_of[r] for r in rows)
                    pchunk.append(_POST_BUCKET.pack(bucket, total, len(kept),
                                                    1 if len(kept) < total else 0))
                    pchunk.extend(_POST_DOC.pack(r) for r in kept)
                pblob = b"".join(pchunk)
                post_fh.write(pblob)

                key_lines.append(f"{order}\t{ngram}\t{series_off}\t{len(blob)}"
                                 f"\t{post_off}\t{len(pblob)}\n")
                series_off += len(blob)
                post_off += len(pblob)
        (self.dir / "keys.dat").write_bytes("".join(key_lines).encode("utf-8"))

        manifest: dict[str, str] = {f"config.{k}": v for k, v in cfg.to_mapping().items()}
        manifest["format"] = FORMAT_VERSION
        manifest["buckets"] = str(l)
        manifest["n_docs"] = str(len(self._docs))
        manifest["n_keys"] = str(len(keys))
        for name in SEGMENT_FILES:
            digest = hashlib.sha256((self.dir / name).read_bytes()).hexdigest()
            manifest[f"checksum.{name}"] = digest
        lines = "".join(f"{k}={manifest[k]}\n" for k in sorted(manifest))
        (self.dir / MANIFEST).write_text(lines, encoding="utf-8")
        (self.dir / BUILDING_MARKER).unlink()
        self._finished = True


def _read_manifest(directory: Path) -> dict[str, str]:
    fields: dict[str, str] = {}
    for line in (directory / MANIFEST).read_text(encoding="utf-8").splitlines():
        if line:
            key, _, value = line.partition("=")
            fields[key] = value
    return fields


class Snapshot:
    """Read handle over one finalized, immutable corpus directory."""

    def __init__(self, directory) -> None:
        self.dir = Path(directory)
        if (self.dir / BUILDING_MARKER).exists():
            raise StoreStateError(f"{self.dir}: ingest in progress or aborted")
        if not (self.dir / MANIFEST).exists():
            raise StoreStateError(f"{self.dir}: no manifest; not a finalized corpus")
        manifest = _read_manifest(self.dir)
        for name in SEGMENT_FILES:
            want = manifest.get(f"checksum.{name}")
            path = self.dir / name
            if want is None or not path.exists():
                raise StoreCorruptError(f"{self.dir}: missing segment {name}")
            got = hashlib.sha256(path.read_bytes()).hexdigest()
            if got != want:
                raise StoreCorruptError(f"{self.dir}: checksum mismatch in {name}")
        self.config = CorpusConfig.from_mapping({
            k[len("config."):]: v for k, v in manifest.items() if k.startswith("config.")
        })
        self.corpus_id = self.config.corpus_id
        self.buckets = int(manifest["buckets"])
        self.n_docs = int(manifest["n_docs"])
        if self.buckets != self.config.buckets:
            raise StoreCorruptError(f"{self.dir}: manifest bucket count disagrees with config")

        self._series = self._map(self.dir / "series.dat")
        self._postings = self._map(self.dir / "postings.dat")
        self._docs = self._map(self.dir / "docs.dat")
        self._doc_idx = self._map(self.dir / "docs.idx")

        self._keys: dict[tuple[int, str], tuple[int, int, int, int]] = {}
        for line in (self.dir / "keys.dat").read_text(encoding="utf-8").splitlines():
            order, ngram, so, sl, po, pl = line.split("\t")
            self._keys[(int(order), ngram)] = (int(so), int(sl), int(po), int(pl))

        n_max, l = self.config.n_max, self.buckets
        raw = (self.dir / "stats.dat").read_bytes()
        stats_dtype = np.dtype([("total", "<u8"), ("distinct", "<u8"), ("harmonic", "<f8")])
        table = np.frombuffer(raw, dtype=stats_dtype)
        if table.shape[0] != n_max * l:
            raise StoreCorruptError(f"{self.dir}: stats.dat has wrong record count")
        table = table.reshape(n_max, l)
        self.totals = table["total"].astype(np.int64)
        self.distinct = table["distinct"].astype(np.int64)
        self.harmonic = table["harmonic"].astype(np.float64)

    @staticmethod
    def _map(path: Path):
        with open(path, "rb") as fh:
            try:
                return mmap.mmap(fh.fileno(), 0, access=mmap.ACCESS_READ)
            except ValueError:
                return b""  # cannot mmap an empty file

    def order_stats(self, order: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(totals, distinct, harmonic) arrays over the timeline for one order."""
        if not 1 <= order <= self.config.n_max:
            raise ValueError(f"order {order} outside [1, {self.config.n_max}]")
        return self.totals[order - 1], self.distinct[order - 1], self.harmonic[order - 1]

    def get_series(self, ngram: str) -> CountsSeries:
        tokens = ngram.split(" ")
        order = len(tokens)
        if not 1 <= order <= self.config.n_max:
            raise ValueError(f"n-gram order {order} outside [1, {self.config.n_max}]")
        l = self.buckets
        counts = np.zeros(l, dtype=np.int64)
        ranks = self.distinct[order - 1] + 1  # k for zero frequency, per bucket
        entry = self._keys.get((order, ngram))
        if entry is None:
            return CountsSeries(ngram, self.corpus_id, order, counts, ranks, unseen=True)
        so, sl, _, _ = entry
        blob = self._series[so : so + sl]
        (n_runs,) = _SERIES_HEAD.unpack_from(blob, 0)
        pos = _SERIES_HEAD.size
        ranks = ranks.copy()
        for _ in range(n_runs):
            bucket, count, rank = _SERIES_REC.unpack_from(blob, pos)
            pos += _SERIES_REC.size
            counts[bucket] = count
            ranks[bucket] = rank
        return CountsSeries(ngram, self.corpus_id, order, counts, ranks, unseen=False)

    def get_bucket_stats(self, bucket: int) -> BucketStats:
        if not 0 <= bucket < self.buckets:
            raise IndexError(f"bucket {bucket} out of range [0, {self.buckets})")
        n_total = tuple(int(x) for x in self.totals[:, bucket])
        return BucketStats(
            bucket=bucket,
            n_total=n_total,
            distinct=tuple(int(x) for x in self.distinct[:, bucket]),
            harmonic=tuple(float(x) for x in self.harmonic[:, bucket]),
            empty=n_total[0] == 0,
        )

    def iter_ngrams(self, order: int) -> Iterator[str]:
        for key_order, ngram in self._keys:
            if key_order == order:
                yield ngram

    def _read_doc(self, row: int) -> dict:
        offset, length = _DOC_IDX.unpack_from(self._doc_idx, row * _DOC_IDX.size)
        return json.loads(bytes(self._docs[offset : offset + length]))

    def list_documents(self, ngram: str, bucket: int, page: int = 1,
                       page_size: int = 20) -> DocumentPage:
        if not 0 <= bucket < self.buckets:
            raise IndexError(f"bucket {bucket} out of range [0, {self.buckets})")
        if page < 1 or page_size < 1:
            raise ValueError("page and page_size are 1-based positives")
        tokens = ngram.split(" ")
        entry = self._keys.get((len(tokens), ngram))
        empty = DocumentPage(total=0, truncated=False, page=page,
                             page_size=page_size, items=[])
        if entry is None:
            return empty
        _, _, po, pl = entry
        blob = self._postings[po : po + pl]
        (n_buckets,) = _POST_HEAD.unpack_from(blob, 0)
        pos = _POST_HEAD.size
        for _ in range(n_buckets):
            b, total, kept, trunc = _POST_BUCKET.unpack_from(blob, pos)
            pos += _POST_BUCKET.size
            if b != bucket:
                pos += kept * _POST_DOC.size
                continue
            lo = (page - 1) * page_size
            hi = min(lo + page_size, kept)
            items: list[DocumentHit] = []
            for j in range(lo, hi):
                (row,) = _POST_DOC.unpack_from(blob, pos + j * _POST_DOC.size)
                doc = self._read_doc(row)
                doc_tokens = tokenize(doc["text"], self.config.normalization)
                items.append(DocumentHit(
                    doc_id=doc["id"],
                    date=doc["date"],
                    source=doc["source"],
                    snippet=make_snippet(doc_tokens, tokens),
                ))
            return DocumentPage(total=total, truncated=bool(trunc), page=page,
                                page_size=page_size, items=items)
        return empty

    def timeline(self) -> list[str]:
        return self.config.timeline()


def open_snapshot(directory) -> Snapshot:
    """Open a finalized corpus directory, verifying segment checksums."""
    return Snapshot(directory)
