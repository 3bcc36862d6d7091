"""trendgram: time-bucketed n-gram trend statistics over dated corpora.

Layers, bottom to top:

- config:       corpus timeline and normalization settings
- ingest:       NDJSON corpus reading, tokenization, n-gram counting
- store:        immutable on-disk index with checksummed manifest
- series:       per-term scores, smoothing, confidence bands, indices
- changepoint:  group fused-lasso style multi-series segmentation
- pipeline:     query parsing and execution against a store snapshot
- api:          HTTP service exposing the pipeline
- cli:          command-line ingest / serve / query
"""

from trendgram.config import CorpusConfig, load_config, parse_config_text
from trendgram.ingest import IngestReport, ingest_corpus, tokenize
from trendgram.store import Snapshot, StoreBuilder, open_snapshot

__all__ = [
    "CorpusConfig",
    "IngestReport",
    "Snapshot",
    "StoreBuilder",
    "ingest_corpus",
    "load_config",
    "open_snapshot",
    "parse_config_text",
    "tokenize",
]

__version__ = "0.1.0"
