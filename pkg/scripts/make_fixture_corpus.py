#!/usr/bin/env python3
"""Generate the synthetic demo corpus and optionally build its store.

Writes docs.ndjson and corpus.conf into --out.  With --build, also
ingests them into --out/store so the directory can be served directly:

    python3 scripts/make_fixture_corpus.py --out demo --build
    trendgram serve --corpora demo/store
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from trendgram.config import CorpusConfig
from trendgram.ingest import ingest_corpus
from trendgram.synthetic import fixture_config, fixture_corpus_lines


def config_text(config: CorpusConfig) -> str:
    return "".join(f"{key}={value}\n" for key, value in config.to_mapping().items())


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", required=True, help="directory to write into")
    parser.add_argument("--seed", type=int, default=7,
                        help="generator seed (default 7, the test fixture)")
    parser.add_argument("--build", action="store_true",
                        help="also ingest into <out>/store")
    args = parser.parse_args(argv)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    config = fixture_config()
    lines = fixture_corpus_lines(seed=args.seed)
    (out / "docs.ndjson").write_text("\n".join(lines) + "\n", encoding="utf-8")
    (out / "corpus.conf").write_text(config_text(config), encoding="utf-8")
    print(f"wrote {len(lines)} documents to {out / 'docs.ndjson'}")

    if args.build:
        report = ingest_corpus(iter(lines), config, out / "store")
        print(report.summary())
    return 0


if __name__ == "__main__":
    sys.exit(main())
