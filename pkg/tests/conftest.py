from __future__ import annotations

import json
from dataclasses import dataclass
from datetime import datetime
from pathlib import Path

import pytest

from trendgram.config import CorpusConfig
from trendgram.ingest import IngestReport, ingest_corpus
from trendgram.store import Snapshot, open_snapshot
from trendgram.synthetic import fixture_config, fixture_corpus_lines


@dataclass
class BuiltCorpus:
    dir: Path
    config: CorpusConfig
    lines: list[str]
    report: IngestReport
    snapshot: Snapshot


@pytest.fixture(scope="session")
def fixture_corpus(tmp_path_factory) -> BuiltCorpus:
    """The 200-document 1890-1920 fixture corpus, built once per run."""
    root = tmp_path_factory.mktemp("fixture-corpus")
    config = fixture_config()
    lines = fixture_corpus_lines()
    out = root / "fixture"
    report = ingest_corpus(lines, config, out)
    return BuiltCorpus(out, config, lines, report, open_snapshot(out))


def gappy_lines() -> list[str]:
    """Ten-year corpus with no documents in 1903-1905 (a 3-bucket gap)."""
    lines = []
    for i, year in enumerate(y for y in range(1900, 1910) if y not in (1903, 1904, 1905)):
        for j in range(2):
            text = "alpha beta gamma delta alpha beta alpha pine" + (" pine" * i)
            lines.append(json.dumps({
                "id": f"g-{year}-{j}",
                "date": f"{year}-06-0{j + 1}",
                "source": "Gap Gazette",
                "text": text,
            }))
    return lines


@pytest.fixture(scope="session")
def gappy_corpus(tmp_path_factory) -> BuiltCorpus:
    root = tmp_path_factory.mktemp("gappy-corpus")
    config = CorpusConfig(
        corpus_id="gappy",
        resolution="yearly",
        start=datetime(1900, 1, 1),
        end=datetime(1909, 12, 31),
        n_max=2,
    )
    lines = gappy_lines()
    out = root / "gappy"
    report = ingest_corpus(lines, config, out)
    return BuiltCorpus(out, config, lines, report, open_snapshot(out))


@pytest.fixture(scope="session")
def api_client(fixture_corpus, gappy_corpus):
    from fastapi.testclient import TestClient

    from trendgram.api import create_app

    app = create_app([fixture_corpus.dir, gappy_corpus.dir])
    with TestClient(app) as client:
        yield client


def pytest_terminal_summary(terminalreporter) -> None:
    """Echo the acceptance verdict lines after the normal test summary,
    where output capture cannot swallow them."""
    import sys

    module = sys.modules.get("test_acceptance")
    lines = getattr(module, "ACCEPTANCE_LINES", None) if module else None
    if lines:
        terminalreporter.write_sep("-", "acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
