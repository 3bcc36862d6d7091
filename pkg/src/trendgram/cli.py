"""Command-line entry points: ingest a corpus, serve the API, query offline.

Exit codes: 0 success, 1 runtime failure, 2 usage error.  The query
subcommand runs the same pipeline as the HTTP service; its --json and
--csv outputs are byte-identical to the corresponding API responses.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from trendgram.api import to_json_bytes
from trendgram.config import ConfigError, load_config
from trendgram.ingest import ingest_corpus
from trendgram.pipeline import (
    QueryError,
    execute,
    parse_query,
    render_csv,
    result_to_jsonable,
)
from trendgram.store import StoreError, open_snapshot

USAGE_EXIT = 2
RUNTIME_EXIT = 1


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="trendgram",
        description="Time-bucketed n-gram trend statistics over dated corpora.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    ingest = sub.add_parser("ingest", help="build a corpus store from NDJSON documents")
    ingest.add_argument("--config", required=True, help="key=value corpus config file")
    ingest.add_argument("--input", required=True, nargs="+",
                        help="NDJSON document files, one record per line")
    ingest.add_argument("--out", required=True, help="corpus directory to write")

    serve = sub.add_parser("serve", help="serve the HTTP API over finalized corpora")
    serve.add_argument("--corpora", required=True, nargs="+",
                       help="finalized corpus directories")
    serve.add_argument("--listen", default="127.0.0.1:8000", help="host:port")

    query = sub.add_parser("query", help="run one query against a corpus directory")
    query.add_argument("--corpus", required=True, help="finalized corpus directory")
    query.add_argument("q", help="terms, e.g. 'cat,dog' or '[basket ball + basketball]'")
    query.add_argument("--score", choices=("relative_frequency", "word_rank_score"),
                       default=None)
    query.add_argument("--smooth", type=int, default=None, metavar="W",
                       help="odd moving-average window")
    query.add_argument("--ci", action="store_true", help="Wilson confidence band")
    query.add_argument("--standardize", action="store_true")
    query.add_argument("--regression", action="store_true")
    query.add_argument("--changepoints", nargs="?", const="auto", default=None,
                       metavar="K", help="detect change-points (count K or auto)")
    query.add_argument("--from", dest="range_from", default=None, metavar="DATE")
    query.add_argument("--to", dest="range_to", default=None, metavar="DATE")
    query.add_argument("--csv", default=None, metavar="PATH",
                       help="write CSV to PATH ('-' for stdout)")
    query.add_argument("--json", action="store_true",
                       help="print the API JSON body instead of a table")
    return parser


def _cmd_ingest(args: argparse.Namespace) -> int:
    try:
        config = load_config(args.config)
    except (OSError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return RUNTIME_EXIT

    def lines():
        for path in args.input:
            with open(path, "r", encoding="utf-8") as fh:
                yield from fh

    try:
        report = ingest_corpus(lines(), config, Path(args.out))
    except (OSError, StoreError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return RUNTIME_EXIT
    print(report.summary())
    return 0


def _cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from trendgram.api import create_app

    host, _, port_text = args.listen.partition(":")
    try:
        port = int(port_text) if port_text else 8000
    except ValueError:
        print(f"error: bad --listen value {args.listen!r}", file=sys.stderr)
        return USAGE_EXIT
    logging.basicConfig(level=logging.INFO, stream=sys.stdout, format="%(message)s")
    try:
        app = create_app([Path(p) for p in args.corpora])
    except StoreError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return RUNTIME_EXIT
    uvicorn.run(app, host=host or "127.0.0.1", port=port, log_level="info")
    return 0


def _query_params(args: argparse.Namespace) -> dict[str, str]:
    params = {"q": args.q}
    if args.score is not None:
        params["score"] = args.score
    if args.smooth is not None:
        params["smooth"] = str(args.smooth)
    if args.ci:
        params["ci"] = "1"
    if args.standardize:
        params["standardize"] = "1"
    if args.regression:
        params["regression"] = "1"
    if args.changepoints is not None:
        params["changepoints"] = args.changepoints
    if args.range_from is not None:
        params["from"] = args.range_from
    if args.range_to is not None:
        params["to"] = args.range_to
    return params


def _print_table(payload: dict) -> None:
    labels = [s["label"] for s in payload["series"]]
    print("\t".join(["date"] + labels))
    for t, date_label in enumerate(payload["timeline"]):
        row = [date_label]
        for s in payload["series"]:
            v = s["values"][t]
            row.append("" if v is None else f"{v:.6g}")
        print("\t".join(row))
    if payload.get("fits"):
        for label, fit in zip(labels, payload["fits"]):
            if fit is None:
                print(f"fit[{label}]: not enough points")
            else:
                print(f"fit[{label}]: slope={fit['slope']:.6g} "
                      f"intercept={fit['intercept']:.6g} stderr={fit['stderr']:.6g}")
    if payload.get("changepoints"):
        r = payload["changepoints"]
        marks = ", ".join(r["breakpoints"]) if r["breakpoints"] else "none"
        print(f"change-points (k={r['k']}): {marks}")


def _cmd_query(args: argparse.Namespace) -> int:
    try:
        snapshot = open_snapshot(Path(args.corpus))
    except StoreError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return RUNTIME_EXIT
    try:
        query = parse_query(_query_params(args), snapshot.config)
        result = execute(query, snapshot)
    except QueryError as exc:
        print(f"error: {exc.message}", file=sys.stderr)
        return USAGE_EXIT
    for warning in result.warnings:
        print(f"warning: {warning}", file=sys.stderr)
    payload = result_to_jsonable(result)
    if args.csv is not None:
        data = render_csv(result).encode("utf-8")
        if args.csv == "-":
            sys.stdout.buffer.write(data)
        else:
            Path(args.csv).write_bytes(data)
    elif args.json:
        # No trailing newline: bytes stay identical to the API body.
        sys.stdout.buffer.write(to_json_bytes(payload))
    else:
        _print_table(payload)
    return 0


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "ingest":
        return _cmd_ingest(args)
    if args.command == "serve":
        return _cmd_serve(args)
    return _cmd_query(args)


if __name__ == "__main__":
    sys.exit(main())
