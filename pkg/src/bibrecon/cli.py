"""Command-line entry point: serve, reconcile, ingest-hathitrust, eval.

Exit codes: 0 success, 1 runtime failure, 2 configuration error, 3 bind
failure.
"""
from __future__ import annotations

import argparse
import logging
import socket
import sys
import time
from pathlib import Path
from typing import Optional

from .config import ConfigError, ServiceConfig, apply_flag_overrides, load_config
from .ingest import build_index, load_dump, save_records
from .records import SourceId
from .sources import build_adapters
from .sources.base import SourceAdapter

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_CONFIG = 2
EXIT_BIND = 3

LIVE_SOURCE_TYPES = {
    SourceId.LOC.value,
    SourceId.GOOGLEBOOKS.value,
    SourceId.VIAF.value,
    SourceId.OCLC.value,
    SourceId.WIKIDATA.value,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bibrecon",
        description="Bibliographic reconciliation service and batch toolkit",
    )
    parser.add_argument("--config", help="TOML config file", default=None)
    sub = parser.add_subparsers(dest="command", required=True)

    serve = sub.add_parser("serve", help="run the reconciliation HTTP service")
    serve.add_argument("--port", type=int, default=None)
    serve.add_argument("--host", default=None)
    serve.add_argument("--threshold", type=int, default=None)

    rec = sub.add_parser("reconcile", help="reconcile a CSV file in batch")
    rec.add_argument("--input", required=True)
    rec.add_argument("--output", required=True)
    rec.add_argument("--title-column", required=True)
    rec.add_argument("--author-column", default=None)
    rec.add_argument("--date-column", default=None)
    rec.add_argument(
        "--source",
        action="append",
        default=None,
        help="source name to use (repeatable), or 'all'",
    )
    rec.add_argument("--mode", choices=["join", "explode"], default="join")
    rec.add_argument("--delimiter", default=None)
    rec.add_argument("--threshold", type=int, default=None)
    rec.add_argument("--no-clustering", action="store_true")

    ingest = sub.add_parser(
        "ingest-hathitrust", help="load a TSV dump and build the local index"
    )
    ingest.add_argument("--dump", required=True)
    ingest.add_argument(
        "--output", default=None, help="index artifact path (JSON)"
    )

    ev = sub.add_parser("eval", help="measure accuracy against a gold CSV")
    ev.add_argument("--gold", required=True)
    ev.add_argument("--source", action="append", default=None)
    ev.add_argument("--threshold", type=int, default=None)
    ev.add_argument("--report-json", default=None)
    ev.add_argument("--log-csv", default=None)
    ev.add_argument(
        "--live",
        action="store_true",
        help="allow evaluation against live network sources",
    )
    return parser


def _select_adapters(
    config: ServiceConfig, names: Optional[list[str]]
) -> dict[str, SourceAdapter]:
    adapters, skipped = build_adapters(config.sources)
    for name, reason in skipped:
        print(f"source {name} disabled: {reason}", file=sys.stderr)
    if names and names != ["all"]:
        missing = [n for n in names if n not in adapters]
        if missing:
            raise ConfigError(f"unknown or disabled sources: {missing}")
        adapters = {n: adapters[n] for n in names}
    if not adapters:
        raise ConfigError("no usable sources")
    return adapters


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import create_app

    config = load_config(args.config)
    apply_flag_overrides(config, port=args.port, threshold=args.threshold)
    if args.host:
        config.host = args.host
    app = create_app(config)

    # surface port conflicts as a distinct exit code before uvicorn takes over
    probe = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    try:
        probe.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        probe.bind((config.host, config.port))
    except OSError as err:
        print(f"cannot bind {config.host}:{config.port}: {err}", file=sys.stderr)
        return EXIT_BIND
    finally:
        probe.close()

    mounted = ", ".join(sorted(app.state.service.adapters))
    print(f"serving sources [{mounted}] on http://{config.host}:{config.port}")
    uvicorn.run(app, host=config.host, port=config.port, log_level="info")
    return EXIT_OK


def cmd_reconcile(args: argparse.Namespace) -> int:
    from .batch import reconcile_csv

    config = load_config(args.config)
    apply_flag_overrides(config, threshold=args.threshold, delimiter=args.delimiter)
    adapters = _select_adapters(config, args.source)
    report = reconcile_csv(
        input_path=args.input,
        output_path=args.output,
        adapters=adapters,
        title_column=args.title_column,
        author_column=args.author_column,
        date_column=args.date_column,
        config=config.match,
        clustering_enabled=config.clustering_enabled and not args.no_clustering,
        mode=args.mode,
        delimiter=config.delimiter,
    )
    for line in report.lines():
        print(line)
    return EXIT_OK


def cmd_ingest(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    started = time.perf_counter()
    result = load_dump(args.dump)
    build_started = time.perf_counter()
    index = build_index(result.records)
    elapsed = time.perf_counter() - started
    build_elapsed = time.perf_counter() - build_started

    output = args.output
    if output is None:
        for settings in config.sources:
            if settings.type == SourceId.HATHITRUST.value and settings.index_path:
                output = settings.index_path
                break
    output = output or "hathitrust-index.json"
    save_records(result.records, output)
    print(
        f"loaded {len(result.records)}, skipped {result.skipped} "
        f"({result.data_lines} data lines); indexed {len(index)} records "
        f"in {build_elapsed:.2f}s (total {elapsed:.2f}s); artifact: {output}"
    )
    return EXIT_OK


def cmd_eval(args: argparse.Namespace) -> int:
    from .evaluation import (
        load_gold,
        run_eval,
        write_outcome_log,
        write_report_json,
    )

    config = load_config(args.config)
    apply_flag_overrides(config, threshold=args.threshold)
    adapters = _select_adapters(config, args.source)

    if not args.live:
        live = [
            name
            for name, adapter in adapters.items()
            if adapter.source_id.value in LIVE_SOURCE_TYPES
        ]
        if live:
            raise ConfigError(
                f"sources {live} reach live network APIs; pass --live to allow"
            )

    gold = load_gold(args.gold)
    report = run_eval(gold, adapters, config=config.match)
    for line in report.table_lines():
        print(line)
    gold_path = Path(args.gold)
    report_path = args.report_json or gold_path.with_suffix(".report.json")
    log_path = args.log_csv or gold_path.with_suffix(".outcomes.csv")
    write_report_json(report, report_path)
    write_outcome_log(report.outcomes, log_path)
    print(f"report: {report_path}")
    print(f"outcome log: {log_path}")
    return EXIT_OK


def main(argv: Optional[list[str]] = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "serve": cmd_serve,
        "reconcile": cmd_reconcile,
        "ingest-hathitrust": cmd_ingest,
        "eval": cmd_eval,
    }
    try:
        return handlers[args.command](args)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except (OSError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
