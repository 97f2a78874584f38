"""Batch CSV reconciliation: enrich a spreadsheet row by row.

Each row is reconciled against every requested source; matched clusters
contribute their selected members' identifiers to merged output columns.
Rows are processed with bounded parallelism but written strictly in input
order, so identical inputs produce identical output files.
"""
from __future__ import annotations

import csv
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .clustering import WorkCluster, merge_identifiers
from .errors import AdapterError
from .matching import MatchConfig
from .pipeline import reconcile_one
from .records import IDENTIFIER_KEYS
from .sources.base import SourceAdapter

logger = logging.getLogger(__name__)

SOURCE_COLUMNS = (
    "match_id",
    "match_name",
    "match_score",
    "match_flag",
    "work_cluster_id",
    "member_count",
)


class MissingColumnError(ValueError):
    """The input CSV lacks a required column."""


@dataclass
class BatchReport:
    total_rows: int = 0
    per_source_matches: dict[str, int] = field(default_factory=dict)
    union_matches: int = 0
    error_rows: int = 0

    def lines(self) -> list[str]:
        out = [
            f"{name}: {count}/{self.total_rows} matched"
            for name, count in self.per_source_matches.items()
        ]
        if len(self.per_source_matches) > 1:
            out.append(f"union: {self.union_matches}/{self.total_rows} matched")
        if self.error_rows:
            out.append(f"rows with errors: {self.error_rows}")
        return out


@dataclass
class _RowResult:
    source_cells: dict[str, str]
    merged: dict[str, list[str]]
    errors: list[str]
    matched_sources: list[str]


def escape_joined(values: list[str], delimiter: str) -> str:
    """Join values; a delimiter inside a value is escaped by doubling it."""
    return delimiter.join(v.replace(delimiter, delimiter * 2) for v in values)


def _reconcile_row(
    row: dict[str, str],
    adapters: dict[str, SourceAdapter],
    title_column: str,
    author_column: Optional[str],
    date_column: Optional[str],
    config: MatchConfig,
    clustering_enabled: bool,
    limit: int,
) -> _RowResult:
    result = _RowResult(source_cells={}, merged={}, errors=[], matched_sources=[])
    title = (row.get(title_column) or "").strip()
    contributor = (row.get(author_column) or "").strip() if author_column else ""
    date = (row.get(date_column) or "").strip() if date_column else ""

    clusters: list[WorkCluster] = []
    for name, adapter in adapters.items():
        prefix = f"{name}_"
        cells = {prefix + col: "" for col in SOURCE_COLUMNS}
        cells[prefix + "match_flag"] = "false"
        if not title:
            result.errors.append(f"{name}: empty title")
            result.source_cells.update(cells)
            continue
        try:
            outcome = reconcile_one(
                adapter,
                title=title,
                contributor=contributor or None,
                date=date or None,
                config=config,
                clustering_enabled=clustering_enabled,
                limit=limit,
            )
        except AdapterError as err:
            result.errors.append(f"{name}: {err}")
            result.source_cells.update(cells)
            continue
        best = outcome.best
        if best is not None:
            cells[prefix + "match_id"] = best.candidate.global_id
            cells[prefix + "match_name"] = best.candidate.title
            cells[prefix + "match_score"] = str(best.combined_score)
            cells[prefix + "match_flag"] = "true" if best.match else "false"
        if outcome.cluster is not None:
            cells[prefix + "work_cluster_id"] = outcome.cluster.cluster_id
            cells[prefix + "member_count"] = str(len(outcome.cluster.members))
            clusters.append(outcome.cluster)
            result.matched_sources.append(name)
        result.source_cells.update(cells)

    result.merged = merge_identifiers(clusters)
    return result


def reconcile_csv(
    input_path: Path | str,
    output_path: Path | str,
    adapters: dict[str, SourceAdapter],
    title_column: str,
    author_column: Optional[str] = None,
    date_column: Optional[str] = None,
    config: Optional[MatchConfig] = None,
    clustering_enabled: bool = True,
    mode: str = "join",
    delimiter: str = "|",
    limit: int = 20,
    workers: int = 4,
) -> BatchReport:
    """Reconcile a CSV file and write the enriched copy.

    join mode emits one output row per input row with multi-values joined;
    explode mode emits one row per merged identifier value (input columns
    repeated). Per-row failures land in the errors column; the run continues.
    """
    config = config or MatchConfig()
    if mode not in ("join", "explode"):
        raise ValueError(f"invalid mode {mode!r}")

    input_path = Path(input_path)
    with open(input_path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise MissingColumnError(f"{input_path}: no header row")
        input_columns = list(reader.fieldnames)
        for column in [title_column, author_column, date_column]:
            if column and column not in input_columns:
                raise MissingColumnError(
                    f"{input_path}: column {column!r} not in header {input_columns}"
                )
        rows = list(reader)

    def work(row: dict[str, str]) -> _RowResult:
        return _reconcile_row(
            row,
            adapters,
            title_column,
            author_column,
            date_column,
            config,
            clustering_enabled,
            limit,
        )

    # bounded parallelism; results come back in input order
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        results = list(pool.map(work, rows))

    report = BatchReport(total_rows=len(rows))
    report.per_source_matches = {name: 0 for name in adapters}
    source_columns = [
        f"{name}_{col}" for name in adapters for col in SOURCE_COLUMNS
    ]
    header = input_columns + source_columns + list(IDENTIFIER_KEYS) + ["errors"]

    with open(output_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=header)
        writer.writeheader()
        for row, result in zip(rows, results):
            for name in result.matched_sources:
                report.per_source_matches[name] += 1
            if result.matched_sources:
                report.union_matches += 1
            if result.errors:
                report.error_rows += 1
            base = dict(row)
            base.update(result.source_cells)
            base["errors"] = "; ".join(result.errors)
            if mode == "join":
                for key in IDENTIFIER_KEYS:
                    base[key] = escape_joined(result.merged.get(key, []), delimiter)
                writer.writerow(base)
            else:
                depth = max(
                    [len(result.merged.get(key, [])) for key in IDENTIFIER_KEYS]
                    or [0]
                )
                for i in range(max(1, depth)):
                    exploded = dict(base)
                    for key in IDENTIFIER_KEYS:
                        values = result.merged.get(key, [])
                        exploded[key] = values[i] if i < len(values) else ""
                    writer.writerow(exploded)

    for line in report.lines():
        logger.info("%s", line)
    return report
