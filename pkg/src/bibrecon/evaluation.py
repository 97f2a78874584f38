"""Accuracy measurement against gold-labeled datasets.

A row counts correct for a source only when the source both flags a match
and that match's id is among the row's accepted ids — a confident wrong
match counts against the service. Union accuracy counts rows any source got
right, and tag subsets report accuracy with tagged rows excluded.
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Optional

from .errors import AdapterError
from .matching import MatchConfig
from .pipeline import reconcile_one
from .sources.base import SourceAdapter


class GoldFormatError(ValueError):
    """The gold CSV is unusable."""


@dataclass
class GoldRow:
    title: str
    author: str
    accepted_ids: list[str]
    tags: list[str] = field(default_factory=list)


@dataclass(frozen=True)
class Accuracy:
    correct: int
    total: int

    def __post_init__(self) -> None:
        if self.total <= 0:
            raise ValueError("accuracy needs a positive total")
        if not 0 <= self.correct <= self.total:
            raise ValueError("correct must be within [0, total]")

    @property
    def fraction(self) -> Fraction:
        return Fraction(self.correct, self.total)

    @property
    def percent(self) -> int:
        # round half up on the exact fraction
        return (200 * self.correct + self.total) // (2 * self.total)

    def __str__(self) -> str:
        return f"{self.correct}/{self.total} = {self.percent}%"


def accuracy(correct: int, total: int) -> Accuracy:
    return Accuracy(correct, total)


@dataclass
class RowOutcome:
    """One (gold row, source) observation; the raw log the report is built from."""

    row_index: int
    title: str
    author: str
    source: str
    result_id: str
    match: bool
    correct: bool


@dataclass
class EvalReport:
    total: int
    per_source: dict[str, Accuracy]
    union: Accuracy
    subsets: dict[str, "SubsetAccuracy"]
    outcomes: list[RowOutcome]

    def table_lines(self) -> list[str]:
        lines = [f"rows: {self.total}"]
        for name, acc in self.per_source.items():
            lines.append(f"{name}: {acc}")
        lines.append(f"union: {self.union}")
        for tag, subset in self.subsets.items():
            lines.append(f"-- without {tag!r} ({subset.union.total} rows) --")
            for name, acc in subset.per_source.items():
                lines.append(f"{name}: {acc}")
            lines.append(f"union: {subset.union}")
        return lines

    def to_json(self) -> dict:
        def acc(a: Accuracy) -> dict:
            return {
                "correct": a.correct,
                "total": a.total,
                "fraction": f"{a.fraction.numerator}/{a.fraction.denominator}",
                "percent": a.percent,
            }

        return {
            "total": self.total,
            "per_source": {k: acc(v) for k, v in self.per_source.items()},
            "union": acc(self.union),
            "subsets": {
                tag: {
                    "per_source": {k: acc(v) for k, v in s.per_source.items()},
                    "union": acc(s.union),
                }
                for tag, s in self.subsets.items()
            },
        }


@dataclass
class SubsetAccuracy:
    per_source: dict[str, Accuracy]
    union: Accuracy


def load_gold(path: Path | str) -> list[GoldRow]:
    """Read the gold CSV: title, author, accepted_ids (semicolons), tags."""
    path = Path(path)
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        columns = reader.fieldnames or []
        for required in ("title", "author", "accepted_ids"):
            if required not in columns:
                raise GoldFormatError(f"{path}: missing column {required!r}")
        rows = []
        for i, raw in enumerate(reader, start=1):
            accepted = [p.strip() for p in (raw["accepted_ids"] or "").split(";") if p.strip()]
            if not accepted:
                raise GoldFormatError(f"{path} row {i}: accepted_ids is empty")
            tags = [
                p.strip()
                for p in (raw.get("tags") or "").split(";")
                if p.strip()
            ]
            title = (raw["title"] or "").strip()
            if not title:
                raise GoldFormatError(f"{path} row {i}: title is empty")
            rows.append(
                GoldRow(
                    title=title,
                    author=(raw["author"] or "").strip(),
                    accepted_ids=accepted,
                    tags=tags,
                )
            )
    if not rows:
        raise GoldFormatError(f"{path}: no gold rows")
    return rows


def run_eval(
    gold: list[GoldRow],
    adapters: dict[str, SourceAdapter],
    config: Optional[MatchConfig] = None,
    clustering_enabled: bool = True,
    limit: int = 20,
) -> EvalReport:
    """Reconcile every gold row with every source and score the outcomes."""
    config = config or MatchConfig()
    outcomes: list[RowOutcome] = []
    for index, row in enumerate(gold):
        for name, adapter in adapters.items():
            result_id = ""
            matched = False
            try:
                outcome = reconcile_one(
                    adapter,
                    title=row.title,
                    contributor=row.author or None,
                    config=config,
                    clustering_enabled=clustering_enabled,
                    limit=limit,
                )
                best = outcome.best
                if best is not None:
                    result_id = best.candidate.global_id
                    matched = best.match
            except AdapterError:
                pass  # failure counts as incorrect for this source
            correct = matched and result_id in row.accepted_ids
            outcomes.append(
                RowOutcome(
                    row_index=index,
                    title=row.title,
                    author=row.author,
                    source=name,
                    result_id=result_id,
                    match=matched,
                    correct=correct,
                )
            )
    return build_report(gold, list(adapters), outcomes)


def build_report(
    gold: list[GoldRow],
    source_names: list[str],
    outcomes: list[RowOutcome],
) -> EvalReport:
    def summarize(indices: list[int]) -> tuple[dict[str, Accuracy], Accuracy]:
        wanted = set(indices)
        per_source = {}
        for name in source_names:
            correct = sum(
                1
                for o in outcomes
                if o.source == name and o.row_index in wanted and o.correct
            )
            per_source[name] = Accuracy(correct, len(indices))
        union_correct = len(
            {o.row_index for o in outcomes if o.row_index in wanted and o.correct}
        )
        return per_source, Accuracy(union_correct, len(indices))

    all_indices = list(range(len(gold)))
    per_source, union = summarize(all_indices)

    subsets = {}
    all_tags = sorted({tag for row in gold for tag in row.tags})
    for tag in all_tags:
        kept = [i for i, row in enumerate(gold) if tag not in row.tags]
        if kept:
            sub_sources, sub_union = summarize(kept)
            subsets[tag] = SubsetAccuracy(per_source=sub_sources, union=sub_union)

    return EvalReport(
        total=len(gold),
        per_source=per_source,
        union=union,
        subsets=subsets,
        outcomes=outcomes,
    )


OUTCOME_COLUMNS = ("row_index", "title", "author", "source", "result_id", "match", "correct")


def write_outcome_log(outcomes: list[RowOutcome], path: Path | str) -> None:
    """Raw per-row outcome log; independent scripts recompute the report from it."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(OUTCOME_COLUMNS)
        for o in outcomes:
            writer.writerow(
                [
                    o.row_index,
                    o.title,
                    o.author,
                    o.source,
                    o.result_id,
                    "true" if o.match else "false",
                    "true" if o.correct else "false",
                ]
            )


def write_report_json(report: EvalReport, path: Path | str) -> None:
    Path(path).write_text(
        json.dumps(report.to_json(), ensure_ascii=False, indent=2), encoding="utf-8"
    )
