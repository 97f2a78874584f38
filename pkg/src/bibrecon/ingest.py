"""Bulk-load HathiTrust-style tabular dumps into a local queryable index.

There is no public search API for this source; the dumps are the database.
We load the TSV (optionally gzipped), keep the mapped columns, and build an
inverted index over normalized title tokens. Candidate generation is cheap
token overlap; the precise ranking happens afterwards in the match core.
"""
from __future__ import annotations

import gzip
import io
import json
import logging
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .matching import normalize
from .records import AdapterQuery, CandidateRecord, SourceId

logger = logging.getLogger(__name__)

# Field -> source column, matching the public "hathifiles" header names.
# Dump generations move columns around, so this is configuration, not law.
DEFAULT_COLUMN_MAP = {
    "ht_volume_id": "htid",
    "title": "title",
    "contributors": "author",
    "oclc_number": "oclc_num",
    "isbn": "isbn",
    "lccn": "lccn",
}

_MULTI_VALUE_FIELDS = ("oclc_number", "isbn", "lccn")
_YEAR_FIELDS = ("earliest_pub_date", "latest_pub_date")

VOLUME_URL_TEMPLATE = "https://babel.hathitrust.org/cgi/pt?id={volume_id}"


class ColumnMapError(ValueError):
    """The column map names a column the file does not have."""


class DuplicateIdError(ValueError):
    """Two dump records share a volume id."""


@dataclass
class DumpRecord:
    ht_volume_id: str
    title: str
    contributors: list[str] = field(default_factory=list)
    oclc_number: list[str] = field(default_factory=list)
    isbn: list[str] = field(default_factory=list)
    lccn: list[str] = field(default_factory=list)
    earliest_pub_date: Optional[int] = None
    latest_pub_date: Optional[int] = None
    thumbnail_url: Optional[str] = None


@dataclass
class LoadResult:
    """Records plus the skip ledger: loaded + skipped = data lines."""

    records: list[DumpRecord]
    skipped: int
    data_lines: int


def _open_maybe_gzip(path: Path) -> io.TextIOWrapper:
    raw = open(path, "rb")
    magic = raw.read(2)
    raw.seek(0)
    if magic == b"\x1f\x8b":
        return io.TextIOWrapper(gzip.GzipFile(fileobj=raw), encoding="utf-8")
    return io.TextIOWrapper(raw, encoding="utf-8")


def _split_multi(value: str) -> list[str]:
    return [part.strip() for part in value.split(",") if part.strip()]


def _parse_year(value: str) -> int:
    year = int(value)
    if not 1000 <= year <= 9999:
        raise ValueError(f"not a 4-digit year: {value!r}")
    return year


def load_dump(
    path: Path | str,
    column_map: Optional[dict[str, str]] = None,
) -> LoadResult:
    """Load a tab-separated dump, one record per data line.

    The first line is the header. Lines failing validation (missing volume
    id, unusable title, malformed year, too few columns) are skipped and
    counted; a column map naming a column the header lacks is fatal.
    """
    column_map = dict(column_map or DEFAULT_COLUMN_MAP)
    path = Path(path)

    records: list[DumpRecord] = []
    skipped = 0
    data_lines = 0

    with _open_maybe_gzip(path) as fh:
        header_line = fh.readline()
        if not header_line:
            raise ColumnMapError(f"{path}: empty file, no header line")
        header = header_line.rstrip("\r\n").split("\t")
        positions: dict[str, int] = {}
        for fld, column in column_map.items():
            try:
                positions[fld] = header.index(column)
            except ValueError:
                raise ColumnMapError(
                    f"{path}: mapped column {column!r} (for field {fld!r}) "
                    f"not in header"
                ) from None

        for line in fh:
            data_lines += 1
            cells = line.rstrip("\r\n").split("\t")
            try:
                records.append(_build_record(cells, positions))
            except (ValueError, IndexError) as err:
                skipped += 1
                logger.debug("skipping line %d: %s", data_lines, err)

    return LoadResult(records=records, skipped=skipped, data_lines=data_lines)


def _build_record(cells: list[str], positions: dict[str, int]) -> DumpRecord:
    def cell(fld: str) -> str:
        pos = positions.get(fld)
        if pos is None:
            return ""
        return cells[pos].strip()  # IndexError on short lines -> skip

    volume_id = cell("ht_volume_id")
    if not volume_id:
        raise ValueError("empty volume id")
    title = cell("title")
    if not normalize(title).tokens:
        raise ValueError("title has no indexable tokens")

    record = DumpRecord(ht_volume_id=volume_id, title=title)
    author = cell("contributors")
    if author:
        record.contributors = [author]
    for fld in _MULTI_VALUE_FIELDS:
        value = cell(fld)
        if value:
            setattr(record, fld, _split_multi(value))
    for fld in _YEAR_FIELDS:
        value = cell(fld)
        if value:
            setattr(record, fld, _parse_year(value))
    thumbnail = cell("thumbnail_url")
    if thumbnail:
        record.thumbnail_url = thumbnail
    return record


class TitleIndex:
    """Immutable inverted index from normalized title tokens to record ids."""

    def __init__(
        self,
        records: dict[str, DumpRecord],
        postings: dict[str, list[str]],
    ):
        self._records = records
        self._postings = postings

    def __len__(self) -> int:
        return len(self._records)

    def get(self, volume_id: str) -> Optional[DumpRecord]:
        return self._records.get(volume_id)

    def overlap_candidates(self, title: str) -> list[tuple[str, int]]:
        """Record ids sharing at least one title token with ``title``.

        Ordered by shared-token count descending, then id ascending, so the
        pre-ranking order is deterministic.
        """
        counts: Counter[str] = Counter()
        for token in set(normalize(title).tokens):
            for volume_id in self._postings.get(token, ()):
                counts[volume_id] += 1
        return sorted(counts.items(), key=lambda item: (-item[1], item[0]))


def build_index(records: list[DumpRecord]) -> TitleIndex:
    """Index records by their normalized title tokens; ids must be unique."""
    by_id: dict[str, DumpRecord] = {}
    postings: dict[str, set[str]] = {}
    for record in records:
        if record.ht_volume_id in by_id:
            raise DuplicateIdError(f"duplicate volume id {record.ht_volume_id!r}")
        by_id[record.ht_volume_id] = record
        for token in set(normalize(record.title).tokens):
            postings.setdefault(token, set()).add(record.ht_volume_id)
    sorted_postings = {token: sorted(ids) for token, ids in postings.items()}
    return TitleIndex(records=by_id, postings=sorted_postings)


def to_candidate(record: DumpRecord) -> CandidateRecord:
    """Map one dump record to the uniform candidate shape."""
    identifiers: dict[str, list[str]] = {"ht_volume_id": [record.ht_volume_id]}
    for key in ("isbn", "lccn", "oclc_number"):
        values = getattr(record, key)
        if values:
            identifiers[key] = list(values)
    metadata: dict[str, object] = {}
    if record.earliest_pub_date is not None:
        metadata["earliest_pub_date"] = record.earliest_pub_date
    if record.latest_pub_date is not None:
        metadata["latest_pub_date"] = record.latest_pub_date
    if record.thumbnail_url:
        metadata["thumbnail_url"] = record.thumbnail_url
    return CandidateRecord(
        source=SourceId.HATHITRUST,
        native_id=record.ht_volume_id,
        title=record.title,
        contributors=list(record.contributors),
        work_id=None,
        identifiers=identifiers,
        metadata=metadata,
        provenance_url=VOLUME_URL_TEMPLATE.format(volume_id=record.ht_volume_id),
    )


def query_index(
    index: TitleIndex,
    query: AdapterQuery,
    limit: Optional[int] = None,
) -> list[CandidateRecord]:
    """Candidate generation by token overlap, pruned to 5x the result limit.

    Returns mapped CandidateRecords for match-core to rank precisely; with
    millions of rows the overlap pruning is what keeps queries fast.
    """
    limit = limit if limit is not None else query.limit
    pruned = index.overlap_candidates(query.title)[: 5 * limit]
    results = []
    for volume_id, _overlap in pruned:
        record = index.get(volume_id)
        if record is not None:
            results.append(to_candidate(record))
    return results


def save_records(records: list[DumpRecord], path: Path | str) -> None:
    """Persist loaded dump records as a JSON index artifact."""
    payload = {
        "schema_version": 1,
        "records": [
            {
                "ht_volume_id": r.ht_volume_id,
                "title": r.title,
                "contributors": r.contributors,
                "oclc_number": r.oclc_number,
                "isbn": r.isbn,
                "lccn": r.lccn,
                "earliest_pub_date": r.earliest_pub_date,
                "latest_pub_date": r.latest_pub_date,
                "thumbnail_url": r.thumbnail_url,
            }
            for r in records
        ],
    }
    Path(path).write_text(json.dumps(payload, ensure_ascii=False), encoding="utf-8")


def load_records(path: Path | str) -> list[DumpRecord]:
    """Load a JSON index artifact written by save_records."""
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    if payload.get("schema_version") != 1:
        raise ValueError(f"unsupported index artifact version in {path}")
    return [DumpRecord(**entry) for entry in payload["records"]]
