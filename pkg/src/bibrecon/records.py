"""Shared domain records: sources, candidate records, and adapter queries."""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Optional


class SourceId(str, Enum):
    """Closed enumeration of bibliographic sources, serialized as lowercase tokens."""

    LOC = "loc"
    GOOGLEBOOKS = "googlebooks"
    VIAF = "viaf"
    OCLC = "oclc"
    WIKIDATA = "wikidata"
    HATHITRUST = "hathitrust"
    FIXTURE = "fixture"

    def __str__(self) -> str:  # serialize as the bare token
        return self.value


# Identifier lists a CandidateRecord may carry, in canonical column order.
IDENTIFIER_KEYS = (
    "isbn",
    "lccn",
    "oclc_number",
    "viaf_id",
    "ht_volume_id",
    "lc_work_uri",
    "wikidata_qid",
    "ddc",
)

# Named extra fields allowed in CandidateRecord.metadata.
METADATA_KEYS = (
    "subjects",
    "genres",
    "description",
    "language",
    "page_count",
    "earliest_pub_date",
    "latest_pub_date",
    "thumbnail_url",
)


class RecordValidationError(ValueError):
    """A mapped record violates the CandidateRecord invariants."""


@dataclass
class CandidateRecord:
    """One record returned by a source, mapped to the uniform shape.

    ``identifiers`` holds only keys from IDENTIFIER_KEYS, each a list of
    non-empty strings. ``provenance_url`` must point at the original source
    record so users can verify provenance.
    """

    source: SourceId
    native_id: str
    title: str
    contributors: list[str] = field(default_factory=list)
    work_id: Optional[str] = None
    identifiers: dict[str, list[str]] = field(default_factory=dict)
    metadata: dict[str, Any] = field(default_factory=dict)
    provenance_url: str = ""

    def validate(self) -> "CandidateRecord":
        """Enforce the record invariants; raise RecordValidationError on violation."""
        if not self.native_id:
            raise RecordValidationError("native_id must be non-empty")
        if not self.provenance_url:
            raise RecordValidationError(
                f"record {self.native_id!r} has no provenance_url"
            )
        for key, values in self.identifiers.items():
            if key not in IDENTIFIER_KEYS:
                raise RecordValidationError(
                    f"record {self.native_id!r}: unknown identifier key {key!r}"
                )
            if not isinstance(values, list) or any(
                not isinstance(v, str) or not v for v in values
            ):
                raise RecordValidationError(
                    f"record {self.native_id!r}: identifier {key!r} must be a "
                    "list of non-empty strings"
                )
        for key in self.metadata:
            if key not in METADATA_KEYS:
                raise RecordValidationError(
                    f"record {self.native_id!r}: unknown metadata key {key!r}"
                )
        return self

    @property
    def global_id(self) -> str:
        """Entity id used on the wire: ``<source>:<native_id>``."""
        return f"{self.source.value}:{self.native_id}"

    def to_dict(self) -> dict[str, Any]:
        return {
            "source": self.source.value,
            "native_id": self.native_id,
            "title": self.title,
            "contributors": list(self.contributors),
            "work_id": self.work_id,
            "identifiers": {k: list(v) for k, v in self.identifiers.items()},
            "metadata": dict(self.metadata),
            "provenance_url": self.provenance_url,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "CandidateRecord":
        return cls(
            source=SourceId(data["source"]),
            native_id=data["native_id"],
            title=data.get("title", ""),
            contributors=list(data.get("contributors", [])),
            work_id=data.get("work_id"),
            identifiers={k: list(v) for k, v in data.get("identifiers", {}).items()},
            metadata=dict(data.get("metadata", {})),
            provenance_url=data.get("provenance_url", ""),
        ).validate()


def parse_global_id(global_id: str) -> tuple[SourceId, str]:
    """Split ``<source>:<native_id>`` on the first colon only.

    Raises ValueError when the source token is unknown or either part is empty.
    """
    source_token, sep, native_id = global_id.partition(":")
    if not sep or not native_id:
        raise ValueError(f"malformed global id {global_id!r}")
    try:
        source = SourceId(source_token)
    except ValueError:
        raise ValueError(f"unknown source token in global id {global_id!r}") from None
    return source, native_id


@dataclass
class AdapterQuery:
    """A search request against one source."""

    title: str
    contributor: Optional[str] = None
    date: Optional[str] = None
    limit: int = 20

    def __post_init__(self) -> None:
        if not self.title or not self.title.strip():
            raise ValueError("query title must be non-empty")
        if self.limit < 1:
            raise ValueError("query limit must be >= 1")


@dataclass(frozen=True)
class AdapterCapabilities:
    """Static description of what one source supports."""

    supports_work_id: bool
    search_level: str  # "work" | "manifestation"
    extend_fields: tuple[str, ...]
    requires_key: bool = False

    def __post_init__(self) -> None:
        if self.search_level not in ("work", "manifestation"):
            raise ValueError(f"invalid search_level {self.search_level!r}")
        allowed = set(IDENTIFIER_KEYS) | set(METADATA_KEYS)
        unknown = [f for f in self.extend_fields if f not in allowed]
        if unknown:
            raise ValueError(f"extend_fields not in record schema: {unknown}")
