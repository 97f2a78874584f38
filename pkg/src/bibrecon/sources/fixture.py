"""Deterministic fixture source backed by a JSON corpus file.

Stands in for the live services in tests, demos, and the evaluation harness:
same corpus, same query, same answer, no network. Failure injection lets the
retry machinery be exercised to order.
"""
from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Optional

from ..errors import AdapterError, NotFound
from ..matching import normalize
from ..ratelimit import Throttle
from ..records import (
    AdapterCapabilities,
    AdapterQuery,
    CandidateRecord,
    SourceId,
)
from .base import SourceAdapter


def load_corpus(path: Path | str) -> list[CandidateRecord]:
    """Read a corpus file: a JSON array of CandidateRecord objects."""
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(payload, list):
        raise ValueError(f"corpus {path} must be a JSON array of records")
    return [CandidateRecord.from_dict(entry) for entry in payload]


class FixtureAdapter(SourceAdapter):
    """Searches a seeded in-memory corpus.

    A record is a candidate when at least half of the query's title tokens
    appear in its title, or at least half of the contributor tokens appear
    among its contributors. Candidates are ordered by shared-token count
    (title counting double), ties by native id, so results are stable.
    """

    source_id = SourceId.FIXTURE

    def __init__(
        self,
        corpus: list[CandidateRecord],
        throttle: Optional[Throttle] = None,
        capabilities: Optional[AdapterCapabilities] = None,
        fail_plan: Optional[list[AdapterError]] = None,
    ):
        super().__init__(throttle)
        self._corpus = list(corpus)
        self._by_id = {record.native_id: record for record in self._corpus}
        self._capabilities = capabilities or AdapterCapabilities(
            supports_work_id=True,
            search_level="work",
            extend_fields=(
                "isbn",
                "lccn",
                "oclc_number",
                "subjects",
                "genres",
                "description",
                "language",
                "page_count",
                "thumbnail_url",
            ),
            requires_key=False,
        )
        # errors to raise, one per upstream call, before behaving normally
        self._fail_plan = list(fail_plan or [])

    @classmethod
    def from_file(cls, path: Path | str, **kwargs) -> "FixtureAdapter":
        return cls(load_corpus(path), **kwargs)

    def capabilities(self) -> AdapterCapabilities:
        return self._capabilities

    def _maybe_fail(self) -> None:
        if self._fail_plan:
            raise self._fail_plan.pop(0)

    def _search_impl(self, query: AdapterQuery) -> list[CandidateRecord]:
        def upstream() -> list[CandidateRecord]:
            self._maybe_fail()
            return self._scan(query)

        return self._request(upstream)

    def _scan(self, query: AdapterQuery) -> list[CandidateRecord]:
        title_tokens = set(normalize(query.title).tokens)
        title_needed = max(1, math.ceil(len(title_tokens) / 2))
        contrib_tokens: set[str] = set()
        contrib_needed = 0
        if query.contributor:
            contrib_tokens = set(normalize(query.contributor).tokens)
            contrib_needed = max(1, math.ceil(len(contrib_tokens) / 2))

        hits: list[tuple[int, str, CandidateRecord]] = []
        for record in self._corpus:
            title_overlap = len(title_tokens & set(normalize(record.title).tokens))
            contrib_overlap = 0
            if contrib_tokens and record.contributors:
                record_tokens: set[str] = set()
                for name in record.contributors:
                    record_tokens.update(normalize(name).tokens)
                contrib_overlap = len(contrib_tokens & record_tokens)
            qualifies = title_overlap >= title_needed or (
                contrib_needed and contrib_overlap >= contrib_needed
            )
            if qualifies:
                weight = 2 * title_overlap + contrib_overlap
                hits.append((weight, record.native_id, record))
        hits.sort(key=lambda h: (-h[0], h[1]))
        return [record for _, _, record in hits]

    def _fetch_impl(self, native_id: str) -> CandidateRecord:
        def upstream() -> CandidateRecord:
            self._maybe_fail()
            record = self._by_id.get(native_id)
            if record is None:
                raise NotFound(f"fixture: no record {native_id!r}")
            return record

        return self._request(upstream)
