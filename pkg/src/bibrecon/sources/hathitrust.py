"""HathiTrust adapter: serves searches from the locally built title index."""
from __future__ import annotations

from typing import Optional

from ..errors import NotFound
from ..ingest import TitleIndex, query_index, to_candidate
from ..ratelimit import Throttle
from ..records import AdapterCapabilities, AdapterQuery, CandidateRecord, SourceId
from .base import SourceAdapter

CAPABILITIES = AdapterCapabilities(
    supports_work_id=False,
    search_level="manifestation",
    extend_fields=(
        "isbn",
        "oclc_number",
        "lccn",
        "ht_volume_id",
        "earliest_pub_date",
        "latest_pub_date",
        "thumbnail_url",
    ),
    requires_key=False,
)


class HathiTrustAdapter(SourceAdapter):
    source_id = SourceId.HATHITRUST

    def __init__(self, index: TitleIndex, throttle: Optional[Throttle] = None):
        super().__init__(throttle)
        self._index = index

    def capabilities(self) -> AdapterCapabilities:
        return CAPABILITIES

    def _search_impl(self, query: AdapterQuery) -> list[CandidateRecord]:
        return self._request(lambda: query_index(self._index, query))

    def _fetch_impl(self, native_id: str) -> CandidateRecord:
        record = self._index.get(native_id)
        if record is None:
            raise NotFound(f"hathitrust: no volume {native_id!r}")
        return to_candidate(record)
