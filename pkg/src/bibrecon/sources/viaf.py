"""VIAF adapter (viaf.org AutoSuggest).

Cluster search for Name/Title Works; the cluster id doubles as the Work
identifier. AutoSuggest terms for works usually read "Author | Title", so we
split the two halves apart. The recorded fixture defines this contract; the
upstream shape is under-documented.
"""
from __future__ import annotations

from typing import Any, Optional

from ..errors import MalformedResponse
from ..ratelimit import Throttle
from ..records import AdapterCapabilities, AdapterQuery, CandidateRecord, SourceId
from .base import HttpTransport, SourceAdapter

DEFAULT_ENDPOINT = "https://viaf.org"

# nametype values AutoSuggest uses for name/title work clusters
WORK_NAMETYPES = {"uniformtitlework", "uniformtitleexpression", "work"}

CAPABILITIES = AdapterCapabilities(
    supports_work_id=True,
    search_level="work",
    extend_fields=("viaf_id",),
    requires_key=False,
)


class ViafAdapter(SourceAdapter):
    source_id = SourceId.VIAF

    def __init__(
        self,
        transport: Optional[HttpTransport] = None,
        endpoint: str = DEFAULT_ENDPOINT,
        throttle: Optional[Throttle] = None,
    ):
        super().__init__(throttle)
        self._transport = transport or HttpTransport()
        self._endpoint = endpoint.rstrip("/")

    def capabilities(self) -> AdapterCapabilities:
        return CAPABILITIES

    def _search_impl(self, query: AdapterQuery) -> list[CandidateRecord]:
        terms = query.title
        if query.contributor:
            terms = f"{query.contributor} {query.title}"
        url = f"{self._endpoint}/viaf/AutoSuggest"
        payload = self._request(
            lambda: self._transport.get_json(url, params={"query": terms})
        )
        if not isinstance(payload, dict):
            raise MalformedResponse("viaf: expected JSON object", repr(payload))
        records = []
        for entry in payload.get("result") or []:
            record = self._map_entry(entry)
            if record is not None:
                records.append(record)
        return records

    def _map_entry(self, entry: Any) -> Optional[CandidateRecord]:
        if not isinstance(entry, dict):
            raise MalformedResponse("viaf: non-object result entry", repr(entry))
        if entry.get("nametype") not in WORK_NAMETYPES:
            return None  # personal names etc.; we reconcile works only
        viaf_id = str(entry.get("viafid", "")).strip()
        term = entry.get("term", "") or entry.get("displayForm", "")
        if not viaf_id or not term:
            return None
        contributors: list[str] = []
        title = term
        if "|" in term:
            author_part, _, title_part = term.partition("|")
            if author_part.strip() and title_part.strip():
                contributors = [author_part.strip()]
                title = title_part.strip()
        return CandidateRecord(
            source=SourceId.VIAF,
            native_id=viaf_id,
            title=title,
            contributors=contributors,
            work_id=viaf_id,
            identifiers={"viaf_id": [viaf_id]},
            metadata={},
            provenance_url=f"{self._endpoint}/viaf/{viaf_id}",
        )
