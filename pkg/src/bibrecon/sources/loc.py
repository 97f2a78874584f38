"""Library of Congress adapter (id.loc.gov).

Work-level search via the suggest endpoint on id.loc.gov; Works are narrowly
scoped there. The endpoint path is configurable because the site exposes
several search surfaces and we standardize on one of them.
"""
from __future__ import annotations

from typing import Any, Optional

from ..errors import MalformedResponse
from ..ratelimit import Throttle
from ..records import AdapterCapabilities, AdapterQuery, CandidateRecord, SourceId
from .base import HttpTransport, SourceAdapter, string_list

DEFAULT_ENDPOINT = "https://id.loc.gov"
DEFAULT_SEARCH_PATH = "/resources/works/suggest2/"

CAPABILITIES = AdapterCapabilities(
    supports_work_id=True,
    search_level="work",
    extend_fields=("isbn", "lccn", "oclc_number", "lc_work_uri", "subjects", "genres"),
    requires_key=False,
)


class LocAdapter(SourceAdapter):
    source_id = SourceId.LOC

    def __init__(
        self,
        transport: Optional[HttpTransport] = None,
        endpoint: str = DEFAULT_ENDPOINT,
        search_path: str = DEFAULT_SEARCH_PATH,
        throttle: Optional[Throttle] = None,
    ):
        super().__init__(throttle)
        self._transport = transport or HttpTransport()
        self._endpoint = endpoint.rstrip("/")
        self._search_path = search_path

    def capabilities(self) -> AdapterCapabilities:
        return CAPABILITIES

    def _search_impl(self, query: AdapterQuery) -> list[CandidateRecord]:
        terms = query.title
        if query.contributor:
            terms = f"{terms} {query.contributor}"
        url = f"{self._endpoint}{self._search_path}"
        params = {"q": terms, "count": query.limit, "searchtype": "keyword"}
        payload = self._request(lambda: self._transport.get_json(url, params=params))
        return self._map_hits(payload)

    def _map_hits(self, payload: Any) -> list[CandidateRecord]:
        if not isinstance(payload, dict) or not isinstance(payload.get("hits"), list):
            raise MalformedResponse("loc: expected object with 'hits'", repr(payload))
        records = []
        for hit in payload["hits"]:
            uri = hit.get("uri", "")
            if not uri:
                continue
            work_id = uri.rstrip("/").rsplit("/", 1)[-1]
            more = hit.get("more") or {}
            identifiers: dict[str, list[str]] = {"lc_work_uri": [uri]}
            for key, source_key in (
                ("isbn", "isbns"),
                ("lccn", "lccns"),
                ("oclc_number", "oclcs"),
            ):
                values = string_list(more.get(source_key))
                if values:
                    identifiers[key] = values
            metadata: dict[str, Any] = {}
            subjects = string_list(more.get("subjects"))
            if subjects:
                metadata["subjects"] = subjects
            genres = string_list(more.get("genres"))
            if genres:
                metadata["genres"] = genres
            records.append(
                CandidateRecord(
                    source=SourceId.LOC,
                    native_id=work_id,
                    title=hit.get("aLabel") or hit.get("suggestLabel", ""),
                    contributors=string_list(more.get("contributors")),
                    work_id=work_id,
                    identifiers=identifiers,
                    metadata=metadata,
                    provenance_url=uri,
                )
            )
        return records
