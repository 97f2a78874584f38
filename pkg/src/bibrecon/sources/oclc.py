"""OCLC WorldCat Metadata adapter (brief-bibs search).

Manifestation-level search that carries a native Work identifier, which makes
it the strongest clustering source. Requires an API key, taken from the
OCLC_API_KEY environment variable; without one the adapter is reported as
key-less rather than silently failing whole runs.
"""
from __future__ import annotations

from typing import Any, Optional

from ..errors import AuthFailure, MalformedResponse
from ..ratelimit import Throttle
from ..records import AdapterCapabilities, AdapterQuery, CandidateRecord, SourceId
from .base import HttpTransport, SourceAdapter, first_string, string_list

DEFAULT_ENDPOINT = "https://metadata.api.oclc.org/worldcat/search"

KEY_ENV_VAR = "OCLC_API_KEY"

CAPABILITIES = AdapterCapabilities(
    supports_work_id=True,
    search_level="manifestation",
    extend_fields=(
        "isbn",
        "oclc_number",
        "lccn",
        "ddc",
        "subjects",
        "genres",
        "language",
    ),
    requires_key=True,
)


class OclcAdapter(SourceAdapter):
    source_id = SourceId.OCLC

    def __init__(
        self,
        api_key: str,
        transport: Optional[HttpTransport] = None,
        endpoint: str = DEFAULT_ENDPOINT,
        throttle: Optional[Throttle] = None,
    ):
        super().__init__(throttle)
        if not api_key:
            raise AuthFailure(f"oclc: no API key (set {KEY_ENV_VAR})")
        self._api_key = api_key
        self._transport = transport or HttpTransport()
        self._endpoint = endpoint.rstrip("/")

    def capabilities(self) -> AdapterCapabilities:
        return CAPABILITIES

    def _headers(self) -> dict[str, str]:
        return {"Authorization": f"Bearer {self._api_key}"}

    def _search_impl(self, query: AdapterQuery) -> list[CandidateRecord]:
        q = f'ti:"{query.title}"'
        if query.contributor:
            q += f' AND au:"{query.contributor}"'
        url = f"{self._endpoint}/brief-bibs"
        params = {"q": q, "limit": query.limit}
        payload = self._request(
            lambda: self._transport.get_json(url, params=params, headers=self._headers())
        )
        if not isinstance(payload, dict):
            raise MalformedResponse("oclc: expected JSON object", repr(payload))
        return [self._map_bib(bib) for bib in payload.get("bibRecords", [])]

    def _fetch_impl(self, native_id: str) -> CandidateRecord:
        url = f"{self._endpoint}/brief-bibs/{native_id}"
        payload = self._request(
            lambda: self._transport.get_json(url, headers=self._headers())
        )
        return self._map_bib(payload)

    def _map_bib(self, bib: Any) -> CandidateRecord:
        if not isinstance(bib, dict):
            raise MalformedResponse("oclc: non-object bib record", repr(bib))
        ident = bib.get("identifier") or {}
        oclc_number = str(ident.get("oclcNumber", "")).strip()
        if not oclc_number:
            raise MalformedResponse("oclc: bib without oclcNumber", repr(bib))
        numbers = [oclc_number] + [
            str(n) for n in ident.get("mergedOclcNumbers", []) if str(n)
        ]
        identifiers: dict[str, list[str]] = {"oclc_number": numbers}
        isbns = string_list(ident.get("isbns"))
        if isbns:
            identifiers["isbn"] = isbns
        lccn = first_string(ident.get("lccn"))
        if lccn:
            identifiers["lccn"] = [lccn]
        classification = bib.get("classification") or {}
        dewey = first_string(classification.get("dewey"))
        if dewey:
            identifiers["ddc"] = [dewey]

        title = first_string((bib.get("title") or {}).get("mainTitles"))
        contributors = []
        for creator in (bib.get("contributor") or {}).get("creators", []):
            first = first_string(creator.get("firstName"))
            second = first_string(creator.get("secondName"))
            name = " ".join(part for part in (first, second) if part)
            if name:
                contributors.append(name)

        metadata: dict[str, Any] = {}
        subjects = string_list(bib.get("subjects"))
        if subjects:
            metadata["subjects"] = subjects
        genres = string_list(bib.get("genres"))
        if genres:
            metadata["genres"] = genres
        language = first_string((bib.get("language") or {}).get("itemLanguage"))
        if language:
            metadata["language"] = language

        work = bib.get("work") or {}
        work_id = str(work.get("id", "")).strip() or None
        return CandidateRecord(
            source=SourceId.OCLC,
            native_id=oclc_number,
            title=title,
            contributors=contributors,
            work_id=work_id,
            identifiers=identifiers,
            metadata=metadata,
            provenance_url=f"https://search.worldcat.org/title/{oclc_number}",
        )
