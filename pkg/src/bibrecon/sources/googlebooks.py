"""Google Books adapter (volumes API).

Manifestation-level search, no native Work identifier. Returns ISBNs plus
description, language, and page count; both ISBN-10 and ISBN-13 are kept
verbatim.
"""
from __future__ import annotations

from typing import Any, Optional

from ..errors import MalformedResponse
from ..ratelimit import Throttle
from ..records import AdapterCapabilities, AdapterQuery, CandidateRecord, SourceId
from .base import HttpTransport, SourceAdapter, string_list

DEFAULT_ENDPOINT = "https://www.googleapis.com/books/v1"

CAPABILITIES = AdapterCapabilities(
    supports_work_id=False,
    search_level="manifestation",
    extend_fields=("isbn", "description", "language", "page_count", "thumbnail_url"),
    requires_key=False,
)


class GoogleBooksAdapter(SourceAdapter):
    source_id = SourceId.GOOGLEBOOKS

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
        q = f'intitle:"{query.title}"'
        if query.contributor:
            q += f' inauthor:"{query.contributor}"'
        url = f"{self._endpoint}/volumes"
        params = {"q": q, "maxResults": min(query.limit, 40)}
        payload = self._request(lambda: self._transport.get_json(url, params=params))
        if not isinstance(payload, dict):
            raise MalformedResponse("googlebooks: expected JSON object", repr(payload))
        return [self._map_item(item) for item in payload.get("items", [])]

    def _fetch_impl(self, native_id: str) -> CandidateRecord:
        url = f"{self._endpoint}/volumes/{native_id}"
        payload = self._request(lambda: self._transport.get_json(url))
        return self._map_item(payload)

    def _map_item(self, item: Any) -> CandidateRecord:
        if not isinstance(item, dict) or "id" not in item:
            raise MalformedResponse("googlebooks: volume without id", repr(item))
        volume_id = item["id"]
        info = item.get("volumeInfo") or {}
        isbns = [
            ident.get("identifier", "")
            for ident in info.get("industryIdentifiers", [])
            if ident.get("type", "").startswith("ISBN") and ident.get("identifier")
        ]
        identifiers = {"isbn": isbns} if isbns else {}
        metadata: dict[str, Any] = {}
        if info.get("description"):
            metadata["description"] = info["description"]
        if info.get("language"):
            metadata["language"] = info["language"]
        if info.get("pageCount"):
            metadata["page_count"] = info["pageCount"]
        thumbnail = (info.get("imageLinks") or {}).get("thumbnail")
        if thumbnail:
            metadata["thumbnail_url"] = thumbnail
        provenance = (
            info.get("canonicalVolumeLink")
            or info.get("infoLink")
            or f"https://books.google.com/books?id={volume_id}"
        )
        return CandidateRecord(
            source=SourceId.GOOGLEBOOKS,
            native_id=volume_id,
            title=info.get("title", ""),
            contributors=string_list(info.get("authors")),
            work_id=None,
            identifiers=identifiers,
            metadata=metadata,
            provenance_url=provenance,
        )
