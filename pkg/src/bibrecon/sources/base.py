"""Adapter contract shared by every bibliographic source.

An adapter shapes the query for its source, maps the response onto
CandidateRecord, and validates at the boundary so nothing malformed leaks
into matching or clustering. All upstream requests route through the
per-source throttle when one is attached.
"""
from __future__ import annotations

from abc import ABC, abstractmethod
from typing import Any, Callable, ClassVar, Optional, TypeVar

import requests

from ..errors import (
    AuthFailure,
    MalformedResponse,
    NetworkFailure,
    NotFound,
    RateLimited,
)
from ..ratelimit import Throttle
from ..records import AdapterCapabilities, AdapterQuery, CandidateRecord, SourceId

T = TypeVar("T")


class HttpTransport:
    """Thin JSON-over-HTTP client that maps failures onto the adapter errors."""

    def __init__(self, timeout: float = 15.0, session: Optional[requests.Session] = None):
        self.timeout = timeout
        self._session = session or requests.Session()

    def get_json(
        self,
        url: str,
        params: Optional[dict[str, Any]] = None,
        headers: Optional[dict[str, str]] = None,
    ) -> Any:
        try:
            response = self._session.get(
                url, params=params, headers=headers, timeout=self.timeout
            )
        except requests.RequestException as err:
            raise NetworkFailure(f"GET {url}: {err}") from err
        if response.status_code in (401, 403):
            raise AuthFailure(f"GET {url}: HTTP {response.status_code}")
        if response.status_code == 429:
            raise RateLimited(f"GET {url}: HTTP 429")
        if response.status_code == 404:
            raise NotFound(f"GET {url}: HTTP 404")
        if response.status_code >= 500:
            raise NetworkFailure(f"GET {url}: HTTP {response.status_code}")
        if response.status_code >= 400:
            raise MalformedResponse(
                f"GET {url}: HTTP {response.status_code}", response.text
            )
        try:
            return response.json()
        except ValueError as err:
            raise MalformedResponse(
                f"GET {url}: body is not JSON", response.text
            ) from err


class SourceAdapter(ABC):
    """Uniform search/fetch surface over one bibliographic source."""

    source_id: ClassVar[SourceId]

    def __init__(self, throttle: Optional[Throttle] = None):
        self._throttle = throttle
        # configured result-set cap, used when a query does not name one
        self.default_limit = 20
        # records already mapped this process; lets preview/extend fetch by id
        # without a second upstream round trip
        self._seen: dict[str, CandidateRecord] = {}

    def _request(self, fn: Callable[[], T]) -> T:
        """Run one upstream request through the throttle, when attached."""
        if self._throttle is None:
            return fn()
        return self._throttle.call(fn)

    @abstractmethod
    def capabilities(self) -> AdapterCapabilities:
        """Static description of what this source supports."""

    @abstractmethod
    def _search_impl(self, query: AdapterQuery) -> list[CandidateRecord]:
        ...

    def _fetch_impl(self, native_id: str) -> CandidateRecord:
        # sources without an id-lookup endpoint only serve ids seen in search
        raise NotFound(
            f"{self.source_id.value}: record {native_id!r} not in this "
            "session's search results and the source has no id lookup"
        )

    def search(self, query: AdapterQuery) -> list[CandidateRecord]:
        """Search the source; at most query.limit validated records."""
        records = self._search_impl(query)[: query.limit]
        for record in records:
            record.validate()
            self._seen[record.native_id] = record
        return records

    def fetch_by_id(self, native_id: str) -> CandidateRecord:
        """The full record for an id from search, or a well-formed source id."""
        cached = self._seen.get(native_id)
        if cached is not None:
            return cached
        record = self._fetch_impl(native_id).validate()
        self._seen[native_id] = record
        return record


def first_string(value: Any) -> str:
    """Best-effort scalar out of the string/list/dict shapes APIs return."""
    if isinstance(value, str):
        return value
    if isinstance(value, (int, float)):
        return str(value)
    if isinstance(value, list) and value:
        return first_string(value[0])
    if isinstance(value, dict):
        for key in ("text", "name", "value", "label"):
            if key in value:
                return first_string(value[key])
    return ""


def string_list(value: Any) -> list[str]:
    """Coerce an API field to a flat list of non-empty strings."""
    if value is None:
        return []
    if isinstance(value, (str, int, float)):
        text = str(value)
        return [text] if text else []
    if isinstance(value, list):
        out = []
        for item in value:
            text = first_string(item)
            if text:
                out.append(text)
        return out
    text = first_string(value)
    return [text] if text else []
