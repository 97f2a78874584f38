"""Source adapters: one uniform contract over six bibliographic sources
plus the deterministic fixture source."""
from __future__ import annotations

import logging
import os
from pathlib import Path
from typing import TYPE_CHECKING, Optional

from ..errors import UnknownSource
from ..ratelimit import RetryPolicy, Throttle, TokenBucket
from ..records import AdapterCapabilities, SourceId
from .base import HttpTransport, SourceAdapter
from .fixture import FixtureAdapter, load_corpus
from .googlebooks import CAPABILITIES as GOOGLEBOOKS_CAPABILITIES
from .googlebooks import GoogleBooksAdapter
from .hathitrust import CAPABILITIES as HATHITRUST_CAPABILITIES
from .hathitrust import HathiTrustAdapter
from .loc import CAPABILITIES as LOC_CAPABILITIES
from .loc import LocAdapter
from .oclc import CAPABILITIES as OCLC_CAPABILITIES
from .oclc import KEY_ENV_VAR, OclcAdapter
from .viaf import CAPABILITIES as VIAF_CAPABILITIES
from .viaf import ViafAdapter
from .wikidata import CAPABILITIES as WIKIDATA_CAPABILITIES
from .wikidata import WikidataAdapter

if TYPE_CHECKING:
    from ..config import SourceSettings

logger = logging.getLogger(__name__)

__all__ = [
    "SourceAdapter",
    "HttpTransport",
    "FixtureAdapter",
    "GoogleBooksAdapter",
    "HathiTrustAdapter",
    "LocAdapter",
    "OclcAdapter",
    "ViafAdapter",
    "WikidataAdapter",
    "capabilities",
    "build_adapter",
    "build_adapters",
    "load_corpus",
]

_STATIC_CAPABILITIES: dict[SourceId, AdapterCapabilities] = {
    SourceId.LOC: LOC_CAPABILITIES,
    SourceId.GOOGLEBOOKS: GOOGLEBOOKS_CAPABILITIES,
    SourceId.VIAF: VIAF_CAPABILITIES,
    SourceId.OCLC: OCLC_CAPABILITIES,
    SourceId.WIKIDATA: WIKIDATA_CAPABILITIES,
    SourceId.HATHITRUST: HATHITRUST_CAPABILITIES,
}


def capabilities(source: SourceId | str) -> AdapterCapabilities:
    """Static capabilities per source; the fixture source is configurable
    and reports its defaults here."""
    try:
        source = SourceId(source)
    except ValueError:
        raise UnknownSource(f"unknown source {source!r}") from None
    if source is SourceId.FIXTURE:
        return FixtureAdapter(corpus=[]).capabilities()
    return _STATIC_CAPABILITIES[source]


def make_throttle(
    name: str,
    rate: float = 5.0,
    burst: int = 5,
    retry: Optional[RetryPolicy] = None,
) -> Throttle:
    return Throttle(name, TokenBucket(rate=rate, burst=burst), retry or RetryPolicy())


# network sources get polite pacing by default; local ones run flat out
NETWORK_RATE = (5.0, 5)
LOCAL_RATE = (1000.0, 1000)
LOCAL_TYPES = {SourceId.FIXTURE, SourceId.HATHITRUST}


def build_adapter(settings: "SourceSettings") -> SourceAdapter:
    """Construct one adapter from its settings. Raises on misconfiguration."""
    kind = SourceId(settings.type)
    default_rate, default_burst = LOCAL_RATE if kind in LOCAL_TYPES else NETWORK_RATE
    throttle = make_throttle(
        settings.name,
        settings.rate if settings.rate is not None else default_rate,
        settings.burst if settings.burst is not None else default_burst,
    )

    if kind is SourceId.FIXTURE:
        if not settings.corpus:
            raise ValueError(f"source {settings.name!r}: fixture needs a corpus path")
        return FixtureAdapter.from_file(settings.corpus, throttle=throttle)

    if kind is SourceId.HATHITRUST:
        from ..ingest import build_index, load_dump, load_records

        if settings.index_path and Path(settings.index_path).exists():
            records = load_records(settings.index_path)
        elif settings.dump_path:
            records = load_dump(settings.dump_path, settings.column_map).records
        else:
            raise ValueError(
                f"source {settings.name!r}: hathitrust needs an index artifact "
                "or a dump file (run ingest-hathitrust first)"
            )
        return HathiTrustAdapter(build_index(records), throttle=throttle)

    if kind is SourceId.OCLC:
        api_key = settings.api_key or os.environ.get(KEY_ENV_VAR, "")
        if not api_key:
            raise ValueError(
                f"source {settings.name!r}: requires an API key "
                f"(set {KEY_ENV_VAR})"
            )
        kwargs = {"throttle": throttle}
        if settings.endpoint:
            kwargs["endpoint"] = settings.endpoint
        return OclcAdapter(api_key, **kwargs)

    simple = {
        SourceId.LOC: LocAdapter,
        SourceId.GOOGLEBOOKS: GoogleBooksAdapter,
        SourceId.VIAF: ViafAdapter,
        SourceId.WIKIDATA: WikidataAdapter,
    }
    adapter_cls = simple.get(kind)
    if adapter_cls is None:
        raise UnknownSource(f"unknown source type {settings.type!r}")
    kwargs = {"throttle": throttle}
    if settings.endpoint:
        kwargs["endpoint"] = settings.endpoint
    if kind is SourceId.LOC and settings.search_path:
        kwargs["search_path"] = settings.search_path
    return adapter_cls(**kwargs)


def build_adapters(
    sources: list["SourceSettings"],
) -> tuple[dict[str, SourceAdapter], list[tuple[str, str]]]:
    """Build every configured adapter; misconfigured ones are skipped with a
    reason instead of failing the whole run (a keyless OCLC should not take
    the batch down)."""
    adapters: dict[str, SourceAdapter] = {}
    skipped: list[tuple[str, str]] = []
    for settings in sources:
        try:
            adapter = build_adapter(settings)
            adapter.default_limit = settings.limit
            adapters[settings.name] = adapter
        except (ValueError, OSError) as err:
            logger.warning("source %s disabled: %s", settings.name, err)
            skipped.append((settings.name, str(err)))
    return adapters, skipped
