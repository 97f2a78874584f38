"""Wikidata adapter (entity-search plus entity-data enrichment).

Work-level search through the public wbsearchentities endpoint, filtered to
written-work instances via a follow-up wbgetentities call that also yields
identifier claims (ISBN, OCLC, LCCN, VIAF) and author labels. SPARQL is left
out of this version; the entity API covers the reconciliation path.
"""
from __future__ import annotations

from typing import Any, Optional

from ..errors import MalformedResponse
from ..ratelimit import Throttle
from ..records import AdapterCapabilities, AdapterQuery, CandidateRecord, SourceId
from .base import HttpTransport, SourceAdapter

DEFAULT_ENDPOINT = "https://www.wikidata.org/w/api.php"

# instance-of values accepted as reconcilable written works
WORK_CLASS_QIDS = {
    "Q571",  # book
    "Q7725634",  # literary work
    "Q47461344",  # written work
    "Q8261",  # novel
    "Q49084",  # short story
    "Q5185279",  # poem
    "Q1279564",  # short story collection
    "Q12106333",  # poetry collection
    "Q149537",  # novella
    "Q35760",  # essay
}

# identifier-claim property -> our identifier key
CLAIM_IDENTIFIERS = {
    "P212": "isbn",  # ISBN-13
    "P957": "isbn",  # ISBN-10
    "P243": "oclc_number",
    "P1144": "lccn",
    "P214": "viaf_id",
}

P_INSTANCE_OF = "P31"
P_AUTHOR = "P50"

CAPABILITIES = AdapterCapabilities(
    supports_work_id=True,
    search_level="work",
    extend_fields=("wikidata_qid", "isbn", "oclc_number", "lccn", "viaf_id"),
    requires_key=False,
)


def _claim_values(entity: dict, prop: str) -> list[str]:
    values = []
    for claim in (entity.get("claims") or {}).get(prop, []):
        snak = (claim.get("mainsnak") or {}).get("datavalue") or {}
        value = snak.get("value")
        if isinstance(value, dict) and "id" in value:
            values.append(str(value["id"]))
        elif isinstance(value, (str, int, float)):
            values.append(str(value))
    return values


class WikidataAdapter(SourceAdapter):
    source_id = SourceId.WIKIDATA

    def __init__(
        self,
        transport: Optional[HttpTransport] = None,
        endpoint: str = DEFAULT_ENDPOINT,
        throttle: Optional[Throttle] = None,
        language: str = "en",
    ):
        super().__init__(throttle)
        self._transport = transport or HttpTransport()
        self._endpoint = endpoint
        self._language = language

    def capabilities(self) -> AdapterCapabilities:
        return CAPABILITIES

    def _api(self, **params: Any) -> dict:
        all_params = {"format": "json", **params}
        payload = self._request(
            lambda: self._transport.get_json(self._endpoint, params=all_params)
        )
        if not isinstance(payload, dict):
            raise MalformedResponse("wikidata: expected JSON object", repr(payload))
        return payload

    def _search_impl(self, query: AdapterQuery) -> list[CandidateRecord]:
        search = self._api(
            action="wbsearchentities",
            search=query.title,
            language=self._language,
            type="item",
            limit=query.limit,
        )
        qids = [
            entry["id"]
            for entry in search.get("search", [])
            if isinstance(entry, dict) and entry.get("id")
        ]
        if not qids:
            return []

        entities = self._get_entities(qids)
        works: list[tuple[str, dict]] = []
        author_qids: list[str] = []
        for qid in qids:
            entity = entities.get(qid)
            if not entity:
                continue
            instance_of = set(_claim_values(entity, P_INSTANCE_OF))
            if not instance_of & WORK_CLASS_QIDS:
                continue  # not a written work; drop people, films, etc.
            works.append((qid, entity))
            author_qids.extend(_claim_values(entity, P_AUTHOR))

        author_labels = self._labels(author_qids) if author_qids else {}
        return [self._map_entity(qid, entity, author_labels) for qid, entity in works]

    def _get_entities(self, qids: list[str]) -> dict[str, dict]:
        payload = self._api(
            action="wbgetentities",
            ids="|".join(qids),
            props="claims|labels",
            languages=self._language,
        )
        entities = payload.get("entities")
        if not isinstance(entities, dict):
            raise MalformedResponse("wikidata: missing 'entities'", repr(payload))
        return entities

    def _labels(self, qids: list[str]) -> dict[str, str]:
        unique = list(dict.fromkeys(qids))
        payload = self._api(
            action="wbgetentities",
            ids="|".join(unique),
            props="labels",
            languages=self._language,
        )
        labels = {}
        for qid, entity in (payload.get("entities") or {}).items():
            label = ((entity.get("labels") or {}).get(self._language) or {}).get("value")
            if label:
                labels[qid] = label
        return labels

    def _map_entity(
        self, qid: str, entity: dict, author_labels: dict[str, str]
    ) -> CandidateRecord:
        label = ((entity.get("labels") or {}).get(self._language) or {}).get("value", "")
        identifiers: dict[str, list[str]] = {"wikidata_qid": [qid]}
        for prop, key in CLAIM_IDENTIFIERS.items():
            for value in _claim_values(entity, prop):
                identifiers.setdefault(key, [])
                if value not in identifiers[key]:
                    identifiers[key].append(value)
        contributors = [
            author_labels[a] for a in _claim_values(entity, P_AUTHOR) if a in author_labels
        ]
        return CandidateRecord(
            source=SourceId.WIKIDATA,
            native_id=qid,
            title=label,
            contributors=contributors,
            work_id=qid,
            identifiers=identifiers,
            metadata={},
            provenance_url=f"https://www.wikidata.org/wiki/{qid}",
        )

    def _fetch_impl(self, native_id: str) -> CandidateRecord:
        entities = self._get_entities([native_id])
        entity = entities.get(native_id)
        if not entity or "missing" in entity:
            from ..errors import NotFound

            raise NotFound(f"wikidata: no entity {native_id!r}")
        author_qids = _claim_values(entity, P_AUTHOR)
        author_labels = self._labels(author_qids) if author_qids else {}
        return self._map_entity(native_id, entity, author_labels)
