"""HTTP service: the reconciliation wire protocol plus the curation API.

Implements the service side OpenRefine talks to (manifest, batched
reconcile, preview, data extension, protocol version 0.2) for every mounted
source, and the JSON API the cluster review UI consumes. One service
instance mounts each configured source under /api/<source>/ so a client can
register them as separate reconciliation services.
"""
from __future__ import annotations

import html
import json
import logging
import threading
from contextlib import asynccontextmanager
from pathlib import Path
from typing import Any, Optional

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import HTMLResponse, JSONResponse
from fastapi.staticfiles import StaticFiles

from .clustering import (
    CurationSession,
    UnknownMemberError,
    WorkCluster,
    apply_session,
    load_session,
    persist_session,
    toggle_member,
)
from .config import ServiceConfig
from .errors import AdapterError, NotFound
from .matching import ScoredCandidate
from .pipeline import reconcile_one
from .records import IDENTIFIER_KEYS, CandidateRecord, parse_global_id
from .sources import build_adapters
from .sources.base import SourceAdapter

logger = logging.getLogger(__name__)

PROTOCOL_VERSIONS = ["0.2"]
PREVIEW_WIDTH = 430
PREVIEW_HEIGHT = 300

DEFAULT_TYPES = [
    {"id": "work", "name": "Work"},
    {"id": "manifestation", "name": "Manifestation"},
]

SESSION_FILENAME = "curation-session.json"


class ServiceState:
    """Everything the endpoints share: adapters, caches, the curation session."""

    def __init__(self, config: ServiceConfig, adapters: dict[str, SourceAdapter]):
        self.config = config
        self.adapters = adapters
        self.clusters: dict[str, WorkCluster] = {}
        self._clusters_lock = threading.Lock()
        self._session_lock = threading.Lock()
        self.session_path = Path(config.session_dir) / SESSION_FILENAME
        if self.session_path.exists():
            self.session = load_session(self.session_path)
        else:
            self.session = CurationSession()

    def cache_cluster(self, cluster: WorkCluster) -> None:
        with self._clusters_lock:
            self.clusters[cluster.cluster_id] = cluster

    def get_cluster(self, cluster_id: str) -> Optional[WorkCluster]:
        with self._clusters_lock:
            return self.clusters.get(cluster_id)

    def all_clusters(self) -> list[WorkCluster]:
        with self._clusters_lock:
            return list(self.clusters.values())

    def record_toggle(self, cluster: WorkCluster, native_id: str, selected: bool) -> None:
        with self._session_lock:
            toggle_member(self.session, cluster, native_id, selected)
            self.flush_session()

    def flush_session(self) -> None:
        self.session_path.parent.mkdir(parents=True, exist_ok=True)
        persist_session(self.session, self.session_path)

    def adapter_for_record(self, source_token: str) -> list[SourceAdapter]:
        """Adapters able to serve records of the given source type."""
        return [a for a in self.adapters.values() if a.source_id.value == source_token]


def build_manifest(state: ServiceState, source_name: str) -> dict[str, Any]:
    base = state.config.resolved_base_url()
    return {
        "versions": PROTOCOL_VERSIONS,
        "name": f"bibrecon: {source_name}",
        "identifierSpace": f"{base}/api/{source_name}/identifier",
        "schemaSpace": f"{base}/api/{source_name}/schema",
        "defaultTypes": DEFAULT_TYPES,
        "view": {"url": f"{base}/curation/records/{{{{id}}}}"},
        "preview": {
            "url": f"{base}/api/{source_name}/preview?id={{{{id}}}}",
            "width": PREVIEW_WIDTH,
            "height": PREVIEW_HEIGHT,
        },
        "extend": {
            "propose_properties": {
                "service_url": base,
                "service_path": f"/api/{source_name}/properties",
            },
            "property_settings": [
                {
                    "name": "mode",
                    "label": "Multi-value mode",
                    "type": "select",
                    "default": "join",
                    "choices": [
                        {"value": "join", "name": "Join values with the delimiter"},
                        {"value": "explode", "name": "Explode values into rows"},
                    ],
                    "help_text": "How cells with several values are rendered.",
                },
                {
                    "name": "delimiter",
                    "label": "Join delimiter",
                    "type": "text",
                    "default": state.config.delimiter,
                    "help_text": "Separator used when joining multiple values.",
                },
            ],
        },
    }


class BatchError(ValueError):
    """Malformed reconcile batch; rejected before any query runs."""


def _property_text(value: Any) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, (int, float)):
        return str(value)
    if isinstance(value, dict):
        for key in ("name", "id", "value"):
            if isinstance(value.get(key), str):
                return value[key]
    if isinstance(value, list) and value:
        return _property_text(value[0])
    return ""


def parse_batch(raw: str, default_limit: int = 20) -> dict[str, dict[str, Any]]:
    """Parse and validate the JSON-encoded query batch; all-or-nothing."""
    try:
        payload = json.loads(raw)
    except json.JSONDecodeError as err:
        raise BatchError(f"queries is not valid JSON: {err}") from err
    if not isinstance(payload, dict):
        raise BatchError("queries must be a JSON object keyed by query id")

    parsed: dict[str, dict[str, Any]] = {}
    for key, query in payload.items():
        if not isinstance(query, dict):
            raise BatchError(f"query {key!r} must be an object")
        title = query.get("query")
        if not isinstance(title, str) or not title.strip():
            raise BatchError(f"query {key!r} has no query string")
        limit = query.get("limit", default_limit)
        if not isinstance(limit, int) or limit < 1:
            raise BatchError(f"query {key!r} has invalid limit {limit!r}")
        contributor: Optional[str] = None
        date: Optional[str] = None
        for prop in query.get("properties", []) or []:
            if not isinstance(prop, dict):
                raise BatchError(f"query {key!r} has a non-object property")
            pid = prop.get("pid") or prop.get("p")
            value = _property_text(prop.get("v"))
            if pid == "contributor":
                contributor = value or None
            elif pid == "date":
                date = value or None
            else:
                logger.warning("query %s: ignoring unknown property %r", key, pid)
        parsed[key] = {
            "title": title,
            "contributor": contributor,
            "date": date,
            "limit": limit,
        }
    return parsed


def run_batch(
    state: ServiceState, source_name: str, batch: dict[str, dict[str, Any]]
) -> dict[str, Any]:
    """Run every query; a failing query yields an empty result, never an abort."""
    adapter = state.adapters[source_name]
    level = adapter.capabilities().search_level
    type_refs = [t for t in DEFAULT_TYPES if t["id"] == level]
    response: dict[str, Any] = {}
    for key, query in batch.items():
        try:
            outcome = reconcile_one(
                adapter,
                title=query["title"],
                contributor=query["contributor"],
                date=query["date"],
                config=state.config.match,
                clustering_enabled=state.config.clustering_enabled,
                limit=query["limit"],
            )
        except AdapterError as err:
            logger.warning(
                "source %s query %s failed: %s", source_name, key, err
            )
            response[key] = {"result": []}
            continue
        if outcome.cluster is not None:
            state.cache_cluster(outcome.cluster)
        response[key] = {
            "result": [_render_result(s, type_refs) for s in outcome.ranked]
        }
    return response


def _render_result(scored: ScoredCandidate, type_refs: list[dict]) -> dict[str, Any]:
    return {
        "id": scored.candidate.global_id,
        "name": scored.candidate.title,
        "type": type_refs,
        "score": scored.combined_score,
        "match": scored.match,
    }


def render_preview(record: CandidateRecord) -> str:
    """Self-contained HTML fragment for the hover preview; no scripts."""
    parts = [
        f'<div class="bibrecon-preview" style="width:{PREVIEW_WIDTH - 20}px;'
        f"max-height:{PREVIEW_HEIGHT - 20}px;overflow:auto;margin:0;padding:10px;"
        'font-family:sans-serif;font-size:13px;line-height:1.35;">'
    ]
    thumbnail = record.metadata.get("thumbnail_url")
    if thumbnail:
        parts.append(
            f'<img src="{html.escape(str(thumbnail), quote=True)}" alt="" '
            'style="float:right;max-width:90px;max-height:130px;margin:0 0 6px 6px;"/>'
        )
    parts.append(f"<strong>{html.escape(record.title)}</strong>")
    if record.contributors:
        parts.append(f"<p>{html.escape('; '.join(record.contributors))}</p>")
    identifier_items = []
    for key in IDENTIFIER_KEYS:
        values = record.identifiers.get(key)
        if values:
            identifier_items.append(
                f"<li><b>{html.escape(key)}</b>: "
                f"{html.escape(', '.join(values))}</li>"
            )
    if identifier_items:
        parts.append(
            '<ul style="margin:4px 0;padding-left:18px;">'
            + "".join(identifier_items)
            + "</ul>"
        )
    description = record.metadata.get("description")
    if description:
        parts.append(f"<p>{html.escape(str(description)[:280])}</p>")
    parts.append(
        f'<a href="{html.escape(record.provenance_url, quote=True)}" '
        'target="_blank" rel="noopener">View source record</a>'
    )
    parts.append("</div>")
    return "".join(parts)


UNAVAILABLE_PREVIEW = (
    '<div class="bibrecon-preview" style="padding:10px;font-family:sans-serif;">'
    "<em>record unavailable</em></div>"
)


def _extension_values(record: CandidateRecord, field: str) -> list[str]:
    if field in record.identifiers:
        return list(record.identifiers[field])
    value = record.metadata.get(field)
    if value is None:
        return []
    if isinstance(value, list):
        return [str(v) for v in value]
    return [str(value)]


def run_extend(
    state: ServiceState, source_name: str, request: dict[str, Any]
) -> dict[str, Any]:
    """Data extension: fetch each id and render the requested fields."""
    adapter = state.adapters[source_name]
    capability_fields = set(adapter.capabilities().extend_fields) | set(IDENTIFIER_KEYS)

    ids = request.get("ids")
    properties = request.get("properties")
    if not isinstance(ids, list) or not all(isinstance(i, str) for i in ids):
        raise BatchError("extend.ids must be a list of strings")
    if not isinstance(properties, list) or not properties:
        raise BatchError("extend.properties must be a non-empty list")

    specs = []
    for prop in properties:
        if not isinstance(prop, dict) or not isinstance(prop.get("id"), str):
            raise BatchError("extend property entries need an 'id'")
        pid = prop["id"]
        if pid not in capability_fields:
            raise BatchError(f"unknown property {pid!r} for source {source_name!r}")
        settings = prop.get("settings") or {}
        mode = settings.get("mode", "join")
        if mode not in ("join", "explode"):
            raise BatchError(f"property {pid!r}: invalid mode {mode!r}")
        delimiter = settings.get("delimiter", state.config.delimiter)
        if mode == "join" and not delimiter:
            raise BatchError(f"property {pid!r}: join mode needs a delimiter")
        specs.append((pid, mode, delimiter))

    rows: dict[str, dict[str, list[dict[str, str]]]] = {}
    for global_id in ids:
        cells: dict[str, list[dict[str, str]]] = {pid: [] for pid, _, _ in specs}
        record = _lookup_record(state, global_id)
        if record is not None:
            for pid, mode, delimiter in specs:
                values = _extension_values(record, pid)
                if not values:
                    continue
                if mode == "join":
                    cells[pid] = [{"str": delimiter.join(values)}]
                else:
                    cells[pid] = [{"str": v} for v in values]
        rows[global_id] = cells

    meta = [{"id": pid, "name": pid.replace("_", " ")} for pid, _, _ in specs]
    return {"meta": meta, "rows": rows}


def _lookup_record(state: ServiceState, global_id: str) -> Optional[CandidateRecord]:
    try:
        source, native_id = parse_global_id(global_id)
    except ValueError:
        return None
    for adapter in state.adapter_for_record(source.value):
        try:
            return adapter.fetch_by_id(native_id)
        except AdapterError:
            continue
    return None


def _cluster_payload(state: ServiceState, cluster: WorkCluster) -> dict[str, Any]:
    cluster = apply_session(cluster, state.session)
    anchor = cluster.anchor
    return {
        "cluster_id": cluster.cluster_id,
        "source": cluster.source.value,
        "work_id": anchor.candidate.work_id,
        "anchor": {
            "global_id": anchor.candidate.global_id,
            "native_id": anchor.candidate.native_id,
            "title": anchor.candidate.title,
            "contributors": anchor.candidate.contributors,
            "score": anchor.combined_score,
            "title_score": anchor.title_score,
            "contributor_score": anchor.contributor_score,
        },
        "members": [
            {
                "native_id": m.candidate.native_id,
                "global_id": m.candidate.global_id,
                "title": m.candidate.title,
                "contributors": m.candidate.contributors,
                "identifiers": m.candidate.identifiers,
                "work_id": m.candidate.work_id,
                "selected": m.selected,
                "score": m.score,
                "provenance_url": m.candidate.provenance_url,
            }
            for m in cluster.members
        ],
    }


def create_app(
    config: ServiceConfig,
    adapters: Optional[dict[str, SourceAdapter]] = None,
) -> FastAPI:
    """Assemble the FastAPI application from a validated config."""
    if adapters is None:
        adapters, skipped = build_adapters(config.sources)
        for name, reason in skipped:
            logger.warning("source %s not mounted: %s", name, reason)
    if not adapters:
        from .config import ConfigError

        raise ConfigError("no usable sources; nothing to serve")

    state = ServiceState(config, adapters)

    @asynccontextmanager
    async def lifespan(_: FastAPI):
        yield
        state.flush_session()  # clean shutdown keeps curation decisions

    app = FastAPI(title="bibrecon", docs_url=None, redoc_url=None, lifespan=lifespan)
    app.state.service = state

    app.add_middleware(
        CORSMiddleware,
        allow_origins=[config.cors_origin] if config.cors_origin != "*" else ["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.exception_handler(RequestValidationError)
    async def _validation_as_400(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"detail": str(exc.errors())})

    @app.get("/")
    def service_info() -> dict[str, Any]:
        return {
            "status": "ok",
            "sources": sorted(state.adapters),
            "protocol_versions": PROTOCOL_VERSIONS,
        }

    def _require_source(source: str) -> Optional[JSONResponse]:
        if source not in state.adapters:
            return JSONResponse(
                status_code=404, content={"detail": f"unknown source {source!r}"}
            )
        return None

    @app.get("/api/{source}/")
    @app.get("/api/{source}")
    def manifest(source: str):
        missing = _require_source(source)
        if missing:
            return missing
        return build_manifest(state, source)

    @app.get("/api/{source}/reconcile")
    @app.post("/api/{source}/reconcile")
    async def reconcile(source: str, request: Request):
        missing = _require_source(source)
        if missing:
            return missing
        raw = request.query_params.get("queries")
        if raw is None and request.method == "POST":
            form = await request.form()
            raw = form.get("queries")
        if raw is None:
            # OpenRefine probes the reconcile URL for the manifest
            return build_manifest(state, source)
        try:
            batch = parse_batch(raw, state.adapters[source].default_limit)
        except BatchError as err:
            return JSONResponse(status_code=400, content={"detail": str(err)})
        return run_batch(state, source, batch)

    @app.get("/api/{source}/preview")
    def preview(source: str, id: str = ""):
        missing = _require_source(source)
        if missing:
            return missing
        try:
            record_source, native_id = parse_global_id(id)
        except ValueError as err:
            return JSONResponse(status_code=400, content={"detail": str(err)})
        adapter = state.adapters[source]
        record: Optional[CandidateRecord] = None
        if adapter.source_id is record_source:
            try:
                record = adapter.fetch_by_id(native_id)
            except AdapterError:
                record = None
        else:
            record = _lookup_record(state, id)
        if record is None:
            # OpenRefine treats non-200 previews as service errors
            return HTMLResponse(UNAVAILABLE_PREVIEW, status_code=200)
        return HTMLResponse(render_preview(record))

    @app.get("/api/{source}/properties")
    def propose_properties(source: str, type: str = "", limit: int = 0):
        missing = _require_source(source)
        if missing:
            return missing
        fields = list(
            dict.fromkeys(
                list(state.adapters[source].capabilities().extend_fields)
                + list(IDENTIFIER_KEYS)
            )
        )
        if limit > 0:
            fields = fields[:limit]
        return {
            "type": type or DEFAULT_TYPES[0]["id"],
            "properties": [
                {"id": f, "name": f.replace("_", " ")} for f in fields
            ],
        }

    @app.post("/api/{source}/extend")
    async def extend(source: str, request: Request):
        missing = _require_source(source)
        if missing:
            return missing
        raw = request.query_params.get("extend")
        if raw is None:
            form = await request.form()
            raw = form.get("extend")
        if raw is None:
            return JSONResponse(
                status_code=400, content={"detail": "missing 'extend' parameter"}
            )
        try:
            payload = json.loads(raw)
            if not isinstance(payload, dict):
                raise BatchError("extend must be a JSON object")
            return run_extend(state, source, payload)
        except (json.JSONDecodeError, BatchError) as err:
            return JSONResponse(status_code=400, content={"detail": str(err)})

    @app.get("/curation/clusters")
    def list_clusters():
        clusters = state.all_clusters()
        return {
            "clusters": [
                {
                    "cluster_id": c.cluster_id,
                    "source": c.source.value,
                    "anchor_title": c.anchor.candidate.title,
                    "member_count": len(c.members),
                }
                for c in sorted(clusters, key=lambda c: c.cluster_id)
            ]
        }

    @app.get("/curation/clusters/{cluster_id}")
    def get_cluster(cluster_id: str):
        cluster = state.get_cluster(cluster_id)
        if cluster is None:
            return JSONResponse(
                status_code=404, content={"detail": f"unknown cluster {cluster_id!r}"}
            )
        return _cluster_payload(state, cluster)

    @app.post("/curation/clusters/{cluster_id}/members/{native_id:path}")
    async def set_member_selection(cluster_id: str, native_id: str, request: Request):
        cluster = state.get_cluster(cluster_id)
        if cluster is None:
            return JSONResponse(
                status_code=404, content={"detail": f"unknown cluster {cluster_id!r}"}
            )
        try:
            body = await request.json()
        except json.JSONDecodeError:
            return JSONResponse(
                status_code=400, content={"detail": "body must be JSON"}
            )
        if not isinstance(body, dict) or not isinstance(body.get("selected"), bool):
            return JSONResponse(
                status_code=400,
                content={"detail": 'body must be {"selected": true|false}'},
            )
        try:
            state.record_toggle(cluster, native_id, body["selected"])
        except UnknownMemberError:
            return JSONResponse(
                status_code=404,
                content={"detail": f"no member {native_id!r} in {cluster_id!r}"},
            )
        return {
            "cluster_id": cluster_id,
            "native_id": native_id,
            "selected": body["selected"],
        }

    @app.get("/curation/records/{global_id:path}")
    def get_record(global_id: str):
        try:
            parse_global_id(global_id)
        except ValueError as err:
            return JSONResponse(status_code=400, content={"detail": str(err)})
        record = _lookup_record(state, global_id)
        if record is None:
            return JSONResponse(
                status_code=404, content={"detail": f"no record {global_id!r}"}
            )
        payload = record.to_dict()
        payload["global_id"] = record.global_id
        return payload

    ui_dir = config.ui_dir
    if ui_dir and Path(ui_dir).is_dir():
        app.mount("/ui", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app
