"""Work clusters: group same-Work records, track human curation, persist it.

A cluster starts from the anchor (the automatic best match) and pulls in the
other retrieved records that belong to the same Work. Every member starts
selected; the human curator gets the final say and their decisions are stored
in a CurationSession that survives restarts.
"""
from __future__ import annotations

import hashlib
import json
import uuid
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional

from .matching import MatchConfig, ScoredCandidate
from .records import IDENTIFIER_KEYS, CandidateRecord, SourceId

SESSION_SCHEMA_VERSION = 1


class UnknownMemberError(KeyError):
    """Toggled a native_id that is not a member of the cluster."""


class SchemaVersionMismatchError(ValueError):
    """Session file was written with an unsupported schema version."""


@dataclass
class ClusterMember:
    candidate: CandidateRecord
    score: int
    selected: bool = True


@dataclass
class WorkCluster:
    """An anchor match plus the member records sharing its Work."""

    cluster_id: str
    source: SourceId
    anchor: ScoredCandidate
    members: list[ClusterMember]

    def member(self, native_id: str) -> ClusterMember:
        for m in self.members:
            if m.candidate.native_id == native_id:
                return m
        raise UnknownMemberError(native_id)


@dataclass
class Decision:
    selected: bool
    timestamp: datetime


@dataclass
class CurationSession:
    """Persisted record of human include/exclude decisions."""

    session_id: str = field(default_factory=lambda: uuid.uuid4().hex)
    decisions: dict[tuple[str, str], Decision] = field(default_factory=dict)
    created_at: datetime = field(default_factory=lambda: datetime.now(timezone.utc))
    updated_at: datetime = field(default_factory=lambda: datetime.now(timezone.utc))


def _cluster_id_for(source: SourceId, work_id: Optional[str], native_id: str) -> str:
    if work_id:
        return f"{source.value}:{work_id}"
    digest = hashlib.sha1(native_id.encode("utf-8")).hexdigest()[:16]
    return f"{source.value}:{digest}"


def build_cluster(
    ranked: list[ScoredCandidate],
    config: MatchConfig,
    clustering_enabled: bool = True,
    supports_work_id: bool = False,
) -> Optional[WorkCluster]:
    """Build the Work cluster around the top-ranked candidate.

    No match, no cluster. With clustering disabled the cluster holds only the
    anchor. Sources with native Work identifiers cluster every retrieved
    record sharing the anchor's work_id; sources without them fall back to
    grouping records that score at or above the match threshold.
    """
    if not ranked:
        return None
    anchor = ranked[0]
    if not anchor.match:
        return None

    anchor_work_id = anchor.candidate.work_id
    cluster_id = _cluster_id_for(
        anchor.candidate.source, anchor_work_id, anchor.candidate.native_id
    )

    if not clustering_enabled:
        chosen = [anchor]
    elif supports_work_id:
        if anchor_work_id:
            chosen = [s for s in ranked if s.candidate.work_id == anchor_work_id]
        else:
            # work-id source but the anchor record carries none: grouping by a
            # missing id would lump unrelated records, so keep the anchor alone
            chosen = [anchor]
    else:
        chosen = [s for s in ranked if s.combined_score >= config.threshold]

    members = [
        ClusterMember(candidate=s.candidate, score=s.combined_score) for s in chosen
    ]
    return WorkCluster(
        cluster_id=cluster_id,
        source=anchor.candidate.source,
        anchor=anchor,
        members=members,
    )


def toggle_member(
    session: CurationSession,
    cluster: WorkCluster,
    native_id: str,
    selected: bool,
) -> CurationSession:
    """Record a human include/exclude decision for one cluster member."""
    cluster.member(native_id)  # raises UnknownMemberError
    now = datetime.now(timezone.utc)
    session.decisions[(cluster.cluster_id, native_id)] = Decision(selected, now)
    session.updated_at = now
    return session


def apply_session(cluster: WorkCluster, session: CurationSession) -> WorkCluster:
    """Return the cluster with member selection states overridden by decisions."""
    members = []
    for m in cluster.members:
        decision = session.decisions.get((cluster.cluster_id, m.candidate.native_id))
        if decision is not None and decision.selected != m.selected:
            m = replace(m, selected=decision.selected)
        members.append(m)
    return replace(cluster, members=members)


def persist_session(session: CurationSession, path: Path | str) -> None:
    """Write the session to disk as the documented JSON schema (version 1)."""
    payload = {
        "schema_version": SESSION_SCHEMA_VERSION,
        "session_id": session.session_id,
        "created_at": session.created_at.isoformat(),
        "updated_at": session.updated_at.isoformat(),
        "decisions": [
            {
                "cluster_id": cluster_id,
                "native_id": native_id,
                "selected": decision.selected,
                "timestamp": decision.timestamp.isoformat(),
            }
            for (cluster_id, native_id), decision in session.decisions.items()
        ],
    }
    Path(path).write_text(
        json.dumps(payload, ensure_ascii=False, indent=2), encoding="utf-8"
    )


def load_session(path: Path | str) -> CurationSession:
    """Load a persisted session; raises SchemaVersionMismatchError when stale."""
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    version = payload.get("schema_version")
    if version != SESSION_SCHEMA_VERSION:
        raise SchemaVersionMismatchError(
            f"session file {path} has schema_version {version!r}, "
            f"expected {SESSION_SCHEMA_VERSION}"
        )
    decisions = {
        (d["cluster_id"], d["native_id"]): Decision(
            selected=bool(d["selected"]),
            timestamp=datetime.fromisoformat(d["timestamp"]),
        )
        for d in payload.get("decisions", [])
    }
    return CurationSession(
        session_id=payload["session_id"],
        decisions=decisions,
        created_at=datetime.fromisoformat(payload["created_at"]),
        updated_at=datetime.fromisoformat(payload["updated_at"]),
    )


def merge_identifiers(clusters: list[WorkCluster]) -> dict[str, list[str]]:
    """Union the identifier lists of every selected member, first-seen order."""
    merged: dict[str, list[str]] = {}
    seen: dict[str, set[str]] = {}
    for cluster in clusters:
        for member in cluster.members:
            if not member.selected:
                continue
            for key in IDENTIFIER_KEYS:
                for value in member.candidate.identifiers.get(key, []):
                    if value not in seen.setdefault(key, set()):
                        seen[key].add(value)
                        merged.setdefault(key, []).append(value)
    return merged
