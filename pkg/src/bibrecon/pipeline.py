"""One reconciliation pass: search a source, rank, decide, cluster.

Shared by the HTTP service, the batch CSV runner, and the evaluation
harness so they cannot drift apart.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .clustering import WorkCluster, build_cluster
from .matching import MatchConfig, ScoredCandidate, rank_candidates
from .records import AdapterQuery
from .sources.base import SourceAdapter


@dataclass
class QueryOutcome:
    """Ranked candidates plus the Work cluster (when the top candidate matched)."""

    ranked: list[ScoredCandidate]
    cluster: Optional[WorkCluster]

    @property
    def best(self) -> Optional[ScoredCandidate]:
        return self.ranked[0] if self.ranked else None

    @property
    def matched(self) -> bool:
        return self.best is not None and self.best.match


def reconcile_one(
    adapter: SourceAdapter,
    title: str,
    contributor: Optional[str] = None,
    date: Optional[str] = None,
    config: Optional[MatchConfig] = None,
    clustering_enabled: bool = True,
    limit: int = 20,
) -> QueryOutcome:
    """Reconcile one (title, contributor) pair against one source."""
    config = config or MatchConfig()
    query = AdapterQuery(
        title=title, contributor=contributor or None, date=date or None, limit=limit
    )
    candidates = adapter.search(query)
    ranked = rank_candidates(query, candidates, config)
    cluster = build_cluster(
        ranked,
        config,
        clustering_enabled=clustering_enabled,
        supports_work_id=adapter.capabilities().supports_work_id,
    )
    return QueryOutcome(ranked=ranked, cluster=cluster)
