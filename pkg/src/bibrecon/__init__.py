"""bibrecon: bibliographic reconciliation, enrichment, and Work clustering."""
from __future__ import annotations

from .matching import (
    MatchConfig,
    NormalizedText,
    ScoredCandidate,
    combine_scores,
    decide_match,
    levenshtein,
    normalize,
    rank_candidates,
    token_sort_ratio,
)
from .records import (
    AdapterCapabilities,
    AdapterQuery,
    CandidateRecord,
    SourceId,
    parse_global_id,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "AdapterCapabilities",
    "AdapterQuery",
    "CandidateRecord",
    "MatchConfig",
    "NormalizedText",
    "ScoredCandidate",
    "SourceId",
    "combine_scores",
    "decide_match",
    "levenshtein",
    "normalize",
    "parse_global_id",
    "rank_candidates",
    "token_sort_ratio",
]
