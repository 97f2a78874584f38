"""Normalization and similarity scoring for bibliographic matching.

Pure, stateless functions: text is case/diacritic-folded and tokenized, the
tokens are alpha-sorted, and candidates are ranked by a 0-100 edit-distance
ratio between the sorted-token forms. This makes "Truong, Monique" and
"Monique Truong" compare equal, which is the whole point.
"""
from __future__ import annotations

import unicodedata
from dataclasses import dataclass, replace
from typing import Optional, Sequence

from .records import AdapterQuery, CandidateRecord


@dataclass(frozen=True)
class NormalizedText:
    """Folded, tokenized, alpha-sorted text.

    ``canonical`` is the sorted tokens joined with single spaces; it contains
    no uppercase, no punctuation, and no leading/trailing/double spaces.
    """

    tokens: tuple[str, ...]
    canonical: str


@dataclass(frozen=True)
class MatchConfig:
    """Tunable matching knobs. The score threshold defaults to 80."""

    threshold: int = 80
    contributor_gate: int = 50
    title_weight: float = 0.75
    tie_margin: int = 1

    def __post_init__(self) -> None:
        if not 0 <= self.threshold <= 100:
            raise ValueError("threshold must be in [0, 100]")
        if not 0 <= self.contributor_gate <= 100:
            raise ValueError("contributor_gate must be in [0, 100]")
        if not 0.0 <= self.title_weight <= 1.0:
            raise ValueError("title_weight must be in [0, 1]")
        if self.tie_margin < 0:
            raise ValueError("tie_margin must be >= 0")


@dataclass
class ScoredCandidate:
    """A candidate with its title/contributor/combined scores and match flag."""

    candidate: CandidateRecord
    title_score: int
    contributor_score: Optional[int]
    combined_score: int
    match: bool = False


def normalize(text: str) -> NormalizedText:
    """Fold case and diacritics, strip punctuation, and alpha-sort the tokens.

    Total function: any Unicode string (including "") is accepted. Idempotent
    on its own canonical output.
    """
    folded = unicodedata.normalize("NFKD", text.casefold())
    stripped = "".join(ch for ch in folded if not unicodedata.combining(ch))
    # compatibility decomposition can reintroduce case (e.g. roman numerals)
    stripped = stripped.casefold()
    spaced = "".join(ch if ch.isalnum() else " " for ch in stripped)
    tokens = tuple(sorted(spaced.split()))
    return NormalizedText(tokens=tokens, canonical=" ".join(tokens))


def levenshtein(a: str, b: str) -> int:
    """Minimum number of single-character edits transforming a into b."""
    n, m = len(a), len(b)
    if n > m:
        # keep the row O(min(n, m))
        a, b = b, a
        n, m = m, n
    if n == 0:
        return m
    current = list(range(n + 1))
    for i in range(1, m + 1):
        previous, current = current, [i] + [0] * n
        for j in range(1, n + 1):
            insert = previous[j] + 1
            delete = current[j - 1] + 1
            change = previous[j - 1] + (a[j - 1] != b[i - 1])
            current[j] = min(insert, delete, change)
    return current[n]


def _round_half_up(numerator: int, denominator: int) -> int:
    """Round-half-up of a non-negative exact fraction, in integer arithmetic."""
    return (2 * numerator + denominator) // (2 * denominator)


def token_sort_ratio(a: str, b: str) -> int:
    """Similarity ratio 0-100 between the normalized, token-sorted forms.

    100 * (L - d) / L rounded half-up, where d is the edit distance between
    the canonical forms and L the longer canonical length; two empty
    canonicals score 100. Symmetric in its arguments.
    """
    ca = normalize(a).canonical
    cb = normalize(b).canonical
    longest = max(len(ca), len(cb))
    if longest == 0:
        return 100
    distance = levenshtein(ca, cb)
    return _round_half_up(100 * (longest - distance), longest)


def combine_scores(
    title_score: int,
    contributor_score: Optional[int],
    config: MatchConfig,
) -> int:
    """Blend title and contributor scores into one 0-100 score.

    No contributor score: the title score stands alone. A contributor score
    below the gate forces 0 — a perfect title must not match the wrong
    author. Otherwise a weighted average (title_weight : 1 - title_weight).
    """
    if contributor_score is None:
        return title_score
    if contributor_score < config.contributor_gate:
        return 0
    blended = (
        config.title_weight * title_score
        + (1.0 - config.title_weight) * contributor_score
    )
    return int(blended + 0.5)  # round half up; blended is never negative


def score_candidate(
    query: AdapterQuery,
    candidate: CandidateRecord,
    config: MatchConfig,
) -> ScoredCandidate:
    """Score one candidate against the query.

    The contributor score is the best ratio over the candidate's
    contributors; a candidate with no contributor data is scored on title
    alone (absence of an author is not a wrong author).
    """
    title_score = token_sort_ratio(query.title, candidate.title)
    contributor_score: Optional[int] = None
    if query.contributor and candidate.contributors:
        contributor_score = max(
            token_sort_ratio(query.contributor, name)
            for name in candidate.contributors
        )
    combined = combine_scores(title_score, contributor_score, config)
    return ScoredCandidate(
        candidate=candidate,
        title_score=title_score,
        contributor_score=contributor_score,
        combined_score=combined,
    )


def rank_candidates(
    query: AdapterQuery,
    candidates: Sequence[CandidateRecord],
    config: MatchConfig,
) -> list[ScoredCandidate]:
    """Score every candidate and sort by combined score, best first.

    Ties break on the source-native id, ascending, so the order is a
    deterministic function of the input multiset. Match flags are set per
    decide_match.
    """
    scored = [score_candidate(query, c, config) for c in candidates]
    scored.sort(key=lambda s: (-s.combined_score, s.candidate.native_id))
    return decide_match(scored, config)


def decide_match(
    ranked: list[ScoredCandidate],
    config: MatchConfig,
) -> list[ScoredCandidate]:
    """Flag the top candidate as the match, when it clearly wins.

    The top candidate matches iff its score reaches the threshold and beats
    the runner-up by at least tie_margin; equal-score rivals defer the call
    to human review. At most one candidate is ever flagged.
    """
    flagged = [replace(s, match=False) for s in ranked]
    if not flagged:
        return flagged
    top = flagged[0]
    clear_winner = (
        len(flagged) == 1
        or top.combined_score - flagged[1].combined_score >= config.tie_margin
    )
    if top.combined_score >= config.threshold and clear_winner:
        flagged[0] = replace(top, match=True)
    return flagged
