from __future__ import annotations

import json
import random

import pytest

from bibrecon.clustering import (
    CurationSession,
    SchemaVersionMismatchError,
    UnknownMemberError,
    apply_session,
    build_cluster,
    load_session,
    merge_identifiers,
    persist_session,
    toggle_member,
)
from bibrecon.matching import MatchConfig, ScoredCandidate
from bibrecon.records import CandidateRecord, SourceId


def scored(native_id, score, match=False, work_id=None, identifiers=None):
    record = CandidateRecord(
        source=SourceId.FIXTURE,
        native_id=native_id,
        title=f"Title {native_id}",
        work_id=work_id,
        identifiers=identifiers or {},
        provenance_url=f"https://fixture.example/records/{native_id}",
    )
    return ScoredCandidate(
        candidate=record,
        title_score=score,
        contributor_score=None,
        combined_score=score,
        match=match,
    )


@pytest.fixture
def config():
    return MatchConfig()


class TestBuildCluster:
    def test_same_work_members_only(self, config):
        ranked = [
            scored("a", 95, match=True, work_id="W1"),
            scored("b", 85, work_id="W1"),
            scored("c", 84, work_id="W2"),
        ]
        cluster = build_cluster(ranked, config, supports_work_id=True)
        assert cluster is not None
        assert [m.candidate.native_id for m in cluster.members] == ["a", "b"]
        assert cluster.cluster_id == "fixture:W1"

    def test_clustering_disabled_keeps_only_anchor(self, config):
        ranked = [
            scored("a", 95, match=True, work_id="W1"),
            scored("b", 92, work_id="W1"),
        ]
        cluster = build_cluster(
            ranked, config, clustering_enabled=False, supports_work_id=True
        )
        assert [m.candidate.native_id for m in cluster.members] == ["a"]

    def test_no_match_no_cluster(self, config):
        ranked = [scored("a", 79, match=False, work_id="W1")]
        assert build_cluster(ranked, config, supports_work_id=True) is None

    def test_empty_ranking_no_cluster(self, config):
        assert build_cluster([], config) is None

    def test_score_fallback_for_sources_without_work_ids(self, config):
        ranked = [
            scored("a", 95, match=True),
            scored("b", 81),
            scored("c", 79),
        ]
        cluster = build_cluster(ranked, config, supports_work_id=False)
        assert [m.candidate.native_id for m in cluster.members] == ["a", "b"]

    def test_work_source_with_missing_anchor_work_id_stays_single(self, config):
        ranked = [
            scored("a", 95, match=True, work_id=None),
            scored("b", 90, work_id=None),
        ]
        cluster = build_cluster(ranked, config, supports_work_id=True)
        assert [m.candidate.native_id for m in cluster.members] == ["a"]
        # hash-based id, still deterministic and source-prefixed
        assert cluster.cluster_id.startswith("fixture:")
        again = build_cluster(ranked, config, supports_work_id=True)
        assert again.cluster_id == cluster.cluster_id

    def test_anchor_is_member_exactly_once(self, config):
        ranked = [
            scored("a", 95, match=True, work_id="W1"),
            scored("b", 85, work_id="W1"),
        ]
        cluster = build_cluster(ranked, config, supports_work_id=True)
        anchor_ids = [
            m.candidate.native_id
            for m in cluster.members
            if m.candidate.native_id == cluster.anchor.candidate.native_id
        ]
        assert anchor_ids == ["a"]

    def test_members_default_selected(self, config):
        ranked = [
            scored("a", 95, match=True, work_id="W1"),
            scored("b", 85, work_id="W1"),
        ]
        cluster = build_cluster(ranked, config, supports_work_id=True)
        assert all(m.selected for m in cluster.members)

    def test_same_work_invariant(self, config):
        ranked = [
            scored("a", 95, match=True, work_id="W9"),
            scored("b", 90, work_id="W9"),
            scored("c", 88, work_id="W8"),
            scored("d", 85, work_id="W9"),
        ]
        cluster = build_cluster(ranked, config, supports_work_id=True)
        assert all(
            m.candidate.work_id == cluster.anchor.candidate.work_id
            for m in cluster.members
        )


class TestCuration:
    def make_cluster(self, config):
        ranked = [
            scored("m1", 95, match=True, work_id="W1"),
            scored("m2", 85, work_id="W1"),
            scored("m3", 82, work_id="W1"),
        ]
        return build_cluster(ranked, config, supports_work_id=True)

    def test_toggle_then_apply(self, config):
        cluster = self.make_cluster(config)
        session = CurationSession()
        toggle_member(session, cluster, "m1", False)
        seen = apply_session(cluster, session)
        assert seen.member("m1").selected is False
        assert seen.member("m2").selected is True

    def test_last_write_wins(self, config):
        cluster = self.make_cluster(config)
        session = CurationSession()
        toggle_member(session, cluster, "m1", False)
        toggle_member(session, cluster, "m1", True)
        assert apply_session(cluster, session).member("m1").selected is True

    def test_unknown_member_rejected(self, config):
        cluster = self.make_cluster(config)
        with pytest.raises(UnknownMemberError):
            toggle_member(CurationSession(), cluster, "nope", False)

    def test_updated_at_moves_forward(self, config):
        cluster = self.make_cluster(config)
        session = CurationSession()
        before = session.updated_at
        toggle_member(session, cluster, "m2", False)
        assert session.updated_at >= before
        assert session.updated_at >= session.created_at


class TestSessionPersistence:
    def test_empty_session_round_trips(self, tmp_path):
        session = CurationSession()
        path = tmp_path / "session.json"
        persist_session(session, path)
        loaded = load_session(path)
        assert loaded == session

    def test_session_with_decisions_round_trips(self, config, tmp_path):
        cluster = TestCuration().make_cluster(config)
        session = CurationSession()
        toggle_member(session, cluster, "m1", False)
        toggle_member(session, cluster, "m2", True)
        toggle_member(session, cluster, "m3", False)
        path = tmp_path / "session.json"
        persist_session(session, path)
        assert load_session(path) == session

    def test_schema_version_checked(self, tmp_path):
        path = tmp_path / "session.json"
        path.write_text(json.dumps({"schema_version": 99, "session_id": "x"}))
        with pytest.raises(SchemaVersionMismatchError):
            load_session(path)

    def test_timestamps_are_utc_rfc3339(self, tmp_path):
        session = CurationSession()
        path = tmp_path / "session.json"
        persist_session(session, path)
        payload = json.loads(path.read_text())
        assert payload["created_at"].endswith("+00:00")

    def test_toggle_persist_load_equals_in_memory(self, config, tmp_path):
        """Any toggle sequence then persist+load = the same selection map."""
        cluster = TestCuration().make_cluster(config)
        rng = random.Random(11)
        session = CurationSession()
        for _ in range(25):
            member = rng.choice(["m1", "m2", "m3"])
            toggle_member(session, cluster, member, rng.random() < 0.5)
        path = tmp_path / "session.json"
        persist_session(session, path)
        loaded = load_session(path)
        in_memory = apply_session(cluster, session)
        reloaded = apply_session(cluster, loaded)
        assert [
            (m.candidate.native_id, m.selected) for m in in_memory.members
        ] == [(m.candidate.native_id, m.selected) for m in reloaded.members]


class TestMergeIdentifiers:
    def test_union_first_seen_order(self, config):
        c1 = build_cluster(
            [scored("a", 95, match=True, work_id="W1", identifiers={"isbn": ["a"]})],
            config,
            supports_work_id=True,
        )
        c2 = build_cluster(
            [
                scored(
                    "b", 95, match=True, work_id="W2", identifiers={"isbn": ["a", "b"]}
                )
            ],
            config,
            supports_work_id=True,
        )
        assert merge_identifiers([c1, c2]) == {"isbn": ["a", "b"]}

    def test_deselected_member_excluded(self, config):
        cluster = build_cluster(
            [
                scored("a", 95, match=True, work_id="W1", identifiers={"isbn": ["a"]}),
                scored("b", 85, work_id="W1", identifiers={"isbn": ["b"]}),
            ],
            config,
            supports_work_id=True,
        )
        session = CurationSession()
        toggle_member(session, cluster, "b", False)
        assert merge_identifiers([apply_session(cluster, session)]) == {"isbn": ["a"]}

    def test_empty_cluster_list(self):
        assert merge_identifiers([]) == {}

    def test_permutation_invariant_as_sets(self, config):
        clusters = [
            build_cluster(
                [
                    scored(
                        f"r{i}",
                        95,
                        match=True,
                        work_id=f"W{i}",
                        identifiers={"isbn": [f"i{i}", "shared"], "lccn": [f"l{i}"]},
                    )
                ],
                config,
                supports_work_id=True,
            )
            for i in range(4)
        ]
        forward = merge_identifiers(clusters)
        backward = merge_identifiers(list(reversed(clusters)))
        assert {k: set(v) for k, v in forward.items()} == {
            k: set(v) for k, v in backward.items()
        }
