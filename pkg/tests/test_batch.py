from __future__ import annotations

import csv

import pytest

from bibrecon.batch import MissingColumnError, escape_joined, reconcile_csv
from bibrecon.sources.fixture import FixtureAdapter

INPUT_ROWS = [
    {"title": "The Book of Salt", "author": "Monique Truong", "note": "a, quoted|note"},
    {"title": "The Lantern Harbor", "author": "Ada Quillen", "note": ""},
    {"title": "No Such Book Anywhere", "author": "Nobody Real", "note": "n/a"},
]


def write_input(tmp_path, rows=None, fieldnames=("title", "author", "note")):
    path = tmp_path / "input.csv"
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(fieldnames))
        writer.writeheader()
        writer.writerows(rows if rows is not None else INPUT_ROWS)
    return path


def read_output(path):
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


class TestReconcileCsv:
    def test_match_counts(self, tmp_path, fixture_adapter):
        output = tmp_path / "out.csv"
        report = reconcile_csv(
            write_input(tmp_path),
            output,
            {"fixture": fixture_adapter},
            title_column="title",
            author_column="author",
        )
        assert report.total_rows == 3
        assert report.per_source_matches == {"fixture": 2}
        assert report.union_matches == 2
        assert "fixture: 2/3 matched" in report.lines()

    def test_input_columns_preserved(self, tmp_path, fixture_adapter):
        output = tmp_path / "out.csv"
        reconcile_csv(
            write_input(tmp_path),
            output,
            {"fixture": fixture_adapter},
            title_column="title",
            author_column="author",
        )
        rows = read_output(output)
        for original, row in zip(INPUT_ROWS, rows):
            for column, value in original.items():
                assert row[column] == value

    def test_match_columns(self, tmp_path, fixture_adapter):
        output = tmp_path / "out.csv"
        reconcile_csv(
            write_input(tmp_path),
            output,
            {"fixture": fixture_adapter},
            title_column="title",
            author_column="author",
        )
        rows = read_output(output)
        assert rows[0]["fixture_match_id"] == "fixture:fx-001"
        assert rows[0]["fixture_match_flag"] == "true"
        assert rows[0]["fixture_work_cluster_id"] == "fixture:W-salt"
        assert rows[0]["fixture_member_count"] == "4"
        assert rows[2]["fixture_match_flag"] == "false"

    def test_merged_identifiers_joined(self, tmp_path, fixture_adapter):
        output = tmp_path / "out.csv"
        reconcile_csv(
            write_input(tmp_path),
            output,
            {"fixture": fixture_adapter},
            title_column="title",
            author_column="author",
        )
        rows = read_output(output)
        isbns = rows[0]["isbn"].split("|")
        # all selected W-salt members contribute their ISBNs
        assert set(isbns) == {
            "0618304002",
            "9780618446889",
            "0618446885",
            "9782742772346",
            "0786257784",
        }

    def test_explode_mode_row_counts(self, tmp_path, fixture_adapter):
        output = tmp_path / "out.csv"
        reconcile_csv(
            write_input(tmp_path),
            output,
            {"fixture": fixture_adapter},
            title_column="title",
            author_column="author",
            mode="explode",
        )
        rows = read_output(output)
        salt_rows = [r for r in rows if r["title"] == "The Book of Salt"]
        assert len(salt_rows) == 5  # five distinct ISBNs across the cluster
        assert all(r["author"] == "Monique Truong" for r in salt_rows)
        unmatched = [r for r in rows if r["title"] == "No Such Book Anywhere"]
        assert len(unmatched) == 1

    def test_deterministic_output_bytes(self, tmp_path, fixture_adapter, corpus):
        first = tmp_path / "out1.csv"
        second = tmp_path / "out2.csv"
        for output in (first, second):
            reconcile_csv(
                write_input(tmp_path),
                output,
                {"fixture": FixtureAdapter(corpus)},
                title_column="title",
                author_column="author",
            )
        assert first.read_bytes() == second.read_bytes()

    def test_missing_title_column_fatal(self, tmp_path, fixture_adapter):
        with pytest.raises(MissingColumnError):
            reconcile_csv(
                write_input(tmp_path),
                tmp_path / "out.csv",
                {"fixture": fixture_adapter},
                title_column="headline",
            )

    def test_empty_title_recorded_as_error(self, tmp_path, fixture_adapter):
        path = write_input(
            tmp_path, rows=[{"title": "", "author": "X", "note": ""}]
        )
        output = tmp_path / "out.csv"
        report = reconcile_csv(
            path,
            output,
            {"fixture": fixture_adapter},
            title_column="title",
            author_column="author",
        )
        assert report.error_rows == 1
        rows = read_output(output)
        assert "empty title" in rows[0]["errors"]

    def test_union_across_two_sources(self, tmp_path, corpus):
        by_id = {r.native_id: r for r in corpus}
        adapter_a = FixtureAdapter([by_id["fx-001"]])
        adapter_b = FixtureAdapter([by_id["fx-006"]])
        path = write_input(
            tmp_path,
            rows=[
                {"title": "The Book of Salt", "author": "Monique Truong", "note": ""},
                {"title": "The Lantern Harbor", "author": "Ada Quillen", "note": ""},
                {"title": "Absent Entirely", "author": "Nobody", "note": ""},
            ],
        )
        output = tmp_path / "out.csv"
        report = reconcile_csv(
            path,
            output,
            {"src-a": adapter_a, "src-b": adapter_b},
            title_column="title",
            author_column="author",
        )
        assert report.per_source_matches == {"src-a": 1, "src-b": 1}
        assert report.union_matches == 2
        assert "union: 2/3 matched" in report.lines()

    def test_union_monotone_in_sources(self, tmp_path, corpus):
        by_id = {r.native_id: r for r in corpus}
        path = write_input(tmp_path)
        single = reconcile_csv(
            path,
            tmp_path / "one.csv",
            {"src-a": FixtureAdapter([by_id["fx-001"]])},
            title_column="title",
            author_column="author",
        )
        double = reconcile_csv(
            path,
            tmp_path / "two.csv",
            {
                "src-a": FixtureAdapter([by_id["fx-001"]]),
                "src-b": FixtureAdapter([by_id["fx-006"]]),
            },
            title_column="title",
            author_column="author",
        )
        assert double.union_matches >= single.union_matches

    def test_invalid_mode_rejected(self, tmp_path, fixture_adapter):
        with pytest.raises(ValueError):
            reconcile_csv(
                write_input(tmp_path),
                tmp_path / "out.csv",
                {"fixture": fixture_adapter},
                title_column="title",
                mode="split",
            )


class TestEscapeJoined:
    def test_plain_join(self):
        assert escape_joined(["a", "b"], "|") == "a|b"

    def test_delimiter_in_value_doubled(self):
        assert escape_joined(["a|b", "c"], "|") == "a||b|c"

    def test_empty(self):
        assert escape_joined([], "|") == ""
