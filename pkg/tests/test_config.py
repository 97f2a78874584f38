from __future__ import annotations

import pytest

from bibrecon.config import (
    ConfigError,
    apply_flag_overrides,
    bundled_corpus_path,
    default_config,
    load_config,
)


def write_config(tmp_path, text):
    path = tmp_path / "bibrecon.toml"
    path.write_text(text, encoding="utf-8")
    return path


class TestLoadConfig:
    def test_defaults_without_file(self):
        config = load_config(None)
        assert [s.name for s in config.sources] == ["fixture"]
        assert config.match.threshold == 80
        assert config.port == 8145

    def test_full_file(self, tmp_path):
        path = write_config(
            tmp_path,
            f"""
[service]
host = "0.0.0.0"
port = 9000
session_dir = "{tmp_path}/sessions"
delimiter = ";"
clustering_enabled = false

[match]
threshold = 90
contributor_gate = 60
title_weight = 0.5
tie_margin = 2

[sources.fixture]
corpus = "{bundled_corpus_path()}"
limit = 10

[sources.backup]
type = "fixture"
corpus = "{bundled_corpus_path()}"
""",
        )
        config = load_config(path)
        assert config.port == 9000
        assert config.delimiter == ";"
        assert config.clustering_enabled is False
        assert config.match.threshold == 90
        assert config.match.title_weight == 0.5
        names = {s.name: s for s in config.sources}
        assert set(names) == {"fixture", "backup"}
        assert names["backup"].type == "fixture"
        assert names["fixture"].limit == 10

    def test_explicit_empty_sources_rejected(self, tmp_path):
        path = write_config(tmp_path, "[sources]\n")
        with pytest.raises(ConfigError):
            load_config(path)

    def test_unknown_source_type_rejected(self, tmp_path):
        path = write_config(tmp_path, "[sources.mystery]\ntype = \"mystery\"\n")
        with pytest.raises(ConfigError):
            load_config(path)

    def test_bad_toml_rejected(self, tmp_path):
        path = write_config(tmp_path, "this is not toml = = =")
        with pytest.raises(ConfigError):
            load_config(path)

    def test_missing_file_rejected(self, tmp_path):
        with pytest.raises(ConfigError):
            load_config(tmp_path / "absent.toml")

    def test_bad_threshold_rejected(self, tmp_path):
        path = write_config(tmp_path, "[match]\nthreshold = 150\n")
        with pytest.raises(ConfigError):
            load_config(path)

    def test_unknown_source_key_rejected(self, tmp_path):
        path = write_config(
            tmp_path, "[sources.fixture]\ncorpus = \"x\"\nspeed = 9\n"
        )
        with pytest.raises(ConfigError):
            load_config(path)


class TestEnvOverrides:
    def test_env_overrides_file(self, tmp_path, monkeypatch):
        path = write_config(tmp_path, "[service]\nport = 9000\n")
        monkeypatch.setenv("BIBRECON_PORT", "9100")
        monkeypatch.setenv("BIBRECON_THRESHOLD", "70")
        config = load_config(path)
        assert config.port == 9100
        assert config.match.threshold == 70

    def test_bad_env_value_rejected(self, monkeypatch):
        monkeypatch.setenv("BIBRECON_PORT", "not-a-port")
        with pytest.raises(ConfigError):
            load_config(None)


class TestFlagOverrides:
    def test_flags_win_over_everything(self, monkeypatch):
        monkeypatch.setenv("BIBRECON_PORT", "9100")
        config = load_config(None)
        apply_flag_overrides(config, port=9200, threshold=65, delimiter=";")
        assert config.port == 9200
        assert config.match.threshold == 65
        assert config.delimiter == ";"

    def test_invalid_flag_threshold(self):
        config = default_config()
        with pytest.raises(ConfigError):
            apply_flag_overrides(config, threshold=200)


class TestValidation:
    def test_duplicate_source_names(self):
        config = default_config()
        config.sources = config.sources * 2
        with pytest.raises(ConfigError):
            config.validate()

    def test_port_range(self):
        config = default_config()
        config.port = 70000
        with pytest.raises(ConfigError):
            config.validate()

    def test_empty_delimiter(self):
        config = default_config()
        config.delimiter = ""
        with pytest.raises(ConfigError):
            config.validate()

    def test_base_url_defaults_to_host_port(self):
        config = default_config()
        assert config.resolved_base_url() == "http://127.0.0.1:8145"
        config.base_url = "https://recon.example"
        assert config.resolved_base_url() == "https://recon.example"
