"""Service configuration: TOML file, environment overrides, then CLI flags.

Precedence is the conventional three layers: values from the config file are
overridden by BIBRECON_* environment variables, which are overridden by
command-line flags. With no file at all you get a ready-to-run setup serving
the bundled fixture corpus.
"""
from __future__ import annotations

import importlib.resources
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

try:
    import tomllib  # Python >= 3.11
except ModuleNotFoundError:  # pragma: no cover
    import tomli as tomllib

from .matching import MatchConfig
from .records import SourceId


class ConfigError(ValueError):
    """The configuration is unusable; the CLI exits with code 2."""


ENV_PREFIX = "BIBRECON_"

# env var suffix -> (section, key, coercion)
_ENV_KEYS = {
    "HOST": ("service", "host", str),
    "PORT": ("service", "port", int),
    "SESSION_DIR": ("service", "session_dir", str),
    "CORS_ORIGIN": ("service", "cors_origin", str),
    "DELIMITER": ("service", "delimiter", str),
    "BASE_URL": ("service", "base_url", str),
    "THRESHOLD": ("match", "threshold", int),
    "CONTRIBUTOR_GATE": ("match", "contributor_gate", int),
    "TITLE_WEIGHT": ("match", "title_weight", float),
    "TIE_MARGIN": ("match", "tie_margin", int),
}


@dataclass
class SourceSettings:
    """Per-source block: which adapter to build and how to pace it.

    rate/burst left unset fall back to the source-type default: network
    sources are paced politely, local sources (fixture, hathitrust) run at
    full speed.
    """

    name: str
    type: str
    endpoint: str = ""
    search_path: str = ""
    corpus: str = ""
    api_key: str = ""
    dump_path: str = ""
    index_path: str = ""
    column_map: Optional[dict[str, str]] = None
    limit: int = 20
    rate: Optional[float] = None
    burst: Optional[int] = None


@dataclass
class ServiceConfig:
    host: str = "127.0.0.1"
    port: int = 8145
    base_url: str = ""
    cors_origin: str = "*"
    session_dir: str = "./sessions"
    delimiter: str = "|"
    clustering_enabled: bool = True
    match: MatchConfig = field(default_factory=MatchConfig)
    sources: list[SourceSettings] = field(default_factory=list)
    ui_dir: str = ""

    def resolved_base_url(self) -> str:
        return self.base_url or f"http://{self.host}:{self.port}"

    def validate(self) -> "ServiceConfig":
        if not self.sources:
            raise ConfigError("no sources enabled; configure at least one")
        if not 1 <= self.port <= 65535:
            raise ConfigError(f"port {self.port} out of range")
        if not self.delimiter:
            raise ConfigError("delimiter must be non-empty")
        names = [s.name for s in self.sources]
        if len(names) != len(set(names)):
            raise ConfigError(f"duplicate source names: {sorted(names)}")
        for s in self.sources:
            try:
                SourceId(s.type)
            except ValueError:
                raise ConfigError(
                    f"source {s.name!r}: unknown type {s.type!r}"
                ) from None
        return self


def bundled_corpus_path() -> str:
    """Path of the fixture corpus shipped inside the package."""
    return str(importlib.resources.files("bibrecon").joinpath("data/fixture_corpus.json"))


def default_config() -> ServiceConfig:
    return ServiceConfig(
        sources=[
            SourceSettings(name="fixture", type="fixture", corpus=bundled_corpus_path())
        ]
    )


def _parse_sources(raw: dict[str, Any]) -> list[SourceSettings]:
    sources = []
    for name, block in raw.items():
        if not isinstance(block, dict):
            raise ConfigError(f"[sources.{name}] must be a table")
        known = {f for f in SourceSettings.__dataclass_fields__ if f != "name"}
        unknown = set(block) - known
        if unknown:
            raise ConfigError(f"[sources.{name}]: unknown keys {sorted(unknown)}")
        settings = SourceSettings(name=name, type=block.get("type", name))
        for key, value in block.items():
            setattr(settings, key, value)
        sources.append(settings)
    return sources


def load_config(path: Optional[Path | str] = None) -> ServiceConfig:
    """Parse the TOML config file and apply environment overrides.

    With path=None the built-in default (bundled fixture source) is used,
    still subject to environment overrides.
    """
    if path is None:
        config = default_config()
        _apply_env(config)
        return config.validate()

    path = Path(path)
    try:
        raw = tomllib.loads(path.read_text(encoding="utf-8"))
    except OSError as err:
        raise ConfigError(f"cannot read config {path}: {err}") from err
    except tomllib.TOMLDecodeError as err:
        raise ConfigError(f"cannot parse config {path}: {err}") from err

    service = raw.get("service", {})
    match = raw.get("match", {})
    config = ServiceConfig(
        host=service.get("host", "127.0.0.1"),
        port=service.get("port", 8145),
        base_url=service.get("base_url", ""),
        cors_origin=service.get("cors_origin", "*"),
        session_dir=service.get("session_dir", "./sessions"),
        delimiter=service.get("delimiter", "|"),
        clustering_enabled=service.get("clustering_enabled", True),
        ui_dir=service.get("ui_dir", ""),
    )
    try:
        config.match = MatchConfig(
            threshold=match.get("threshold", 80),
            contributor_gate=match.get("contributor_gate", 50),
            title_weight=match.get("title_weight", 0.75),
            tie_margin=match.get("tie_margin", 1),
        )
    except ValueError as err:
        raise ConfigError(f"bad [match] section: {err}") from err

    if "sources" in raw:
        # an explicitly empty table means "no sources", which is an error
        config.sources = _parse_sources(raw["sources"])
    else:
        config.sources = default_config().sources

    _apply_env(config)
    return config.validate()


def _apply_env(config: ServiceConfig) -> None:
    match_overrides: dict[str, Any] = {}
    for suffix, (section, key, coerce) in _ENV_KEYS.items():
        raw = os.environ.get(ENV_PREFIX + suffix)
        if raw is None:
            continue
        try:
            value = coerce(raw)
        except ValueError:
            raise ConfigError(
                f"bad value for {ENV_PREFIX}{suffix}: {raw!r}"
            ) from None
        if section == "service":
            setattr(config, key, value)
        else:
            match_overrides[key] = value
    if match_overrides:
        current = config.match
        try:
            config.match = MatchConfig(
                threshold=match_overrides.get("threshold", current.threshold),
                contributor_gate=match_overrides.get(
                    "contributor_gate", current.contributor_gate
                ),
                title_weight=match_overrides.get("title_weight", current.title_weight),
                tie_margin=match_overrides.get("tie_margin", current.tie_margin),
            )
        except ValueError as err:
            raise ConfigError(f"bad match override: {err}") from err


def apply_flag_overrides(
    config: ServiceConfig,
    port: Optional[int] = None,
    threshold: Optional[int] = None,
    delimiter: Optional[str] = None,
) -> ServiceConfig:
    """CLI flags are the last word."""
    if port is not None:
        config.port = port
    if delimiter is not None:
        config.delimiter = delimiter
    if threshold is not None:
        current = config.match
        try:
            config.match = MatchConfig(
                threshold=threshold,
                contributor_gate=current.contributor_gate,
                title_weight=current.title_weight,
                tie_margin=current.tie_margin,
            )
        except ValueError as err:
            raise ConfigError(f"bad --threshold: {err}") from err
    return config.validate()
