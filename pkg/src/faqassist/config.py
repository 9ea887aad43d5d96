"""Service configuration: JSON file plus FAQASSIST_* environment overrides."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

from .corpus import load_faqs
from .embeddings import SidecarEmbeddingProvider
from .errors import ConfigError, DataError
from .retrieval import RANKER_NAMES, make_ranker
from .service import SessionStore, load_projects

_ENV_PREFIX = "FAQASSIST_"
_STRING_KEYS = ("ranker", "faqs", "corpus", "embeddings", "projects", "event_log", "host", "silence")
_INT_KEYS = ("port", "window", "seed")
_FLOAT_KEYS = ("silence_threshold",)


@dataclass
class ServiceConfig:
    faqs: str
    ranker: str = "bm25"
    corpus: str | None = None
    embeddings: str | None = None
    projects: str | None = None
    event_log: str | None = None
    host: str = "127.0.0.1"
    port: int = 8000
    window: int = 4
    seed: int = 0
    silence: str = "candidate"  # candidate | threshold | none (dense only)
    silence_threshold: float | None = None


def load_service_config(
    path: str | Path | None, env: Mapping[str, str] | None = None
) -> ServiceConfig:
    """Read the config file (if any) and apply environment overrides."""
    env = os.environ if env is None else env
    raw: dict = {}
    if path is not None:
        try:
            raw = json.loads(Path(path).read_text(encoding="utf-8"))
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {path}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: not valid JSON: {exc}") from exc
        if not isinstance(raw, dict):
            raise ConfigError(f"{path}: expected a JSON object")

    for key in _STRING_KEYS + _INT_KEYS + _FLOAT_KEYS:
        value = env.get(_ENV_PREFIX + key.upper())
        if value is None:
            continue
        if key in _INT_KEYS:
            try:
                raw[key] = int(value)
            except ValueError:
                raise ConfigError(f"{_ENV_PREFIX + key.upper()} must be an integer")
        elif key in _FLOAT_KEYS:
            try:
                raw[key] = float(value)
            except ValueError:
                raise ConfigError(f"{_ENV_PREFIX + key.upper()} must be a number")
        else:
            raw[key] = value

    unknown = set(raw) - set(_STRING_KEYS) - set(_INT_KEYS) - set(_FLOAT_KEYS)
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
    if "faqs" not in raw:
        raise ConfigError("config needs a 'faqs' path")
    config = ServiceConfig(**raw)
    validate_config(config)
    return config


def validate_config(config: ServiceConfig) -> None:
    if config.ranker not in RANKER_NAMES:
        raise ConfigError(
            f"unknown ranker {config.ranker!r}, expected one of {RANKER_NAMES}"
        )
    if config.ranker == "dense" and not config.embeddings:
        raise ConfigError("ranker 'dense' needs an 'embeddings' sidecar path")
    if config.silence not in ("candidate", "threshold", "none"):
        raise ConfigError("silence must be one of candidate, threshold, none")
    if config.silence == "threshold" and config.silence_threshold is None:
        raise ConfigError("silence='threshold' needs silence_threshold")
    if not 1 <= config.window <= 4:
        raise ConfigError("window must be between 1 and 4")


def build_store(config: ServiceConfig) -> SessionStore:
    """Load data files and assemble the session store."""
    validate_config(config)
    try:
        faqs = load_faqs(config.faqs)
        provider = None
        if config.ranker == "dense":
            provider = SidecarEmbeddingProvider.load(config.embeddings)
        projects = load_projects(config.projects) if config.projects else []
    except FileNotFoundError as exc:
        raise ConfigError(f"missing data file: {exc.filename}") from exc
    ranker = make_ranker(
        config.ranker,
        faqs,
        seed=config.seed,
        provider=provider,
        include_silence=config.silence == "candidate",
        silence_threshold=(
            config.silence_threshold if config.silence == "threshold" else None
        ),
    )
    return SessionStore(
        faqs,
        ranker,
        projects=projects,
        event_log_path=config.event_log,
        window=config.window,
    )
