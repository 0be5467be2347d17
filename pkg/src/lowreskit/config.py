"""Key-value configuration shared by the CLI and the HTTP service.

Config files are plain ``key = value`` lines (``#`` comments allowed);
values are parsed as JSON scalars when possible so numbers and booleans
round-trip. The LOWRESKIT_CONFIG environment variable supplies the default
path. Recognized keys:

  seed                           base RNG seed (int)
  backends                       comma list of backend ids to register
  backend.<id>.url               wire-adapter endpoint for a remote backend
  backend.<id>.train_pairs       aligned-pair JSONL used to fit the
                                 reference backend
  backend.<id>.context_mode      no_context | context_aware
  ensemble.alpha/theta/beta/sigma, ensemble.membership_bonus,
  ensemble.pool_top_n            ensemble scoring weights
  corpus.similarity_threshold    dictionary match threshold
  corpus.min_sentence_terms      distinct term matches a sentence needs
  corpus.min_title_terms         distinct term matches a title needs
  suggest.default_n              default suggestion count for the service
"""

from __future__ import annotations

import json
import os
from pathlib import Path
from typing import Any, Mapping

from . import autocomplete, med_corpus
from .backends import Backend, BackendRegistry, ReferenceBackend, WireBackend, http_transport
from .ensemble import EnsembleWeights

CONFIG_ENV_VAR = "LOWRESKIT_CONFIG"

DEFAULTS: dict[str, Any] = {
    "seed": 0,
    "backends": "reference",
    "ensemble.alpha": 0.5,
    "ensemble.theta": 0.5,
    "ensemble.beta": 0.5,
    "ensemble.sigma": 0.5,
    "ensemble.membership_bonus": 0.25,
    "ensemble.pool_top_n": 5,
    "corpus.similarity_threshold": med_corpus.DEFAULT_SIMILARITY_THRESHOLD,
    "corpus.min_sentence_terms": med_corpus.DEFAULT_MIN_SENTENCE_TERMS,
    "corpus.min_title_terms": med_corpus.DEFAULT_MIN_TITLE_TERMS,
    "suggest.default_n": 5,
}


def parse_config_text(text: str) -> dict[str, Any]:
    values: dict[str, Any] = {}
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {line_no}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        value = value.strip()
        try:
            values[key.strip()] = json.loads(value)
        except json.JSONDecodeError:
            values[key.strip()] = value
    return values


def load_config(path: str | Path | None = None) -> dict[str, Any]:
    """Defaults overlaid with the config file, if one is given or set in
    the environment."""
    merged = dict(DEFAULTS)
    if path is None:
        path = os.environ.get(CONFIG_ENV_VAR) or None
    if path is not None:
        merged.update(parse_config_text(Path(path).read_text(encoding="utf-8")))
    return merged


def ensemble_weights(config: Mapping[str, Any]) -> EnsembleWeights:
    return EnsembleWeights(
        alpha=float(config["ensemble.alpha"]),
        theta=float(config["ensemble.theta"]),
        beta=float(config["ensemble.beta"]),
        sigma=float(config["ensemble.sigma"]),
        membership_bonus=float(config["ensemble.membership_bonus"]),
        pool_top_n=int(config["ensemble.pool_top_n"]),
    )


def _context_mode(name: str) -> autocomplete.ContextMode:
    return autocomplete.ContextMode(mode=name)


def build_backend(backend_id: str, config: Mapping[str, Any]) -> Backend:
    url = config.get(f"backend.{backend_id}.url")
    if url is not None:
        return WireBackend(backend_id, http_transport(str(url)))
    backend = ReferenceBackend(backend_id=backend_id)
    train_pairs = config.get(f"backend.{backend_id}.train_pairs")
    if train_pairs is not None:
        pairs = med_corpus.load_pairs(train_pairs)
        mode = _context_mode(
            str(config.get(f"backend.{backend_id}.context_mode", "context_aware"))
        )
        backend = backend.train(autocomplete.training_sequences(pairs, mode))
    return backend


def build_registry(config: Mapping[str, Any]) -> BackendRegistry:
    raw = config.get("backends", "reference")
    ids = [part.strip() for part in str(raw).split(",") if part.strip()]
    return BackendRegistry(tuple(build_backend(backend_id, config) for backend_id in ids))
