"""HTTP service exposing autocomplete suggestions and session logging.

Endpoints:

  POST /v1/suggest          ranked next-word suggestions with per-backend
                            attribution
  POST /v1/session/events   append-only editor event log with idempotent
                            acks
  GET  /v1/session/<id>/replay   sentence reconstructed from the log
  GET  /v1/health           per-backend availability

Request and response bodies are UTF-8 JSON mirroring the module types.
Handlers are thin and stateless; all ranking logic lives in the ensemble
and backends modules.
"""

from __future__ import annotations

import json
import logging
import random
import threading
from dataclasses import dataclass
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import Any, Mapping

from . import autocomplete, ensemble
from .backends import BackendRegistry, BackendUnavailableError
from .ensemble import EnsembleWeights
from .session import SessionEvent, SessionStore

logger = logging.getLogger(__name__)

STRATEGY_SINGLE_PREFIX = "single:"
MAX_SUGGEST_N = 10


class RequestError(ValueError):
    """Maps to a 400 response."""


@dataclass(frozen=True)
class SuggestRequest:
    difficult: str
    typed: tuple[str, ...]
    n: int
    strategy: str

    @classmethod
    def from_body(cls, body: Mapping[str, Any], default_n: int) -> "SuggestRequest":
        if not isinstance(body, Mapping):
            raise RequestError("request body must be an object")
        difficult = body.get("difficult", "")
        if not isinstance(difficult, str):
            raise RequestError("difficult must be a string")
        typed = body.get("typed")
        if (
            not isinstance(typed, list)
            or not typed
            or not all(isinstance(t, str) and t for t in typed)
        ):
            raise RequestError("typed must be a non-empty list of tokens")
        n = body.get("n", default_n)
        if not isinstance(n, int) or not 1 <= n <= MAX_SUGGEST_N:
            raise RequestError(f"n must be an integer in 1..{MAX_SUGGEST_N}")
        strategy = body.get("strategy", "single:reference")
        if not isinstance(strategy, str):
            raise RequestError("strategy must be a string")
        return cls(difficult, tuple(typed), n, strategy)


class SuggestionService:
    """Transport-independent request handlers; the HTTP layer only routes."""

    def __init__(
        self,
        registry: BackendRegistry,
        weights: EnsembleWeights | None = None,
        store: SessionStore | None = None,
        *,
        default_n: int = 5,
        seed: int = 0,
    ):
        if len(registry) == 0:
            raise ValueError("service requires at least one backend")
        self.registry = registry
        self.weights = weights or EnsembleWeights()
        self.store = store or SessionStore()
        self.default_n = default_n
        self.seed = seed
        # Backend handles are not assumed reentrant; serialize per handle.
        self._backend_locks = {b.backend_id: threading.Lock() for b in registry}

    # -- /v1/suggest ----------------------------------------------------

    def suggest(self, body: Mapping[str, Any]) -> tuple[int, dict]:
        try:
            request = SuggestRequest.from_body(body, self.default_n)
            backends = self._backends_for(request.strategy)
        except RequestError as exc:
            return 400, {"error": str(exc)}

        mode = (
            autocomplete.CONTEXT_AWARE
            if request.difficult.strip()
            else autocomplete.NO_CONTEXT
        )
        model_input = autocomplete.prefix_model_input(
            request.difficult.split(), list(request.typed), mode
        )

        results = []
        warnings = []
        for backend in backends:
            try:
                with self._backend_locks[backend.backend_id]:
                    results.append(backend.predict_next(model_input, request.n))
            except BackendUnavailableError as exc:
                warnings.append(f"backend {backend.backend_id} unavailable: {exc}")
        if not results:
            return 503, {"error": "all backends unavailable", "warnings": warnings}

        suggestions = self._rank(request, results)
        body_out = {
            "strategy": request.strategy,
            "suggestions": suggestions[: request.n],
        }
        if warnings:
            body_out["warnings"] = warnings
        return 200, body_out

    def _backends_for(self, strategy: str):
        if strategy.startswith(STRATEGY_SINGLE_PREFIX):
            backend_id = strategy[len(STRATEGY_SINGLE_PREFIX) :]
            try:
                return [self.registry.get(backend_id)]
            except KeyError as exc:
                raise RequestError(str(exc)) from exc
        if strategy in (
            ensemble.STRATEGY_MAJORITY,
            ensemble.STRATEGY_4CC,
            ensemble.STRATEGY_AUTOMETSL,
        ):
            return list(self.registry)
        raise RequestError(f"unknown strategy {strategy!r}")

    def _rank(self, request: SuggestRequest, results) -> list[dict]:
        if request.strategy.startswith(STRATEGY_SINGLE_PREFIX):
            record = results[0]
            return [
                {"word": s.word, "score": s.probability, "source_model": record.model_id}
                for s in record.suggestions
            ]

        best_source = {}
        for record in results:
            for s in record.suggestions:
                prev = best_source.get(s.word)
                if prev is None or s.probability > prev[1]:
                    best_source[s.word] = (record.model_id, s.probability)

        if request.strategy == ensemble.STRATEGY_MAJORITY:
            tally = ensemble.pool_counts(results, self.weights.pool_top_n)
            ranked = [
                {
                    "word": word,
                    "score": float(count),
                    "source_model": best_source[word][0],
                }
                for word, count, _ in tally
            ]
            # Count ties resolve by a seeded random pick; deriving the seed
            # from the request keeps identical requests byte-identical.
            rng = random.Random(f"{self.seed}:{request.difficult}:{' '.join(request.typed)}")
            top = ensemble.majority_vote(results, rng, self.weights.pool_top_n)
            ranked.sort(key=lambda row: (row["word"] != top, -row["score"], row["word"]))
            return ranked

        # Selector-backed strategies run without a trained selector here, so
        # no bonus applies and ranking is pure confidence over per-backend
        # top suggestions.
        if request.strategy == ensemble.STRATEGY_4CC:
            scorer = lambda w, p, b: ensemble.score_4cc(p, b, None, self.weights)
        else:
            scorer = lambda w, p, b: ensemble.score_autometsl(p, b, (), self.weights)
        scored = []
        order = {backend_id: i for i, backend_id in enumerate(self.registry.ids())}
        for record in results:
            if not record.suggestions:
                continue
            top = record.top()
            scored.append(
                {
                    "word": top.word,
                    "score": scorer(top.word, top.probability, record.model_id),
                    "source_model": record.model_id,
                }
            )
        scored.sort(key=lambda row: (-row["score"], order[row["source_model"]]))
        return scored

    # -- /v1/session/events ----------------------------------------------

    def log_event(self, body: Mapping[str, Any]) -> tuple[int, dict]:
        try:
            event = SessionEvent.from_record(body)
        except (KeyError, ValueError) as exc:
            return 400, {"error": f"malformed event: {exc}"}
        return 200, self.store.append(event)

    def replay(self, session_id: str) -> tuple[int, dict]:
        tokens = self.store.replay_tokens(session_id)
        return 200, {"session_id": session_id, "tokens": tokens, "sentence": " ".join(tokens)}

    # -- /v1/health -------------------------------------------------------

    def health(self) -> tuple[int, dict]:
        availability = {
            backend.backend_id: backend.available() for backend in self.registry
        }
        status = "ok" if any(availability.values()) else "unavailable"
        return 200, {"status": status, "backends": availability}


def _make_handler(service: SuggestionService):
    class Handler(BaseHTTPRequestHandler):
        protocol_version = "HTTP/1.1"

        def _reply(self, status: int, body: dict) -> None:
            payload = json.dumps(body, ensure_ascii=False).encode("utf-8")
            self.send_response(status)
            self.send_header("Content-Type", "application/json; charset=utf-8")
            self.send_header("Content-Length", str(len(payload)))
            self.send_header("Access-Control-Allow-Origin", "*")
            self.end_headers()
            self.wfile.write(payload)

        def _read_body(self) -> Any:
            length = int(self.headers.get("Content-Length", 0))
            raw = self.rfile.read(length) if length else b"{}"
            try:
                return json.loads(raw.decode("utf-8"))
            except (UnicodeDecodeError, json.JSONDecodeError) as exc:
                raise RequestError(f"invalid JSON body: {exc}") from exc

        def do_OPTIONS(self):  # CORS preflight for the browser editor
            self.send_response(204)
            self.send_header("Access-Control-Allow-Origin", "*")
            self.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")
            self.send_header("Access-Control-Allow-Headers", "Content-Type")
            self.send_header("Content-Length", "0")
            self.end_headers()

        def do_GET(self):
            if self.path == "/v1/health":
                self._reply(*service.health())
                return
            if self.path.startswith("/v1/session/") and self.path.endswith("/replay"):
                session_id = self.path[len("/v1/session/") : -len("/replay")]
                self._reply(*service.replay(session_id))
                return
            self._reply(404, {"error": f"no route {self.path}"})

        def do_POST(self):
            try:
                body = self._read_body()
            except RequestError as exc:
                self._reply(400, {"error": str(exc)})
                return
            if self.path == "/v1/suggest":
                self._reply(*service.suggest(body))
            elif self.path == "/v1/session/events":
                self._reply(*service.log_event(body))
            else:
                self._reply(404, {"error": f"no route {self.path}"})

        def log_message(self, fmt, *args):
            logger.debug("http: " + fmt, *args)

    return Handler


def make_server(
    service: SuggestionService, host: str = "127.0.0.1", port: int = 0
) -> ThreadingHTTPServer:
    """Bind the service; ``port=0`` picks an ephemeral port."""
    return ThreadingHTTPServer((host, port), _make_handler(service))


def serve_in_thread(service: SuggestionService, host: str = "127.0.0.1", port: int = 0):
    """Start a daemonized server; returns (server, thread) for tests."""
    server = make_server(service, host, port)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    return server, thread
