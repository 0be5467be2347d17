"""Uniform next-word prediction interface over language models.

Every backend answers ``predict_next(tokens, top_n)`` with a ranked
suggestion list whose probabilities are normalized to [0, 1]. The
deterministic reference backend is an interpolated bigram/unigram count
model with add-one smoothing; it exists so every pipeline and test runs
offline without accelerators. Neural models attach out-of-process through
the JSON wire adapter and are treated as black boxes.
"""

from __future__ import annotations

import json
import urllib.request
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

from .autocomplete import MASK_TOKEN
from .qa_augment import TrainingPlan

CAP_BIDIRECTIONAL_MASK = "bidirectional_mask"
CAP_LEFT_TO_RIGHT = "left_to_right"

REFERENCE_BACKEND_ID = "reference"


class BackendUnavailableError(RuntimeError):
    """Typed unavailability signal; ensembles may drop the backend."""


@dataclass(frozen=True)
class Suggestion:
    word: str
    probability: float


@dataclass(frozen=True)
class SuggestionList:
    model_id: str
    suggestions: tuple[Suggestion, ...]

    def __post_init__(self) -> None:
        probs = [s.probability for s in self.suggestions]
        if any(not 0.0 <= p <= 1.0 for p in probs):
            raise ValueError("probabilities must lie in [0, 1]")
        if any(a < b for a, b in zip(probs, probs[1:])):
            raise ValueError("suggestions must be sorted by non-increasing probability")
        if sum(probs) > 1.0 + 1e-9:
            raise ValueError("probabilities must sum to at most 1")

    def words(self) -> list[str]:
        return [s.word for s in self.suggestions]

    def top(self) -> Suggestion:
        if not self.suggestions:
            raise ValueError(f"{self.model_id}: empty suggestion list")
        return self.suggestions[0]


@dataclass(frozen=True)
class FineTuneStage:
    name: str
    dataset: str
    init_from: str | None = None


@dataclass(frozen=True)
class FineTunePlan:
    """Declarative fine-tuning schedule.

    Hyperparameters are recorded for the neural adapters; the reference
    backend only consumes the stage order. ``early_stop_decreases`` is the
    number of dev-accuracy drops tolerated before stopping.
    """

    stages: tuple[FineTuneStage, ...]
    batch_size: int = 8
    epochs: int = 8
    learning_rate: float = 5e-5
    early_stop_decreases: int = 2

    def __post_init__(self) -> None:
        if self.batch_size < 1 or self.epochs < 1 or self.learning_rate <= 0:
            raise ValueError("hyperparameters must be positive")

    @classmethod
    def from_training_plan(cls, plan: TrainingPlan, **kwargs) -> "FineTunePlan":
        return cls(
            stages=tuple(
                FineTuneStage(s.name, s.dataset, s.init_from) for s in plan.stages
            ),
            **kwargs,
        )


class Backend:
    """Base next-word backend. Handles are not assumed reentrant."""

    backend_id: str = "base"
    capabilities: frozenset = frozenset()
    deterministic: bool = False

    def predict_next(self, tokens: Sequence[str], top_n: int) -> SuggestionList:
        raise NotImplementedError

    def fine_tune(self, plan: FineTunePlan, datasets: Mapping[str, Sequence]) -> "Backend":
        raise NotImplementedError(
            f"{self.backend_id}: fine-tuning runs on external infrastructure"
        )

    def available(self) -> bool:
        return True


def _check_prediction_input(tokens: Sequence[str], top_n: int) -> None:
    if top_n < 1:
        raise ValueError("top_n must be >= 1")
    if not tokens or tokens[-1] != MASK_TOKEN:
        raise ValueError("prediction input must end with the mask sentinel")


class ReferenceBackend(Backend):
    """Interpolated bigram/unigram count model with add-one smoothing.

    Probabilities are a fixed-weight interpolation of the smoothed bigram
    distribution given the last prefix token and the smoothed unigram
    distribution. A prefix whose last token was never seen as a bigram
    context falls back to the uniform distribution over the vocabulary, so
    the ranking there is purely lexicographic. Bit-reproducible across runs.
    """

    capabilities = frozenset({CAP_LEFT_TO_RIGHT})
    deterministic = True

    def __init__(
        self,
        backend_id: str = REFERENCE_BACKEND_ID,
        interpolation: float = 0.75,
        unigrams: Mapping[str, int] | None = None,
        bigrams: Mapping[tuple[str, str], int] | None = None,
    ):
        if not 0.0 <= interpolation <= 1.0:
            raise ValueError("interpolation weight must be in [0, 1]")
        self.backend_id = backend_id
        self.interpolation = interpolation
        self._unigrams: dict[str, int] = dict(unigrams or {})
        self._bigrams: dict[tuple[str, str], int] = dict(bigrams or {})
        self._context_totals: dict[str, int] = {}
        for (context, _), count in self._bigrams.items():
            self._context_totals[context] = self._context_totals.get(context, 0) + count

    def available(self) -> bool:
        return bool(self._unigrams)

    def train(self, sequences: Iterable[Sequence[str]]) -> "ReferenceBackend":
        """Return a new backend whose counts include the given sequences."""
        unigrams = dict(self._unigrams)
        bigrams = dict(self._bigrams)
        for sequence in sequences:
            tokens = list(sequence)
            for token in tokens:
                unigrams[token] = unigrams.get(token, 0) + 1
            for left, right in zip(tokens, tokens[1:]):
                bigrams[(left, right)] = bigrams.get((left, right), 0) + 1
        return ReferenceBackend(
            backend_id=self.backend_id,
            interpolation=self.interpolation,
            unigrams=unigrams,
            bigrams=bigrams,
        )

    def fine_tune(
        self, plan: FineTunePlan, datasets: Mapping[str, Sequence[Sequence[str]]]
    ) -> "ReferenceBackend":
        """Rebuild count tables stage by stage.

        All stage datasets are resolved before any counting so a missing
        dataset fails the whole plan up front. Later stages accumulate on
        top of earlier ones, preserving the two-stage ordering contract.
        An empty plan is the identity.
        """
        missing = [s.dataset for s in plan.stages if s.dataset not in datasets]
        if missing:
            raise ValueError(f"missing stage dataset(s): {', '.join(missing)}")
        if not plan.stages:
            return self
        model = self
        for stage in plan.stages:
            model = model.train(datasets[stage.dataset])
        return model

    def vocabulary(self) -> list[str]:
        return sorted(self._unigrams)

    def probabilities(self, tokens: Sequence[str]) -> list[tuple[str, float]]:
        """Full next-word distribution for a masked input, ranked."""
        if not self._unigrams:
            raise BackendUnavailableError(f"{self.backend_id}: no training data")
        vocab = self.vocabulary()
        context = tokens[-2] if len(tokens) >= 2 else None
        vocab_size = len(vocab)
        if context is None or context not in self._context_totals:
            uniform = 1.0 / vocab_size
            return [(word, uniform) for word in vocab]
        context_total = self._context_totals[context]
        total_tokens = sum(self._unigrams.values())
        lam = self.interpolation
        ranked = []
        for word in vocab:
            p_bigram = (self._bigrams.get((context, word), 0) + 1) / (
                context_total + vocab_size
            )
            p_unigram = (self._unigrams[word] + 1) / (total_tokens + vocab_size)
            ranked.append((word, lam * p_bigram + (1.0 - lam) * p_unigram))
        ranked.sort(key=lambda item: (-item[1], item[0]))
        return ranked

    def predict_next(self, tokens: Sequence[str], top_n: int) -> SuggestionList:
        _check_prediction_input(tokens, top_n)
        ranked = self.probabilities(tokens)
        return SuggestionList(
            model_id=self.backend_id,
            suggestions=tuple(
                Suggestion(word, probability) for word, probability in ranked[:top_n]
            ),
        )


# A transport takes the request record and returns the response record.
WireTransport = Callable[[dict], dict]


def http_transport(url: str, timeout: float = 10.0) -> WireTransport:
    """Wire transport POSTing JSON to an adapter endpoint."""

    def send(request: dict) -> dict:
        data = json.dumps(request).encode("utf-8")
        req = urllib.request.Request(
            url, data=data, headers={"Content-Type": "application/json"}
        )
        with urllib.request.urlopen(req, timeout=timeout) as response:
            return json.loads(response.read().decode("utf-8"))

    return send


class WireBackend(Backend):
    """Out-of-process model adapter speaking the JSON wire protocol.

    Request: ``{"backend_id", "tokens", "top_n"}``. Response:
    ``{"suggestions": [{"word", "probability"}, ...]}`` sorted by
    probability descending (the adapter re-sorts defensively, breaking ties
    lexicographically). Transport failures surface as unavailability so
    ensembles can degrade.
    """

    def __init__(
        self,
        backend_id: str,
        transport: WireTransport,
        capabilities: frozenset = frozenset({CAP_BIDIRECTIONAL_MASK}),
        deterministic: bool = False,
    ):
        self.backend_id = backend_id
        self.capabilities = capabilities
        self.deterministic = deterministic
        self._transport = transport

    def predict_next(self, tokens: Sequence[str], top_n: int) -> SuggestionList:
        _check_prediction_input(tokens, top_n)
        request = {"backend_id": self.backend_id, "tokens": list(tokens), "top_n": top_n}
        try:
            response = self._transport(request)
        except Exception as exc:
            raise BackendUnavailableError(f"{self.backend_id}: {exc}") from exc
        try:
            raw = response["suggestions"]
            pairs = [(str(s["word"]), float(s["probability"])) for s in raw]
        except (KeyError, TypeError, ValueError) as exc:
            raise BackendUnavailableError(
                f"{self.backend_id}: malformed wire response"
            ) from exc
        pairs.sort(key=lambda item: (-item[1], item[0]))
        return SuggestionList(
            model_id=self.backend_id,
            suggestions=tuple(Suggestion(w, p) for w, p in pairs[:top_n]),
        )


@dataclass(frozen=True)
class BackendRegistry:
    """Ordered, immutable collection of backends; order breaks ensemble ties."""

    backends: tuple[Backend, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        ids = [b.backend_id for b in self.backends]
        if len(set(ids)) != len(ids):
            raise ValueError("backend ids must be unique within a registry")

    def ids(self) -> list[str]:
        return [b.backend_id for b in self.backends]

    def get(self, backend_id: str) -> Backend:
        for backend in self.backends:
            if backend.backend_id == backend_id:
                return backend
        raise KeyError(f"no backend {backend_id!r} registered")

    def __iter__(self):
        return iter(self.backends)

    def __len__(self) -> int:
        return len(self.backends)
