"""Ensemble combination of per-backend next-word suggestions.

Three strategies turn several backends' suggestion lists into one
prediction: a majority vote over the pooled top suggestions, a selector
classifier scored together with model confidence (one predicted backend
per task), and a multi-label variant granting a fixed bonus to every
backend the selector marks correct. The upper bound counts a task as
solvable when any backend's top suggestion is right, capping what any
combination can reach.
"""

from __future__ import annotations

import random
from collections import Counter
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Sequence

from .autocomplete import PredictionTask
from .backends import Suggestion, SuggestionList

STRATEGY_MAJORITY = "majority"
STRATEGY_4CC = "4cc"
STRATEGY_AUTOMETSL = "autometsl"
STRATEGY_UPPER_BOUND = "upper-bound"
ENSEMBLE_STRATEGIES = (
    STRATEGY_MAJORITY,
    STRATEGY_4CC,
    STRATEGY_AUTOMETSL,
    STRATEGY_UPPER_BOUND,
)

SELECTOR_MODE_4CC = "4cc"
SELECTOR_MODE_MULTILABEL = "multilabel"


@dataclass(frozen=True)
class EnsembleWeights:
    """Scoring weights; defaults follow the 0.5/0.5 convention with a 0.25
    membership bonus and a top-5 majority pool."""

    alpha: float = 0.5
    theta: float = 0.5
    beta: float = 0.5
    sigma: float = 0.5
    membership_bonus: float = 0.25
    pool_top_n: int = 5

    def __post_init__(self) -> None:
        if min(self.alpha, self.theta, self.beta, self.sigma, self.membership_bonus) < 0:
            raise ValueError("weights must be non-negative")
        if self.pool_top_n < 1:
            raise ValueError("pool_top_n must be >= 1")


@dataclass(frozen=True)
class SelectorLabel:
    """Selector training target: one chosen backend (4cc mode) or the full
    per-backend correctness vector (multilabel mode)."""

    task_id: str
    mode: str
    labels: tuple[int, ...] | None = None
    chosen: str | None = None

    def __post_init__(self) -> None:
        if self.mode == SELECTOR_MODE_4CC and self.chosen is None:
            raise ValueError("4cc selector label requires a chosen backend")
        if self.mode == SELECTOR_MODE_MULTILABEL and self.labels is None:
            raise ValueError("multilabel selector label requires a bit vector")


def pool_counts(
    records: Sequence[SuggestionList], pool_top_n: int = 5
) -> list[tuple[str, int, float]]:
    """Pooled-vote tally: (word, count, best probability), deterministic.

    Each backend contributes its top ``pool_top_n`` words once. Ordered by
    count descending, then best probability descending, then word.
    """
    counts: Counter = Counter()
    best_prob: dict[str, float] = {}
    for record in records:
        for suggestion in record.suggestions[:pool_top_n]:
            counts[suggestion.word] += 1
            if suggestion.probability > best_prob.get(suggestion.word, -1.0):
                best_prob[suggestion.word] = suggestion.probability
    return sorted(
        ((word, count, best_prob[word]) for word, count in counts.items()),
        key=lambda item: (-item[1], -item[2], item[0]),
    )


def majority_vote(
    records: Sequence[SuggestionList],
    rng: random.Random,
    pool_top_n: int = 5,
) -> str:
    """Most frequent word across the pooled top suggestions.

    A tie on the count is broken uniformly at random among the tied words
    that are some backend's rank-1 suggestion (falling back to all tied
    words when none is), using the provided seeded generator. A single
    backend therefore always yields its own top word.
    """
    if not records:
        raise ValueError("majority vote needs at least one suggestion list")
    tally = pool_counts(records, pool_top_n)
    if not tally:
        raise ValueError("majority vote over empty suggestion lists")
    top_count = tally[0][1]
    tied = sorted(word for word, count, _ in tally if count == top_count)
    if len(tied) == 1:
        return tied[0]
    rank_one = {record.suggestions[0].word for record in records if record.suggestions}
    candidates = [word for word in tied if word in rank_one] or tied
    return rng.choice(candidates)


def score_4cc(
    probability: float,
    backend_id: str,
    selector_prediction: str | None,
    weights: EnsembleWeights,
) -> float:
    """Confidence plus an identity bonus when the selector picked this
    backend: alpha * P + theta * [backend == predicted]."""
    if not 0.0 <= probability <= 1.0:
        raise ValueError("probability must be in [0, 1]")
    identity = 1.0 if backend_id == selector_prediction else 0.0
    return weights.alpha * probability + weights.theta * identity


def score_autometsl(
    probability: float,
    backend_id: str,
    label_set: Iterable[str],
    weights: EnsembleWeights,
) -> float:
    """Confidence plus a fixed membership bonus when the selector's label
    set contains this backend: beta * P + sigma * (bonus if member else 0)."""
    if not 0.0 <= probability <= 1.0:
        raise ValueError("probability must be in [0, 1]")
    membership = weights.membership_bonus if backend_id in set(label_set) else 0.0
    return weights.beta * probability + weights.sigma * membership


# Scorer over one backend's top suggestion: (word, probability, backend_id).
Scorer = Callable[[str, float, str], float]


def select_best(records: Sequence[SuggestionList], scorer: Scorer) -> tuple[str, str]:
    """Highest-scoring (word, backend) over each backend's top suggestion.

    Records are visited in registry order and ties keep the earliest
    backend. Backends with empty suggestion lists are skipped; if all are
    empty the error propagates.
    """
    if not records:
        raise ValueError("select_best needs at least one suggestion list")
    best: tuple[str, str] | None = None
    best_score = float("-inf")
    for record in records:
        if not record.suggestions:
            continue
        top = record.top()
        score = scorer(top.word, top.probability, record.model_id)
        if score > best_score:
            best_score = score
            best = (top.word, record.model_id)
    if best is None:
        raise ValueError("select_best over empty suggestion lists")
    return best


def build_selector_dataset(
    correctness_rows: Sequence[tuple[str, Sequence[int]]],
    backend_order: Sequence[str],
    mode: str,
    rng: random.Random,
) -> list[SelectorLabel]:
    """Turn per-backend correctness into selector training labels.

    4cc mode emits one backend class per task, chosen uniformly at random
    among the correct backends, and drops tasks no backend solves.
    Multilabel mode keeps every task with its full correctness bit vector.
    """
    if mode not in (SELECTOR_MODE_4CC, SELECTOR_MODE_MULTILABEL):
        raise ValueError(f"unknown selector mode {mode!r}")
    out: list[SelectorLabel] = []
    for task_id, bits in correctness_rows:
        bits = tuple(int(b) for b in bits)
        if len(bits) != len(backend_order):
            raise ValueError(
                f"{task_id}: expected {len(backend_order)} correctness bits, got {len(bits)}"
            )
        if mode == SELECTOR_MODE_MULTILABEL:
            out.append(SelectorLabel(task_id=task_id, mode=mode, labels=bits))
            continue
        correct = [backend_order[i] for i, bit in enumerate(bits) if bit]
        if not correct:
            continue
        out.append(SelectorLabel(task_id=task_id, mode=mode, chosen=rng.choice(correct)))
    return out


def upper_bound(correctness_rows: Iterable[Sequence[int]]) -> float:
    """Fraction of tasks where at least one backend is correct."""
    rows = [tuple(int(b) for b in row) for row in correctness_rows]
    if not rows:
        raise ValueError("upper bound needs at least one task")
    return sum(1 for row in rows if any(row)) / len(rows)


class CountSelector:
    """Desk-scale selector: count tables over coarse task features.

    Features are the prefix length (capped) and a difficult-sentence length
    bucket. In 4cc mode prediction is the majority class for the feature;
    in multilabel mode each backend is marked when it was correct at least
    half the time for the feature. Falls back to global statistics for
    unseen features.
    """

    PREFIX_CAP = 12

    def __init__(self, backend_order: Sequence[str], mode: str):
        if mode not in (SELECTOR_MODE_4CC, SELECTOR_MODE_MULTILABEL):
            raise ValueError(f"unknown selector mode {mode!r}")
        self.backend_order = list(backend_order)
        self.mode = mode
        self._class_counts: dict[tuple, Counter] = {}
        self._bit_totals: dict[tuple, list[int]] = {}
        self._bit_counts: dict[tuple, int] = {}
        self._global_class: Counter = Counter()
        self._global_bits = [0] * len(self.backend_order)
        self._global_count = 0

    @staticmethod
    def _length_bucket(n: int) -> str:
        if n <= 5:
            return "very_short"
        if n <= 15:
            return "short"
        if n <= 19:
            return "medium"
        return "long"

    def _features(self, task: PredictionTask) -> tuple:
        return (
            min(task.position_index, self.PREFIX_CAP),
            self._length_bucket(len(task.difficult_tokens)),
        )

    def train(
        self, tasks: Sequence[PredictionTask], labels: Sequence[SelectorLabel]
    ) -> "CountSelector":
        by_id = {t.task_id: t for t in tasks}
        for label in labels:
            task = by_id.get(label.task_id)
            if task is None:
                raise KeyError(f"selector label for unknown task {label.task_id!r}")
            features = self._features(task)
            if self.mode == SELECTOR_MODE_4CC:
                self._class_counts.setdefault(features, Counter())[label.chosen] += 1
                self._global_class[label.chosen] += 1
            else:
                totals = self._bit_totals.setdefault(
                    features, [0] * len(self.backend_order)
                )
                for i, bit in enumerate(label.labels):
                    totals[i] += bit
                    self._global_bits[i] += bit
                self._bit_counts[features] = self._bit_counts.get(features, 0) + 1
                self._global_count += 1
        return self

    def _majority(self, counter: Counter) -> str | None:
        if not counter:
            return None
        ranked = sorted(
            counter.items(),
            key=lambda item: (-item[1], self.backend_order.index(item[0])),
        )
        return ranked[0][0]

    def predict_backend(self, task: PredictionTask) -> str | None:
        counter = self._class_counts.get(self._features(task), self._global_class)
        return self._majority(counter) or self._majority(self._global_class)

    def predict_label_set(self, task: PredictionTask) -> frozenset[str]:
        features = self._features(task)
        totals = self._bit_totals.get(features)
        count = self._bit_counts.get(features, 0)
        if totals is None or count == 0:
            totals, count = self._global_bits, self._global_count
        if count == 0:
            return frozenset()
        return frozenset(
            backend
            for backend, total in zip(self.backend_order, totals)
            if total * 2 >= count
        )


@dataclass
class StrategyResult:
    strategy: str
    accuracy: float
    total: int
    chosen: dict[str, tuple[str, str | None]]
    backend_usage: Counter


def correctness_rows(
    tasks: Sequence[PredictionTask],
    suggestions_by_task: Mapping[str, Sequence[SuggestionList]],
    backend_order: Sequence[str],
) -> list[tuple[str, tuple[int, ...]]]:
    """Per-task top-1 correctness bits in backend order. Missing or empty
    suggestion lists count as incorrect."""
    rows = []
    for task in tasks:
        by_backend = {
            record.model_id: record for record in suggestions_by_task.get(task.task_id, [])
        }
        bits = []
        for backend_id in backend_order:
            record = by_backend.get(backend_id)
            correct = bool(
                record and record.suggestions and record.top().word == task.gold_next
            )
            bits.append(int(correct))
        rows.append((task.task_id, tuple(bits)))
    return rows


def evaluate_strategy(
    tasks: Sequence[PredictionTask],
    suggestions_by_task: Mapping[str, Sequence[SuggestionList]],
    strategy: str,
    *,
    weights: EnsembleWeights | None = None,
    backend_order: Sequence[str] | None = None,
    seed: int = 0,
    selector: str | CountSelector = "oracle",
) -> StrategyResult:
    """Replay a prediction log under one combination strategy.

    ``selector`` applies to the classifier-backed strategies: ``"oracle"``
    uses the true correctness of each backend (a random correct backend as
    the 4cc class), ``"none"`` grants no bonus anywhere, and a trained
    CountSelector predicts from task features.
    """
    if strategy not in ENSEMBLE_STRATEGIES:
        raise ValueError(f"unknown strategy {strategy!r}")
    weights = weights or EnsembleWeights()
    if backend_order is None:
        seen: list[str] = []
        for task in tasks:
            for record in suggestions_by_task.get(task.task_id, []):
                if record.model_id not in seen:
                    seen.append(record.model_id)
        backend_order = seen
    rng = random.Random(seed)

    rows = dict(correctness_rows(tasks, suggestions_by_task, backend_order))
    hits = 0
    chosen: dict[str, tuple[str, str | None]] = {}
    usage: Counter = Counter()

    if strategy == STRATEGY_UPPER_BOUND:
        value = upper_bound([rows[t.task_id] for t in tasks])
        return StrategyResult(strategy, value, len(tasks), {}, usage)

    for task in tasks:
        records = [
            record
            for backend_id in backend_order
            for record in suggestions_by_task.get(task.task_id, [])
            if record.model_id == backend_id
        ]
        if not any(record.suggestions for record in records):
            chosen[task.task_id] = ("", None)
            continue

        if strategy == STRATEGY_MAJORITY:
            word = majority_vote(records, rng, weights.pool_top_n)
            backend_id = None
        elif strategy == STRATEGY_4CC:
            predicted = _predicted_backend(task, rows, backend_order, selector, rng)
            word, backend_id = select_best(
                records,
                lambda w, p, b: score_4cc(p, b, predicted, weights),
            )
        else:  # autometsl
            label_set = _predicted_label_set(task, rows, backend_order, selector)
            word, backend_id = select_best(
                records,
                lambda w, p, b: score_autometsl(p, b, label_set, weights),
            )
        chosen[task.task_id] = (word, backend_id)
        if backend_id is not None:
            usage[backend_id] += 1
        if word == task.gold_next:
            hits += 1

    total = len(tasks)
    return StrategyResult(strategy, hits / total if total else 0.0, total, chosen, usage)


def _predicted_backend(
    task: PredictionTask,
    rows: Mapping[str, tuple[int, ...]],
    backend_order: Sequence[str],
    selector: str | CountSelector,
    rng: random.Random,
) -> str | None:
    if isinstance(selector, CountSelector):
        return selector.predict_backend(task)
    if selector == "none":
        return None
    if selector == "oracle":
        bits = rows[task.task_id]
        correct = [backend_order[i] for i, bit in enumerate(bits) if bit]
        return rng.choice(correct) if correct else None
    raise ValueError(f"unknown selector {selector!r}")


def _predicted_label_set(
    task: PredictionTask,
    rows: Mapping[str, tuple[int, ...]],
    backend_order: Sequence[str],
    selector: str | CountSelector,
) -> frozenset[str]:
    if isinstance(selector, CountSelector):
        return selector.predict_label_set(task)
    if selector == "none":
        return frozenset()
    if selector == "oracle":
        bits = rows[task.task_id]
        return frozenset(backend_order[i] for i, bit in enumerate(bits) if bit)
    raise ValueError(f"unknown selector {selector!r}")


def log_records_to_suggestions(
    rows: Iterable[Mapping],
) -> dict[str, list[SuggestionList]]:
    """Group prediction-log records (task_id, backend_id, rank, word,
    probability) into per-task suggestion lists, rank order preserved."""
    staged: dict[str, dict[str, list[tuple[int, str, float]]]] = {}
    for row in rows:
        staged.setdefault(str(row["task_id"]), {}).setdefault(
            str(row["backend_id"]), []
        ).append((int(row["rank"]), str(row["word"]), float(row["probability"])))
    out: dict[str, list[SuggestionList]] = {}
    for task_id, by_backend in staged.items():
        lists = []
        for backend_id, entries in by_backend.items():
            entries.sort(key=lambda item: item[0])
            lists.append(
                SuggestionList(
                    model_id=backend_id,
                    suggestions=tuple(Suggestion(w, p) for _, w, p in entries),
                )
            )
        out[task_id] = lists
    return out


def suggestions_to_log_records(
    task_id: str, records: Sequence[SuggestionList]
) -> list[dict]:
    out = []
    for record in records:
        for rank, suggestion in enumerate(record.suggestions, start=1):
            out.append(
                {
                    "task_id": task_id,
                    "backend_id": record.model_id,
                    "rank": rank,
                    "word": suggestion.word,
                    "probability": suggestion.probability,
                }
            )
    return out
