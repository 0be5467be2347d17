"""Answer-span augmentation for extractive question answering.

Creates additional positive training examples by widening gold answer
spans: a negative shift moves the start boundary left by ``|d|`` characters,
a positive shift moves the end boundary right by ``d``. New boundaries are
clamped to the document and (by default) snapped outward to whitespace so
spans never split a word. The augmented set is consumed through a two-stage
training plan: pretrain on fuzzy boundaries, then finetune on the original
spans only.

Offsets everywhere are 0-based, end-exclusive counts of Unicode scalar
values.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from . import records
from .seeding import record_rng, record_uniform

logger = logging.getLogger(__name__)

PROVENANCE_ORIGINAL = "original"
PROVENANCE_AUGMENTED = "augmented"

DEFAULT_SHIFTS = (-32, -16, 16, 32)


class DegenerateShiftError(ValueError):
    """Raised when clamping absorbs a shift entirely, reproducing the original span."""


@dataclass(frozen=True)
class AnswerSpan:
    doc_id: str
    start_char: int
    end_char: int


@dataclass(frozen=True)
class QAExample:
    """A question with candidate documents and an optional gold answer span."""

    example_id: str
    question_title: str
    question_body: str
    documents: tuple[tuple[str, str], ...]
    answer: AnswerSpan | None = None

    @property
    def answerable(self) -> bool:
        return self.answer is not None

    def document_text(self, doc_id: str) -> str:
        for did, text in self.documents:
            if did == doc_id:
                return text
        raise KeyError(f"{self.example_id}: no document {doc_id!r}")

    def answer_text(self) -> str:
        if self.answer is None:
            raise ValueError(f"{self.example_id} is unanswerable")
        text = self.document_text(self.answer.doc_id)
        return text[self.answer.start_char : self.answer.end_char]

    def validate(self) -> None:
        doc_ids = [did for did, _ in self.documents]
        if len(set(doc_ids)) != len(doc_ids):
            raise ValueError(f"{self.example_id}: duplicate doc_ids")
        if self.answer is not None:
            text = self.document_text(self.answer.doc_id)
            if not 0 <= self.answer.start_char < self.answer.end_char <= len(text):
                raise ValueError(
                    f"{self.example_id}: span ({self.answer.start_char}, "
                    f"{self.answer.end_char}) outside document of length {len(text)}"
                )

    def to_record(self) -> dict:
        answer = None
        if self.answer is not None:
            answer = {
                "doc_id": self.answer.doc_id,
                "start_char": self.answer.start_char,
                "end_char": self.answer.end_char,
            }
        return {
            "example_id": self.example_id,
            "question_title": self.question_title,
            "question_body": self.question_body,
            "documents": [{"doc_id": d, "text": t} for d, t in self.documents],
            "answer": answer,
            "answerable": self.answerable,
            "provenance": PROVENANCE_ORIGINAL,
        }

    @classmethod
    def from_record(cls, row: dict) -> "QAExample":
        answer = None
        raw = row.get("answer")
        if raw is not None:
            answer = AnswerSpan(raw["doc_id"], int(raw["start_char"]), int(raw["end_char"]))
        example = cls(
            example_id=str(row["example_id"]),
            question_title=row.get("question_title", ""),
            question_body=row.get("question_body", ""),
            documents=tuple((d["doc_id"], d["text"]) for d in row.get("documents", [])),
            answer=answer,
        )
        if row.get("answerable", example.answerable) != example.answerable:
            raise ValueError(f"{example.example_id}: answerable flag contradicts answer field")
        example.validate()
        return example


@dataclass(frozen=True)
class AugmentedExample:
    """A widened copy of a parent example's answer span."""

    parent_id: str
    doc_id: str
    shift_d: int
    new_span: tuple[int, int]
    span_text: str
    provenance: str = PROVENANCE_AUGMENTED

    def to_record(self) -> dict:
        return {
            "parent_id": self.parent_id,
            "doc_id": self.doc_id,
            "shift_d": self.shift_d,
            "new_span": list(self.new_span),
            "span_text": self.span_text,
            "provenance": self.provenance,
        }

    @classmethod
    def from_record(cls, row: dict) -> "AugmentedExample":
        return cls(
            parent_id=str(row["parent_id"]),
            doc_id=str(row["doc_id"]),
            shift_d=int(row["shift_d"]),
            new_span=(int(row["new_span"][0]), int(row["new_span"][1])),
            span_text=row["span_text"],
        )


@dataclass(frozen=True)
class AugmentPolicy:
    """Knobs for the augmentation pass.

    ``threshold`` is the fraction of answerable examples selected for
    augmentation (the selection probability p and the threshold T are the
    same quantity). ``spans_per_example`` bounds how many shifted copies each
    selected example contributes.
    """

    threshold: float
    spans_per_example: int = len(DEFAULT_SHIFTS)
    shift_magnitudes: tuple[int, ...] = DEFAULT_SHIFTS
    rng_seed: int = 0
    snap_to_whitespace: bool = True

    def __post_init__(self) -> None:
        if not 0.0 <= self.threshold <= 1.0:
            raise ValueError(f"threshold must be in [0, 1], got {self.threshold}")
        if self.spans_per_example < 1:
            raise ValueError("spans_per_example must be >= 1")
        if any(d == 0 for d in self.shift_magnitudes):
            raise ValueError("shift magnitudes must be nonzero")
        if not self.shift_magnitudes:
            raise ValueError("at least one shift magnitude is required")


def sample_for_augmentation(
    examples: Sequence[QAExample], policy: AugmentPolicy
) -> list[QAExample]:
    """Select the subset of examples to augment.

    Each example gets one uniform draw keyed on (seed, example_id) and is
    kept when the draw falls below the threshold, so selections are
    reproducible, order-independent, and monotone in the threshold.
    """
    for example in examples:
        if not example.answerable:
            raise ValueError(
                f"{example.example_id}: cannot augment an unanswerable example"
            )
    return [
        example
        for example in examples
        if record_uniform(policy.rng_seed, example.example_id) < policy.threshold
    ]


def shift_span(
    example: QAExample, d: int, *, snap_to_whitespace: bool = False
) -> AugmentedExample:
    """Widen the example's answer span by ``d`` characters.

    d < 0 moves the start boundary left (end unchanged); d > 0 moves the end
    boundary right (start unchanged). Boundaries are clamped to the
    document; with ``snap_to_whitespace`` they are then pushed further
    outward to the nearest whitespace so the span does not cut a word.
    """
    if d == 0:
        raise ValueError("shift must be nonzero")
    if example.answer is None:
        raise ValueError(f"{example.example_id} is unanswerable")
    text = example.document_text(example.answer.doc_id)
    start, end = example.answer.start_char, example.answer.end_char

    if d < 0:
        new_start, new_end = max(0, start + d), end
        if snap_to_whitespace:
            while new_start > 0 and not text[new_start - 1].isspace():
                new_start -= 1
    else:
        new_start, new_end = start, min(len(text), end + d)
        if snap_to_whitespace:
            while new_end < len(text) and not text[new_end].isspace():
                new_end += 1

    if (new_start, new_end) == (start, end):
        raise DegenerateShiftError(
            f"{example.example_id}: shift {d:+d} absorbed at document edge"
        )
    return AugmentedExample(
        parent_id=example.example_id,
        doc_id=example.answer.doc_id,
        shift_d=d,
        new_span=(new_start, new_end),
        span_text=text[new_start:new_end],
    )


def _chosen_shifts(example_id: str, policy: AugmentPolicy) -> list[int]:
    shifts = list(dict.fromkeys(policy.shift_magnitudes))
    if policy.spans_per_example >= len(shifts):
        return shifts
    rng = record_rng(policy.rng_seed, f"shifts:{example_id}")
    return rng.sample(shifts, policy.spans_per_example)


def augment_dataset(
    examples: Sequence[QAExample], policy: AugmentPolicy
) -> list[QAExample | AugmentedExample]:
    """Append shifted-span copies of sampled examples to the originals.

    Output keeps every original unchanged (input order), followed by the
    augmented records grouped by parent in sampling order. Shifts that a
    document edge fully absorbs are skipped, never fatal. Unanswerable
    examples pass through untouched.
    """
    answerable = [ex for ex in examples if ex.answerable]
    selected = sample_for_augmentation(answerable, policy)

    out: list[QAExample | AugmentedExample] = list(examples)
    for example in selected:
        for d in _chosen_shifts(example.example_id, policy):
            try:
                out.append(
                    shift_span(example, d, snap_to_whitespace=policy.snap_to_whitespace)
                )
            except DegenerateShiftError as exc:
                logger.info("skipping degenerate shift: %s", exc)
    return out


@dataclass(frozen=True)
class TrainingStage:
    name: str
    dataset: str
    size: int
    init_from: str | None = None


@dataclass(frozen=True)
class TrainingPlan:
    """Declarative two-stage schedule consumed by the backends module."""

    stages: tuple[TrainingStage, ...] = field(default_factory=tuple)

    def to_json(self) -> str:
        return records.dumps_canonical(
            {
                "stages": [
                    {
                        "name": s.name,
                        "dataset": s.dataset,
                        "size": s.size,
                        "init_from": s.init_from,
                    }
                    for s in self.stages
                ]
            }
        )

    @classmethod
    def from_json(cls, payload: str) -> "TrainingPlan":
        import json

        raw = json.loads(payload)
        return cls(
            stages=tuple(
                TrainingStage(s["name"], s["dataset"], int(s["size"]), s.get("init_from"))
                for s in raw["stages"]
            )
        )


def build_training_plan(
    augmented_set: Sequence[object],
    original_set: Sequence[object],
    *,
    augmented_name: str = "augmented+original",
    original_name: str = "original",
) -> TrainingPlan:
    """Emit the pretrain-on-fuzzy / finetune-on-original schedule.

    Stage one trains on the augmented dataset (which already contains the
    originals); stage two initializes from stage one and sees only the
    original spans.
    """
    if not augmented_set or not original_set:
        raise ValueError("both datasets must be non-empty")
    return TrainingPlan(
        stages=(
            TrainingStage("pretrain", augmented_name, len(augmented_set), None),
            TrainingStage("finetune", original_name, len(original_set), "pretrain"),
        )
    )


def load_examples(path) -> list[QAExample]:
    return [QAExample.from_record(row) for row in records.read_jsonl(path)]


def dump_dataset(dataset: Iterable[QAExample | AugmentedExample]) -> Iterable[dict]:
    for item in dataset:
        yield item.to_record()
