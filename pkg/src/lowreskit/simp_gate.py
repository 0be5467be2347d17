"""Inference-time quality gate for simplified inputs.

The gate is a binary classifier deciding, per example, whether the
simplified rewrite should replace the original as the downstream model's
input. Its training data is built from downstream feedback: a pair is
``good`` when the downstream model answers correctly on the simplified
text, ``bad`` when only the original works, and ``excluded`` when neither
does. The downstream model itself is never retrained.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

logger = logging.getLogger(__name__)

GATE_GOOD = "good"
GATE_BAD = "bad"
GATE_EXCLUDED = "excluded"

GATE_SEPARATOR = "[SEP]"

GateClassifier = Callable[[str, str], str]


@dataclass(frozen=True)
class GatePair:
    """One example with downstream predictions on both variants."""

    example_id: str
    original_text: str
    simplified_text: str
    pred_on_original: str | None
    pred_on_simplified: str | None
    gold_label: str

    @classmethod
    def from_record(cls, row: dict) -> "GatePair":
        return cls(
            example_id=str(row.get("example_id", "")),
            original_text=row["original_text"],
            simplified_text=row["simplified_text"],
            pred_on_original=row.get("pred_on_original"),
            pred_on_simplified=row.get("pred_on_simplified"),
            gold_label=str(row["gold_label"]),
        )


@dataclass(frozen=True)
class GateExample:
    example_id: str
    original_text: str
    simplified_text: str
    pred_on_original: str
    pred_on_simplified: str
    gold_label: str
    gate_label: str

    def to_record(self) -> dict:
        return {
            "example_id": self.example_id,
            "original_text": self.original_text,
            "simplified_text": self.simplified_text,
            "pred_on_original": self.pred_on_original,
            "pred_on_simplified": self.pred_on_simplified,
            "gold_label": self.gold_label,
            "gate_label": self.gate_label,
        }


def label_pair(pair: GatePair) -> str:
    """good iff the simplified text yields a correct prediction; bad iff
    only the original does; excluded when both predictions are wrong."""
    simplified_correct = pair.pred_on_simplified == pair.gold_label
    original_correct = pair.pred_on_original == pair.gold_label
    if simplified_correct:
        return GATE_GOOD
    if original_correct:
        return GATE_BAD
    return GATE_EXCLUDED


def build_gate_dataset(pairs: Sequence[GatePair]) -> list[GateExample]:
    """Label every pair; pairs missing a downstream prediction are rejected
    with a diagnostic rather than silently mislabeled."""
    out: list[GateExample] = []
    for pair in pairs:
        if pair.pred_on_original is None or pair.pred_on_simplified is None:
            logger.warning(
                "gate pair %s rejected: missing downstream prediction", pair.example_id
            )
            continue
        out.append(
            GateExample(
                example_id=pair.example_id,
                original_text=pair.original_text,
                simplified_text=pair.simplified_text,
                pred_on_original=pair.pred_on_original,
                pred_on_simplified=pair.pred_on_simplified,
                gold_label=pair.gold_label,
                gate_label=label_pair(pair),
            )
        )
    return out


def training_split(examples: Iterable[GateExample]) -> list[GateExample]:
    """Training split for the gate classifier: excluded pairs never enter."""
    return [ex for ex in examples if ex.gate_label != GATE_EXCLUDED]


def gate_input_text(
    original_text: str, simplified_text: str, separator: str = GATE_SEPARATOR
) -> str:
    """Model-agnostic input encoding for gate classifiers: the pair joined
    by a sentinel."""
    return f"{original_text} {separator} {simplified_text}"


def gate_select(
    original_text: str, simplified_text: str, gate_classifier: GateClassifier
) -> str:
    """Return the simplified text iff the gate says good, else the original.

    Any classifier failure (exception or unknown label) falls back to the
    original so infrastructure trouble can never push quality below the
    ungated baseline. The returned string is always one of the two inputs,
    verbatim.
    """
    try:
        label = gate_classifier(original_text, simplified_text)
    except Exception as exc:
        logger.warning("gate classifier failed, keeping original: %s", exc)
        return original_text
    return simplified_text if label == GATE_GOOD else original_text
