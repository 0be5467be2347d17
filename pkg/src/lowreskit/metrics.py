"""Shared evaluation metrics and cohort breakdowns.

Covers exact-match next-word accuracy (optionally at a suggestion-list
cutoff), character-overlap precision/recall/F1 between answer spans,
token-bag F1 with exact match for extracted answer strings, and length or
prefix-position breakdowns of task-level scores.
"""

from __future__ import annotations

import string
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .autocomplete import PredictionTask

Span = tuple[int, int] | None

LENGTH_BUCKETS = (
    ("very_short", 1, 5),
    ("short", 6, 15),
    ("medium", 16, 19),
    ("long", 20, None),
)

AXIS_DIFFICULT_LENGTH = "difficult_length"
AXIS_PREFIX_LENGTH = "prefix_length"


@dataclass(frozen=True)
class MetricReport:
    metric: str
    value: float
    cohort: str | None = None
    count: int = 0

    def to_record(self) -> dict:
        return {
            "metric": self.metric,
            "value": self.value,
            "cohort": self.cohort,
            "count": self.count,
        }


def accuracy(predictions: Sequence[str], golds: Sequence[str]) -> float:
    """Exact-token-match rate over aligned prediction/gold lists."""
    if len(predictions) != len(golds):
        raise ValueError(
            f"length mismatch: {len(predictions)} predictions vs {len(golds)} golds"
        )
    if not golds:
        raise ValueError("empty evaluation set")
    return sum(1 for p, g in zip(predictions, golds) if p == g) / len(golds)


def accuracy_at_n(
    ranked_predictions: Sequence[Sequence[str]], golds: Sequence[str], n: int
) -> float:
    """Rate at which the gold token appears within the first n suggestions."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if len(ranked_predictions) != len(golds):
        raise ValueError("length mismatch between predictions and golds")
    if not golds:
        raise ValueError("empty evaluation set")
    hits = sum(1 for ranked, gold in zip(ranked_predictions, golds) if gold in ranked[:n])
    return hits / len(golds)


def char_overlap_f1(pred: Span, gold: Span) -> tuple[float, float, float]:
    """Character-overlap precision, recall, and F1 of two half-open spans.

    Two empty spans (both sides predict no answer) score 1.0; a one-sided
    empty scores 0. Swapping the arguments swaps precision and recall and
    preserves F1.
    """

    def _length(span: Span) -> int:
        return 0 if span is None else max(0, span[1] - span[0])

    pred_len, gold_len = _length(pred), _length(gold)
    if pred_len == 0 and gold_len == 0:
        return 1.0, 1.0, 1.0
    if pred_len == 0 or gold_len == 0:
        return 0.0, 0.0, 0.0
    overlap = max(0, min(pred[1], gold[1]) - max(pred[0], gold[0]))
    precision = overlap / pred_len
    recall = overlap / gold_len
    if precision + recall == 0:
        return 0.0, 0.0, 0.0
    return precision, recall, 2 * precision * recall / (precision + recall)


def macro_char_overlap(
    span_pairs: Sequence[tuple[Span, Span]]
) -> tuple[float, float, float]:
    """Macro average of char_overlap_f1 over (pred, gold) span pairs."""
    if not span_pairs:
        raise ValueError("empty evaluation set")
    totals = [0.0, 0.0, 0.0]
    for pred, gold in span_pairs:
        for i, value in enumerate(char_overlap_f1(pred, gold)):
            totals[i] += value
    return tuple(total / len(span_pairs) for total in totals)  # type: ignore[return-value]


def normalize_text(text: str) -> str:
    """Lowercase, collapse whitespace, and strip surrounding punctuation."""
    collapsed = " ".join(text.split()).lower()
    return collapsed.strip(string.punctuation + " ")


def token_f1_em(pred_text: str, gold_text: str) -> tuple[float, int]:
    """Bag-of-tokens F1 and normalized exact match for answer strings."""
    pred_norm, gold_norm = normalize_text(pred_text), normalize_text(gold_text)
    em = int(pred_norm == gold_norm)
    pred_tokens, gold_tokens = pred_norm.split(), gold_norm.split()
    if not pred_tokens and not gold_tokens:
        return 1.0, em
    common = Counter(pred_tokens) & Counter(gold_tokens)
    overlap = sum(common.values())
    if overlap == 0:
        return 0.0, em
    precision = overlap / len(pred_tokens)
    recall = overlap / len(gold_tokens)
    return 2 * precision * recall / (precision + recall), em


def difficult_length_bucket(token_count: int) -> str:
    for name, low, high in LENGTH_BUCKETS:
        if token_count >= low and (high is None or token_count <= high):
            return name
    raise ValueError(f"no bucket for length {token_count}")


def prefix_length_bucket(position_index: int) -> str:
    return f"i={position_index}"


def breakdown(
    tasks: Sequence[PredictionTask],
    values: Sequence[float],
    axis: str,
) -> list[MetricReport]:
    """Bucketed means of per-task scores.

    The difficult-length axis uses the four sentence-length buckets; the
    prefix-length axis groups by the number of words typed so far. Bucket
    counts always sum to the task count.
    """
    if len(tasks) != len(values):
        raise ValueError("tasks and values must align")
    if axis not in (AXIS_DIFFICULT_LENGTH, AXIS_PREFIX_LENGTH):
        raise ValueError(f"unknown breakdown axis {axis!r}")
    sums: dict[str, float] = {}
    counts: dict[str, int] = {}
    for task, value in zip(tasks, values):
        if axis == AXIS_DIFFICULT_LENGTH:
            cohort = difficult_length_bucket(len(task.difficult_tokens))
        else:
            cohort = prefix_length_bucket(task.position_index)
        sums[cohort] = sums.get(cohort, 0.0) + value
        counts[cohort] = counts.get(cohort, 0) + 1

    if axis == AXIS_DIFFICULT_LENGTH:
        order = [name for name, _, _ in LENGTH_BUCKETS if name in counts]
    else:
        order = sorted(counts, key=lambda c: int(c.split("=", 1)[1]))
    return [
        MetricReport(
            metric=f"accuracy_by_{axis}",
            value=sums[cohort] / counts[cohort],
            cohort=cohort,
            count=counts[cohort],
        )
        for cohort in order
    ]


def render_report_table(reports: Sequence[MetricReport]) -> str:
    """Plain-text table of metric reports."""
    header = f"{'metric':<32} {'cohort':<14} {'value':>10} {'count':>8}"
    lines = [header, "-" * len(header)]
    for report in reports:
        lines.append(
            f"{report.metric:<32} {report.cohort or '-':<14} "
            f"{report.value:>10.4f} {report.count:>8d}"
        )
    return "\n".join(lines)


def write_reports(path, reports: Iterable[MetricReport]) -> int:
    from . import records

    return records.write_jsonl(path, (r.to_record() for r in reports))


def reports_from_records(rows: Iterable[Mapping]) -> list[MetricReport]:
    return [
        MetricReport(
            metric=str(row["metric"]),
            value=float(row["value"]),
            cohort=row.get("cohort"),
            count=int(row.get("count", 0)),
        )
        for row in rows
    ]
