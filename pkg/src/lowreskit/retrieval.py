"""Document reranking from answer-span scores, and retrieval accuracy.

A reader emits scored candidate answer spans; each document is ranked by
the maximum score over its spans and only the top k documents are kept for
answer extraction. Document retrieval accuracy at n (the fraction of
answerable questions whose gold document lands in the top n) evaluates the
reranker.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Mapping, Sequence

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SpanScore:
    doc_id: str
    span: tuple[int, int]
    score: float


@dataclass(frozen=True)
class RetrievalResult:
    question_id: str
    ranked_docs: tuple[tuple[str, float], ...]
    kept_k: int

    def doc_ids(self) -> list[str]:
        return [doc_id for doc_id, _ in self.ranked_docs]


def score_documents(span_scores: Sequence[SpanScore]) -> list[tuple[str, float]]:
    """Collapse span scores to per-document scores (max over spans).

    Sorted by score descending; ties keep first-appearance order of the
    document in the input, so results are stable for equal scores.
    """
    best: dict[str, float] = {}
    first_seen: dict[str, int] = {}
    for index, span in enumerate(span_scores):
        first_seen.setdefault(span.doc_id, index)
        if span.doc_id not in best or span.score > best[span.doc_id]:
            best[span.doc_id] = span.score
    return sorted(best.items(), key=lambda item: (-item[1], first_seen[item[0]]))


def keep_top_k(
    ranked: Sequence[tuple[str, float]], k: int, *, question_id: str = ""
) -> RetrievalResult:
    """Retain the top min(k, available) documents without reordering."""
    if k < 1:
        raise ValueError("k must be >= 1")
    return RetrievalResult(
        question_id=question_id, ranked_docs=tuple(ranked[:k]), kept_k=k
    )


def dra_at(
    results: Sequence[RetrievalResult], gold: Mapping[str, str], n: int
) -> float:
    """Fraction of questions whose gold document appears in the top n.

    Questions absent from the gold map are excluded and reported; results
    with an empty ranking (a no-answer verdict from the reader) are skipped,
    matching the answerable-only definition of the metric.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    hits = 0
    scored = 0
    missing: list[str] = []
    for result in results:
        if result.question_id not in gold:
            missing.append(result.question_id)
            continue
        if not result.ranked_docs:
            continue
        scored += 1
        if gold[result.question_id] in result.doc_ids()[:n]:
            hits += 1
    if missing:
        logger.warning(
            "dra_at: %d question(s) missing from gold map: %s",
            len(missing),
            ", ".join(missing[:10]),
        )
    if scored == 0:
        raise ValueError("no scorable questions (empty or unanswerable results)")
    return hits / scored
