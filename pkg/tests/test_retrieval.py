"""Document reranking against an independent group-by-max oracle, plus the
retrieval-accuracy metric."""

import random

import pytest

from lowreskit.retrieval import (
    RetrievalResult,
    SpanScore,
    dra_at,
    keep_top_k,
    score_documents,
)


def oracle_rank(span_scores):
    """Independent reranker: group-by max, then a stable sort on score.

    Python's sort is stable, so sorting the first-appearance doc list by
    negated score reproduces the tie rule without tracking indices.
    """
    best = {}
    order = []
    for span in span_scores:
        if span.doc_id not in best:
            order.append(span.doc_id)
            best[span.doc_id] = span.score
        elif span.score > best[span.doc_id]:
            best[span.doc_id] = span.score
    return sorted(
        ((doc_id, best[doc_id]) for doc_id in order), key=lambda item: -item[1]
    )


class TestScoreDocuments:
    def test_max_per_group(self):
        spans = [
            SpanScore("A", (0, 5), 0.9),
            SpanScore("A", (5, 9), 0.2),
            SpanScore("B", (0, 3), 0.5),
        ]
        assert score_documents(spans) == [("A", 0.9), ("B", 0.5)]

    def test_single_span(self):
        assert score_documents([SpanScore("A", (0, 1), 0.4)]) == [("A", 0.4)]

    def test_empty_input(self):
        assert score_documents([]) == []

    def test_equal_scores_keep_first_appearance_order(self):
        spans = [
            SpanScore("B", (0, 1), 0.5),
            SpanScore("A", (0, 1), 0.5),
            SpanScore("C", (0, 1), 0.5),
        ]
        assert [d for d, _ in score_documents(spans)] == ["B", "A", "C"]

    def test_matches_oracle_on_randomized_questions(self):
        rng = random.Random(1234)
        for _ in range(200):
            spans = [
                SpanScore(
                    f"doc{rng.randrange(50)}",
                    (0, 10),
                    round(rng.random(), 2),  # coarse scores force ties
                )
                for _ in range(rng.randint(1, 120))
            ]
            assert score_documents(spans) == oracle_rank(spans)

    def test_output_length_equals_distinct_doc_count(self):
        rng = random.Random(9)
        spans = [
            SpanScore(f"doc{rng.randrange(12)}", (0, 4), rng.random())
            for _ in range(100)
        ]
        assert len(score_documents(spans)) == len({s.doc_id for s in spans})


class TestKeepTopK:
    def test_keeps_at_most_k(self):
        ranked = [(f"d{i}", 1.0 - i / 100) for i in range(50)]
        result = keep_top_k(ranked, 10, question_id="q")
        assert len(result.ranked_docs) == 10
        assert result.kept_k == 10

    def test_k_larger_than_list_keeps_all(self):
        ranked = [("a", 0.9), ("b", 0.1)]
        assert keep_top_k(ranked, 10).ranked_docs == (("a", 0.9), ("b", 0.1))

    def test_relative_order_preserved(self):
        ranked = [("a", 0.5), ("b", 0.5), ("c", 0.5), ("d", 0.5)]
        kept = keep_top_k(ranked, 3).ranked_docs
        assert kept == (("a", 0.5), ("b", 0.5), ("c", 0.5))

    def test_k_must_be_positive(self):
        with pytest.raises(ValueError):
            keep_top_k([("a", 1.0)], 0)


def make_result(qid, doc_ids):
    ranked = tuple((d, 1.0 - i / 10) for i, d in enumerate(doc_ids))
    return RetrievalResult(question_id=qid, ranked_docs=ranked, kept_k=len(doc_ids))


class TestDraAt:
    def test_gold_always_first(self):
        results = [make_result(f"q{i}", ["gold", "x"]) for i in range(4)]
        gold = {f"q{i}": "gold" for i in range(4)}
        assert dra_at(results, gold, 1) == 1.0

    def test_gold_at_rank_three(self):
        results = [make_result("q", ["a", "b", "gold", "c"])]
        gold = {"q": "gold"}
        assert dra_at(results, gold, 1) == 0.0
        assert dra_at(results, gold, 5) == 1.0

    def test_mixed_fixture_matches_hand_count(self):
        # Gold ranks: 1, 2, 3, 4, absent, 1, 2, absent, 1, 3.
        ranks = [1, 2, 3, 4, None, 1, 2, None, 1, 3]
        results, gold = [], {}
        for i, rank in enumerate(ranks):
            docs = [f"f{i}_{j}" for j in range(5)]
            if rank is not None:
                docs[rank - 1] = "gold"
            results.append(make_result(f"q{i}", docs))
            gold[f"q{i}"] = "gold"
        # Brute-force membership count oracle.
        for n in (1, 2, 3, 4, 5):
            expected = sum(1 for r in ranks if r is not None and r <= n) / len(ranks)
            assert dra_at(results, gold, n) == expected

    def test_missing_gold_questions_excluded(self):
        results = [make_result("known", ["gold"]), make_result("unknown", ["gold"])]
        assert dra_at(results, {"known": "gold"}, 1) == 1.0

    def test_no_answer_verdicts_skipped(self):
        results = [
            make_result("q1", ["gold"]),
            RetrievalResult(question_id="q2", ranked_docs=(), kept_k=5),
        ]
        gold = {"q1": "gold", "q2": "gold"}
        assert dra_at(results, gold, 1) == 1.0

    def test_monotone_in_n(self):
        rng = random.Random(77)
        results, gold = [], {}
        for i in range(40):
            docs = [f"d{i}_{j}" for j in range(10)]
            docs.insert(rng.randrange(10), "gold")
            results.append(make_result(f"q{i}", docs))
            gold[f"q{i}"] = "gold"
        values = [dra_at(results, gold, n) for n in range(1, 12)]
        assert values == sorted(values)

    def test_no_scorable_questions_is_an_error(self):
        with pytest.raises(ValueError):
            dra_at([make_result("q", ["a"])], {}, 1)
