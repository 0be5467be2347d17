"""Accuracy metrics, span and token overlap, and cohort breakdowns."""

import random

import pytest

from lowreskit.autocomplete import PredictionTask
from lowreskit.metrics import (
    AXIS_DIFFICULT_LENGTH,
    AXIS_PREFIX_LENGTH,
    MetricReport,
    accuracy,
    accuracy_at_n,
    breakdown,
    char_overlap_f1,
    difficult_length_bucket,
    macro_char_overlap,
    normalize_text,
    render_report_table,
    token_f1_em,
)


class TestAccuracy:
    def test_all_correct(self):
        assert accuracy(["a", "b"], ["a", "b"]) == 1.0

    def test_three_of_five(self):
        assert accuracy(list("abcde"), list("abcxy")) == 0.6

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            accuracy(["a"], ["a", "b"])

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            accuracy([], [])


class TestAccuracyAtN:
    def test_gold_at_rank_three(self):
        ranked = [["x", "y", "gold"]]
        assert accuracy_at_n(ranked, ["gold"], 2) == 0.0
        assert accuracy_at_n(ranked, ["gold"], 3) == 1.0

    def test_at_one_equals_top1_accuracy(self):
        rng = random.Random(4)
        ranked = [[f"w{rng.randrange(3)}" for _ in range(5)] for _ in range(50)]
        golds = [f"w{rng.randrange(3)}" for _ in range(50)]
        top1 = [r[0] for r in ranked]
        assert accuracy_at_n(ranked, golds, 1) == accuracy(top1, golds)

    def test_matches_brute_force_for_all_n(self):
        rng = random.Random(11)
        ranked = [
            rng.sample([f"w{j}" for j in range(8)], k=5) for _ in range(60)
        ]
        golds = [f"w{rng.randrange(8)}" for _ in range(60)]
        for n in range(1, 8):
            expected = sum(1 for r, g in zip(ranked, golds) if g in r[:n]) / len(golds)
            assert accuracy_at_n(ranked, golds, n) == expected

    def test_non_decreasing_in_n(self):
        rng = random.Random(13)
        ranked = [rng.sample([f"w{j}" for j in range(6)], k=6) for _ in range(40)]
        golds = [f"w{rng.randrange(6)}" for _ in range(40)]
        values = [accuracy_at_n(ranked, golds, n) for n in range(1, 7)]
        assert values == sorted(values)

    def test_n_must_be_positive(self):
        with pytest.raises(ValueError):
            accuracy_at_n([["a"]], ["a"], 0)


class TestCharOverlap:
    def test_half_overlap(self):
        assert char_overlap_f1((10, 20), (15, 25)) == (0.5, 0.5, 0.5)

    def test_identical_spans(self):
        assert char_overlap_f1((3, 9), (3, 9)) == (1.0, 1.0, 1.0)

    def test_disjoint_spans(self):
        assert char_overlap_f1((0, 5), (10, 20)) == (0.0, 0.0, 0.0)

    def test_both_empty_is_perfect(self):
        assert char_overlap_f1(None, None) == (1.0, 1.0, 1.0)
        assert char_overlap_f1((4, 4), (9, 9)) == (1.0, 1.0, 1.0)

    def test_one_sided_empty_is_zero(self):
        assert char_overlap_f1(None, (0, 4)) == (0.0, 0.0, 0.0)
        assert char_overlap_f1((0, 4), None) == (0.0, 0.0, 0.0)

    def test_swap_symmetry(self):
        rng = random.Random(21)
        for _ in range(200):
            a = (rng.randrange(50), rng.randrange(50))
            b = (rng.randrange(50), rng.randrange(50))
            a = (min(a), max(a))
            b = (min(b), max(b))
            pa, ra, fa = char_overlap_f1(a, b)
            pb, rb, fb = char_overlap_f1(b, a)
            assert (pa, ra, fa) == (rb, pb, fb)

    def test_macro_average_is_mean_of_per_question_scores(self):
        pairs = [((0, 10), (5, 15)), ((0, 4), (0, 4)), (None, (1, 2))]
        per_question = [char_overlap_f1(p, g)[2] for p, g in pairs]
        assert macro_char_overlap(pairs)[2] == pytest.approx(
            sum(per_question) / len(per_question)
        )


class TestTokenF1EM:
    def test_identical(self):
        assert token_f1_em("same words", "same words") == (1.0, 1)

    def test_bag_overlap_example(self):
        f1, em = token_f1_em("a b c", "b c d")
        assert f1 == pytest.approx(2 / 3)
        assert em == 0

    def test_disjoint(self):
        assert token_f1_em("alpha beta", "gamma delta") == (0.0, 0)

    def test_normalization(self):
        assert normalize_text("  The   Answer. ") == "the answer"
        f1, em = token_f1_em("The Answer.", "the answer")
        assert em == 1 and f1 == 1.0


def make_task(task_id, difficult_len, position):
    return PredictionTask(
        task_id=task_id,
        difficult_tokens=tuple(["w"] * difficult_len),
        typed_prefix=tuple(["p"] * position),
        gold_next="g",
        position_index=position,
    )


class TestBreakdown:
    def test_bucket_boundaries(self):
        assert difficult_length_bucket(5) == "very_short"
        assert difficult_length_bucket(6) == "short"
        assert difficult_length_bucket(15) == "short"
        assert difficult_length_bucket(16) == "medium"
        assert difficult_length_bucket(19) == "medium"
        assert difficult_length_bucket(20) == "long"

    def test_bucket_counts_sum_to_total(self):
        rng = random.Random(6)
        tasks = [make_task(f"t{i}", rng.randint(1, 30), rng.randint(1, 9)) for i in range(100)]
        values = [float(rng.random() < 0.5) for _ in tasks]
        for axis in (AXIS_DIFFICULT_LENGTH, AXIS_PREFIX_LENGTH):
            reports = breakdown(tasks, values, axis)
            assert sum(r.count for r in reports) == len(tasks)

    def test_bucket_means_match_group_by_oracle(self):
        rng = random.Random(16)
        tasks = [make_task(f"t{i}", rng.randint(1, 30), rng.randint(1, 9)) for i in range(200)]
        values = [float(rng.random() < 0.6) for _ in tasks]
        reports = breakdown(tasks, values, AXIS_DIFFICULT_LENGTH)
        for report in reports:
            members = [
                v
                for t, v in zip(tasks, values)
                if difficult_length_bucket(len(t.difficult_tokens)) == report.cohort
            ]
            assert report.value == pytest.approx(sum(members) / len(members))
            assert report.count == len(members)

    def test_prefix_axis_groups_by_position(self):
        tasks = [make_task("a", 10, 1), make_task("b", 10, 1), make_task("c", 10, 2)]
        reports = breakdown(tasks, [1.0, 0.0, 1.0], AXIS_PREFIX_LENGTH)
        assert [r.cohort for r in reports] == ["i=1", "i=2"]
        assert reports[0].value == 0.5 and reports[0].count == 2

    def test_unknown_axis_rejected(self):
        with pytest.raises(ValueError):
            breakdown([], [], "by_vibe")


class TestRendering:
    def test_table_contains_rows(self):
        reports = [
            MetricReport("accuracy", 0.5, count=10),
            MetricReport("accuracy_by_difficult_length", 0.25, cohort="short", count=4),
        ]
        table = render_report_table(reports)
        assert "accuracy" in table and "short" in table and "0.2500" in table
