"""Acceptance gate: one test per release criterion, each printing a
pass/fail line. Run with ``pytest tests/test_acceptance.py -v -s``.

Full-scale fine-tuning results are documentation targets only; everything
asserted here is an exact oracle, a counting property, or a seeded fuzz
check that runs offline inside the stated time budget.
"""

import json
import os
import random
import subprocess
import sys
import time
from pathlib import Path

import pytest

from conftest import (
    MEDICAL_FIXTURE_PAIRS,
    MEDICAL_TERMS,
    NON_MEDICAL_FIXTURE_PAIRS,
    TRAINING_PAIRS,
)
from lowreskit import records
from lowreskit.autocomplete import PredictionTask, generate_tasks
from lowreskit.backends import Suggestion, SuggestionList
from lowreskit.ensemble import (
    STRATEGY_AUTOMETSL,
    STRATEGY_MAJORITY,
    STRATEGY_UPPER_BOUND,
    EnsembleWeights,
    correctness_rows,
    evaluate_strategy,
    score_4cc,
    score_autometsl,
    select_best,
    upper_bound,
)
from lowreskit.med_corpus import (
    AlignedPair,
    MedicalDictionary,
    extract_corpus,
    is_medical_pair,
    split_corpus,
)
from lowreskit.metrics import accuracy_at_n, char_overlap_f1, token_f1_em
from lowreskit.qa_augment import (
    AnswerSpan,
    DegenerateShiftError,
    QAExample,
    shift_span,
)
from lowreskit.retrieval import RetrievalResult, SpanScore, dra_at, keep_top_k, score_documents

SRC_DIR = str(Path(__file__).resolve().parent.parent / "src")
BACKENDS = ("roberta", "bert", "xlnet", "gpt2")


def report(name: str, started: float) -> float:
    elapsed = time.perf_counter() - started
    print(f"\nACCEPTANCE {name}: PASS ({elapsed:.2f}s)")
    return elapsed


def test_span_shift_fidelity():
    started = time.perf_counter()

    doc = "Libraries missing, install gtk2 libraries (32 and 64 bit)"
    example = QAExample("worked", "t", "b", (("d", doc),), AnswerSpan("d", 19, 41))
    assert shift_span(example, -19).span_text == "Libraries missing, install gtk2 libraries"
    assert shift_span(example, 16).span_text == "install gtk2 libraries (32 and 64 bit)"

    rng = random.Random(20260808)
    words = ["alpha", "beta", "gamma", "delta", "x", "installation", "libs"]
    violations = 0
    for trial in range(10_000):
        doc = " ".join(rng.choices(words, k=rng.randint(2, 40)))
        start = rng.randrange(0, len(doc) - 1)
        end = rng.randrange(start + 1, len(doc) + 1)
        ex = QAExample(f"f{trial}", "t", "b", (("d", doc),), AnswerSpan("d", start, end))
        d = rng.choice([-101, -32, -16, -5, -1, 1, 5, 16, 32, 101])
        try:
            shifted = shift_span(ex, d, snap_to_whitespace=rng.random() < 0.5)
        except DegenerateShiftError:
            continue
        s, e = shifted.new_span
        if not (0 <= s < e <= len(doc)):
            violations += 1
        elif shifted.span_text != doc[s:e] or not shifted.span_text:
            violations += 1
        elif ex.answer_text() not in shifted.span_text:
            violations += 1
    assert violations == 0

    assert report("span-shift fidelity", started) < 10.0


def test_retrieval_oracle_equivalence():
    started = time.perf_counter()
    rng = random.Random(314)

    def oracle(span_scores):
        best, order = {}, []
        for span in span_scores:
            if span.doc_id not in best:
                order.append(span.doc_id)
                best[span.doc_id] = span.score
            elif span.score > best[span.doc_id]:
                best[span.doc_id] = span.score
        return sorted(((d, best[d]) for d in order), key=lambda item: -item[1])

    results, gold = [], {}
    for q in range(1_000):
        spans = [
            SpanScore(f"doc{rng.randrange(50)}", (0, 8), round(rng.random(), 2))
            for _ in range(rng.randint(1, 100))
        ]
        expected = oracle(spans)
        ranked = score_documents(spans)
        assert ranked == expected
        k = rng.randint(1, 12)
        kept = keep_top_k(ranked, k, question_id=f"q{q}")
        assert kept.ranked_docs == tuple(expected[:k])
        results.append(kept)
        gold[f"q{q}"] = rng.choice(spans).doc_id

    values = [dra_at(results, gold, n) for n in range(1, 13)]
    assert values == sorted(values)

    assert report("retrieval oracle equivalence", started) < 5.0


def test_ensemble_arithmetic():
    started = time.perf_counter()
    weights = EnsembleWeights()

    assert score_4cc(0.8, "roberta", "roberta", weights) == 0.9
    assert score_4cc(0.8, "roberta", "bert", weights) == 0.4
    assert score_autometsl(0.6, "xlnet", {"xlnet"}, weights) == 0.425
    assert score_autometsl(0.6, "xlnet", set(), weights) == 0.3

    rng = random.Random(2718)
    for _ in range(10_000):
        records_ = []
        for backend in BACKENDS:
            word = f"w{rng.randrange(5)}"
            records_.append(
                SuggestionList(backend, (Suggestion(word, round(rng.random(), 4)),))
            )
        selector = rng.choice(BACKENDS + (None,))
        label_set = frozenset(b for b in BACKENDS if rng.random() < 0.5)
        if rng.random() < 0.5:
            scorer = lambda w, p, b: score_4cc(p, b, selector, weights)
        else:
            scorer = lambda w, p, b: score_autometsl(p, b, label_set, weights)
        best_pair, best_score = None, float("-inf")
        for record in records_:
            top = record.suggestions[0]
            s = scorer(top.word, top.probability, record.model_id)
            if s > best_score:
                best_score, best_pair = s, (top.word, record.model_id)
        assert select_best(records_, scorer) == best_pair

    violations = 0
    for _ in range(150):
        tasks, suggestions = _random_log(rng, 60)
        bound = upper_bound(
            [bits for _, bits in correctness_rows(tasks, suggestions, BACKENDS)]
        )
        rows = correctness_rows(tasks, suggestions, BACKENDS)
        for i in range(len(BACKENDS)):
            if bound < sum(bits[i] for _, bits in rows) / len(rows):
                violations += 1
        for strategy in (STRATEGY_MAJORITY, "4cc", STRATEGY_AUTOMETSL):
            acc = evaluate_strategy(
                tasks, suggestions, strategy, backend_order=BACKENDS, seed=7
            ).accuracy
            if bound < acc:
                violations += 1
    assert violations == 0

    assert report("ensemble arithmetic", started) < 10.0


def _random_log(rng, n_tasks, spread=1.0, low=0.0, hit_rate=0.45):
    tasks, suggestions = [], {}
    for i in range(n_tasks):
        gold = f"g{rng.randrange(4)}"
        position = rng.randint(1, 8)
        task = PredictionTask(
            task_id=f"t{i}",
            difficult_tokens=tuple(["w"] * rng.randint(2, 25)),
            typed_prefix=tuple(["p"] * position),
            gold_next=gold,
            position_index=position,
        )
        tasks.append(task)
        lists = []
        for backend in BACKENDS:
            word = gold if rng.random() < hit_rate else f"g{rng.randrange(4)}"
            prob = round(low + rng.random() * spread, 6)
            lists.append(SuggestionList(backend, (Suggestion(word, prob),)))
        suggestions[task.task_id] = lists
    return tasks, suggestions


def test_oracle_selector_dominance():
    started = time.perf_counter()
    rng = random.Random(555)
    for _ in range(100):
        # Confidences inside a 0.12-wide window keep the membership bonus
        # decisive, so the selector-backed combination can never fall below
        # the best single backend.
        tasks, suggestions = _random_log(rng, 1_000, spread=0.12, low=0.4)
        result = evaluate_strategy(
            tasks,
            suggestions,
            STRATEGY_AUTOMETSL,
            backend_order=BACKENDS,
            selector="oracle",
        )
        rows = correctness_rows(tasks, suggestions, BACKENDS)
        best_individual = max(
            sum(bits[i] for _, bits in rows) / len(rows) for i in range(len(BACKENDS))
        )
        assert result.accuracy >= best_individual
    report("oracle-selector dominance", started)


def test_task_generation_verbatim():
    started = time.perf_counter()
    pair = AlignedPair(
        article_title="Insulin",
        difficult_text=(
            "Lowered glucose levels result both in the reduced release of insulin "
            "from the beta cells and in the reverse conversion of glycogen to "
            "glucose when glucose levels fall ."
        ),
        simple_text="This insulin tells the cells to take up glucose from the blood .",
    )
    tasks = generate_tasks(pair)
    assert len(tasks) == 12
    simple_tokens = pair.simple_text.split()
    for i, task in enumerate(tasks, start=1):
        assert task.typed_prefix == tuple(simple_tokens[:i])
        assert task.gold_next == simple_tokens[i]
        assert task.position_index == i
    report("task generation", started)


def test_metric_oracles():
    started = time.perf_counter()

    assert char_overlap_f1((10, 20), (15, 25))[2] == 0.5
    assert char_overlap_f1((3, 9), (3, 9))[2] == 1.0
    assert char_overlap_f1((0, 5), (10, 20))[2] == 0.0
    assert token_f1_em("a b c", "b c d")[0] == pytest.approx(2 / 3)

    rng = random.Random(161)
    for _ in range(50):
        n = rng.randint(1, 80)
        ranked = [rng.sample([f"w{j}" for j in range(9)], k=6) for _ in range(n)]
        golds = [f"w{rng.randrange(9)}" for _ in range(n)]
        for cutoff in range(1, 9):
            brute = sum(1 for r, g in zip(ranked, golds) if g in r[:cutoff]) / n
            assert accuracy_at_n(ranked, golds, cutoff) == brute

    for size in (3, 20, 100, 101, 144):
        pairs = [AlignedPair(f"t{i}", f"d{i}", f"s{i}") for i in range(size)]
        train, dev, test = split_corpus(pairs, seed=9)
        assert len(dev) == int(size * 0.15)
        assert len(test) == int(size * 0.15)
        assert len(train) == size - len(dev) - len(test)
        combined = sorted(p.article_title for p in train + dev + test)
        assert combined == sorted(p.article_title for p in pairs)
    report("metric oracles", started)


def test_corpus_filter():
    started = time.perf_counter()
    dictionary = MedicalDictionary(MEDICAL_TERMS)

    mixed = MEDICAL_FIXTURE_PAIRS + NON_MEDICAL_FIXTURE_PAIRS
    extracted = extract_corpus(mixed, dictionary)
    assert sorted(p.article_title for p in extracted) == sorted(
        p.article_title for p in MEDICAL_FIXTURE_PAIRS
    )
    assert len(extracted) == 7

    rng = random.Random(44)
    vocab = list(MEDICAL_TERMS) + ["walking", "museum", "sugar", "cells", "airway"]
    growth_terms = ["blood sugar", "airway disease", "cartilage", "zz top term"]
    grown = MedicalDictionary(
        {**MEDICAL_TERMS, **{t: "Disease or Syndrome" for t in growth_terms}}
    )
    flips = 0
    for _ in range(1_000):
        pair = AlignedPair(
            article_title=" ".join(rng.choices(vocab, k=rng.randint(1, 3))),
            difficult_text=" ".join(rng.choices(vocab, k=rng.randint(2, 10))),
            simple_text="s",
        )
        if is_medical_pair(pair, dictionary) and not is_medical_pair(pair, grown):
            flips += 1
    assert flips == 0
    report("corpus filter", started)


def test_gate_dominance():
    started = time.perf_counter()
    rng = random.Random(808)
    for _ in range(100):
        original_correct = [rng.random() < rng.uniform(0.2, 0.9) for _ in range(100)]
        simplified_correct = [rng.random() < rng.uniform(0.2, 0.9) for _ in range(100)]
        gated = sum(
            sc if (sc and not oc) else oc
            for oc, sc in zip(original_correct, simplified_correct)
        )
        assert gated >= sum(original_correct)
        assert gated >= sum(simplified_correct)
    report("gate dominance", started)


def test_end_to_end_pipeline(tmp_path):
    started = time.perf_counter()
    env = dict(os.environ)
    env["PYTHONPATH"] = SRC_DIR + os.pathsep + env.get("PYTHONPATH", "")

    pairs_file = tmp_path / "pairs.jsonl"
    records.write_jsonl(pairs_file, (p.to_record() for p in TRAINING_PAIRS))
    tasks_file = tmp_path / "tasks.jsonl"
    log_file = tmp_path / "log.jsonl"
    report_file = tmp_path / "report.jsonl"

    def run(*argv):
        proc = subprocess.run(
            [sys.executable, "-m", "lowreskit.cli", *argv],
            env=env,
            capture_output=True,
            text=True,
            timeout=60,
        )
        assert proc.returncode == 0, proc.stderr
        return proc.stdout

    run("gen-tasks", "--in", str(pairs_file), "--out", str(tasks_file))
    run(
        "predict", "--tasks", str(tasks_file), "--train", str(pairs_file),
        "--backend-id", "reference", "--top-n", "5", "--out", str(log_file),
    )
    run(
        "ensemble-eval", "--strategy", "autometsl", "--tasks", str(tasks_file),
        "--log", str(log_file), "--seed", "1", "--out", str(report_file),
    )
    out = run(
        "eval", "--tasks", str(tasks_file), "--log", str(log_file),
        "--at", "1,5", "--breakdown", "difficult_length", "--out", str(report_file),
    )
    assert "accuracy" in out

    rows = list(records.read_jsonl(report_file))
    assert rows and all("metric" in row and "value" in row for row in rows)
    parsed = json.dumps(rows[0])  # the report is machine-readable
    assert "accuracy" in parsed

    assert report("end-to-end pipeline", started) < 60.0
