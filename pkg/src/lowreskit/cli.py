"""Command-line entry points for every pipeline.

Each subcommand is a thin shell over module operations: parse arguments,
read newline-delimited records, call the module, write records. Exit codes
are 0 on success, 1 on a validation problem (bad arguments, malformed or
missing inputs), and 2 on a runtime failure.
"""

from __future__ import annotations

import argparse
import random
import sys
from collections import defaultdict
from pathlib import Path

from . import (
    autocomplete,
    config as config_mod,
    ensemble,
    med_corpus,
    metrics,
    qa_augment,
    records,
    retrieval,
    service as service_mod,
    simp_gate,
    ts_augment,
)
from .session import SessionStore


def _common_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed", type=int, default=None, help="override the base RNG seed")
    parser.add_argument("--config", default=None, help="config file path (or set LOWRESKIT_CONFIG)")


def _resolve_seed(args) -> int:
    if args.seed is not None:
        return args.seed
    return int(config_mod.load_config(args.config)["seed"])


# ---------------------------------------------------------------------------
# answer-span augmentation


def _cmd_augment_qa(args) -> int:
    examples = qa_augment.load_examples(args.infile)
    policy = qa_augment.AugmentPolicy(
        threshold=args.threshold,
        spans_per_example=args.spans_per_example,
        shift_magnitudes=tuple(int(d) for d in args.shifts.split(",")),
        rng_seed=_resolve_seed(args),
        snap_to_whitespace=not args.no_snap,
    )
    dataset = qa_augment.augment_dataset(examples, policy)
    written = records.write_jsonl(args.outfile, qa_augment.dump_dataset(dataset))
    augmented = sum(
        1 for item in dataset if isinstance(item, qa_augment.AugmentedExample)
    )
    print(f"wrote {written} records ({len(examples)} original, {augmented} augmented)")
    return 0


# ---------------------------------------------------------------------------
# document reranking


def _cmd_rerank(args) -> int:
    spans_by_question: dict[str, list[retrieval.SpanScore]] = defaultdict(list)
    order: list[str] = []
    for row in records.read_jsonl(args.infile):
        qid = str(row["question_id"])
        if qid not in spans_by_question:
            order.append(qid)
        spans_by_question[qid].append(
            retrieval.SpanScore(
                doc_id=str(row["doc_id"]),
                span=(int(row["start_char"]), int(row["end_char"])),
                score=float(row["score"]),
            )
        )
    out_rows = []
    for qid in order:
        ranked = retrieval.score_documents(spans_by_question[qid])
        result = retrieval.keep_top_k(ranked, args.k, question_id=qid)
        out_rows.append(
            {
                "question_id": result.question_id,
                "ranked_docs": [[d, s] for d, s in result.ranked_docs],
                "kept_k": result.kept_k,
            }
        )
    written = records.write_jsonl(args.outfile, out_rows)
    print(f"reranked {written} questions (k={args.k})")
    return 0


def _cmd_eval_dra(args) -> int:
    results = [
        retrieval.RetrievalResult(
            question_id=str(row["question_id"]),
            ranked_docs=tuple((d, float(s)) for d, s in row["ranked_docs"]),
            kept_k=int(row.get("kept_k", len(row["ranked_docs"]))),
        )
        for row in records.read_jsonl(args.infile)
    ]
    gold = {
        str(row["question_id"]): str(row["doc_id"])
        for row in records.read_jsonl(args.gold)
    }
    reports = []
    for n in (int(x) for x in args.at.split(",")):
        value = retrieval.dra_at(results, gold, n)
        reports.append(metrics.MetricReport(f"dra@{n}", value, count=len(results)))
        print(f"DRA@{n} = {value:.4f}")
    if args.outfile:
        metrics.write_reports(args.outfile, reports)
    return 0


# ---------------------------------------------------------------------------
# simplification-based augmentation and the quality gate


def _cmd_augment_ts(args) -> int:
    originals = ts_augment.load_examples(args.infile)
    simplifier = ts_augment.SIMPLIFIERS.get(args.simplifier)
    if simplifier is None:
        raise ValueError(
            f"unknown simplifier {args.simplifier!r}; choose from "
            f"{sorted(ts_augment.SIMPLIFIERS)}"
        )
    seed = _resolve_seed(args)
    simplified = ts_augment.sample_and_simplify(originals, simplifier, args.p, seed)
    strategy = ts_augment.CompositionStrategy(
        kind=args.strategy, sample_fraction=args.p, rng_seed=seed
    )
    composed = ts_augment.compose_training_set(originals, simplified, strategy)
    written = records.write_jsonl(args.outfile, ts_augment.dump_examples(composed))
    print(
        f"wrote {written} records ({len(originals)} original, "
        f"{len(simplified)} simplified, strategy={args.strategy})"
    )
    return 0


def _cmd_gate_train_data(args) -> int:
    pairs = [simp_gate.GatePair.from_record(row) for row in records.read_jsonl(args.infile)]
    labeled = simp_gate.build_gate_dataset(pairs)
    train = simp_gate.training_split(labeled)
    written = records.write_jsonl(args.outfile, (ex.to_record() for ex in train))
    excluded = len(labeled) - len(train)
    print(f"wrote {written} gate examples ({excluded} excluded pairs dropped)")
    return 0


def _cmd_gate_apply(args) -> int:
    if args.classifier == "lookup":
        if not args.lookup:
            raise ValueError("--lookup PATH is required with --classifier lookup")
        labels = {
            str(row["example_id"]): str(row["gate_label"])
            for row in records.read_jsonl(args.lookup)
        }

    out_rows = []
    for row in records.read_jsonl(args.infile):
        original = row["original_text"]
        simplified = row["simplified_text"]
        example_id = str(row.get("example_id", ""))
        if args.classifier == "good":
            classifier = lambda o, s: simp_gate.GATE_GOOD
        elif args.classifier == "bad":
            classifier = lambda o, s: simp_gate.GATE_BAD
        else:
            classifier = lambda o, s, _id=example_id: labels[_id]
        chosen = simp_gate.gate_select(original, simplified, classifier)
        out_rows.append(
            {
                "example_id": example_id,
                "chosen_text": chosen,
                "used_simplified": chosen == simplified and chosen != original,
            }
        )
    written = records.write_jsonl(args.outfile, out_rows)
    print(f"gated {written} records")
    return 0


# ---------------------------------------------------------------------------
# medical corpus


def _cmd_build_med_corpus(args) -> int:
    dictionary = med_corpus.MedicalDictionary.from_file(
        args.dict, similarity_threshold=args.threshold
    )
    pairs = list(records.read_jsonl(args.infile))
    medical = med_corpus.extract_corpus(
        pairs,
        dictionary,
        min_sentence_terms=args.min_terms,
        min_title_terms=args.min_title_terms,
    )
    written = records.write_jsonl(args.outfile, (p.to_record() for p in medical))
    print(f"kept {written} medical pairs of {len(pairs)} (threshold={args.threshold})")
    if args.split_prefix:
        train, dev, test = med_corpus.split_corpus(medical, _resolve_seed(args))
        for name, split in (("train", train), ("dev", dev), ("test", test)):
            path = f"{args.split_prefix}.{name}.jsonl"
            records.write_jsonl(path, (p.to_record() for p in split))
            print(f"  {name}: {len(split)} pairs -> {path}")
    return 0


# ---------------------------------------------------------------------------
# autocomplete task pipeline


def _cmd_gen_tasks(args) -> int:
    autocomplete.ContextMode(mode=args.context_mode)  # validate the name
    pairs = med_corpus.load_pairs(args.infile)
    out_rows = []
    for index, pair in enumerate(pairs):
        tasks = autocomplete.generate_tasks(pair, task_id_base=f"pair{index:04d}")
        out_rows.extend(task.to_record() for task in tasks)
    written = records.write_jsonl(args.outfile, out_rows)
    print(f"generated {written} tasks from {len(pairs)} pairs (mode={args.context_mode})")
    return 0


def _load_tasks(path) -> list[autocomplete.PredictionTask]:
    return [autocomplete.PredictionTask.from_record(row) for row in records.read_jsonl(path)]


def _cmd_predict(args) -> int:
    from .backends import ReferenceBackend

    tasks = _load_tasks(args.tasks)
    mode = autocomplete.ContextMode(mode=args.context_mode)
    backend = ReferenceBackend(
        backend_id=args.backend_id, interpolation=args.interpolation
    )
    train_pairs = med_corpus.load_pairs(args.train)
    backend = backend.train(autocomplete.training_sequences(train_pairs, mode))

    out_rows = []
    for task in tasks:
        model_input = autocomplete.build_model_input(task, mode)
        suggestions = backend.predict_next(model_input, args.top_n)
        out_rows.extend(ensemble.suggestions_to_log_records(task.task_id, [suggestions]))
    mode_flag = "a" if args.append else "w"
    with open(args.outfile, mode_flag, encoding="utf-8") as handle:
        for row in out_rows:
            handle.write(records.dumps_canonical(row))
            handle.write("\n")
    print(
        f"predicted {len(tasks)} tasks with {args.backend_id} "
        f"(top_n={args.top_n}, mode={args.context_mode})"
    )
    return 0


def _cmd_ensemble_eval(args) -> int:
    cfg = config_mod.load_config(args.config)
    weights = config_mod.ensemble_weights(cfg)
    tasks = _load_tasks(args.tasks)
    suggestions = ensemble.log_records_to_suggestions(records.read_jsonl(args.log))
    result = ensemble.evaluate_strategy(
        tasks,
        suggestions,
        args.strategy,
        weights=weights,
        seed=_resolve_seed(args),
        selector=args.selector,
    )
    report = metrics.MetricReport(
        metric=f"accuracy[{args.strategy}]", value=result.accuracy, count=result.total
    )
    print(metrics.render_report_table([report]))
    if result.backend_usage:
        total_used = sum(result.backend_usage.values())
        for backend_id, used in result.backend_usage.most_common():
            print(f"  {backend_id}: used for {used}/{total_used} tasks")
    if args.outfile:
        metrics.write_reports(args.outfile, [report])
    return 0


def _cmd_eval(args) -> int:
    tasks = _load_tasks(args.tasks)
    suggestions = ensemble.log_records_to_suggestions(records.read_jsonl(args.log))
    backend_ids = sorted(
        {rec.model_id for lists in suggestions.values() for rec in lists}
    )
    backend_id = args.backend
    if backend_id is None:
        if len(backend_ids) != 1:
            raise ValueError(
                f"log contains {len(backend_ids)} backends ({', '.join(backend_ids)}); "
                "pick one with --backend"
            )
        backend_id = backend_ids[0]

    ranked: list[list[str]] = []
    golds: list[str] = []
    for task in tasks:
        lists = [r for r in suggestions.get(task.task_id, []) if r.model_id == backend_id]
        ranked.append(lists[0].words() if lists else [])
        golds.append(task.gold_next)

    top1 = [words[0] if words else "" for words in ranked]
    reports = [
        metrics.MetricReport(
            metric=f"accuracy[{backend_id}]",
            value=metrics.accuracy(top1, golds),
            count=len(golds),
        )
    ]
    for n in (int(x) for x in args.at.split(",") if x):
        reports.append(
            metrics.MetricReport(
                metric=f"accuracy@{n}[{backend_id}]",
                value=metrics.accuracy_at_n(ranked, golds, n),
                count=len(golds),
            )
        )
    if args.breakdown:
        values = [1.0 if p == g else 0.0 for p, g in zip(top1, golds)]
        reports.extend(metrics.breakdown(tasks, values, args.breakdown))
    print(metrics.render_report_table(reports))
    if args.outfile:
        metrics.write_reports(args.outfile, reports)
    return 0


# ---------------------------------------------------------------------------
# service


def _cmd_serve(args) -> int:
    cfg = config_mod.load_config(args.config)
    registry = config_mod.build_registry(cfg)
    store = SessionStore(args.session_dir)
    svc = service_mod.SuggestionService(
        registry,
        config_mod.ensemble_weights(cfg),
        store,
        default_n=int(cfg["suggest.default_n"]),
        seed=_resolve_seed(args),
    )
    server = service_mod.make_server(svc, host=args.host, port=args.port)
    host, port = server.server_address[:2]
    print(f"serving on http://{host}:{port}", flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
    return 0


# ---------------------------------------------------------------------------
# parser assembly


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lowreskit",
        description="Pipelines for span-shift QA augmentation, simplification-based "
        "augmentation with a quality gate, medical corpus extraction, and "
        "autocomplete next-word simplification with ensembles.",
    )
    sub = parser.add_subparsers(dest="command", metavar="SUBCOMMAND")

    p = sub.add_parser("augment-qa", help="widen answer spans into new training examples")
    p.add_argument("--threshold", type=float, required=True, help="fraction of examples to augment")
    p.add_argument("--spans-per-example", type=int, default=len(qa_augment.DEFAULT_SHIFTS))
    p.add_argument("--shifts", default=",".join(str(d) for d in qa_augment.DEFAULT_SHIFTS))
    p.add_argument("--no-snap", action="store_true", help="disable whitespace snapping")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", dest="outfile", required=True)
    p.set_defaults(func=_cmd_augment_qa)

    p = sub.add_parser("rerank", help="rank documents by their best answer-span score")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", dest="outfile", required=True)
    p.set_defaults(func=_cmd_rerank)

    p = sub.add_parser("eval-dra", help="document retrieval accuracy at cutoffs")
    p.add_argument("--at", default="1,5")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--gold", required=True)
    p.add_argument("--out", dest="outfile", default=None)
    p.set_defaults(func=_cmd_eval_dra)

    p = sub.add_parser("augment-ts", help="augment a training set through simplification")
    p.add_argument("--p", type=float, required=True, help="sampling fraction")
    p.add_argument("--strategy", choices=ts_augment.STRATEGIES, required=True)
    p.add_argument("--simplifier", default="rule_lite")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", dest="outfile", required=True)
    p.set_defaults(func=_cmd_augment_ts)

    p = sub.add_parser("gate-train-data", help="label gate training pairs from downstream feedback")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", dest="outfile", required=True)
    p.set_defaults(func=_cmd_gate_train_data)

    p = sub.add_parser("gate-apply", help="choose original vs simplified per record")
    p.add_argument("--classifier", choices=("good", "bad", "lookup"), default="lookup")
    p.add_argument("--lookup", default=None, help="JSONL of example_id -> gate_label")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", dest="outfile", required=True)
    p.set_defaults(func=_cmd_gate_apply)

    p = sub.add_parser("build-med-corpus", help="filter a general corpus to medical pairs")
    p.add_argument("--dict", required=True, help="term<TAB>semantic-type dictionary file")
    p.add_argument("--threshold", type=float, default=med_corpus.DEFAULT_SIMILARITY_THRESHOLD)
    p.add_argument("--min-terms", type=int, default=med_corpus.DEFAULT_MIN_SENTENCE_TERMS)
    p.add_argument("--min-title-terms", type=int, default=med_corpus.DEFAULT_MIN_TITLE_TERMS)
    p.add_argument("--split-prefix", default=None, help="also write PREFIX.{train,dev,test}.jsonl")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", dest="outfile", required=True)
    p.set_defaults(func=_cmd_build_med_corpus)

    p = sub.add_parser("gen-tasks", help="expand aligned pairs into next-word tasks")
    p.add_argument("--context-mode", default=autocomplete.MODE_CONTEXT_AWARE)
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", dest="outfile", required=True)
    p.set_defaults(func=_cmd_gen_tasks)

    p = sub.add_parser("predict", help="run a next-word backend over a task file")
    p.add_argument("--tasks", required=True)
    p.add_argument("--train", required=True, help="aligned pairs to fit the backend on")
    p.add_argument("--backend-id", default="reference")
    p.add_argument("--context-mode", default=autocomplete.MODE_CONTEXT_AWARE)
    p.add_argument("--interpolation", type=float, default=0.75)
    p.add_argument("--top-n", type=int, default=5)
    p.add_argument("--append", action="store_true", help="append to an existing log")
    p.add_argument("--out", dest="outfile", required=True)
    p.set_defaults(func=_cmd_predict)

    p = sub.add_parser("ensemble-eval", help="replay a prediction log under a strategy")
    p.add_argument("--strategy", choices=ensemble.ENSEMBLE_STRATEGIES, required=True)
    p.add_argument("--selector", choices=("oracle", "none"), default="oracle")
    p.add_argument("--tasks", required=True)
    p.add_argument("--log", required=True)
    p.add_argument("--out", dest="outfile", default=None)
    p.set_defaults(func=_cmd_ensemble_eval)

    p = sub.add_parser("eval", help="accuracy and breakdowns for one backend's log")
    p.add_argument("--tasks", required=True)
    p.add_argument("--log", required=True)
    p.add_argument("--backend", default=None)
    p.add_argument("--at", default="5")
    p.add_argument(
        "--breakdown",
        choices=(metrics.AXIS_DIFFICULT_LENGTH, metrics.AXIS_PREFIX_LENGTH),
        default=None,
    )
    p.add_argument("--out", dest="outfile", default=None)
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("serve", help="run the suggestion/session HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8760)
    p.add_argument("--session-dir", default=None)
    p.set_defaults(func=_cmd_serve)

    for sub_parser in sub.choices.values():
        _common_arguments(sub_parser)
    return parser


def cli_dispatch(argv) -> int:
    parser = build_parser()
    if not argv:
        parser.print_usage(sys.stderr)
        return 1
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 1
    if not hasattr(args, "func"):
        parser.print_usage(sys.stderr)
        return 1
    try:
        return args.func(args)
    except (ValueError, KeyError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except BrokenPipeError:
        return 0
    except Exception as exc:  # noqa: BLE001 - boundary between CLI and modules
        print(f"runtime error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(cli_dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
