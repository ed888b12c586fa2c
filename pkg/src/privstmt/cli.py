"""Command-line entry point.

Subcommands: extract | analyze | split | prompts | train-baseline | predict
| evaluate | serve. Every subcommand is deterministic given its inputs and
seed; the only non-deterministic output field is the created_at timestamp in
the report metadata header. Exit codes: 0 success, 1 validation error, 2 I/O
error, 3 adapter error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from datetime import datetime, timezone
from pathlib import Path

from . import __version__, corpus, metrics, predictor, promptgen
from .javastmt import EmptySource, UnbalancedSource, extract as extract_method, write_statements_jsonl

DEFAULT_SEED = 13

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_IO = 2
EXIT_ADAPTER = 3


def _sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fp:
        for chunk in iter(lambda: fp.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def _meta(args: argparse.Namespace, inputs: list[str]) -> dict:
    config = {
        k: v
        for k, v in sorted(vars(args).items())
        if k not in ("func", "config") and not callable(v)
    }
    return {
        "tool": "privstmt",
        "version": __version__,
        "created_at": datetime.now(timezone.utc).isoformat(),
        "config": config,
        "inputs": {p: _sha256(p) for p in inputs if p and Path(p).exists()},
    }


def _write_json(path, payload: dict) -> None:
    Path(path).write_text(json.dumps(payload, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")


def _extract_all(samples):
    methods = {}
    for s in samples:
        methods[s.id] = extract_method(s.id, s.code)
    return methods


# -------------------- subcommands --------------------


def cmd_extract(args) -> int:
    samples = corpus.load_samples(args.samples)
    methods = _extract_all(samples)
    with open(args.out, "w", encoding="utf-8") as fp:
        n = write_statements_jsonl((methods[s.id] for s in samples), fp)
    print(f"extract: {len(samples)} methods -> {n} statements -> {args.out}")
    return EXIT_OK


def cmd_analyze(args) -> int:
    samples = corpus.load_samples(args.samples)
    methods = _extract_all(samples)
    sample_map = {s.id: s for s in samples}
    annotations = None
    if args.source == "ratings":
        if not args.annotations:
            print("analyze: --annotations is required with --source ratings", file=sys.stderr)
            return EXIT_VALIDATION
        counts = {sid: len(mc.statements) for sid, mc in methods.items()}
        annotations = corpus.load_annotations(args.annotations, statement_counts=counts)
    dist = metrics.distribution(
        methods,
        annotations=annotations,
        grouping=args.group,
        funccall_on=not args.no_funccall,
        samples=sample_map,
    )
    payload = {"meta": _meta(args, [args.samples, args.annotations])}
    payload.update(metrics.distribution_to_obj(dist))
    _write_json(args.out, payload)
    for group in sorted(dist.cells):
        top = max(dist.cells[group].items(), key=lambda kv: kv[1])
        print(f"analyze[{group}]: {sum(dist.counts[group].values())} statements, top {top[0]} {100 * top[1]:.1f}%")
    if dist.skipped_groups:
        print(f"analyze: empty groups omitted: {', '.join(dist.skipped_groups)}")
    print(f"analyze: wrote {args.out}")
    return EXIT_OK


def cmd_split(args) -> int:
    samples = corpus.load_samples(args.samples)
    annotations = corpus.load_annotations(args.annotations)
    split = corpus.make_split(samples, annotations, val_count=args.val_count, seed=args.seed)
    corpus.save_split(split, args.out)
    print(
        f"split: train {len(split.train_ids)} / val {len(split.val_ids)} / "
        f"test {len(split.test_ids)} (seed {split.seed}) -> {args.out}"
    )
    return EXIT_OK


def cmd_prompts(args) -> int:
    samples = corpus.load_samples(args.samples)
    methods = _extract_all(samples)
    counts = {sid: len(mc.statements) for sid, mc in methods.items()}
    annotations = corpus.load_annotations(args.annotations, statement_counts=counts)
    sample_map = {s.id: s for s in samples}
    keep = None
    if args.split:
        spec = corpus.load_split(args.split)
        keep = set(spec.train_ids) | set(spec.val_ids)
    records = []
    skipped = 0
    for a in annotations:
        if a.none_relevant or not a.selections:
            skipped += 1
            continue
        if keep is not None and a.sample_id not in keep:
            continue
        records.append(promptgen.render_training(sample_map[a.sample_id], a, methods[a.sample_id]))
    with open(args.out, "w", encoding="utf-8") as fp:
        promptgen.write_prompts_jsonl(records, fp)
    if args.text_out:
        with open(args.text_out, "w", encoding="utf-8") as fp:
            promptgen.write_prompts_text(records, fp)
    print(f"prompts: {len(records)} records ({skipped} none-relevant skipped) -> {args.out}")
    return EXIT_OK


def cmd_train_baseline(args) -> int:
    samples = corpus.load_samples(args.samples)
    methods = _extract_all(samples)
    counts = {sid: len(mc.statements) for sid, mc in methods.items()}
    annotations = corpus.load_annotations(args.annotations, statement_counts=counts)
    if args.split:
        spec = corpus.load_split(args.split)
        train_ids = set(spec.train_ids)
        annotations = [a for a in annotations if a.sample_id in train_ids]
    prior = predictor.train_baseline(
        annotations,
        methods,
        alpha=args.alpha,
        per_label=args.per_label,
        samples={s.id: s for s in samples},
        funccall_on=not args.no_funccall,
    )
    payload = {"meta": _meta(args, [args.samples, args.annotations, args.split])}
    payload.update(predictor.prior_to_obj(prior))
    _write_json(args.out, payload)
    print(f"train-baseline: alpha {prior.alpha}, per_label {prior.per_label} -> {args.out}")
    return EXIT_OK


def cmd_predict(args) -> int:
    samples = corpus.load_samples(args.samples)
    methods = _extract_all(samples)
    targets = samples
    if args.split:
        spec = corpus.load_split(args.split)
        test_ids = set(spec.test_ids)
        targets = [s for s in samples if s.id in test_ids]
    predictions = []
    if args.adapter:
        config = predictor.AdapterConfig(
            command=args.adapter, timeout=args.timeout, max_parallel=args.max_parallel
        )
        prompts = [(f"r{i}", promptgen.render_inference(s)) for i, s in enumerate(targets)]
        completions = predictor.adapter_predict(prompts, config)
        budget = promptgen.TokenBudget(max_tokens=args.max_tokens, counter=args.token_scheme)
        for s, completion in zip(targets, completions):
            texts = promptgen.parse_completion(completion, budget)
            indices = [predictor.match_statement(t, methods[s.id]) for t in texts]
            predictions.append(
                predictor.Prediction(sample_id=s.id, texts=tuple(texts), indices=tuple(indices))
            )
    else:
        if not args.prior:
            print("predict: either --prior or --adapter is required", file=sys.stderr)
            return EXIT_VALIDATION
        prior = predictor.load_prior(args.prior)
        for s in targets:
            indices = predictor.predict_baseline(methods[s.id], s.label.value, prior, k=args.k)
            texts = [methods[s.id].statements[i].text for i in indices]
            predictions.append(
                predictor.Prediction(sample_id=s.id, texts=tuple(texts), indices=tuple(indices))
            )
    with open(args.out, "w", encoding="utf-8") as fp:
        predictor.predictions_to_jsonl(predictions, fp)
    print(f"predict: {len(predictions)} predictions -> {args.out}")
    return EXIT_OK


def cmd_evaluate(args) -> int:
    samples = corpus.load_samples(args.samples)
    methods = _extract_all(samples)
    counts = {sid: len(mc.statements) for sid, mc in methods.items()}
    annotations = corpus.load_annotations(args.annotations, statement_counts=counts)
    sample_ids = None
    if args.split:
        spec = corpus.load_split(args.split)
        sample_ids = list(spec.test_ids)
    if args.human:
        if sample_ids is not None:
            annotations = [a for a in annotations if a.sample_id in set(sample_ids)]
        report = metrics.human_vs_human(annotations, sample_ids=sample_ids)
    else:
        if not args.predictions:
            print("evaluate: --predictions is required unless --human", file=sys.stderr)
            return EXIT_VALIDATION
        preds = predictor.load_predictions(args.predictions)
        if sample_ids is not None:
            keep = set(sample_ids)
            preds = [p for p in preds if p.sample_id in keep]
        pred_map = {p.sample_id: list(p.indices) for p in preds}
        report = metrics.evaluate(pred_map, annotations, pairing=args.pairing)
    payload = {"meta": _meta(args, [args.samples, args.annotations, args.predictions, args.split])}
    payload.update(metrics.report_to_obj(report))
    _write_json(args.out, payload)
    print(metrics.format_histogram_table(report))
    print(f"evaluate: wrote {args.out}")
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    samples = corpus.load_samples(args.samples)
    app = create_app(
        samples,
        args.annotations_out,
        ui_dir=args.ui_dir,
        seed=args.seed,
        session_minutes=args.session_minutes,
        double_fraction=args.double_fraction,
    )
    print(f"serve: {len(samples)} samples, annotations append to {args.annotations_out}")
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return EXIT_OK


# -------------------- parser plumbing --------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="privstmt",
        description="Statement-level privacy annotation toolkit",
    )
    parser.add_argument(
        "--config",
        help="JSON file of flag defaults; explicit flags take precedence",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract", help="segment + categorize a sample corpus")
    p.add_argument("--samples", required=True)
    p.add_argument("--out", default="statements.jsonl")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("analyze", help="category distribution report")
    p.add_argument("--samples", required=True)
    p.add_argument("--annotations")
    p.add_argument("--source", choices=["statements", "ratings"], default="statements")
    p.add_argument("--group", choices=["all", "by_order", "by_label"], default="all")
    p.add_argument("--no-funccall", action="store_true", help="disable func_call precedence")
    p.add_argument("--out", default="distribution.json")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("split", help="train/val/test split")
    p.add_argument("--samples", required=True)
    p.add_argument("--annotations", required=True)
    p.add_argument("--val-count", type=int, default=None)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--out", default="split.json")
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("prompts", help="render the training prompt corpus")
    p.add_argument("--samples", required=True)
    p.add_argument("--annotations", required=True)
    p.add_argument("--split", help="restrict to train+val ids from split.json")
    p.add_argument("--out", default="prompts.jsonl")
    p.add_argument("--text-out")
    p.set_defaults(func=cmd_prompts)

    p = sub.add_parser("train-baseline", help="fit the category-prior baseline")
    p.add_argument("--samples", required=True)
    p.add_argument("--annotations", required=True)
    p.add_argument("--split", help="restrict to train ids from split.json")
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--per-label", action="store_true")
    p.add_argument("--no-funccall", action="store_true")
    p.add_argument("--out", default="prior.json")
    p.set_defaults(func=cmd_train_baseline)

    p = sub.add_parser("predict", help="baseline or adapter predictions")
    p.add_argument("--samples", required=True)
    p.add_argument("--split", help="restrict to test ids from split.json")
    p.add_argument("--prior")
    p.add_argument("--adapter", help="adapter command line (newline-delimited JSON stdio)")
    p.add_argument("--timeout", type=float, default=30.0)
    p.add_argument("--max-parallel", type=int, default=4)
    p.add_argument("--max-tokens", type=int, default=256)
    p.add_argument("--token-scheme", default="whitespace")
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--out", default="predictions.jsonl")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("evaluate", help="overlap agreement report")
    p.add_argument("--samples", required=True)
    p.add_argument("--annotations", required=True)
    p.add_argument("--predictions")
    p.add_argument("--split", help="restrict to test ids from split.json")
    p.add_argument("--pairing", choices=["per_annotator", "max_over_annotators"], default="per_annotator")
    p.add_argument("--human", action="store_true", help="human-vs-human agreement instead of predictions")
    p.add_argument("--out", default="report.json")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("serve", help="run the annotation service")
    p.add_argument("--samples", required=True)
    p.add_argument("--annotations-out", default="annotations.jsonl")
    p.add_argument("--ui-dir", help="static directory for the web frontend")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--session-minutes", type=float, default=90.0)
    p.add_argument("--double-fraction", type=float, default=0.10)
    p.set_defaults(func=cmd_serve)

    return parser


def _apply_config_file(parser: argparse.ArgumentParser, argv: list[str]) -> list[str]:
    """Merge a JSON config file under explicit flags."""
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return argv
    with open(known.config, encoding="utf-8") as fp:
        config = json.load(fp)
    if not isinstance(config, dict):
        raise corpus.SchemaError("config file must hold a JSON object")
    for action in parser._subparsers._group_actions:
        for sub_parser in action.choices.values():
            defaults = {
                k.replace("-", "_"): v
                for k, v in config.items()
                if any(
                    opt.lstrip("-").replace("-", "_") == k.replace("-", "_")
                    for a in sub_parser._actions
                    for opt in a.option_strings
                )
            }
            sub_parser.set_defaults(**defaults)
    return argv


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        argv = _apply_config_file(parser, argv)
        args = parser.parse_args(argv)
        return args.func(args)
    except (corpus.CorpusError, UnbalancedSource, EmptySource, promptgen.EmptyAnnotation,
            promptgen.UnknownScheme, metrics.MissingReference, predictor.EmptyTrainingSet,
            ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except predictor.AdapterError as exc:
        print(f"adapter error: {exc}", file=sys.stderr)
        return EXIT_ADAPTER
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
