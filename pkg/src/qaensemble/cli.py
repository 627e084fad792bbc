"""Command-line pipeline over the file formats.

Subcommands: validate, evaluate, estimate-weights, tune-alpha, ensemble,
simulate, report. Every command is deterministic given identical input files
and --seed (the report's timing block is the one wall-clock field; pass
--no-timing to zero it for byte-reproducible reports).

Exit codes: 0 success / clean validation, 1 data or validation error,
2 usage error. Errors are emitted to stderr as one JSON object per line.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import replace
from pathlib import Path

from .core import (
    Dataset,
    Example,
    PredictionSet,
    RunManifest,
    validate_prediction,
)
from .decoder import DecodeConfig, decode_to_text
from .ensemble import EnsembleConfig, ensemble_predict, simple_ensemble_predict
from .errors import (
    DuplicateExampleId,
    ParseError,
    QAEnsembleError,
    SchemaViolation,
    UnknownExampleId,
)
from .formats import (
    RunReport,
    _parse_example,
    _parse_prediction,
    load_answers,
    load_dataset,
    load_grouped_predictions,
    load_sim_config,
    load_weights,
    save_answers,
    save_dataset,
    save_predictions,
    save_report,
    save_weights,
)
from .metrics import MetricKind, score_example
from .simulator import generate_corpus, generate_predictions
from .weighting import (
    AlphaGrid,
    CalibrationBundle,
    estimate_weights,
    sample_calibration,
    select_alpha,
)


def _emit_error(err: Exception, stream=None) -> None:
    record = {"error": type(err).__name__, "detail": str(err)}
    for attr in ("path", "line", "field", "example_id", "model_id"):
        value = getattr(err, attr, None)
        if value is not None:
            record[attr] = value
    print(json.dumps(record, ensure_ascii=False), file=stream or sys.stderr)


def _print(obj) -> None:
    print(json.dumps(obj, ensure_ascii=False))


def _load_gold(paths) -> tuple[list[Dataset], dict[str, Example]]:
    datasets = []
    names = set()
    examples_by_id: dict[str, Example] = {}
    for path in paths:
        ds = load_dataset(path)
        if ds.name in names:
            raise SchemaViolation("<file>", f"dataset name {ds.name!r} repeated", path=str(path))
        names.add(ds.name)
        datasets.append(ds)
        for ex in ds.examples:
            if ex.id in examples_by_id:
                raise DuplicateExampleId(
                    f"example id {ex.id!r} occurs in more than one dataset", path=str(path)
                )
            examples_by_id[ex.id] = ex
    return datasets, examples_by_id


def _ordered_sets(grouped: dict[str, PredictionSet]) -> list[PredictionSet]:
    return list(grouped.values())  # first-appearance order from the command line


def _both_scores(answers, dataset: Dataset) -> dict[str, float]:
    scores = {}
    for kind in (MetricKind.TOKEN_F1, MetricKind.EXACT_MATCH):
        total = 0.0
        for ex in sorted(dataset.examples, key=lambda e: e.id):
            total += score_example(answers[ex.id], ex.gold_answers, kind)
        scores[kind.value] = total / len(dataset)
    return scores


# -- validate -----------------------------------------------------------------


def _validate_lines(path, handle_record) -> tuple[int, int]:
    """Streaming per-line validation that keeps going after errors."""
    errors = 0
    records = 0
    try:
        with open(path, encoding="utf-8") as handle:
            for line_no, line in enumerate(handle, start=1):
                stripped = line.strip()
                if not stripped:
                    continue
                records += 1
                try:
                    obj = json.loads(stripped)
                    if not isinstance(obj, dict):
                        raise SchemaViolation(
                            "<record>", "expected a JSON object", path=str(path), line=line_no
                        )
                    handle_record(obj, line_no)
                except json.JSONDecodeError as err:
                    errors += 1
                    _emit_error(ParseError(f"invalid JSON: {err.msg}", path=str(path), line=line_no))
                except (QAEnsembleError, ValueError, TypeError) as err:
                    errors += 1
                    _emit_error(err)
    except OSError as err:
        errors += 1
        _emit_error(err)
    return records, errors


def _cmd_validate(args) -> int:
    errors = 0
    examples: dict[str, Example] = {}
    for path in args.dataset:
        seen: set[str] = set()

        def handle_example(obj, line_no, path=path, seen=seen):
            ex = _parse_example(obj, path=str(path), line=line_no)
            if ex.id in seen:
                raise DuplicateExampleId(
                    f"example id {ex.id!r} repeated", path=str(path), line=line_no
                )
            seen.add(ex.id)
            examples[ex.id] = ex

        records, errs = _validate_lines(path, handle_example)
        errors += errs
        print(f"dataset {path}: {records} records")
    for path in args.predictions:
        seen_pairs: set[tuple[str, str]] = set()

        def handle_prediction(obj, line_no, path=path, seen_pairs=seen_pairs):
            pred = _parse_prediction(obj, path=str(path), line=line_no)
            key = (pred.model_id, pred.example_id)
            if key in seen_pairs:
                raise DuplicateExampleId(
                    f"model {pred.model_id!r} predicts {pred.example_id!r} twice",
                    path=str(path),
                    line=line_no,
                )
            seen_pairs.add(key)
            if pred.example_id not in examples:
                raise UnknownExampleId(
                    f"example id {pred.example_id!r} not in any gold dataset",
                    path=str(path),
                    line=line_no,
                )
            validate_prediction(pred, examples[pred.example_id])

        records, errs = _validate_lines(path, handle_prediction)
        errors += errs
        print(f"predictions {path}: {records} records")
    print(f"errors: {errors}")
    return 0 if errors == 0 else 1


# -- evaluate -----------------------------------------------------------------


def _cmd_evaluate(args) -> int:
    dataset = load_dataset(args.dataset)
    if args.answers:
        answers = load_answers(args.answers)
    else:
        pset = _single_model_predictions(args.predictions, dataset)
        decode_cfg = DecodeConfig(args.max_span_len)
        answers = {
            ex.id: decode_to_text(ex, pset.get(ex.id), decode_cfg) for ex in dataset.examples
        }
    missing = [ex.id for ex in dataset.examples if ex.id not in answers]
    if missing:
        raise SchemaViolation("example_id", f"no answer for {missing[0]!r} (+{len(missing) - 1} more)")
    scores = _both_scores(answers, dataset)
    if args.answers_out:
        save_answers(answers, args.answers_out)
    _print({"dataset": dataset.name, "count": len(dataset), **scores})
    return 0


def _single_model_predictions(path, dataset: Dataset) -> PredictionSet:
    grouped = load_grouped_predictions([path], {ex.id: ex for ex in dataset.examples})
    if len(grouped) != 1:
        raise SchemaViolation("model_id", f"expected one model in {path}, found {sorted(grouped)}")
    return next(iter(grouped.values()))


# -- estimate-weights ----------------------------------------------------------


def _calibration_pool(args):
    datasets, examples_by_id = _load_gold(args.datasets)
    bundle = CalibrationBundle(tuple(datasets), per_dataset_cap=args.cap, seed=args.seed)
    pool = sample_calibration(bundle)
    grouped = load_grouped_predictions(args.predictions, examples_by_id)
    return datasets, pool, _ordered_sets(grouped)


def _cmd_estimate_weights(args) -> int:
    datasets, pool, sets = _calibration_pool(args)
    metric = MetricKind.from_name(args.metric)
    weights = estimate_weights(sets, pool, metric, DecodeConfig(args.max_span_len))
    meta = {
        "metric": metric.value,
        "cap": args.cap,
        "seed": args.seed,
        "pool_size": len(pool),
        "datasets": [ds.name for ds in datasets],
    }
    if args.out:
        save_weights(weights, args.out, meta)
    _print({"pool_size": len(pool), "weights": dict(weights.entries)})
    return 0


# -- tune-alpha -----------------------------------------------------------------


def _cmd_tune_alpha(args) -> int:
    _, pool, sets = _calibration_pool(args)
    metric = MetricKind.from_name(args.metric)
    grid = AlphaGrid(tuple(args.grid), folds=args.folds)
    base_cfg = EnsembleConfig(
        alpha=grid.values[0],
        decode=DecodeConfig(args.max_span_len),
        weight_metric=metric,
    )
    alpha, per_alpha = select_alpha(sets, pool, grid, metric, base_cfg, args.seed)
    result = {
        "selected_alpha": alpha,
        "per_alpha_scores": [[a, s] for a, s in per_alpha.items()],
        "metric": metric.value,
        "folds": args.folds,
        "seed": args.seed,
        "pool_size": len(pool),
    }
    if args.out:
        with open(args.out, "w", encoding="utf-8") as handle:
            json.dump(result, handle, ensure_ascii=False, indent=2)
            handle.write("\n")
    _print(result)
    return 0


# -- ensemble --------------------------------------------------------------------


def _cmd_ensemble(args) -> int:
    dataset = load_dataset(args.dataset)
    grouped = load_grouped_predictions(
        args.predictions, {ex.id: ex for ex in dataset.examples}
    )
    sets = _ordered_sets(grouped)
    answers = {}
    if args.simple:
        decode_cfg = DecodeConfig(args.max_span_len)
        for ex in dataset.examples:
            answers[ex.id] = simple_ensemble_predict(
                ex, [ps.get(ex.id) for ps in sets], decode_cfg
            )
        mode = "simple"
    else:
        if not args.weights:
            raise SchemaViolation("weights", "--weights is required unless --simple is given")
        weights, _ = load_weights(args.weights)
        cfg = EnsembleConfig(alpha=args.alpha, decode=DecodeConfig(args.max_span_len))
        for ex in dataset.examples:
            answers[ex.id] = ensemble_predict(ex, [ps.get(ex.id) for ps in sets], weights, cfg)
        mode = "weighted"
    if args.out:
        save_answers(answers, args.out)
    scores = _both_scores(answers, dataset)
    _print(
        {
            "dataset": dataset.name,
            "mode": mode,
            "models": [ps.model_id for ps in sets],
            "count": len(dataset),
            **scores,
        }
    )
    return 0


# -- simulate ---------------------------------------------------------------------


def _cmd_simulate(args) -> int:
    cfg = load_sim_config(args.config)
    corpus = generate_corpus(cfg)
    predictions = generate_predictions(corpus, cfg)
    out = Path(args.out_dir)
    (out / "datasets").mkdir(parents=True, exist_ok=True)
    (out / "predictions").mkdir(parents=True, exist_ok=True)
    dataset_paths = {}
    for name, dataset in corpus.items():
        path = out / "datasets" / f"{name}.jsonl"
        save_dataset(dataset, path)
        dataset_paths[name] = str(path)
    prediction_paths = {}
    domain_ids = {name: {ex.id for ex in dataset.examples} for name, dataset in corpus.items()}
    for model_id, pset in predictions.items():
        for name in corpus:
            path = out / "predictions" / f"{model_id}__{name}.jsonl"
            domain_preds = {
                eid: p for eid, p in pset.predictions.items() if eid in domain_ids[name]
            }
            save_predictions(PredictionSet(model_id, domain_preds), path)
            prediction_paths[f"{model_id}__{name}"] = str(path)
    _print({"datasets": dataset_paths, "predictions": prediction_paths})
    return 0


# -- report -----------------------------------------------------------------------


def _cmd_report(args) -> int:
    timing: dict[str, float] = {}

    def stage(name: str, fn):
        begin = time.perf_counter()
        result = fn()
        timing[name] = (time.perf_counter() - begin) * 1000.0
        return result

    def load_stage():
        datasets, examples_by_id = _load_gold(args.calibration)
        grouped = load_grouped_predictions(args.calibration_predictions, examples_by_id)
        target = load_dataset(args.target)
        target_grouped = load_grouped_predictions(
            args.target_predictions, {ex.id: ex for ex in target.examples}
        )
        return datasets, grouped, target, target_grouped

    datasets, grouped, target, target_grouped = stage("load", load_stage)
    sets = _ordered_sets(grouped)
    model_ids = [ps.model_id for ps in sets]
    if set(target_grouped) != set(model_ids):
        raise SchemaViolation(
            "model_id",
            f"target models {sorted(target_grouped)} differ from calibration models {sorted(model_ids)}",
        )
    target_sets = [target_grouped[m] for m in model_ids]

    metric = MetricKind.from_name(args.metric)
    decode_cfg = DecodeConfig(args.max_span_len)
    pool = stage(
        "sample",
        lambda: sample_calibration(
            CalibrationBundle(tuple(datasets), per_dataset_cap=args.cap, seed=args.seed)
        ),
    )
    weights = stage("weights", lambda: estimate_weights(sets, pool, metric, decode_cfg))
    grid = AlphaGrid(tuple(args.grid), folds=args.folds)
    base_cfg = EnsembleConfig(alpha=grid.values[0], decode=decode_cfg, weight_metric=metric)
    alpha, per_alpha = stage(
        "alpha", lambda: select_alpha(sets, pool, grid, metric, base_cfg, args.seed)
    )

    cfg = replace(base_cfg, alpha=alpha)

    def ensemble_stage():
        answers = {}
        for ex in target.examples:
            answers[ex.id] = ensemble_predict(
                ex, [ps.get(ex.id) for ps in target_sets], weights, cfg
            )
        return answers

    answers = stage("ensemble", ensemble_stage)

    def evaluate_stage():
        per_dataset = {target.name: _both_scores(answers, target)}
        per_model = {}
        for ps in target_sets:
            model_answers = {
                ex.id: decode_to_text(ex, ps.get(ex.id), decode_cfg) for ex in target.examples
            }
            per_model[ps.model_id] = _both_scores(model_answers, target)
        return per_dataset, per_model

    per_dataset, per_model = stage("evaluate", evaluate_stage)

    if args.no_timing:
        timing = {name: 0.0 for name in timing}
    report = RunReport(
        manifest=RunManifest(
            base_model_ids=tuple(model_ids),
            calibration_dataset_names=tuple(ds.name for ds in datasets),
            target_dataset_name=target.name,
            seed=args.seed,
            config=cfg,
        ),
        weights=weights,
        selected_alpha=alpha,
        per_alpha_scores=per_alpha,
        per_dataset_scores=per_dataset,
        per_model_scores=per_model,
        timing_ms=timing,
    )
    save_report(report, args.out)
    _print(
        {
            "selected_alpha": alpha,
            "weights": dict(weights.entries),
            "target": per_dataset[target.name],
            "report": str(args.out),
        }
    )
    return 0


# -- argument plumbing ---------------------------------------------------------


def _grid(text: str) -> list[float]:
    try:
        return [float(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad grid {text!r}; expected e.g. 1,2,3,4") from None


def _add_pool_args(sub) -> None:
    sub.add_argument("--datasets", nargs="+", required=True, help="calibration gold files")
    sub.add_argument("--predictions", nargs="+", required=True, help="prediction files")
    sub.add_argument("--cap", type=int, default=5000, help="per-dataset sample cap")
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--metric", default="token_f1", help="token_f1 or exact_match")
    sub.add_argument("--max-span-len", type=int, default=30)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qaensemble",
        description="Zero-shot weighted ensembling of extractive-QA span predictions.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check dataset / prediction files")
    p.add_argument("--dataset", nargs="+", required=True)
    p.add_argument("--predictions", nargs="*", default=[])
    p.set_defaults(fn=_cmd_validate)

    p = sub.add_parser("evaluate", help="score one model (or an answers file) against gold")
    p.add_argument("--dataset", required=True)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--predictions", help="single-model prediction file")
    group.add_argument("--answers", help="decoded answers file")
    p.add_argument("--max-span-len", type=int, default=30)
    p.add_argument("--answers-out", help="write decoded answers here")
    p.set_defaults(fn=_cmd_evaluate)

    p = sub.add_parser("estimate-weights", help="model accuracies on pooled calibration data")
    _add_pool_args(p)
    p.add_argument("--out", help="weights file to write")
    p.set_defaults(fn=_cmd_estimate_weights)

    p = sub.add_parser("tune-alpha", help="out-of-fold grid search for the weight exponent")
    _add_pool_args(p)
    p.add_argument("--grid", type=_grid, default=[1.0, 2.0, 3.0, 4.0])
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--out", help="JSON result file")
    p.set_defaults(fn=_cmd_tune_alpha)

    p = sub.add_parser("ensemble", help="combine model predictions on a target dataset")
    p.add_argument("--dataset", required=True, help="target gold file")
    p.add_argument("--predictions", nargs="+", required=True)
    p.add_argument("--weights", help="weights file (omit with --simple)")
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--simple", action="store_true", help="unweighted arithmetic-mean baseline")
    p.add_argument("--max-span-len", type=int, default=30)
    p.add_argument("--out", help="answers file to write")
    p.set_defaults(fn=_cmd_ensemble)

    p = sub.add_parser("simulate", help="emit a synthetic corpus and prediction files")
    p.add_argument("--config", required=True)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(fn=_cmd_simulate)

    p = sub.add_parser("report", help="run the whole pipeline and write a run report")
    p.add_argument("--calibration", nargs="+", required=True)
    p.add_argument("--calibration-predictions", nargs="+", required=True)
    p.add_argument("--target", required=True)
    p.add_argument("--target-predictions", nargs="+", required=True)
    p.add_argument("--grid", type=_grid, default=[1.0, 2.0, 3.0, 4.0])
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--cap", type=int, default=5000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--metric", default="token_f1")
    p.add_argument("--max-span-len", type=int, default=30)
    p.add_argument("--out", required=True)
    p.add_argument("--no-timing", action="store_true", help="zero the timing block for byte-reproducible reports")
    p.set_defaults(fn=_cmd_report)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (QAEnsembleError, OSError, ValueError) as err:
        _emit_error(err)
        return 1


if __name__ == "__main__":
    sys.exit(main())
