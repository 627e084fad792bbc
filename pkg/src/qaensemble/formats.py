"""Line-delimited JSON file formats and the run report.

Datasets, predictions and answers are one JSON object per line (UTF-8), so
large files can be validated in a single streaming pass. Floats rely on
Python's shortest round-trip representation, which reproduces the exact
64-bit value on load. A dataset's name is the file stem; saving dataset
``wiki`` to ``wiki.jsonl`` and loading it back is an identity.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Mapping, Sequence

from .core import (
    Dataset,
    Example,
    ModelPrediction,
    PredictionSet,
    RunManifest,
    SpanDistribution,
    Token,
    WeightVector,
    validate_prediction,
)
from .decoder import DecodeConfig
from .ensemble import EnsembleConfig
from .errors import (
    DuplicateExampleId,
    ParseError,
    SchemaViolation,
    UnknownExampleId,
)
from .metrics import MetricKind
from .simulator import DomainSpec, SimConfig, SkillMatrix

WEIGHTS_FORMAT = "qaensemble.weights/1"
REPORT_FORMAT = "qaensemble.report/1"


def _dumps(obj) -> str:
    return json.dumps(obj, ensure_ascii=False, separators=(",", ":"))


def _iter_jsonl(path: str | Path) -> Iterator[tuple[int, dict]]:
    with open(path, encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            stripped = line.strip()
            if not stripped:
                continue
            try:
                obj = json.loads(stripped)
            except json.JSONDecodeError as err:
                raise ParseError(f"invalid JSON: {err.msg}", path=str(path), line=line_no) from None
            if not isinstance(obj, dict):
                raise SchemaViolation("<record>", "expected a JSON object", path=str(path), line=line_no)
            yield line_no, obj


def _field(obj: dict, name: str, kind, *, path: str, line: int):
    if name not in obj:
        raise SchemaViolation(name, "missing", path=path, line=line)
    value = obj[name]
    if kind is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise SchemaViolation(name, f"expected a number, got {type(value).__name__}", path=path, line=line)
        return float(value)
    if kind is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise SchemaViolation(name, f"expected an integer, got {type(value).__name__}", path=path, line=line)
        return value
    if not isinstance(value, kind):
        raise SchemaViolation(
            name, f"expected {kind.__name__}, got {type(value).__name__}", path=path, line=line
        )
    return value


# -- datasets ------------------------------------------------------------


def _parse_example(obj: dict, *, path: str, line: int) -> Example:
    example_id = _field(obj, "id", str, path=path, line=line)
    if not example_id:
        raise SchemaViolation("id", "must be non-empty", path=path, line=line)
    question = _field(obj, "question", str, path=path, line=line)
    context = _field(obj, "context", str, path=path, line=line)
    answers = _field(obj, "answers", list, path=path, line=line)
    if not answers or not all(isinstance(a, str) and a for a in answers):
        raise SchemaViolation(
            "answers", "must be a non-empty list of non-empty strings", path=path, line=line
        )
    return Example(example_id, question, context, tuple(answers))


def load_dataset(path: str | Path) -> Dataset:
    """Read a dataset file; the dataset name is the file stem."""
    path = Path(path)
    examples = []
    seen = set()
    for line_no, obj in _iter_jsonl(path):
        example = _parse_example(obj, path=str(path), line=line_no)
        if example.id in seen:
            raise DuplicateExampleId(f"example id {example.id!r} repeated", path=str(path), line=line_no)
        seen.add(example.id)
        examples.append(example)
    return Dataset(path.stem, tuple(examples))


def save_dataset(dataset: Dataset, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for ex in dataset.examples:
            handle.write(
                _dumps(
                    {
                        "id": ex.id,
                        "question": ex.question,
                        "context": ex.context,
                        "answers": list(ex.gold_answers),
                    }
                )
                + "\n"
            )


# -- predictions -----------------------------------------------------------


def _parse_prediction(obj: dict, *, path: str, line: int) -> ModelPrediction:
    model_id = _field(obj, "model_id", str, path=path, line=line)
    example_id = _field(obj, "example_id", str, path=path, line=line)
    raw_tokens = _field(obj, "tokens", list, path=path, line=line)
    tokens = []
    for tok in raw_tokens:
        if not isinstance(tok, dict):
            raise SchemaViolation("tokens", "each token must be an object", path=path, line=line)
        tokens.append(
            Token(
                _field(tok, "text", str, path=path, line=line),
                _field(tok, "start", int, path=path, line=line),
                _field(tok, "end", int, path=path, line=line),
            )
        )
    start_probs = _field(obj, "start_probs", list, path=path, line=line)
    end_probs = _field(obj, "end_probs", list, path=path, line=line)
    for name, probs in (("start_probs", start_probs), ("end_probs", end_probs)):
        if not all(isinstance(p, (int, float)) and not isinstance(p, bool) for p in probs):
            raise SchemaViolation(name, "must be a list of numbers", path=path, line=line)
    dist = SpanDistribution(start_probs, end_probs)
    return ModelPrediction(model_id, example_id, tuple(tokens), dist)


def load_predictions(path: str | Path, expected_dataset: Dataset) -> PredictionSet:
    """Read one model's predictions, validating every record against the gold file."""
    path = Path(path)
    model_id = None
    predictions: dict[str, ModelPrediction] = {}
    for line_no, obj in _iter_jsonl(path):
        pred = _parse_prediction(obj, path=str(path), line=line_no)
        if model_id is None:
            model_id = pred.model_id
        elif pred.model_id != model_id:
            raise SchemaViolation(
                "model_id",
                f"file mixes models {model_id!r} and {pred.model_id!r}",
                path=str(path),
                line=line_no,
            )
        if pred.example_id not in expected_dataset:
            raise UnknownExampleId(
                f"example id {pred.example_id!r} not in dataset {expected_dataset.name!r}",
                path=str(path),
                line=line_no,
            )
        if pred.example_id in predictions:
            raise DuplicateExampleId(
                f"example id {pred.example_id!r} repeated", path=str(path), line=line_no
            )
        predictions[pred.example_id] = validate_prediction(
            pred, expected_dataset.example(pred.example_id)
        )
    if model_id is None:
        raise SchemaViolation("<file>", "prediction file is empty", path=str(path))
    return PredictionSet(model_id, predictions)


def load_grouped_predictions(
    paths: Sequence[str | Path], examples_by_id: Mapping[str, Example]
) -> dict[str, PredictionSet]:
    """Read prediction files spanning several models and gold datasets.

    Records are grouped by their model_id; each (model, example) pair may
    occur once across all files. Used by CLI commands that take one file per
    model, or one file per model and dataset.
    """
    grouped: dict[str, dict[str, ModelPrediction]] = {}
    for path in paths:
        path = Path(path)
        for line_no, obj in _iter_jsonl(path):
            pred = _parse_prediction(obj, path=str(path), line=line_no)
            if pred.example_id not in examples_by_id:
                raise UnknownExampleId(
                    f"example id {pred.example_id!r} not in any gold dataset",
                    path=str(path),
                    line=line_no,
                )
            bucket = grouped.setdefault(pred.model_id, {})
            if pred.example_id in bucket:
                raise DuplicateExampleId(
                    f"model {pred.model_id!r} predicts example {pred.example_id!r} twice",
                    path=str(path),
                    line=line_no,
                )
            bucket[pred.example_id] = validate_prediction(
                pred, examples_by_id[pred.example_id]
            )
    return {m: PredictionSet(m, preds) for m, preds in grouped.items()}


def save_predictions(pset: PredictionSet, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for pred in pset.predictions.values():
            handle.write(
                _dumps(
                    {
                        "model_id": pred.model_id,
                        "example_id": pred.example_id,
                        "tokens": [
                            {"text": t.text, "start": t.char_start, "end": t.char_end}
                            for t in pred.tokens
                        ],
                        "start_probs": list(pred.dist.start_probs),
                        "end_probs": list(pred.dist.end_probs),
                    }
                )
                + "\n"
            )


# -- weights ---------------------------------------------------------------


def save_weights(weights: WeightVector, path: str | Path, meta: Mapping | None = None) -> None:
    """Metadata header line, then the {model_id: weight} map."""
    header = {"format": WEIGHTS_FORMAT}
    header.update(meta or {})
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(_dumps(header) + "\n")
        handle.write(_dumps(dict(weights.entries)) + "\n")


def load_weights(path: str | Path) -> tuple[WeightVector, dict]:
    """Read a weights file; a bare {model_id: weight} line is also accepted."""
    path = Path(path)
    lines = list(_iter_jsonl(path))
    if not lines:
        raise SchemaViolation("<file>", "weights file is empty", path=str(path))
    meta: dict = {}
    entries_obj = lines[0][1]
    rest = lines[1:]
    if "format" in entries_obj:
        if entries_obj["format"] != WEIGHTS_FORMAT:
            raise SchemaViolation(
                "format", f"unsupported weights format {entries_obj['format']!r}", path=str(path)
            )
        meta = {k: v for k, v in entries_obj.items() if k != "format"}
        if not rest:
            raise SchemaViolation("<file>", "missing weight entries line", path=str(path))
        entries_obj = rest[0][1]
        rest = rest[1:]
    if rest:
        raise SchemaViolation("<file>", "unexpected extra lines", path=str(path), line=rest[0][0])
    for model_id, w in entries_obj.items():
        if isinstance(w, bool) or not isinstance(w, (int, float)):
            raise SchemaViolation(model_id, "weight must be a number", path=str(path))
    try:
        return WeightVector(entries_obj), meta
    except ValueError as err:
        raise SchemaViolation("<weights>", str(err), path=str(path)) from None


# -- decoded answers ---------------------------------------------------------


def save_answers(answers: Mapping[str, str], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for example_id in sorted(answers):
            handle.write(_dumps({"example_id": example_id, "answer": answers[example_id]}) + "\n")


def load_answers(path: str | Path) -> dict[str, str]:
    path = Path(path)
    answers: dict[str, str] = {}
    for line_no, obj in _iter_jsonl(path):
        example_id = _field(obj, "example_id", str, path=str(path), line=line_no)
        answer = _field(obj, "answer", str, path=str(path), line=line_no)
        if example_id in answers:
            raise DuplicateExampleId(f"example id {example_id!r} repeated", path=str(path), line=line_no)
        answers[example_id] = answer
    return answers


# -- run report --------------------------------------------------------------


@dataclass(frozen=True)
class RunReport:
    """Everything one pipeline run produced, ready for serialization."""

    manifest: RunManifest
    weights: WeightVector
    selected_alpha: float
    per_alpha_scores: Mapping[float, float]
    per_dataset_scores: Mapping[str, Mapping[str, float]]
    per_model_scores: Mapping[str, Mapping[str, float]]
    timing_ms: Mapping[str, float]

    def __post_init__(self):
        object.__setattr__(self, "per_alpha_scores", dict(self.per_alpha_scores))
        object.__setattr__(
            self, "per_dataset_scores", {k: dict(v) for k, v in dict(self.per_dataset_scores).items()}
        )
        object.__setattr__(
            self, "per_model_scores", {k: dict(v) for k, v in dict(self.per_model_scores).items()}
        )
        object.__setattr__(self, "timing_ms", dict(self.timing_ms))
        if self.per_alpha_scores and self.selected_alpha not in self.per_alpha_scores:
            raise ValueError(
                f"selected alpha {self.selected_alpha!r} is not one of the tuned values"
            )
        for scores in list(self.per_dataset_scores.values()) + list(self.per_model_scores.values()):
            for name, value in scores.items():
                if not 0.0 <= value <= 1.0:
                    raise ValueError(f"score {name!r}={value!r} outside [0, 1]")


def _config_to_dict(cfg: EnsembleConfig) -> dict:
    return {
        "alpha": cfg.alpha,
        "normalize_weights": cfg.normalize_weights,
        "max_span_len": cfg.decode.max_span_len,
        "weight_metric": cfg.weight_metric.value,
    }


def _config_from_dict(obj: dict) -> EnsembleConfig:
    return EnsembleConfig(
        alpha=float(obj["alpha"]),
        normalize_weights=bool(obj["normalize_weights"]),
        decode=DecodeConfig(int(obj["max_span_len"])),
        weight_metric=MetricKind(obj["weight_metric"]),
    )


def save_report(report: RunReport, path: str | Path) -> None:
    manifest = report.manifest
    doc = {
        "format": REPORT_FORMAT,
        "manifest": {
            "base_model_ids": list(manifest.base_model_ids),
            "calibration_dataset_names": list(manifest.calibration_dataset_names),
            "target_dataset_name": manifest.target_dataset_name,
            "seed": manifest.seed,
            "config": _config_to_dict(manifest.config),
        },
        "weights": dict(report.weights.entries),
        "selected_alpha": report.selected_alpha,
        "per_alpha_scores": [[alpha, score] for alpha, score in report.per_alpha_scores.items()],
        "per_dataset_scores": {k: dict(v) for k, v in report.per_dataset_scores.items()},
        "per_model_scores": {k: dict(v) for k, v in report.per_model_scores.items()},
        "timing_ms": dict(report.timing_ms),
    }
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(doc, handle, ensure_ascii=False, indent=2, sort_keys=False)
        handle.write("\n")


def load_report(path: str | Path) -> RunReport:
    path = Path(path)
    with open(path, encoding="utf-8") as handle:
        try:
            doc = json.load(handle)
        except json.JSONDecodeError as err:
            raise ParseError(f"invalid JSON: {err.msg}", path=str(path)) from None
    if doc.get("format") != REPORT_FORMAT:
        raise SchemaViolation("format", f"unsupported report format {doc.get('format')!r}", path=str(path))
    try:
        raw_manifest = doc["manifest"]
        manifest = RunManifest(
            base_model_ids=tuple(raw_manifest["base_model_ids"]),
            calibration_dataset_names=tuple(raw_manifest["calibration_dataset_names"]),
            target_dataset_name=raw_manifest["target_dataset_name"],
            seed=int(raw_manifest["seed"]),
            config=_config_from_dict(raw_manifest["config"]),
        )
        return RunReport(
            manifest=manifest,
            weights=WeightVector(doc["weights"]),
            selected_alpha=float(doc["selected_alpha"]),
            per_alpha_scores={float(a): float(s) for a, s in doc["per_alpha_scores"]},
            per_dataset_scores=doc["per_dataset_scores"],
            per_model_scores=doc["per_model_scores"],
            timing_ms=doc["timing_ms"],
        )
    except (KeyError, TypeError) as err:
        raise SchemaViolation("<report>", f"malformed report: {err}", path=str(path)) from None


# -- simulator config ---------------------------------------------------------


def load_sim_config(path: str | Path) -> SimConfig:
    """Read a simulator config document (a single JSON object)."""
    path = Path(path)
    with open(path, encoding="utf-8") as handle:
        try:
            doc = json.load(handle)
        except json.JSONDecodeError as err:
            raise ParseError(f"invalid JSON: {err.msg}", path=str(path)) from None
    if not isinstance(doc, dict):
        raise SchemaViolation("<config>", "expected a JSON object", path=str(path))

    def get(name, kind, default=None, required=False):
        if name not in doc:
            if required:
                raise SchemaViolation(name, "missing", path=str(path))
            return default
        value = doc[name]
        if kind is float and isinstance(value, int) and not isinstance(value, bool):
            value = float(value)
        if not isinstance(value, kind) or isinstance(value, bool):
            raise SchemaViolation(name, f"expected {kind.__name__}", path=str(path))
        return value

    raw_domains = get("domains", list, required=True)
    domains = []
    for item in raw_domains:
        if not isinstance(item, dict) or "name" not in item or "examples" not in item:
            raise SchemaViolation("domains", "each domain needs name and examples", path=str(path))
        domains.append(DomainSpec(str(item["name"]), int(item["examples"])))
    models = get("models", list, required=True)
    if not all(isinstance(m, str) for m in models):
        raise SchemaViolation("models", "must be a list of strings", path=str(path))
    skills = get("skills", dict, required=True)
    skill = SkillMatrix(
        skills=skills,
        sharpness=get("sharpness", float, 64.0),
        noise_seed=get("noise_seed", int, 0),
    )

    def int_pair(name, default):
        raw = get(name, list, default=None)
        if raw is None:
            return default
        if len(raw) != 2 or not all(isinstance(v, int) and not isinstance(v, bool) for v in raw):
            raise SchemaViolation(name, "expected [min, max] integers", path=str(path))
        return (raw[0], raw[1])

    return SimConfig(
        domains=tuple(domains),
        models=tuple(models),
        skill=skill,
        vocab_size=get("vocab_size", int, 50),
        context_len_range=int_pair("context_len_range", (20, 40)),
        answer_len_range=int_pair("answer_len_range", (1, 3)),
        seed=get("seed", int, 0),
    )
