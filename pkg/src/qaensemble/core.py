"""Core domain types: examples, tokens, span distributions, predictions.

All types are immutable after construction and safe to share across workers.
Character offsets are Unicode scalar positions into the context string
(start inclusive, end exclusive), never bytes.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Mapping, Sequence

import numpy as np

from .errors import (
    DistributionSumOutOfTolerance,
    DuplicateExampleId,
    EmptyGoldSet,
    LengthMismatch,
    MissingPrediction,
    MissingWeight,
    NegativeProbability,
    NonMonotoneTokens,
    OffsetOutOfRange,
    SpanOutOfRange,
)

if TYPE_CHECKING:
    from .ensemble import EnsembleConfig

# Ingest tolerance: beyond this the producer is considered buggy.
SUM_INGEST_TOLERANCE = 1e-3
# Storage tolerance: distributions are kept normalized this tightly.
SUM_STORED_TOLERANCE = 1e-12


@dataclass(frozen=True)
class Token:
    """One context token, addressed by [char_start, char_end)."""

    text: str
    char_start: int
    char_end: int

    def __post_init__(self):
        if self.char_start < 0 or self.char_end <= self.char_start:
            raise OffsetOutOfRange(
                f"token offsets [{self.char_start}, {self.char_end}) are not a valid range"
            )


@dataclass(frozen=True)
class Example:
    """One QA instance: a question over a context with gold answer strings."""

    id: str
    question: str
    context: str
    gold_answers: tuple[str, ...]

    def __post_init__(self):
        if not self.id:
            raise ValueError("example id must be non-empty")
        object.__setattr__(self, "gold_answers", tuple(self.gold_answers))
        if not self.gold_answers:
            raise EmptyGoldSet(f"example {self.id!r} has no gold answers")
        if any(not a for a in self.gold_answers):
            raise ValueError(f"example {self.id!r} has an empty gold answer string")


@dataclass(frozen=True)
class Dataset:
    """A named collection of examples with distinct ids."""

    name: str
    examples: tuple[Example, ...]

    def __post_init__(self):
        object.__setattr__(self, "examples", tuple(self.examples))
        by_id: dict[str, Example] = {}
        for ex in self.examples:
            if ex.id in by_id:
                raise DuplicateExampleId(f"example id {ex.id!r} occurs twice in dataset {self.name!r}")
            by_id[ex.id] = ex
        object.__setattr__(self, "_by_id", by_id)

    def __len__(self) -> int:
        return len(self.examples)

    def example(self, example_id: str) -> Example:
        return self._by_id[example_id]

    def __contains__(self, example_id: str) -> bool:
        return example_id in self._by_id


@dataclass(frozen=True, eq=False)
class SpanDistribution:
    """Start/end probability vectors over the same token sequence.

    Entries are non-negative and finite; both vectors have the same length.
    Normalization is enforced at ingest (validate_prediction / file loading),
    not at construction, so intermediate unnormalized combinations are legal.
    """

    start_probs: np.ndarray
    end_probs: np.ndarray

    def __post_init__(self):
        start = np.array(self.start_probs, dtype=np.float64)
        end = np.array(self.end_probs, dtype=np.float64)
        if start.ndim != 1 or end.ndim != 1:
            raise ValueError("probability vectors must be one-dimensional")
        if len(start) != len(end):
            raise LengthMismatch(
                f"start vector has {len(start)} entries but end vector has {len(end)}"
            )
        if not (np.all(np.isfinite(start)) and np.all(np.isfinite(end))):
            raise ValueError("probability vectors must be finite")
        if np.any(start < 0.0) or np.any(end < 0.0):
            raise NegativeProbability("probability vectors must be non-negative")
        start.setflags(write=False)
        end.setflags(write=False)
        object.__setattr__(self, "start_probs", start)
        object.__setattr__(self, "end_probs", end)

    def __len__(self) -> int:
        return len(self.start_probs)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SpanDistribution):
            return NotImplemented
        return np.array_equal(self.start_probs, other.start_probs) and np.array_equal(
            self.end_probs, other.end_probs
        )

    __hash__ = None  # arrays are not hashable


@dataclass(frozen=True)
class ModelPrediction:
    """One base model's span distribution on one example."""

    model_id: str
    example_id: str
    tokens: tuple[Token, ...]
    dist: SpanDistribution

    def __post_init__(self):
        object.__setattr__(self, "tokens", tuple(self.tokens))
        if len(self.dist) != len(self.tokens):
            raise LengthMismatch(
                f"{len(self.dist)} probabilities for {len(self.tokens)} tokens "
                f"(model {self.model_id!r}, example {self.example_id!r})"
            )


@dataclass(frozen=True)
class PredictionSet:
    """All predictions of one base model, keyed by example id."""

    model_id: str
    predictions: Mapping[str, ModelPrediction]

    def __post_init__(self):
        object.__setattr__(self, "predictions", dict(self.predictions))
        for example_id, pred in self.predictions.items():
            if pred.model_id != self.model_id:
                raise ValueError(
                    f"prediction for {example_id!r} carries model id {pred.model_id!r}, "
                    f"expected {self.model_id!r}"
                )
            if pred.example_id != example_id:
                raise ValueError(
                    f"prediction keyed {example_id!r} carries example id {pred.example_id!r}"
                )

    def __len__(self) -> int:
        return len(self.predictions)

    def get(self, example_id: str) -> ModelPrediction:
        try:
            return self.predictions[example_id]
        except KeyError:
            raise MissingPrediction(example_id, self.model_id) from None


@dataclass(frozen=True)
class WeightVector:
    """Per-model ensemble coefficients, keyed by model id.

    Weights produced by accuracy estimation lie in [0, 1]; hand-written
    vectors may exceed 1 but must be finite and non-negative.
    """

    entries: Mapping[str, float]

    def __post_init__(self):
        entries = {str(k): float(v) for k, v in dict(self.entries).items()}
        if not entries:
            raise ValueError("a weight vector needs at least one entry")
        for model_id, w in entries.items():
            if not np.isfinite(w) or w < 0.0:
                raise ValueError(f"weight for {model_id!r} must be finite and >= 0, got {w!r}")
        object.__setattr__(self, "entries", entries)

    def __getitem__(self, model_id: str) -> float:
        try:
            return self.entries[model_id]
        except KeyError:
            raise MissingWeight(model_id) from None

    def __contains__(self, model_id: str) -> bool:
        return model_id in self.entries

    def model_ids(self) -> tuple[str, ...]:
        return tuple(self.entries)


@dataclass(frozen=True)
class RunManifest:
    """Which models, calibration datasets and target dataset a run uses."""

    base_model_ids: tuple[str, ...]
    calibration_dataset_names: tuple[str, ...]
    target_dataset_name: str
    seed: int
    config: "EnsembleConfig"

    def __post_init__(self):
        object.__setattr__(self, "base_model_ids", tuple(self.base_model_ids))
        object.__setattr__(
            self, "calibration_dataset_names", tuple(self.calibration_dataset_names)
        )
        if not self.base_model_ids:
            raise ValueError("at least one base model is required")
        if not self.calibration_dataset_names:
            raise ValueError("at least one calibration dataset is required")
        if len(set(self.base_model_ids)) != len(self.base_model_ids):
            raise ValueError("base model ids must be distinct")
        if not 0 <= int(self.seed) < (1 << 64):
            raise ValueError("seed must be an unsigned 64-bit integer")


def _renormalized(vec: np.ndarray) -> np.ndarray:
    out = vec
    # One division suffices in practice; the loop guards long vectors.
    for _ in range(4):
        total = float(np.sum(out))
        if abs(total - 1.0) <= SUM_STORED_TOLERANCE:
            return out
        out = out / total
    return out


def validate_prediction(pred: ModelPrediction, example: Example) -> ModelPrediction:
    """Check a prediction against its example and renormalize its distribution.

    Idempotent: a prediction already normalized within 1e-12 is returned
    unchanged, bit for bit.
    """
    if pred.example_id != example.id:
        raise ValueError(
            f"prediction is for example {pred.example_id!r}, not {example.id!r}"
        )
    if len(pred.dist) != len(pred.tokens):
        raise LengthMismatch(
            f"{len(pred.dist)} probabilities for {len(pred.tokens)} tokens"
        )
    context_len = len(example.context)
    prev_end = 0
    for tok in pred.tokens:
        if tok.char_end > context_len:
            raise OffsetOutOfRange(
                f"token [{tok.char_start}, {tok.char_end}) exceeds context length {context_len}"
            )
        if tok.char_start < prev_end:
            raise NonMonotoneTokens(
                f"token at {tok.char_start} starts before previous token ends at {prev_end}"
            )
        prev_end = tok.char_end

    start_sum = float(np.sum(pred.dist.start_probs))
    end_sum = float(np.sum(pred.dist.end_probs))
    for name, total in (("start", start_sum), ("end", end_sum)):
        if abs(total - 1.0) > SUM_INGEST_TOLERANCE:
            raise DistributionSumOutOfTolerance(
                f"{name} probabilities sum to {total!r}, outside 1 ± {SUM_INGEST_TOLERANCE}"
            )
    if (
        abs(start_sum - 1.0) <= SUM_STORED_TOLERANCE
        and abs(end_sum - 1.0) <= SUM_STORED_TOLERANCE
    ):
        return pred
    dist = SpanDistribution(
        _renormalized(pred.dist.start_probs), _renormalized(pred.dist.end_probs)
    )
    return ModelPrediction(pred.model_id, pred.example_id, pred.tokens, dist)


def span_to_text(example: Example, tokens: Sequence[Token], span: tuple[int, int]) -> str:
    """Context substring covered by the token span (i, j), both inclusive."""
    i, j = span
    if not (0 <= i <= j < len(tokens)):
        raise SpanOutOfRange(f"span ({i}, {j}) invalid for {len(tokens)} tokens")
    return example.context[tokens[i].char_start : tokens[j].char_end]
