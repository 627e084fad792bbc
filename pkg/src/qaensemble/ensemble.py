"""Weighted combination of base models' span distributions.

The combined distribution is the exponentiated-weight sum

    combined[t] = sum_j w_j**alpha * dist_j[t]

applied elementwise to the start and end vectors. With normalize_weights on
(the default) the sum is divided by sum_j w_j**alpha, which keeps the output
a probability distribution without changing the decoded argmax. Summation
runs in the given model order so results are bitwise deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import Example, ModelPrediction, SpanDistribution, WeightVector, span_to_text
from .decoder import DecodeConfig, decode_span
from .errors import (
    AllWeightsZero,
    EmptyModelSet,
    LengthMismatchAcrossModels,
    TokenizationMismatch,
)
from .metrics import MetricKind


@dataclass(frozen=True)
class EnsembleConfig:
    """Weighted-ensemble settings; alpha is the single real hyperparameter."""

    alpha: float = 1.0
    normalize_weights: bool = True
    decode: DecodeConfig = DecodeConfig()
    weight_metric: MetricKind = MetricKind.TOKEN_F1

    def __post_init__(self):
        if not (np.isfinite(self.alpha) and self.alpha > 0):
            raise ValueError(f"alpha must be a positive real, got {self.alpha!r}")


def _check_lengths(dists: Sequence[SpanDistribution]) -> int:
    if len(dists) == 0:
        raise EmptyModelSet("no distributions to combine")
    count = len(dists[0])
    for d in dists[1:]:
        if len(d) != count:
            raise LengthMismatchAcrossModels(
                f"token counts differ across models: {count} vs {len(d)}"
            )
    return count


def combine_weighted(
    dists: Sequence[SpanDistribution],
    model_ids: Sequence[str],
    weights: WeightVector,
    cfg: EnsembleConfig,
) -> SpanDistribution:
    """Exponentiated-weight sum of distributions, aligned by model order."""
    count = _check_lengths(dists)
    if len(model_ids) != len(dists):
        raise ValueError(f"{len(model_ids)} model ids for {len(dists)} distributions")
    powered = [weights[mid] ** cfg.alpha for mid in model_ids]
    total = sum(powered)
    if total == 0.0:
        raise AllWeightsZero("all exponentiated weights are zero")
    start = np.zeros(count)
    end = np.zeros(count)
    for w, d in zip(powered, dists):
        start += w * d.start_probs
        end += w * d.end_probs
    if cfg.normalize_weights:
        start /= total
        end /= total
    return SpanDistribution(start, end)


def combine_mean(dists: Sequence[SpanDistribution]) -> SpanDistribution:
    """Arithmetic mean of distributions: the unweighted ensemble baseline."""
    count = _check_lengths(dists)
    start = np.zeros(count)
    end = np.zeros(count)
    for d in dists:
        start += d.start_probs
        end += d.end_probs
    return SpanDistribution(start / len(dists), end / len(dists))


def _shared_tokens(preds: Sequence[ModelPrediction], example: Example):
    if len(preds) == 0:
        raise EmptyModelSet("no model predictions for example")
    for p in preds:
        if p.example_id != example.id:
            raise ValueError(
                f"prediction from {p.model_id!r} is for example {p.example_id!r}, "
                f"not {example.id!r}"
            )
    tokens = preds[0].tokens
    for p in preds[1:]:
        if p.tokens != tokens:
            raise TokenizationMismatch(
                f"models {preds[0].model_id!r} and {p.model_id!r} tokenize "
                f"example {example.id!r} differently"
            )
    return tokens


def ensemble_predict(
    example: Example,
    preds: Sequence[ModelPrediction],
    weights: WeightVector,
    cfg: EnsembleConfig,
) -> str:
    """Weighted-ensemble answer text for one example."""
    tokens = _shared_tokens(preds, example)
    combined = combine_weighted(
        [p.dist for p in preds], [p.model_id for p in preds], weights, cfg
    )
    return span_to_text(example, tokens, decode_span(combined, cfg.decode))


def simple_ensemble_predict(
    example: Example,
    preds: Sequence[ModelPrediction],
    decode_cfg: DecodeConfig = DecodeConfig(),
) -> str:
    """Arithmetic-mean ensemble answer text for one example."""
    tokens = _shared_tokens(preds, example)
    combined = combine_mean([p.dist for p in preds])
    return span_to_text(example, tokens, decode_span(combined, decode_cfg))
