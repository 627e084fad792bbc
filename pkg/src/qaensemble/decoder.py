"""Best-span selection from start/end probability vectors.

The decoding rule is the standard one for extractive QA: maximize
start_probs[i] * end_probs[j] over i <= j <= i + max_span_len - 1.
Ties break to the smallest i, then the smallest j, so every implementation
and test oracle agrees exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Example, ModelPrediction, SpanDistribution, span_to_text
from .errors import EmptyDistribution


@dataclass(frozen=True)
class DecodeConfig:
    max_span_len: int = 30

    def __post_init__(self):
        if self.max_span_len < 1:
            raise ValueError("max_span_len must be at least 1")


def decode_span(dist: SpanDistribution, cfg: DecodeConfig = DecodeConfig()) -> tuple[int, int]:
    """Highest-product (start, end) token span, length-capped, lexicographic ties."""
    count = len(dist)
    if count == 0:
        raise EmptyDistribution("cannot decode a distribution over zero tokens")
    start = dist.start_probs
    end = dist.end_probs
    max_len = cfg.max_span_len
    best_p = -1.0  # products are >= 0, so the first candidate always wins this
    best_i = best_j = 0
    for i in range(count):
        s = float(start[i])
        if s > 0.0:
            window = end[i : min(count, i + max_len)]
            k = int(np.argmax(window))  # first occurrence = smallest j
            p = s * float(window[k])
            j = i + k
        else:
            # All products in this row are zero; the tied candidate is (i, i).
            p = 0.0
            j = i
        if p > best_p:
            best_p, best_i, best_j = p, i, j
    return best_i, best_j


def decode_to_text(example: Example, pred: ModelPrediction, cfg: DecodeConfig = DecodeConfig()) -> str:
    """Decode the best span and map it back to context text."""
    span = decode_span(pred.dist, cfg)
    return span_to_text(example, pred.tokens, span)
