"""Word-level answer scoring in the SQuAD convention.

Normalization order is fixed: lowercase, strip punctuation, drop articles,
collapse whitespace. "Punctuation" means Unicode categories P* plus the ASCII
symbols !"#$%&'()*+,-./:;<=>?@[\\]^_`{|}~, so implementations agree exactly.
"""

from __future__ import annotations

import re
import string
import unicodedata
from collections import Counter
from enum import Enum
from typing import Mapping, Sequence

from .core import Dataset
from .errors import EmptyGoldSet, MissingPrediction


class MetricKind(Enum):
    TOKEN_F1 = "token_f1"
    EXACT_MATCH = "exact_match"

    @classmethod
    def from_name(cls, name: str) -> "MetricKind":
        key = name.strip().lower().replace("-", "_")
        aliases = {
            "token_f1": cls.TOKEN_F1,
            "f1": cls.TOKEN_F1,
            "exact_match": cls.EXACT_MATCH,
            "em": cls.EXACT_MATCH,
        }
        try:
            return aliases[key]
        except KeyError:
            raise ValueError(f"unknown metric {name!r}") from None


_ARTICLES = re.compile(r"\b(a|an|the)\b")
_ASCII_PUNCT = frozenset(string.punctuation)


def _is_punct(ch: str) -> bool:
    return ch in _ASCII_PUNCT or unicodedata.category(ch).startswith("P")


def normalize_answer(text: str) -> str:
    """Lowercase, remove punctuation, drop standalone articles, fix whitespace."""
    text = text.lower()
    text = "".join(ch for ch in text if not _is_punct(ch))
    text = _ARTICLES.sub(" ", text)
    return " ".join(text.split())


def token_f1(pred: str, gold: str) -> float:
    """Multiset word overlap F1 between normalized answer strings."""
    pred_tokens = normalize_answer(pred).split()
    gold_tokens = normalize_answer(gold).split()
    if not pred_tokens or not gold_tokens:
        return float(pred_tokens == gold_tokens)
    overlap = sum((Counter(pred_tokens) & Counter(gold_tokens)).values())
    if overlap == 0:
        return 0.0
    precision = overlap / len(pred_tokens)
    recall = overlap / len(gold_tokens)
    return 2 * precision * recall / (precision + recall)


def exact_match(pred: str, gold: str) -> float:
    """1.0 iff the normalized strings are identical."""
    return float(normalize_answer(pred) == normalize_answer(gold))


_METRIC_FNS = {
    MetricKind.TOKEN_F1: token_f1,
    MetricKind.EXACT_MATCH: exact_match,
}


def score_example(pred: str, golds: Sequence[str], metric: MetricKind) -> float:
    """Best score of the prediction against any gold reference."""
    if len(golds) == 0:
        raise EmptyGoldSet("cannot score against an empty gold set")
    fn = _METRIC_FNS[metric]
    return max(fn(pred, gold) for gold in golds)


def dataset_accuracy(
    preds: Mapping[str, str], dataset: Dataset, metric: MetricKind
) -> float:
    """Mean per-example score over the dataset.

    Summation runs in sorted-example-id order so the float result does not
    depend on how the dataset happens to be ordered.
    """
    if len(dataset) == 0:
        raise EmptyGoldSet(f"dataset {dataset.name!r} has no examples")
    total = 0.0
    for ex in sorted(dataset.examples, key=lambda e: e.id):
        if ex.id not in preds:
            raise MissingPrediction(ex.id)
        total += score_example(preds[ex.id], ex.gold_answers, metric)
    return total / len(dataset)
