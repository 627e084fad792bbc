"""Scikit-learn style front end for the weighted ensemble pipeline.

``fit`` consumes calibration data (per-model prediction sets plus the gold
examples they cover) and learns the per-model weights and, when ``alpha`` is
None, the exponent via out-of-fold grid search. ``predict`` decodes the
weighted combination for new examples. The estimator inherits
``get_params`` / ``set_params`` from ``BaseEstimator`` so it composes with
the usual sklearn tooling.
"""

from __future__ import annotations

from typing import Mapping, Sequence

from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from .core import Dataset, Example, PredictionSet
from .decoder import DecodeConfig
from .ensemble import EnsembleConfig, ensemble_predict
from .metrics import MetricKind, score_example
from .weighting import AlphaGrid, PoolEntry, estimate_weights, select_alpha


def _as_pool(examples) -> list[PoolEntry]:
    """Accept a Dataset, a sequence of Examples, or (name, Example) pairs."""
    if isinstance(examples, Dataset):
        return [(examples.name, ex) for ex in examples.examples]
    pool = []
    for item in examples:
        if isinstance(item, Example):
            pool.append(("", item))
        else:
            name, ex = item
            pool.append((str(name), ex))
    return pool


def _as_sets(prediction_sets) -> list[PredictionSet]:
    if isinstance(prediction_sets, Mapping):
        return list(prediction_sets.values())
    return list(prediction_sets)


class WeightedSpanEnsemble(BaseEstimator):
    """Zero-shot weighted ensemble over extractive-QA base models.

    Parameters
    ----------
    alpha : float or None, default=None
        Weight exponent. None tunes it over ``alpha_grid`` by out-of-fold
        validation during ``fit``.
    alpha_grid : sequence of float, default=(1, 2, 3, 4)
        Ascending candidate exponents used when ``alpha`` is None.
    folds : int, default=5
        Fold count for the out-of-fold search.
    max_span_len : int, default=30
        Longest decoded answer span, in tokens.
    normalize_weights : bool, default=True
        Divide combined distributions by the sum of exponentiated weights.
    metric : str, default="token_f1"
        "token_f1" or "exact_match"; used both for weight estimation and
        for validation scoring.
    seed : int, default=0
        Seed for the fold shuffle.
    """

    def __init__(
        self,
        alpha: float | None = None,
        alpha_grid: Sequence[float] = (1.0, 2.0, 3.0, 4.0),
        folds: int = 5,
        max_span_len: int = 30,
        normalize_weights: bool = True,
        metric: str = "token_f1",
        seed: int = 0,
    ):
        self.alpha = alpha
        self.alpha_grid = alpha_grid
        self.folds = folds
        self.max_span_len = max_span_len
        self.normalize_weights = normalize_weights
        self.metric = metric
        self.seed = seed

    def _config(self, alpha: float) -> EnsembleConfig:
        return EnsembleConfig(
            alpha=alpha,
            normalize_weights=self.normalize_weights,
            decode=DecodeConfig(self.max_span_len),
            weight_metric=MetricKind.from_name(self.metric),
        )

    def fit(self, prediction_sets, examples, y=None):
        """Estimate weights (and alpha, if not fixed) from calibration data.

        prediction_sets : per-model PredictionSets covering every example
        examples : Dataset, sequence of Examples, or (name, Example) pairs
        """
        sets = _as_sets(prediction_sets)
        pool = _as_pool(examples)
        metric = MetricKind.from_name(self.metric)
        decode_cfg = DecodeConfig(self.max_span_len)
        self.model_ids_ = tuple(ps.model_id for ps in sets)
        self.weights_ = estimate_weights(sets, pool, metric, decode_cfg)
        if self.alpha is None:
            grid = AlphaGrid(tuple(float(a) for a in self.alpha_grid), folds=self.folds)
            self.alpha_, self.per_alpha_scores_ = select_alpha(
                sets, pool, grid, metric, self._config(grid.values[0]), self.seed
            )
        else:
            self.alpha_ = float(self.alpha)
            self.per_alpha_scores_ = {}
        return self

    def _check_fitted(self):
        if not hasattr(self, "weights_"):
            raise NotFittedError("this WeightedSpanEnsemble instance is not fitted yet")

    def predict(self, prediction_sets, examples) -> dict[str, str]:
        """Decoded ensemble answer per example id."""
        self._check_fitted()
        sets = _as_sets(prediction_sets)
        cfg = self._config(self.alpha_)
        answers = {}
        for _, ex in _as_pool(examples):
            preds = [ps.get(ex.id) for ps in sets]
            answers[ex.id] = ensemble_predict(ex, preds, self.weights_, cfg)
        return answers

    def score(self, prediction_sets, examples, y=None) -> float:
        """Mean metric of the ensemble's answers against the gold answers."""
        self._check_fitted()
        pool = _as_pool(examples)
        answers = self.predict(prediction_sets, [ex for _, ex in pool])
        metric = MetricKind.from_name(self.metric)
        total = 0.0
        for _, ex in pool:
            total += score_example(answers[ex.id], ex.gold_answers, metric)
        return total / len(pool) if pool else 0.0
