"""Out-of-domain weight estimation and alpha selection.

Weights are the base models' accuracies on a pooled calibration sample
(micro-average over the concatenated pool). Alpha is chosen by k-fold
out-of-fold validation over the same pool: for each candidate alpha and each
fold, weights are re-estimated on the other folds and the weighted ensemble
is scored on the held-out fold, so no example is ever scored with weights
that saw it. The per-alpha score is the unweighted mean of the fold means;
ties break to the smallest alpha.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

from ._rng import rng_for
from .core import Dataset, Example, PredictionSet, WeightVector
from .decoder import DecodeConfig, decode_to_text
from .ensemble import EnsembleConfig, ensemble_predict
from .errors import EmptyDataset, PoolTooSmall
from .metrics import MetricKind, score_example

__all__ = [
    "WeightVector",
    "CalibrationBundle",
    "AlphaGrid",
    "PoolEntry",
    "sample_calibration",
    "estimate_weights",
    "select_alpha",
]

# One pooled calibration example: (source dataset name, example).
PoolEntry = tuple[str, Example]


@dataclass(frozen=True)
class CalibrationBundle:
    """Calibration datasets plus the sampling cap and seed."""

    datasets: tuple[Dataset, ...]
    per_dataset_cap: int | None = 5000
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "datasets", tuple(self.datasets))
        if not self.datasets:
            raise ValueError("at least one calibration dataset is required")
        if self.per_dataset_cap is not None and self.per_dataset_cap < 1:
            raise ValueError("per_dataset_cap must be at least 1 when set")


@dataclass(frozen=True)
class AlphaGrid:
    """Candidate alpha values (strictly ascending) and the fold count."""

    values: tuple[float, ...] = (1.0, 2.0, 3.0, 4.0)
    folds: int = 5

    def __post_init__(self):
        values = tuple(float(v) for v in self.values)
        object.__setattr__(self, "values", values)
        if not values:
            raise ValueError("alpha grid must be non-empty")
        if values[0] <= 0:
            raise ValueError("alpha values must be positive")
        if any(b <= a for a, b in zip(values, values[1:])):
            raise ValueError("alpha values must be strictly ascending")
        if self.folds < 2:
            raise ValueError("at least 2 folds are required")


def sample_calibration(bundle: CalibrationBundle) -> list[PoolEntry]:
    """Uniform per-dataset sample without replacement, pooled and sorted.

    Each dataset contributes min(cap, size) examples drawn from a PCG64
    stream keyed by (seed, dataset name); the pool is ordered by
    (dataset name, example id).
    """
    pool: list[PoolEntry] = []
    for ds in bundle.datasets:
        if len(ds) == 0:
            raise EmptyDataset(f"calibration dataset {ds.name!r} is empty")
        take = len(ds) if bundle.per_dataset_cap is None else min(bundle.per_dataset_cap, len(ds))
        rng = rng_for(bundle.seed, "calibration-sample", ds.name)
        chosen = rng.permutation(len(ds))[:take]
        pool.extend((ds.name, ds.examples[i]) for i in chosen)
    pool.sort(key=lambda entry: (entry[0], entry[1].id))
    return pool


def _model_scores(
    pset: PredictionSet,
    pool: Sequence[PoolEntry],
    metric: MetricKind,
    decode_cfg: DecodeConfig,
) -> list[float]:
    scores = []
    for _, ex in pool:
        pred = pset.get(ex.id)
        scores.append(score_example(decode_to_text(ex, pred, decode_cfg), ex.gold_answers, metric))
    return scores


def estimate_weights(
    sets: Sequence[PredictionSet],
    pool: Sequence[PoolEntry],
    metric: MetricKind,
    decode_cfg: DecodeConfig = DecodeConfig(),
) -> WeightVector:
    """Per-model mean decoded score over the pooled calibration examples."""
    if len(pool) == 0:
        raise EmptyDataset("calibration pool is empty")
    ids = [ps.model_id for ps in sets]
    if len(set(ids)) != len(ids):
        raise ValueError("prediction sets carry duplicate model ids")
    entries = {}
    for ps in sets:
        scores = _model_scores(ps, pool, metric, decode_cfg)
        entries[ps.model_id] = sum(scores) / len(scores)
    return WeightVector(entries)


def _fold_index_chunks(n: int, folds: int, seed: int) -> list[list[int]]:
    """Disjoint near-equal folds of range(n) from a seeded shuffle."""
    perm = rng_for(seed, "alpha-folds").permutation(n)
    base, extra = divmod(n, folds)
    chunks = []
    at = 0
    for f in range(folds):
        size = base + (1 if f < extra else 0)
        chunks.append(sorted(int(i) for i in perm[at : at + size]))
        at += size
    return chunks


def select_alpha(
    sets: Sequence[PredictionSet],
    pool: Sequence[PoolEntry],
    grid: AlphaGrid,
    metric: MetricKind,
    base_cfg: EnsembleConfig,
    seed: int,
) -> tuple[float, dict[float, float]]:
    """Out-of-fold grid search for alpha over the calibration pool.

    Returns the winning alpha (smallest on ties) and every candidate's mean
    out-of-fold score.
    """
    n = len(pool)
    if n < grid.folds:
        raise PoolTooSmall(f"pool of {n} examples cannot form {grid.folds} folds")
    folds = _fold_index_chunks(n, grid.folds, seed)

    # Per-model decoded scores are alpha- and fold-independent; compute once.
    score_cache = {ps.model_id: _model_scores(ps, pool, metric, base_cfg.decode) for ps in sets}
    preds_by_index = [[ps.get(ex.id) for ps in sets] for _, ex in pool]

    per_alpha: dict[float, float] = {}
    for alpha in grid.values:
        cfg = replace(base_cfg, alpha=alpha)
        fold_means = []
        for fold in folds:
            held_out = set(fold)
            entries = {}
            for ps in sets:
                scores = score_cache[ps.model_id]
                train = [scores[i] for i in range(n) if i not in held_out]
                entries[ps.model_id] = sum(train) / len(train)
            weights = WeightVector(entries)
            fold_total = 0.0
            for i in fold:
                _, ex = pool[i]
                answer = ensemble_predict(ex, preds_by_index[i], weights, cfg)
                fold_total += score_example(answer, ex.gold_answers, metric)
            fold_means.append(fold_total / len(fold))
        per_alpha[alpha] = sum(fold_means) / len(fold_means)

    best_alpha = grid.values[0]
    best_score = per_alpha[best_alpha]
    for alpha in grid.values[1:]:
        if per_alpha[alpha] > best_score:
            best_alpha, best_score = alpha, per_alpha[alpha]
    return best_alpha, per_alpha
