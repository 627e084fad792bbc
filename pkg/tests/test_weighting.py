import pytest

from qaensemble.core import Dataset, Example, ModelPrediction, PredictionSet, SpanDistribution, Token
from qaensemble.ensemble import EnsembleConfig
from qaensemble.errors import EmptyDataset, MissingPrediction, PoolTooSmall
from qaensemble.metrics import MetricKind
from qaensemble.weighting import (
    AlphaGrid,
    CalibrationBundle,
    _fold_index_chunks,
    estimate_weights,
    sample_calibration,
    select_alpha,
)

CONTEXT = "aa bb cc"
TOKENS = (Token("aa", 0, 2), Token("bb", 3, 5), Token("cc", 6, 8))


def _example(eid):
    return Example(eid, "q", CONTEXT, ("aa",))


def _delta_pred(model_id, eid, token_index):
    start = [0.0, 0.0, 0.0]
    end = [0.0, 0.0, 0.0]
    start[token_index] = 1.0
    end[token_index] = 1.0
    return ModelPrediction(model_id, eid, TOKENS, SpanDistribution(start, end))


def _pset(model_id, hits):
    """hits: map example id -> True (decode gold) / False (decode wrong token)."""
    preds = {
        eid: _delta_pred(model_id, eid, 0 if hit else 2) for eid, hit in hits.items()
    }
    return PredictionSet(model_id, preds)


class TestSampleCalibration:
    def _dataset(self, name, size):
        return Dataset(name, tuple(_example(f"{name}-{i:04d}") for i in range(size)))

    def test_cap_exceeds_size_takes_all(self):
        ds = self._dataset("d1", 40)
        pool = sample_calibration(CalibrationBundle((ds,), per_dataset_cap=5000, seed=1))
        assert len(pool) == 40
        assert {ex.id for _, ex in pool} == {ex.id for ex in ds.examples}

    def test_pool_sorted_by_dataset_then_id(self):
        d1 = self._dataset("beta", 10)
        d2 = self._dataset("alph", 10)
        pool = sample_calibration(CalibrationBundle((d1, d2), per_dataset_cap=5, seed=3))
        keys = [(name, ex.id) for name, ex in pool]
        assert keys == sorted(keys)
        assert len(pool) == 10

    def test_deterministic(self):
        ds = self._dataset("d1", 200)
        bundle = CalibrationBundle((ds,), per_dataset_cap=50, seed=9)
        first = sample_calibration(bundle)
        second = sample_calibration(bundle)
        assert [ex.id for _, ex in first] == [ex.id for _, ex in second]

    def test_different_seeds_differ(self):
        ds = self._dataset("d1", 200)
        a = sample_calibration(CalibrationBundle((ds,), per_dataset_cap=50, seed=1))
        b = sample_calibration(CalibrationBundle((ds,), per_dataset_cap=50, seed=2))
        assert [ex.id for _, ex in a] != [ex.id for _, ex in b]

    def test_empty_dataset(self):
        with pytest.raises(EmptyDataset):
            sample_calibration(CalibrationBundle((Dataset("d", ()),), per_dataset_cap=5, seed=0))

    def test_bundle_invariants(self):
        ds = self._dataset("d1", 5)
        with pytest.raises(ValueError):
            CalibrationBundle((), per_dataset_cap=5, seed=0)
        with pytest.raises(ValueError):
            CalibrationBundle((ds,), per_dataset_cap=0, seed=0)


class TestEstimateWeights:
    def test_hand_computed_mean(self):
        ids = [f"e{i}" for i in range(5)]
        pool = [("d", _example(eid)) for eid in ids]
        pset = _pset("m1", {"e0": True, "e1": True, "e2": False, "e3": False, "e4": True})
        w = estimate_weights([pset], pool, MetricKind.TOKEN_F1)
        assert w["m1"] == 0.6

    def test_perfect_model(self):
        ids = [f"e{i}" for i in range(4)]
        pool = [("d", _example(eid)) for eid in ids]
        pset = _pset("m1", {eid: True for eid in ids})
        assert estimate_weights([pset], pool, MetricKind.TOKEN_F1)["m1"] == 1.0

    def test_permutation_invariant(self):
        ids = [f"e{i}" for i in range(6)]
        pool = [("d", _example(eid)) for eid in ids]
        pset = _pset("m1", {eid: i % 2 == 0 for i, eid in enumerate(ids)})
        w1 = estimate_weights([pset], pool, MetricKind.TOKEN_F1)
        w2 = estimate_weights([pset], pool[::-1], MetricKind.TOKEN_F1)
        assert w1.entries == w2.entries

    def test_missing_prediction(self):
        pool = [("d", _example("e0")), ("d", _example("e1"))]
        pset = _pset("m1", {"e0": True})
        with pytest.raises(MissingPrediction):
            estimate_weights([pset], pool, MetricKind.TOKEN_F1)


class TestFoldPartition:
    @pytest.mark.parametrize("n,folds", [(10, 2), (11, 3), (600, 7), (5, 5)])
    def test_disjoint_cover_near_equal(self, n, folds):
        chunks = _fold_index_chunks(n, folds, seed=13)
        flat = [i for chunk in chunks for i in chunk]
        assert sorted(flat) == list(range(n))
        sizes = [len(c) for c in chunks]
        assert max(sizes) - min(sizes) <= 1


class TestSelectAlpha:
    def _fixture(self, n_examples=12):
        ids = [f"e{i:02d}" for i in range(n_examples)]
        pool = [("d", _example(eid)) for eid in ids]
        good = _pset("good", {eid: i % 4 != 0 for i, eid in enumerate(ids)})
        bad = _pset("bad", {eid: i % 4 == 0 for i, eid in enumerate(ids)})
        return pool, [good, bad]

    def test_singleton_grid(self):
        pool, sets = self._fixture()
        alpha, scores = select_alpha(
            pool=pool,
            sets=sets,
            grid=AlphaGrid((3.0,), folds=3),
            metric=MetricKind.TOKEN_F1,
            base_cfg=EnsembleConfig(),
            seed=0,
        )
        assert alpha == 3.0
        assert set(scores) == {3.0}

    def test_single_model_alpha_independent(self):
        ids = [f"e{i:02d}" for i in range(9)]
        pool = [("d", _example(eid)) for eid in ids]
        solo = _pset("solo", {eid: i % 2 == 0 for i, eid in enumerate(ids)})
        alpha, scores = select_alpha(
            [solo], pool, AlphaGrid((1.0, 2.0, 3.0, 4.0), folds=3), MetricKind.TOKEN_F1, EnsembleConfig(), seed=1
        )
        assert alpha == 1.0  # ties break to the smallest value
        values = list(scores.values())
        assert max(values) - min(values) <= 1e-12

    def test_returns_grid_member_with_matching_score(self):
        pool, sets = self._fixture()
        grid = AlphaGrid((1.0, 2.0, 3.0, 4.0), folds=4)
        alpha, scores = select_alpha(sets, pool, grid, MetricKind.TOKEN_F1, EnsembleConfig(), seed=2)
        assert alpha in grid.values
        assert scores[alpha] == max(scores.values())

    def test_pool_too_small(self):
        pool, sets = self._fixture(n_examples=3)
        with pytest.raises(PoolTooSmall):
            select_alpha(sets, pool, AlphaGrid(folds=5), MetricKind.TOKEN_F1, EnsembleConfig(), seed=0)

    def test_grid_invariants(self):
        with pytest.raises(ValueError):
            AlphaGrid(())
        with pytest.raises(ValueError):
            AlphaGrid((2.0, 1.0))
        with pytest.raises(ValueError):
            AlphaGrid((1.0, 1.0))
        with pytest.raises(ValueError):
            AlphaGrid((-1.0, 2.0))
        with pytest.raises(ValueError):
            AlphaGrid((1.0,), folds=1)
