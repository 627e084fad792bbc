import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from qaensemble.estimator import WeightedSpanEnsemble
from qaensemble.metrics import MetricKind, dataset_accuracy
from qaensemble.decoder import DecodeConfig, decode_to_text
from qaensemble.simulator import DomainSpec, SimConfig, SkillMatrix, generate_corpus, generate_predictions

SIM = SimConfig(
    domains=(DomainSpec("cal-a", 60), DomainSpec("cal-b", 60), DomainSpec("target", 120)),
    models=("strong", "mid", "weak"),
    skill=SkillMatrix(
        skills={
            "strong": {"cal-a": 0.85, "cal-b": 0.8, "target": 0.7},
            "mid": {"cal-a": 0.5, "cal-b": 0.45, "target": 0.5},
            "weak": {"cal-a": 0.15, "cal-b": 0.2, "target": 0.2},
        },
        sharpness=64.0,
        noise_seed=21,
    ),
    vocab_size=40,
    context_len_range=(25, 35),
    answer_len_range=(1, 2),
    seed=20,
)


@pytest.fixture(scope="module")
def sim_data():
    corpus = generate_corpus(SIM)
    predictions = generate_predictions(corpus, SIM)
    sets = [predictions[m] for m in SIM.models]
    pool = [(n, ex) for n in ("cal-a", "cal-b") for ex in corpus[n].examples]
    return corpus, sets, pool


class TestWeightedSpanEnsemble:
    def test_params_round_trip(self):
        est = WeightedSpanEnsemble(alpha=2.0, folds=3, seed=9)
        params = est.get_params()
        assert params["alpha"] == 2.0
        assert params["folds"] == 3
        rebuilt = WeightedSpanEnsemble(**params)
        assert rebuilt.get_params() == params
        assert clone(est).get_params() == params

    def test_not_fitted(self, sim_data):
        corpus, sets, _ = sim_data
        est = WeightedSpanEnsemble()
        with pytest.raises(NotFittedError):
            est.predict(sets, corpus["target"])

    def test_fit_learns_weight_ordering(self, sim_data):
        _, sets, pool = sim_data
        est = WeightedSpanEnsemble(folds=3, seed=1).fit(sets, pool)
        assert est.weights_["strong"] > est.weights_["mid"] > est.weights_["weak"]
        assert est.alpha_ in (1.0, 2.0, 3.0, 4.0)
        assert set(est.per_alpha_scores_) == {1.0, 2.0, 3.0, 4.0}

    def test_fixed_alpha_skips_tuning(self, sim_data):
        _, sets, pool = sim_data
        est = WeightedSpanEnsemble(alpha=2.0).fit(sets, pool)
        assert est.alpha_ == 2.0
        assert est.per_alpha_scores_ == {}

    def test_predict_and_score(self, sim_data):
        corpus, sets, pool = sim_data
        target = corpus["target"]
        est = WeightedSpanEnsemble(alpha=2.0).fit(sets, pool)
        answers = est.predict(sets, target)
        assert set(answers) == {ex.id for ex in target.examples}
        ensemble_f1 = dataset_accuracy(answers, target, MetricKind.TOKEN_F1)
        assert ensemble_f1 == pytest.approx(est.score(sets, target))

        # the ensemble should not fall below the weakest base model
        weak_answers = {
            ex.id: decode_to_text(ex, sets[2].get(ex.id), DecodeConfig(30))
            for ex in target.examples
        }
        weak_f1 = dataset_accuracy(weak_answers, target, MetricKind.TOKEN_F1)
        assert ensemble_f1 > weak_f1

    def test_accepts_dataset_or_pairs(self, sim_data):
        corpus, sets, pool = sim_data
        est = WeightedSpanEnsemble(alpha=1.0)
        est.fit(sets, pool)
        by_pairs = est.weights_
        est.fit(sets, [ex for _, ex in pool])
        assert est.weights_ == by_pairs
