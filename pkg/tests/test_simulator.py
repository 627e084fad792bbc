import pytest

from qaensemble.core import validate_prediction
from qaensemble.decoder import DecodeConfig, decode_to_text
from qaensemble.errors import ConfigMismatch, InvalidRange
from qaensemble.metrics import MetricKind, dataset_accuracy
from qaensemble.simulator import (
    DomainSpec,
    SimConfig,
    SkillMatrix,
    generate_corpus,
    generate_predictions,
)


def _config(domains, models, skills, *, seed=0, noise_seed=0, ctx=(30, 40), ans=(2, 2), sharpness=64.0):
    return SimConfig(
        domains=tuple(DomainSpec(n, c) for n, c in domains),
        models=tuple(models),
        skill=SkillMatrix(skills=skills, sharpness=sharpness, noise_seed=noise_seed),
        vocab_size=40,
        context_len_range=ctx,
        answer_len_range=ans,
        seed=seed,
    )


def _decoded_accuracy(dataset, pset, metric, max_span_len=30):
    answers = {
        ex.id: decode_to_text(ex, pset.get(ex.id), DecodeConfig(max_span_len))
        for ex in dataset.examples
    }
    return dataset_accuracy(answers, dataset, metric)


class TestGenerateCorpus:
    def test_planted_span_structure(self):
        cfg = _config([("d", 1)], ["m"], {"m": {"d": 1.0}}, ctx=(5, 5), ans=(2, 2))
        corpus = generate_corpus(cfg)
        ex = corpus["d"].examples[0]
        words = ex.context.split(" ")
        assert len(words) == 5
        answer = ex.gold_answers[0]
        assert answer in ex.context
        assert len(answer.split(" ")) == 2
        assert all(w.startswith("ans") for w in answer.split(" "))

    def test_answer_words_disjoint_from_filler(self):
        cfg = _config([("d", 20)], ["m"], {"m": {"d": 0.5}}, ctx=(10, 15), ans=(1, 3))
        corpus = generate_corpus(cfg)
        for ex in corpus["d"].examples:
            answer_words = set(ex.gold_answers[0].split(" "))
            other = [w for w in ex.context.split(" ") if w not in answer_words]
            assert all(w.startswith("ctx") for w in other)

    def test_same_seed_identical(self):
        cfg = _config([("d", 25)], ["m"], {"m": {"d": 0.5}})
        assert generate_corpus(cfg) == generate_corpus(cfg)

    def test_invalid_range(self):
        with pytest.raises(InvalidRange):
            _config([("d", 1)], ["m"], {"m": {"d": 1.0}}, ctx=(5, 5), ans=(6, 6))


class TestGeneratePredictions:
    def test_perfect_skill_scores_one(self):
        cfg = _config([("d", 60)], ["m"], {"m": {"d": 1.0}})
        corpus = generate_corpus(cfg)
        preds = generate_predictions(corpus, cfg)
        assert _decoded_accuracy(corpus["d"], preds["m"], MetricKind.TOKEN_F1) == 1.0

    def test_zero_skill_scores_near_zero(self):
        cfg = _config([("d", 400)], ["m"], {"m": {"d": 0.0}})
        corpus = generate_corpus(cfg)
        preds = generate_predictions(corpus, cfg)
        assert _decoded_accuracy(corpus["d"], preds["m"], MetricKind.TOKEN_F1) < 0.05

    def test_predictions_validate_without_renormalization(self):
        cfg = _config([("d", 30)], ["m"], {"m": {"d": 0.7}})
        corpus = generate_corpus(cfg)
        preds = generate_predictions(corpus, cfg)
        for ex in corpus["d"].examples:
            p = preds["m"].get(ex.id)
            assert validate_prediction(p, ex) is p

    def test_shared_tokenization_across_models(self):
        cfg = _config(
            [("d", 10)],
            ["m1", "m2"],
            {"m1": {"d": 0.3}, "m2": {"d": 0.9}},
        )
        corpus = generate_corpus(cfg)
        preds = generate_predictions(corpus, cfg)
        for ex in corpus["d"].examples:
            assert preds["m1"].get(ex.id).tokens == preds["m2"].get(ex.id).tokens

    def test_em_accuracy_tracks_skill(self):
        skill = 0.55
        cfg = _config([("d", 2000)], ["m"], {"m": {"d": skill}}, noise_seed=5)
        corpus = generate_corpus(cfg)
        preds = generate_predictions(corpus, cfg)
        em = _decoded_accuracy(corpus["d"], preds["m"], MetricKind.EXACT_MATCH)
        se = (skill * (1 - skill) / 2000) ** 0.5
        assert abs(em - skill) <= 3 * se

    def test_seed_offset_models_statistically_equal(self):
        skills = {"m1": {"d": 0.5}, "m2": {"d": 0.5}}
        cfg = _config([("d", 2000)], ["m1", "m2"], skills, noise_seed=11)
        corpus = generate_corpus(cfg)
        preds = generate_predictions(corpus, cfg)
        assert any(
            preds["m1"].get(ex.id).dist != preds["m2"].get(ex.id).dist
            for ex in corpus["d"].examples
        )
        acc1 = _decoded_accuracy(corpus["d"], preds["m1"], MetricKind.TOKEN_F1)
        acc2 = _decoded_accuracy(corpus["d"], preds["m2"], MetricKind.TOKEN_F1)
        assert abs(acc1 - acc2) <= 0.03

    def test_corpus_config_mismatch(self):
        cfg = _config([("d", 10)], ["m"], {"m": {"d": 0.5}})
        other = _config([("d", 10)], ["m"], {"m": {"d": 0.5}}, seed=99)
        corpus = generate_corpus(cfg)
        with pytest.raises(ConfigMismatch):
            generate_predictions(corpus, other)

    def test_missing_skill_entry(self):
        cfg = _config([("d", 5)], ["m1", "m2"], {"m1": {"d": 0.5}, "m2": {}})
        corpus = generate_corpus(cfg)
        with pytest.raises(ConfigMismatch):
            generate_predictions(corpus, cfg)

    def test_sharpness_must_guarantee_decode(self):
        cfg = _config([("d", 5)], ["m"], {"m": {"d": 1.0}}, sharpness=0.5)
        corpus = generate_corpus(cfg)
        with pytest.raises(ConfigMismatch):
            generate_predictions(corpus, cfg)

    def test_skill_matrix_invariants(self):
        with pytest.raises(ValueError):
            SkillMatrix({"m": {"d": 1.5}})
        with pytest.raises(ValueError):
            SkillMatrix({"m": {"d": 0.5}}, sharpness=0.0)
