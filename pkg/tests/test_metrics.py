import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qaensemble.core import Dataset, Example
from qaensemble.errors import EmptyGoldSet, MissingPrediction
from qaensemble.metrics import (
    MetricKind,
    dataset_accuracy,
    exact_match,
    normalize_answer,
    score_example,
    token_f1,
)


class TestNormalize:
    def test_articles_punctuation_case(self):
        assert normalize_answer("The Cat!") == "cat"

    def test_empty(self):
        assert normalize_answer("") == ""

    def test_all_articles(self):
        assert normalize_answer("a an the") == ""

    def test_unicode_punctuation(self):
        assert normalize_answer("«quoted»") == "quoted"
        assert normalize_answer("x — y") == "x y"

    def test_ascii_symbols(self):
        assert normalize_answer("5 + 3") == "5 3"

    def test_punctuation_deleted_not_spaced(self):
        assert normalize_answer("well-known") == "wellknown"

    def test_article_inside_word_kept(self):
        assert normalize_answer("thereafter") == "thereafter"


class TestTokenF1:
    def test_identity(self):
        assert token_f1("cat sat", "cat sat") == 1.0

    def test_half_overlap(self):
        assert token_f1("red car", "blue car") == 0.5

    def test_article_removed(self):
        assert token_f1("the cat sat", "cat sat") == 1.0

    def test_both_empty(self):
        assert token_f1("", "") == 1.0

    def test_one_empty(self):
        assert token_f1("", "cat") == 0.0
        assert token_f1("cat", "") == 0.0

    def test_multiset_overlap(self):
        # {cat, cat} vs {cat}: overlap 1, P=1/2, R=1 -> 2/3
        assert token_f1("cat cat", "cat") == pytest.approx(2 / 3)

    def test_order_free(self):
        assert token_f1("sat cat", "cat sat") == 1.0


class TestExactMatch:
    def test_normalized_equal(self):
        assert exact_match("The Cat", "cat") == 1.0

    def test_distinct(self):
        assert exact_match("cat", "cats") == 0.0

    def test_empty(self):
        assert exact_match("", "") == 1.0


class TestScoreExample:
    def test_exact_member(self):
        assert score_example("cat", ["dog", "cat"], MetricKind.EXACT_MATCH) == 1.0

    def test_max_over_golds(self):
        assert score_example("red car", ["blue car", "green bike"], MetricKind.TOKEN_F1) == 0.5

    def test_empty_gold_set(self):
        with pytest.raises(EmptyGoldSet):
            score_example("x", [], MetricKind.TOKEN_F1)


def _dataset(scores_by_id):
    examples = tuple(Example(eid, "q", "gold text here", ("gold",)) for eid in scores_by_id)
    return Dataset("d", examples)


class TestDatasetAccuracy:
    def test_mean_of_scores(self):
        # EM scores 1,1,0,0,1 -> 0.6
        examples = tuple(Example(f"e{i}", "q", "ctx", ("gold",)) for i in range(5))
        ds = Dataset("d", examples)
        preds = {"e0": "gold", "e1": "gold", "e2": "x", "e3": "y", "e4": "gold"}
        assert dataset_accuracy(preds, ds, MetricKind.EXACT_MATCH) == 0.6

    def test_perfect(self):
        examples = tuple(Example(f"e{i}", "q", "ctx", ("gold",)) for i in range(4))
        ds = Dataset("d", examples)
        preds = {ex.id: "gold" for ex in examples}
        assert dataset_accuracy(preds, ds, MetricKind.TOKEN_F1) == 1.0

    def test_missing_prediction(self):
        examples = tuple(Example(f"e{i}", "q", "ctx", ("gold",)) for i in range(3))
        ds = Dataset("d", examples)
        with pytest.raises(MissingPrediction):
            dataset_accuracy({"e0": "gold", "e1": "gold"}, ds, MetricKind.TOKEN_F1)

    def test_permutation_invariant(self):
        examples = tuple(Example(f"e{i}", "q", "ctx", ("gold",)) for i in range(6))
        preds = {f"e{i}": ("gold" if i % 2 else "no") for i in range(6)}
        forward = dataset_accuracy(preds, Dataset("d", examples), MetricKind.TOKEN_F1)
        backward = dataset_accuracy(preds, Dataset("d", examples[::-1]), MetricKind.TOKEN_F1)
        assert forward == backward


words = st.lists(st.text("abcdefgh123", min_size=1, max_size=6), min_size=0, max_size=6)


@st.composite
def phrase(draw):
    return " ".join(draw(words))


class TestProperties:
    @settings(max_examples=150, derandomize=True)
    @given(a=phrase(), b=phrase())
    def test_f1_symmetric(self, a, b):
        assert token_f1(a, b) == token_f1(b, a)

    @settings(max_examples=150, derandomize=True)
    @given(a=phrase(), b=phrase())
    def test_em_implies_f1(self, a, b):
        if exact_match(a, b) == 1.0:
            assert token_f1(a, b) == 1.0
        assert exact_match(a, b) <= token_f1(a, b)

    @settings(max_examples=150, derandomize=True)
    @given(a=phrase(), b=phrase())
    def test_range(self, a, b):
        assert 0.0 <= token_f1(a, b) <= 1.0
        assert exact_match(a, b) in (0.0, 1.0)

    @settings(max_examples=150, derandomize=True)
    @given(a=phrase(), b=phrase(), data=st.data())
    def test_invariance_under_noise(self, a, b, data):
        # case flips, inserted punctuation, standalone articles, extra spaces
        noisy = a.upper()
        pos = data.draw(st.integers(0, len(noisy)))
        mark = data.draw(st.sampled_from(["!", ",", "…", "»"]))
        noisy = noisy[:pos] + mark + noisy[pos:]
        article = data.draw(st.sampled_from(["a", "an", "the"]))
        noisy = article + " " + noisy + "  "
        assert token_f1(noisy, b) == token_f1(a, b)
        assert exact_match(noisy, b) == exact_match(a, b)
