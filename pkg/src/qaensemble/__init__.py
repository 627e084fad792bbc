"""Zero-shot weighted ensembling of extractive-QA span predictions.

Base models trained on different source datasets are combined by weighting
each model's start/end span distributions with its accuracy on held-out
calibration datasets, raised to a tunable exponent. The package also ships
word-level F1 / exact-match scoring, a span decoder, a deterministic
multi-domain simulator, JSONL file formats and a CLI.
"""

from .core import (
    Dataset,
    Example,
    ModelPrediction,
    PredictionSet,
    RunManifest,
    SpanDistribution,
    Token,
    WeightVector,
    span_to_text,
    validate_prediction,
)
from .decoder import DecodeConfig, decode_span, decode_to_text
from .ensemble import (
    EnsembleConfig,
    combine_mean,
    combine_weighted,
    ensemble_predict,
    simple_ensemble_predict,
)
from .estimator import WeightedSpanEnsemble
from .formats import (
    RunReport,
    load_answers,
    load_dataset,
    load_predictions,
    load_report,
    load_sim_config,
    load_weights,
    save_answers,
    save_dataset,
    save_predictions,
    save_report,
    save_weights,
)
from .metrics import (
    MetricKind,
    dataset_accuracy,
    exact_match,
    normalize_answer,
    score_example,
    token_f1,
)
from .simulator import DomainSpec, SimConfig, SkillMatrix, generate_corpus, generate_predictions
from .weighting import (
    AlphaGrid,
    CalibrationBundle,
    estimate_weights,
    sample_calibration,
    select_alpha,
)

__version__ = "0.1.0"
