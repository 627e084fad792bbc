"""Synthetic multi-domain corpora and prediction sets with controlled skill.

Generation scheme (also documented in the README):

* Contexts are single-space-joined synthetic words, so character offsets are
  implied by the whitespace tokenization that every simulated model shares.
  Non-answer positions draw words "ctx<k>" and the planted gold span draws
  words "ans<k>" (k < vocab_size). The two word classes are disjoint, so a
  wrong span shares words with the gold answer only when their token
  positions actually overlap.
* A model with skill p on a domain concentrates start/end mass on the gold
  endpoints with probability p, otherwise on a uniformly chosen wrong span.
  The concentrated endpoint receives sharpness / (sharpness + T - 1) of the
  mass and every other position 1 / (sharpness + T - 1); with sharpness > 1
  the chosen span always wins product decoding.
* Every random draw comes from a PCG64 stream keyed per example:
  (seed, "corpus", domain, index) for text and
  (noise_seed, "prediction", model, domain, index) for distributions,
  so generation is order-independent and reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from ._rng import rng_for
from .core import Dataset, Example, ModelPrediction, PredictionSet, SpanDistribution, Token
from .errors import ConfigMismatch, InvalidRange


@dataclass(frozen=True)
class SkillMatrix:
    """P(model concentrates on the gold span), per model and domain."""

    skills: Mapping[str, Mapping[str, float]]
    sharpness: float = 64.0
    noise_seed: int = 0

    def __post_init__(self):
        skills = {m: dict(d) for m, d in dict(self.skills).items()}
        for model_id, per_domain in skills.items():
            for domain, p in per_domain.items():
                if not 0.0 <= p <= 1.0:
                    raise ValueError(
                        f"skill for ({model_id!r}, {domain!r}) must be in [0, 1], got {p!r}"
                    )
        if not self.sharpness > 0:
            raise ValueError("sharpness must be positive")
        object.__setattr__(self, "skills", skills)

    def skill(self, model_id: str, domain: str) -> float:
        try:
            return self.skills[model_id][domain]
        except KeyError:
            raise ConfigMismatch(f"no skill entry for ({model_id!r}, {domain!r})") from None


@dataclass(frozen=True)
class DomainSpec:
    name: str
    examples: int

    def __post_init__(self):
        if not self.name:
            raise ValueError("domain name must be non-empty")
        if self.examples < 1:
            raise ValueError(f"domain {self.name!r} needs at least one example")


@dataclass(frozen=True)
class SimConfig:
    """Shape of the synthetic corpus and of the simulated models."""

    domains: tuple[DomainSpec, ...]
    models: tuple[str, ...]
    skill: SkillMatrix
    vocab_size: int = 50
    context_len_range: tuple[int, int] = (20, 40)
    answer_len_range: tuple[int, int] = (1, 3)
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "domains", tuple(self.domains))
        object.__setattr__(self, "models", tuple(self.models))
        names = [d.name for d in self.domains]
        if not names:
            raise ValueError("at least one domain is required")
        if len(set(names)) != len(names):
            raise ValueError("domain names must be distinct")
        if not self.models:
            raise ValueError("at least one model is required")
        if len(set(self.models)) != len(self.models):
            raise ValueError("model ids must be distinct")
        if self.vocab_size < 1:
            raise ValueError("vocab_size must be at least 1")
        cmin, cmax = self.context_len_range
        amin, amax = self.answer_len_range
        if not 1 <= cmin <= cmax:
            raise InvalidRange(f"context_len_range {self.context_len_range!r} is empty")
        if not 1 <= amin <= amax:
            raise InvalidRange(f"answer_len_range {self.answer_len_range!r} is empty")
        if amax > cmin:
            raise InvalidRange(
                f"answers up to {amax} tokens cannot fit every context of >= {cmin} tokens"
            )


def _example_layout(cfg: SimConfig, domain: str, index: int):
    """Context length, answer span and word indices for one example."""
    rng = rng_for(cfg.seed, "corpus", domain, index)
    length = int(rng.integers(cfg.context_len_range[0], cfg.context_len_range[1] + 1))
    ans_len = int(rng.integers(cfg.answer_len_range[0], cfg.answer_len_range[1] + 1))
    ans_pos = int(rng.integers(0, length - ans_len + 1))
    filler_ids = rng.integers(0, cfg.vocab_size, size=length)
    answer_ids = rng.integers(0, cfg.vocab_size, size=ans_len)
    return length, ans_len, ans_pos, filler_ids, answer_ids


def _example_words(cfg: SimConfig, domain: str, index: int):
    length, ans_len, ans_pos, filler_ids, answer_ids = _example_layout(cfg, domain, index)
    words = [f"ctx{k}" for k in filler_ids]
    words[ans_pos : ans_pos + ans_len] = [f"ans{k}" for k in answer_ids]
    return words, ans_pos, ans_len


def generate_corpus(cfg: SimConfig) -> dict[str, Dataset]:
    """One deterministic dataset per domain, each answer a planted span."""
    corpus = {}
    for dom in cfg.domains:
        examples = []
        for index in range(dom.examples):
            words, ans_pos, ans_len = _example_words(cfg, dom.name, index)
            answer = " ".join(words[ans_pos : ans_pos + ans_len])
            examples.append(
                Example(
                    id=f"{dom.name}-{index:06d}",
                    question=f"which span answers item {index} of {dom.name}",
                    context=" ".join(words),
                    gold_answers=(answer,),
                )
            )
        corpus[dom.name] = Dataset(dom.name, tuple(examples))
    return corpus


def _whitespace_tokens(context: str) -> tuple[Token, ...]:
    tokens = []
    at = 0
    for word in context.split(" "):
        tokens.append(Token(word, at, at + len(word)))
        at += len(word) + 1
    return tuple(tokens)


def _wrong_span(rng: np.random.Generator, count: int, ans_range: tuple[int, int], gold: tuple[int, int]):
    amin, amax = ans_range
    for _ in range(64):
        length = int(rng.integers(amin, amax + 1))
        start = int(rng.integers(0, count - length + 1))
        span = (start, start + length - 1)
        if span != gold:
            return span
    # Rejection failed (tiny contexts); enumerate the alternatives.
    candidates = [
        (s, s + ln - 1)
        for ln in range(amin, amax + 1)
        for s in range(count - ln + 1)
        if (s, s + ln - 1) != gold
    ]
    if not candidates:
        return gold  # degenerate context with a single possible span
    return candidates[int(rng.integers(0, len(candidates)))]


def _concentrated(count: int, position: int, sharpness: float) -> np.ndarray:
    vec = np.ones(count)
    vec[position] = sharpness
    return vec / vec.sum()


def generate_predictions(corpus: Mapping[str, Dataset], cfg: SimConfig) -> dict[str, PredictionSet]:
    """Per-model prediction sets over the corpus, with accuracy set by skill."""
    names = {d.name for d in cfg.domains}
    if set(corpus) != names:
        raise ConfigMismatch(
            f"corpus domains {sorted(corpus)} do not match config domains {sorted(names)}"
        )
    for dom in cfg.domains:
        if len(corpus[dom.name]) != dom.examples:
            raise ConfigMismatch(
                f"domain {dom.name!r} has {len(corpus[dom.name])} examples, expected {dom.examples}"
            )
    if cfg.skill.sharpness <= 1.0:
        raise ConfigMismatch("sharpness must exceed 1 so the chosen span wins decoding")
    for model_id in cfg.models:
        for dom in cfg.domains:
            cfg.skill.skill(model_id, dom.name)  # fail fast on missing entries

    per_model: dict[str, dict[str, ModelPrediction]] = {m: {} for m in cfg.models}
    for dom in cfg.domains:
        dataset = corpus[dom.name]
        for index, example in enumerate(dataset.examples):
            words, ans_pos, ans_len = _example_words(cfg, dom.name, index)
            if example.context != " ".join(words):
                raise ConfigMismatch(
                    f"example {example.id!r} was not generated by this config"
                )
            tokens = _whitespace_tokens(example.context)
            count = len(tokens)
            gold = (ans_pos, ans_pos + ans_len - 1)
            for model_id in cfg.models:
                rng = rng_for(cfg.skill.noise_seed, "prediction", model_id, dom.name, index)
                hit = rng.random() < cfg.skill.skill(model_id, dom.name)
                span = gold if hit else _wrong_span(rng, count, cfg.answer_len_range, gold)
                dist = SpanDistribution(
                    _concentrated(count, span[0], cfg.skill.sharpness),
                    _concentrated(count, span[1], cfg.skill.sharpness),
                )
                per_model[model_id][example.id] = ModelPrediction(
                    model_id, example.id, tokens, dist
                )
    return {m: PredictionSet(m, preds) for m, preds in per_model.items()}
