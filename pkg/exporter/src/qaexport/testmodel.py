"""Build a tiny local extractive-QA model for smoke tests and demos.

The model is a randomly initialized two-layer BERT with a real WordPiece
tokenizer over a small synthetic vocabulary, saved in the standard
pretrained layout so any `model_ref` consumer can load it from disk. Random
answers are fine for conformance testing: the exporter's contract is about
offsets, normalization and determinism, not answer quality.
"""

from __future__ import annotations

from pathlib import Path

SPECIAL_TOKENS = ("[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]")
DEFAULT_WORDS = tuple(
    [f"ctx{i}" for i in range(60)]
    + [f"ans{i}" for i in range(60)]
    + ["which", "span", "answers", "item", "of", "blue", "car", "sat"]
)


def build_tiny_qa_model(out_dir: str | Path, seed: int = 0, words=DEFAULT_WORDS) -> str:
    """Write a loadable pretrained QA model to out_dir and return the path."""
    import torch
    from transformers import BertConfig, BertForQuestionAnswering, BertTokenizerFast

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    vocab_path = out_dir / "vocab.txt"
    vocab = list(SPECIAL_TOKENS) + list(dict.fromkeys(words))
    vocab_path.write_text("\n".join(vocab) + "\n", encoding="utf-8")
    tokenizer = BertTokenizerFast(vocab_file=str(vocab_path))

    torch.manual_seed(seed)
    config = BertConfig(
        vocab_size=len(vocab),
        hidden_size=32,
        num_hidden_layers=2,
        num_attention_heads=2,
        intermediate_size=64,
        max_position_embeddings=192,
    )
    model = BertForQuestionAnswering(config)
    tokenizer.save_pretrained(out_dir)
    model.save_pretrained(out_dir)
    return str(out_dir)
