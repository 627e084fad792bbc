"""Run a pretrained extractive-QA model and emit prediction files.

One encoding window per example: examples whose context tokenization exceeds
the cap (or the model's position budget) are skipped and listed in a sidecar
report instead of being truncated, so every emitted distribution covers the
full context. Start/end logits over the kept context tokens are softmaxed in
float64, which keeps each emitted vector summing to 1 well within 1e-6.
Inference runs example by example in sorted-id order with gradients off, so
two runs of the same job write byte-identical files.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import torch

from .errors import ModelLoadError, OffsetRecoveryError
from .records import read_dataset, write_predictions, write_sidecar


@dataclass(frozen=True)
class ExportJob:
    model_ref: str
    dataset_path: str
    output_path: str
    max_context_tokens: int = 384
    device: str = "cpu"
    model_id: str | None = None  # defaults to the model_ref's basename
    sidecar_path: str | None = None  # defaults to <output_path>.skipped.jsonl

    def __post_init__(self):
        if self.max_context_tokens < 1:
            raise ValueError("max_context_tokens must be at least 1")

    @property
    def resolved_model_id(self) -> str:
        if self.model_id:
            return self.model_id
        name = Path(self.model_ref).name
        return name or self.model_ref

    @property
    def resolved_sidecar_path(self) -> str:
        return self.sidecar_path or f"{self.output_path}.skipped.jsonl"


@dataclass(frozen=True)
class ExportSummary:
    written: int
    skipped: int
    output_path: str
    sidecar_path: str


def _load_runtime(job: ExportJob):
    from transformers import AutoModelForQuestionAnswering, AutoTokenizer

    try:
        tokenizer = AutoTokenizer.from_pretrained(job.model_ref)
        model = AutoModelForQuestionAnswering.from_pretrained(job.model_ref)
    except Exception as err:
        raise ModelLoadError(f"cannot load {job.model_ref!r}: {err}") from err
    if not getattr(tokenizer, "is_fast", False):
        raise OffsetRecoveryError(
            f"tokenizer for {job.model_ref!r} does not expose character offsets"
        )
    model.to(job.device)
    model.eval()
    return tokenizer, model


def _context_token_indices(encoding, context: str):
    """Positions of usable context tokens: in-context, non-empty, monotone."""
    sequence_ids = encoding.sequence_ids(0)
    offsets = encoding["offset_mapping"][0].tolist()
    keep = []
    prev_end = 0
    for position, (seq_id, (start, end)) in enumerate(zip(sequence_ids, offsets)):
        if seq_id != 1:
            continue
        if not (0 <= start < end <= len(context)):
            continue
        if start < prev_end:
            continue
        keep.append((position, start, end))
        prev_end = end
    return keep


def export_predictions(job: ExportJob) -> ExportSummary:
    """Write one validated prediction record per exportable example."""
    tokenizer, model = _load_runtime(job)
    max_positions = getattr(model.config, "max_position_embeddings", None)

    records = []
    skipped = []
    for row in sorted(read_dataset(job.dataset_path), key=lambda r: r["id"]):
        context = row["context"]
        encoding = tokenizer(
            row["question"],
            context,
            return_offsets_mapping=True,
            return_tensors="pt",
            truncation=False,
        )
        total_len = encoding["input_ids"].shape[1]
        kept = _context_token_indices(encoding, context)
        if not kept:
            skipped.append({"example_id": row["id"], "reason": "no context tokens"})
            continue
        if len(kept) > job.max_context_tokens:
            skipped.append(
                {
                    "example_id": row["id"],
                    "reason": f"context has {len(kept)} tokens, cap is {job.max_context_tokens}",
                }
            )
            continue
        if max_positions is not None and total_len > max_positions:
            skipped.append(
                {
                    "example_id": row["id"],
                    "reason": f"encoded sequence of {total_len} exceeds model positions {max_positions}",
                }
            )
            continue

        inputs = {
            k: v.to(job.device)
            for k, v in encoding.items()
            if k in ("input_ids", "attention_mask", "token_type_ids")
        }
        with torch.no_grad():
            output = model(**inputs)
        positions = torch.tensor([p for p, _, _ in kept])
        start_probs = torch.softmax(output.start_logits[0][positions].double(), dim=-1)
        end_probs = torch.softmax(output.end_logits[0][positions].double(), dim=-1)
        records.append(
            {
                "model_id": job.resolved_model_id,
                "example_id": row["id"],
                "tokens": [
                    {"text": context[start:end], "start": start, "end": end}
                    for _, start, end in kept
                ],
                "start_probs": start_probs.tolist(),
                "end_probs": end_probs.tolist(),
            }
        )

    write_predictions(records, job.output_path)
    write_sidecar(skipped, job.resolved_sidecar_path)
    return ExportSummary(
        written=len(records),
        skipped=len(skipped),
        output_path=str(job.output_path),
        sidecar_path=job.resolved_sidecar_path,
    )
