"""Command-line surface: run an export job, or build the tiny test model."""

from __future__ import annotations

import argparse
import json
import sys

from .errors import ExportError
from .export import ExportJob, export_predictions


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qaexport",
        description="Export extractive-QA model predictions in qaensemble's prediction format.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run one model over a dataset file")
    p.add_argument("--model", required=True, help="pretrained model path or identifier")
    p.add_argument("--dataset", required=True, help="gold dataset file (JSONL)")
    p.add_argument("--out", required=True, help="prediction file to write")
    p.add_argument("--max-context-tokens", type=int, default=384)
    p.add_argument("--device", default="cpu")
    p.add_argument("--model-id", help="model_id written to records (default: model basename)")
    p.add_argument("--sidecar", help="skipped-examples report path")

    p = sub.add_parser("make-test-model", help="write a tiny random pretrained QA model")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "make-test-model":
            from .testmodel import build_tiny_qa_model

            path = build_tiny_qa_model(args.out, seed=args.seed)
            print(json.dumps({"model": path}))
            return 0
        job = ExportJob(
            model_ref=args.model,
            dataset_path=args.dataset,
            output_path=args.out,
            max_context_tokens=args.max_context_tokens,
            device=args.device,
            model_id=args.model_id,
            sidecar_path=args.sidecar,
        )
        summary = export_predictions(job)
        print(
            json.dumps(
                {
                    "written": summary.written,
                    "skipped": summary.skipped,
                    "output": summary.output_path,
                    "sidecar": summary.sidecar_path,
                }
            )
        )
        return 0
    except ExportError as err:
        print(json.dumps({"error": type(err).__name__, "detail": str(err)}), file=sys.stderr)
        return 1
    except OSError as err:
        print(json.dumps({"error": type(err).__name__, "detail": str(err)}), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
