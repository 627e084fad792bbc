import json
import os

import pytest

os.environ.setdefault("HF_HUB_DISABLE_PROGRESS_BARS", "1")
os.environ.setdefault("TRANSFORMERS_VERBOSITY", "error")

from qaexport.testmodel import build_tiny_qa_model


@pytest.fixture(scope="session")
def tiny_model(tmp_path_factory):
    return build_tiny_qa_model(tmp_path_factory.mktemp("model"), seed=7)


def make_toy_rows(n=10, context_words=8):
    rows = []
    for i in range(n):
        words = [f"ctx{(i * 3 + k) % 50}" for k in range(context_words)]
        at = 3
        words[at] = f"ans{i % 40}"
        words[at + 1] = f"ans{(i + 7) % 40}"
        if i == 4:
            words[0] = "zzz9"  # out-of-vocabulary word: offsets must still hold
        rows.append(
            {
                "id": f"toy-{i:03d}",
                "question": f"which span answers item {i} of toy",
                "context": " ".join(words),
                "answers": [" ".join(words[at : at + 2])],
            }
        )
    return rows


def write_rows(rows, path):
    with open(path, "w", encoding="utf-8") as handle:
        for row in rows:
            handle.write(json.dumps(row, ensure_ascii=False) + "\n")


@pytest.fixture(scope="session")
def toy_dataset(tmp_path_factory):
    path = tmp_path_factory.mktemp("data") / "toy.jsonl"
    write_rows(make_toy_rows(), path)
    return path
