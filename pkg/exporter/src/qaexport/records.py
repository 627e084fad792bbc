"""Reading gold datasets and writing prediction records.

Both sides of the wire contract are UTF-8 JSON Lines:

* dataset rows: {"id", "question", "context", "answers": [...]}
* prediction rows: {"model_id", "example_id",
  "tokens": [{"text", "start", "end"}, ...], "start_probs", "end_probs"}

Character offsets are Unicode scalar positions into the context string.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Iterable

from .errors import DatasetError


def read_dataset(path: str | Path) -> list[dict]:
    """Load and minimally validate a gold dataset file."""
    rows = []
    seen = set()
    with open(path, encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                row = json.loads(line)
            except json.JSONDecodeError as err:
                raise DatasetError(f"{path}:{line_no}: invalid JSON: {err.msg}") from None
            for field, kind in (("id", str), ("question", str), ("context", str), ("answers", list)):
                if not isinstance(row.get(field), kind):
                    raise DatasetError(f"{path}:{line_no}: bad or missing field {field!r}")
            if row["id"] in seen:
                raise DatasetError(f"{path}:{line_no}: duplicate example id {row['id']!r}")
            seen.add(row["id"])
            rows.append(row)
    return rows


def write_predictions(records: Iterable[dict], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for record in records:
            handle.write(json.dumps(record, ensure_ascii=False, separators=(",", ":")) + "\n")


def write_sidecar(skipped: Iterable[dict], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for entry in skipped:
            handle.write(json.dumps(entry, ensure_ascii=False, separators=(",", ":")) + "\n")
