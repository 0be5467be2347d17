"""Newline-delimited UTF-8 record I/O shared by every pipeline."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Iterable, Iterator, Mapping


def dumps_canonical(obj: Any) -> str:
    """Serialize with sorted keys and compact separators.

    Canonical form makes serialized artifacts (training plans, session
    events) byte-comparable across runs.
    """
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def read_jsonl(path: str | Path) -> Iterator[dict]:
    """Yield one parsed record per non-blank line."""
    with open(path, "r", encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                yield json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}:{line_no}: malformed record: {exc}") from exc


def write_jsonl(path: str | Path, rows: Iterable[Mapping[str, Any]]) -> int:
    """Write records one per line; returns the number written."""
    count = 0
    with open(path, "w", encoding="utf-8") as handle:
        for row in rows:
            handle.write(dumps_canonical(row))
            handle.write("\n")
            count += 1
    return count
