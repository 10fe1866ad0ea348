"""Canonical JSON serialization plus the lenient reader used on model output."""

import json
import math
from pathlib import Path
from typing import Any, Iterator

_FENCE_OPEN = "```"


def quantize_floats(value: Any) -> Any:
    """Round every float in a JSON value to at most 3 decimal places.

    Integral results collapse to int so 12.0 serializes as 12.
    """
    if isinstance(value, bool):
        return value
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ValueError(f"non-finite float {value!r} is not serializable")
        rounded = round(value, 3)
        if rounded == int(rounded):
            return int(rounded)
        return rounded
    if isinstance(value, dict):
        return {k: quantize_floats(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [quantize_floats(v) for v in value]
    return value


def dumps_canonical(value: Any, sort_keys: bool = False) -> str:
    """Serialize to the byte-stable form used for every on-disk artifact:

    2-space indent, UTF-8 (no \\u escapes), floats quantized to 3 decimals,
    trailing newline. Key order is preserved unless sort_keys is set;
    document models sort, everything else keeps insertion order because
    property order is data (mapping order, quartile buckets).
    """
    text = json.dumps(
        quantize_floats(value),
        indent=2,
        ensure_ascii=False,
        sort_keys=sort_keys,
    )
    return text + "\n"


def write_json(path: str | Path, value: Any, sort_keys: bool = False) -> None:
    Path(path).write_text(dumps_canonical(value, sort_keys=sort_keys), encoding="utf-8")


def read_json(path: str | Path) -> Any:
    return json.loads(Path(path).read_text(encoding="utf-8"))


def append_jsonl(path: str | Path, record: dict) -> None:
    with open(path, "a", encoding="utf-8") as fh:
        fh.write(json.dumps(record, ensure_ascii=False, sort_keys=True) + "\n")


def iter_jsonl(path: str | Path) -> Iterator[dict]:
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                yield json.loads(line)


def _balanced_span(text: str, start: int) -> str | None:
    """Return the balanced container starting at text[start], or None."""
    close = "}" if text[start] == "{" else "]"
    depth = 0
    in_string = False
    escaped = False
    for end in range(start, len(text)):
        c = text[end]
        if in_string:
            if escaped:
                escaped = False
            elif c == "\\":
                escaped = True
            elif c == '"':
                in_string = False
            continue
        if c == '"':
            in_string = True
        elif c in "{[":
            depth += 1
        elif c in "}]":
            depth -= 1
            if depth == 0:
                return text[start : end + 1] if c == close else None
    return None


def _balanced_candidates(text: str) -> Iterator[str]:
    """Yield complete top-level {...} / [...] substrings, leftmost first."""
    pos = 0
    attempts = 0
    while pos < len(text) and attempts < 64:
        ch = text[pos]
        if ch in "{[":
            attempts += 1
            span = _balanced_span(text, pos)
            if span is not None:
                yield span
        pos += 1


def parse_lenient(text: str) -> Any | None:
    """Parse model output as JSON, tolerating markdown fences and prose.

    Tries, in order: the raw text; each fenced code block; the first
    balanced {...} or [...] region. Returns None when nothing parses.
    """
    if not isinstance(text, str) or not text.strip():
        return None
    try:
        return json.loads(text)
    except ValueError:
        pass
    if _FENCE_OPEN in text:
        parts = text.split(_FENCE_OPEN)
        # odd indices are fenced bodies; strip an optional language tag line
        for body in parts[1:-1:2] if len(parts) >= 3 else []:
            body = body.split("\n", 1)[1] if "\n" in body else body
            try:
                return json.loads(body)
            except ValueError:
                continue
    for candidate in _balanced_candidates(text):
        try:
            return json.loads(candidate)
        except ValueError:
            continue
    return None
