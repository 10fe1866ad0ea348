"""Schema discovery: ask a model what schema a seeded document implies.

The request shows the seeded document (spatial text, so table alignment
survives) and, for choice widgets, the allowed options verbatim. The
response must be one JSON object with "schema" (restricted subset) and
"instance" (the same shape with placeholder tokens at the leaves).

RuleBasedDiscoveryClient is a deterministic stand-in used by tests and
the offline pipeline: it reads the same layout grammar the synthetic
corpus emits (PART sections, SCHEDULE tables, "Label:" scalars).
"""

import json
import re
from dataclasses import dataclass
from typing import Any, Protocol

from . import placeholders
from .docmodel import DocumentModel, FieldKind
from .export import export_spatial_text
from .genpipe import DiscoveryResponse, SeedMap, apply_seed
from .jsonutil import parse_lenient

DISCOVERY_INSTRUCTIONS = """\
You are shown a form document whose fill-in fields contain placeholder
tokens (TXT_001-style text markers, ISO dates starting at 2099-01-01,
and six-digit numbers starting at 900001). Infer the extraction schema
this document implies.

Return ONE JSON object with exactly two keys:
  "schema":   a JSON Schema using only object/array/string/number nodes,
              with shared row types under "$defs" referenced by "$ref".
  "instance": an instance of that schema whose every leaf is the
              placeholder token occupying that field in the document.

Group repeated rows into arrays. Use snake_case property names derived
from the visible labels. Do not invent fields that are not in the
document. Return ONLY valid JSON."""


class DiscoveryError(ValueError):
    pass


@dataclass(frozen=True)
class ChatRequest:
    """A provider-neutral chat turn: instructions plus document payload."""

    instructions: str
    document_text: str
    image_path: str | None = None

    def as_messages(self) -> list[dict]:
        return [
            {"role": "system", "content": self.instructions},
            {"role": "user", "content": self.document_text},
        ]


class DiscoveryClient(Protocol):
    def discover(self, request: ChatRequest) -> str:
        ...


def build_discovery_request(doc: DocumentModel, seed_map: SeedMap) -> ChatRequest:
    """Seeded spatial text plus a verbatim options block for choice fields."""
    if not doc.widgets:
        raise ValueError(f"document {doc.doc_id!r} has nothing to discover")
    seeded = apply_seed(doc, seed_map)
    sections = [export_spatial_text(seeded)]
    by_id = {w.id: w for w in doc.widgets}
    options_lines = []
    for widget_id, token in seed_map.entries:
        widget = by_id[widget_id]
        if widget.field_kind is FieldKind.CHOICE:
            options_lines.append(f"{token}: {' | '.join(widget.choice_options)}")
    if options_lines:
        sections.append(
            "Allowed options for choice fields:\n" + "\n".join(options_lines)
        )
    return ChatRequest(
        instructions=DISCOVERY_INSTRUCTIONS,
        document_text="\n\n".join(sections),
    )


def parse_discovery_response(text: str) -> DiscoveryResponse:
    """Parse a model reply into schema + instance; lenient about fences."""
    parsed = parse_lenient(text)
    if not isinstance(parsed, dict):
        raise DiscoveryError("discovery reply is not a JSON object")
    if "schema" not in parsed or "instance" not in parsed:
        raise DiscoveryError('discovery reply must hold "schema" and "instance"')
    if not isinstance(parsed["schema"], dict):
        raise DiscoveryError("discovered schema must be an object")
    return DiscoveryResponse(schema=parsed["schema"], instance=parsed["instance"])


class LlmDiscoveryClient:
    """Adapter from any chat-completions client to the discovery protocol."""

    def __init__(self, chat_client):
        self._client = chat_client

    def discover(self, request: ChatRequest) -> str:
        return self._client.complete(request.as_messages())


# ---------------------------------------------------------------------------
# deterministic stand-in

_PART_RE = re.compile(r"^\s*PART \d+:\s*(.+?)\s*$")
_SCHEDULE_RE = re.compile(r"^\s*SCHEDULE [A-Z]:\s*(.+?)\s*$")
_SPLIT_RE = re.compile(r"\s{2,}")


def slugify(label: str) -> str:
    slug = re.sub(r"[^a-z0-9]+", "_", label.lower()).strip("_")
    return slug or "field"


def type_name(label: str) -> str:
    return "".join(part.capitalize() for part in slugify(label).split("_")) + "Row"


def _leaf_node(token: str, label: str) -> tuple[dict, Any]:
    kind = placeholders.classify_token(token)
    if kind == "numeric":
        return {"type": "number", "description": label}, int(token)
    return {"type": "string", "description": label}, token


class RuleBasedDiscoveryClient:
    """Reads the layout grammar of the synthetic corpus.

    Scalars look like "Label:   TOKEN"; sections open with "PART n: Title"
    and become nested objects; tables open with "SCHEDULE X: Title", then
    a header row, then one all-placeholder row per entry, and become
    arrays of a $defs row type.
    """

    def discover(self, request: ChatRequest) -> str:
        lines = request.document_text.split("\n\n")[0].split("\n")
        schema: dict = {"type": "object", "properties": {}}
        defs: dict = {}
        instance: dict = {}
        target_props = schema["properties"]
        target_inst = instance

        i = 0
        while i < len(lines):
            line = lines[i]
            part = _PART_RE.match(line)
            schedule = _SCHEDULE_RE.match(line)
            if part:
                slug = slugify(part.group(1))
                section_schema: dict = {"type": "object", "properties": {}}
                section_inst: dict = {}
                name = type_name(part.group(1)).removesuffix("Row")
                defs[name] = section_schema
                schema["properties"][slug] = {"$ref": f"#/$defs/{name}"}
                instance[slug] = section_inst
                target_props = section_schema["properties"]
                target_inst = section_inst
                i += 1
                continue
            if schedule:
                i = self._read_table(
                    lines, i, schedule.group(1), schema, defs, instance
                )
                target_props = schema["properties"]
                target_inst = instance
                continue
            scalar = self._read_scalar(line)
            if scalar:
                label, token = scalar
                node, leaf = _leaf_node(token, label)
                slug = slugify(label)
                if slug not in target_props:
                    target_props[slug] = node
                    target_inst[slug] = leaf
            i += 1

        if defs:
            schema["$defs"] = defs
        return json.dumps({"schema": schema, "instance": instance})

    @staticmethod
    def _read_scalar(line: str) -> tuple[str, str] | None:
        parts = [p for p in _SPLIT_RE.split(line.strip()) if p]
        if len(parts) < 2 or not parts[0].endswith(":"):
            return None
        token = parts[1]
        if placeholders.classify_token(token) is None:
            return None
        return parts[0][:-1].strip(), token

    def _read_table(
        self,
        lines: list[str],
        start: int,
        title: str,
        schema: dict,
        defs: dict,
        instance: dict,
    ) -> int:
        i = start + 1
        while i < len(lines) and not lines[i].strip():
            i += 1
        if i >= len(lines):
            return i
        headers = [h for h in _SPLIT_RE.split(lines[i].strip()) if h]
        if len(headers) < 2 or any(
            placeholders.classify_token(h) for h in headers
        ):
            return start + 1  # not a table after all
        i += 1
        rows = []
        while i < len(lines):
            cells = [c for c in _SPLIT_RE.split(lines[i].strip()) if c]
            if len(cells) != len(headers) or not all(
                placeholders.classify_token(c) for c in cells
            ):
                break
            rows.append(cells)
            i += 1
        if not rows:
            return start + 1
        row_name = type_name(title)
        row_schema: dict = {"type": "object", "properties": {}}
        for header, sample in zip(headers, rows[0]):
            node, _ = _leaf_node(sample, header)
            row_schema["properties"][slugify(header)] = node
        defs[row_name] = row_schema
        slug = slugify(title)
        schema["properties"][slug] = {
            "type": "array",
            "items": {"$ref": f"#/$defs/{row_name}"},
        }
        instance[slug] = [
            {
                slugify(h): (int(c) if placeholders.classify_token(c) == "numeric" else c)
                for h, c in zip(headers, row)
            }
            for row in rows
        ]
        return i
