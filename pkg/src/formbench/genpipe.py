"""Generation pipeline: seed, reconcile, reskin.

Seeding fills every widget with a unique placeholder in reading order.
Schema discovery (an LLM call, see discovery.py) returns a schema plus a
placeholder instance; reconciliation turns that into a one-to-one mapping
between schema leaves and widgets. Reskinning then draws realistic values
per field, paints them into the widgets, and assembles ground truth from
the very same values, so GT is correct by construction.

Mapping paths are instance-side ("rows[0]/amount", element indices
explicit); schema-side operations strip the indices.
"""

import copy
import re
from dataclasses import dataclass, field
from typing import Any

from . import placeholders, schema as schema_mod
from .docmodel import DocumentModel, FieldKind, TextSpan, Widget
from .personas import (
    TextGenerator,
    ValueConstraints,
    derive_rng,
    generate_value,
    infer_semantic_category,
    render_value,
)

CHAR_WIDTH_EM = 0.6  # average glyph advance as a fraction of font size


class ReconcileError(ValueError):
    pass


class ReskinError(ValueError):
    pass


class AssemblyError(ValueError):
    pass


@dataclass(frozen=True)
class SeedMap:
    """Widget id <-> placeholder pairs, in seeding (reading) order."""

    entries: tuple[tuple[str, str], ...]

    def placeholder_for(self, widget_id: str) -> str:
        for wid, token in self.entries:
            if wid == widget_id:
                return token
        raise KeyError(widget_id)

    def widget_for(self, token: str) -> str | None:
        for wid, tok in self.entries:
            if tok == token:
                return wid
        return None

    def to_dict(self) -> dict:
        return {"entries": [
            {"widget_id": wid, "placeholder": tok} for wid, tok in self.entries
        ]}

    @classmethod
    def from_dict(cls, raw: dict) -> "SeedMap":
        return cls(entries=tuple(
            (e["widget_id"], e["placeholder"]) for e in raw["entries"]
        ))


@dataclass(frozen=True)
class MappingEntry:
    schema_path: str   # instance-side, indices explicit
    placeholder: str
    widget_id: str


@dataclass(frozen=True)
class FieldMapping:
    entries: tuple[MappingEntry, ...]

    def to_dict(self) -> dict:
        return {"entries": [
            {
                "schema_path": e.schema_path,
                "placeholder": e.placeholder,
                "widget_id": e.widget_id,
            }
            for e in self.entries
        ]}

    @classmethod
    def from_dict(cls, raw: dict) -> "FieldMapping":
        return cls(entries=tuple(
            MappingEntry(e["schema_path"], e["placeholder"], e["widget_id"])
            for e in raw["entries"]
        ))


@dataclass(frozen=True)
class GroundTruthRecord:
    doc_id: str
    values: dict
    generation_seed: int

    def to_dict(self) -> dict:
        return {
            "doc_id": self.doc_id,
            "generation_seed": self.generation_seed,
            "values": self.values,
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "GroundTruthRecord":
        return cls(
            doc_id=raw["doc_id"],
            values=raw["values"],
            generation_seed=raw["generation_seed"],
        )


@dataclass(frozen=True)
class DiscoveryResponse:
    schema: dict
    instance: Any


@dataclass
class ReconcileReport:
    """What reconciliation dropped or rewrote, for auditability."""

    duplicates: list[tuple[str, str]] = field(default_factory=list)
    hallucinated: list[tuple[str, str]] = field(default_factory=list)
    booleans_removed: list[str] = field(default_factory=list)
    pruned_paths: list[str] = field(default_factory=list)
    dropped_subtrees: list[str] = field(default_factory=list)
    enum_conflicts: list[str] = field(default_factory=list)


def estimate_max_chars(widget: Widget) -> int:
    """How many characters fit in a widget at its font size, at least 1."""
    capacity = widget.width / (CHAR_WIDTH_EM * widget.font_size)
    return max(1, int(capacity))


def seed_fill(doc: DocumentModel) -> SeedMap:
    """Assign one placeholder per widget in reading order (top-left first).

    Text and choice widgets share the TXT_ counter; date and numeric
    widgets use their own sequences.
    """
    ordered = sorted(doc.widgets, key=lambda w: (w.bbox[1], w.bbox[0], w.id))
    counters = {"text": 0, "date": 0, "numeric": 0}
    entries = []
    for w in ordered:
        if w.field_kind in (FieldKind.TEXT, FieldKind.CHOICE):
            counters["text"] += 1
            token = placeholders.text_placeholder(counters["text"])
        elif w.field_kind is FieldKind.DATE:
            counters["date"] += 1
            token = placeholders.date_placeholder(counters["date"])
        elif w.field_kind is FieldKind.NUMERIC:
            counters["numeric"] += 1
            token = str(placeholders.numeric_placeholder(counters["numeric"]))
        else:  # pragma: no cover - the enum is closed
            raise ValueError(f"widget {w.id!r}: unsupported kind {w.field_kind}")
        entries.append((w.id, token))
    return SeedMap(entries=tuple(entries))


def fill_widgets(doc: DocumentModel, values: dict[str, str]) -> DocumentModel:
    """Paint text into widgets, returning a new document with added spans.

    Fill spans sit 2pt inside the widget's left edge with the baseline 2pt
    above its bottom edge. Unknown widget ids raise ValueError.
    """
    by_id = {w.id: w for w in doc.widgets}
    unknown = sorted(set(values) - set(by_id))
    if unknown:
        raise ValueError(f"unresolved widget ids: {', '.join(unknown)}")
    added = []
    for w in doc.widgets:  # widget order keeps output deterministic
        if w.id not in values:
            continue
        text = values[w.id]
        if not text:
            raise ValueError(f"empty fill for widget {w.id!r}")
        x0, y0, x1, y1 = w.bbox
        width = min(len(text) * CHAR_WIDTH_EM * w.font_size, x1 - x0)
        added.append(TextSpan(
            text=text,
            x=x0 + 2.0,
            baseline_y=y1 - 2.0,
            width=width,
            height=w.font_size,
        ))
    return DocumentModel(
        doc_id=doc.doc_id,
        page_width=doc.page_width,
        page_height=doc.page_height,
        widgets=doc.widgets,
        spans=doc.spans + tuple(added),
        language=doc.language,
    )


def apply_seed(doc: DocumentModel, seed_map: SeedMap) -> DocumentModel:
    return fill_widgets(doc, dict(seed_map.entries))


# ---------------------------------------------------------------------------
# reconciliation

_BOOLEAN_TYPES = ("boolean",)


def _strip_booleans(node: Any, path: str, report: ReconcileReport) -> Any | None:
    """Remove boolean-typed nodes anywhere in the schema; None = drop node."""
    if not isinstance(node, dict):
        return node
    if node.get("type") in _BOOLEAN_TYPES:
        report.booleans_removed.append(path or "<root>")
        return None
    out = {}
    for key, value in node.items():
        if key == "properties" and isinstance(value, dict):
            props = {}
            for name, child in value.items():
                child_path = f"{path}/{name}" if path else name
                kept = _strip_booleans(child, child_path, report)
                if kept is not None:
                    props[name] = kept
            out[key] = props
        elif key == "items" and isinstance(value, dict):
            kept = _strip_booleans(value, f"{path}[]", report)
            if kept is None:
                # an array of booleans has nothing left to hold
                report.booleans_removed.append(path or "<root>")
                return None
            out[key] = kept
        elif key == "$defs" and isinstance(value, dict):
            defs = {}
            for name, child in value.items():
                kept = _strip_booleans(child, f"$defs/{name}", report)
                if kept is not None:
                    defs[name] = kept
            out[key] = defs
        else:
            out[key] = value
    return out


def _instance_token(value: Any) -> str | None:
    """Normalize an instance leaf back to its placeholder token string."""
    if isinstance(value, str):
        return value
    if isinstance(value, bool):
        return None
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float) and value == int(value):
        return str(int(value))
    return None


def _join(path: str, key: str) -> str:
    return f"{path}/{key}" if path else key


def _strip_indices(path: str) -> str:
    return re.sub(r"\[\d+\]", "[]", path)


def reconcile_mapping(
    response: DiscoveryResponse,
    seed_map: SeedMap,
    doc: DocumentModel,
) -> tuple[dict, FieldMapping, ReconcileReport]:
    """Turn a discovery response into a pruned schema and field mapping.

    Walks schema and instance together in schema DFS order. Each instance
    leaf should be a placeholder token; the first occurrence of a token
    claims its widget, later ones are logged as duplicates and dropped,
    and tokens with no seeded widget are logged as hallucinations. Schema
    subtrees with no surviving leaf are pruned (a $defs entry survives if
    any of its use sites keeps a leaf). Widget constraints are threaded
    into the resolved leaf nodes: max_visual_chars (minimum wins on shared
    definitions) and choice options as enum.

    Raises ReconcileError when the response root is not an object matching
    the schema root, or when nothing survives.
    """
    report = ReconcileReport()
    schema = _strip_booleans(copy.deepcopy(response.schema), "", report)
    if not isinstance(schema, dict) or schema.get("type") != "object":
        raise ReconcileError("discovered schema root must be an object node")
    violations = schema_mod.validate_schema(schema)
    if violations:
        raise ReconcileError(
            "discovered schema violates the subset: " + "; ".join(violations)
        )
    if not isinstance(response.instance, dict):
        raise ReconcileError("instance/schema shape mismatch at the root")

    claimed: set[str] = set()
    entries: list[MappingEntry] = []

    def walk(value: Any, node: dict, path: str) -> None:
        node = schema_mod.resolve_node(schema, node)
        node_type = node.get("type")
        if node_type == "object":
            if not isinstance(value, dict):
                report.dropped_subtrees.append(path or "<root>")
                return
            props = node.get("properties", {})
            for key in value:
                if key not in props:
                    report.dropped_subtrees.append(_join(path, key))
            for key, child in props.items():
                if key in value:
                    walk(value[key], child, _join(path, key))
        elif node_type == "array":
            if not isinstance(value, list):
                report.dropped_subtrees.append(path)
                return
            for i, elem in enumerate(value):
                walk(elem, node["items"], f"{path}[{i}]")
        else:
            token = _instance_token(value)
            widget_id = seed_map.widget_for(token) if token else None
            if widget_id is None:
                report.hallucinated.append((path, str(value)))
                return
            if widget_id in claimed:
                report.duplicates.append((path, token))
                return
            claimed.add(widget_id)
            entries.append(MappingEntry(path, token, widget_id))

    walk(response.instance, schema, "")
    if not entries:
        raise ReconcileError("zero surviving mappings")

    surviving = {_strip_indices(e.schema_path) for e in entries}
    schema = _prune_schema(schema, surviving, report)
    _thread_constraints(schema, entries, doc, report)
    return schema, FieldMapping(entries=tuple(entries)), report


def _prune_schema(schema: dict, surviving: set[str], report: ReconcileReport) -> dict:
    """Drop subtrees with no surviving leaves; keep shared defs alive when
    any use site survives, and drop defs nothing references anymore."""
    kept_defs: set[str] = set()

    def survives_below(path: str) -> bool:
        return any(s == path or s.startswith(path + "/") or s.startswith(path + "[")
                   for s in surviving)

    def prune(node: dict, path: str) -> dict | None:
        if "$ref" in node:
            schema_mod.resolve_node(schema, node)  # validates the target
            if survives_below(path):
                ref_target = node["$ref"].rsplit("/", 1)[1]
                kept_defs.add(ref_target)
                _mark_def_survivors(ref_target, path)
                return dict(node)
            report.pruned_paths.append(path)
            return None
        node_type = node.get("type")
        if node_type == "object":
            props = {}
            for key, child in node.get("properties", {}).items():
                kept = prune(child, _join(path, key))
                if kept is not None:
                    props[key] = kept
            if not props and path:
                report.pruned_paths.append(path)
                return None
            out = {k: v for k, v in node.items() if k not in ("properties", "$defs")}
            out["properties"] = props
            return out
        if node_type == "array":
            if not survives_below(path):
                report.pruned_paths.append(path)
                return None
            items = prune_items(node["items"], f"{path}[]")
            if items is None:
                report.pruned_paths.append(path)
                return None
            out = {k: v for k, v in node.items() if k != "items"}
            out["items"] = items
            return out
        if path and not survives_below(path):
            report.pruned_paths.append(path)
            return None
        return dict(node)

    def prune_items(node: dict, path: str) -> dict | None:
        if "$ref" in node:
            if survives_below(path):
                ref_target = node["$ref"].rsplit("/", 1)[1]
                kept_defs.add(ref_target)
                _mark_def_survivors(ref_target, path)
                return dict(node)
            return None
        return prune(node, path)

    # survivor paths rebased into each def, unioned across use sites
    def_survivors: dict[str, set[str]] = {}

    def _mark_def_survivors(name: str, use_path: str) -> None:
        rebased = set()
        for s in surviving:
            if s == use_path:
                rebased.add("")
            elif s.startswith(use_path + "/"):
                rebased.add(s[len(use_path) + 1:])
            elif s.startswith(use_path + "["):
                tail = s[len(use_path):]
                tail = re.sub(r"^\[\]/?", "", tail)
                rebased.add(tail)
        def_survivors.setdefault(name, set()).update(rebased)

    pruned = prune(schema, "")
    if pruned is None:
        raise ReconcileError("zero surviving mappings")

    defs = schema.get("$defs", {})
    if defs:
        new_defs: dict[str, dict] = {}
        done: set[str] = set()
        # worklist: pruning one def body can reference (and keep) another
        while True:
            todo = [n for n in sorted(kept_defs) if n not in done]
            if not todo:
                break
            for name in todo:
                done.add(name)
                if name not in defs:
                    continue
                survivors = def_survivors.get(name, set())
                saved = surviving.copy()
                surviving.clear()
                surviving.update(survivors)
                try:
                    kept = prune(copy.deepcopy(defs[name]), "")
                finally:
                    surviving.clear()
                    surviving.update(saved)
                if kept is not None:
                    new_defs[name] = kept
        if new_defs:
            pruned["$defs"] = new_defs
        else:
            pruned.pop("$defs", None)
    return pruned


def _thread_constraints(
    schema: dict,
    entries: list[MappingEntry],
    doc: DocumentModel,
    report: ReconcileReport,
) -> None:
    by_id = {w.id: w for w in doc.widgets}
    for entry in entries:
        widget = by_id.get(entry.widget_id)
        if widget is None:
            raise ReconcileError(f"unresolved widget id {entry.widget_id!r}")
        node = schema_mod.node_at(schema, entry.schema_path)
        if node is None:
            continue
        capacity = estimate_max_chars(widget)
        existing = node.get("max_visual_chars")
        node["max_visual_chars"] = (
            capacity if existing is None else min(existing, capacity)
        )
        if widget.choice_options:
            options = list(widget.choice_options)
            if "enum" in node and node["enum"] != options:
                report.enum_conflicts.append(entry.schema_path)
            else:
                node["enum"] = options


# ---------------------------------------------------------------------------
# ground-truth assembly and reskinning

_SEGMENT_RE = re.compile(r"^([^\[\]]*)((?:\[\d+\])*)$")


def _parse_path(path: str) -> list[str | int]:
    """'a/b[2]/c' -> ['a', 'b', 2, 'c']."""
    steps: list[str | int] = []
    for raw in path.split("/"):
        m = _SEGMENT_RE.match(raw)
        if not m:
            raise AssemblyError(f"malformed path segment {raw!r} in {path!r}")
        name, indices = m.groups()
        if name:
            steps.append(name)
        for idx in re.findall(r"\[(\d+)\]", indices):
            steps.append(int(idx))
    if not steps:
        raise AssemblyError(f"empty path {path!r}")
    return steps


def set_path(tree: dict, path: str, value: Any) -> None:
    """Insert value at an indexed path, creating dicts and lists on the way.

    Raises AssemblyError when the path disagrees with existing structure.
    """
    steps = _parse_path(path)
    node: Any = tree
    for i, step in enumerate(steps[:-1]):
        nxt = steps[i + 1]
        empty: Any = [] if isinstance(nxt, int) else {}
        if isinstance(step, str):
            if not isinstance(node, dict):
                raise AssemblyError(f"assembly conflict at {path!r}")
            if step not in node:
                node[step] = empty
            node = node[step]
        else:
            if not isinstance(node, list):
                raise AssemblyError(f"assembly conflict at {path!r}")
            while len(node) <= step:
                node.append(None)
            if node[step] is None:
                node[step] = empty
            node = node[step]
        if not isinstance(node, (dict, list)):
            raise AssemblyError(f"assembly conflict at {path!r}")
    last = steps[-1]
    if isinstance(last, str):
        if not isinstance(node, dict):
            raise AssemblyError(f"assembly conflict at {path!r}")
        if last in node:
            raise AssemblyError(f"duplicate assignment at {path!r}")
        node[last] = value
    else:
        if not isinstance(node, list):
            raise AssemblyError(f"assembly conflict at {path!r}")
        while len(node) <= last:
            node.append(None)
        if node[last] is not None:
            raise AssemblyError(f"duplicate assignment at {path!r}")
        node[last] = value


def _check_no_holes(value: Any, path: str) -> None:
    if isinstance(value, dict):
        for key, child in value.items():
            _check_no_holes(child, _join(path, key))
    elif isinstance(value, list):
        for i, child in enumerate(value):
            if child is None:
                raise AssemblyError(f"missing element {path}[{i}] in assembled values")
            _check_no_holes(child, f"{path}[{i}]")


def reskin_document(
    doc: DocumentModel,
    schema: dict,
    mapping: FieldMapping,
    seed: int,
    text_client: TextGenerator | None = None,
    locale_weights: dict[str, float] | None = None,
) -> tuple[DocumentModel, GroundTruthRecord]:
    """Replace placeholders with persona values; GT mirrors the fills.

    Every mapped widget gets a freshly drawn value honoring its capacity
    and choice options; the painted text and the GT leaf are assembled
    from the same draw, with over-long values trimmed to the visible
    prefix in both places.
    """
    if not mapping.entries:
        raise ReskinError("zero surviving mappings")
    by_id = {w.id: w for w in doc.widgets}
    rng = derive_rng(seed, doc.doc_id)
    fills: dict[str, str] = {}
    values: dict = {}
    for entry in mapping.entries:
        widget = by_id.get(entry.widget_id)
        if widget is None:
            raise ReskinError(f"unresolved widget id {entry.widget_id!r}")
        node = schema_mod.node_at(schema, entry.schema_path) or {}
        leaf_name = _parse_path(entry.schema_path)[-1]
        if isinstance(leaf_name, int):  # array of scalars: name the array
            leaf_name = next(
                s for s in reversed(_parse_path(entry.schema_path))
                if isinstance(s, str)
            )
        constraints = ValueConstraints(
            schema_type="number" if node.get("type") == "number" else "string",
            max_visual_chars=estimate_max_chars(widget),
            choices=widget.choice_options,
        )
        category = infer_semantic_category(str(leaf_name))
        value = generate_value(
            category, constraints, rng,
            text_client=text_client, locale_weights=locale_weights,
        )
        text = render_value(value)
        limit = constraints.max_visual_chars
        if len(text) > limit:
            text = text[:limit]
            value = text if isinstance(value, str) else _reparse_number(text)
        fills[widget.id] = text
        set_path(values, entry.schema_path, value)
    _check_no_holes(values, "")
    reskinned = fill_widgets(doc, fills)
    return reskinned, GroundTruthRecord(
        doc_id=doc.doc_id, values=values, generation_seed=seed,
    )


def _reparse_number(text: str) -> int | float | str:
    trimmed = text.rstrip(".")
    if not trimmed or trimmed == "-":
        return 0
    try:
        if "." in trimmed:
            return float(trimmed)
        return int(trimmed)
    except ValueError:
        return text
