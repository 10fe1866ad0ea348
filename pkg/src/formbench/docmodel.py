"""Geometric document model: widgets and text spans on fixed-size pages.

Coordinates are points with the origin at the top-left corner; y grows
downward. A widget's bbox is (x0, y0, x1, y1) with x0 < x1 and y0 < y1.
Boolean inputs (checkboxes, radio groups) are out of scope and rejected
at ingestion.
"""

import json
from dataclasses import dataclass
from enum import Enum
from typing import Any

from .jsonutil import dumps_canonical


class FieldKind(str, Enum):
    TEXT = "text"
    DATE = "date"
    NUMERIC = "numeric"
    CHOICE = "choice"


class ModalityKind(str, Enum):
    PLAIN = "plain"
    SPATIAL = "spatial"
    IMAGE = "image"
    SPATIAL_IMAGE = "spatial+image"


class ParseError(ValueError):
    """Input is not a structurally valid document file.

    offset is the byte position of the syntax error when the input was
    not valid JSON; None for structural problems (missing/ill-typed keys).
    """

    def __init__(self, message: str, offset: int | None = None):
        super().__init__(message)
        self.offset = offset


class InvalidDocumentError(ValueError):
    """The document parsed but violates model invariants."""

    def __init__(self, violations: list[str]):
        super().__init__("; ".join(violations))
        self.violations = violations


@dataclass(frozen=True)
class Widget:
    id: str
    field_kind: FieldKind
    bbox: tuple[float, float, float, float]
    font_size: float
    font_name: str = "Helvetica"
    choice_options: tuple[str, ...] | None = None
    array_group: str | None = None

    @property
    def width(self) -> float:
        return self.bbox[2] - self.bbox[0]

    @property
    def height(self) -> float:
        return self.bbox[3] - self.bbox[1]


@dataclass(frozen=True)
class TextSpan:
    text: str
    x: float
    baseline_y: float
    width: float
    height: float


@dataclass(frozen=True)
class DocumentModel:
    doc_id: str
    page_width: float
    page_height: float
    widgets: tuple[Widget, ...] = ()
    spans: tuple[TextSpan, ...] = ()
    language: str = "en"

    def widget_by_id(self, widget_id: str) -> Widget:
        for w in self.widgets:
            if w.id == widget_id:
                return w
        raise KeyError(widget_id)


def validate_document(doc: DocumentModel) -> list[str]:
    """Return all invariant violations, each naming the offending element."""
    violations: list[str] = []
    if not doc.doc_id:
        violations.append("doc_id must be non-empty")
    if doc.page_width <= 0 or doc.page_height <= 0:
        violations.append(
            f"page size must be positive, got {doc.page_width} x {doc.page_height}"
        )
    seen: set[str] = set()
    for w in doc.widgets:
        label = f"widget {w.id!r}" if w.id else "widget with empty id"
        if not w.id:
            violations.append("widget id must be non-empty")
        elif w.id in seen:
            violations.append(f"duplicate widget id {w.id!r}")
        seen.add(w.id)
        x0, y0, x1, y1 = w.bbox
        if not (x0 < x1 and y0 < y1):
            violations.append(f"{label}: bbox must satisfy x0 < x1 and y0 < y1")
        if x0 < 0 or y0 < 0 or x1 > doc.page_width or y1 > doc.page_height:
            violations.append(f"{label}: bbox extends outside the page")
        if w.font_size <= 0:
            violations.append(f"{label}: font_size must be positive")
        if w.field_kind is FieldKind.CHOICE:
            if not w.choice_options:
                violations.append(f"{label}: choice widget needs choice_options")
            elif len(set(w.choice_options)) != len(w.choice_options):
                violations.append(f"{label}: choice_options must be distinct")
            elif any(not opt for opt in w.choice_options):
                violations.append(f"{label}: choice_options must be non-empty strings")
        elif w.choice_options is not None:
            violations.append(
                f"{label}: choice_options only allowed on choice widgets"
            )
    for i, s in enumerate(doc.spans):
        label = f"span[{i}]"
        if not s.text:
            violations.append(f"{label}: text must be non-empty")
        if s.width < 0:
            violations.append(f"{label}: width must be >= 0")
        if s.height < 0:
            violations.append(f"{label}: height must be >= 0")
        if not (0 <= s.x <= doc.page_width and 0 <= s.baseline_y <= doc.page_height):
            violations.append(f"{label}: position outside the page")
    return violations


_WIDGET_KEYS = {"id", "field_kind", "bbox", "font_size", "font_name",
                "choice_options", "array_group"}
_SPAN_KEYS = {"text", "x", "baseline_y", "width", "height"}


def _require(obj: dict, key: str, types: tuple, where: str) -> Any:
    if key not in obj:
        raise ParseError(f"{where}: missing required key {key!r}")
    value = obj[key]
    if isinstance(value, bool) or not isinstance(value, types):
        raise ParseError(f"{where}: key {key!r} has wrong type")
    return value


def _decode_widget(obj: Any, where: str, violations: list[str]) -> Widget | None:
    if not isinstance(obj, dict):
        raise ParseError(f"{where}: widget must be an object")
    wid = _require(obj, "id", (str,), where)
    kind_raw = _require(obj, "field_kind", (str,), where)
    bbox = _require(obj, "bbox", (list,), where)
    if len(bbox) != 4 or not all(
        isinstance(v, (int, float)) and not isinstance(v, bool) for v in bbox
    ):
        raise ParseError(f"{where}: bbox must be four numbers")
    font_size = _require(obj, "font_size", (int, float), where)
    font_name = obj.get("font_name", "Helvetica")
    if not isinstance(font_name, str):
        raise ParseError(f"{where}: font_name must be a string")
    options = obj.get("choice_options")
    if options is not None:
        if not isinstance(options, list) or not all(isinstance(o, str) for o in options):
            raise ParseError(f"{where}: choice_options must be a list of strings")
        options = tuple(options)
    group = obj.get("array_group")
    if group is not None and not isinstance(group, str):
        raise ParseError(f"{where}: array_group must be a string")
    try:
        kind = FieldKind(kind_raw)
    except ValueError:
        violations.append(
            f"widget {wid!r}: unsupported field_kind {kind_raw!r}"
            " (boolean inputs such as checkboxes are not part of the model)"
        )
        return None
    return Widget(
        id=wid,
        field_kind=kind,
        bbox=tuple(float(v) for v in bbox),
        font_size=float(font_size),
        font_name=font_name,
        choice_options=options,
        array_group=group,
    )


def _decode_span(obj: Any, where: str) -> TextSpan:
    if not isinstance(obj, dict):
        raise ParseError(f"{where}: span must be an object")
    text = _require(obj, "text", (str,), where)
    values = {}
    for key in ("x", "baseline_y", "width", "height"):
        values[key] = float(_require(obj, key, (int, float), where))
    return TextSpan(text=text, **values)


def read_document(data: bytes | str) -> DocumentModel:
    """Parse and validate a .docmodel.json payload.

    Raises ParseError (with a byte offset for syntax errors) when the
    payload is not structurally a document, and InvalidDocumentError
    listing every violated invariant otherwise.
    """
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        raw = json.loads(data)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", offset=exc.pos) from exc
    if not isinstance(raw, dict):
        raise ParseError("document must be a JSON object")
    doc_id = _require(raw, "doc_id", (str,), "document")
    page_width = float(_require(raw, "page_width", (int, float), "document"))
    page_height = float(_require(raw, "page_height", (int, float), "document"))
    language = raw.get("language", "en")
    if not isinstance(language, str):
        raise ParseError("document: language must be a string")
    widgets_raw = raw.get("widgets", [])
    spans_raw = raw.get("spans", [])
    if not isinstance(widgets_raw, list) or not isinstance(spans_raw, list):
        raise ParseError("document: widgets and spans must be lists")

    violations: list[str] = []
    widgets = []
    for i, wobj in enumerate(widgets_raw):
        w = _decode_widget(wobj, f"widgets[{i}]", violations)
        if w is not None:
            widgets.append(w)
    spans = tuple(_decode_span(sobj, f"spans[{i}]") for i, sobj in enumerate(spans_raw))
    doc = DocumentModel(
        doc_id=doc_id,
        page_width=page_width,
        page_height=page_height,
        widgets=tuple(widgets),
        spans=spans,
        language=language,
    )
    violations.extend(validate_document(doc))
    if violations:
        raise InvalidDocumentError(violations)
    return doc


def _widget_to_dict(w: Widget) -> dict:
    out: dict[str, Any] = {
        "id": w.id,
        "field_kind": w.field_kind.value,
        "bbox": list(w.bbox),
        "font_size": w.font_size,
        "font_name": w.font_name,
    }
    if w.choice_options is not None:
        out["choice_options"] = list(w.choice_options)
    if w.array_group is not None:
        out["array_group"] = w.array_group
    return out


def write_document(doc: DocumentModel) -> bytes:
    """Serialize to canonical bytes: sorted keys, floats at <=3 decimals."""
    violations = validate_document(doc)
    if violations:
        raise InvalidDocumentError(violations)
    payload = {
        "doc_id": doc.doc_id,
        "page_width": doc.page_width,
        "page_height": doc.page_height,
        "language": doc.language,
        "widgets": [_widget_to_dict(w) for w in doc.widgets],
        "spans": [
            {
                "text": s.text,
                "x": s.x,
                "baseline_y": s.baseline_y,
                "width": s.width,
                "height": s.height,
            }
            for s in doc.spans
        ],
    }
    return dumps_canonical(payload, sort_keys=True).encode("utf-8")
