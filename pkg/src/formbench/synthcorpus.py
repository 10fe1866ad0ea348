"""Synthetic single-page form templates for offline pipeline runs.

Templates are deterministic in (index, seed) and stratified across the
three structure classes: index % 3 == 0 gives flat forms, 1 gives
sectioned (nested) forms, 2 gives forms with row tables. Geometry is
chosen so the spatial grid is exact: every span advances 6pt per
character (font 10), labels sit at x=36, scalar widgets at x=214, table
columns every 140pt.
"""

from __future__ import annotations

import string

from .docmodel import DocumentModel, FieldKind, TextSpan, Widget
from .personas import derive_rng

PAGE_WIDTH = 612.0
PAGE_HEIGHT = 792.0
FONT_SIZE = 10.0
CHAR_ADVANCE = 6.0  # 0.6 * FONT_SIZE
LABEL_X = 36.0
WIDGET_X = 214.0
LINE_STEP = 24.0
TABLE_COL_STEP = 140.0
TABLE_CELL_WIDTH = 128.0

_SCALAR_LABELS: list[tuple[str, FieldKind, float]] = [
    ("Provider Name", FieldKind.TEXT, 180.0),
    ("Facility Name", FieldKind.TEXT, 180.0),
    ("Mailing Address", FieldKind.TEXT, 240.0),
    ("City", FieldKind.TEXT, 120.0),
    ("State", FieldKind.TEXT, 60.0),
    ("Zip Code", FieldKind.TEXT, 60.0),
    ("County", FieldKind.TEXT, 120.0),
    ("Daytime Phone", FieldKind.TEXT, 120.0),
    ("Email Address", FieldKind.TEXT, 180.0),
    ("Contact Name", FieldKind.TEXT, 180.0),
    ("Witness Name", FieldKind.TEXT, 180.0),
    ("Conditions Of Occupancy", FieldKind.TEXT, 240.0),
    ("Issue Date", FieldKind.DATE, 90.0),
    ("Expiration Date", FieldKind.DATE, 90.0),
    ("Renewal Date", FieldKind.DATE, 90.0),
    ("License Fee", FieldKind.NUMERIC, 120.0),
    ("Annual Rent", FieldKind.NUMERIC, 120.0),
    ("Unit Count", FieldKind.NUMERIC, 60.0),
]

_CHOICE_LABELS: list[tuple[str, tuple[str, ...]]] = [
    ("Region", ("North", "South", "East", "West")),
    ("Building Type", ("Residential", "Commercial", "Mixed Use")),
    ("Payment Plan", ("Monthly", "Quarterly", "Annual")),
]

_SECTION_TITLES = [
    "Provider Information",
    "Facility Details",
    "Billing Contact",
    "Inspection Record",
]

_TABLE_SPECS: list[tuple[str, list[tuple[str, FieldKind]]]] = [
    ("Service Charges", [
        ("Service Name", FieldKind.TEXT),
        ("Start Date", FieldKind.DATE),
        ("Annual Amount", FieldKind.NUMERIC),
    ]),
    ("Prior Employment", [
        ("Position Title", FieldKind.TEXT),
        ("Employer Name", FieldKind.TEXT),
        ("From Date", FieldKind.DATE),
        ("To Date", FieldKind.DATE),
    ]),
    ("Unit Inventory", [
        ("Unit Label", FieldKind.TEXT),
        ("Floor Area", FieldKind.NUMERIC),
        ("Monthly Rent", FieldKind.NUMERIC),
    ]),
    ("Licensure Records", [
        ("State Name", FieldKind.TEXT),
        ("License Number", FieldKind.NUMERIC),
    ]),
]

_FORM_TITLES = [
    "APPLICATION FOR HOUSING PROVIDER LICENSE",
    "ANNUAL FACILITY REGISTRATION STATEMENT",
    "OCCUPANCY PERMIT RENEWAL FORM",
    "PROVIDER COMPLIANCE DECLARATION",
]


class _Builder:
    def __init__(self, doc_id: str):
        self.doc_id = doc_id
        self.spans: list[TextSpan] = []
        self.widgets: list[Widget] = []
        self.y = 40.0
        self._widget_n = 0

    def span(self, text: str, x: float) -> None:
        self.spans.append(TextSpan(
            text=text,
            x=x,
            baseline_y=self.y,
            width=CHAR_ADVANCE * len(text),
            height=FONT_SIZE,
        ))

    def widget(
        self,
        kind: FieldKind,
        x: float,
        width: float,
        options: tuple[str, ...] | None = None,
        group: str | None = None,
    ) -> None:
        self._widget_n += 1
        self.widgets.append(Widget(
            id=f"w{self._widget_n:03d}",
            field_kind=kind,
            bbox=(x, self.y - 12.0, x + width, self.y + 4.0),
            font_size=FONT_SIZE,
            choice_options=options,
            array_group=group,
        ))

    def newline(self) -> None:
        self.y += LINE_STEP

    def scalar(self, label: str, kind: FieldKind, width: float,
               options: tuple[str, ...] | None = None) -> None:
        self.span(f"{label}:", LABEL_X)
        self.widget(kind, WIDGET_X, width, options=options)
        self.newline()

    def build(self) -> DocumentModel:
        return DocumentModel(
            doc_id=self.doc_id,
            page_width=PAGE_WIDTH,
            page_height=PAGE_HEIGHT,
            widgets=tuple(self.widgets),
            spans=tuple(self.spans),
        )


def _add_table(builder: _Builder, letter: str, title: str,
               columns: list[tuple[str, FieldKind]], rows: int) -> None:
    builder.span(f"SCHEDULE {letter}: {title}", LABEL_X)
    builder.newline()
    for j, (header, _kind) in enumerate(columns):
        builder.span(header, LABEL_X + j * TABLE_COL_STEP)
    builder.newline()
    group = title.lower().replace(" ", "_")
    for _ in range(rows):
        for j, (_header, kind) in enumerate(columns):
            builder.widget(
                kind, LABEL_X + j * TABLE_COL_STEP, TABLE_CELL_WIDTH, group=group
            )
        builder.newline()


def make_template(index: int, seed: int = 0) -> DocumentModel:
    """One deterministic unfilled form; same (index, seed) -> same bytes."""
    rng = derive_rng(seed, "template", str(index))
    builder = _Builder(doc_id=f"doc{index:03d}")
    builder.span(rng.choice(_FORM_TITLES), LABEL_X)
    builder.newline()
    builder.span(f"Form RA-{100 + index}", LABEL_X)
    builder.newline()

    structure = index % 3
    labels = rng.sample(_SCALAR_LABELS, len(_SCALAR_LABELS))

    def take_scalars(count: int) -> list[tuple[str, FieldKind, float]]:
        taken = labels[:count]
        del labels[:count]
        return taken

    if structure == 0:  # flat
        for label, kind, width in take_scalars(rng.randint(7, 10)):
            builder.scalar(label, kind, width)
        if rng.random() < 0.7:
            label, options = rng.choice(_CHOICE_LABELS)
            builder.scalar(label, FieldKind.CHOICE, 120.0, options=options)
    elif structure == 1:  # nested
        for label, kind, width in take_scalars(rng.randint(2, 3)):
            builder.scalar(label, kind, width)
        for n, title in enumerate(
            rng.sample(_SECTION_TITLES, rng.randint(1, 2)), start=1
        ):
            builder.span(f"PART {n}: {title}", LABEL_X)
            builder.newline()
            for label, kind, width in take_scalars(rng.randint(3, 4)):
                builder.scalar(label, kind, width)
    else:  # table
        for label, kind, width in take_scalars(rng.randint(2, 3)):
            builder.scalar(label, kind, width)
        tables = rng.sample(_TABLE_SPECS, rng.randint(1, 2))
        for letter, (title, columns) in zip(string.ascii_uppercase, tables):
            _add_table(builder, letter, title, columns, rows=rng.randint(2, 4))
    return builder.build()


def make_corpus(count: int = 25, seed: int = 0) -> list[DocumentModel]:
    """Deterministic corpus stratified over the three structure classes."""
    if count < 1:
        raise ValueError(f"corpus size must be >= 1, got {count}")
    return [make_template(i, seed) for i in range(count)]
