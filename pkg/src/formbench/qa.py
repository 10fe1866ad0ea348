"""Automated quality screening between generation and benchmarking.

Screening checks that every GT value is actually visible in the exported
text, that no placeholder survived reskinning, and that GT typing agrees
with the schema. Findings either remove a document or exclude a field;
the exclusion ledger is applied at scoring time so the raw artifacts
stay immutable.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

from . import placeholders
from .export import ModalityBundle
from .genpipe import GroundTruthRecord
from .jsonutil import append_jsonl, iter_jsonl, read_json, write_json
from .schema import iter_leaf_paths, leaf_type
from .scoring import all_leaves, normalize_value


class Severity(str, Enum):
    REMOVE_DOCUMENT = "remove_document"
    EXCLUDE_FIELD = "exclude_field"
    WARN = "warn"


class FindingKind(str, Enum):
    VALUE_NOT_FOUND = "value_not_found"
    PLACEHOLDER_RESIDUE = "placeholder_residue"
    EMPTY_GROUND_TRUTH = "empty_ground_truth"
    TYPE_MISMATCH = "type_mismatch"
    AMBIGUOUS_EMPTY_ITEMS = "ambiguous_empty_items"


# value_not_found names the field but still removes the document: a value
# the exports cannot show (truncated or lost) poisons every modality
DEFAULT_SEVERITY = {
    FindingKind.VALUE_NOT_FOUND: Severity.REMOVE_DOCUMENT,
    FindingKind.PLACEHOLDER_RESIDUE: Severity.REMOVE_DOCUMENT,
    FindingKind.EMPTY_GROUND_TRUTH: Severity.REMOVE_DOCUMENT,
    FindingKind.TYPE_MISMATCH: Severity.EXCLUDE_FIELD,
    FindingKind.AMBIGUOUS_EMPTY_ITEMS: Severity.EXCLUDE_FIELD,
}

_DOCUMENT_LEVEL_KINDS = {
    FindingKind.PLACEHOLDER_RESIDUE,
    FindingKind.EMPTY_GROUND_TRUTH,
}


@dataclass(frozen=True)
class Finding:
    doc_id: str
    kind: FindingKind
    severity: Severity
    field_path: str | None = None
    detail: str = ""

    def __post_init__(self):
        if self.kind in _DOCUMENT_LEVEL_KINDS and self.field_path is not None:
            raise ValueError(f"{self.kind.value} findings are document-level")

    def to_dict(self) -> dict:
        return {
            "doc_id": self.doc_id,
            "kind": self.kind.value,
            "severity": self.severity.value,
            "field_path": self.field_path,
            "detail": self.detail,
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "Finding":
        return cls(
            doc_id=raw["doc_id"],
            kind=FindingKind(raw["kind"]),
            severity=Severity(raw["severity"]),
            field_path=raw.get("field_path"),
            detail=raw.get("detail", ""),
        )


def _search_variants(value) -> list[str]:
    """Normalized needles to look for: numbers also try display forms."""
    variants = [normalize_value(value)]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        return variants
    if isinstance(value, int):
        variants.append(f"{value:,}")
        variants.append(f"{value:,.2f}")
    else:
        variants.append(f"{value:,}")
    return variants


def screen_document(
    gt: GroundTruthRecord,
    schema: dict,
    bundle: ModalityBundle,
) -> list[Finding]:
    """Phase-one screening of one generated document.

    Checks, in order: non-empty GT; every leaf findable in the plain or
    spatial export; no placeholder residue in GT or exports; GT leaf
    types matching the schema; arrays whose schema leaves ambiguity about
    empty items.
    """
    findings: list[Finding] = []
    leaves = all_leaves(gt.values)
    if not leaves:
        findings.append(Finding(
            doc_id=gt.doc_id,
            kind=FindingKind.EMPTY_GROUND_TRUTH,
            severity=DEFAULT_SEVERITY[FindingKind.EMPTY_GROUND_TRUTH],
            detail="ground truth has no leaf values",
        ))
        return findings

    haystacks = [
        normalize_value(bundle.plain_text),
        normalize_value(bundle.spatial_text),
    ]
    for path, value in leaves.items():
        needles = [n for n in _search_variants(value) if n]
        if not needles:
            continue  # empty strings are vacuously present
        if not any(n in hay for n in needles for hay in haystacks):
            findings.append(Finding(
                doc_id=gt.doc_id,
                kind=FindingKind.VALUE_NOT_FOUND,
                severity=DEFAULT_SEVERITY[FindingKind.VALUE_NOT_FOUND],
                field_path=path,
                detail=f"value {needles[0]!r} absent from both text exports",
            ))

    residue: list[str] = []
    for path, value in leaves.items():
        if isinstance(value, str) and placeholders.has_residue(value):
            residue.append(f"gt:{path}")
        elif isinstance(value, (int, float)) and placeholders.has_residue(
            normalize_value(value)
        ):
            residue.append(f"gt:{path}")
    for name, text in (("plain", bundle.plain_text), ("spatial", bundle.spatial_text)):
        found = placeholders.find_residue(text)
        if found:
            residue.append(f"{name}:{','.join(sorted(set(found)))}")
    if residue:
        findings.append(Finding(
            doc_id=gt.doc_id,
            kind=FindingKind.PLACEHOLDER_RESIDUE,
            severity=DEFAULT_SEVERITY[FindingKind.PLACEHOLDER_RESIDUE],
            detail="placeholder residue at " + "; ".join(residue),
        ))

    for path, value in leaves.items():
        expected = leaf_type(schema, path)
        if expected is None:
            continue
        actual = (
            "number"
            if isinstance(value, (int, float)) and not isinstance(value, bool)
            else "string"
        )
        if actual != expected:
            findings.append(Finding(
                doc_id=gt.doc_id,
                kind=FindingKind.TYPE_MISMATCH,
                severity=DEFAULT_SEVERITY[FindingKind.TYPE_MISMATCH],
                field_path=path,
                detail=f"schema says {expected}, ground truth holds {actual}",
            ))

    schema_arrays: set[str] = set()
    for path, _node in iter_leaf_paths(schema):
        idx = path.find("[]")
        while idx != -1:
            schema_arrays.add(path[:idx])
            idx = path.find("[]", idx + 2)
    gt_arrays = _array_paths(gt.values)
    for array_path in sorted(gt_arrays):
        wild = re.sub(r"\[\d+\]", "[]", array_path)
        if gt_arrays[array_path] == 0 and wild in schema_arrays:
            findings.append(Finding(
                doc_id=gt.doc_id,
                kind=FindingKind.AMBIGUOUS_EMPTY_ITEMS,
                severity=DEFAULT_SEVERITY[FindingKind.AMBIGUOUS_EMPTY_ITEMS],
                field_path=array_path,
                detail="empty array: absent rows and empty table are indistinguishable",
            ))
    return findings


def _array_paths(instance) -> dict[str, int]:
    out: dict[str, int] = {}

    def walk(value, path: str) -> None:
        if isinstance(value, dict):
            for key, child in value.items():
                walk(child, f"{path}/{key}" if path else key)
        elif isinstance(value, list):
            out[path] = len(value)
            for i, child in enumerate(value):
                walk(child, f"{path}[{i}]")

    walk(instance, "")
    return out


# ---------------------------------------------------------------------------
# exclusion ledger

@dataclass(frozen=True)
class ExclusionLedger:
    """Documents to drop and (doc, field) pairs to leave unscored."""

    removed_docs: frozenset[str] = frozenset()
    excluded_fields: tuple[tuple[str, str, str], ...] = ()  # (doc, path, reason)

    def __post_init__(self):
        seen = set()
        for doc_id, path, _reason in self.excluded_fields:
            if doc_id in self.removed_docs:
                raise ValueError(
                    f"field exclusion for removed document {doc_id!r}"
                )
            if (doc_id, path) in seen:
                raise ValueError(
                    f"duplicate exclusion for {doc_id!r}:{path!r}"
                )
            seen.add((doc_id, path))

    def is_removed(self, doc_id: str) -> bool:
        return doc_id in self.removed_docs

    def paths_for(self, doc_id: str) -> tuple[str, ...]:
        return tuple(
            path for d, path, _ in self.excluded_fields if d == doc_id
        )

    def to_dict(self) -> dict:
        return {
            "removed_docs": sorted(self.removed_docs),
            "excluded_fields": [
                {"doc_id": d, "field_path": p, "reason": r}
                for d, p, r in self.excluded_fields
            ],
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "ExclusionLedger":
        return cls(
            removed_docs=frozenset(raw.get("removed_docs", [])),
            excluded_fields=tuple(
                (e["doc_id"], e["field_path"], e.get("reason", ""))
                for e in raw.get("excluded_fields", [])
            ),
        )


def ledger_from_findings(findings: list[Finding]) -> ExclusionLedger:
    """Collapse findings into a ledger; field exclusions under a removed
    document fold into the removal."""
    removed = {
        f.doc_id for f in findings if f.severity is Severity.REMOVE_DOCUMENT
    }
    excluded = []
    seen = set()
    for f in findings:
        if (
            f.severity is Severity.EXCLUDE_FIELD
            and f.doc_id not in removed
            and f.field_path is not None
            and (f.doc_id, f.field_path) not in seen
        ):
            excluded.append((f.doc_id, f.field_path, f.kind.value))
            seen.add((f.doc_id, f.field_path))
    return ExclusionLedger(
        removed_docs=frozenset(removed), excluded_fields=tuple(excluded)
    )


def apply_ledger(
    gt: GroundTruthRecord, ledger: ExclusionLedger
) -> tuple[dict, list[Finding]]:
    """Filter GT leaves through the ledger.

    Returns the surviving {path: value} map (empty when the document is
    removed) plus warn findings for excluded paths that matched nothing.
    """
    if ledger.is_removed(gt.doc_id):
        return {}, []
    leaves = all_leaves(gt.values)
    warnings: list[Finding] = []
    survivors = dict(leaves)
    for path in ledger.paths_for(gt.doc_id):
        matched = [
            leaf for leaf in leaves
            if leaf == path
            or leaf.startswith(path + "/")
            or leaf.startswith(path + "[")
        ]
        if not matched:
            warnings.append(Finding(
                doc_id=gt.doc_id,
                kind=FindingKind.VALUE_NOT_FOUND,
                severity=Severity.WARN,
                field_path=path,
                detail="excluded path not present in ground truth",
            ))
            continue
        for leaf in matched:
            survivors.pop(leaf, None)
    return survivors, warnings


# ---------------------------------------------------------------------------
# file IO

def write_findings(path: str | Path, findings: list[Finding]) -> None:
    Path(path).write_text("", encoding="utf-8")
    for f in findings:
        append_jsonl(path, f.to_dict())


def read_findings(path: str | Path) -> list[Finding]:
    return [Finding.from_dict(raw) for raw in iter_jsonl(path)]


def write_ledger(path: str | Path, ledger: ExclusionLedger) -> None:
    write_json(path, ledger.to_dict())


def read_ledger(path: str | Path) -> ExclusionLedger:
    return ExclusionLedger.from_dict(read_json(path))
