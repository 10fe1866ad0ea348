"""Structure-aware scoring: normalization, EM, ANLS, array matching.

Leaves are compared after a shared normalization (NFC, trimmed, inner
whitespace collapsed, numbers in shortest round-trip form, null as the
empty string; case-sensitive unless configured otherwise). Arrays are
matched order-invariantly: elements pair up to maximize the number of
exactly-matching leaves, ties broken toward the lowest (gt, pred) index
pair. Unmatched GT leaves score zero; surplus predicted elements are
tallied but never enter the EM denominator.
"""

from __future__ import annotations

import math
import re
import unicodedata
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Any

import numpy as np
from scipy.optimize import linear_sum_assignment

from .genpipe import GroundTruthRecord
from .jsonutil import parse_lenient
from .schema import classify_structure, inline_defs, iter_leaf_paths

if TYPE_CHECKING:  # qa imports scoring helpers; avoid the cycle at runtime
    from .qa import ExclusionLedger

__all__ = [
    "ScoreConfig", "FieldScore", "DocumentScore", "ArrayAssignment",
    "normalize_value", "levenshtein", "score_field_anls", "flatten",
    "FlatView", "all_leaves", "match_arrays", "classify_compliance",
    "unwrap_envelope", "score_document", "inline_defs", "classify_structure",
]

DEFAULT_TAU = 0.5

_WS_RE = re.compile(r"\s+")

COMPLIANT = "compliant"
INVALID_JSON = "invalid_json"
SCHEMA_REPRODUCTION = "schema_reproduction"
SCHEMA_WRAPPED = "schema_wrapped"
OTHER_NONCOMPLIANT = "other_noncompliant"

COMPLIANCE_LABELS = (
    COMPLIANT, INVALID_JSON, SCHEMA_REPRODUCTION, SCHEMA_WRAPPED,
    OTHER_NONCOMPLIANT,
)

_JSON_TYPE_NAMES = {
    "object", "array", "string", "number", "integer", "boolean", "null",
}


@dataclass(frozen=True)
class ScoreConfig:
    tau: float = DEFAULT_TAU
    case_sensitive: bool = True

    def __post_init__(self):
        if not 0.0 <= self.tau <= 1.0:
            raise ValueError(f"tau must be within [0, 1], got {self.tau}")


def normalize_value(value: Any, case_sensitive: bool = True) -> str:
    """Collapse a leaf to its canonical comparison string.

    None becomes ""; numbers use the shortest round-trip decimal form
    (ints plain, integral floats without the .0); strings are NFC
    normalized, trimmed, inner whitespace collapsed to single spaces.
    """
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if math.isfinite(value) and value == int(value):
            return str(int(value))
        return repr(value)
    if not isinstance(value, str):
        value = str(value)
    out = unicodedata.normalize("NFC", value)
    out = _WS_RE.sub(" ", out).strip()
    if not case_sensitive:
        out = out.lower()
    return out


def levenshtein(a: str, b: str) -> int:
    """Edit distance with two-row dynamic programming."""
    if a == b:
        return 0
    if not a:
        return len(b)
    if not b:
        return len(a)
    if len(a) < len(b):
        a, b = b, a
    previous = list(range(len(b) + 1))
    current = [0] * (len(b) + 1)
    for i, ca in enumerate(a, start=1):
        current[0] = i
        for j, cb in enumerate(b, start=1):
            cost = 0 if ca == cb else 1
            current[j] = min(
                previous[j] + 1,       # deletion
                current[j - 1] + 1,    # insertion
                previous[j - 1] + cost,
            )
        previous, current = current, previous
    return previous[len(b)]


def score_field_anls(gt: str, pred: str, tau: float = DEFAULT_TAU) -> float:
    """ANLS between normalized strings: 1 - dist/maxlen, floored at tau.

    Similarities below tau collapse to 0. Two empty strings are a perfect
    match.
    """
    if gt == pred:
        return 1.0
    longest = max(len(gt), len(pred))
    if longest == 0:
        return 1.0
    similarity = 1.0 - levenshtein(gt, pred) / longest
    return similarity if similarity >= tau else 0.0


# ---------------------------------------------------------------------------
# flattening

@dataclass
class FlatView:
    """Scalar leaves by path, plus arrays kept whole for matching."""

    leaves: dict[str, Any] = field(default_factory=dict)
    arrays: dict[str, list] = field(default_factory=dict)


def flatten(instance: Any, schema: dict | None = None) -> FlatView:
    """Split an instance into scalar leaves and top-level-of-array units.

    Arrays stop the descent: they are matched element-wise later, not
    flattened through, so element order cannot affect leaf pairing. The
    schema parameter is accepted for symmetry but the instance's own
    shape drives the walk (predictions rarely conform exactly).
    """
    view = FlatView()

    def walk(value: Any, path: str) -> None:
        if isinstance(value, dict):
            for key, child in value.items():
                walk(child, f"{path}/{key}" if path else key)
        elif isinstance(value, list):
            view.arrays[path] = value
        else:
            view.leaves[path] = value

    walk(instance, "")
    return view


def all_leaves(instance: Any) -> dict[str, Any]:
    """Every scalar leaf including array elements, with explicit indices."""
    out: dict[str, Any] = {}

    def walk(value: Any, path: str) -> None:
        if isinstance(value, dict):
            for key, child in value.items():
                walk(child, f"{path}/{key}" if path else key)
        elif isinstance(value, list):
            for i, child in enumerate(value):
                walk(child, f"{path}[{i}]")
        else:
            out[path] = value

    walk(instance, "")
    return out


def element_leaves(element: Any) -> dict[str, Any]:
    """Leaves of one array element, relative paths ('' for a bare scalar)."""
    if isinstance(element, (dict, list)):
        return all_leaves(element)
    return {"": element}


# ---------------------------------------------------------------------------
# order-invariant array matching

@dataclass
class ArrayAssignment:
    pairs: list[tuple[int, int]] = field(default_factory=list)
    unmatched_gt: list[int] = field(default_factory=list)
    surplus_pred: list[int] = field(default_factory=list)
    total_overlap: int = 0


def _overlap_matrix(
    gt_elements: list, pred_elements: list, case_sensitive: bool
) -> np.ndarray:
    gt_flat = [
        {k: normalize_value(v, case_sensitive) for k, v in element_leaves(e).items()}
        for e in gt_elements
    ]
    pred_flat = [
        {k: normalize_value(v, case_sensitive) for k, v in element_leaves(e).items()}
        for e in pred_elements
    ]
    matrix = np.zeros((len(gt_elements), len(pred_elements)), dtype=np.int64)
    for i, g in enumerate(gt_flat):
        for j, p in enumerate(pred_flat):
            matrix[i, j] = sum(1 for k, v in g.items() if p.get(k) == v)
    return matrix


def _best_total(matrix: np.ndarray) -> int:
    if matrix.size == 0:
        return 0
    rows, cols = linear_sum_assignment(matrix, maximize=True)
    return int(matrix[rows, cols].sum())


def match_arrays(
    gt_elements: list, pred_elements: list, case_sensitive: bool = True
) -> ArrayAssignment:
    """Pair array elements to maximize exactly-matching leaf count.

    The assignment is maximal (min(len(gt), len(pred)) pairs) and, among
    maximizing assignments, lexicographically smallest in (gt, pred)
    index order: each GT element in turn takes the lowest-index available
    prediction that still allows the optimal total.
    """
    out = ArrayAssignment()
    n, m = len(gt_elements), len(pred_elements)
    if n == 0 or m == 0:
        out.unmatched_gt = list(range(n))
        out.surplus_pred = list(range(m))
        return out
    matrix = _overlap_matrix(gt_elements, pred_elements, case_sensitive)
    target = _best_total(matrix)
    available = list(range(m))
    remaining = target
    for gi in range(n):
        rows_after = list(range(gi + 1, n))
        chosen = None
        for ci, col in enumerate(available):
            rest_cols = available[:ci] + available[ci + 1:]
            sub = matrix[np.ix_(rows_after, rest_cols)]
            if int(matrix[gi, col]) + _best_total(sub) == remaining:
                chosen = col
                break
        if chosen is not None:
            out.pairs.append((gi, chosen))
            available.remove(chosen)
            remaining -= int(matrix[gi, chosen])
        else:
            # every optimal assignment leaves this GT element unpaired
            # (only possible when predictions are scarcer than GT rows)
            out.unmatched_gt.append(gi)
    out.surplus_pred = available
    out.total_overlap = target
    return out


# ---------------------------------------------------------------------------
# compliance

def unwrap_envelope(parsed: Any) -> Any:
    """Strip schema-shaped wrappers from a prediction, recursively.

    {"type": "object", "properties": X} becomes unwrap(X); an items list
    under an array wrapper is unwrapped element-wise; single-key value
    envelopes such as {"value": X} unwrap to X. Anything else is
    returned unchanged, so the function is idempotent.
    """
    if isinstance(parsed, list):
        return [unwrap_envelope(item) for item in parsed]
    if not isinstance(parsed, dict):
        return parsed
    keys = set(parsed)
    if "properties" in keys and isinstance(parsed["properties"], dict) and \
            keys <= {"type", "properties", "$defs", "$schema", "title",
                     "description", "required", "additionalProperties"}:
        return unwrap_envelope(parsed["properties"])
    if "items" in keys and isinstance(parsed["items"], list) and \
            keys <= {"type", "items", "description", "title"}:
        return [unwrap_envelope(item) for item in parsed["items"]]
    if len(keys) == 1:
        only = next(iter(keys))
        if only in ("value", "const", "default", "example"):
            return unwrap_envelope(parsed[only])
    return {k: unwrap_envelope(v) for k, v in parsed.items()}


def _resolve_plain(root: Any, path: str) -> tuple[bool, Any]:
    """Follow an index-free path through dicts only."""
    node = root
    for raw in path.split("/"):
        name = raw.split("[")[0]
        if not isinstance(node, dict) or name not in node:
            return False, None
        node = node[name]
    return True, node


def _echo_fraction(root: Any, schema: dict) -> float:
    """Fraction of resolvable schema leaf positions holding type-objects."""
    if not isinstance(root, dict):
        return 0.0
    resolvable = 0
    echoes = 0
    seen_bases: set[str] = set()
    for path, _node in iter_leaf_paths(schema):
        if "[]" in path:
            base = path.split("[]")[0]
            if base in seen_bases:
                continue
            seen_bases.add(base)
            found, value = _resolve_plain(root, base)
            if not found:
                continue
            resolvable += 1
            if isinstance(value, dict) and value.get("type") in _JSON_TYPE_NAMES:
                echoes += 1
            continue
        found, value = _resolve_plain(root, path)
        if not found:
            continue
        resolvable += 1
        if isinstance(value, dict) and value.get("type") in _JSON_TYPE_NAMES:
            echoes += 1
    if resolvable == 0:
        return 0.0
    return echoes / resolvable


def _has_scalar_leaf(value: Any) -> bool:
    if isinstance(value, dict):
        return any(_has_scalar_leaf(v) for v in value.values())
    if isinstance(value, list):
        return any(_has_scalar_leaf(v) for v in value)
    return True


def classify_compliance(parsed: Any, schema: dict) -> str:
    """Label a parsed prediction. Rules apply in order:

    invalid_json (nothing parsed), schema_reproduction (at least half the
    resolvable schema leaf positions hold schema type-objects, looking at
    both the root and root["properties"]), schema_wrapped (instance
    buried under a properties wrapper), compliant (shares leaf paths with
    the schema, no wrapper), other_noncompliant.
    """
    if parsed is None:
        return INVALID_JSON
    roots = [parsed]
    if isinstance(parsed, dict) and isinstance(parsed.get("properties"), dict):
        roots.append(parsed["properties"])
    if any(_echo_fraction(root, schema) >= 0.5 for root in roots):
        return SCHEMA_REPRODUCTION
    if (
        isinstance(parsed, dict)
        and isinstance(parsed.get("properties"), dict)
        and _has_scalar_leaf(parsed["properties"])
    ):
        return SCHEMA_WRAPPED
    if isinstance(parsed, dict) and "$defs" not in parsed and "properties" not in parsed:
        schema_paths = {_wildcard(p) for p, _ in iter_leaf_paths(schema)}
        pred_paths = {_wildcard(p) for p in all_leaves(parsed)}
        if schema_paths & pred_paths:
            return COMPLIANT
    return OTHER_NONCOMPLIANT


def _wildcard(path: str) -> str:
    return re.sub(r"\[\d*\]", "[]", path)


# ---------------------------------------------------------------------------
# document scoring

STATUS_MATCHED = "matched"
STATUS_MISMATCHED = "mismatched"
STATUS_MISSING = "missing"
STATUS_EXCLUDED = "excluded"

_MISSING = object()


@dataclass
class FieldScore:
    field_path: str
    em: int
    anls: float
    status: str
    gt_value: Any = None
    pred_value: Any = None

    def to_dict(self) -> dict:
        return {
            "field_path": self.field_path,
            "em": self.em,
            "anls": round(self.anls, 6),
            "status": self.status,
            "gt_value": self.gt_value,
            "pred_value": self.pred_value,
        }


@dataclass
class DocumentScore:
    doc_id: str
    category: str
    compliance: str
    fields: list[FieldScore]
    surplus_elements: int = 0

    @property
    def scorable(self) -> list[FieldScore]:
        return [f for f in self.fields if f.status != STATUS_EXCLUDED]

    @property
    def em(self) -> float:
        scorable = self.scorable
        if not scorable:
            return 0.0
        return sum(f.em for f in scorable) / len(scorable)

    @property
    def anls(self) -> float:
        scorable = self.scorable
        if not scorable:
            return 0.0
        return sum(f.anls for f in scorable) / len(scorable)

    @property
    def perfect(self) -> bool:
        scorable = self.scorable
        return bool(scorable) and all(f.em == 1 for f in scorable)

    def to_dict(self) -> dict:
        return {
            "doc_id": self.doc_id,
            "category": self.category,
            "compliance": self.compliance,
            "em": round(self.em, 6),
            "anls": round(self.anls, 6),
            "perfect": self.perfect,
            "surplus_elements": self.surplus_elements,
            "fields": [f.to_dict() for f in self.fields],
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "DocumentScore":
        return cls(
            doc_id=raw["doc_id"],
            category=raw["category"],
            compliance=raw["compliance"],
            surplus_elements=raw.get("surplus_elements", 0),
            fields=[
                FieldScore(
                    field_path=f["field_path"],
                    em=f["em"],
                    anls=f["anls"],
                    status=f["status"],
                    gt_value=f.get("gt_value"),
                    pred_value=f.get("pred_value"),
                )
                for f in raw["fields"]
            ],
        )


def _score_leaf(
    path: str, gt_value: Any, pred_value: Any, config: ScoreConfig
) -> FieldScore:
    if pred_value is _MISSING:
        gt_norm = normalize_value(gt_value, config.case_sensitive)
        # an absent field and an empty GT agree
        em = 1 if gt_norm == "" else 0
        return FieldScore(
            field_path=path,
            em=em,
            anls=1.0 if em else 0.0,
            status=STATUS_MATCHED if em else STATUS_MISSING,
            gt_value=gt_value,
            pred_value=None,
        )
    gt_norm = normalize_value(gt_value, config.case_sensitive)
    pred_norm = normalize_value(pred_value, config.case_sensitive)
    em = 1 if gt_norm == pred_norm else 0
    anls = score_field_anls(gt_norm, pred_norm, config.tau)
    return FieldScore(
        field_path=path,
        em=em,
        anls=anls,
        status=STATUS_MATCHED if em else STATUS_MISMATCHED,
        gt_value=gt_value,
        pred_value=pred_value,
    )


def score_document(
    gt: GroundTruthRecord,
    schema: dict,
    prediction_text: str,
    ledger: ExclusionLedger | None = None,
    config: ScoreConfig | None = None,
) -> DocumentScore:
    """Score one prediction against one GT record.

    The prediction is parsed leniently; schema-wrapped output is
    unwrapped before field comparison so wrapper shape costs compliance
    accounting but not accuracy. Excluded fields keep a FieldScore with
    status "excluded" and stay out of every average.
    """
    config = config or ScoreConfig()
    category = classify_structure(schema)
    parsed = parse_lenient(prediction_text)
    compliance = classify_compliance(parsed, schema)
    working = parsed
    if compliance == SCHEMA_WRAPPED:
        working = unwrap_envelope(parsed)
    if not isinstance(working, (dict, list)):
        working = {}

    removed = ledger.is_removed(gt.doc_id) if ledger else False
    excluded_paths = ledger.paths_for(gt.doc_id) if ledger else ()

    def is_excluded(path: str) -> bool:
        if removed:
            return True
        wild = _wildcard(path)
        for ex in excluded_paths:
            exw = _wildcard(ex)
            if wild == exw or wild.startswith(exw + "/") or wild.startswith(exw + "["):
                return True
        return False

    gt_view = flatten(gt.values)
    pred_view = flatten(working)
    fields: list[FieldScore] = []
    surplus = 0

    for path, gt_value in gt_view.leaves.items():
        if is_excluded(path):
            fields.append(FieldScore(path, 0, 0.0, STATUS_EXCLUDED, gt_value, None))
            continue
        pred_value = pred_view.leaves.get(path, _MISSING)
        fields.append(_score_leaf(path, gt_value, pred_value, config))

    for array_path, gt_elements in gt_view.arrays.items():
        pred_elements = pred_view.arrays.get(array_path, [])
        if is_excluded(array_path):
            for gi, element in enumerate(gt_elements):
                for rel, gt_value in element_leaves(element).items():
                    full = _element_path(array_path, gi, rel)
                    fields.append(
                        FieldScore(full, 0, 0.0, STATUS_EXCLUDED, gt_value, None)
                    )
            continue
        assignment = match_arrays(gt_elements, pred_elements, config.case_sensitive)
        surplus += len(assignment.surplus_pred)
        paired = dict(assignment.pairs)
        for gi, element in enumerate(gt_elements):
            pred_leaves = (
                element_leaves(pred_elements[paired[gi]]) if gi in paired else {}
            )
            for rel, gt_value in element_leaves(element).items():
                full = _element_path(array_path, gi, rel)
                if is_excluded(full):
                    fields.append(
                        FieldScore(full, 0, 0.0, STATUS_EXCLUDED, gt_value, None)
                    )
                    continue
                pred_value = pred_leaves.get(rel, _MISSING)
                fields.append(_score_leaf(full, gt_value, pred_value, config))

    return DocumentScore(
        doc_id=gt.doc_id,
        category=category,
        compliance=compliance,
        fields=fields,
        surplus_elements=surplus,
    )


def _element_path(array_path: str, index: int, rel: str) -> str:
    base = f"{array_path}[{index}]"
    return f"{base}/{rel}" if rel else base
