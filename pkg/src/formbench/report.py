"""Aggregation: bootstrap CIs, quartile decay, reports in CSV and Markdown."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .scoring import INVALID_JSON, COMPLIANCE_LABELS, DocumentScore

DEFAULT_RESAMPLES = 10_000
DEFAULT_LEVEL = 0.95


def bootstrap_ci(
    values,
    level: float = DEFAULT_LEVEL,
    resamples: int = DEFAULT_RESAMPLES,
    seed: int = 0,
) -> tuple[float, float]:
    """Percentile bootstrap CI for the mean of document-level values."""
    data = np.asarray(list(values), dtype=np.float64)
    if data.size == 0:
        raise ValueError("bootstrap over an empty sample")
    if not 0.0 < level < 1.0:
        raise ValueError(f"confidence level must be in (0, 1), got {level}")
    rng = np.random.default_rng(seed)
    indices = rng.integers(0, data.size, size=(resamples, data.size))
    means = data[indices].mean(axis=1)
    alpha = (1.0 - level) / 2.0
    lo, hi = np.percentile(means, [100.0 * alpha, 100.0 * (1.0 - alpha)])
    return float(lo), float(hi)


@dataclass
class QuartileDecay:
    """Field accuracy by within-document position quartile."""

    accuracies: list[float | None] = field(default_factory=lambda: [None] * 4)
    ratio: float | None = None  # Q1 / Q4


def quartile_decay(scores: list[DocumentScore]) -> QuartileDecay:
    """Pool scorable fields into position quartiles across documents.

    A document's k-th quartile holds its fields with index in
    [ceil(n*k/4), ceil(n*(k+1)/4)); field order is GT assembly order,
    which follows the document layout.
    """
    sums = [0.0] * 4
    counts = [0] * 4
    for doc in scores:
        fields_in_doc = doc.scorable
        n = len(fields_in_doc)
        if n == 0:
            continue
        for k in range(4):
            start = math.ceil(n * k / 4)
            end = math.ceil(n * (k + 1) / 4)
            for f in fields_in_doc[start:end]:
                sums[k] += f.em
                counts[k] += 1
    out = QuartileDecay()
    for k in range(4):
        if counts[k]:
            out.accuracies[k] = sums[k] / counts[k]
    q1, q4 = out.accuracies[0], out.accuracies[3]
    if q1 is not None and q4 is not None and q4 > 0:
        out.ratio = q1 / q4
    return out


def empty_field_rate(scores: list[DocumentScore]) -> float:
    """Share of scorable fields left empty, over parseable documents.

    A field is empty when the prediction omitted it or supplied
    null/whitespace. Documents whose output never parsed are excluded:
    they say nothing about field-level abstention.
    """
    total = 0
    empty = 0
    for doc in scores:
        if doc.compliance == INVALID_JSON:
            continue
        for f in doc.scorable:
            total += 1
            pred = f.pred_value
            if pred is None or (isinstance(pred, str) and not pred.strip()):
                empty += 1
    if total == 0:
        return 0.0
    return empty / total


@dataclass
class AggregateReport:
    n_documents: int
    em: float
    anls: float
    perfect_rate: float
    em_ci: tuple[float, float]
    anls_ci: tuple[float, float]
    perfect_ci: tuple[float, float]
    by_category: dict[str, dict]
    compliance_counts: dict[str, int]
    quartiles: QuartileDecay
    empty_rate: float
    surplus_elements: int


def aggregate(
    scores: list[DocumentScore],
    seed: int = 0,
    resamples: int = DEFAULT_RESAMPLES,
    level: float = DEFAULT_LEVEL,
) -> AggregateReport:
    """Corpus-level reduction; document order never affects the result."""
    if not scores:
        raise ValueError("no documents to aggregate")
    ordered = sorted(scores, key=lambda s: s.doc_id)
    em_values = [doc.em for doc in ordered]
    anls_values = [doc.anls for doc in ordered]
    perfect_values = [1.0 if doc.perfect else 0.0 for doc in ordered]
    by_category: dict[str, dict] = {}
    for doc in ordered:
        bucket = by_category.setdefault(
            doc.category, {"n": 0, "em_sum": 0.0, "anls_sum": 0.0, "perfect": 0}
        )
        bucket["n"] += 1
        bucket["em_sum"] += doc.em
        bucket["anls_sum"] += doc.anls
        bucket["perfect"] += 1 if doc.perfect else 0
    categories = {
        name: {
            "n": b["n"],
            "em": b["em_sum"] / b["n"],
            "anls": b["anls_sum"] / b["n"],
            "perfect_rate": b["perfect"] / b["n"],
        }
        for name, b in by_category.items()
    }
    compliance = {label: 0 for label in COMPLIANCE_LABELS}
    for doc in ordered:
        compliance[doc.compliance] = compliance.get(doc.compliance, 0) + 1
    return AggregateReport(
        n_documents=len(ordered),
        em=float(np.mean(em_values)),
        anls=float(np.mean(anls_values)),
        perfect_rate=float(np.mean(perfect_values)),
        em_ci=bootstrap_ci(em_values, level, resamples, seed),
        anls_ci=bootstrap_ci(anls_values, level, resamples, seed),
        perfect_ci=bootstrap_ci(perfect_values, level, resamples, seed),
        by_category=categories,
        compliance_counts=compliance,
        quartiles=quartile_decay(ordered),
        empty_rate=empty_field_rate(ordered),
        surplus_elements=sum(doc.surplus_elements for doc in ordered),
    )


def _pct(value: float | None) -> str:
    if value is None:
        return "-"
    return f"{100.0 * value:.1f}"


def render_csv(report: AggregateReport) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["metric", "value", "ci_low", "ci_high"])
    writer.writerow(["n_documents", report.n_documents, "", ""])
    writer.writerow([
        "em", f"{report.em:.6f}",
        f"{report.em_ci[0]:.6f}", f"{report.em_ci[1]:.6f}",
    ])
    writer.writerow([
        "anls", f"{report.anls:.6f}",
        f"{report.anls_ci[0]:.6f}", f"{report.anls_ci[1]:.6f}",
    ])
    writer.writerow([
        "perfect_rate", f"{report.perfect_rate:.6f}",
        f"{report.perfect_ci[0]:.6f}", f"{report.perfect_ci[1]:.6f}",
    ])
    for name in sorted(report.by_category):
        bucket = report.by_category[name]
        writer.writerow([f"em[{name}]", f"{bucket['em']:.6f}", "", ""])
        writer.writerow([f"anls[{name}]", f"{bucket['anls']:.6f}", "", ""])
        writer.writerow([f"n[{name}]", bucket["n"], "", ""])
    for label in COMPLIANCE_LABELS:
        writer.writerow([
            f"compliance[{label}]", report.compliance_counts.get(label, 0), "", "",
        ])
    for k, acc in enumerate(report.quartiles.accuracies, start=1):
        writer.writerow([
            f"quartile_q{k}", "" if acc is None else f"{acc:.6f}", "", "",
        ])
    writer.writerow([
        "quartile_ratio",
        "" if report.quartiles.ratio is None else f"{report.quartiles.ratio:.6f}",
        "", "",
    ])
    writer.writerow(["empty_field_rate", f"{report.empty_rate:.6f}", "", ""])
    writer.writerow(["surplus_elements", report.surplus_elements, "", ""])
    return buffer.getvalue()


def render_markdown(report: AggregateReport) -> str:
    lines = [
        "# Benchmark report",
        "",
        f"Documents scored: {report.n_documents}",
        "",
        "Cells are EM with the perfect-document rate in parentheses,",
        "both in percent.",
        "",
        "| Slice | EM (Perfect) | ANLS | n |",
        "|---|---|---|---|",
        (
            f"| All | {_pct(report.em)} ({_pct(report.perfect_rate)}) "
            f"| {_pct(report.anls)} | {report.n_documents} |"
        ),
    ]
    for name in ("Flat", "Nested", "Table"):
        if name not in report.by_category:
            continue
        bucket = report.by_category[name]
        lines.append(
            f"| {name} | {_pct(bucket['em'])} ({_pct(bucket['perfect_rate'])}) "
            f"| {_pct(bucket['anls'])} | {bucket['n']} |"
        )
    lines += [
        "",
        f"95% CI for EM: [{_pct(report.em_ci[0])}, {_pct(report.em_ci[1])}]",
        (
            f"95% CI for the perfect rate: "
            f"[{_pct(report.perfect_ci[0])}, {_pct(report.perfect_ci[1])}]"
        ),
        "",
        "## Compliance",
        "",
        "| Outcome | Documents |",
        "|---|---|",
    ]
    for label in COMPLIANCE_LABELS:
        lines.append(f"| {label} | {report.compliance_counts.get(label, 0)} |")
    lines += [
        "",
        "## Position quartiles (EM)",
        "",
        "| Q1 | Q2 | Q3 | Q4 | Q1/Q4 |",
        "|---|---|---|---|---|",
        (
            "| " + " | ".join(_pct(a) for a in report.quartiles.accuracies)
            + " | "
            + (
                "-" if report.quartiles.ratio is None
                else f"{report.quartiles.ratio:.2f}"
            )
            + " |"
        ),
        "",
        f"Empty-field rate (parseable documents): {_pct(report.empty_rate)}",
        f"Surplus predicted array elements: {report.surplus_elements}",
        "",
    ]
    return "\n".join(lines)


def emit_report(
    scores: list[DocumentScore],
    csv_path: str | Path,
    md_path: str | Path,
    seed: int = 0,
    resamples: int = DEFAULT_RESAMPLES,
    level: float = DEFAULT_LEVEL,
) -> AggregateReport:
    """Aggregate and write both report files; output is byte-stable."""
    report = aggregate(scores, seed=seed, resamples=resamples, level=level)
    Path(csv_path).write_text(render_csv(report), encoding="utf-8")
    Path(md_path).write_text(render_markdown(report), encoding="utf-8")
    return report
