/** The neutral document format shared with the benchmark pipeline.
 *
 * Coordinates are PDF points with the origin at the top-left corner and
 * y growing downward; a widget bbox is [x0, y0, x1, y1] with x0 < x1 and
 * y0 < y1. Spans record the text baseline, not a box corner.
 */

export type FieldKind = "text" | "date" | "numeric" | "choice";

export interface Widget {
  id: string;
  field_kind: FieldKind;
  bbox: [number, number, number, number];
  font_size: number;
  font_name: string;
  choice_options?: string[];
  array_group?: string;
}

export interface TextSpan {
  text: string;
  x: number;
  baseline_y: number;
  width: number;
  height: number;
}

export interface DocumentModel {
  doc_id: string;
  page_width: number;
  page_height: number;
  language: string;
  widgets: Widget[];
  spans: TextSpan[];
}

/** Quantize to at most 3 decimals so output bytes are stable across
 * float noise (1/72-point jitter is far below visual relevance). */
export function round3(value: number): number {
  return Math.round(value * 1000) / 1000;
}

/** Invariants the consumer enforces at parse time; checked here so a
 * broken extraction fails in this process, not downstream. */
export function validateDocument(doc: DocumentModel): string[] {
  const violations: string[] = [];
  if (!doc.doc_id) violations.push("doc_id must be non-empty");
  if (doc.page_width <= 0 || doc.page_height <= 0) {
    violations.push(
      `page size must be positive, got ${doc.page_width} x ${doc.page_height}`,
    );
  }
  const seen = new Set<string>();
  for (const w of doc.widgets) {
    const label = `widget '${w.id}'`;
    if (!w.id) violations.push("widget id must be non-empty");
    else if (seen.has(w.id)) violations.push(`duplicate widget id '${w.id}'`);
    seen.add(w.id);
    const [x0, y0, x1, y1] = w.bbox;
    if (!(x0 < x1 && y0 < y1)) {
      violations.push(`${label}: bbox must satisfy x0 < x1 and y0 < y1`);
    }
    if (x0 < 0 || y0 < 0 || x1 > doc.page_width || y1 > doc.page_height) {
      violations.push(`${label}: bbox extends outside the page`);
    }
    if (w.font_size <= 0) violations.push(`${label}: font_size must be positive`);
    if (w.field_kind === "choice") {
      if (!w.choice_options || w.choice_options.length === 0) {
        violations.push(`${label}: choice widget needs choice_options`);
      } else if (new Set(w.choice_options).size !== w.choice_options.length) {
        violations.push(`${label}: choice_options must be distinct`);
      } else if (w.choice_options.some((o) => !o)) {
        violations.push(`${label}: choice_options must be non-empty strings`);
      }
    } else if (w.choice_options !== undefined) {
      violations.push(`${label}: choice_options only allowed on choice widgets`);
    }
  }
  doc.spans.forEach((s, i) => {
    const label = `span[${i}]`;
    if (!s.text) violations.push(`${label}: text must be non-empty`);
    if (s.width < 0) violations.push(`${label}: width must be >= 0`);
    if (s.height < 0) violations.push(`${label}: height must be >= 0`);
    if (
      !(0 <= s.x && s.x <= doc.page_width) ||
      !(0 <= s.baseline_y && s.baseline_y <= doc.page_height)
    ) {
      violations.push(`${label}: position outside the page`);
    }
  });
  return violations;
}

function sortKeysDeep(value: unknown): unknown {
  if (Array.isArray(value)) return value.map(sortKeysDeep);
  if (value !== null && typeof value === "object") {
    const out: Record<string, unknown> = {};
    for (const key of Object.keys(value as object).sort()) {
      out[key] = sortKeysDeep((value as Record<string, unknown>)[key]);
    }
    return out;
  }
  return value;
}

/** Serialize with sorted keys and a trailing newline; validation runs
 * first so we never emit a document the pipeline would reject. */
export function serializeDocument(doc: DocumentModel): string {
  const violations = validateDocument(doc);
  if (violations.length > 0) {
    throw new Error(`refusing to serialize invalid document: ${violations.join("; ")}`);
  }
  return JSON.stringify(sortKeysDeep(doc), null, 2) + "\n";
}
