import {
  PDFDocument, PDFDropdown, PDFField, PDFOptionList, PDFTextField,
} from "pdf-lib";

import { FillError, FillIssue } from "./errors";
import { loadPdf, parseDefaultAppearance } from "./pdfshared";

export interface FillResult {
  bytes: Uint8Array;
  /** Widget ids whose value exceeds the field's visual capacity; the
   * value is written anyway, the flag is for the caller's QA. */
  truncated: string[];
}

interface Target {
  field: PDFField;
  widgetWidth: number;
  declaredSize: number | null;
}

/** The id space must mirror extraction: multi-annotation fields expose
 * one id per annotation (name#0, name#1, ...), single ones the bare name. */
function fillTargets(doc: PDFDocument): Map<string, Target> {
  const out = new Map<string, Target>();
  for (const field of doc.getForm().getFields()) {
    if (
      !(field instanceof PDFTextField) &&
      !(field instanceof PDFDropdown) &&
      !(field instanceof PDFOptionList)
    ) {
      continue;
    }
    const da = field.acroField.getDefaultAppearance();
    const declaredSize = parseDefaultAppearance(da ?? undefined).fontSize;
    const annotations = field.acroField.getWidgets();
    const grouped = annotations.length > 1;
    annotations.forEach((annotation, index) => {
      const id = grouped ? `${field.getName()}#${index}` : field.getName();
      out.set(id, {
        field,
        widgetWidth: annotation.getRectangle().width,
        declaredSize,
      });
    });
  }
  return out;
}

/** Visual capacity mirrors the pipeline's estimate: average glyph width
 * of 0.6em. Auto-size fields shrink text to fit, so no limit applies. */
function fitsWidget(value: string, target: Target): boolean {
  if (!target.declaredSize || target.declaredSize <= 0) return true;
  const capacity = Math.max(
    1, Math.floor(target.widgetWidth / (0.6 * target.declaredSize)),
  );
  return value.length <= capacity;
}

export async function fill(
  bytes: Uint8Array,
  values: Record<string, string>,
): Promise<FillResult> {
  const doc = await loadPdf(bytes);
  const targets = fillTargets(doc);

  const issues: FillIssue[] = [];
  const truncated: string[] = [];
  const pending = new Map<PDFField, { id: string; value: string }>();

  for (const [id, value] of Object.entries(values)) {
    const target = targets.get(id);
    if (target === undefined) {
      issues.push({ id, message: "unknown widget id" });
      continue;
    }
    if (target.field.isReadOnly()) {
      issues.push({ id, message: "field is read-only" });
      continue;
    }
    // pdf-lib's select() quietly accepts values outside the options.
    if (
      (target.field instanceof PDFDropdown ||
        target.field instanceof PDFOptionList) &&
      !target.field.getOptions().includes(value)
    ) {
      issues.push({ id, message: `'${value}' is not one of the choice options` });
      continue;
    }
    const earlier = pending.get(target.field);
    if (earlier !== undefined) {
      if (earlier.value !== value) {
        issues.push({
          id,
          message:
            `conflicts with '${earlier.id}': annotations of one field share one value`,
        });
      }
      continue;
    }
    pending.set(target.field, { id, value });
    if (!fitsWidget(value, target)) {
      truncated.push(id);
    }
  }

  for (const [field, { id, value }] of pending) {
    try {
      if (field instanceof PDFTextField) {
        field.setText(value);
      } else if (field instanceof PDFDropdown || field instanceof PDFOptionList) {
        field.select(value);
      }
    } catch (err) {
      const message = err instanceof Error ? err.message : String(err);
      issues.push({ id, message });
    }
  }

  if (issues.length > 0) {
    throw new FillError(issues);
  }
  return { bytes: await doc.save(), truncated };
}
