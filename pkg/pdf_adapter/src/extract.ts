import {
  PDFArray, PDFButton, PDFCheckBox, PDFDict, PDFDocument, PDFDropdown,
  PDFField, PDFName, PDFOptionList, PDFRadioGroup, PDFSignature, PDFString,
  PDFTextField,
} from "pdf-lib";

import {
  DocumentModel, FieldKind, TextSpan, Widget, round3, validateDocument,
} from "./docmodel";
import { NoFieldsError } from "./errors";
import { openWithPdfjs } from "./pdfjs";
import {
  appearanceFontSize, canonicalFontName, flattenedCopy, formatActionScript,
  loadPdf, parseDefaultAppearance,
} from "./pdfshared";

export interface DroppedField {
  name: string;
  reason: string;
}

export interface ExtractResult {
  doc: DocumentModel;
  /** Fields that cannot carry text values (checkboxes and friends). */
  dropped: DroppedField[];
  /** Widget ids whose declared font size was 0 (viewer auto-size); the
   * emitted size is the one found in the rendered appearance stream. */
  autoSized: string[];
  /** Widget ids skipped because their annotation is not on page 1. */
  offPage: string[];
}

const DEFAULT_FONT_SIZE = 10;

function fieldKindOf(doc: PDFDocument, field: PDFTextField): FieldKind {
  const script = formatActionScript(doc, field.acroField.dict) ?? "";
  if (/\bAFDate_/.test(script)) return "date";
  if (/\bAFNumber_|\bAFPercent_/.test(script)) return "numeric";
  return "text";
}

function dropReason(field: PDFField): string | null {
  if (field instanceof PDFCheckBox) return "checkbox (boolean input)";
  if (field instanceof PDFRadioGroup) return "radio group (boolean input)";
  if (field instanceof PDFButton) return "push button";
  if (field instanceof PDFSignature) return "signature field";
  return null;
}

/** Dicts of the annotations attached to page 1, for membership tests. */
function pageOneAnnotations(doc: PDFDocument): Set<PDFDict> {
  const page = doc.getPage(0);
  const annots = page.node.Annots();
  const out = new Set<PDFDict>();
  if (annots instanceof PDFArray) {
    for (let i = 0; i < annots.size(); i++) {
      const resolved = doc.context.lookup(annots.get(i));
      if (resolved instanceof PDFDict) out.add(resolved);
    }
  }
  return out;
}

function formDefaultAppearance(doc: PDFDocument): string | undefined {
  const acroForm = doc.getForm().acroForm.dict;
  const da = doc.context.lookup(acroForm.get(PDFName.of("DA")));
  return da instanceof PDFString ? da.decodeText() : undefined;
}

export async function extract(
  bytes: Uint8Array,
  docId: string,
): Promise<ExtractResult> {
  const doc = await loadPdf(bytes);
  const page = doc.getPage(0);
  const { width: pageWidth, height: pageHeight } = page.getSize();
  const onPageOne = pageOneAnnotations(doc);
  const formDa = formDefaultAppearance(doc);

  const widgets: Widget[] = [];
  const dropped: DroppedField[] = [];
  const autoSized: string[] = [];
  const offPage: string[] = [];

  for (const field of doc.getForm().getFields()) {
    const name = field.getName();
    const reason = dropReason(field);
    if (reason !== null) {
      dropped.push({ name, reason });
      continue;
    }

    let kind: FieldKind;
    let options: string[] | undefined;
    if (field instanceof PDFTextField) {
      kind = fieldKindOf(doc, field);
    } else if (field instanceof PDFDropdown || field instanceof PDFOptionList) {
      options = field.getOptions();
      if (options.length === 0) {
        dropped.push({ name, reason: "choice field without options" });
        continue;
      }
      kind = "choice";
    } else {
      dropped.push({ name, reason: `unsupported field type ${field.constructor.name}` });
      continue;
    }

    const da = field.acroField.getDefaultAppearance() ?? formDa;
    const { fontName, fontSize: declaredSize } = parseDefaultAppearance(da);

    const annotations = field.acroField.getWidgets();
    const visible = annotations.filter((w) => onPageOne.has(w.dict));
    const grouped = visible.length > 1;
    visible.forEach((annotation, index) => {
      const id = grouped ? `${name}#${index}` : name;
      let size = declaredSize;
      if (!size || size <= 0) {
        size = appearanceFontSize(doc, annotation) ?? DEFAULT_FONT_SIZE;
        autoSized.push(id);
      }
      const rect = annotation.getRectangle();
      const x0 = Math.max(0, rect.x);
      const x1 = Math.min(pageWidth, rect.x + rect.width);
      const y0 = Math.max(0, pageHeight - (rect.y + rect.height));
      const y1 = Math.min(pageHeight, pageHeight - rect.y);
      if (!(x0 < x1 && y0 < y1)) {
        dropped.push({ name: id, reason: "degenerate bbox after page clamp" });
        return;
      }
      widgets.push({
        id,
        field_kind: kind,
        bbox: [round3(x0), round3(y0), round3(x1), round3(y1)],
        font_size: round3(size),
        font_name: canonicalFontName(fontName),
        ...(options !== undefined ? { choice_options: options } : {}),
        ...(grouped ? { array_group: name } : {}),
      });
    });
    if (visible.length < annotations.length) {
      offPage.push(name);
    }
  }

  if (widgets.length === 0) {
    const detail = dropped.length
      ? ` (dropped: ${dropped.map((d) => `${d.name} [${d.reason}]`).join(", ")})`
      : "";
    throw new NoFieldsError(`no fillable fields on page 1${detail}`);
  }

  const spans = await extractSpans(bytes, pageHeight);
  const model: DocumentModel = {
    doc_id: docId,
    page_width: round3(pageWidth),
    page_height: round3(pageHeight),
    language: "en",
    widgets,
    spans,
  };
  const violations = validateDocument(model);
  if (violations.length > 0) {
    throw new Error(`extraction produced an invalid document: ${violations.join("; ")}`);
  }
  return { doc: model, dropped, autoSized, offPage };
}

/** Page-1 text with positions. Field values only exist in annotation
 * appearance streams, so the text pass runs over a flattened copy where
 * they have been stamped into the page content. */
async function extractSpans(
  bytes: Uint8Array,
  pageHeight: number,
): Promise<TextSpan[]> {
  const flat = await flattenedCopy(bytes);
  const pdf = await openWithPdfjs(flat);
  try {
    const page = await pdf.getPage(1);
    const content = await page.getTextContent();
    const spans: TextSpan[] = [];
    for (const item of content.items) {
      if (!("str" in item) || item.str.trim() === "") continue;
      spans.push({
        text: item.str,
        x: round3(item.transform[4]),
        baseline_y: round3(pageHeight - item.transform[5]),
        width: round3(item.width),
        height: round3(item.height),
      });
    }
    return spans;
  } finally {
    await pdf.destroy();
  }
}
