import {
  PDFDict, PDFDocument, PDFName, PDFRawStream, PDFString, PDFHexString,
  decodePDFRawStream,
} from "pdf-lib";

import { PdfLoadError } from "./errors";

/** Open a PDF for reading or writing; damaged and encrypted inputs
 * raise PdfLoadError with a reason instead of a library stack trace. */
export async function loadPdf(bytes: Uint8Array): Promise<PDFDocument> {
  let doc: PDFDocument;
  try {
    doc = await PDFDocument.load(bytes, { updateMetadata: false });
  } catch (err) {
    const message = err instanceof Error ? err.message : String(err);
    if (/encrypted/i.test(message)) {
      throw new PdfLoadError("PDF is encrypted; decrypt it before processing");
    }
    throw new PdfLoadError(`not a readable PDF: ${message}`);
  }
  // pdf-lib recovers a pageless or catalog-less shell from many damaged
  // inputs rather than failing; treat both as unreadable.
  let pages = 0;
  try {
    pages = doc.getPageCount();
  } catch {
    throw new PdfLoadError("not a readable PDF: document catalog is broken");
  }
  if (pages === 0) {
    throw new PdfLoadError("not a readable PDF: no pages found");
  }
  return doc;
}

/** Font size and name out of a default-appearance string such as
 * "0 0 0 rg /Helv 10 Tf". Size 0 means auto-size per the PDF spec. */
export function parseDefaultAppearance(
  da: string | undefined,
): { fontName: string | null; fontSize: number | null } {
  if (!da) return { fontName: null, fontSize: null };
  const match = da.match(/\/([^\s/]+)\s+(\d+(?:\.\d+)?)\s+Tf/);
  if (!match) return { fontName: null, fontSize: null };
  return { fontName: match[1], fontSize: parseFloat(match[2]) };
}

const FONT_ALIASES: Record<string, string> = {
  Helv: "Helvetica",
  HeBo: "Helvetica-Bold",
  TiRo: "Times-Roman",
  Cour: "Courier",
};

export function canonicalFontName(raw: string | null): string {
  if (!raw) return "Helvetica";
  return FONT_ALIASES[raw] ?? raw;
}

/** Effective font size rendered into a widget's normal appearance
 * stream; null when there is no stream or it sets no font. Used for
 * auto-size fields, whose declared size of 0 says nothing. */
export function appearanceFontSize(
  doc: PDFDocument,
  widget: { getNormalAppearance(): unknown },
): number | null {
  let ap: unknown;
  try {
    ap = widget.getNormalAppearance();
  } catch {
    return null;
  }
  if (!ap) return null;
  const resolved = doc.context.lookup(ap as never);
  if (!(resolved instanceof PDFRawStream)) return null;
  let content: string;
  try {
    content = Buffer.from(decodePDFRawStream(resolved).decode()).toString("latin1");
  } catch {
    return null;
  }
  const match = content.match(/\/[^\s/]+\s+(\d+(?:\.\d+)?)\s+Tf/);
  return match ? parseFloat(match[1]) : null;
}

/** JavaScript source of the field's format action (/AA /F), if any.
 * Viewers attach AFDate_* / AFNumber_* helpers there, which is the only
 * portable signal that a text field holds dates or numbers. */
export function formatActionScript(
  doc: PDFDocument,
  acroFieldDict: PDFDict,
): string | null {
  const aaDict = doc.context.lookup(acroFieldDict.get(PDFName.of("AA")));
  if (!(aaDict instanceof PDFDict)) return null;
  const actionDict = doc.context.lookup(aaDict.get(PDFName.of("F")));
  if (!(actionDict instanceof PDFDict)) return null;
  const js = doc.context.lookup(actionDict.get(PDFName.of("JS")));
  if (js instanceof PDFString || js instanceof PDFHexString) {
    return js.decodeText();
  }
  return null;
}

/** A flattened copy: widget values stamped into the page content so
 * text extraction and rasterization see them. The input is untouched. */
export async function flattenedCopy(bytes: Uint8Array): Promise<Uint8Array> {
  const doc = await loadPdf(bytes);
  const form = doc.getForm();
  if (form.getFields().length > 0) {
    form.flatten();
  }
  return await doc.save();
}
