import * as fs from "node:fs";
import * as path from "node:path";

import { DocumentModel, TextSpan, Widget } from "../src/docmodel";

export const FIXTURES = path.join(__dirname, "fixtures");

export function fixtureBytes(name: string): Uint8Array {
  return new Uint8Array(fs.readFileSync(path.join(FIXTURES, name)));
}

export const ENCRYPTED_PDF = new TextEncoder().encode(`%PDF-1.4
1 0 obj
<< /Type /Catalog /Pages 2 0 R >>
endobj
2 0 obj
<< /Type /Pages /Kids [3 0 R] /Count 1 >>
endobj
3 0 obj
<< /Type /Page /Parent 2 0 R /MediaBox [0 0 612 792] >>
endobj
4 0 obj
<< /Filter /Standard /V 1 /R 2 /O <00> /U <00> /P -44 >>
endobj
trailer
<< /Size 5 /Root 1 0 R /Encrypt 4 0 R >>
%%EOF
`);

/** Width and height straight out of the IHDR chunk, independent of any
 * image library. */
export function pngSize(png: Uint8Array): { width: number; height: number } {
  const signature = [0x89, 0x50, 0x4e, 0x47, 0x0d, 0x0a, 0x1a, 0x0a];
  signature.forEach((byte, i) => {
    if (png[i] !== byte) throw new Error("not a PNG");
  });
  const view = new DataView(png.buffer, png.byteOffset, png.byteLength);
  return { width: view.getUint32(16), height: view.getUint32(20) };
}

export function widgetById(doc: DocumentModel, id: string): Widget {
  const widget = doc.widgets.find((w) => w.id === id);
  if (!widget) throw new Error(`no widget '${id}' in ${doc.doc_id}`);
  return widget;
}

/** True when the span sits inside the bbox, allowing `slack` points of
 * play on every edge. The span box spans from the baseline upward by
 * its height, matching how text is painted. */
export function spanInsideBbox(
  span: TextSpan,
  bbox: [number, number, number, number],
  slack: number,
): boolean {
  const [x0, y0, x1, y1] = bbox;
  return (
    span.x >= x0 - slack &&
    span.x + span.width <= x1 + slack &&
    span.baseline_y - span.height >= y0 - slack &&
    span.baseline_y <= y1 + slack
  );
}

export function spansWithText(doc: DocumentModel, text: string): TextSpan[] {
  return doc.spans.filter((s) => s.text === text);
}
