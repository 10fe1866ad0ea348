/** Loader for the pdf.js legacy build (ESM) from CommonJS.
 *
 * The legacy build expects a handful of browser globals; @napi-rs/canvas
 * provides them, and installing them before the dynamic import makes the
 * library's own environment checks pass. The module is cached because
 * pdf.js keeps global state (worker setup) that must not be duplicated.
 */

import * as path from "node:path";

import * as canvas from "@napi-rs/canvas";

import { PdfLoadError } from "./errors";

type PdfjsModule = typeof import("pdfjs-dist/legacy/build/pdf.mjs", {
  with: { "resolution-mode": "import" },
});

let cached: Promise<PdfjsModule> | null = null;

export function loadPdfjs(): Promise<PdfjsModule> {
  if (!cached) {
    const globals = globalThis as Record<string, unknown>;
    for (const name of ["DOMMatrix", "Path2D", "ImageData"] as const) {
      if (globals[name] === undefined) globals[name] = canvas[name];
    }
    cached = import("pdfjs-dist/legacy/build/pdf.mjs");
  }
  return cached;
}

/** pdf.js falls back to bundled fonts for the 14 standard PDF fonts;
 * in Node that means reading them from the package directory. */
export function standardFontsDir(): string {
  const packageRoot = path.dirname(require.resolve("pdfjs-dist/package.json"));
  return path.join(packageRoot, "standard_fonts") + path.sep;
}

export async function openWithPdfjs(bytes: Uint8Array) {
  const pdfjs = await loadPdfjs();
  try {
    return await pdfjs.getDocument({
      data: bytes.slice(),  // pdf.js transfers the buffer; keep ours intact
      standardFontDataUrl: standardFontsDir(),
      isEvalSupported: false,
    }).promise;
  } catch (err) {
    const message = err instanceof Error ? err.message : String(err);
    throw new PdfLoadError(`not a readable PDF: ${message}`);
  }
}
