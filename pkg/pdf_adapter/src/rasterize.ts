import { createCanvas } from "@napi-rs/canvas";

import { loadPdfjs, openWithPdfjs } from "./pdfjs";
import { flattenedCopy } from "./pdfshared";

export interface RasterResult {
  png: Buffer;
  width: number;
  height: number;
}

/** Render page 1 to PNG. Pixel dimensions are page points scaled by
 * dpi/72 and rounded, so dimensions stay exactly linear in dpi whenever
 * the products are whole numbers (612x792 at 200 -> 1700x2200, at 50 ->
 * 425x550). Form values are stamped via a flattened copy first; pdf.js
 * does not paint widget appearance streams on a bare canvas. */
export async function rasterize(
  bytes: Uint8Array,
  dpi: number,
): Promise<RasterResult> {
  if (!Number.isFinite(dpi) || dpi <= 0) {
    throw new Error(`dpi must be positive, got ${dpi}`);
  }
  const pdfjs = await loadPdfjs();
  const flat = await flattenedCopy(bytes);
  const pdf = await openWithPdfjs(flat);
  try {
    const page = await pdf.getPage(1);
    const viewport = page.getViewport({ scale: dpi / 72 });
    const width = Math.round(viewport.width);
    const height = Math.round(viewport.height);
    const canvas = createCanvas(width, height);
    const context = canvas.getContext("2d");
    context.fillStyle = "white";
    context.fillRect(0, 0, width, height);
    await page.render({
      canvas: canvas as unknown as HTMLCanvasElement,
      canvasContext: context as unknown as CanvasRenderingContext2D,
      viewport,
      annotationMode: pdfjs.AnnotationMode.ENABLE,
    } as Parameters<typeof page.render>[0]).promise;
    return { png: canvas.toBuffer("image/png"), width, height };
  } finally {
    await pdf.destroy();
  }
}
