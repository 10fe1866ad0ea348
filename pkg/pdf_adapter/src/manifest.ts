/** Record of one adapter run: where the PDF came from and what was
 * emitted. Image paths are keyed by DPI as strings ("200", "50"). */
export interface AdapterManifest {
  source_pdf: string;
  docmodel: string;
  images: Record<string, string>;
}

export function serializeManifest(manifest: AdapterManifest): string {
  const images: Record<string, string> = {};
  for (const dpi of Object.keys(manifest.images).sort((a, b) => +a - +b)) {
    images[dpi] = manifest.images[dpi];
  }
  return JSON.stringify(
    { docmodel: manifest.docmodel, images, source_pdf: manifest.source_pdf },
    null,
    2,
  ) + "\n";
}
