"""Modality exports: plain text, spatial text, and rasterized pages.

Both text exports are pure functions of the document geometry. Lines are
baseline clusters (within half the median span height); plain text joins
a line's spans left to right with single spaces, spatial text places
each span on a character grid whose cell width is the median per-glyph
advance. Every span's tokens appear in both exports exactly once, so the
two modalities carry identical content in different shapes.
"""

import math
import statistics
import zlib
from dataclasses import dataclass, field
from pathlib import Path

from .docmodel import DocumentModel, ModalityKind, TextSpan
from .jsonutil import read_json, write_json
from .schema import classify_structure  # re-exported: structure is per-schema

__all__ = [
    "ModalityBundle", "cluster_lines", "export_plain_text",
    "export_spatial_text", "export_document", "load_bundle",
    "classify_structure", "render_page_png",
]

FALLBACK_CELL_WIDTH = 6.0


def cluster_lines(spans: tuple[TextSpan, ...]) -> list[list[TextSpan]]:
    """Group spans into lines by baseline proximity.

    Spans within half the median span height of the line's first baseline
    share a line; the threshold falls back to 6pt when the document has
    no usable heights. Lines come back top-to-bottom, spans left-to-right.
    """
    if not spans:
        return []
    heights = [s.height for s in spans if s.height > 0]
    threshold = 0.5 * statistics.median(heights) if heights else FALLBACK_CELL_WIDTH
    if threshold <= 0:
        threshold = FALLBACK_CELL_WIDTH
    ordered = sorted(spans, key=lambda s: (s.baseline_y, s.x, s.text))
    lines: list[list[TextSpan]] = []
    anchor = None
    for span in ordered:
        if anchor is None or span.baseline_y - anchor > threshold:
            lines.append([span])
            anchor = span.baseline_y
        else:
            lines[-1].append(span)
    for line in lines:
        line.sort(key=lambda s: (s.x, s.baseline_y, s.text))
    return lines


def export_plain_text(doc: DocumentModel) -> str:
    """Reading-order text: one output line per baseline cluster."""
    return "\n".join(
        " ".join(span.text for span in line) for line in cluster_lines(doc.spans)
    )


def _cell_width(doc: DocumentModel) -> float:
    advances = [s.width / len(s.text) for s in doc.spans if s.text and s.width > 0]
    if not advances:
        return FALLBACK_CELL_WIDTH
    cw = statistics.median(advances)
    return cw if cw > 0 else FALLBACK_CELL_WIDTH


def export_spatial_text(doc: DocumentModel) -> str:
    """Monospace-grid text preserving horizontal alignment.

    A span starts at column round(x / cell_width); overlapping spans
    shift right far enough to keep one space of separation, so the token
    multiset matches the plain export.
    """
    lines = cluster_lines(doc.spans)
    if not lines:
        return ""
    cw = _cell_width(doc)
    out = []
    for line in lines:
        text = ""
        for span in line:
            start = int(math.floor(span.x / cw + 0.5))
            if text:
                start = max(start, len(text) + 1)
            text = text.ljust(start) + span.text
        out.append(text.rstrip())
    return "\n".join(out)


@dataclass
class ModalityBundle:
    """Everything a benchmark run can feed a model for one document."""

    doc_id: str
    plain_text: str
    spatial_text: str
    image_paths: dict[int, str] = field(default_factory=dict)  # dpi -> path

    def text_for(self, modality: ModalityKind) -> str | None:
        if modality is ModalityKind.PLAIN:
            return self.plain_text
        if modality in (ModalityKind.SPATIAL, ModalityKind.SPATIAL_IMAGE):
            return self.spatial_text
        return None


def export_document(
    doc: DocumentModel,
    out_dir: str | Path,
    dpis: tuple[int, ...] = (200, 50),
) -> dict:
    """Write the per-document modality files plus a manifest; returns it.

    Files: {doc_id}.plain.txt, {doc_id}.spatial.txt, {doc_id}.{dpi}dpi.png
    and {doc_id}.manifest.json tying them together.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    plain = export_plain_text(doc)
    spatial = export_spatial_text(doc)
    plain_path = out_dir / f"{doc.doc_id}.plain.txt"
    spatial_path = out_dir / f"{doc.doc_id}.spatial.txt"
    plain_path.write_text(plain, encoding="utf-8")
    spatial_path.write_text(spatial, encoding="utf-8")
    images = {}
    for dpi in dpis:
        png_path = out_dir / f"{doc.doc_id}.{dpi}dpi.png"
        png_path.write_bytes(render_page_png(doc, dpi))
        images[str(dpi)] = png_path.name
    manifest = {
        "doc_id": doc.doc_id,
        "plain_text": plain_path.name,
        "spatial_text": spatial_path.name,
        "images": images,
    }
    write_json(out_dir / f"{doc.doc_id}.manifest.json", manifest)
    return manifest


def load_bundle(manifest_path: str | Path) -> ModalityBundle:
    manifest_path = Path(manifest_path)
    raw = read_json(manifest_path)
    base = manifest_path.parent
    return ModalityBundle(
        doc_id=raw["doc_id"],
        plain_text=(base / raw["plain_text"]).read_text(encoding="utf-8"),
        spatial_text=(base / raw["spatial_text"]).read_text(encoding="utf-8"),
        image_paths={
            int(dpi): str(base / name) for dpi, name in raw.get("images", {}).items()
        },
    )


# ---------------------------------------------------------------------------
# rasterization
#
# The image modality needs deterministic page bitmaps, not typography:
# each character becomes a dark block on white, sized by the requested
# dpi, which preserves exactly the layout signal the text modalities
# carry. PNG encoding is stdlib zlib; no imaging library.


def render_page_png(doc: DocumentModel, dpi: int) -> bytes:
    """Rasterize the document's spatial grid to a grayscale PNG.

    The bitmap is page_size * dpi / 72 pixels; glyph cells are filled
    blocks whose darkness varies with the character so the image carries
    the same information layout as the spatial text.
    """
    if dpi <= 0:
        raise ValueError(f"dpi must be positive, got {dpi}")
    width = max(1, round(doc.page_width * dpi / 72))
    height = max(1, round(doc.page_height * dpi / 72))
    canvas = bytearray(b"\xff" * (width * height))
    scale = dpi / 72.0
    for span in doc.spans:
        px = span.x * scale
        py = (span.baseline_y - span.height) * scale
        glyph_w = max(1.0, 0.6 * span.height * scale)
        glyph_h = max(1.0, span.height * scale)
        for i, ch in enumerate(span.text):
            if ch.isspace():
                continue
            shade = 32 + (ord(ch) * 7) % 96
            x0 = int(px + i * glyph_w)
            x1 = int(px + (i + 1) * glyph_w - max(1.0, glyph_w / 4))
            y0 = int(py)
            y1 = int(py + glyph_h - max(1.0, glyph_h / 5))
            for y in range(max(0, y0), min(height, max(y0 + 1, y1))):
                row = y * width
                for x in range(max(0, x0), min(width, max(x0 + 1, x1))):
                    canvas[row + x] = shade
    return _encode_png_gray(bytes(canvas), width, height)


def _png_chunk(kind: bytes, payload: bytes) -> bytes:
    chunk = kind + payload
    return (
        len(payload).to_bytes(4, "big")
        + chunk
        + (zlib.crc32(chunk) & 0xFFFFFFFF).to_bytes(4, "big")
    )


def _encode_png_gray(pixels: bytes, width: int, height: int) -> bytes:
    header = (
        width.to_bytes(4, "big")
        + height.to_bytes(4, "big")
        + bytes([8, 0, 0, 0, 0])  # 8-bit grayscale, no interlace
    )
    raw = b"".join(
        b"\x00" + pixels[y * width : (y + 1) * width] for y in range(height)
    )
    return b"".join([
        b"\x89PNG\r\n\x1a\n",
        _png_chunk(b"IHDR", header),
        _png_chunk(b"IDAT", zlib.compress(raw, 6)),
        _png_chunk(b"IEND", b""),
    ])
