export {
  DocumentModel, FieldKind, TextSpan, Widget,
  round3, serializeDocument, validateDocument,
} from "./docmodel";
export { FillError, FillIssue, NoFieldsError, PdfLoadError } from "./errors";
export { DroppedField, ExtractResult, extract } from "./extract";
export { FillResult, fill } from "./fill";
export { AdapterManifest, serializeManifest } from "./manifest";
export { RasterResult, rasterize } from "./rasterize";
export { flattenedCopy, loadPdf, parseDefaultAppearance } from "./pdfshared";
