/** The PDF could not be opened: damaged bytes or encryption. */
export class PdfLoadError extends Error {}

/** The form has no usable widgets once boolean fields are dropped. */
export class NoFieldsError extends Error {}

/** One entry per widget id that could not be filled. */
export interface FillIssue {
  id: string;
  message: string;
}

export class FillError extends Error {
  readonly issues: FillIssue[];

  constructor(issues: FillIssue[]) {
    super(issues.map((i) => `${i.id}: ${i.message}`).join("; "));
    this.issues = issues;
  }
}
