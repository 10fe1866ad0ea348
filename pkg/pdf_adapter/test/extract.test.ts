import { beforeAll, describe, expect, it } from "vitest";

import { NoFieldsError, PdfLoadError } from "../src/errors";
import { ExtractResult, extract } from "../src/extract";
import { validateDocument } from "../src/docmodel";
import {
  ENCRYPTED_PDF, fixtureBytes, spanInsideBbox, spansWithText, widgetById,
} from "./helpers";

let result: ExtractResult;

beforeAll(async () => {
  result = await extract(fixtureBytes("benefit_form.pdf"), "benefit");
});

describe("extract on the benefit form", () => {
  it("returns a valid document with the page geometry", () => {
    expect(validateDocument(result.doc)).toEqual([]);
    expect(result.doc.doc_id).toBe("benefit");
    expect(result.doc.page_width).toBe(612);
    expect(result.doc.page_height).toBe(792);
  });

  it("emits one widget per fillable annotation", () => {
    expect(result.doc.widgets.map((w) => w.id).sort()).toEqual([
      "applicant_name", "fee_amount", "item#0", "item#1",
      "notes", "plan", "ref_code", "start_date",
    ]);
  });

  it("drops the checkbox and logs why", () => {
    expect(result.dropped).toEqual([
      { name: "agree", reason: "checkbox (boolean input)" },
    ]);
  });

  it("types fields from their format actions", () => {
    expect(widgetById(result.doc, "applicant_name").field_kind).toBe("text");
    expect(widgetById(result.doc, "fee_amount").field_kind).toBe("numeric");
    expect(widgetById(result.doc, "start_date").field_kind).toBe("date");
  });

  it("carries dropdown options on the choice widget", () => {
    const plan = widgetById(result.doc, "plan");
    expect(plan.field_kind).toBe("choice");
    expect(plan.choice_options).toEqual(["Monthly", "Annual"]);
  });

  it("splits a two-annotation field into grouped widgets", () => {
    const first = widgetById(result.doc, "item#0");
    const second = widgetById(result.doc, "item#1");
    expect(first.array_group).toBe("item");
    expect(second.array_group).toBe("item");
    expect(first.bbox[0]).toBeLessThan(second.bbox[0]);
    expect(widgetById(result.doc, "applicant_name").array_group).toBeUndefined();
  });

  it("flips widget boxes to top-left coordinates", () => {
    // Placed at (140, 692) with size 180x16 from the bottom-left origin;
    // pdf-lib grows the rect by its default 1pt-border half-width, so
    // the stored annotation rect is (139.5, 691.5) sized 181x17.
    const [x0, y0, x1, y1] = widgetById(result.doc, "applicant_name").bbox;
    expect(x0).toBe(139.5);
    expect(x1).toBe(320.5);
    expect(y0).toBe(792 - 708.5);
    expect(y1).toBe(792 - 691.5);
    expect(y0).toBeLessThan(y1);
  });

  it("records font size and name from the default appearance", () => {
    const widget = widgetById(result.doc, "applicant_name");
    expect(widget.font_size).toBe(10);
    expect(widget.font_name).toBe("Helvetica");
    expect(result.autoSized).toEqual([]);
  });

  it("captures the static label spans with positions", () => {
    const labels = spansWithText(result.doc, "Name:");
    expect(labels).toHaveLength(1);
    expect(labels[0].x).toBeCloseTo(40, 1);
    expect(labels[0].baseline_y).toBeCloseTo(792 - 696, 1);
    expect(spansWithText(result.doc, "Benefit Enrollment")).toHaveLength(1);
  });

  it("sees pre-filled values as spans inside their widget", () => {
    const ref = spansWithText(result.doc, "RC-7");
    expect(ref.length).toBeGreaterThanOrEqual(1);
    const bbox = widgetById(result.doc, "ref_code").bbox;
    expect(ref.some((s) => spanInsideBbox(s, bbox, 2))).toBe(true);
  });

  it("emits no empty or whitespace-only spans", () => {
    for (const span of result.doc.spans) {
      expect(span.text.trim()).not.toBe("");
    }
  });
});

describe("extract error paths", () => {
  it("rejects a checkbox-only form and names the dropped field", async () => {
    await expect(
      extract(fixtureBytes("checkbox_only.pdf"), "boxes"),
    ).rejects.toThrow(NoFieldsError);
    await expect(
      extract(fixtureBytes("checkbox_only.pdf"), "boxes"),
    ).rejects.toThrow(/agree.*checkbox/);
  });

  it("rejects an encrypted PDF with a clear message", async () => {
    await expect(extract(ENCRYPTED_PDF, "enc")).rejects.toThrow(PdfLoadError);
    await expect(extract(ENCRYPTED_PDF, "enc")).rejects.toThrow(/encrypted/);
  });

  it("rejects garbage bytes", async () => {
    const garbage = new TextEncoder().encode("%PDF-1.4 not really a pdf");
    await expect(extract(garbage, "bad")).rejects.toThrow(PdfLoadError);
  });

  it("rejects a truncated real PDF", async () => {
    const whole = fixtureBytes("benefit_form.pdf");
    const truncated = whole.slice(0, 400);
    await expect(extract(truncated, "cut")).rejects.toThrow(PdfLoadError);
  });
});
