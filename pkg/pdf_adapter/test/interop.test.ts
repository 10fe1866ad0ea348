/** The adapter's only contract with the benchmark pipeline is the
 * .docmodel.json format. This test hands an extraction to the Python
 * side's strict parser and expects it back unchanged in substance.
 */

import { spawnSync } from "node:child_process";
import * as path from "node:path";

import { describe, expect, it } from "vitest";

import { serializeDocument } from "../src/docmodel";
import { extract } from "../src/extract";
import { fill } from "../src/fill";
import { fixtureBytes } from "./helpers";

const PIPELINE_SRC = path.join(__dirname, "..", "..", "src");

const PY_CHECK = `
import json, sys
sys.path.insert(0, ${JSON.stringify(PIPELINE_SRC)})
from formbench.docmodel import read_document
doc = read_document(sys.stdin.buffer.read())
print(json.dumps({
    "doc_id": doc.doc_id,
    "widgets": len(doc.widgets),
    "spans": len(doc.spans),
    "kinds": sorted({w.field_kind.value for w in doc.widgets}),
    "groups": sorted({w.array_group for w in doc.widgets if w.array_group}),
}))
`;

function pythonAvailable(): boolean {
  const probe = spawnSync("python3", ["--version"]);
  return probe.status === 0;
}

describe.skipIf(!pythonAvailable())("pipeline interop", () => {
  it("extraction output passes the pipeline's strict parser", async () => {
    const { bytes } = await fill(fixtureBytes("benefit_form.pdf"), {
      applicant_name: "Maria Lopez",
      plan: "Annual",
    });
    const { doc } = await extract(bytes, "benefit-filled");
    const payload = serializeDocument(doc);

    const proc = spawnSync("python3", ["-c", PY_CHECK], {
      input: payload,
      encoding: "utf-8",
    });
    expect(proc.stderr).toBe("");
    expect(proc.status).toBe(0);
    const summary = JSON.parse(proc.stdout);
    expect(summary).toEqual({
      doc_id: "benefit-filled",
      widgets: 8,
      spans: doc.spans.length,
      kinds: ["choice", "date", "numeric", "text"],
      groups: ["item"],
    });
  });

  it("a checkbox smuggled into the payload is rejected over there", async () => {
    const { doc } = await extract(fixtureBytes("benefit_form.pdf"), "benefit");
    const raw = JSON.parse(serializeDocument(doc));
    raw.widgets.push({
      id: "agree", field_kind: "checkbox",
      bbox: [100, 100, 114, 114], font_size: 10, font_name: "Helvetica",
    });
    const proc = spawnSync("python3", ["-c", PY_CHECK], {
      input: JSON.stringify(raw),
      encoding: "utf-8",
    });
    expect(proc.status).not.toBe(0);
    expect(proc.stderr).toContain("checkbox");
  });
});
