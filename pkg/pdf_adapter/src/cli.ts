#!/usr/bin/env node
/** Command-line interface.
 *
 * Exit codes mirror the pipeline CLI: 0 success, 1 operational failure
 * (unreadable PDF, bad values, no fields), 2 usage errors.
 */

import * as fs from "node:fs";
import * as path from "node:path";
import { parseArgs } from "node:util";

import { serializeDocument } from "./docmodel";
import { FillError } from "./errors";
import { extract } from "./extract";
import { fill } from "./fill";
import { AdapterManifest, serializeManifest } from "./manifest";
import { rasterize } from "./rasterize";

const USAGE = `usage: pdf-adapter <command> [options]

commands:
  extract    --in form.pdf --out doc.docmodel.json
             [--doc-id ID] [--dpi N]... [--manifest manifest.json]
  fill       --in form.pdf --values values.json --out filled.pdf
  rasterize  --in form.pdf --dpi N --out page.png
`;

class UsageError extends Error {}

function readPdf(file: string): Uint8Array {
  try {
    return new Uint8Array(fs.readFileSync(file));
  } catch (err) {
    throw new Error(`cannot read ${file}: ${err instanceof Error ? err.message : err}`);
  }
}

function writeOutput(file: string, data: string | Uint8Array): void {
  fs.mkdirSync(path.dirname(path.resolve(file)), { recursive: true });
  fs.writeFileSync(file, data);
}

async function cmdExtract(argv: string[]): Promise<void> {
  const { values } = parseArgs({
    args: argv,
    options: {
      in: { type: "string" },
      out: { type: "string" },
      "doc-id": { type: "string" },
      dpi: { type: "string", multiple: true },
      manifest: { type: "string" },
    },
  });
  if (!values.in || !values.out) throw new UsageError("extract needs --in and --out");
  const docId = values["doc-id"] ?? path.basename(values.in, ".pdf");
  const bytes = readPdf(values.in);
  const result = await extract(bytes, docId);
  for (const d of result.dropped) {
    process.stderr.write(`dropped field '${d.name}': ${d.reason}\n`);
  }
  for (const id of result.autoSized) {
    process.stderr.write(`auto-size field '${id}': recorded rendered size\n`);
  }
  for (const name of result.offPage) {
    process.stderr.write(`field '${name}': annotations beyond page 1 skipped\n`);
  }
  writeOutput(values.out, serializeDocument(result.doc));

  const images: Record<string, string> = {};
  for (const raw of values.dpi ?? []) {
    const dpi = Number(raw);
    if (!Number.isInteger(dpi)) {
      throw new UsageError(`--dpi must be an integer, got ${raw}`);
    }
    const { png } = await rasterize(bytes, dpi);
    const imagePath = path.join(
      path.dirname(values.out), `${docId}.${dpi}dpi.png`,
    );
    writeOutput(imagePath, png);
    images[String(dpi)] = imagePath;
  }
  if (values.manifest) {
    const manifest: AdapterManifest = {
      source_pdf: values.in,
      docmodel: values.out,
      images,
    };
    writeOutput(values.manifest, serializeManifest(manifest));
  }
  process.stdout.write(
    `${result.doc.widgets.length} widgets, ${result.doc.spans.length} spans`
    + ` -> ${values.out}\n`,
  );
}

async function cmdFill(argv: string[]): Promise<void> {
  const { values } = parseArgs({
    args: argv,
    options: {
      in: { type: "string" },
      values: { type: "string" },
      out: { type: "string" },
    },
  });
  if (!values.in || !values.values || !values.out) {
    throw new UsageError("fill needs --in, --values and --out");
  }
  let fillValues: Record<string, string>;
  try {
    fillValues = JSON.parse(fs.readFileSync(values.values, "utf-8"));
  } catch (err) {
    throw new Error(`cannot read values: ${err instanceof Error ? err.message : err}`);
  }
  const result = await fill(readPdf(values.in), fillValues);
  for (const id of result.truncated) {
    process.stderr.write(`truncation: value for '${id}' exceeds visual capacity\n`);
  }
  writeOutput(values.out, result.bytes);
  process.stdout.write(
    `filled ${Object.keys(fillValues).length} widgets -> ${values.out}\n`,
  );
}

async function cmdRasterize(argv: string[]): Promise<void> {
  const { values } = parseArgs({
    args: argv,
    options: {
      in: { type: "string" },
      dpi: { type: "string" },
      out: { type: "string" },
    },
  });
  if (!values.in || !values.dpi || !values.out) {
    throw new UsageError("rasterize needs --in, --dpi and --out");
  }
  const dpi = Number(values.dpi);
  if (!Number.isInteger(dpi)) {
    throw new UsageError(`--dpi must be an integer, got ${values.dpi}`);
  }
  const { png, width, height } = await rasterize(readPdf(values.in), dpi);
  writeOutput(values.out, png);
  process.stdout.write(`${width}x${height} px at ${dpi} dpi -> ${values.out}\n`);
}

export async function run(argv: string[]): Promise<number> {
  const [command, ...rest] = argv;
  try {
    if (command === "extract") await cmdExtract(rest);
    else if (command === "fill") await cmdFill(rest);
    else if (command === "rasterize") await cmdRasterize(rest);
    else if (command === undefined) throw new UsageError("missing command");
    else throw new UsageError(`unknown command '${command}'`);
  } catch (err) {
    if (err instanceof UsageError) {
      process.stderr.write(`error: ${err.message}\n${USAGE}`);
      return 2;
    }
    if (err instanceof FillError) {
      for (const issue of err.issues) {
        process.stderr.write(`error: ${issue.id}: ${issue.message}\n`);
      }
      return 1;
    }
    if (err instanceof Error && err.name === "TypeError"
        && /option|argument/i.test(err.message)) {
      process.stderr.write(`error: ${err.message}\n${USAGE}`);
      return 2;
    }
    if (err instanceof Error) {
      process.stderr.write(`error: ${err.message}\n`);
      return 1;
    }
    throw err;
  }
  return 0;
}

if (require.main === module) {
  run(process.argv.slice(2)).then(
    (code) => process.exit(code),
    (err) => {
      process.stderr.write(`error: ${err?.message ?? err}\n`);
      process.exit(1);
    },
  );
}
