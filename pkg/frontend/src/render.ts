import { existsSync, mkdirSync, readFileSync, readdirSync, statSync, writeFileSync } from "fs";
import { basename, join } from "path";

import { readRows } from "./csv.js";
import { FIGURE_BUILDERS, Figure } from "./figures.js";
import { Report, ValidationError, reportSchema } from "./schema.js";

export interface ReportSpec {
  inputs: string[];          // CSV files or directories containing them
  outDir: string;
  figures?: string[];        // subset of FIGURE_BUILDERS keys; default all
}

interface InputBundle {
  csvPath: string;
  stem: string;
  report: Report | null;     // sibling JSON, when present
  figures: Figure[];
}

function collectCsvFiles(inputs: string[]): string[] {
  const out: string[] = [];
  for (const input of inputs) {
    if (!existsSync(input)) {
      throw new ValidationError("input does not exist", input);
    }
    if (statSync(input).isDirectory()) {
      for (const name of readdirSync(input).sort()) {
        if (name.endsWith(".csv")) out.push(join(input, name));
      }
    } else if (input.endsWith(".csv")) {
      out.push(input);
    }
  }
  return out;
}

/** Validate every input, build every figure, then write everything at once.

    Inputs are never mutated and a validation failure produces no output
    files at all. */
export function render(spec: ReportSpec): { index: string; figures: string[] } {
  const selections = spec.figures ?? Object.keys(FIGURE_BUILDERS);
  for (const sel of selections) {
    if (!(sel in FIGURE_BUILDERS)) {
      throw new ValidationError(`unknown figure selection '${sel}'`, "<spec>");
    }
  }
  const csvFiles = collectCsvFiles(spec.inputs);
  const bundles: InputBundle[] = [];
  for (const csvPath of csvFiles) {
    const rows = readRows(csvPath);   // throws ValidationError on bad input
    const stem = basename(csvPath, ".csv");
    const jsonPath = csvPath.replace(/\.csv$/, ".json");
    let report: Report | null = null;
    if (existsSync(jsonPath)) {
      const parsed = reportSchema.safeParse(JSON.parse(readFileSync(jsonPath, "utf-8")));
      if (!parsed.success) {
        throw new ValidationError(
          `report JSON does not validate: ${parsed.error.issues[0]?.message}`,
          jsonPath,
          parsed.error.issues.map((i) => i.path.join(".")),
        );
      }
      report = parsed.data;
    }
    const figures: Figure[] = [];
    for (const sel of selections) {
      const fig = FIGURE_BUILDERS[sel](rows);
      if (fig) figures.push(fig);
    }
    bundles.push({ csvPath, stem, report, figures });
  }

  mkdirSync(spec.outDir, { recursive: true });
  const written: string[] = [];
  for (const bundle of bundles) {
    for (const fig of bundle.figures) {
      const fileName = `${bundle.stem}__${fig.name}.svg`;
      writeFileSync(join(spec.outDir, fileName), fig.svg);
      written.push(fileName);
    }
  }
  const indexPath = join(spec.outDir, "index.html");
  writeFileSync(indexPath, buildIndex(bundles));
  return { index: indexPath, figures: written };
}

function buildIndex(bundles: InputBundle[]): string {
  const sections = bundles
    .map((b) => {
      const figs = b.figures
        .map(
          (f) =>
            `      <figure><a href="${b.stem}__${f.name}.svg"><img src="${b.stem}__${f.name}.svg" width="480" alt="${f.title}"/></a><figcaption>${f.title}</figcaption></figure>`,
        )
        .join("\n");
      const cfg = b.report
        ? `<details><summary>originating config (${b.report.kind})</summary><pre>${escapeHtml(
            JSON.stringify(b.report.config, null, 2),
          )}</pre></details>`
        : "<p><em>no report JSON alongside this CSV</em></p>";
      return [
        `  <section>`,
        `    <h2>${b.stem}</h2>`,
        `    ${cfg}`,
        figs || "    <p><em>no applicable figures</em></p>",
        `  </section>`,
      ].join("\n");
    })
    .join("\n");
  return [
    "<!DOCTYPE html>",
    '<html lang="en"><head><meta charset="utf-8"/>',
    "<title>polymerlab report index</title>",
    "<style>body{font-family:sans-serif;margin:2em}figure{display:inline-block;margin:1em}</style>",
    "</head><body>",
    "<h1>polymerlab figures</h1>",
    sections || "<p><em>no inputs</em></p>",
    "</body></html>",
    "",
  ].join("\n");
}

function escapeHtml(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}
