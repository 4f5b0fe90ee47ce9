import { readFileSync } from "fs";
import Papa from "papaparse";

import { CSV_COLUMNS, Row, ValidationError } from "./schema.js";

const NUMERIC: ReadonlyArray<keyof Row> = ["beta", "n", "k", "value", "stderr", "lo", "hi"];

/** Parse one measurement CSV, enforcing the frozen header and numeric fields. */
export function readRows(path: string): Row[] {
  const text = readFileSync(path, "utf-8");
  const parsed = Papa.parse<Record<string, string>>(text.trim(), {
    header: true,
    skipEmptyLines: true,
  });
  if (parsed.errors.length > 0) {
    const first = parsed.errors[0];
    throw new ValidationError(`CSV parse failure: ${first.message} (row ${first.row})`, path);
  }
  const header = parsed.meta.fields ?? [];
  if (header.length !== CSV_COLUMNS.length || header.some((h, i) => h !== CSV_COLUMNS[i])) {
    const bad = [
      ...header.filter((h) => !(CSV_COLUMNS as readonly string[]).includes(h)),
      ...CSV_COLUMNS.filter((c) => !header.includes(c)).map((c) => `missing:${c}`),
    ];
    throw new ValidationError("header does not match the frozen schema", path, bad);
  }
  const rows: Row[] = [];
  for (const [index, raw] of parsed.data.entries()) {
    const bad: string[] = [];
    const numeric: Partial<Record<keyof Row, number | null>> = {};
    for (const col of NUMERIC) {
      const cell = (raw[col] ?? "").trim();
      if (cell === "") {
        numeric[col] = null;
      } else {
        const v = Number(cell);
        if (!Number.isFinite(v)) bad.push(col);
        numeric[col] = v;
      }
    }
    if (bad.length) {
      throw new ValidationError(`non-numeric value in data row ${index + 1}`, path, bad);
    }
    if (!raw.statistic) {
      throw new ValidationError(`empty statistic in data row ${index + 1}`, path, ["statistic"]);
    }
    rows.push({
      graph_family: raw.graph_family ?? "",
      graph_hash: raw.graph_hash ?? "",
      graph_params: raw.graph_params ?? "",
      law: raw.law ?? "",
      env_seed: raw.env_seed ?? "",
      beta: numeric.beta ?? null,
      n: numeric.n ?? null,
      k: numeric.k ?? null,
      statistic: raw.statistic,
      value: numeric.value ?? null,
      stderr: numeric.stderr ?? null,
      lo: numeric.lo ?? null,
      hi: numeric.hi ?? null,
      extra: raw.extra ?? "",
    });
  }
  return rows;
}
