import { z } from "zod";

/** Frozen CSV column order emitted by the primary CLI. */
export const CSV_COLUMNS = [
  "graph_family",
  "graph_hash",
  "graph_params",
  "law",
  "env_seed",
  "beta",
  "n",
  "k",
  "statistic",
  "value",
  "stderr",
  "lo",
  "hi",
  "extra",
] as const;

export interface Row {
  readonly graph_family: string;
  readonly graph_hash: string;
  readonly graph_params: string;
  readonly law: string;
  readonly env_seed: string;
  readonly beta: number | null;
  readonly n: number | null;
  readonly k: number | null;
  readonly statistic: string;
  readonly value: number | null;
  readonly stderr: number | null;
  readonly lo: number | null;
  readonly hi: number | null;
  readonly extra: string;
}

/** JSON report schema (mirrors docs/report.schema.json). */
export const reportSchema = z
  .object({
    schema: z.literal("polymerlab-report-v1"),
    kind: z.string(),
    version: z.string(),
    config: z.record(z.unknown()),
    verdicts: z.array(z.record(z.unknown())),
    errors: z.array(z.unknown()),
    row_count: z.number().int().nonnegative(),
    passed: z.boolean().nullable().optional(),
    timestamp: z.string(),
  })
  .strict();

export type Report = z.infer<typeof reportSchema>;

export class ValidationError extends Error {
  constructor(
    message: string,
    readonly file: string,
    readonly offendingColumns: string[] = [],
  ) {
    super(`${file}: ${message}${offendingColumns.length ? ` (columns: ${offendingColumns.join(", ")})` : ""}`);
  }
}
