/**
 * Typed readers for the bandit harness CSV schemas.
 *
 * The renderer is a pure view of these files: every number in the figure
 * is traceable to a cell parsed here. Errors carry file and line
 * diagnostics so a broken pipeline points at the offending row.
 */

import { readFileSync } from "node:fs";
import Papa from "papaparse";

export class CsvError extends Error {
  constructor(
    public readonly file: string,
    public readonly line: number | null,
    message: string,
  ) {
    super(line === null ? `${file}: ${message}` : `${file}:${line}: ${message}`);
    this.name = "CsvError";
  }
}

export interface CurveRow {
  scenario: string;
  method: string;
  armX: number;
  trueMean: number;
  postMean: number;
  postUcb: number;
}

export interface PointRow {
  scenario: string;
  method: string;
  t: number;
  armX: number;
  reward: number;
}

export interface SummaryRow {
  scenario: string;
  method: string;
  seed: number;
  T: number;
  cumRegret: number;
  etaFinal: number;
}

type RawRow = Record<string, string>;

function parseRows(file: string, requiredColumns: string[]): RawRow[] {
  let text: string;
  try {
    text = readFileSync(file, "utf8");
  } catch (err) {
    throw new CsvError(file, null, `cannot read file (${(err as Error).message})`);
  }
  const result = Papa.parse<RawRow>(text.trim(), {
    header: true,
    skipEmptyLines: true,
  });
  if (result.errors.length > 0) {
    const e = result.errors[0];
    // papaparse rows are 0-based and exclude the header line
    const line = e.row == null ? null : e.row + 2;
    throw new CsvError(file, line, e.message);
  }
  const fields = result.meta.fields ?? [];
  for (const col of requiredColumns) {
    if (!fields.includes(col)) {
      throw new CsvError(file, 1, `missing required column "${col}" (found: ${fields.join(", ")})`);
    }
  }
  return result.data;
}

function num(file: string, line: number, row: RawRow, col: string): number {
  const raw = row[col];
  const v = Number(raw);
  if (raw === undefined || raw === "" || Number.isNaN(v)) {
    throw new CsvError(file, line, `column "${col}" is not a number: "${raw}"`);
  }
  return v;
}

/** curves.csv: posterior mean/UCB over the arm grid at the final round. */
export function readCurves(file: string): CurveRow[] {
  const rows = parseRows(file, [
    "scenario",
    "method",
    "arm_x",
    "true_mean",
    "post_mean",
    "post_ucb",
  ]);
  return rows.map((row, i) => ({
    scenario: row.scenario,
    method: row.method,
    armX: num(file, i + 2, row, "arm_x"),
    trueMean: num(file, i + 2, row, "true_mean"),
    postMean: num(file, i + 2, row, "post_mean"),
    postUcb: num(file, i + 2, row, "post_ucb"),
  }));
}

/** points.csv: the (arm, reward) training points of the recorded episode. */
export function readPoints(file: string): PointRow[] {
  const rows = parseRows(file, ["scenario", "method", "t", "arm_x", "reward"]);
  return rows.map((row, i) => ({
    scenario: row.scenario,
    method: row.method,
    t: num(file, i + 2, row, "t"),
    armX: num(file, i + 2, row, "arm_x"),
    reward: num(file, i + 2, row, "reward"),
  }));
}

/** bandit_summary.csv: final regret per (scenario, method, seed). */
export function readSummary(file: string): SummaryRow[] {
  const rows = parseRows(file, [
    "scenario",
    "method",
    "seed",
    "T",
    "cum_regret",
    "eta_final",
  ]);
  return rows.map((row, i) => ({
    scenario: row.scenario,
    method: row.method,
    seed: num(file, i + 2, row, "seed"),
    T: num(file, i + 2, row, "T"),
    cumRegret: num(file, i + 2, row, "cum_regret"),
    etaFinal: num(file, i + 2, row, "eta_final"),
  }));
}
