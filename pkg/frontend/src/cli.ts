#!/usr/bin/env node
/**
 * render --in <harness output dir> --out <figure.svg>
 *
 * Reads curves.csv, points.csv, and (optionally) bandit_summary.csv from
 * the input directory and writes one deterministic multi-panel SVG.
 * Nonzero exit with file/line diagnostics on missing or ill-formed input;
 * nothing is written unless rendering succeeds.
 */

import { existsSync, writeFileSync } from "node:fs";
import { join } from "node:path";
import yargs from "yargs";
import { hideBin } from "yargs/helpers";
import { CsvError, readCurves, readPoints, readSummary, type SummaryRow } from "./csv.js";
import { FigureError, renderFigure } from "./figure.js";

export function run(inDir: string, outFile: string): void {
  const curves = readCurves(join(inDir, "curves.csv"));
  const points = readPoints(join(inDir, "points.csv"));
  const summaryPath = join(inDir, "bandit_summary.csv");
  const summary: SummaryRow[] = existsSync(summaryPath) ? readSummary(summaryPath) : [];
  const svg = renderFigure(curves, points, summary);
  writeFileSync(outFile, svg, "utf8");
}

export async function main(argv: string[]): Promise<number> {
  const args = await yargs(argv)
    .scriptName("render")
    .option("in", { type: "string", demandOption: true, describe: "harness output directory" })
    .option("out", { type: "string", demandOption: true, describe: "output SVG path" })
    .strict()
    .parse();
  try {
    run(args.in, args.out);
  } catch (err) {
    if (err instanceof CsvError || err instanceof FigureError) {
      console.error(`render: ${err.message}`);
      return 1;
    }
    throw err;
  }
  return 0;
}

const invokedDirectly =
  process.argv[1] !== undefined &&
  import.meta.url === new URL(`file://${process.argv[1]}`).href;
if (invokedDirectly) {
  main(hideBin(process.argv)).then((code) => {
    process.exitCode = code;
  });
}
