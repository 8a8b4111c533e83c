/**
 * Four-panel figure: one panel per noise scenario showing the true mean
 * function, the recorded training points, and the upper-confidence
 * envelope of each method at the end of the episode.
 */

import type { CurveRow, PointRow, SummaryRow } from "./csv.js";
import {
  circle,
  fmtTick,
  line,
  linearScale,
  polyline,
  svgDocument,
  text,
  ticks,
} from "./svg.js";

export interface PanelSpec {
  scenario: string;
  title: string;
  curves: CurveRow[];
  points: PointRow[];
  summary: SummaryRow[];
}

export class FigureError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "FigureError";
  }
}

const METHOD_COLORS: Record<string, string> = {
  SubGaussianBaseline: "#d62728",
  MixedBennett: "#1f77b4",
  EmpiricalMixedBennett: "#2ca02c",
  FixedBernstein: "#9467bd",
  FixedBennett: "#8c564b",
};
const FALLBACK_COLORS = ["#e377c2", "#7f7f7f", "#bcbd22", "#17becf"];

const PANEL_W = 420;
const PANEL_H = 300;
const MARGIN = { top: 34, right: 14, bottom: 40, left: 52 };
const LEGEND_H = 30;

function methodColor(method: string, index: number): string {
  return METHOD_COLORS[method] ?? FALLBACK_COLORS[index % FALLBACK_COLORS.length];
}

export function buildPanels(
  curves: CurveRow[],
  points: PointRow[],
  summary: SummaryRow[],
): PanelSpec[] {
  const scenarios = [...new Set(curves.map((r) => r.scenario))].sort();
  if (scenarios.length === 0) {
    throw new FigureError("no scenarios found in curves data");
  }
  return scenarios.map((scenario) => ({
    scenario,
    title: scenario,
    curves: curves.filter((r) => r.scenario === scenario),
    points: points.filter((r) => r.scenario === scenario),
    summary: summary.filter((r) => r.scenario === scenario),
  }));
}

export function methodsOf(panel: PanelSpec): string[] {
  return [...new Set(panel.curves.map((r) => r.method))].sort();
}

function renderPanel(panel: PanelSpec, ox: number, oy: number): string[] {
  const methods = methodsOf(panel);
  if (methods.length === 0) {
    throw new FigureError(`scenario "${panel.scenario}" has an empty method set`);
  }
  const plotX0 = ox + MARGIN.left;
  const plotX1 = ox + PANEL_W - MARGIN.right;
  const plotY0 = oy + MARGIN.top;
  const plotY1 = oy + PANEL_H - MARGIN.bottom;

  const xs = panel.curves.map((r) => r.armX);
  const ysAll = panel.curves
    .flatMap((r) => [r.trueMean, r.postUcb, r.postMean])
    .concat(panel.points.map((p) => p.reward));
  const xDom: [number, number] = [Math.min(...xs), Math.max(...xs)];
  let yLo = Math.min(...ysAll);
  let yHi = Math.max(...ysAll);
  const pad = 0.05 * (yHi - yLo || 1);
  yLo -= pad;
  yHi += pad;

  const sx = linearScale(xDom, [plotX0, plotX1]);
  const sy = linearScale([yLo, yHi], [plotY1, plotY0]);

  const out: string[] = [];
  out.push(line(plotX0, plotY1, plotX1, plotY1, "#444"));
  out.push(line(plotX0, plotY0, plotX0, plotY1, "#444"));
  for (const tx of ticks(xDom, 4)) {
    out.push(line(sx(tx), plotY1, sx(tx), plotY1 + 4, "#444"));
    out.push(text(sx(tx), plotY1 + 16, fmtTick(tx), 10, "middle"));
  }
  for (const ty of ticks([yLo, yHi], 4)) {
    out.push(line(plotX0 - 4, sy(ty), plotX0, sy(ty), "#444"));
    out.push(text(plotX0 - 7, sy(ty) + 3, fmtTick(ty), 10, "end"));
  }
  out.push(text(ox + PANEL_W / 2, oy + 16, panel.title, 13, "middle"));
  out.push(text(ox + PANEL_W / 2, oy + PANEL_H - 8, "arm x", 10, "middle"));

  // training points (one recorded episode per method)
  for (const p of panel.points) {
    out.push(circle(sx(p.armX), sy(p.reward), 1.6, "#999999", 0.55));
  }

  // true mean: identical across methods by schema, drawn once from the
  // first method's rows
  const first = methods[0];
  const base = panel.curves
    .filter((r) => r.method === first)
    .sort((a, b) => a.armX - b.armX);
  out.push(
    polyline(base.map((r) => sx(r.armX)), base.map((r) => sy(r.trueMean)), "#111111", 1.5),
  );

  // UCB envelope per method
  methods.forEach((method, i) => {
    const rows = panel.curves
      .filter((r) => r.method === method)
      .sort((a, b) => a.armX - b.armX);
    out.push(
      polyline(rows.map((r) => sx(r.armX)), rows.map((r) => sy(r.postUcb)),
        methodColor(method, i), 1.2),
    );
  });

  // final-regret annotation straight from the summary CSV
  const notes = methods
    .map((m) => {
      const rows = panel.summary.filter((r) => r.method === m);
      if (rows.length === 0) return null;
      const med = rows.map((r) => r.cumRegret).sort((a, b) => a - b)[
        Math.floor(rows.length / 2)
      ];
      return `${m}: R_T=${med.toFixed(1)}`;
    })
    .filter((s): s is string => s !== null);
  notes.forEach((note, i) => {
    out.push(text(plotX0 + 6, plotY0 + 12 + 12 * i, note, 9, "start", "#555"));
  });
  return out;
}

export function renderFigure(
  curves: CurveRow[],
  points: PointRow[],
  summary: SummaryRow[],
): string {
  const panels = buildPanels(curves, points, summary);
  const methods = [...new Set(curves.map((r) => r.method))].sort();
  if (methods.length === 0) {
    throw new FigureError("empty method set: no methods present in curves data");
  }
  const cols = panels.length > 1 ? 2 : 1;
  const rows = Math.ceil(panels.length / cols);
  const width = cols * PANEL_W;
  const height = rows * PANEL_H + LEGEND_H;

  const body: string[] = [];
  panels.forEach((panel, i) => {
    const ox = (i % cols) * PANEL_W;
    const oy = Math.floor(i / cols) * PANEL_H;
    body.push(...renderPanel(panel, ox, oy));
  });

  // legend: exactly the methods present in the data, plus fixed entries
  const ly = rows * PANEL_H + 18;
  let lx = 20;
  body.push(line(lx, ly - 4, lx + 24, ly - 4, "#111111", 1.5));
  body.push(text(lx + 30, ly, "true mean", 11));
  lx += 30 + 9 * 11;
  methods.forEach((method, i) => {
    body.push(line(lx, ly - 4, lx + 24, ly - 4, methodColor(method, i), 1.2));
    body.push(text(lx + 30, ly, method, 11));
    lx += 30 + 8 * method.length + 26;
  });

  return svgDocument(width, height, body);
}
