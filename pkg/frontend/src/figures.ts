/**
 * The eight figure kinds.
 *
 * Each renderer is a read-only consumer of the sampling toolkit's outputs:
 * it aggregates for display (medians across seeds) but never recomputes a
 * metric.  Rendering is deterministic — re-running a spec on the same inputs
 * reproduces the SVG byte for byte.
 */

import { existsSync, mkdirSync, writeFileSync } from "fs";
import path from "path";
import {
  groupBy, median, readResults, readTrajectories,
  ResultRow, TrajectoryRow, TrajectoryTable,
} from "./data";
import {
  EmptyInputError, FigureOptions, FigureSpec, loadLandscape, loadZetaCurve,
  SchemaError,
} from "./schema";
import {
  circle, fmtNum, frame, HEIGHT, legend, LegendEntry, line, linScale, logScale,
  logTicks, MARGIN, niceTicks, padDomain, PALETTE, polyline, progressColor,
  rect, text, WIDTH, xAxis, yAxis,
} from "./svg";

const PLOT_LEFT = MARGIN.left;
const PLOT_RIGHT = WIDTH - MARGIN.right;
const PLOT_TOP = MARGIN.top;
const PLOT_BOTTOM = HEIGHT - MARGIN.bottom;

function requireInput(spec: FigureSpec, key: keyof FigureSpec["inputs"]): string {
  const value = spec.inputs[key];
  if (value === undefined) {
    throw new SchemaError(`figure '${spec.kind}' needs inputs.${key}`);
  }
  return value;
}

/** Prefer an explicit manifest; otherwise pick up the sibling manifest.json
 *  that `sample run` writes next to its CSVs, so version checks stay on. */
function siblingManifest(dataPath: string, explicit?: string): string | undefined {
  if (explicit !== undefined) return explicit;
  const candidate = path.join(path.dirname(dataPath), "manifest.json");
  return existsSync(candidate) ? candidate : undefined;
}

// ---------------------------------------------------------------------------
// Shared line-chart core
// ---------------------------------------------------------------------------

interface Series {
  label: string;
  color: string;
  dash?: string;
  points: Array<[number, number]>;
  markers?: boolean;
}

interface LineChartOpts {
  title: string;
  xLabel: string;
  yLabel: string;
  logX?: boolean;
  logY?: boolean;
  series: Series[];
  /** extra horizontal reference lines */
  hLines?: Array<{ value: number; label: string; color: string; dash: string }>;
  note?: string;
}

function dataDomain(values: number[], log: boolean): [number, number] {
  let lo = Math.min(...values);
  let hi = Math.max(...values);
  if (log) {
    if (lo <= 0) throw new RangeError(`log axis needs positive values, got ${lo}`);
    return [lo / 1.25, hi * 1.25];
  }
  return padDomain([lo, hi]);
}

function lineChart(opts: LineChartOpts): string {
  const xs = opts.series.flatMap((s) => s.points.map((p) => p[0]));
  const ys = opts.series
    .flatMap((s) => s.points.map((p) => p[1]))
    .concat((opts.hLines ?? []).map((h) => h.value));
  if (xs.length === 0) throw new EmptyInputError(`figure has no points to draw`);

  const xDom = dataDomain(xs, opts.logX ?? false);
  const yDom = dataDomain(ys, opts.logY ?? false);
  const sx = (opts.logX ? logScale : linScale)(xDom, [PLOT_LEFT, PLOT_RIGHT]);
  const sy = (opts.logY ? logScale : linScale)(yDom, [PLOT_BOTTOM, PLOT_TOP]);

  const xTicks = opts.logX ? logTicks(xDom[0], xDom[1]) : niceTicks(xDom[0], xDom[1], 6);
  const yTicks = opts.logY ? logTicks(yDom[0], yDom[1]) : niceTicks(yDom[0], yDom[1], 5);

  const body: string[] = [
    yAxis(sy, yTicks, opts.yLabel),
    xAxis(sx, xTicks, opts.xLabel),
  ];
  for (const h of opts.hLines ?? []) {
    body.push(line(PLOT_LEFT, sy(h.value), PLOT_RIGHT, sy(h.value),
      `stroke="${h.color}" stroke-width="1.5" stroke-dasharray="${h.dash}"`));
  }
  for (const s of opts.series) {
    const pts = s.points.map(([x, y]) => [sx(x), sy(y)] as [number, number]);
    const dash = s.dash ? ` stroke-dasharray="${s.dash}"` : "";
    body.push(polyline(pts, `stroke="${s.color}" stroke-width="1.8"${dash}`));
    if (s.markers ?? true) {
      for (const [x, y] of pts) body.push(circle(x, y, 3, `fill="${s.color}"`));
    }
  }

  const entries: LegendEntry[] = opts.series
    .map((s): LegendEntry => ({ label: s.label, color: s.color, dash: s.dash }))
    .concat((opts.hLines ?? []).map((h) => ({ label: h.label, color: h.color, dash: h.dash })));
  if (entries.length > 1 || (opts.hLines ?? []).length > 0) {
    body.push(legend(entries, PLOT_LEFT + 10, PLOT_TOP + 14));
  }
  if (opts.note) {
    body.push(text(PLOT_RIGHT, PLOT_TOP - 6, opts.note,
      'font-size="11" text-anchor="end" fill="#666"'));
  }
  return frame(opts.title, body);
}

// ---------------------------------------------------------------------------
// results.csv figures
// ---------------------------------------------------------------------------

/** One median-w2 line per scheme (per (scheme, m) if a scheme appears at
 *  several m), against the given numeric column. */
function medianW2Series(rows: ResultRow[], xKey: "d" | "sigma" | "score_n_mc"): Series[] {
  const mCounts = new Map<string, Set<number>>();
  for (const r of rows) {
    if (!mCounts.has(r.scheme)) mCounts.set(r.scheme, new Set());
    mCounts.get(r.scheme)!.add(r.m);
  }
  const label = (r: ResultRow) =>
    (mCounts.get(r.scheme)!.size > 1) ? `${r.scheme} (m=${r.m})` : r.scheme;

  const series: Series[] = [];
  const groups = [...groupBy(rows, label).entries()].sort((a, b) =>
    a[0] < b[0] ? -1 : a[0] > b[0] ? 1 : 0);
  groups.forEach(([name, members], i) => {
    const byX = groupBy(members, (r) => String(r[xKey]));
    const points = [...byX.values()]
      .map((g): [number, number] => [g[0][xKey] as number, median(g.map((r) => r.w2))])
      .sort((a, b) => a[0] - b[0]);
    series.push({ label: name, color: PALETTE[i % PALETTE.length], points });
  });
  return series;
}

function renderW2Line(spec: FigureSpec, xKey: "d" | "sigma"): string {
  const resultsPath = requireInput(spec, "results");
  const rows = readResults(resultsPath, siblingManifest(resultsPath, spec.inputs.manifest));
  const bad = rows.find((r) => !(r.w2 > 0));
  if (bad) {
    throw new RangeError(`w2 must be positive for the log axis (seed ${bad.seed})`);
  }
  const xLabel = xKey === "d" ? "dimension d" : "smoothing noise level";
  return lineChart({
    title: spec.options?.title ?? `transport error vs ${xLabel} (median over seeds)`,
    xLabel,
    yLabel: "sliced W2 to exact samples",
    logY: true,
    series: medianW2Series(rows, xKey),
  });
}

function renderScoreSweep(spec: FigureSpec): string {
  const resultsPath = requireInput(spec, "results");
  const rows = readResults(resultsPath, siblingManifest(resultsPath, spec.inputs.manifest));

  const plugin = rows.filter((r) => r.score_mode === "plugin");
  const analytic = rows.filter((r) => r.score_mode === "analytic");
  if (plugin.length === 0) {
    throw new EmptyInputError("score_sweep: no plugin-score rows in results");
  }
  const missing = plugin.find((r) => r.score_n_mc === null);
  if (missing) {
    throw new SchemaError(`score_sweep: plugin row (seed ${missing.seed}) has no score_n_mc`);
  }
  const series = medianW2Series(plugin, "score_n_mc").map((s) => ({
    ...s,
    label: s.label.replace(/^oat|^aao|^m1|^direct/, (sch) => `plugin (${sch})`),
  }));
  const hLines = analytic.length > 0
    ? [{
        value: median(analytic.map((r) => r.w2)),
        label: "analytic score (median)",
        color: "#555",
        dash: "6,3",
      }]
    : [];
  return lineChart({
    title: spec.options?.title ?? "plug-in score quality vs estimator sample count",
    xLabel: "score-estimator samples",
    yLabel: "sliced W2 to exact samples",
    logX: true,
    logY: true,
    series,
    hLines,
  });
}

function renderKernelCompare(spec: FigureSpec): string {
  const resultsPath = requireInput(spec, "results");
  const rows = readResults(resultsPath, siblingManifest(resultsPath, spec.inputs.manifest));

  const kinds = [...new Set(rows.map((r) => r.kernel))].sort();
  const w2max = Math.max(...rows.map((r) => r.w2));
  const sy = linScale([0, w2max * 1.1], [PLOT_BOTTOM, PLOT_TOP]);
  const band = (PLOT_RIGHT - PLOT_LEFT) / kinds.length;

  const body: string[] = [
    yAxis(sy, niceTicks(0, w2max * 1.1, 5), "sliced W2 to exact samples"),
    line(PLOT_LEFT, PLOT_BOTTOM, PLOT_RIGHT, PLOT_BOTTOM, 'stroke="#333"'),
  ];
  kinds.forEach((kind, i) => {
    const cx = PLOT_LEFT + (i + 0.5) * band;
    const members = rows.filter((r) => r.kernel === kind).sort((a, b) => a.seed - b.seed);
    members.forEach((r, j) => {
      const off = (j - (members.length - 1) / 2) * 7;
      body.push(circle(cx + off, sy(r.w2), 3,
        `fill="${PALETTE[i % PALETTE.length]}" fill-opacity="0.75"`));
    });
    const med = median(members.map((r) => r.w2));
    body.push(line(cx - 16, sy(med), cx + 16, sy(med),
      `stroke="${PALETTE[i % PALETTE.length]}" stroke-width="3"`));
    body.push(text(cx, PLOT_BOTTOM + 18, kind, 'font-size="11" text-anchor="middle" fill="#333"'));
  });
  const xc = (PLOT_LEFT + PLOT_RIGHT) / 2;
  body.push(text(xc, HEIGHT - 12, "transition kernel",
    'font-size="12" text-anchor="middle" fill="#111"'));
  body.push(text(PLOT_RIGHT, PLOT_TOP - 6, "dots: seeds; bar: median",
    'font-size="11" text-anchor="end" fill="#666"'));
  return frame(spec.options?.title ?? "kernel comparison at equal gradient budget", body);
}

// ---------------------------------------------------------------------------
// analyze-report figures
// ---------------------------------------------------------------------------

function renderLandscape(spec: FigureSpec): string {
  const report = loadLandscape(requireInput(spec, "report"));
  const negate = spec.options?.negate ?? false;
  const sign = negate ? -1 : 1;
  const ys = report.hessian.map((v) => sign * v);
  const bound = sign * report.bound;

  const points = report.grid.map((g, i): [number, number] => [g, ys[i]]);
  const suffix = negate ? " (negated)" : "";
  return lineChart({
    title: spec.options?.title ??
      `conditional Hessian landscape (sigma=${fmtNum(report.sigma)}, m=${report.m})`,
    xLabel: "running-mean offset along the mode axis",
    yLabel: `largest Hessian eigenvalue${suffix}`,
    series: [{ label: `largest eigenvalue${suffix}`, color: PALETTE[0], points, markers: false }],
    hLines: [
      { value: bound, label: `uniform bound${suffix}`, color: "#e63946", dash: "6,3" },
      { value: 0, label: "zero", color: "#999", dash: "2,3" },
    ],
    note: report.certified_log_concave ? "certified log-concave" : "not certified",
  });
}

function renderZetaCurve(spec: FigureSpec): string {
  const report = loadZetaCurve(requireInput(spec, "report"));
  // plotted negated so the curve rises toward its limit from below
  const bound = report.m.map((mm, i): [number, number] => [mm, -report.scaled_bound[i]]);
  const asymptote = report.m.map((mm): [number, number] => [mm, 1 - 1 / mm]);
  return lineChart({
    title: spec.options?.title ?? "curvature bound vs measurements per jump",
    xLabel: "measurements per jump m",
    yLabel: "scaled curvature bound (negated)",
    logX: true,
    series: [
      { label: "scaled bound", color: PALETTE[0], points: bound, markers: false },
      { label: "1 - 1/m asymptote", color: "#888", dash: "5,4", points: asymptote, markers: false },
    ],
  });
}

// ---------------------------------------------------------------------------
// trajectories.csv figures
// ---------------------------------------------------------------------------

function filterTrajectories(table: TrajectoryTable, options?: FigureOptions): TrajectoryRow[] {
  let rows = table.rows;
  if (options?.cell !== undefined) rows = rows.filter((r) => r.cell === options.cell);
  if (options?.seed !== undefined) rows = rows.filter((r) => r.seed === options.seed);
  if (rows.length === 0) {
    throw new EmptyInputError(
      `no trajectory rows left for cell=${options?.cell ?? "*"} seed=${options?.seed ?? "*"}`,
    );
  }
  return rows;
}

function walkerGroups(rows: TrajectoryRow[]): TrajectoryRow[][] {
  const groups = groupBy(rows, (r) => `${r.cell}|${r.seed}|${r.walker}`);
  return [...groups.values()].map((g) => [...g].sort((a, b) => a.step - b.step));
}

function renderTrajectories(spec: FigureSpec): string {
  const trajPath = requireInput(spec, "trajectories");
  const table = readTrajectories(trajPath, siblingManifest(trajPath, spec.inputs.manifest));
  const rows = filterTrajectories(table, spec.options);
  const planar = table.coordColumns.length >= 2;

  const pick = (r: TrajectoryRow): [number, number] =>
    planar ? [r.coords[0], r.coords[1]] : [r.step, r.coords[0]];
  const xDom = padDomain([
    Math.min(...rows.map((r) => pick(r)[0])), Math.max(...rows.map((r) => pick(r)[0]))]);
  const yDom = padDomain([
    Math.min(...rows.map((r) => pick(r)[1])), Math.max(...rows.map((r) => pick(r)[1]))]);
  const sx = linScale(xDom, [PLOT_LEFT, PLOT_RIGHT]);
  const sy = linScale(yDom, [PLOT_BOTTOM, PLOT_TOP]);

  const body: string[] = [
    yAxis(sy, niceTicks(yDom[0], yDom[1], 5), planar ? "x1" : "x0"),
    xAxis(sx, niceTicks(xDom[0], xDom[1], 6), planar ? "x0" : "walker step"),
  ];
  for (const walk of walkerGroups(rows)) {
    const pts = walk.map((r) => {
      const [x, y] = pick(r);
      return [sx(x), sy(y)] as [number, number];
    });
    body.push(polyline(pts, 'stroke="#bbb" stroke-width="1"'));
    pts.forEach(([x, y], i) => {
      const t = pts.length > 1 ? i / (pts.length - 1) : 0;
      body.push(circle(x, y, 2.5, `fill="${progressColor(t)}"`));
    });
  }
  body.push(legend(
    [
      { label: "start", color: progressColor(0), marker: "dot" },
      { label: "end", color: progressColor(1), marker: "dot" },
    ],
    PLOT_RIGHT - 74, PLOT_TOP + 14,
  ));
  return frame(spec.options?.title ?? "walker trajectories (progress start to end)", body);
}

function renderFinalHist(spec: FigureSpec): string {
  const trajPath = requireInput(spec, "trajectories");
  const table = readTrajectories(trajPath, siblingManifest(trajPath, spec.inputs.manifest));
  const rows = filterTrajectories(table, spec.options);

  const coord = spec.options?.coord ?? "x0";
  const allowed = [...table.coordColumns, "jump_proj"];
  if (!allowed.includes(coord)) {
    throw new SchemaError(`final_hist: no column '${coord}' (have ${allowed.join(", ")})`);
  }
  const value = (r: TrajectoryRow) =>
    coord === "jump_proj" ? r.jump_proj : r.coords[table.coordColumns.indexOf(coord)];

  // last recorded state of every walker
  const finals = walkerGroups(rows).map((walk) => value(walk[walk.length - 1]));

  const bins = spec.options?.bins ?? 30;
  let lo = Math.min(...finals);
  let hi = Math.max(...finals);
  if (lo === hi) { lo -= 0.5; hi += 0.5; }
  const width = (hi - lo) / bins;
  const counts = new Array<number>(bins).fill(0);
  for (const v of finals) counts[Math.min(bins - 1, Math.floor((v - lo) / width))] += 1;

  const maxCount = Math.max(...counts);
  const sx = linScale(padDomain([lo, hi], 0.02), [PLOT_LEFT, PLOT_RIGHT]);
  const sy = linScale([0, maxCount * 1.05], [PLOT_BOTTOM, PLOT_TOP]);

  const body: string[] = [
    yAxis(sy, niceTicks(0, maxCount * 1.05, 5).filter(Number.isInteger), "walkers"),
    xAxis(sx, niceTicks(lo, hi, 6), coord),
  ];
  counts.forEach((c, i) => {
    if (c === 0) return;
    const x0 = sx(lo + i * width);
    const x1 = sx(lo + (i + 1) * width);
    body.push(rect(x0, sy(c), Math.max(0.5, x1 - x0 - 0.8), PLOT_BOTTOM - sy(c),
      `fill="${PALETTE[0]}" fill-opacity="0.85"`));
  });
  body.push(text(PLOT_RIGHT, PLOT_TOP - 6, `${finals.length} walkers`,
    'font-size="11" text-anchor="end" fill="#666"'));
  return frame(spec.options?.title ?? `final samples along ${coord}`, body);
}

// ---------------------------------------------------------------------------
// Entry points
// ---------------------------------------------------------------------------

export function render(spec: FigureSpec): string {
  switch (spec.kind) {
    case "w2_vs_d": return renderW2Line(spec, "d");
    case "w2_vs_sigma": return renderW2Line(spec, "sigma");
    case "hessian_landscape": return renderLandscape(spec);
    case "zeta_curve": return renderZetaCurve(spec);
    case "trajectories": return renderTrajectories(spec);
    case "final_hist": return renderFinalHist(spec);
    case "kernel_compare": return renderKernelCompare(spec);
    case "score_sweep": return renderScoreSweep(spec);
  }
}

/** Render and write spec.output; returns the output path. */
export function renderToFile(spec: FigureSpec): string {
  const svg = render(spec);
  mkdirSync(path.dirname(spec.output), { recursive: true });
  writeFileSync(spec.output, svg);
  return spec.output;
}
