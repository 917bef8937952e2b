/**
 * Readers for the sampling toolkit's CSV outputs.
 *
 * The column set is pinned: this renderer reads schema version 1 exactly.
 * Every data row must parse — a malformed cell aborts the figure instead of
 * shrinking the dataset behind the reader's back.
 */

import { readFileSync } from "fs";
import Papa from "papaparse";
import { EmptyInputError, SchemaError } from "./schema";

export const RESULTS_SCHEMA_VERSION = 1;
export const TRAJECTORIES_SCHEMA_VERSION = 1;

export const RESULT_COLUMNS = [
  "scheme", "model", "d", "sigma", "m", "kernel", "delta", "gamma_delta", "L",
  "n_t", "n_walkers", "init", "score_mode", "score_n_mc",
  "seed", "w2", "minor_mode_fraction", "grad_evals", "wall_ms",
] as const;

export interface ResultRow {
  scheme: string;
  model: string;
  d: number;
  sigma: number;
  m: number;
  kernel: string;
  delta: number;
  gamma_delta: number | null;
  L: number;
  n_t: number;
  n_walkers: number;
  init: string;
  score_mode: string;
  score_n_mc: number | null;
  seed: number;
  w2: number;
  minor_mode_fraction: number | null;
  grad_evals: number;
  wall_ms: number;
}

export interface TrajectoryRow {
  cell: number;
  seed: number;
  walker: number;
  measurement: number;
  step: number;
  coords: number[];
  jump_proj: number;
}

export interface TrajectoryTable {
  rows: TrajectoryRow[];
  /** coordinate column names, e.g. ["x0", "x1"] */
  coordColumns: string[];
}

// string columns; everything else is numeric, and the listed ones may be blank
const STRING_COLUMNS = new Set(["scheme", "model", "kernel", "init", "score_mode"]);
const NULLABLE_COLUMNS = new Set(["gamma_delta", "score_n_mc", "minor_mode_fraction"]);

function parseCsv(filePath: string): string[][] {
  const text = readFileSync(filePath, "utf-8");
  if (text.trim() === "") return [];
  const parsed = Papa.parse<string[]>(text, { skipEmptyLines: "greedy" });
  if (parsed.errors.length > 0) {
    const e = parsed.errors[0];
    throw new SchemaError(`${filePath}: ${e.message} (row ${e.row})`);
  }
  return parsed.data;
}

function checkHeader(filePath: string, header: string[], expected: readonly string[]): void {
  if (header.length === expected.length && header.every((h, i) => h === expected[i])) return;
  const missing = expected.filter((c) => !header.includes(c));
  const extra = header.filter((c) => !expected.includes(c));
  const detail = [
    missing.length ? `missing: ${missing.join(", ")}` : "",
    extra.length ? `unexpected: ${extra.join(", ")}` : "",
  ].filter(Boolean).join("; ") || "column order changed";
  throw new SchemaError(`${filePath}: header does not match schema v1 (${detail})`);
}

function num(filePath: string, column: string, line: number, raw: string): number {
  const v = Number(raw);
  if (raw.trim() === "" || !Number.isFinite(v)) {
    throw new SchemaError(`${filePath}: line ${line}, column ${column}: not a number (${raw})`);
  }
  return v;
}

interface Manifest {
  schema?: { results?: number; trajectories?: number };
  columns?: string[];
}

function readManifest(manifestPath: string): Manifest {
  try {
    return JSON.parse(readFileSync(manifestPath, "utf-8")) as Manifest;
  } catch (e) {
    throw new SchemaError(`${manifestPath}: not valid JSON (${(e as Error).message})`);
  }
}

function checkManifestVersion(
  manifestPath: string, manifest: Manifest,
  key: "results" | "trajectories", expected: number,
): void {
  const version = manifest.schema?.[key];
  if (version !== expected) {
    throw new SchemaError(
      `${manifestPath}: ${key} schema version ${version} (this renderer reads version ${expected})`,
    );
  }
}

/** Read results.csv; if a manifest path is given, its schema version and
 *  column list must agree with what this renderer was built against. */
export function readResults(resultsPath: string, manifestPath?: string): ResultRow[] {
  const data = parseCsv(resultsPath);
  if (data.length === 0) throw new EmptyInputError(`${resultsPath}: file is empty`);
  checkHeader(resultsPath, data[0], RESULT_COLUMNS);

  if (manifestPath !== undefined) {
    const manifest = readManifest(manifestPath);
    checkManifestVersion(manifestPath, manifest, "results", RESULTS_SCHEMA_VERSION);
    if (manifest.columns !== undefined) {
      checkHeader(manifestPath, manifest.columns, RESULT_COLUMNS);
    }
  }

  const rows: ResultRow[] = [];
  for (let i = 1; i < data.length; i++) {
    const cells = data[i];
    if (cells.length !== RESULT_COLUMNS.length) {
      throw new SchemaError(
        `${resultsPath}: line ${i + 1} has ${cells.length} fields, expected ${RESULT_COLUMNS.length}`,
      );
    }
    const row: Record<string, string | number | null> = {};
    RESULT_COLUMNS.forEach((col, j) => {
      if (STRING_COLUMNS.has(col)) row[col] = cells[j];
      else if (NULLABLE_COLUMNS.has(col) && cells[j].trim() === "") row[col] = null;
      else row[col] = num(resultsPath, col, i + 1, cells[j]);
    });
    rows.push(row as unknown as ResultRow);
  }
  if (rows.length === 0) throw new EmptyInputError(`${resultsPath}: no data rows`);
  return rows;
}

const TRAJECTORY_PREFIX = ["cell", "seed", "walker", "measurement", "step"] as const;

/** Read trajectories.csv.  The header is positional: the fixed prefix, then
 *  contiguous coordinate columns x0..x{k-1}, then the jump projection. */
export function readTrajectories(trajPath: string, manifestPath?: string): TrajectoryTable {
  const data = parseCsv(trajPath);
  if (data.length === 0) throw new EmptyInputError(`${trajPath}: file is empty`);

  const header = data[0];
  const prefixOk = TRAJECTORY_PREFIX.every((c, i) => header[i] === c);
  const coordColumns = header.slice(TRAJECTORY_PREFIX.length, -1);
  const coordsOk = coordColumns.length > 0 && coordColumns.every((c, i) => c === `x${i}`);
  if (!prefixOk || !coordsOk || header[header.length - 1] !== "jump_proj") {
    throw new SchemaError(
      `${trajPath}: header does not match schema v1 ` +
      `(expected cell,seed,walker,measurement,step,x0..,jump_proj; got ${header.join(",")})`,
    );
  }

  if (manifestPath !== undefined) {
    checkManifestVersion(
      manifestPath, readManifest(manifestPath), "trajectories", TRAJECTORIES_SCHEMA_VERSION,
    );
  }

  const rows: TrajectoryRow[] = [];
  for (let i = 1; i < data.length; i++) {
    const cells = data[i];
    if (cells.length !== header.length) {
      throw new SchemaError(
        `${trajPath}: line ${i + 1} has ${cells.length} fields, expected ${header.length}`,
      );
    }
    const v = (j: number) => num(trajPath, header[j], i + 1, cells[j]);
    rows.push({
      cell: v(0),
      seed: v(1),
      walker: v(2),
      measurement: v(3),
      step: v(4),
      coords: coordColumns.map((_, k) => v(TRAJECTORY_PREFIX.length + k)),
      jump_proj: v(header.length - 1),
    });
  }
  if (rows.length === 0) throw new EmptyInputError(`${trajPath}: no data rows`);
  return { rows, coordColumns };
}

// ---------------------------------------------------------------------------
// Small aggregation helpers (presentation statistics only)
// ---------------------------------------------------------------------------

export function median(values: number[]): number {
  if (values.length === 0) throw new EmptyInputError("median of no values");
  const s = [...values].sort((a, b) => a - b);
  const mid = s.length >> 1;
  return s.length % 2 ? s[mid] : 0.5 * (s[mid - 1] + s[mid]);
}

/** Group rows by a string key, preserving first-appearance order. */
export function groupBy<T>(rows: T[], key: (row: T) => string): Map<string, T[]> {
  const out = new Map<string, T[]>();
  for (const row of rows) {
    const k = key(row);
    const bucket = out.get(k);
    if (bucket) bucket.push(row);
    else out.set(k, [row]);
  }
  return out;
}
