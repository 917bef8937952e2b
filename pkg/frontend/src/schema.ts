/**
 * Figure specs and input-file schemas.
 *
 * A figure is described by a small JSON file ("figure spec") pointing at the
 * sampling toolkit's outputs: results.csv / manifest.json / trajectories.csv
 * from `sample run`, or a JSON report from `sample analyze`.  Everything is
 * validated up front — a column that moved or a schema version bump is a hard
 * error, never a silently empty plot.
 */

import { readFileSync } from "fs";
import path from "path";
import { z } from "zod";

export class SchemaError extends Error {}
export class EmptyInputError extends Error {}

export const FIGURE_KINDS = [
  "w2_vs_d",
  "w2_vs_sigma",
  "hessian_landscape",
  "zeta_curve",
  "trajectories",
  "final_hist",
  "kernel_compare",
  "score_sweep",
] as const;

export type FigureKind = (typeof FIGURE_KINDS)[number];

const figureSpecSchema = z
  .object({
    kind: z.enum(FIGURE_KINDS),
    inputs: z
      .object({
        results: z.string().optional(),
        manifest: z.string().optional(),
        trajectories: z.string().optional(),
        report: z.string().optional(),
      })
      .strict(),
    output: z.string().min(1),
    options: z
      .object({
        title: z.string().optional(),
        cell: z.number().int().nonnegative().optional(),
        seed: z.number().int().optional(),
        coord: z.string().optional(), // histogram column, e.g. "x0" or "jump_proj"
        bins: z.number().int().positive().optional(),
        negate: z.boolean().optional(),
      })
      .strict()
      .optional(),
  })
  .strict();

export type FigureSpec = z.infer<typeof figureSpecSchema>;
export type FigureOptions = NonNullable<FigureSpec["options"]>;

/** Validate a parsed JSON value as a figure spec. */
export function parseSpec(raw: unknown, source = "figure spec"): FigureSpec {
  const res = figureSpecSchema.safeParse(raw);
  if (!res.success) {
    const issues = res.error.issues
      .map((i) => `${i.path.join(".") || "<root>"}: ${i.message}`)
      .join("; ");
    throw new SchemaError(`${source}: ${issues}`);
  }
  return res.data;
}

/**
 * Load a figure spec from disk.  Input paths and the output path are
 * resolved relative to the spec file's directory.
 */
export function loadSpec(specPath: string): FigureSpec {
  const text = readFileSync(specPath, "utf-8");
  const spec = parseSpec(JSON.parse(text), specPath);
  const dir = path.dirname(path.resolve(specPath));
  const inputs = { ...spec.inputs };
  for (const key of Object.keys(inputs) as (keyof typeof inputs)[]) {
    const p = inputs[key];
    if (p !== undefined) inputs[key] = path.resolve(dir, p);
  }
  return { ...spec, inputs, output: path.resolve(dir, spec.output) };
}

// ---------------------------------------------------------------------------
// `sample analyze` JSON reports
// ---------------------------------------------------------------------------

const zetaCurveSchema = z
  .object({
    quantity: z.literal("zeta-curve"),
    sigma2: z.number().positive(),
    tau: z.number(),
    R: z.number(),
    m: z.array(z.number().int().positive()).min(1),
    scaled_bound: z.array(z.number()).min(1),
  })
  .passthrough()
  .refine((r) => r.m.length === r.scaled_bound.length, {
    message: "m and scaled_bound must have equal length",
  });

export type ZetaCurveReport = z.infer<typeof zetaCurveSchema>;

const landscapeSchema = z
  .object({
    quantity: z.literal("hessian-landscape"),
    sigma: z.number().positive(),
    m: z.number().int().positive(),
    grid: z.array(z.number()).min(2),
    hessian: z.array(z.number()).min(2),
    bound: z.number(),
    certified_log_concave: z.boolean(),
  })
  .passthrough()
  .refine((r) => r.grid.length === r.hessian.length, {
    message: "grid and hessian must have equal length",
  });

export type LandscapeReport = z.infer<typeof landscapeSchema>;

function readReport(reportPath: string): unknown {
  let raw: unknown;
  try {
    raw = JSON.parse(readFileSync(reportPath, "utf-8"));
  } catch (e) {
    throw new SchemaError(`${reportPath}: not valid JSON (${(e as Error).message})`);
  }
  return raw;
}

export function loadZetaCurve(reportPath: string): ZetaCurveReport {
  const res = zetaCurveSchema.safeParse(readReport(reportPath));
  if (!res.success) {
    throw new SchemaError(
      `${reportPath}: expected a zeta-curve report (${res.error.issues[0]?.message})`,
    );
  }
  return res.data;
}

export function loadLandscape(reportPath: string): LandscapeReport {
  const res = landscapeSchema.safeParse(readReport(reportPath));
  if (!res.success) {
    throw new SchemaError(
      `${reportPath}: expected a hessian-landscape report (${res.error.issues[0]?.message})`,
    );
  }
  return res.data;
}
