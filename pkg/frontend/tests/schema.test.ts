import { mkdtempSync, readFileSync, writeFileSync } from "fs";
import { tmpdir } from "os";
import path from "path";
import { describe, expect, it } from "vitest";
import {
  readResults, readTrajectories, RESULT_COLUMNS, RESULTS_SCHEMA_VERSION,
} from "../src/data";
import {
  EmptyInputError, loadSpec, loadZetaCurve, parseSpec, SchemaError,
} from "../src/schema";

const FIXTURES = path.join(__dirname, "fixtures");

function tmpFile(name: string, content: string): string {
  const dir = mkdtempSync(path.join(tmpdir(), "figtest-"));
  const p = path.join(dir, name);
  writeFileSync(p, content);
  return p;
}

describe("figure spec validation", () => {
  it("rejects unknown kinds and stray fields", () => {
    expect(() => parseSpec({ kind: "pie", inputs: {}, output: "x.svg" }))
      .toThrow(SchemaError);
    expect(() => parseSpec({
      kind: "zeta_curve", inputs: { report: "r.json" }, output: "x.svg", extra: 1,
    })).toThrow(/extra/i);
    expect(() => parseSpec({
      kind: "zeta_curve", inputs: { reprot: "r.json" }, output: "x.svg",
    })).toThrow(SchemaError);
  });

  it("resolves input and output paths relative to the spec file", () => {
    const p = tmpFile("spec.json", JSON.stringify({
      kind: "trajectories",
      inputs: { trajectories: "run/trajectories.csv" },
      output: "out/fig.svg",
    }));
    const spec = loadSpec(p);
    const dir = path.dirname(p);
    expect(spec.inputs.trajectories).toBe(path.join(dir, "run", "trajectories.csv"));
    expect(spec.output).toBe(path.join(dir, "out", "fig.svg"));
  });
});

describe("results.csv reading", () => {
  const resultsPath = path.join(FIXTURES, "by_d", "results.csv");
  const manifestPath = path.join(FIXTURES, "by_d", "manifest.json");

  it("reads the fixture and types nullable columns", () => {
    const rows = readResults(resultsPath, manifestPath);
    expect(rows).toHaveLength(8);
    expect(rows[0].scheme).toBe("direct");
    expect(rows[0].w2).toBeGreaterThan(0);
    expect(rows[0].score_n_mc).toBeNull();
    expect(rows[0].minor_mode_fraction).toBeNull();
  });

  it("fails loudly on a missing column", () => {
    const text = readFileSync(resultsPath, "utf-8");
    const lines = text.trim().split("\n");
    const drop = RESULT_COLUMNS.indexOf("w2");
    const mangled = lines
      .map((ln) => ln.split(",").filter((_, i) => i !== drop).join(","))
      .join("\n");
    expect(() => readResults(tmpFile("results.csv", mangled))).toThrow(/missing: w2/);
  });

  it("fails loudly on a renamed column", () => {
    const text = readFileSync(resultsPath, "utf-8");
    const mangled = text.replace(/^scheme,/, "schema,");
    expect(() => readResults(tmpFile("results.csv", mangled))).toThrow(SchemaError);
  });

  it("refuses a schema version it was not built for", () => {
    const manifest = JSON.parse(readFileSync(manifestPath, "utf-8"));
    manifest.schema.results = RESULTS_SCHEMA_VERSION + 1;
    const p = tmpFile("manifest.json", JSON.stringify(manifest));
    expect(() => readResults(resultsPath, p)).toThrow(/schema version 2/);
  });

  it("errors on malformed cells instead of dropping the row", () => {
    const text = readFileSync(resultsPath, "utf-8");
    const lines = text.trim().split("\n");
    const cells = lines[3].split(",");
    cells[RESULT_COLUMNS.indexOf("w2")] = "oops";
    lines[3] = cells.join(",");
    expect(() => readResults(tmpFile("results.csv", lines.join("\n"))))
      .toThrow(/line 4, column w2/);
  });

  it("errors on an empty file and on a header-only file", () => {
    expect(() => readResults(tmpFile("results.csv", ""))).toThrow(EmptyInputError);
    expect(() => readResults(tmpFile("results.csv", RESULT_COLUMNS.join(",") + "\n")))
      .toThrow(EmptyInputError);
  });
});

describe("trajectories.csv reading", () => {
  const trajPath = path.join(FIXTURES, "traj", "trajectories.csv");

  it("reads the fixture and detects coordinate columns", () => {
    const table = readTrajectories(trajPath);
    expect(table.coordColumns).toEqual(["x0", "x1"]);
    expect(table.rows).toHaveLength(24);
    expect(table.rows[0]).toMatchObject({ cell: 0, seed: 0, walker: 0, step: 1 });
  });

  it("rejects a header without the jump projection", () => {
    const text = readFileSync(trajPath, "utf-8");
    const lines = text.trim().split("\n");
    const mangled = lines
      .map((ln) => ln.split(",").slice(0, -1).join(","))
      .join("\n");
    expect(() => readTrajectories(tmpFile("trajectories.csv", mangled)))
      .toThrow(/jump_proj/);
  });
});

describe("analyze reports", () => {
  it("rejects a report of the wrong quantity", () => {
    const p = path.join(FIXTURES, "hessian_landscape.json");
    expect(() => loadZetaCurve(p)).toThrow(/zeta-curve/);
  });

  it("rejects mismatched array lengths", () => {
    const report = JSON.parse(
      readFileSync(path.join(FIXTURES, "zeta_curve.json"), "utf-8"));
    report.m = report.m.slice(0, 3);
    expect(() => loadZetaCurve(tmpFile("r.json", JSON.stringify(report))))
      .toThrow(/equal length/);
  });
});
