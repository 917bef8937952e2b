import { existsSync, mkdtempSync, writeFileSync } from "fs";
import { tmpdir } from "os";
import path from "path";
import { afterEach, describe, expect, it, vi } from "vitest";
import { main } from "../src/cli";

const FIXTURES = path.join(__dirname, "fixtures");

afterEach(() => vi.restoreAllMocks());

function quiet() {
  const log = vi.spyOn(console, "log").mockImplementation(() => {});
  const err = vi.spyOn(console, "error").mockImplementation(() => {});
  return { log, err };
}

describe("figures CLI", () => {
  it("renders a spec file and reports the output path", () => {
    const dir = mkdtempSync(path.join(tmpdir(), "clitest-"));
    const specPath = path.join(dir, "fig.json");
    writeFileSync(specPath, JSON.stringify({
      kind: "zeta_curve",
      inputs: { report: path.relative(dir, path.join(FIXTURES, "zeta_curve.json")) },
      output: "figs/zeta.svg",
    }));
    const { log } = quiet();
    expect(main(["render", specPath])).toBe(0);
    const out = path.join(dir, "figs", "zeta.svg");
    expect(existsSync(out)).toBe(true);
    expect(log).toHaveBeenCalledWith(`wrote ${out}`);
  });

  it("lists the figure kinds", () => {
    const { log } = quiet();
    expect(main(["kinds"])).toBe(0);
    expect(log).toHaveBeenCalledTimes(8);
    expect(log).toHaveBeenCalledWith("trajectories");
  });

  it("fails with usage on a missing command", () => {
    const { err } = quiet();
    expect(main([])).toBe(2);
    expect(err).toHaveBeenCalledOnce();
  });

  it("surfaces render errors with the offending spec path", () => {
    const dir = mkdtempSync(path.join(tmpdir(), "clitest-"));
    const specPath = path.join(dir, "bad.json");
    writeFileSync(specPath, JSON.stringify({
      kind: "w2_vs_d", inputs: {}, output: "x.svg",
    }));
    const { err } = quiet();
    expect(main(["render", specPath])).toBe(1);
    expect(err.mock.calls[0][0]).toContain("inputs.results");
  });
});
