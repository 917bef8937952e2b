import { existsSync, mkdtempSync, readFileSync } from "fs";
import { tmpdir } from "os";
import path from "path";
import { describe, expect, it } from "vitest";
import { render, renderToFile } from "../src/figures";
import { EmptyInputError, FigureSpec } from "../src/schema";

const FIXTURES = path.join(__dirname, "fixtures");
const outDir = () => mkdtempSync(path.join(tmpdir(), "figout-"));

function spec(kind: FigureSpec["kind"], inputs: FigureSpec["inputs"],
              options?: FigureSpec["options"]): FigureSpec {
  return { kind, inputs, output: path.join(outDir(), `${kind}.svg`), options };
}

const fx = (...parts: string[]) => path.join(FIXTURES, ...parts);

function polylines(svg: string): string[][] {
  return [...svg.matchAll(/<polyline[^>]*points="([^"]*)"/g)]
    .map((m) => m[1].split(" "));
}

describe("line figures from results.csv", () => {
  it("w2_vs_d draws one line per scheme on a log y-axis", () => {
    const svg = render(spec("w2_vs_d", { results: fx("by_d", "results.csv") }));
    expect(polylines(svg)).toHaveLength(2); // direct, oat
    expect(svg).toContain(">direct<");
    expect(svg).toContain(">oat<");
    // log ticks: decade/mantissa labels rather than a linear ladder
    expect(svg).toContain(">0.5<");
    expect(svg).toContain("sliced W2");
    // two d values per line
    for (const pts of polylines(svg)) expect(pts).toHaveLength(2);
  });

  it("w2_vs_sigma uses the smoothing level on x", () => {
    const svg = render(spec("w2_vs_sigma", { results: fx("by_sigma", "results.csv") }));
    expect(svg).toContain("smoothing noise level");
    expect(polylines(svg)).toHaveLength(2);
  });

  it("score_sweep plots plugin quality against the analytic baseline", () => {
    const svg = render(spec("score_sweep", { results: fx("score", "results.csv") }));
    expect(svg).toContain("plugin");
    expect(svg).toContain("analytic score (median)");
    expect(svg).toContain("stroke-dasharray");
  });

  it("kernel_compare shows every kernel kind with median bars", () => {
    const svg = render(spec("kernel_compare", { results: fx("kernels", "results.csv") }));
    for (const kind of ["mala", "uld_sachs", "uld_cheng", "uld_shenlee"]) {
      expect(svg).toContain(`>${kind}<`);
    }
    expect(svg).toContain("dots: seeds; bar: median");
  });

  it("requires the results input", () => {
    expect(() => render({ kind: "w2_vs_d", inputs: {}, output: "x.svg" }))
      .toThrow(/inputs\.results/);
  });
});

describe("analyze-report figures", () => {
  it("zeta_curve overlays the 1 - 1/m asymptote", () => {
    const svg = render(spec("zeta_curve", { report: fx("zeta_curve.json") }));
    expect(svg).toContain("1 - 1/m asymptote");
    const lines = polylines(svg);
    expect(lines).toHaveLength(2);
    expect(lines[0]).toHaveLength(40); // one vertex per m = 1..40
  });

  it("hessian_landscape draws the profile, bound and zero line", () => {
    const svg = render(spec("hessian_landscape", { report: fx("hessian_landscape.json") }));
    expect(svg).toContain("uniform bound");
    expect(svg).toContain("certified log-concave");
    expect(polylines(svg)[0]).toHaveLength(161);
  });

  it("negate flips the landscape sign in the labels", () => {
    const svg = render(spec("hessian_landscape", { report: fx("hessian_landscape.json") },
      { negate: true }));
    expect(svg).toContain("largest Hessian eigenvalue (negated)");
  });
});

describe("trajectory figures", () => {
  it("draws one polyline per walker with start/end progress colors", () => {
    const svg = render(spec("trajectories", { trajectories: fx("traj", "trajectories.csv") }));
    expect(polylines(svg)).toHaveLength(6);
    expect(svg).toContain(">start<");
    expect(svg).toContain(">end<");
    expect(svg).toContain("rgb(123,47,191)"); // progress 0
    expect(svg).toContain("rgb(42,157,68)"); // progress 1
  });

  it("one walker at stride 1 yields a polyline with total_steps vertices", () => {
    // budget 10 at m=2 -> 5 steps per measurement, 10 recorded states
    const svg = render(spec("trajectories",
      { trajectories: fx("traj_single", "trajectories.csv") }));
    const lines = polylines(svg);
    expect(lines).toHaveLength(1);
    expect(lines[0]).toHaveLength(10);
  });

  it("final_hist bins the last recorded state of each walker", () => {
    const svg = render(spec("final_hist", { trajectories: fx("traj", "trajectories.csv") },
      { bins: 8 }));
    expect(svg).toContain("6 walkers");
    const bars = [...svg.matchAll(/<rect [^>]*fill-opacity/g)];
    expect(bars.length).toBeGreaterThanOrEqual(1);
    expect(bars.length).toBeLessThanOrEqual(8);
  });

  it("final_hist rejects a coordinate the file does not have", () => {
    expect(() => render(spec("final_hist",
      { trajectories: fx("traj", "trajectories.csv") }, { coord: "x7" })))
      .toThrow(/no column 'x7'/);
  });

  it("an over-narrow filter is an empty-input error, not an empty plot", () => {
    expect(() => render(spec("trajectories",
      { trajectories: fx("traj", "trajectories.csv") }, { cell: 3 })))
      .toThrow(EmptyInputError);
  });
});

describe("rendering contract", () => {
  const allSpecs: FigureSpec[] = [
    spec("w2_vs_d", { results: fx("by_d", "results.csv"), manifest: fx("by_d", "manifest.json") }),
    spec("w2_vs_sigma", { results: fx("by_sigma", "results.csv") }),
    spec("hessian_landscape", { report: fx("hessian_landscape.json") }),
    spec("zeta_curve", { report: fx("zeta_curve.json") }),
    spec("trajectories", { trajectories: fx("traj", "trajectories.csv") }),
    spec("final_hist", { trajectories: fx("traj", "trajectories.csv") }),
    spec("kernel_compare", { results: fx("kernels", "results.csv") }),
    spec("score_sweep", { results: fx("score", "results.csv") }),
  ];

  it("every kind renders well-formed standalone SVG", () => {
    for (const s of allSpecs) {
      const svg = render(s);
      expect(svg.startsWith("<svg xmlns=")).toBe(true);
      expect(svg.trimEnd().endsWith("</svg>")).toBe(true);
      expect(svg).not.toContain("NaN");
      expect(svg).not.toContain("Infinity");
    }
  });

  it("re-rendering is byte-identical", () => {
    for (const s of allSpecs) {
      const first = renderToFile(s);
      const bytes = readFileSync(first);
      expect(existsSync(first)).toBe(true);
      renderToFile(s);
      expect(readFileSync(first).equals(bytes)).toBe(true);
      expect(render(s)).toBe(bytes.toString("utf-8"));
    }
  });

  it("titles can be overridden from the spec", () => {
    const s = spec("zeta_curve", { report: fx("zeta_curve.json") },
      { title: "my title" });
    expect(render(s)).toContain(">my title<");
  });
});
