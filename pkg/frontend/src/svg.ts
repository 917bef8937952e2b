/**
 * Hand-rolled SVG chart primitives.
 *
 * Everything here is a pure string builder: same inputs, same bytes.  No
 * timestamps, no randomness, no locale-dependent formatting.
 */

export const WIDTH = 640;
export const HEIGHT = 420;
export const MARGIN = { top: 42, right: 24, bottom: 50, left: 64 };

export const PALETTE = [
  "#4361ee", "#e63946", "#2d6a4f", "#f4a261", "#7b2d8b", "#168aad",
  "#b5179e", "#606c38",
];

// trajectory progress: start → end
const START_RGB: [number, number, number] = [123, 47, 191]; // purple
const END_RGB: [number, number, number] = [42, 157, 68]; // green

export function progressColor(t: number): string {
  const u = Math.min(1, Math.max(0, t));
  const c = START_RGB.map((s, i) => Math.round(s + u * (END_RGB[i] - s)));
  return `rgb(${c[0]},${c[1]},${c[2]})`;
}

export function esc(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

/** Pixel coordinate: fixed two decimals, no negative zero. */
export function px(v: number): string {
  const s = v.toFixed(2);
  return s === "-0.00" ? "0.00" : s;
}

/** Tick label: plain decimal in a humane range, exponent form outside it. */
export function fmtNum(v: number): string {
  if (v === 0) return "0";
  const a = Math.abs(v);
  if (a >= 1e4 || a < 1e-3) {
    const e = Math.floor(Math.log10(a));
    const mant = Number((v / 10 ** e).toPrecision(3));
    return `${mant}e${e}`;
  }
  return String(Number(v.toPrecision(6)));
}

// ---------------------------------------------------------------------------
// Scales and ticks
// ---------------------------------------------------------------------------

export interface Scale {
  (v: number): number;
  domain: [number, number];
  log: boolean;
}

export function linScale(domain: [number, number], range: [number, number]): Scale {
  const [d0, d1] = domain;
  const span = d1 - d0 || 1;
  const f = ((v: number) => range[0] + ((v - d0) / span) * (range[1] - range[0])) as Scale;
  f.domain = domain;
  f.log = false;
  return f;
}

export function logScale(domain: [number, number], range: [number, number]): Scale {
  const [d0, d1] = domain;
  if (d0 <= 0 || d1 <= 0) {
    throw new RangeError(`log scale needs a positive domain, got [${d0}, ${d1}]`);
  }
  const l0 = Math.log10(d0);
  const span = Math.log10(d1) - l0 || 1;
  const f = ((v: number) =>
    range[0] + ((Math.log10(v) - l0) / span) * (range[1] - range[0])) as Scale;
  f.domain = domain;
  f.log = true;
  return f;
}

export function niceTicks(min: number, max: number, count = 5): number[] {
  const range = max - min || Math.abs(max) || 1;
  const rough = range / count;
  const mag = 10 ** Math.floor(Math.log10(rough));
  const step = [1, 2, 5, 10].map((m) => m * mag).find((s) => s >= rough) ?? rough;
  const start = Math.ceil(min / step) * step;
  const ticks: number[] = [];
  for (let v = start; v <= max + step * 1e-9; v += step) {
    ticks.push(Math.abs(v) < step * 1e-9 ? 0 : v);
  }
  return ticks;
}

/** Decade ticks; adds 2× and 5× mantissas when the domain spans < 2 decades. */
export function logTicks(min: number, max: number): number[] {
  const lo = Math.floor(Math.log10(min));
  const hi = Math.ceil(Math.log10(max));
  const mantissas = hi - lo <= 2 ? [1, 2, 5] : [1];
  const ticks: number[] = [];
  for (let e = lo; e <= hi; e++) {
    for (const m of mantissas) {
      const v = m * 10 ** e;
      if (v >= min / (1 + 1e-9) && v <= max * (1 + 1e-9)) ticks.push(v);
    }
  }
  return ticks;
}

/** Pad a data domain by a fraction on both sides (linear space). */
export function padDomain([lo, hi]: [number, number], frac = 0.05): [number, number] {
  const span = hi - lo || Math.abs(hi) || 1;
  return [lo - frac * span, hi + frac * span];
}

// ---------------------------------------------------------------------------
// Markup builders
// ---------------------------------------------------------------------------

export function polyline(points: Array<[number, number]>, attrs: string): string {
  const pts = points.map(([x, y]) => `${px(x)},${px(y)}`).join(" ");
  return `<polyline fill="none" points="${pts}" ${attrs}/>`;
}

export function circle(x: number, y: number, r: number, attrs: string): string {
  return `<circle cx="${px(x)}" cy="${px(y)}" r="${r}" ${attrs}/>`;
}

export function line(x1: number, y1: number, x2: number, y2: number, attrs: string): string {
  return `<line x1="${px(x1)}" y1="${px(y1)}" x2="${px(x2)}" y2="${px(y2)}" ${attrs}/>`;
}

export function text(x: number, y: number, s: string, attrs: string): string {
  return `<text x="${px(x)}" y="${px(y)}" ${attrs}>${esc(s)}</text>`;
}

export function rect(x: number, y: number, w: number, h: number, attrs: string): string {
  return `<rect x="${px(x)}" y="${px(y)}" width="${px(w)}" height="${px(h)}" ${attrs}/>`;
}

export function xAxis(scale: Scale, ticks: number[], label: string): string {
  const y = HEIGHT - MARGIN.bottom;
  const parts = [line(MARGIN.left, y, WIDTH - MARGIN.right, y, 'stroke="#333"')];
  for (const t of ticks) {
    const x = scale(t);
    parts.push(line(x, y, x, y + 5, 'stroke="#333"'));
    parts.push(text(x, y + 18, fmtNum(t), 'font-size="11" text-anchor="middle" fill="#333"'));
  }
  const cx = (MARGIN.left + WIDTH - MARGIN.right) / 2;
  parts.push(text(cx, HEIGHT - 12, label, 'font-size="12" text-anchor="middle" fill="#111"'));
  return parts.join("\n");
}

export function yAxis(scale: Scale, ticks: number[], label: string, grid = true): string {
  const x = MARGIN.left;
  const parts = [line(x, MARGIN.top, x, HEIGHT - MARGIN.bottom, 'stroke="#333"')];
  for (const t of ticks) {
    const y = scale(t);
    parts.push(line(x - 5, y, x, y, 'stroke="#333"'));
    if (grid) {
      parts.push(line(x, y, WIDTH - MARGIN.right, y, 'stroke="#ddd" stroke-width="0.5"'));
    }
    parts.push(text(x - 8, y + 4, fmtNum(t), 'font-size="11" text-anchor="end" fill="#333"'));
  }
  const cy = (MARGIN.top + HEIGHT - MARGIN.bottom) / 2;
  parts.push(
    `<text x="16" y="${px(cy)}" font-size="12" text-anchor="middle" fill="#111" ` +
      `transform="rotate(-90 16 ${px(cy)})">${esc(label)}</text>`,
  );
  return parts.join("\n");
}

export interface LegendEntry {
  label: string;
  color: string;
  dash?: string;
  marker?: "line" | "dot";
}

export function legend(entries: LegendEntry[], x: number, y: number): string {
  const parts: string[] = [];
  entries.forEach((e, i) => {
    const ey = y + i * 16;
    if (e.marker === "dot") {
      parts.push(circle(x + 9, ey - 4, 3.5, `fill="${e.color}"`));
    } else {
      const dash = e.dash ? ` stroke-dasharray="${e.dash}"` : "";
      parts.push(line(x, ey - 4, x + 18, ey - 4, `stroke="${e.color}" stroke-width="2"${dash}`));
    }
    parts.push(text(x + 24, ey, e.label, 'font-size="11" fill="#333"'));
  });
  return parts.join("\n");
}

export function frame(title: string, body: string[]): string {
  return [
    `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${HEIGHT}" ` +
      `viewBox="0 0 ${WIDTH} ${HEIGHT}" font-family="Helvetica, Arial, sans-serif">`,
    `<rect width="${WIDTH}" height="${HEIGHT}" fill="#ffffff"/>`,
    text(WIDTH / 2, 24, title, 'font-size="14" text-anchor="middle" fill="#111"'),
    ...body,
    "</svg>",
  ].join("\n") + "\n";
}
