/** Minimal deterministic SVG plotting: no DOM, fixed decimals, stable output. */

export interface Margin {
  top: number;
  right: number;
  bottom: number;
  left: number;
}

export const SIZE = { width: 640, height: 420 };
export const MARGIN: Margin = { top: 40, right: 24, bottom: 48, left: 64 };

const f = (x: number) => (Number.isFinite(x) ? x.toFixed(2) : "0.00");

export class Scale {
  constructor(
    readonly d0: number,
    readonly d1: number,
    readonly r0: number,
    readonly r1: number,
  ) {}

  at(x: number): number {
    const span = this.d1 - this.d0 || 1;
    return this.r0 + ((x - this.d0) / span) * (this.r1 - this.r0);
  }

  ticks(count = 5): number[] {
    const span = this.d1 - this.d0 || 1;
    const step = Math.pow(10, Math.floor(Math.log10(span / count)));
    const err = (span / count) / step;
    const unit = err >= 7.5 ? step * 10 : err >= 3.5 ? step * 5 : err >= 1.5 ? step * 2 : step;
    const out: number[] = [];
    for (let t = Math.ceil(this.d0 / unit) * unit; t <= this.d1 + 1e-12; t += unit) {
      out.push(Number(t.toPrecision(12)));
    }
    return out;
  }
}

export function extent(values: number[], pad = 0.05): [number, number] {
  const lo = Math.min(...values);
  const hi = Math.max(...values);
  const span = hi - lo || Math.abs(hi) || 1;
  return [lo - pad * span, hi + pad * span];
}

export interface Series {
  points: Array<{ x: number; y: number; lo?: number; hi?: number }>;
  color: string;
  label: string;
}

export interface FigureSpec {
  title: string;
  xLabel: string;
  yLabel: string;
  series: Series[];
  lines?: Array<{ slope: number; intercept: number; color: string; label: string }>;
}

const PALETTE = ["#1f6f8b", "#c0504d", "#5a8f29", "#7c5295", "#b8860b", "#356e6a"];

export function color(i: number): string {
  return PALETTE[i % PALETTE.length];
}

export function renderFigure(spec: FigureSpec): string {
  const { width, height } = SIZE;
  const m = MARGIN;
  const xs = spec.series.flatMap((s) => s.points.map((p) => p.x));
  const ys = spec.series.flatMap((s) =>
    s.points.flatMap((p) => [p.y, p.lo ?? p.y, p.hi ?? p.y]),
  );
  const [x0, x1] = extent(xs);
  const [y0, y1] = extent(ys);
  const sx = new Scale(x0, x1, m.left, width - m.right);
  const sy = new Scale(y0, y1, height - m.bottom, m.top);

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" viewBox="0 0 ${width} ${height}" font-family="sans-serif">`,
  );
  parts.push(`<rect width="${width}" height="${height}" fill="white"/>`);
  parts.push(
    `<text x="${width / 2}" y="20" text-anchor="middle" font-size="14">${esc(spec.title)}</text>`,
  );
  for (const t of sx.ticks()) {
    const px = sx.at(t);
    parts.push(
      `<line x1="${f(px)}" y1="${m.top}" x2="${f(px)}" y2="${height - m.bottom}" stroke="#eee"/>`,
      `<text x="${f(px)}" y="${height - m.bottom + 16}" text-anchor="middle" font-size="10">${tickLabel(t)}</text>`,
    );
  }
  for (const t of sy.ticks()) {
    const py = sy.at(t);
    parts.push(
      `<line x1="${m.left}" y1="${f(py)}" x2="${width - m.right}" y2="${f(py)}" stroke="#eee"/>`,
      `<text x="${m.left - 6}" y="${f(py + 3)}" text-anchor="end" font-size="10">${tickLabel(t)}</text>`,
    );
  }
  parts.push(
    `<rect x="${m.left}" y="${m.top}" width="${width - m.left - m.right}" height="${height - m.top - m.bottom}" fill="none" stroke="#444"/>`,
    `<text x="${width / 2}" y="${height - 12}" text-anchor="middle" font-size="12">${esc(spec.xLabel)}</text>`,
    `<text transform="rotate(-90 16 ${height / 2})" x="16" y="${height / 2}" text-anchor="middle" font-size="12">${esc(spec.yLabel)}</text>`,
  );

  for (const line of spec.lines ?? []) {
    const yA = line.intercept + line.slope * x0;
    const yB = line.intercept + line.slope * x1;
    parts.push(
      `<line x1="${f(sx.at(x0))}" y1="${f(sy.at(yA))}" x2="${f(sx.at(x1))}" y2="${f(sy.at(yB))}" stroke="${line.color}" stroke-dasharray="6 3"/>`,
    );
  }

  spec.series.forEach((s, si) => {
    const path = s.points
      .map((p, i) => `${i === 0 ? "M" : "L"}${f(sx.at(p.x))},${f(sy.at(p.y))}`)
      .join(" ");
    if (s.points.length > 1) {
      parts.push(`<path d="${path}" fill="none" stroke="${s.color}" stroke-width="1.5"/>`);
    }
    for (const p of s.points) {
      if (p.lo !== undefined && p.hi !== undefined) {
        parts.push(
          `<line x1="${f(sx.at(p.x))}" y1="${f(sy.at(p.lo))}" x2="${f(sx.at(p.x))}" y2="${f(sy.at(p.hi))}" stroke="${s.color}"/>`,
        );
      }
      parts.push(
        `<circle cx="${f(sx.at(p.x))}" cy="${f(sy.at(p.y))}" r="2.5" fill="${s.color}"/>`,
      );
    }
    parts.push(
      `<text x="${width - m.right - 6}" y="${m.top + 14 + 14 * si}" text-anchor="end" font-size="11" fill="${s.color}">${esc(s.label)}</text>`,
    );
  });
  parts.push("</svg>");
  return parts.join("\n") + "\n";
}

export function renderHeatmap(
  title: string,
  xLabel: string,
  yLabel: string,
  xs: number[],
  ys: number[],
  grid: Array<Array<number | null>>,
): string {
  const { width, height } = SIZE;
  const m = MARGIN;
  const flat = grid.flat().filter((v): v is number => v !== null);
  const lo = Math.min(...flat);
  const hi = Math.max(...flat);
  const cw = (width - m.left - m.right) / xs.length;
  const ch = (height - m.top - m.bottom) / ys.length;
  const parts: string[] = [
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" viewBox="0 0 ${width} ${height}" font-family="sans-serif">`,
    `<rect width="${width}" height="${height}" fill="white"/>`,
    `<text x="${width / 2}" y="20" text-anchor="middle" font-size="14">${esc(title)}</text>`,
  ];
  ys.forEach((yv, yi) => {
    xs.forEach((xv, xi) => {
      const v = grid[yi][xi];
      if (v === null) return;
      const t = hi > lo ? (v - lo) / (hi - lo) : 0.5;
      const shade = Math.round(245 - 190 * t);
      parts.push(
        `<rect x="${f(m.left + xi * cw)}" y="${f(m.top + yi * ch)}" width="${f(cw)}" height="${f(ch)}" fill="rgb(${shade},${Math.round(shade * 0.85)},120)"/>`,
        `<text x="${f(m.left + xi * cw + cw / 2)}" y="${f(m.top + yi * ch + ch / 2 + 3)}" text-anchor="middle" font-size="9">${v.toPrecision(3)}</text>`,
      );
    });
  });
  xs.forEach((xv, xi) =>
    parts.push(
      `<text x="${f(m.left + xi * cw + cw / 2)}" y="${height - m.bottom + 16}" text-anchor="middle" font-size="10">${tickLabel(xv)}</text>`,
    ),
  );
  ys.forEach((yv, yi) =>
    parts.push(
      `<text x="${m.left - 6}" y="${f(m.top + yi * ch + ch / 2 + 3)}" text-anchor="end" font-size="10">${tickLabel(yv)}</text>`,
    ),
  );
  parts.push(
    `<text x="${width / 2}" y="${height - 12}" text-anchor="middle" font-size="12">${esc(xLabel)}</text>`,
    `<text transform="rotate(-90 16 ${height / 2})" x="16" y="${height / 2}" text-anchor="middle" font-size="12">${esc(yLabel)}</text>`,
    "</svg>",
  );
  return parts.join("\n") + "\n";
}

function tickLabel(t: number): string {
  if (t === 0) return "0";
  const a = Math.abs(t);
  if (a >= 1e4 || a < 1e-3) return t.toExponential(1);
  return Number(t.toPrecision(4)).toString();
}

function esc(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}
