import { Row } from "./schema.js";
import { FigureSpec, Series, color, renderFigure, renderHeatmap } from "./svg.js";

export interface Figure {
  name: string;
  title: string;
  svg: string;
}

function leastSquares(xs: number[], ys: number[]): { slope: number; intercept: number } {
  const n = xs.length;
  const xm = xs.reduce((a, b) => a + b, 0) / n;
  const ym = ys.reduce((a, b) => a + b, 0) / n;
  let sxx = 0;
  let sxy = 0;
  for (let i = 0; i < n; i++) {
    sxx += (xs[i] - xm) ** 2;
    sxy += (xs[i] - xm) * (ys[i] - ym);
  }
  const slope = sxy / (sxx || 1);
  return { slope, intercept: ym - slope * xm };
}

const byNumber = (a: number, b: number) => a - b;

/** p_n vs beta with confidence intervals, one series per horizon n. */
export function freeEnergyVsBeta(rows: Row[]): FigureSpec | null {
  const fe = rows.filter((r) => r.statistic === "free_energy" && r.beta !== null);
  if (fe.length < 2) return null;
  const ns = [...new Set(fe.map((r) => r.n ?? 0))].sort(byNumber);
  const series: Series[] = ns.map((n, i) => ({
    label: `n = ${n}`,
    color: color(i),
    points: fe
      .filter((r) => (r.n ?? 0) === n)
      .sort((a, b) => (a.beta ?? 0) - (b.beta ?? 0))
      .map((r) => ({
        x: r.beta ?? 0,
        y: r.value ?? 0,
        lo: r.lo ?? undefined,
        hi: r.hi ?? undefined,
      })),
  }));
  if (series.every((s) => s.points.length < 2)) return null;
  return {
    title: "Free energy estimate vs inverse temperature",
    xLabel: "beta",
    yLabel: "p_n with CI",
    series,
  };
}

/** log E[W_n^2] against n, one series per beta. */
export function secondMomentVsN(rows: Row[]): FigureSpec | null {
  const sm = rows.filter(
    (r) => r.statistic === "second_moment" && r.k !== null && (r.value ?? 0) > 0,
  );
  if (sm.length < 3) return null;
  const betas = [...new Set(sm.map((r) => r.beta ?? 0))].sort(byNumber);
  const series: Series[] = betas.map((b, i) => ({
    label: `beta = ${b}`,
    color: color(i),
    points: sm
      .filter((r) => (r.beta ?? 0) === b)
      .sort((a, b2) => (a.k ?? 0) - (b2.k ?? 0))
      .map((r) => ({ x: r.k ?? 0, y: Math.log(r.value ?? 1) })),
  }));
  return {
    title: "Second moment growth",
    xLabel: "n",
    yLabel: "log E[W_n^2]",
    series,
  };
}

/** Collision partial sums against log horizon, with a fitted line. */
export function collisionVsLogK(rows: Row[]): FigureSpec | null {
  const stats = ["collision_partial_sum", "pipe_collision_sum", "cluster_pipe_collision_sum"];
  const cs = rows.filter(
    (r) => stats.includes(r.statistic) && (r.n ?? r.k) !== null && r.value !== null,
  );
  if (cs.length < 3) return null;
  const pts = cs
    .map((r) => ({ x: Math.log(r.n ?? r.k ?? 1), y: r.value ?? 0 }))
    .sort((a, b) => a.x - b.x);
  const fit = leastSquares(
    pts.map((p) => p.x),
    pts.map((p) => p.y),
  );
  return {
    title: "Collision partial sums vs log horizon",
    xLabel: "log L",
    yLabel: "sum of p_k^2",
    series: [{ label: "partial sums", color: color(0), points: pts }],
    lines: [
      {
        ...fit,
        color: color(1),
        label: `fit slope ${fit.slope.toFixed(3)}`,
      },
    ],
  };
}

/** log p_{2n}(x,x) against log n with the fitted spectral slope. */
export function spectralLogLog(rows: Row[]): FigureSpec | null {
  const rp = rows.filter(
    (r) => r.statistic === "return_prob" && r.k !== null && (r.value ?? 0) > 0,
  );
  if (rp.length < 3) return null;
  const pts = rp
    .map((r) => ({ x: Math.log((r.k ?? 2) / 2), y: Math.log(r.value ?? 1) }))
    .sort((a, b) => a.x - b.x);
  const fit = leastSquares(
    pts.map((p) => p.x),
    pts.map((p) => p.y),
  );
  return {
    title: `Spectral dimension fit (d = ${(-2 * fit.slope).toFixed(3)})`,
    xLabel: "log n",
    yLabel: "log p_2n(x,x)",
    series: [{ label: "return probabilities", color: color(0), points: pts }],
    lines: [{ ...fit, color: color(1), label: "least-squares fit" }],
  };
}

/** Endpoint max-mass heatmap over the (beta, n) grid. */
export function endpointHeatmap(rows: Row[]): Figure | null {
  const em = rows.filter(
    (r) => r.statistic === "endpoint_max_mass" && r.beta !== null && r.n !== null,
  );
  if (em.length < 2) return null;
  const betas = [...new Set(em.map((r) => r.beta as number))].sort(byNumber);
  const ns = [...new Set(em.map((r) => r.n as number))].sort(byNumber);
  const grid: Array<Array<number | null>> = ns.map(() => betas.map(() => null));
  for (const r of em) {
    grid[ns.indexOf(r.n as number)][betas.indexOf(r.beta as number)] = r.value;
  }
  return {
    name: "endpoint_heatmap",
    title: "Mean endpoint max mass",
    svg: renderHeatmap("Mean endpoint max mass", "beta", "n", betas, ns, grid),
  };
}

export const FIGURE_BUILDERS: Record<string, (rows: Row[]) => Figure | null> = {
  free_energy: (rows) => wrap("free_energy", freeEnergyVsBeta(rows)),
  second_moment: (rows) => wrap("second_moment", secondMomentVsN(rows)),
  collision_sums: (rows) => wrap("collision_sums", collisionVsLogK(rows)),
  spectral_fit: (rows) => wrap("spectral_fit", spectralLogLog(rows)),
  endpoint_heatmap: endpointHeatmap,
};

function wrap(name: string, spec: FigureSpec | null): Figure | null {
  if (spec === null) return null;
  return { name, title: spec.title, svg: renderFigure(spec) };
}
