import {
  HEIGHT,
  MARGIN,
  WIDTH,
  axes,
  colormap,
  document,
  extent,
  fmt,
  linearScale,
  polyline,
} from "./svg.js";
import { column, parseCsv } from "./csv.js";

export type Kind = "ramp-overlay" | "spectrum" | "heatmap" | "cuts" | "comparison";

export interface Sidecar {
  best?: { b_over_j0: number; t_ms: number; probability: number };
}

export interface RenderOptions {
  sidecar?: Sidecar;
  sharedScale?: boolean;
}

const PLOT_X: [number, number] = [MARGIN.left, WIDTH - MARGIN.right];
const PLOT_Y: [number, number] = [HEIGHT - MARGIN.bottom, MARGIN.top];

function padded([lo, hi]: [number, number]): [number, number] {
  if (lo === hi) return [lo - 1, hi + 1];
  const pad = 0.05 * (hi - lo);
  return [lo - pad, hi + pad];
}

function lineFigure(
  xs: number[],
  series: { ys: number[]; color: string; label: string }[],
  xLabel: string,
  yLabel: string,
  title: string,
): string {
  const xScale = linearScale(extent(xs), PLOT_X);
  const yScale = linearScale(padded(extent(series.flatMap((s) => s.ys))), PLOT_Y);
  const parts = [axes(xScale, yScale, xLabel, yLabel, title)];
  series.forEach((s, i) => {
    parts.push(polyline(xs.map(xScale), s.ys.map(yScale), s.color));
    if (series.length > 1) {
      const ly = MARGIN.top + 16 * (i + 1);
      parts.push(
        `<line x1="${WIDTH - 170}" y1="${ly}" x2="${WIDTH - 145}" y2="${ly}" stroke="${s.color}" stroke-width="2"/>`,
        `<text x="${WIDTH - 140}" y="${ly + 4}" font-size="11">${s.label}</text>`,
      );
    }
  });
  return document(parts.join("\n"));
}

export function renderRampOverlay(csvText: string): string {
  const rows = parseCsv(csvText, ["t_ms", "b_over_j0"], "ramp-overlay");
  return lineFigure(
    column(rows, "t_ms"),
    [{ ys: column(rows, "b_over_j0"), color: "#1f5fa8", label: "B(t)" }],
    "time (ms)",
    "field B / |J0|",
    "Locally adiabatic ramp schedule",
  );
}

export function renderSpectrum(csvText: string): string {
  const rows = parseCsv(csvText, ["b_over_j0", "gap_khz"], "spectrum");
  return lineFigure(
    column(rows, "b_over_j0"),
    [{ ys: column(rows, "gap_khz"), color: "#a83232", label: "gap" }],
    "field B / |J0|",
    "coupled gap (kHz)",
    "Coupled excitation gap",
  );
}

function uniqueSorted(values: number[]): number[] {
  return [...new Set(values)].sort((a, b) => a - b);
}

export function renderHeatmap(csvText: string, options: RenderOptions = {}): string {
  const rows = parseCsv(csvText, ["b_over_j0", "t_ms", "probability"], "heatmap");
  const bs = uniqueSorted(column(rows, "b_over_j0"));
  const ts = uniqueSorted(column(rows, "t_ms"));
  const grid = new Map<string, number>();
  for (const r of rows) grid.set(`${r.b_over_j0}|${r.t_ms}`, r.probability);
  const probs = column(rows, "probability");
  // per-panel color normalization by default; --shared-scale pins [0, 1]
  const [lo, hi] = options.sharedScale ? [0, 1] : extent(probs);
  const norm = (p: number) => (hi === lo ? 0.5 : (p - lo) / (hi - lo));
  const xScale = linearScale(extent(ts), PLOT_X);
  const yScale = linearScale(extent(bs), PLOT_Y);
  const cellW = (PLOT_X[1] - PLOT_X[0]) / Math.max(1, ts.length - 1);
  const cellH = (PLOT_Y[0] - PLOT_Y[1]) / Math.max(1, bs.length - 1);
  const parts: string[] = [];
  for (const b of bs) {
    for (const t of ts) {
      const p = grid.get(`${b}|${t}`);
      if (p === undefined) throw new Error(`heatmap: grid is missing the cell (b=${b}, t=${t})`);
      const x = xScale(t) - cellW / 2;
      const y = yScale(b) - cellH / 2;
      parts.push(
        `<rect x="${fmt(x)}" y="${fmt(y)}" width="${fmt(cellW)}" height="${fmt(cellH)}" fill="${colormap(norm(p))}"/>`,
      );
    }
  }
  parts.push(axes(xScale, yScale, "hold time (ms)", "quench field B_q / |J0|",
                  "Bang-bang ground-state probability"));
  const best = options.sidecar?.best;
  if (best !== undefined) {
    parts.push(
      `<circle cx="${fmt(xScale(best.t_ms))}" cy="${fmt(yScale(best.b_over_j0))}" r="7" fill="none" stroke="#90ee90" stroke-width="2.5"/>`,
    );
  }
  return document(parts.join("\n"));
}

export function renderCuts(csvText: string): string {
  const rows = parseCsv(csvText, ["b_over_j0", "t_ms", "probability"], "cuts");
  const bs = uniqueSorted(column(rows, "b_over_j0"));
  const ts = uniqueSorted(column(rows, "t_ms"));
  const nCuts = Math.min(5, bs.length);
  const picks = Array.from({ length: nCuts }, (_, i) =>
    bs[Math.round((i * (bs.length - 1)) / Math.max(1, nCuts - 1))],
  );
  const series = picks.map((b, i) => ({
    ys: ts.map((t) => {
      const row = rows.find((r) => r.b_over_j0 === b && r.t_ms === t);
      if (row === undefined) throw new Error(`cuts: grid is missing the cell (b=${b}, t=${t})`);
      return row.probability;
    }),
    color: colormap(nCuts === 1 ? 0.5 : i / (nCuts - 1)),
    label: `B_q=${fmt(b)}`,
  }));
  return lineFigure(ts, series, "hold time (ms)", "ground-state probability",
                    "Probability cuts at fixed quench field");
}

export function renderComparison(csvText: string): string {
  const rows = parseCsv(
    csvText,
    ["n_ions", "p_bangbang", "p_locally_adiabatic", "ratio"],
    "comparison",
  );
  const ns = column(rows, "n_ions");
  return lineFigure(
    ns,
    [
      { ys: column(rows, "p_bangbang"), color: "#1f5fa8", label: "bang-bang" },
      { ys: column(rows, "p_locally_adiabatic"), color: "#a83232", label: "locally adiabatic" },
      { ys: column(rows, "ratio"), color: "#3c8031", label: "ratio" },
    ],
    "chain length N",
    "probability / ratio",
    "Protocol comparison at fixed time budget",
  );
}

export function render(kind: Kind, csvText: string, options: RenderOptions = {}): string {
  switch (kind) {
    case "ramp-overlay":
      return renderRampOverlay(csvText);
    case "spectrum":
      return renderSpectrum(csvText);
    case "heatmap":
      return renderHeatmap(csvText, options);
    case "cuts":
      return renderCuts(csvText);
    case "comparison":
      return renderComparison(csvText);
    default:
      throw new Error(`unknown figure kind '${kind}'`);
  }
}
