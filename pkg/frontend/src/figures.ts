// The six figure kinds. Render-only: every number drawn here was computed
// upstream; overlay curves evaluate fit parameters read from fits.csv and
// never refit anything.

import { Row, numbers } from "./csv.js";
import {
  DEFAULT_STYLE, Frame, Rect, Style, axes, circles, document, esc, fmt,
  frame, pad, polyline,
} from "./svg.js";

export class FigureError extends Error {}

function finiteNum(v: unknown): boolean {
  return typeof v === "number" && Number.isFinite(v);
}

function plotRect(style: Style, slot = 0, slots = 1): Rect {
  const top = style.title ? 2.5 * style.fontSize : 1.2 * style.fontSize;
  const left = 64;
  const bottomPerSlot = 3.6 * style.fontSize;
  const gap = 1.6 * style.fontSize;
  const usable = style.height - top - slots * bottomPerSlot - (slots - 1) * gap;
  const h = usable / slots;
  const y = top + slot * (h + bottomPerSlot + gap);
  return { x: left, y, w: style.width - left - 18, h };
}

function fitParams(fits: Row[], model: string): Record<string, number> | null {
  const params: Record<string, number> = {};
  let found = false;
  for (const row of fits) {
    if (row.model === model && typeof row.value === "number") {
      params[String(row.parameter)] = row.value;
      found = true;
    }
  }
  return found ? params : null;
}

function histBars(f: Frame, rows: Row[], countCol: string, fill: string): string {
  const parts: string[] = [];
  for (const row of rows) {
    const left = row.bin_left as number;
    const right = row.bin_right as number;
    const count = row[countCol] as number;
    const x = f.sx(left);
    const w = f.sx(right) - x;
    const y = f.sy(count);
    const h = f.sy(f.ydom[0]) - y;
    parts.push(`<rect x="${fmt(x)}" y="${fmt(y)}" width="${fmt(Math.max(w, 0.5))}" height="${fmt(Math.max(h, 0))}" fill="${fill}" fill-opacity="0.55" stroke="none"/>`);
  }
  return parts.join("\n");
}

function overlayCurve(f: Frame, fn: (x: number) => number, stroke: string,
                      samples = 200): string {
  const xs: number[] = [];
  const ys: number[] = [];
  for (let i = 0; i <= samples; i++) {
    const x = f.xdom[0] + ((f.xdom[1] - f.xdom[0]) * i) / samples;
    const y = fn(x);
    xs.push(x);
    ys.push(Math.min(Math.max(y, f.ydom[0]), f.ydom[1]));
  }
  return polyline(f, xs, ys, stroke);
}

function legend(f: Frame, style: Style, entries: [string, string][]): string {
  const fs = style.fontSize;
  const parts: string[] = [];
  entries.forEach(([label, color], i) => {
    const y = f.rect.y + 10 + i * (fs + 6);
    const x = f.rect.x + f.rect.w - 150;
    parts.push(`<line x1="${fmt(x)}" y1="${fmt(y)}" x2="${fmt(x + 22)}" y2="${fmt(y)}" stroke="${color}" stroke-width="2"/>`);
    parts.push(`<text x="${fmt(x + 28)}" y="${fmt(y + fs * 0.35)}" font-size="${fs}">${esc(label)}</text>`);
  });
  return parts.join("\n");
}

// ---------------------------------------------------------------------------
// histogram kinds: dos (raw counts, Gaussian overlay) and ee-dos
// (max-normalized counts, exponential overlay)
// ---------------------------------------------------------------------------

export function dosFigure(hist: Row[], fits: Row[], style: Style): string {
  if (hist.length === 0) throw new FigureError("dos: histogram has no rows");
  const lo = hist[0].bin_left as number;
  const hi = hist[hist.length - 1].bin_right as number;
  const counts = numbers(hist, "count");
  const rect = plotRect(style);
  const f = frame(rect, [lo, hi], [0, pad(0, Math.max(...counts))[1]]);

  let body = histBars(f, hist, "count", style.color);
  const entries: [string, string][] = [["counts", style.color]];
  const g = fitParams(fits, "gaussian");
  if (g && g.sigma !== undefined && g.A !== undefined) {
    const mu = g.mu ?? 0;
    body += "\n" + overlayCurve(
      f, (e) => g.A * Math.exp(-((e - mu) ** 2) / (2 * g.sigma ** 2)), style.color2);
    entries.push([`gaussian fit (sigma=${tick3(g.sigma)})`, style.color2]);
  }
  body += "\n" + legend(f, style, entries);
  body += "\n" + axes(f, style, "E", "count");
  return document(style, body);
}

export function eeDosFigure(hist: Row[], fits: Row[], style: Style): string {
  if (hist.length === 0) throw new FigureError("ee-dos: histogram has no rows");
  const lo = hist[0].bin_left as number;
  const hi = hist[hist.length - 1].bin_right as number;
  const counts = numbers(hist, "count_normalized");
  const rect = plotRect(style);
  const f = frame(rect, [lo, hi], [0, pad(0, Math.max(...counts))[1]]);

  let body = histBars(f, hist, "count_normalized", style.color);
  const entries: [string, string][] = [["counts / max", style.color]];
  const p = fitParams(fits, "shifted_poisson");
  if (p && p.omega !== undefined && p.s_tilde !== undefined && p.delta !== undefined) {
    body += "\n" + overlayCurve(
      f, (s) => Math.exp((-p.omega * (p.s_tilde - s)) / p.delta), style.color2);
    entries.push([`exp fit (omega=${tick3(p.omega)})`, style.color2]);
  }
  body += "\n" + legend(f, style, entries);
  body += "\n" + axes(f, style, "S (bits)", "count / max");
  return document(style, body);
}

// ---------------------------------------------------------------------------
// sweep kinds: one panel per metric along the swept axis
// ---------------------------------------------------------------------------

function sweepPanels(rows: Row[], metrics: string[], xLabel: string,
                     style: Style): string {
  const usable = metrics.filter((m) => numbers(rows, m).length > 0);
  if (usable.length === 0) {
    throw new FigureError(`${xLabel} sweep: no rows carry ${metrics.join("/")}`);
  }
  const parts: string[] = [];
  usable.forEach((metric, slot) => {
    const pairs = rows
      .filter((r) => finiteNum(r.value) && finiteNum(r[metric]))
      .map((r) => [r.value as number, r[metric] as number] as [number, number])
      .sort((a, b) => a[0] - b[0]);
    const xs = pairs.map((p) => p[0]);
    const ys = pairs.map((p) => p[1]);
    const rect = plotRect(style, slot, usable.length);
    const f = frame(rect, pad(Math.min(...xs), Math.max(...xs)),
                    pad(Math.min(...ys), Math.max(...ys)));
    parts.push(polyline(f, xs, ys, style.color));
    parts.push(circles(f, xs, ys, style.color, 3));
    parts.push(axes(f, style, xLabel, metric));
  });
  return parts.join("\n");
}

function axisLabel(rows: Row[], fallback: string): string {
  const a = rows.length > 0 ? rows[0].axis : null;
  return typeof a === "string" && a !== "" ? a : fallback;
}

export function sizeSweepFigure(rows: Row[], style: Style): string {
  return document(style, sweepPanels(rows, ["F", "epsilon"], axisLabel(rows, "N"), style));
}

export function chiSweepFigure(rows: Row[], style: Style): string {
  return document(style, sweepPanels(rows, ["F"], axisLabel(rows, "chi_a"), style));
}

// ---------------------------------------------------------------------------
// disorder-scan: spacing ratio per realization, entropy deviations below
// ---------------------------------------------------------------------------

export function disorderFigure(rows: Row[], style: Style): string {
  if (rows.length === 0) throw new FigureError("disorder-scan: no rows");
  const panels: [string[], string][] = [[["r"], "r"], [["dS_ground", "dS_zero"], "dS (bits)"]];
  const usable = panels.filter(([cols]) =>
    cols.some((c) => numbers(rows, c).length > 0));
  if (usable.length === 0) {
    throw new FigureError("disorder-scan: no rows carry r or dS columns");
  }
  const parts: string[] = [];
  usable.forEach(([cols, yLabel], slot) => {
    const rect = plotRect(style, slot, usable.length);
    const xs = numbers(rows, "realization");
    const all: number[] = [];
    for (const c of cols) all.push(...numbers(rows, c));
    const f = frame(rect, pad(Math.min(...xs), Math.max(...xs)),
                    pad(Math.min(...all), Math.max(...all)));
    const entries: [string, string][] = [];
    cols.forEach((c, i) => {
      const color = i === 0 ? style.color : style.color2;
      const pxs: number[] = [];
      const pys: number[] = [];
      for (const row of rows) {
        if (finiteNum(row.realization) && finiteNum(row[c])) {
          pxs.push(row.realization as number);
          pys.push(row[c] as number);
        }
      }
      if (pys.length === 0) return;
      parts.push(circles(f, pxs, pys, color, 3));
      const mean = pys.reduce((a, b) => a + b, 0) / pys.length;
      parts.push(polyline(f, [f.xdom[0], f.xdom[1]], [mean, mean], color, true));
      entries.push([`${c} (mean ${tick3(mean)})`, color]);
    });
    parts.push(legend(f, style, entries));
    parts.push(axes(f, style, "realization", yLabel));
  });
  return document(style, parts.join("\n"));
}

// ---------------------------------------------------------------------------
// ee-scatter: mid-cut EE against normalized energy, with the fitted
// distribution edge marked when a shifted-poisson fit is available
// ---------------------------------------------------------------------------

export function eeScatterFigure(points: Row[], fits: Row[] | null,
                                style: Style): string {
  if (points.length === 0) throw new FigureError("ee-scatter: no rows");
  const xs = numbers(points, "energy_normalized");
  const ys = numbers(points, "entropy_bits");
  const p = fits ? fitParams(fits, "shifted_poisson") : null;
  const sTilde = p && p.s_tilde !== undefined ? p.s_tilde : null;
  // keep the fitted distribution edge inside the frame even when it sits
  // above every sampled point
  const yTop = sTilde === null ? Math.max(...ys)
                               : Math.max(Math.max(...ys), sTilde);
  const rect = plotRect(style);
  const f = frame(rect, pad(Math.min(...xs), Math.max(...xs)),
                  pad(Math.min(0, Math.min(...ys)), yTop));
  let body = circles(f, xs, ys, style.pointColor, 2.2, 0.6);
  const entries: [string, string][] = [["eigenstates", style.pointColor]];
  if (sTilde !== null) {
    body += "\n" + polyline(f, [f.xdom[0], f.xdom[1]], [sTilde, sTilde],
                            style.color2, true);
    entries.push([`fit edge S=${tick3(sTilde)}`, style.color2]);
  }
  body += "\n" + legend(f, style, entries);
  body += "\n" + axes(f, style, "E / max|E|", "S (bits)");
  return document(style, body);
}

function tick3(x: number): string {
  return Number(x.toPrecision(3)).toString();
}

export { DEFAULT_STYLE };
