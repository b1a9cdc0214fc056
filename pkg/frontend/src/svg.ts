// Minimal deterministic SVG toolkit: fixed-precision coordinates, no
// timestamps, no randomness, so identical inputs give identical bytes.

export interface Style {
  width: number;
  height: number;
  title: string;
  fontSize: number;
  color: string;       // primary series
  color2: string;      // secondary series / overlays
  pointColor: string;
  background: string;
}

export const DEFAULT_STYLE: Style = {
  width: 640,
  height: 420,
  title: "",
  fontSize: 12,
  color: "#2a6fb0",
  color2: "#c25b2a",
  pointColor: "#2a6fb0",
  background: "#ffffff",
};

export function fmt(x: number): string {
  if (!Number.isFinite(x)) throw new Error(`non-finite coordinate: ${x}`);
  const r = Math.round(x * 100) / 100;
  return Object.is(r, -0) ? "0" : String(r);
}

export function esc(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function tickLabel(x: number): string {
  if (x === 0) return "0";
  const a = Math.abs(x);
  if (a >= 1e5 || a < 1e-3) return x.toExponential(1);
  const s = String(Math.round(x * 1e6) / 1e6);
  return s;
}

export function ticks(lo: number, hi: number, want = 5): number[] {
  if (!(hi > lo)) return [lo];
  const raw = (hi - lo) / want;
  const mag = Math.pow(10, Math.floor(Math.log10(raw)));
  let step = mag;
  for (const m of [1, 2, 5, 10]) {
    if (m * mag >= raw) { step = m * mag; break; }
  }
  const out: number[] = [];
  for (let t = Math.ceil(lo / step) * step; t <= hi + step * 1e-9; t += step) {
    out.push(Math.abs(t) < step * 1e-9 ? 0 : t);
  }
  return out;
}

export interface Rect { x: number; y: number; w: number; h: number }

export interface Frame {
  rect: Rect;
  sx: (v: number) => number;
  sy: (v: number) => number;
  xdom: [number, number];
  ydom: [number, number];
}

export function pad(lo: number, hi: number, frac = 0.05): [number, number] {
  if (hi === lo) {
    const d = lo === 0 ? 1 : Math.abs(lo) * 0.5;
    return [lo - d, hi + d];
  }
  const d = (hi - lo) * frac;
  return [lo - d, hi + d];
}

export function frame(rect: Rect, xdom: [number, number], ydom: [number, number]): Frame {
  const sx = (v: number) => rect.x + ((v - xdom[0]) / (xdom[1] - xdom[0])) * rect.w;
  const sy = (v: number) => rect.y + rect.h - ((v - ydom[0]) / (ydom[1] - ydom[0])) * rect.h;
  return { rect, sx, sy, xdom, ydom };
}

export function axes(f: Frame, style: Style, xLabel: string, yLabel: string): string {
  const { rect } = f;
  const fs = style.fontSize;
  const parts: string[] = [];
  parts.push(`<rect x="${fmt(rect.x)}" y="${fmt(rect.y)}" width="${fmt(rect.w)}" height="${fmt(rect.h)}" fill="none" stroke="#444" stroke-width="1"/>`);
  for (const t of ticks(f.xdom[0], f.xdom[1])) {
    const x = f.sx(t);
    parts.push(`<line x1="${fmt(x)}" y1="${fmt(rect.y + rect.h)}" x2="${fmt(x)}" y2="${fmt(rect.y + rect.h + 4)}" stroke="#444"/>`);
    parts.push(`<text x="${fmt(x)}" y="${fmt(rect.y + rect.h + 4 + fs)}" font-size="${fs}" text-anchor="middle">${esc(tickLabel(t))}</text>`);
  }
  for (const t of ticks(f.ydom[0], f.ydom[1])) {
    const y = f.sy(t);
    parts.push(`<line x1="${fmt(rect.x - 4)}" y1="${fmt(y)}" x2="${fmt(rect.x)}" y2="${fmt(y)}" stroke="#444"/>`);
    parts.push(`<text x="${fmt(rect.x - 6)}" y="${fmt(y + fs * 0.35)}" font-size="${fs}" text-anchor="end">${esc(tickLabel(t))}</text>`);
  }
  parts.push(`<text x="${fmt(rect.x + rect.w / 2)}" y="${fmt(rect.y + rect.h + 4 + 2.2 * fs)}" font-size="${fs}" text-anchor="middle">${esc(xLabel)}</text>`);
  parts.push(`<text x="${fmt(rect.x - 44)}" y="${fmt(rect.y + rect.h / 2)}" font-size="${fs}" text-anchor="middle" transform="rotate(-90 ${fmt(rect.x - 44)} ${fmt(rect.y + rect.h / 2)})">${esc(yLabel)}</text>`);
  return parts.join("\n");
}

export function polyline(f: Frame, xs: number[], ys: number[], stroke: string,
                         dashed = false): string {
  const pts = xs.map((x, i) => `${fmt(f.sx(x))},${fmt(f.sy(ys[i]))}`).join(" ");
  const dash = dashed ? ` stroke-dasharray="5,4"` : "";
  return `<polyline points="${pts}" fill="none" stroke="${stroke}" stroke-width="1.5"${dash}/>`;
}

export function circles(f: Frame, xs: number[], ys: number[], fill: string,
                        r = 2.5, opacity = 1): string {
  const op = opacity === 1 ? "" : ` fill-opacity="${opacity}"`;
  return xs.map((x, i) =>
    `<circle cx="${fmt(f.sx(x))}" cy="${fmt(f.sy(ys[i]))}" r="${r}" fill="${fill}"${op}/>`,
  ).join("\n");
}

export function document(style: Style, body: string): string {
  const { width, height } = style;
  const title = style.title
    ? `<text x="${fmt(width / 2)}" y="${fmt(style.fontSize * 1.6)}" font-size="${style.fontSize + 2}" text-anchor="middle" font-weight="bold">${esc(style.title)}</text>\n`
    : "";
  return `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" viewBox="0 0 ${width} ${height}" font-family="sans-serif">
<rect x="0" y="0" width="${width}" height="${height}" fill="${style.background}"/>
${title}${body}
</svg>
`;
}
