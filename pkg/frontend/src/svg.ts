/**
 * Minimal deterministic SVG plotting: a grid of panels, each with axes,
 * tick labels, line series and a legend.  No timestamps, no randomness,
 * so identical inputs produce identical bytes.
 */

export interface SvgSeries {
  x: number[];
  y: number[];
  label: string;
  color: string;
  dash: string | null;
  width: number;
}

export interface SvgPanel {
  title: string;
  xLabel: string;
  yLabel: string;
  series: SvgSeries[];
}

const PANEL_W = 420;
const PANEL_H = 300;
const MARGIN = { left: 64, right: 16, top: 30, bottom: 44 };
const COLS_MAX = 2;

function fmt(v: number): string {
  if (v === 0) return "0";
  const a = Math.abs(v);
  if (a >= 1e4 || a < 1e-3) return v.toExponential(1);
  return Number(v.toPrecision(4)).toString();
}

function niceTicks(lo: number, hi: number, n = 5): number[] {
  if (!(hi > lo)) {
    const pad = Math.abs(lo) > 0 ? Math.abs(lo) * 0.5 : 0.5;
    lo -= pad;
    hi += pad;
  }
  const span = hi - lo;
  const step0 = span / n;
  const mag = Math.pow(10, Math.floor(Math.log10(step0)));
  const candidates = [1, 2, 2.5, 5, 10].map((m) => m * mag);
  const step = candidates.find((s) => span / s <= n) ?? candidates[4];
  const first = Math.ceil(lo / step) * step;
  const ticks: number[] = [];
  for (let v = first; v <= hi + 1e-12 * span; v += step) {
    ticks.push(Math.abs(v) < 1e-12 * span ? 0 : v);
  }
  return ticks;
}

function esc(text: string): string {
  return text.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

function range(values: number[]): [number, number] {
  let lo = Infinity;
  let hi = -Infinity;
  for (const v of values) {
    if (Number.isFinite(v)) {
      lo = Math.min(lo, v);
      hi = Math.max(hi, v);
    }
  }
  if (!Number.isFinite(lo)) return [0, 1];
  return [lo, hi];
}

function renderPanel(panel: SvgPanel, ox: number, oy: number): string {
  const iw = PANEL_W - MARGIN.left - MARGIN.right;
  const ih = PANEL_H - MARGIN.top - MARGIN.bottom;
  const [xloRaw, xhiRaw] = range(panel.series.flatMap((s) => s.x));
  const [yloRaw, yhiRaw] = range(panel.series.flatMap((s) => s.y));
  const ypad = (yhiRaw - yloRaw || Math.abs(yloRaw) || 1) * 0.06;
  const xlo = xloRaw;
  const xhi = xhiRaw > xloRaw ? xhiRaw : xloRaw + 1;
  const ylo = yloRaw - ypad;
  const yhi = yhiRaw + ypad;
  const sx = (v: number) => ox + MARGIN.left + ((v - xlo) / (xhi - xlo)) * iw;
  const sy = (v: number) => oy + MARGIN.top + ih - ((v - ylo) / (yhi - ylo)) * ih;

  const parts: string[] = [];
  parts.push(
    `<rect x="${ox + MARGIN.left}" y="${oy + MARGIN.top}" width="${iw}" height="${ih}" ` +
      `fill="none" stroke="#444" stroke-width="1"/>`
  );
  for (const t of niceTicks(xlo, xhi)) {
    const px = sx(t);
    parts.push(
      `<line x1="${px.toFixed(2)}" y1="${(oy + MARGIN.top + ih).toFixed(2)}" ` +
        `x2="${px.toFixed(2)}" y2="${(oy + MARGIN.top + ih + 4).toFixed(2)}" stroke="#444"/>`,
      `<text x="${px.toFixed(2)}" y="${(oy + MARGIN.top + ih + 16).toFixed(2)}" ` +
        `font-size="10" text-anchor="middle" fill="#222">${fmt(t)}</text>`
    );
  }
  for (const t of niceTicks(ylo, yhi)) {
    const py = sy(t);
    parts.push(
      `<line x1="${(ox + MARGIN.left - 4).toFixed(2)}" y1="${py.toFixed(2)}" ` +
        `x2="${(ox + MARGIN.left).toFixed(2)}" y2="${py.toFixed(2)}" stroke="#444"/>`,
      `<text x="${(ox + MARGIN.left - 7).toFixed(2)}" y="${(py + 3).toFixed(2)}" ` +
        `font-size="10" text-anchor="end" fill="#222">${fmt(t)}</text>`
    );
  }
  parts.push(
    `<text x="${(ox + MARGIN.left + iw / 2).toFixed(2)}" y="${(oy + PANEL_H - 8).toFixed(2)}" ` +
      `font-size="12" text-anchor="middle" fill="#000">${esc(panel.xLabel)}</text>`,
    `<text x="${(ox + 14).toFixed(2)}" y="${(oy + MARGIN.top + ih / 2).toFixed(2)}" ` +
      `font-size="12" text-anchor="middle" fill="#000" ` +
      `transform="rotate(-90 ${(ox + 14).toFixed(2)} ${(oy + MARGIN.top + ih / 2).toFixed(2)})">` +
      `${esc(panel.yLabel)}</text>`,
    `<text x="${(ox + MARGIN.left + iw / 2).toFixed(2)}" y="${(oy + 18).toFixed(2)}" ` +
      `font-size="12" text-anchor="middle" fill="#000">${esc(panel.title)}</text>`
  );
  for (const s of panel.series) {
    const pts = s.x
      .map((xv, i) => `${sx(xv).toFixed(2)},${sy(s.y[i]).toFixed(2)}`)
      .join(" ");
    const dash = s.dash ? ` stroke-dasharray="${s.dash}"` : "";
    parts.push(
      `<polyline points="${pts}" fill="none" stroke="${s.color}" ` +
        `stroke-width="${s.width}"${dash}/>`
    );
  }
  // legend, top-right inside the frame
  let ly = oy + MARGIN.top + 12;
  const lx = ox + MARGIN.left + iw - 130;
  for (const s of panel.series) {
    const dash = s.dash ? ` stroke-dasharray="${s.dash}"` : "";
    parts.push(
      `<line x1="${lx}" y1="${ly - 3}" x2="${lx + 24}" y2="${ly - 3}" ` +
        `stroke="${s.color}" stroke-width="${s.width}"${dash}/>`,
      `<text x="${lx + 29}" y="${ly}" font-size="10" fill="#222">${esc(s.label)}</text>`
    );
    ly += 13;
  }
  return parts.join("\n");
}

export function renderSvg(panels: SvgPanel[], title: string | null): string {
  const cols = Math.min(panels.length, COLS_MAX);
  const rowsN = Math.ceil(panels.length / cols);
  const titleH = title ? 26 : 0;
  const width = cols * PANEL_W;
  const height = rowsN * PANEL_H + titleH;
  const parts: string[] = [
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" ` +
      `viewBox="0 0 ${width} ${height}">`,
    `<rect width="${width}" height="${height}" fill="#ffffff"/>`,
  ];
  if (title) {
    parts.push(
      `<text x="${width / 2}" y="18" font-size="14" text-anchor="middle" ` +
        `font-weight="bold" fill="#000">${esc(title)}</text>`
    );
  }
  panels.forEach((panel, i) => {
    const ox = (i % cols) * PANEL_W;
    const oy = Math.floor(i / cols) * PANEL_H + titleH;
    parts.push(renderPanel(panel, ox, oy));
  });
  parts.push("</svg>");
  return parts.join("\n") + "\n";
}
