/**
 * Turn a figure spec plus the referenced CSV files into one SVG image.
 *
 * Per panel, each series resolves its file (with the panel time), loads
 * it read-only, reduces it to a curve for the panel's quantity, and is
 * drawn with the style of its role: the reference in solid black, the
 * standard-family models in solid blues/grays, the modified-family
 * models dashed in warm colors.
 */

import { existsSync, writeFileSync } from "fs";

import { Table, loadTable } from "./csv";
import { FigureSpec, PanelSpec, SeriesSpec, resolveFile, SpecError } from "./figspec";
import {
  Curve,
  sliceCurve,
  snapshotField,
  snapshotProfile,
  vofHeight,
  vofMeanVelocity,
  vofProfile,
} from "./reduce";
import { SvgPanel, SvgSeries, renderSvg } from "./svg";

const ROLE_STYLES = {
  reference: { colors: ["#000000"], dash: null as string | null, width: 2.0 },
  "standard-model": { colors: ["#7f7f7f", "#1f77b4", "#9467bd"], dash: null, width: 1.4 },
  "modified-model": { colors: ["#d62728", "#ff7f0e", "#8c9e1a"], dash: "6 3", width: 1.4 },
};

const TIME_TOL = 1e-6;

function axisLabels(panel: PanelSpec): { x: string; y: string } {
  switch (panel.quantity) {
    case "height":
      return { x: "x [m]", y: "h [m]" };
    case "mean-velocity":
      return { x: "x [m]", y: "u_m [m/s]" };
    case "profile":
      return { x: "u [m/s]", y: "z [m]" };
  }
}

function panelTitle(panel: PanelSpec): string {
  const names = {
    height: "water height",
    "mean-velocity": "depth-averaged velocity",
    profile: "vertical velocity",
  };
  let title = `${names[panel.quantity]} at t=${panel.time} s`;
  if (panel.sliceAxis && panel.quantity !== "profile") {
    title += `, ${panel.sliceAxis}=${panel.sliceValue}`;
  } else if (panel.quantity === "profile") {
    title += `, x=${panel.sliceValue}`;
  }
  return title;
}

function checkTime(table: Table, panel: PanelSpec): void {
  if (table.time !== null && Math.abs(table.time - panel.time) > TIME_TOL) {
    throw new SpecError(
      `${table.file}: snapshot time ${table.time} does not match panel t=${panel.time}`
    );
  }
}

function curveFor(table: Table, panel: PanelSpec, spec: FigureSpec, role: string): Curve {
  const ySlice = panel.sliceAxis === "y" ? panel.sliceValue : null;
  if (panel.quantity === "profile") {
    const xLoc = panel.sliceValue as number;
    if (table.kind === "vof") return vofProfile(table, xLoc, spec.threshold, ySlice);
    if (table.kind === "snapshot") return snapshotProfile(table, xLoc, ySlice);
    throw new SpecError(`${table.file}: slice tables cannot provide vertical profiles`);
  }
  if (table.kind === "vof") {
    return panel.quantity === "height"
      ? vofHeight(table, spec.threshold, ySlice)
      : vofMeanVelocity(table, spec.threshold, ySlice);
  }
  if (table.kind === "slice") {
    return sliceCurve(table, role === "reference" ? "reference" : "model");
  }
  return snapshotField(table, panel.quantity === "height" ? "h" : "um", ySlice);
}

function styleFor(series: SeriesSpec, roleIndex: number): { color: string; dash: string | null; width: number } {
  const style = ROLE_STYLES[series.role];
  return {
    color: series.color ?? style.colors[roleIndex % style.colors.length],
    dash: series.dash ?? style.dash,
    width: style.width,
  };
}

/** Render the figure; returns the output path actually written. */
export function render(spec: FigureSpec, outOverride: string | null = null): string {
  const out = outOverride ?? spec.out;
  if (!out) throw new SpecError("no output path: set 'out =' in the spec or pass --out");

  const panels: SvgPanel[] = spec.panels.map((panel) => {
    const roleCount: Record<string, number> = {};
    const series: SvgSeries[] = spec.series.map((s) => {
      const file = resolveFile(s.file, panel.time);
      if (!existsSync(file)) {
        throw new SpecError(`series file not found: ${file}`);
      }
      const table = loadTable(file);
      checkTime(table, panel);
      const curve = curveFor(table, panel, spec, s.role);
      const idx = roleCount[s.role] ?? 0;
      roleCount[s.role] = idx + 1;
      const style = styleFor(s, idx);
      return { x: curve.x, y: curve.y, label: s.label, ...style };
    });
    const labels = axisLabels(panel);
    return { title: panelTitle(panel), xLabel: labels.x, yLabel: labels.y, series };
  });

  const svg = renderSvg(panels, spec.title);
  writeFileSync(out, svg, "utf8");
  return out;
}
