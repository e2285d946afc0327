/**
 * Reductions that turn the raw tables into plottable (x, y) curves.
 *
 * Free-surface heights from volume-of-fluid tables use the same counting
 * rule as the solver pipeline: h = dz * #(fraction >= threshold) per
 * column.  Vertical velocity profiles from moment snapshots are
 * reconstructed with the scaled Legendre basis phi_j (phi_j(0) = 1,
 * phi_1 = 1 - 2 zeta), evaluated by the standard recurrence.
 */

import { Table, column, hasColumn, missingColumn, CsvError } from "./csv";

export interface Curve {
  x: number[];
  y: number[];
}

/** phi_j at zeta via the Legendre recurrence on s = 1 - 2 zeta. */
export function legendrePhi(j: number, zeta: number): number {
  const s = 1.0 - 2.0 * zeta;
  let p0 = 1.0;
  if (j === 0) return p0;
  let p1 = s;
  for (let k = 1; k < j; k++) {
    const p2 = ((2 * k + 1) * s * p1 - k * p0) / (k + 1);
    p0 = p1;
    p1 = p2;
  }
  return p1;
}

function uniq(values: number[]): number[] {
  return Array.from(new Set(values)).sort((a, b) => a - b);
}

function nearestIndex(axis: number[], value: number): number {
  let best = 0;
  for (let i = 1; i < axis.length; i++) {
    if (Math.abs(axis[i] - value) < Math.abs(axis[best] - value)) best = i;
  }
  return best;
}

interface VofColumns {
  x: number[];
  z: number[];
  fraction: number[];
  u: number[];
  y: number[] | null;
  v: number[] | null;
}

function vofColumns(table: Table): VofColumns {
  return {
    x: column(table, "x"),
    z: column(table, "z"),
    fraction: column(table, "fraction"),
    u: column(table, "u"),
    y: hasColumn(table, "y") ? column(table, "y") : null,
    v: hasColumn(table, "v") ? column(table, "v") : null,
  };
}

/** Rows of a VoF table restricted to the y-plane nearest the request. */
function restrictY(c: VofColumns, ySlice: number | null): number[] {
  const idx: number[] = [];
  if (c.y === null) {
    for (let i = 0; i < c.x.length; i++) idx.push(i);
    return idx;
  }
  const axis = uniq(c.y);
  const target = ySlice === null ? axis[0] : axis[nearestIndex(axis, ySlice)];
  for (let i = 0; i < c.y.length; i++) {
    if (c.y[i] === target) idx.push(i);
  }
  return idx;
}

function columnGroups(xs: number[], rows: number[]): Map<number, number[]> {
  const groups = new Map<number, number[]>();
  for (const i of rows) {
    const key = xs[i];
    const list = groups.get(key);
    if (list) list.push(i);
    else groups.set(key, [i]);
  }
  return groups;
}

function uniformDz(z: number[]): number {
  const axis = uniq(z);
  if (axis.length < 2) throw new CsvError("need at least 2 vertical layers");
  const dz = axis[1] - axis[0];
  for (let i = 1; i < axis.length - 1; i++) {
    if (Math.abs(axis[i + 1] - axis[i] - dz) > 1e-9 * Math.abs(dz)) {
      throw new CsvError("non-uniform z spacing is unsupported");
    }
  }
  return dz;
}

/** Height curve h(x) from a VoF table: count cells above threshold. */
export function vofHeight(table: Table, threshold: number, ySlice: number | null): Curve {
  const c = vofColumns(table);
  const rows = restrictY(c, ySlice);
  const dz = uniformDz(c.z);
  const x: number[] = [];
  const y: number[] = [];
  for (const [xv, idx] of columnGroups(c.x, rows)) {
    let count = 0;
    for (const i of idx) if (c.fraction[i] >= threshold) count++;
    x.push(xv);
    y.push(dz * count);
  }
  return sortCurve(x, y);
}

/** Depth-averaged velocity u_m(x): mean of u over the water cells. */
export function vofMeanVelocity(table: Table, threshold: number, ySlice: number | null): Curve {
  const c = vofColumns(table);
  const rows = restrictY(c, ySlice);
  const x: number[] = [];
  const y: number[] = [];
  for (const [xv, idx] of columnGroups(c.x, rows)) {
    let sum = 0;
    let count = 0;
    for (const i of idx) {
      if (c.fraction[i] >= threshold) {
        sum += c.u[i];
        count++;
      }
    }
    x.push(xv);
    y.push(count > 0 ? sum / count : 0);
  }
  return sortCurve(x, y);
}

/** Vertical profile (u, z) from the VoF column nearest x (and y). */
export function vofProfile(
  table: Table,
  xLoc: number,
  threshold: number,
  ySlice: number | null
): Curve {
  const c = vofColumns(table);
  const rows = restrictY(c, ySlice);
  const axis = uniq(rows.map((i) => c.x[i]));
  const target = axis[nearestIndex(axis, xLoc)];
  const u: number[] = [];
  const z: number[] = [];
  for (const i of rows) {
    if (c.x[i] === target && c.fraction[i] >= threshold) {
      u.push(c.u[i]);
      z.push(c.z[i]);
    }
  }
  return { x: u, y: z };
}

function sortCurve(x: number[], y: number[]): Curve {
  const order = x.map((_, i) => i).sort((a, b) => x[a] - x[b]);
  return { x: order.map((i) => x[i]), y: order.map((i) => y[i]) };
}

function snapshotRows(table: Table, ySlice: number | null): number[] {
  if (!hasColumn(table, "y")) {
    return table.rows.map((_, i) => i);
  }
  const ys = column(table, "y");
  const axis = uniq(ys);
  const target = ySlice === null ? axis[0] : axis[nearestIndex(axis, ySlice)];
  const idx: number[] = [];
  for (let i = 0; i < ys.length; i++) if (ys[i] === target) idx.push(i);
  return idx;
}

/** Field curve (x vs named column) from a snapshot table. */
export function snapshotField(table: Table, name: string, ySlice: number | null): Curve {
  const xs = column(table, "x");
  const vals = column(table, name);
  const rows = snapshotRows(table, ySlice);
  return sortCurve(rows.map((i) => xs[i]), rows.map((i) => vals[i]));
}

/**
 * Vertical profile (u, z) reconstructed from the moment columns of the
 * snapshot cell nearest x: u(z) = um + sum_j alpha_j phi_j(z / h).
 */
export function snapshotProfile(
  table: Table,
  xLoc: number,
  ySlice: number | null,
  nodes = 65
): Curve {
  const xs = column(table, "x");
  const hs = column(table, "h");
  const ums = column(table, "um");
  const alphas: number[][] = [];
  for (let j = 1; hasColumn(table, `alpha${j}`); j++) {
    alphas.push(column(table, `alpha${j}`));
  }
  const rows = snapshotRows(table, ySlice);
  const near = rows[nearestIndex(rows.map((i) => xs[i]), xLoc)];
  const h = hs[near];
  const u: number[] = [];
  const z: number[] = [];
  for (let k = 0; k < nodes; k++) {
    const zeta = k / (nodes - 1);
    let val = ums[near];
    for (let j = 0; j < alphas.length; j++) {
      val += alphas[j][near] * legendrePhi(j + 1, zeta);
    }
    u.push(val);
    z.push(zeta * h);
  }
  return { x: u, y: z };
}

/** Curve from a comparison slice table; the role picks the column. */
export function sliceCurve(table: Table, which: "model" | "reference"): Curve {
  return sortCurve(column(table, "x"), column(table, which));
}

export { missingColumn };
