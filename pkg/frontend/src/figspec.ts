/**
 * Figure specifications as flat key-value/list text files.
 *
 *   out = height_comparison.svg
 *   title = Water height
 *   threshold = 0.45
 *   panel = height t=0
 *   panel = height t=3 at y=65.5
 *   panel = profile t=3 at x=55
 *   series = out/dambreak1d_mswe_n0_t{t}.csv role=modified-model label=MSWE
 *
 * Repeated `panel` / `series` keys accumulate.  `{t}` in a series path is
 * replaced per panel by the panel time formatted with six decimals, which
 * matches the solver's snapshot file naming.
 */

export type Quantity = "height" | "mean-velocity" | "profile";
export type Role = "reference" | "standard-model" | "modified-model";

export interface PanelSpec {
  quantity: Quantity;
  time: number;
  sliceAxis: "x" | "y" | null;
  sliceValue: number | null;
}

export interface SeriesSpec {
  file: string;
  role: Role;
  label: string;
  color: string | null;
  dash: string | null;
}

export interface FigureSpec {
  panels: PanelSpec[];
  series: SeriesSpec[];
  out: string | null;
  title: string | null;
  threshold: number;
}

export class SpecError extends Error {}

const QUANTITIES: Quantity[] = ["height", "mean-velocity", "profile"];
const ROLES: Role[] = ["reference", "standard-model", "modified-model"];

function parsePanel(value: string, lineno: number): PanelSpec {
  const tokens = value.split(/\s+/).filter(Boolean);
  const quantity = tokens[0] as Quantity;
  if (!QUANTITIES.includes(quantity)) {
    throw new SpecError(`line ${lineno}: unknown panel quantity '${tokens[0]}'`);
  }
  let time: number | null = null;
  let sliceAxis: "x" | "y" | null = null;
  let sliceValue: number | null = null;
  for (let i = 1; i < tokens.length; i++) {
    const tok = tokens[i];
    if (tok === "at") continue;
    const m = tok.match(/^([a-z_]+)=(.+)$/);
    if (!m) throw new SpecError(`line ${lineno}: cannot parse panel token '${tok}'`);
    const val = Number(m[2]);
    if (Number.isNaN(val)) {
      throw new SpecError(`line ${lineno}: non-numeric value in '${tok}'`);
    }
    if (m[1] === "t") time = val;
    else if (m[1] === "x" || m[1] === "y") {
      sliceAxis = m[1];
      sliceValue = val;
    } else throw new SpecError(`line ${lineno}: unknown panel key '${m[1]}'`);
  }
  if (time === null) throw new SpecError(`line ${lineno}: panel needs t=<time>`);
  if (quantity === "profile" && sliceAxis !== "x") {
    throw new SpecError(`line ${lineno}: profile panels need a slice 'at x=<loc>'`);
  }
  return { quantity, time, sliceAxis, sliceValue };
}

function parseSeries(value: string, lineno: number): SeriesSpec {
  const labelSplit = value.split(/\slabel=/);
  const label = labelSplit.length > 1 ? labelSplit[1].trim() : "";
  const tokens = labelSplit[0].split(/\s+/).filter(Boolean);
  if (tokens.length === 0) throw new SpecError(`line ${lineno}: series needs a file`);
  const file = tokens[0];
  let role: Role | null = null;
  let color: string | null = null;
  let dash: string | null = null;
  for (const tok of tokens.slice(1)) {
    const m = tok.match(/^([a-z]+)=(.+)$/);
    if (!m) throw new SpecError(`line ${lineno}: cannot parse series token '${tok}'`);
    if (m[1] === "role") {
      if (!ROLES.includes(m[2] as Role)) {
        throw new SpecError(`line ${lineno}: unknown role '${m[2]}'`);
      }
      role = m[2] as Role;
    } else if (m[1] === "color") color = m[2];
    else if (m[1] === "dash") dash = m[2];
    else throw new SpecError(`line ${lineno}: unknown series key '${m[1]}'`);
  }
  if (role === null) throw new SpecError(`line ${lineno}: series needs role=<role>`);
  return { file, role, label: label || file, color, dash };
}

export function parseFigureSpec(text: string): FigureSpec {
  const panels: PanelSpec[] = [];
  const series: SeriesSpec[] = [];
  let out: string | null = null;
  let title: string | null = null;
  let threshold = 0.45;
  const lines = text.split(/\r?\n/);
  for (let i = 0; i < lines.length; i++) {
    const line = lines[i].trim();
    if (!line || line.startsWith("#")) continue;
    const eq = line.indexOf("=");
    if (eq < 0) throw new SpecError(`line ${i + 1}: expected key = value`);
    const key = line.slice(0, eq).trim();
    const value = line.slice(eq + 1).trim();
    if (key === "panel") panels.push(parsePanel(value, i + 1));
    else if (key === "series") series.push(parseSeries(value, i + 1));
    else if (key === "out") out = value;
    else if (key === "title") title = value;
    else if (key === "threshold") {
      threshold = Number(value);
      if (!(threshold > 0 && threshold < 1)) {
        throw new SpecError(`line ${i + 1}: threshold must be in (0, 1)`);
      }
    } else throw new SpecError(`line ${i + 1}: unknown key '${key}'`);
  }
  if (panels.length === 0) throw new SpecError("figure needs at least one panel");
  if (series.length === 0) throw new SpecError("figure needs at least one series");
  return { panels, series, out, title, threshold };
}

/** Panel-time substitution into a series path, matching snapshot names. */
export function resolveFile(file: string, time: number): string {
  return file.replace(/\{t\}/g, time.toFixed(6));
}
