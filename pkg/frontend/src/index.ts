export { parseTable, loadTable, column, CsvError, missingColumn } from "./csv";
export { parseFigureSpec, resolveFile, SpecError } from "./figspec";
export type { FigureSpec, PanelSpec, SeriesSpec, Role, Quantity } from "./figspec";
export {
  legendrePhi,
  snapshotField,
  snapshotProfile,
  vofHeight,
  vofMeanVelocity,
  vofProfile,
  sliceCurve,
} from "./reduce";
export { render } from "./render";
export { renderSvg } from "./svg";
