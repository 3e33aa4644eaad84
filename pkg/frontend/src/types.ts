// Shared data model for the cohort explorer.

export const METADATA_COLUMNS = [
  "MFR", "MFS", "VRX", "VRY", "VRZ", "ROWS", "COLS", "TR", "TE", "NUM",
];

export const MEASURE_COLUMNS = [
  "MEAN", "RNG", "VAR", "CV", "CPP", "PSNR", "SNR1", "SNR2", "SNR3", "SNR4",
  "CNR", "CVP", "CJV", "EFC", "FBER",
];

export const COORD_COLUMNS = ["tsne_x", "tsne_y", "umap_x", "umap_y"];

export const NA = "NA";

export interface CohortRow {
  key: string;                 // unique per row: id, or "id#object"
  id: string;
  cells: Record<string, string>;  // raw cell text by column name, NA included
}

export interface Cohort {
  columns: string[];           // column order exactly as in the file
  rows: CohortRow[];
}

export interface SortSpec {
  column: string;
  direction: 1 | -1;
}

export interface UiState {
  cohort: Cohort;
  thumbnailRoot: string;
  selected: Set<string>;            // row keys
  hiddenColumns: Set<string>;
  removedRows: Set<string>;         // row keys
  annotations: Record<string, string>;  // row key -> free text
  barVariable: string;
  pcAxes: string[];                 // axis order (numeric columns)
  brushes: Record<string, [number, number]>;  // axis -> kept value range
  colorColumn: string | null;       // categorical column used for point colors
  sites: Record<string, string>;    // dataset id -> site label (optional join)
  metadataSort: SortSpec | null;
  measureSort: SortSpec | null;
  sections: { tables: boolean; charts: boolean; plots: boolean };
}

export function isNa(cell: string | undefined): boolean {
  return cell === undefined || cell === NA || cell === "";
}

export function numericCell(row: CohortRow, column: string): number | null {
  const cell = row.cells[column];
  if (isNa(cell)) return null;
  const value = Number(cell);
  return Number.isFinite(value) ? value : null;
}
