// Single source of truth: every view renders from UiState and every
// interaction goes through Store.update, which re-renders all subscribers.

import {
  Cohort,
  CohortRow,
  COORD_COLUMNS,
  MEASURE_COLUMNS,
  METADATA_COLUMNS,
  SortSpec,
  UiState,
  isNa,
  numericCell,
} from "./types";
import { serializeAnnotations, serializeResults } from "./tsv";

export function initialState(cohort: Cohort, thumbnailRoot = "."): UiState {
  return {
    cohort,
    thumbnailRoot,
    selected: new Set(),
    hiddenColumns: new Set(),
    removedRows: new Set(),
    annotations: {},
    barVariable: "CJV",
    pcAxes: numericColumns(cohort),
    brushes: {},
    colorColumn: null,
    sites: {},
    metadataSort: null,
    measureSort: null,
    sections: { tables: true, charts: true, plots: true },
  };
}

export function numericColumns(cohort: Cohort): string[] {
  const candidates = [...METADATA_COLUMNS, ...MEASURE_COLUMNS];
  return candidates.filter((column) =>
    cohort.columns.includes(column) &&
    cohort.rows.some((row) => numericCell(row, column) !== null));
}

export type Listener = (state: UiState, cause: string) => void;

export class Store {
  private listeners: Listener[] = [];

  constructor(public state: UiState) {}

  subscribe(listener: Listener): void {
    this.listeners.push(listener);
  }

  update(cause: string, mutate: (state: UiState) => void): void {
    mutate(this.state);
    for (const listener of this.listeners) listener(this.state, cause);
  }
}

// ---------------------------------------------------------------------------
// derived views of the state
// ---------------------------------------------------------------------------

/** Rows that survive removal and every active axis brush. */
export function visibleRows(state: UiState): CohortRow[] {
  return state.cohort.rows.filter((row) => {
    if (state.removedRows.has(row.key)) return false;
    for (const [axis, [lo, hi]] of Object.entries(state.brushes)) {
      const value = numericCell(row, axis);
      if (value === null || value < lo || value > hi) return false;
    }
    return true;
  });
}

/** Stable sort; NA cells always sort last regardless of direction. */
export function sortRows(rows: CohortRow[], sort: SortSpec | null): CohortRow[] {
  if (!sort) return rows.slice();
  const { column, direction } = sort;
  return rows
    .map((row, index) => ({ row, index }))
    .sort((a, b) => {
      const cellA = a.row.cells[column];
      const cellB = b.row.cells[column];
      const naA = isNa(cellA);
      const naB = isNa(cellB);
      if (naA && naB) return a.index - b.index;
      if (naA) return 1;
      if (naB) return -1;
      const numA = Number(cellA);
      const numB = Number(cellB);
      let cmp: number;
      if (Number.isFinite(numA) && Number.isFinite(numB)) {
        cmp = numA < numB ? -1 : numA > numB ? 1 : 0;
      } else {
        cmp = cellA < cellB ? -1 : cellA > cellB ? 1 : 0;
      }
      return cmp !== 0 ? cmp * direction : a.index - b.index;
    })
    .map((entry) => entry.row);
}

export function toggleSort(current: SortSpec | null, column: string): SortSpec {
  if (current && current.column === column) {
    return { column, direction: current.direction === 1 ? -1 : 1 };
  }
  return { column, direction: 1 };
}

export function tableColumns(state: UiState, which: "metadata" | "measures"): string[] {
  const known = new Set([
    "id", "status", "object", ...METADATA_COLUMNS, ...MEASURE_COLUMNS,
    ...COORD_COLUMNS, "imputed",
  ]);
  const extras = state.cohort.columns.filter((c) => !known.has(c));
  const base = which === "metadata"
    ? ["id", "status", ...METADATA_COLUMNS, ...extras]
    : ["id", ...MEASURE_COLUMNS];
  if (state.cohort.columns.includes("object")) base.splice(1, 0, "object");
  return base.filter((c) => state.cohort.columns.includes(c) || c === "id")
    .filter((c) => !state.hiddenColumns.has(c));
}

/** Categorical value used to color scatter points for one row. */
export function colorValue(state: UiState, row: CohortRow): string {
  if (state.colorColumn === "site" || state.colorColumn === null) {
    const site = state.sites[row.id];
    if (site !== undefined) return site;
    if (state.colorColumn === null) return "";
  }
  if (state.colorColumn && state.colorColumn !== "site") {
    const cell = row.cells[state.colorColumn];
    return isNa(cell) ? "" : cell;
  }
  return "";
}

/** Select rows; removed rows are refused with a notice string returned. */
export function applySelection(state: UiState, keys: string[]): string | null {
  const refused = keys.filter((key) => state.removedRows.has(key));
  const accepted = keys.filter((key) => !state.removedRows.has(key));
  state.selected = new Set(accepted);
  if (refused.length > 0) {
    return `ignored removed row(s): ${refused.join(", ")}`;
  }
  return null;
}

export function exportCurated(state: UiState): { results: string; annotations: string } {
  return {
    results: serializeResults(state.cohort, {
      dropRows: state.removedRows,
      dropColumns: state.hiddenColumns,
    }),
    annotations: serializeAnnotations(
      Object.fromEntries(Object.entries(state.annotations)
        .filter(([key]) => !state.removedRows.has(key)))),
  };
}

export function thumbnailPaths(state: UiState, row: CohortRow): string[] {
  const count = Number(row.cells["NUM"]);
  if (!Number.isFinite(count) || count < 1) return [];
  const pad = Math.max(3, String(count - 1).length);
  const paths: string[] = [];
  for (let z = 0; z < count; z++) {
    const index = String(z).padStart(pad, "0");
    paths.push(`${state.thumbnailRoot}/${row.id}/${row.id}_${index}.png`);
  }
  return paths;
}
