// Sortable data tables (one for metadata, one for measurements) with row
// selection, row removal, column hiding, and per-row annotations.

import { Store, applySelection, sortRows, tableColumns, toggleSort, visibleRows } from "../state";
import { UiState, isNa } from "../types";

export class DataTable {
  private root: HTMLElement;

  constructor(parent: HTMLElement, private store: Store,
              private which: "metadata" | "measures",
              private notify: (message: string) => void = () => undefined) {
    this.root = document.createElement("div");
    this.root.className = `table-panel table-${which}`;
    parent.appendChild(this.root);
    store.subscribe(() => this.render());
    this.render();
  }

  private sortSpec(state: UiState) {
    return this.which === "metadata" ? state.metadataSort : state.measureSort;
  }

  render(): void {
    const state = this.store.state;
    this.root.innerHTML = "";
    if (!state.sections.tables) return;

    const table = document.createElement("table");
    const head = table.createTHead().insertRow();
    const columns = tableColumns(state, this.which);

    for (const column of columns) {
      const cell = document.createElement("th");
      const sort = this.sortSpec(state);
      const arrow = sort && sort.column === column ? (sort.direction === 1 ? " ↑" : " ↓") : "";
      const label = document.createElement("span");
      label.textContent = column + arrow;
      label.className = "sort-toggle";
      label.addEventListener("click", () => {
        this.store.update("sort", (s) => {
          if (this.which === "metadata") s.metadataSort = toggleSort(s.metadataSort, column);
          else s.measureSort = toggleSort(s.measureSort, column);
        });
      });
      cell.appendChild(label);
      if (column !== "id") {
        const hide = document.createElement("button");
        hide.textContent = "×";
        hide.className = "hide-column";
        hide.title = `hide column ${column}`;
        hide.addEventListener("click", (event) => {
          event.stopPropagation();
          this.store.update("hide-column", (s) => s.hiddenColumns.add(column));
        });
        cell.appendChild(hide);
      }
      head.appendChild(cell);
    }
    const annotationHead = document.createElement("th");
    annotationHead.textContent = this.which === "metadata" ? "annotation" : "";
    head.appendChild(annotationHead);

    const body = table.createTBody();
    const rows = sortRows(visibleRows(state), this.sortSpec(state));
    for (const row of rows) {
      const tr = body.insertRow();
      tr.dataset.key = row.key;
      tr.className = "data-row" + (state.selected.has(row.key) ? " highlighted" : "");
      tr.addEventListener("click", () => {
        this.store.update("select", (s) => {
          const notice = applySelection(s, [row.key]);
          if (notice) this.notify(notice);
        });
      });
      for (const column of columns) {
        const td = tr.insertCell();
        const cell = column === "id" ? row.id : row.cells[column] ?? "NA";
        td.textContent = cell;
        if (isNa(cell)) td.className = "na";
      }
      const extra = tr.insertCell();
      if (this.which === "metadata") {
        const annotation = document.createElement("input");
        annotation.type = "text";
        annotation.value = state.annotations[row.key] ?? "";
        annotation.placeholder = "annotate";
        annotation.addEventListener("click", (event) => event.stopPropagation());
        annotation.addEventListener("change", () => {
          this.store.update("annotate", (s) => {
            if (annotation.value) s.annotations[row.key] = annotation.value;
            else delete s.annotations[row.key];
          });
        });
        extra.appendChild(annotation);
        const remove = document.createElement("button");
        remove.textContent = "remove";
        remove.className = "remove-row";
        remove.addEventListener("click", (event) => {
          event.stopPropagation();
          this.store.update("remove-row", (s) => {
            s.removedRows.add(row.key);
            s.selected.delete(row.key);
          });
        });
        extra.appendChild(remove);
      }
    }
    this.root.appendChild(table);
  }
}
