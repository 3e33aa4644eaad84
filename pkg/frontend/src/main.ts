// Application wiring: load a results.tsv (fetch or file dialog), build the
// shared store, mount all linked views, and handle curated export.

import { Store, exportCurated, initialState } from "./state";
import { parseAnnotations, parseResults, parseSites, TsvError } from "./tsv";
import { Cohort } from "./types";
import { BarChart } from "./views/barchart";
import { ParallelCoordinates } from "./views/pcchart";
import { ScatterPlot } from "./views/scatter";
import { DataTable } from "./views/tables";
import { ThumbnailStrip } from "./views/thumbnails";

type FileMap = Map<string, string>;  // relative path suffix -> object URL

function notice(message: string, error = false): void {
  const banner = document.getElementById("status")!;
  banner.textContent = message;
  banner.className = error ? "status error" : "status";
}

function mount(cohort: Cohort, thumbnailRoot: string, files: FileMap | null): Store {
  const store = new Store(initialState(cohort, thumbnailRoot));
  const app = document.getElementById("app")!;
  app.innerHTML = "";

  const tables = document.createElement("section");
  tables.id = "tables";
  const charts = document.createElement("section");
  charts.id = "charts";
  const plots = document.createElement("section");
  plots.id = "plots";
  app.append(tables, charts, plots);

  const resolve = (path: string): string => {
    if (!files) return path;
    const suffix = path.replace(/^\.\//, "");
    for (const [candidate, url] of files) {
      if (candidate.endsWith(suffix)) return url;
    }
    return path;
  };

  new DataTable(tables, store, "metadata", (message) => notice(message));
  new DataTable(tables, store, "measures", (message) => notice(message));
  new ParallelCoordinates(charts, store);
  new BarChart(charts, store);
  new ScatterPlot(plots, store, "tsne");
  new ScatterPlot(plots, store, "umap");
  new ThumbnailStrip(plots, store, resolve);

  wireToolbar(store);
  notice(`loaded ${cohort.rows.length} rows, ${cohort.columns.length} columns`);
  return store;
}

function wireToolbar(store: Store): void {
  for (const section of ["tables", "charts", "plots"] as const) {
    const box = document.getElementById(`toggle-${section}`) as HTMLInputElement;
    box.checked = true;
    box.onchange = () => {
      store.update("toggle-section", (s) => (s.sections[section] = box.checked));
      document.getElementById(section)!.style.display = box.checked ? "" : "none";
    };
  }
  (document.getElementById("clear-selection") as HTMLButtonElement).onclick = () =>
    store.update("select", (s) => s.selected.clear());
  (document.getElementById("restore-columns") as HTMLButtonElement).onclick = () =>
    store.update("restore-columns", (s) => s.hiddenColumns.clear());
  (document.getElementById("restore-rows") as HTMLButtonElement).onclick = () =>
    store.update("restore-rows", (s) => s.removedRows.clear());

  const sitesInput = document.getElementById("load-sites") as HTMLInputElement;
  sitesInput.onchange = async () => {
    const file = sitesInput.files?.[0];
    if (!file) return;
    const text = await file.text();
    store.update("sites", (s) => {
      s.sites = parseSites(text);
      s.colorColumn = "site";
    });
  };
  const annotationsInput = document.getElementById("load-annotations") as HTMLInputElement;
  annotationsInput.onchange = async () => {
    const file = annotationsInput.files?.[0];
    if (!file) return;
    const text = await file.text();
    store.update("annotations", (s) => (s.annotations = parseAnnotations(text)));
  };

  (document.getElementById("export") as HTMLButtonElement).onclick = () => {
    const curated = exportCurated(store.state);
    download("results.tsv", curated.results);
    download("annotations.tsv", curated.annotations);
    notice("exported curated results.tsv + annotations.tsv");
  };
}

function download(name: string, text: string): void {
  const blob = new Blob([text], { type: "text/tab-separated-values" });
  const anchor = document.createElement("a");
  anchor.href = URL.createObjectURL(blob);
  anchor.download = name;
  anchor.click();
  URL.revokeObjectURL(anchor.href);
}

function loadText(text: string, thumbnailRoot: string, files: FileMap | null): void {
  try {
    const cohort = parseResults(text);
    mount(cohort, thumbnailRoot, files);
  } catch (error) {
    if (error instanceof TsvError) notice(`malformed results file: ${error.message}`, true);
    else notice(String(error), true);
  }
}

async function boot(): Promise<void> {
  const params = new URLSearchParams(window.location.search);
  const source = params.get("data") ?? "results.tsv";
  try {
    const response = await fetch(source);
    if (response.ok) {
      const root = source.includes("/") ? source.slice(0, source.lastIndexOf("/")) : ".";
      loadText(await response.text(), root, null);
      return;
    }
  } catch {
    // not served or file missing: fall through to the dialog path
  }
  notice("open a results.tsv (and optionally its output folder for thumbnails)");

  const resultsInput = document.getElementById("load-results") as HTMLInputElement;
  const folderInput = document.getElementById("load-folder") as HTMLInputElement;
  let files: FileMap | null = null;
  folderInput.onchange = () => {
    files = new Map();
    for (const file of Array.from(folderInput.files ?? [])) {
      const relative = (file as File & { webkitRelativePath?: string }).webkitRelativePath ?? file.name;
      files.set(relative, URL.createObjectURL(file));
      if (relative.endsWith("results.tsv")) {
        void file.text().then((text) => loadText(text, ".", files));
      }
    }
  };
  resultsInput.onchange = () => {
    const file = resultsInput.files?.[0];
    if (file) void file.text().then((text) => loadText(text, ".", files));
  };
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  void boot();
}

export { mount, loadText };
