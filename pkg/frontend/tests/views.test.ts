// @vitest-environment jsdom

import { beforeEach, describe, expect, it } from "vitest";

import { Store, applySelection, initialState, visibleRows } from "../src/state";
import { parseResults, parseSites } from "../src/tsv";
import { BarChart } from "../src/views/barchart";
import { ParallelCoordinates } from "../src/views/pcchart";
import { ScatterPlot } from "../src/views/scatter";
import { DataTable } from "../src/views/tables";
import { ThumbnailStrip } from "../src/views/thumbnails";
import { makeResults } from "./fixtures";

function mountAll(options = {}): { store: Store; root: HTMLElement; sites: string } {
  const { text, sites } = makeResults(options);
  const store = new Store(initialState(parseResults(text)));
  const root = document.createElement("div");
  document.body.innerHTML = "";
  document.body.appendChild(root);
  new DataTable(root, store, "metadata");
  new DataTable(root, store, "measures");
  new ParallelCoordinates(root, store);
  new BarChart(root, store);
  new ScatterPlot(root, store, "tsne");
  new ScatterPlot(root, store, "umap");
  new ThumbnailStrip(root, store);
  return { store, root, sites };
}

beforeEach(() => {
  document.body.innerHTML = "";
});

describe("linked selection", () => {
  it("highlights exactly one polyline, one bar, one point per plot, and shows thumbnails", () => {
    const { store, root } = mountAll({ rows: 8 });
    store.update("select", (s) => applySelection(s, ["scan003"]));

    expect(root.querySelectorAll(".pc-line.highlighted")).toHaveLength(1);
    expect(root.querySelectorAll(".bar.highlighted")).toHaveLength(1);
    expect(root.querySelectorAll(".scatter-tsne .scatter-point.highlighted")).toHaveLength(1);
    expect(root.querySelectorAll(".scatter-umap .scatter-point.highlighted")).toHaveLength(1);
    expect(root.querySelectorAll("tr.highlighted").length).toBe(2); // one per table

    const thumbs = root.querySelectorAll(".thumbnail-strip img.thumbnail");
    expect(thumbs).toHaveLength(4); // NUM = 4 slices
    expect((thumbs[0] as HTMLImageElement).src).toContain("scan003/scan003_000.png");
  });

  it("clearing the selection removes all highlights", () => {
    const { store, root } = mountAll({ rows: 8 });
    store.update("select", (s) => applySelection(s, ["scan002"]));
    store.update("select", (s) => s.selected.clear());
    expect(root.querySelectorAll(".highlighted")).toHaveLength(0);
    expect(root.querySelectorAll(".thumbnail-strip img")).toHaveLength(0);
  });

  it("clicking a table row drives every other view", () => {
    const { root } = mountAll({ rows: 6 });
    const row = root.querySelector("tr[data-key='scan005']") as HTMLTableRowElement;
    row.click();
    expect(root.querySelectorAll(".pc-line.highlighted")).toHaveLength(1);
    expect(root.querySelectorAll(".scatter-point.highlighted")).toHaveLength(2);
  });
});

describe("tables", () => {
  it("renders NA cells last after sorting by a column with missing values", () => {
    const { store, root } = mountAll({ rows: 9, naEvery: 3 });
    store.update("sort", (s) => (s.measureSort = { column: "CJV", direction: -1 }));
    const table = root.querySelector(".table-measures table") as HTMLTableElement;
    const header = Array.from(table.tHead!.rows[0].cells).map((c) => c.textContent ?? "");
    const cjvIndex = header.findIndex((text) => text.startsWith("CJV"));
    const cells = Array.from(table.tBodies[0].rows)
      .map((tr) => tr.cells[cjvIndex].textContent);
    expect(cells.slice(-3)).toEqual(["NA", "NA", "NA"]);
  });

  it("removing a row drops it from all views and export stays consistent", () => {
    const { store, root } = mountAll({ rows: 5 });
    const before = root.querySelectorAll(".pc-line").length;
    const remove = root.querySelector("tr[data-key='scan001'] button.remove-row") as HTMLButtonElement;
    remove.click();
    expect(visibleRows(store.state)).toHaveLength(4);
    expect(root.querySelectorAll(".pc-line")).toHaveLength(before - 1);
    expect(root.querySelectorAll(".bar")).toHaveLength(4);
    expect(root.querySelectorAll("tr[data-key='scan001']")).toHaveLength(0);
  });

  it("hiding a column removes it from the table and restores later", () => {
    const { store, root } = mountAll({ rows: 4 });
    store.update("hide-column", (s) => s.hiddenColumns.add("TE"));
    const header = Array.from(root.querySelectorAll(".table-metadata th"))
      .map((th) => th.textContent ?? "");
    expect(header.some((text) => text.startsWith("TE"))).toBe(false);
    store.update("restore-columns", (s) => s.hiddenColumns.clear());
    const restored = Array.from(root.querySelectorAll(".table-metadata th"))
      .map((th) => th.textContent ?? "");
    expect(restored.some((text) => text.startsWith("TE"))).toBe(true);
  });

  it("annotations persist in state from the input field", () => {
    const { store, root } = mountAll({ rows: 3 });
    const input = root.querySelector("tr[data-key='scan002'] input") as HTMLInputElement;
    input.value = "ringing artifact";
    input.dispatchEvent(new Event("change"));
    expect(store.state.annotations["scan002"]).toBe("ringing artifact");
  });
});

describe("brush filtering", () => {
  it("filters polylines, bars, and scatter points consistently", () => {
    const { store, root } = mountAll({ rows: 12 });
    const values = store.state.cohort.rows.map((r) => Number(r.cells["CJV"]));
    const cut = [...values].sort((a, b) => a - b)[Math.floor(values.length * 0.9)];
    store.update("brush", (s) => (s.brushes["CJV"] = [cut, Infinity]));

    const visible = visibleRows(store.state).length;
    expect(visible).toBeLessThanOrEqual(2);
    expect(root.querySelectorAll(".pc-line")).toHaveLength(visible);
    expect(root.querySelectorAll(".bar")).toHaveLength(visible);
    expect(root.querySelectorAll(".scatter-tsne .scatter-point")).toHaveLength(visible);
    expect(root.querySelectorAll(".scatter-umap .scatter-point")).toHaveLength(visible);
    expect(root.querySelectorAll("tr.data-row")).toHaveLength(2 * visible);
  });
});

describe("two-site scatter", () => {
  it("renders color-separable, spatially separated clusters", () => {
    const { store, root, sites } = mountAll({ rows: 20, twoSites: true });
    store.update("sites", (s) => {
      s.sites = parseSites(sites);
      s.colorColumn = "site";
    });

    const points = Array.from(root.querySelectorAll(".scatter-tsne .scatter-point"));
    expect(points).toHaveLength(20);
    const byGroup = new Map<string, { x: number; y: number }[]>();
    const fills = new Map<string, Set<string>>();
    for (const point of points) {
      const group = point.getAttribute("data-group")!;
      const x = Number(point.getAttribute("cx"));
      const y = Number(point.getAttribute("cy"));
      byGroup.set(group, [...(byGroup.get(group) ?? []), { x, y }]);
      fills.set(group, (fills.get(group) ?? new Set()).add(point.getAttribute("fill")!));
    }
    expect([...byGroup.keys()].sort()).toEqual(["alpha", "beta"]);
    // one color per site, and the two sites use different colors
    expect(fills.get("alpha")!.size).toBe(1);
    expect(fills.get("beta")!.size).toBe(1);
    expect([...fills.get("alpha")!][0]).not.toBe([...fills.get("beta")!][0]);

    const centroid = (pts: { x: number; y: number }[]) => ({
      x: pts.reduce((sum, p) => sum + p.x, 0) / pts.length,
      y: pts.reduce((sum, p) => sum + p.y, 0) / pts.length,
    });
    const spread = (pts: { x: number; y: number }[], c: { x: number; y: number }) =>
      Math.sqrt(pts.reduce((s, p) => s + (p.x - c.x) ** 2 + (p.y - c.y) ** 2, 0) / pts.length);
    const alpha = byGroup.get("alpha")!;
    const beta = byGroup.get("beta")!;
    const ca = centroid(alpha);
    const cb = centroid(beta);
    const gap = Math.hypot(ca.x - cb.x, ca.y - cb.y);
    expect(gap).toBeGreaterThan(3 * Math.max(spread(alpha, ca), spread(beta, cb)));
  });
});

describe("section toggles", () => {
  it("disabling charts empties the chart svgs and re-enabling restores them", () => {
    const { store, root } = mountAll({ rows: 6 });
    store.update("toggle-section", (s) => (s.sections.charts = false));
    expect(root.querySelectorAll(".pc-line")).toHaveLength(0);
    expect(root.querySelectorAll(".bar")).toHaveLength(0);
    store.update("toggle-section", (s) => (s.sections.charts = true));
    expect(root.querySelectorAll(".pc-line")).toHaveLength(6);
  });
});
