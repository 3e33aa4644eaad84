// Embedding scatter plot (t-SNE or UMAP coordinates), colored by a
// categorical grouping such as the site join.

import * as d3 from "d3";
import { Store, applySelection, colorValue, visibleRows } from "../state";
import { numericCell } from "../types";

const SIZE = 260;
const MARGIN = 24;

export class ScatterPlot {
  private svg: d3.Selection<SVGSVGElement, unknown, null, undefined>;

  constructor(parent: HTMLElement, private store: Store,
              private which: "tsne" | "umap") {
    const panel = document.createElement("div");
    panel.className = `scatter-panel scatter-${which}`;
    const caption = document.createElement("div");
    caption.className = "scatter-caption";
    caption.textContent = which === "tsne" ? "t-SNE" : "UMAP";
    panel.appendChild(caption);
    parent.appendChild(panel);
    this.svg = d3.select(panel).append("svg").attr("class", "scatter-plot");
    store.subscribe(() => this.render());
    this.render();
  }

  render(): void {
    const state = this.store.state;
    this.svg.selectAll("*").remove();
    if (!state.sections.plots) {
      this.svg.attr("width", 0).attr("height", 0);
      return;
    }
    this.svg.attr("width", SIZE).attr("height", SIZE);
    const xColumn = `${this.which}_x`;
    const yColumn = `${this.which}_y`;
    const rows = visibleRows(state)
      .map((row) => ({
        row,
        x: numericCell(row, xColumn),
        y: numericCell(row, yColumn),
        group: colorValue(state, row),
      }))
      .filter((p): p is typeof p & { x: number; y: number } => p.x !== null && p.y !== null);
    if (rows.length === 0) return;

    const x = d3.scaleLinear()
      .domain(d3.extent(rows, (p) => p.x) as [number, number]).nice()
      .range([MARGIN, SIZE - MARGIN]);
    const y = d3.scaleLinear()
      .domain(d3.extent(rows, (p) => p.y) as [number, number]).nice()
      .range([SIZE - MARGIN, MARGIN]);
    const groups = Array.from(new Set(rows.map((p) => p.group))).sort();
    const color = d3.scaleOrdinal<string, string>()
      .domain(groups)
      .range(d3.schemeTableau10 as readonly string[]);

    this.svg.append("g").selectAll("circle")
      .data(rows, (p: any) => p.row.key)
      .join("circle")
      .attr("class", (p) =>
        "scatter-point" + (state.selected.has(p.row.key) ? " highlighted" : ""))
      .attr("cx", (p) => x(p.x))
      .attr("cy", (p) => y(p.y))
      .attr("r", (p) => (state.selected.has(p.row.key) ? 6 : 3.5))
      .attr("fill", (p) => (p.group === "" ? "#5b8db8" : color(p.group)))
      .attr("data-group", (p) => p.group)
      .on("click", (_event, p) => {
        this.store.update("select", (s) => applySelection(s, [p.row.key]));
      })
      .append("title")
      .text((p) => p.row.key + (p.group ? ` (${p.group})` : ""));
  }
}
