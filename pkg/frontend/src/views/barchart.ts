// Bar chart: one bar per visible row for the active variable, linear scale.

import * as d3 from "d3";
import { Store, applySelection, numericColumns, visibleRows } from "../state";
import { numericCell } from "../types";

const HEIGHT = 200;
const MARGIN = { top: 12, right: 12, bottom: 28, left: 48 };
const BAR_GAP = 1;

export class BarChart {
  private root: HTMLElement;
  private svg: d3.Selection<SVGSVGElement, unknown, null, undefined>;
  private picker: HTMLSelectElement;

  constructor(parent: HTMLElement, private store: Store) {
    this.root = document.createElement("div");
    this.root.className = "bar-panel";
    parent.appendChild(this.root);
    this.picker = document.createElement("select");
    this.picker.className = "bar-variable";
    this.picker.addEventListener("change", () => {
      this.store.update("bar-variable", (s) => (s.barVariable = this.picker.value));
    });
    this.root.appendChild(this.picker);
    this.svg = d3.select(this.root).append("svg").attr("class", "bar-chart");
    store.subscribe(() => this.render());
    this.render();
  }

  render(): void {
    const state = this.store.state;
    this.svg.selectAll("*").remove();
    this.picker.innerHTML = "";
    if (!state.sections.charts) {
      this.svg.attr("width", 0).attr("height", 0);
      return;
    }
    for (const column of numericColumns(state.cohort)) {
      const option = document.createElement("option");
      option.value = column;
      option.textContent = column;
      option.selected = column === state.barVariable;
      this.picker.appendChild(option);
    }

    const rows = visibleRows(state)
      .map((row) => ({ row, value: numericCell(row, state.barVariable) }))
      .filter((entry): entry is { row: (typeof entry)["row"]; value: number } =>
        entry.value !== null);
    const width = MARGIN.left + MARGIN.right + Math.max(rows.length * 8, 80);
    this.svg.attr("width", width).attr("height", HEIGHT);

    const x = d3.scaleBand<string>()
      .domain(rows.map((entry) => entry.row.key))
      .range([MARGIN.left, width - MARGIN.right])
      .paddingInner(BAR_GAP / 8);
    const [lo, hi] = d3.extent(rows, (entry) => entry.value) as [number, number];
    const y = d3.scaleLinear()
      .domain([Math.min(0, lo ?? 0), hi ?? 1])
      .range([HEIGHT - MARGIN.bottom, MARGIN.top]);

    this.svg.append("g")
      .attr("transform", `translate(${MARGIN.left},0)`)
      .attr("class", "bar-axis")
      .call(d3.axisLeft(y).ticks(4) as any);

    this.svg.append("g").selectAll("rect")
      .data(rows, (entry: any) => entry.row.key)
      .join("rect")
      .attr("class", (entry) =>
        "bar" + (state.selected.has(entry.row.key) ? " highlighted" : ""))
      .attr("x", (entry) => x(entry.row.key)!)
      .attr("width", x.bandwidth())
      .attr("y", (entry) => Math.min(y(entry.value), y(0)))
      .attr("height", (entry) => Math.abs(y(entry.value) - y(0)))
      .on("click", (_event, entry) => {
        this.store.update("select", (s) => applySelection(s, [entry.row.key]));
      })
      .append("title")
      .text((entry) => `${entry.row.key}: ${entry.value}`);
  }
}
