// Parallel-coordinates chart: one polyline per visible row, vertical axis per
// numeric column scaled to the visible data, with per-axis range brushing
// that live-filters every linked view through the shared state.

import * as d3 from "d3";
import { Store, applySelection, visibleRows } from "../state";
import { CohortRow, numericCell } from "../types";

const HEIGHT = 280;
const MARGIN = { top: 24, right: 40, bottom: 12, left: 40 };
const AXIS_GAP = 72;

export class ParallelCoordinates {
  private svg: d3.Selection<SVGSVGElement, unknown, null, undefined>;

  constructor(parent: HTMLElement, private store: Store) {
    this.svg = d3.select(parent).append("svg").attr("class", "pc-chart");
    store.subscribe((_s, cause) => {
      if (cause !== "brush-live") this.render();
    });
    this.render();
  }

  render(): void {
    const state = this.store.state;
    this.svg.selectAll("*").remove();
    if (!state.sections.charts) {
      this.svg.attr("width", 0).attr("height", 0);
      return;
    }
    const axes = state.pcAxes.filter((a) => !state.hiddenColumns.has(a));
    const rows = visibleRows(state);
    const width = MARGIN.left + MARGIN.right + AXIS_GAP * Math.max(axes.length - 1, 1);
    this.svg.attr("width", width).attr("height", HEIGHT);

    const x = d3.scalePoint<string>().domain(axes)
      .range([MARGIN.left, width - MARGIN.right]);
    const scales = new Map<string, d3.ScaleLinear<number, number>>();
    for (const axis of axes) {
      const values = rows.map((row) => numericCell(row, axis))
        .filter((v): v is number => v !== null);
      const [lo, hi] = values.length ? [d3.min(values)!, d3.max(values)!] : [0, 1];
      scales.set(axis, d3.scaleLinear()
        .domain(lo === hi ? [lo - 1, hi + 1] : [lo, hi])
        .range([HEIGHT - MARGIN.bottom, MARGIN.top]));
    }

    const path = (row: CohortRow): string => {
      // NA values break the polyline into separate runs
      let d = "";
      let pen = false;
      for (const axis of axes) {
        const value = numericCell(row, axis);
        if (value === null) { pen = false; continue; }
        const px = x(axis)!;
        const py = scales.get(axis)!(value);
        d += (pen ? "L" : "M") + px + "," + py;
        pen = true;
      }
      return d;
    };

    this.svg.append("g").attr("class", "pc-lines")
      .selectAll("path")
      .data(rows, (row: any) => row.key)
      .join("path")
      .attr("class", (row) => "pc-line" + (state.selected.has(row.key) ? " highlighted" : ""))
      .attr("d", path)
      .attr("fill", "none")
      .on("click", (_event, row) => {
        this.store.update("select", (s) => applySelection(s, [row.key]));
      });

    const axisGroups = this.svg.append("g").selectAll("g")
      .data(axes)
      .join("g")
      .attr("class", "pc-axis")
      .attr("transform", (axis) => `translate(${x(axis)},0)`);
    axisGroups.each((axis, index, nodes) => {
      const scale = scales.get(axis)!;
      d3.select(nodes[index]).call(d3.axisLeft(scale).ticks(4) as any);
    });
    axisGroups.append("text")
      .attr("class", "pc-axis-label")
      .attr("y", MARGIN.top - 10)
      .attr("text-anchor", "middle")
      .text((axis) => axis);

    axisGroups.append("g").attr("class", "pc-brush").each((axis, index, nodes) => {
      const scale = scales.get(axis)!;
      const brush = d3.brushY()
        .extent([[-10, MARGIN.top], [10, HEIGHT - MARGIN.bottom]])
        .on("end", (event) => {
          this.store.update("brush", (s) => {
            if (event.selection) {
              const [top, bottom] = event.selection as [number, number];
              s.brushes[axis] = [scale.invert(bottom), scale.invert(top)];
            } else {
              delete s.brushes[axis];
            }
          });
        });
      d3.select(nodes[index]).call(brush as any);
    });
  }
}
