// results.tsv parsing and lossless re-export.
//
// Cells are kept as raw strings so a load -> export round trip is
// byte-exact for every retained row and column.

import { Cohort, CohortRow } from "./types";

export class TsvError extends Error {
  constructor(message: string, readonly line: number) {
    super(`line ${line}: ${message}`);
  }
}

export function rowKey(id: string, object: string | undefined): string {
  return object !== undefined && object !== "" ? `${id}#${object}` : id;
}

export function parseResults(text: string): Cohort {
  const lines = text.split("\n").filter((line) => line !== "");
  if (lines.length === 0) throw new TsvError("empty file", 1);
  const columns = lines[0].split("\t");
  if (!columns.includes("id")) throw new TsvError("missing 'id' column", 1);
  const seen = new Set<string>();

  const rows: CohortRow[] = [];
  for (let index = 1; index < lines.length; index++) {
    const cells = lines[index].split("\t");
    if (cells.length !== columns.length) {
      throw new TsvError(
        `expected ${columns.length} cells, got ${cells.length}`, index + 1);
    }
    const record: Record<string, string> = {};
    columns.forEach((name, col) => (record[name] = cells[col]));
    const key = rowKey(record["id"], record["object"]);
    if (seen.has(key)) throw new TsvError(`duplicate row key ${key}`, index + 1);
    seen.add(key);
    rows.push({ key, id: record["id"], cells: record });
  }
  return { columns, rows };
}

export function serializeResults(cohort: Cohort, options?: {
  dropRows?: Set<string>;
  dropColumns?: Set<string>;
}): string {
  const columns = cohort.columns.filter((c) => !options?.dropColumns?.has(c));
  const rows = cohort.rows.filter((r) => !options?.dropRows?.has(r.key));
  const lines = [columns.join("\t")];
  for (const row of rows) {
    lines.push(columns.map((c) => row.cells[c] ?? "NA").join("\t"));
  }
  return lines.join("\n") + "\n";
}

export function parseAnnotations(text: string): Record<string, string> {
  const annotations: Record<string, string> = {};
  text.split("\n").forEach((line, index) => {
    if (line === "" || (index === 0 && line === "id\tannotation")) return;
    const cut = line.indexOf("\t");
    if (cut < 0) throw new TsvError("expected 2 tab-separated columns", index + 1);
    annotations[line.slice(0, cut)] = line.slice(cut + 1);
  });
  return annotations;
}

export function serializeAnnotations(annotations: Record<string, string>): string {
  const lines = ["id\tannotation"];
  for (const key of Object.keys(annotations).sort()) {
    const text = annotations[key];
    if (text !== "") lines.push(`${key}\t${text.replace(/[\t\n]/g, " ")}`);
  }
  return lines.join("\n") + "\n";
}

export function parseSites(text: string): Record<string, string> {
  const sites: Record<string, string> = {};
  text.split("\n").forEach((line, index) => {
    if (line === "" || (index === 0 && line === "id\tsite")) return;
    const cells = line.split("\t");
    if (cells.length !== 2) throw new TsvError("expected 2 tab-separated columns", index + 1);
    sites[cells[0]] = cells[1];
  });
  return sites;
}
