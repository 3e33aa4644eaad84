import { describe, expect, it } from "vitest";

import {
  TsvError,
  parseAnnotations,
  parseResults,
  parseSites,
  serializeAnnotations,
  serializeResults,
} from "../src/tsv";
import { makeResults } from "./fixtures";

describe("parseResults", () => {
  it("round-trips losslessly", () => {
    const { text } = makeResults({ rows: 12, naEvery: 3 });
    const cohort = parseResults(text);
    expect(serializeResults(cohort)).toBe(text);
  });

  it("keeps NA cells verbatim", () => {
    const { text } = makeResults({ rows: 4, naEvery: 2 });
    const cohort = parseResults(text);
    expect(cohort.rows[0].cells["TE"]).toBe("NA");
    expect(cohort.rows[1].cells["TE"]).not.toBe("NA");
  });

  it("names the offending line on malformed input", () => {
    const { text } = makeResults({ rows: 3 });
    const lines = text.trimEnd().split("\n");
    lines[2] = lines[2] + "\textra-cell";
    expect(() => parseResults(lines.join("\n")))
      .toThrowError(/line 3/);
  });

  it("rejects files without an id column", () => {
    expect(() => parseResults("a\tb\n1\t2\n")).toThrowError(TsvError);
  });

  it("rejects duplicate row keys", () => {
    const { text } = makeResults({ rows: 2 });
    const lines = text.trimEnd().split("\n");
    lines.push(lines[1]);
    expect(() => parseResults(lines.join("\n") + "\n")).toThrowError(/duplicate/);
  });

  it("drops removed rows and hidden columns on export", () => {
    const { text } = makeResults({ rows: 5 });
    const cohort = parseResults(text);
    const curated = serializeResults(cohort, {
      dropRows: new Set(["scan001"]),
      dropColumns: new Set(["TE"]),
    });
    const again = parseResults(curated);
    expect(again.rows.map((r) => r.id)).toEqual(
      ["scan000", "scan002", "scan003", "scan004"]);
    expect(again.columns).not.toContain("TE");
    // retained cells survive byte-exact
    expect(again.rows[0].cells["MEAN"]).toBe(cohort.rows[0].cells["MEAN"]);
  });
});

describe("sidecar files", () => {
  it("annotations round-trip", () => {
    const annotations = { scan1: "motion artifact", scan2: "check shading" };
    const text = serializeAnnotations(annotations);
    expect(parseAnnotations(text)).toEqual(annotations);
  });

  it("annotation text is flattened to one line", () => {
    const text = serializeAnnotations({ a: "two\nlines\tand tab" });
    expect(parseAnnotations(text)).toEqual({ a: "two lines and tab" });
  });

  it("sites join parses", () => {
    const { sites } = makeResults({ rows: 4 });
    const parsed = parseSites(sites);
    expect(parsed["scan000"]).toBe("alpha");
    expect(parsed["scan001"]).toBe("beta");
  });
});
