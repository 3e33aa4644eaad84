// Synthetic results.tsv builders matching the backend output contract.

export const COLUMNS = [
  "id", "status", "MFR", "MFS", "VRX", "VRY", "VRZ", "ROWS", "COLS", "TR",
  "TE", "NUM", "MEAN", "RNG", "VAR", "CV", "CPP", "PSNR", "SNR1", "SNR2",
  "SNR3", "SNR4", "CNR", "CVP", "CJV", "EFC", "FBER",
  "tsne_x", "tsne_y", "umap_x", "umap_y", "imputed",
];

function mulberry(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a = (a + 0x6d2b79f5) >>> 0;
    let t = Math.imul(a ^ (a >>> 15), 1 | a);
    t = (t + Math.imul(t ^ (t >>> 7), 61 | t)) ^ t;
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

export interface FixtureOptions {
  rows?: number;
  naEvery?: number;         // every k-th row gets NA TE and NA CJV
  twoSites?: boolean;       // split tsne/umap coordinates into two clusters
}

export function makeResults(options: FixtureOptions = {}): {
  text: string;
  sites: string;
} {
  const count = options.rows ?? 10;
  const rand = mulberry(42);
  const lines = [COLUMNS.join("\t")];
  const siteLines: string[] = [];
  for (let i = 0; i < count; i++) {
    const id = `scan${String(i).padStart(3, "0")}`;
    const site = i % 2 === 0 ? "alpha" : "beta";
    siteLines.push(`${id}\t${site}`);
    const na = options.naEvery !== undefined && i % options.naEvery === 0;
    const cluster = options.twoSites ? (site === "alpha" ? -20 : 20) : 0;
    const cells: Record<string, string> = {
      id,
      status: "ok",
      MFR: "TestScanner",
      MFS: "3",
      VRX: "0.5",
      VRY: "0.5",
      VRZ: "3",
      ROWS: "128",
      COLS: "128",
      TR: (400 + i).toFixed(1),
      TE: na ? "NA" : (10 + (i % 7)).toFixed(1),
      NUM: "4",
      MEAN: (90 + 10 * rand()).toFixed(4),
      RNG: (100 + 20 * rand()).toFixed(4),
      VAR: (50 + 30 * rand()).toFixed(4),
      CV: (0.1 + 0.2 * rand()).toFixed(6),
      CPP: (1 + rand()).toFixed(5),
      PSNR: (20 + 10 * rand()).toFixed(4),
      SNR1: (1 + rand()).toFixed(5),
      SNR2: (20 + 5 * rand()).toFixed(4),
      SNR3: (20 + 5 * rand()).toFixed(4),
      SNR4: (20 + 5 * rand()).toFixed(4),
      CNR: (25 + 5 * rand()).toFixed(4),
      CVP: (0.04 + 0.02 * rand()).toFixed(6),
      CJV: na ? "NA" : (0.1 + 0.5 * rand()).toFixed(6),
      EFC: (40 + 10 * rand()).toFixed(4),
      FBER: (800 + 400 * rand()).toFixed(2),
      tsne_x: (cluster + 2 * rand() - 1).toFixed(4),
      tsne_y: (2 * rand() - 1).toFixed(4),
      umap_x: (cluster / 2 + rand() - 0.5).toFixed(4),
      umap_y: (rand() - 0.5).toFixed(4),
      imputed: na ? "1" : "0",
    };
    lines.push(COLUMNS.map((c) => cells[c]).join("\t"));
  }
  return { text: lines.join("\n") + "\n", sites: siteLines.join("\n") + "\n" };
}
