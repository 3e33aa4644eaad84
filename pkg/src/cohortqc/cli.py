"""Command-line drivers: the QC pipeline and the batch-effect analysis.

``cohortqc <output_name> <input_dir> [-t tags.txt] [-c True]`` runs
discover -> load -> foreground -> measures -> embeddings -> report and writes
``<output_name>/results.tsv``, per-dataset thumbnail folders, and a run
manifest. ``cohortqc-batch`` consumes a results.tsv plus a site-label TSV and
writes consensus clustering artifacts next to the results file.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .batch_effect import DEFAULT_ITERATIONS, DEFAULT_SUBSAMPLE, consensus_cluster, overlap_accuracy
from .embedding import FEATURE_COLUMNS, FeatureMatrix, compute_embeddings
from .errors import CohortQCError
from .foreground import DEFAULT_WEIGHTS, detect_foreground, split_objects
from .measures import MEASURE_NAMES, MeasureRecord, compute_record, dataset_rng
from .report import CohortRow, CohortTable, format_value, read_results, write_results, write_thumbnails
from .volume_io import discover_cohort, extract_extra_tags, load_volume
from .volume_io.dicom import TAG_DICTIONARY, parse_tag_spec
from .volume_io.types import MetadataRecord

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FATAL = 1
EXIT_PARTIAL = 2
EXIT_EMPTY = 3


@dataclass
class RunConfig:
    output_name: str
    input_dir: Path
    tags_file: Path | None = None
    per_object: bool = False
    seed: int = 0
    weights: tuple[float, float] = DEFAULT_WEIGHTS
    jobs: int = 1

    def __post_init__(self) -> None:
        if abs(self.weights[0] + self.weights[1] - 1.0) > 1e-9:
            raise ValueError(f"weights must sum to 1, got {self.weights}")
        if self.jobs < 1:
            raise ValueError("jobs must be >= 1")


@dataclass
class _DatasetOutcome:
    id: str
    status: str
    seconds: float
    metadata: MetadataRecord | None = None
    records: list[tuple[int | None, MeasureRecord]] | None = None
    extra: dict[str, str | None] | None = None


def _resolved_tag_names(tags_file: Path | None) -> tuple[str, ...]:
    if tags_file is None:
        return ()
    from .volume_io import read_tag_list

    names = []
    for name in read_tag_list(tags_file):
        if name in TAG_DICTIONARY or parse_tag_spec(name) is not None:
            names.append(name)
        else:
            logger.warning("ignoring malformed or unknown tag name: %r", name)
    return tuple(dict.fromkeys(names))


def _process_dataset(descriptor, config: RunConfig, cohort_dir: Path) -> _DatasetOutcome:
    start = time.perf_counter()
    try:
        volume, metadata = load_volume(descriptor)
        if not volume.measurable():
            raise CohortQCError("in-plane dims below the 8x8 minimum required for measures")
        mask = detect_foreground(volume, config.weights)
        if config.per_object:
            objects = split_objects(mask)
            if not objects:
                raise CohortQCError("no foreground objects above the area floor")
            records = []
            for obj in objects:
                rng = dataset_rng(config.seed, descriptor.id, obj.object_index or 0)
                records.append((obj.object_index, compute_record(volume, obj, rng)))
        else:
            rng = dataset_rng(config.seed, descriptor.id, 0)
            records = [(None, compute_record(volume, mask, rng))]
        extra = (extract_extra_tags(descriptor, config.tags_file)
                 if config.tags_file is not None else {})
        write_thumbnails(volume, cohort_dir)
        return _DatasetOutcome(id=descriptor.id, status="ok",
                               seconds=time.perf_counter() - start,
                               metadata=metadata, records=records, extra=extra)
    except (CohortQCError, OSError) as exc:
        logger.warning("dataset %s failed: %s", descriptor.id, exc)
        return _DatasetOutcome(id=descriptor.id, status=f"failed:{exc}",
                               seconds=time.perf_counter() - start)


def run(config: RunConfig) -> int:
    """Execute the full pipeline; returns the process exit code."""
    started = time.perf_counter()
    try:
        descriptors = discover_cohort(config.input_dir)
    except CohortQCError as exc:
        logger.error("%s", exc)
        return EXIT_FATAL
    if not descriptors:
        logger.warning("no datasets found under %s", config.input_dir)
        return EXIT_EMPTY

    cohort_dir = Path(config.output_name)
    cohort_dir.mkdir(parents=True, exist_ok=True)
    extra_columns = _resolved_tag_names(config.tags_file)

    outcomes: list[_DatasetOutcome] = []
    if config.jobs > 1:
        with ThreadPoolExecutor(max_workers=config.jobs) as pool:
            futures = [pool.submit(_process_dataset, d, config, cohort_dir)
                       for d in descriptors]
            outcomes = [f.result() for f in futures]
    else:
        outcomes = [_process_dataset(d, config, cohort_dir) for d in descriptors]
    for index, outcome in enumerate(outcomes, start=1):
        print(f"[{index}/{len(outcomes)}] {outcome.id}: {outcome.status.split(':')[0]} "
              f"({outcome.seconds:.2f}s)")

    rows: list[CohortRow] = []
    for outcome in outcomes:
        if outcome.status != "ok":
            rows.append(CohortRow(id=outcome.id, status=outcome.status))
            continue
        for object_index, record in outcome.records or []:
            rows.append(CohortRow(id=outcome.id, status="ok", object_index=object_index,
                                  metadata=outcome.metadata, measures=record,
                                  extra=outcome.extra or {}))
    rows.sort(key=lambda r: (r.id, r.object_index if r.object_index is not None else -1))

    ok_rows = [row for row in rows if row.status == "ok"]
    if len(ok_rows) >= 2:
        features = FeatureMatrix.from_records(
            ids=[row.id for row in ok_rows],
            metadata=[row.metadata for row in ok_rows],
            measures=[row.measures for row in ok_rows],
        )
        embeddings = compute_embeddings(features, seed=config.seed)
        for index, row in enumerate(ok_rows):
            if embeddings.tsne is not None:
                row.tsne = (float(embeddings.tsne[index, 0]), float(embeddings.tsne[index, 1]))
            if embeddings.umap is not None:
                row.umap = (float(embeddings.umap[index, 0]), float(embeddings.umap[index, 1]))
            row.imputed = bool(embeddings.imputed_rows[index])
    else:
        logger.warning("fewer than 2 successful datasets; embeddings skipped")

    table = CohortTable(rows=rows, extra_columns=extra_columns, per_object=config.per_object)
    results_path = write_results(table, cohort_dir)
    elapsed = time.perf_counter() - started
    _write_manifest(cohort_dir, config, outcomes, elapsed)
    print(f"wrote {results_path} ({len(rows)} rows) in {elapsed:.2f}s")

    if any(outcome.status != "ok" for outcome in outcomes):
        return EXIT_PARTIAL
    return EXIT_OK


def _write_manifest(cohort_dir: Path, config: RunConfig,
                    outcomes: list[_DatasetOutcome], elapsed: float) -> None:
    manifest = {
        "tool": "cohortqc",
        "version": __version__,
        "python": sys.version.split()[0],
        "config": {
            "output_name": config.output_name,
            "input_dir": str(config.input_dir),
            "tags_file": str(config.tags_file) if config.tags_file else None,
            "per_object": config.per_object,
            "seed": config.seed,
            "weights": list(config.weights),
            "jobs": config.jobs,
        },
        "datasets": [{"id": o.id, "status": o.status, "seconds": round(o.seconds, 3)}
                     for o in outcomes],
        "total_seconds": round(elapsed, 3),
    }
    path = cohort_dir / "run_manifest.json"
    path.write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")


def read_sites(path: str | Path) -> dict[str, str]:
    """Parse a two-column (dataset id, site) TSV; a literal 'id<TAB>site'
    header line is tolerated."""
    sites: dict[str, str] = {}
    for number, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        cells = line.split("\t")
        if len(cells) != 2:
            raise CohortQCError(f"{path}:{number}: expected 2 tab-separated columns")
        if number == 1 and cells == ["id", "site"]:
            continue
        sites[cells[0]] = cells[1]
    return sites


def analyze_batch(results_tsv: str | Path, sites_tsv: str | Path,
                  k: int, seed: int = 0,
                  iterations: int = DEFAULT_ITERATIONS,
                  subsample: float = DEFAULT_SUBSAMPLE) -> int:
    """Consensus-cluster a finished cohort and score cluster-site overlap.

    Writes consensus_matrix.tsv and batch_summary.json next to the results
    file. Requires one row per dataset id (single-region results).
    """
    results_tsv = Path(results_tsv)
    try:
        columns, rows = read_results(results_tsv)
    except (OSError, ValueError) as exc:
        logger.error("cannot parse %s: %s", results_tsv, exc)
        return EXIT_FATAL
    missing_cols = [c for c in FEATURE_COLUMNS if c not in columns]
    if missing_cols:
        logger.error("results file lacks feature columns: %s", ", ".join(missing_cols))
        return EXIT_FATAL

    ok_rows = [row for row in rows if row.get("status") == "ok"]
    ids = [row["id"] for row in ok_rows]
    if len(set(ids)) != len(ids):
        logger.error("duplicate dataset ids (per-object results?); batch analysis "
                     "needs one row per dataset")
        return EXIT_FATAL

    try:
        sites = read_sites(sites_tsv)
    except (OSError, CohortQCError) as exc:
        logger.error("cannot parse %s: %s", sites_tsv, exc)
        return EXIT_FATAL
    unmatched = sorted(set(ids) ^ set(sites))
    if unmatched:
        logger.error("dataset ids do not align with site labels; offending ids: %s",
                     ", ".join(unmatched))
        return EXIT_FATAL

    values = np.full((len(ok_rows), len(FEATURE_COLUMNS)), np.nan)
    for i, row in enumerate(ok_rows):
        for j, name in enumerate(FEATURE_COLUMNS):
            cell = row[name]
            if cell != "NA":
                values[i, j] = float(cell)
    features = FeatureMatrix(ids=tuple(ids), values=values, missing=np.isnan(values))

    from .embedding import whiten

    try:
        whitened = whiten(features)
        result = consensus_cluster(whitened.values, k=k, iterations=iterations,
                                   subsample=subsample, seed=seed)
        site_list = [sites[i] for i in ids]
        accuracy, pairs = overlap_accuracy(result.labels, site_list)
    except ValueError as exc:
        logger.error("%s", exc)
        return EXIT_FATAL
    result.overlap_accuracy = accuracy
    result.pair_scores = pairs

    out_dir = results_tsv.parent
    _write_consensus_matrix(out_dir / "consensus_matrix.tsv", ids, result.consensus_matrix)
    summary = {
        "k": result.k,
        "iterations": iterations,
        "subsample": subsample,
        "seed": seed,
        "labels": {i: int(label) for i, label in zip(ids, result.labels)},
        "overlap_accuracy": accuracy,
        "pair_scores": pairs,
    }
    (out_dir / "batch_summary.json").write_text(
        json.dumps(summary, indent=2) + "\n", encoding="utf-8")
    for site, value in accuracy.items():
        print(f"site {site}: overlap accuracy {value:.3f}")
    return EXIT_OK


def _write_consensus_matrix(path: Path, ids: list[str], matrix: np.ndarray) -> None:
    lines = ["\t".join(["id"] + ids)]
    for i, dataset_id in enumerate(ids):
        cells = [dataset_id] + [format_value(float(v)) for v in matrix[i]]
        lines.append("\t".join(cells))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _str2bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("true", "1", "yes"):
        return True
    if lowered in ("false", "0", "no"):
        return False
    raise argparse.ArgumentTypeError(f"expected True or False, got {text!r}")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cohortqc",
        description="Quality control a cohort of MRI volumes (DICOM series, NIfTI, MHA).")
    parser.add_argument("output_name", help="output folder for results.tsv and thumbnails")
    parser.add_argument("input_dir", help="directory (or directory of directories) to scan")
    parser.add_argument("-t", "--tags", default=None,
                        help="text file listing extra header tags to extract, one per line")
    parser.add_argument("-c", "--per-object", type=_str2bool, default=False, metavar="BOOL",
                        help="compute measures per individual foreground object (default False)")
    parser.add_argument("--seed", type=int, default=0, help="global random seed (default 0)")
    parser.add_argument("--jobs", type=int, default=1, help="parallel dataset workers")
    parser.add_argument("--weights", type=float, nargs=2, default=list(DEFAULT_WEIGHTS),
                        metavar=("W1", "W2"),
                        help="blend weights for the raw and equalized estimates (sum to 1)")
    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    args = _build_parser().parse_args(argv)
    try:
        config = RunConfig(
            output_name=args.output_name,
            input_dir=Path(args.input_dir),
            tags_file=Path(args.tags) if args.tags else None,
            per_object=args.per_object,
            seed=args.seed,
            weights=(args.weights[0], args.weights[1]),
            jobs=args.jobs,
        )
    except ValueError as exc:
        logging.getLogger(__name__).error("%s", exc)
        return EXIT_FATAL
    return run(config)


def _build_batch_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cohortqc-batch",
        description="Quantify site batch effects in a finished cohort via "
                    "resampled hierarchical consensus clustering.")
    parser.add_argument("results_tsv", help="results.tsv produced by cohortqc")
    parser.add_argument("sites_tsv", help="two-column TSV: dataset id, site")
    parser.add_argument("-k", type=int, required=True, help="cluster count (= site count)")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--iterations", type=int, default=DEFAULT_ITERATIONS)
    parser.add_argument("--subsample", type=float, default=DEFAULT_SUBSAMPLE)
    return parser


def batch_main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    args = _build_batch_parser().parse_args(argv)
    return analyze_batch(args.results_tsv, args.sites_tsv, k=args.k, seed=args.seed,
                         iterations=args.iterations, subsample=args.subsample)


if __name__ == "__main__":
    sys.exit(main())
