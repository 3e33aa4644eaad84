"""Serialization of cohort results: results.tsv and per-slice PNG thumbnails.

The TSV layout is the contract consumed by the explorer UI: one header row,
one row per dataset (or per object in per-object mode), tab-separated, UTF-8
with LF endings, missing values as the literal "NA", numerics at 6
significant digits. Output is byte-for-byte deterministic for identical
inputs.
"""

from __future__ import annotations

import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image

from .measures import MEASURE_NAMES, MeasureRecord
from .volume_io.types import MetadataRecord, Volume

THUMBNAIL_MAX_EDGE = 256
_WINDOW_PERCENTILES = (1.0, 99.0)

FIXED_COLUMNS = ("id", "status")
COORD_COLUMNS = ("tsne_x", "tsne_y", "umap_x", "umap_y")


@dataclass
class CohortRow:
    id: str
    status: str = "ok"
    object_index: int | None = None
    metadata: MetadataRecord | None = None
    measures: MeasureRecord | None = None
    tsne: tuple[float, float] | None = None
    umap: tuple[float, float] | None = None
    imputed: bool = False
    extra: dict[str, str | None] = field(default_factory=dict)


@dataclass
class CohortTable:
    rows: list[CohortRow]
    extra_columns: tuple[str, ...] = ()
    per_object: bool = False

    def columns(self) -> list[str]:
        cols = list(FIXED_COLUMNS)
        if self.per_object:
            cols.append("object")
        cols += list(MetadataRecord.FIELDS) + list(MEASURE_NAMES)
        cols += list(COORD_COLUMNS) + ["imputed"]
        cols += list(self.extra_columns)
        return cols


def format_value(value) -> str:
    """Render one cell: NA for missing, 6 significant digits for numbers."""
    if value is None:
        return "NA"
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return format(int(value), "d")
    if isinstance(value, (float, np.floating)):
        if not np.isfinite(value):
            return "NA"
        return format(float(value), ".6g")
    return str(value).replace("\t", " ").replace("\n", " ")


def _row_cells(row: CohortRow, table: CohortTable) -> list[str]:
    cells = [format_value(row.id), format_value(row.status)]
    if table.per_object:
        cells.append(format_value(row.object_index))
    meta = row.metadata.as_dict() if row.metadata is not None else {}
    cells += [format_value(meta.get(name)) for name in MetadataRecord.FIELDS]
    measures = row.measures.values if row.measures is not None else {}
    cells += [format_value(measures.get(name)) for name in MEASURE_NAMES]
    for coords in (row.tsne, row.umap):
        if coords is None:
            cells += ["NA", "NA"]
        else:
            cells += [format_value(coords[0]), format_value(coords[1])]
    cells.append(format_value(row.imputed))
    cells += [format_value(row.extra.get(name)) for name in table.extra_columns]
    return cells


def write_results(table: CohortTable, cohort_dir: str | Path) -> Path:
    """Write ``<cohort_dir>/results.tsv`` atomically (write-then-rename)."""
    cohort_dir = Path(cohort_dir)
    cohort_dir.mkdir(parents=True, exist_ok=True)
    lines = ["\t".join(table.columns())]
    lines += ["\t".join(_row_cells(row, table)) for row in table.rows]
    payload = ("\n".join(lines) + "\n").encode("utf-8")

    target = cohort_dir / "results.tsv"
    fd, tmp_name = tempfile.mkstemp(dir=cohort_dir, prefix=".results-", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as handle:
            handle.write(payload)
        os.replace(tmp_name, target)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise
    return target


def read_results(path: str | Path) -> tuple[list[str], list[dict[str, str]]]:
    """Parse a results.tsv back into (column names, rows of raw cell strings)."""
    text = Path(path).read_text(encoding="utf-8")
    lines = [line for line in text.split("\n") if line != ""]
    if not lines:
        raise ValueError(f"{path}: empty results file")
    columns = lines[0].split("\t")
    rows = []
    for number, line in enumerate(lines[1:], start=2):
        cells = line.split("\t")
        if len(cells) != len(columns):
            raise ValueError(f"{path}:{number}: expected {len(columns)} cells, got {len(cells)}")
        rows.append(dict(zip(columns, cells)))
    return columns, rows


def write_thumbnails(volume: Volume, cohort_dir: str | Path) -> list[Path]:
    """Write one 8-bit grayscale PNG per slice under ``<cohort_dir>/<id>/``.

    Intensities are windowed to the volume's [1st, 99th] percentile range and
    the long edge is capped at 256 px, preserving aspect ratio.
    """
    out_dir = Path(cohort_dir) / volume.id
    out_dir.mkdir(parents=True, exist_ok=True)
    lo, hi = np.percentile(volume.voxels, _WINDOW_PERCENTILES)
    pad = max(3, len(str(volume.num_slices - 1)))

    paths = []
    for z in range(volume.num_slices):
        slice_ = volume.voxels[z]
        if hi > lo:
            scaled = np.clip((slice_ - lo) / (hi - lo), 0.0, 1.0) * 255.0
            pixels = np.round(scaled).astype(np.uint8)
        else:
            pixels = np.full(slice_.shape, 128, dtype=np.uint8)
        image = Image.fromarray(pixels, mode="L")
        height, width = pixels.shape
        long_edge = max(height, width)
        if long_edge > THUMBNAIL_MAX_EDGE:
            scale = THUMBNAIL_MAX_EDGE / long_edge
            new_size = (max(1, round(width * scale)), max(1, round(height * scale)))
            image = image.resize(new_size, Image.BILINEAR)
        path = out_dir / f"{volume.id}_{z:0{pad}d}.png"
        image.save(path, format="PNG")
        paths.append(path)
    return paths
