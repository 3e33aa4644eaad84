"""Core data types produced by the volume loaders."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..errors import DatasetError

#: Minimum in-plane size below which the quality measures are undefined.
MIN_INPLANE = 8


@dataclass(frozen=True)
class DatasetDescriptor:
    """One dataset discovered on disk: a DICOM series directory or a single file."""

    id: str
    format: str  # "dicom" | "nifti" | "mha"
    files: tuple[Path, ...]


@dataclass
class Volume:
    """A 3-D scalar intensity grid, indexed (slice, row, col).

    ``spacing`` is (VRX, VRY, VRZ) in mm; components the source header did not
    provide are ``None`` (missing), never zero.
    """

    id: str
    voxels: np.ndarray
    spacing: tuple[float | None, float | None, float | None]

    def __post_init__(self) -> None:
        if self.voxels.ndim != 3:
            raise DatasetError(f"{self.id}: expected 3-D voxel array, got {self.voxels.ndim}-D")
        if any(s is not None and s <= 0 for s in self.spacing):
            raise DatasetError(f"{self.id}: spacing components must be > 0 or missing")
        if not np.issubdtype(self.voxels.dtype, np.floating):
            self.voxels = self.voxels.astype(np.float64)

    @property
    def dims(self) -> tuple[int, int, int]:
        """(NUM, ROWS, COLS)."""
        return self.voxels.shape  # type: ignore[return-value]

    @property
    def num_slices(self) -> int:
        return self.voxels.shape[0]

    def measurable(self) -> bool:
        """Whether the volume is large enough for the quality measures."""
        _, rows, cols = self.dims
        return rows >= MIN_INPLANE and cols >= MIN_INPLANE


@dataclass
class MetadataRecord:
    """Header metadata for one dataset.

    ``None`` marks a field absent from the source header; it is serialized as
    "NA" downstream. ROWS/COLS/NUM are always present (derived from the voxel
    data when the header lacks them).
    """

    ROWS: int
    COLS: int
    NUM: int
    MFR: str | None = None
    MFS: float | None = None
    VRX: float | None = None
    VRY: float | None = None
    VRZ: float | None = None
    TR: float | None = None
    TE: float | None = None
    extra: dict[str, str | None] = field(default_factory=dict)

    #: Serialization order of the header-derived fields (Table-style naming).
    FIELDS = ("MFR", "MFS", "VRX", "VRY", "VRZ", "ROWS", "COLS", "TR", "TE", "NUM")

    def as_dict(self) -> dict[str, object]:
        return {name: getattr(self, name) for name in self.FIELDS}
