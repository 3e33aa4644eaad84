"""Dataset discovery and volume loading for DICOM series, NIfTI, and MHA files."""

from __future__ import annotations

import logging
from pathlib import Path

import numpy as np

from ..errors import CohortQCError, DatasetError, FormatError
from . import dicom as dicom_mod
from .dicom import TAG_DICTIONARY, parse_dicom, parse_tag_spec, pixel_array, slice_sort_key
from .mha import read_mha
from .nifti import read_nifti
from .types import MIN_INPLANE, DatasetDescriptor, MetadataRecord, Volume

__all__ = [
    "DatasetDescriptor", "MetadataRecord", "Volume", "MIN_INPLANE",
    "discover_cohort", "load_volume", "extract_extra_tags",
]

logger = logging.getLogger(__name__)

_DICOM_SUFFIXES = {".dcm", ".ima"}
_SINGLE_FILE_SUFFIXES = {".nii", ".mha"}


def _file_format(path: Path) -> str | None:
    name = path.name.lower()
    if name.endswith(".nii.gz") or name.endswith(".nii"):
        return "nifti"
    if name.endswith(".mha"):
        return "mha"
    if path.suffix.lower() in _DICOM_SUFFIXES:
        return "dicom"
    return None


def _dataset_id_for_file(path: Path) -> str:
    name = path.name
    for suffix in (".nii.gz", ".nii", ".mha"):
        if name.lower().endswith(suffix):
            return name[: -len(suffix)]
    return path.stem


def discover_cohort(root: str | Path) -> list[DatasetDescriptor]:
    """Enumerate datasets under ``root``.

    Each directory directly containing DICOM slice files is one dataset; each
    NIfTI/MHA file is one dataset. Unrecognized files are skipped with a
    warning. Descriptors are sorted lexicographically by id.
    """
    root = Path(root)
    if not root.is_dir():
        raise CohortQCError(f"input directory not readable: {root}")

    descriptors: list[DatasetDescriptor] = []
    for directory, _subdirs, filenames in _walk_sorted(root):
        dicom_files: list[Path] = []
        for filename in filenames:
            path = directory / filename
            fmt = _file_format(path)
            if fmt == "dicom":
                dicom_files.append(path)
            elif fmt in ("nifti", "mha"):
                descriptors.append(
                    DatasetDescriptor(id=_dataset_id_for_file(path), format=fmt, files=(path,))
                )
            else:
                logger.warning("skipping unrecognized file: %s", path)
        if dicom_files:
            if directory == root:
                dataset_id = root.name
            else:
                dataset_id = "_".join(directory.relative_to(root).parts)
            descriptors.append(
                DatasetDescriptor(id=dataset_id, format="dicom", files=tuple(sorted(dicom_files)))
            )
    descriptors.sort(key=lambda d: d.id)
    return descriptors


def _walk_sorted(root: Path):
    """os.walk with deterministic ordering."""
    stack = [root]
    while stack:
        directory = stack.pop()
        subdirs, files = [], []
        try:
            for entry in sorted(directory.iterdir()):
                (subdirs if entry.is_dir() else files).append(entry.name)
        except OSError as exc:
            raise CohortQCError(f"cannot read directory {directory}: {exc}") from exc
        yield directory, subdirs, files
        stack.extend(directory / d for d in reversed(subdirs))


def load_volume(descriptor: DatasetDescriptor) -> tuple[Volume, MetadataRecord]:
    """Decode one dataset into a Volume plus its header metadata.

    Raises FormatError/DatasetError on corrupt or inconsistent input; callers
    running a cohort catch these and mark the dataset failed.
    """
    if descriptor.format == "dicom":
        return _load_dicom_series(descriptor)
    if descriptor.format == "nifti":
        voxels, spacing = read_nifti(descriptor.files[0])
    elif descriptor.format == "mha":
        voxels, spacing = read_mha(descriptor.files[0])
    else:
        raise FormatError(f"unknown dataset format {descriptor.format!r}")
    volume = Volume(id=descriptor.id, voxels=voxels, spacing=spacing)
    num, rows, cols = volume.dims
    metadata = MetadataRecord(
        ROWS=rows, COLS=cols, NUM=num,
        VRX=spacing[0], VRY=spacing[1], VRZ=spacing[2],
    )
    return volume, metadata


def _load_dicom_series(descriptor: DatasetDescriptor) -> tuple[Volume, MetadataRecord]:
    slices = []
    for path in descriptor.files:
        try:
            ds = parse_dicom(path.read_bytes())
            arr = pixel_array(ds)
        except FormatError as exc:
            raise FormatError(f"{path.name}: {exc}") from exc
        if arr.ndim != 2:
            raise DatasetError(f"{path.name}: multi-frame files are not supported in a series")
        slices.append((slice_sort_key(ds, path.name), arr, ds))

    if not slices:
        raise DatasetError(f"{descriptor.id}: empty DICOM series")
    shapes = {arr.shape for _, arr, _ in slices}
    if len(shapes) > 1:
        raise DatasetError(f"{descriptor.id}: inconsistent slice dimensions {sorted(shapes)}")

    slices.sort(key=lambda item: item[0])
    voxels = np.stack([arr for _, arr, _ in slices])
    first = slices[0][2]

    pixel_spacing = first.get("PixelSpacing")
    vrx = vry = None
    if isinstance(pixel_spacing, list) and len(pixel_spacing) >= 2:
        vry, vrx = float(pixel_spacing[0]), float(pixel_spacing[1])
    elif isinstance(pixel_spacing, float):
        vrx = vry = pixel_spacing
    vrz = _through_plane_spacing(first, slices)

    def _positive(v):
        return float(v) if v is not None and v > 0 else None

    volume = Volume(id=descriptor.id, voxels=voxels,
                    spacing=(_positive(vrx), _positive(vry), _positive(vrz)))
    mfs = first.get_first("MagneticFieldStrength")
    tr = first.get_first("RepetitionTime")
    te = first.get_first("EchoTime")
    mfr = first.get("Manufacturer")
    metadata = MetadataRecord(
        ROWS=voxels.shape[1], COLS=voxels.shape[2], NUM=voxels.shape[0],
        MFR=str(mfr) if mfr not in (None, "") else None,
        MFS=float(mfs) if mfs is not None else None,
        VRX=volume.spacing[0], VRY=volume.spacing[1], VRZ=volume.spacing[2],
        TR=float(tr) if tr is not None else None,
        TE=float(te) if te is not None else None,
    )
    return volume, metadata


def _through_plane_spacing(first, slices) -> float | None:
    thickness = first.get_first("SliceThickness")
    if thickness is not None and thickness > 0:
        return float(thickness)
    between = first.get_first("SpacingBetweenSlices")
    if between is not None and between > 0:
        return float(between)
    projections = [key[1] for key, _, _ in slices if key[0] == 0]
    if len(projections) >= 2:
        deltas = np.abs(np.diff(sorted(projections)))
        if np.all(deltas > 0):
            return float(np.median(deltas))
    return None


def read_tag_list(tags_file: str | Path) -> list[str]:
    """Read a tag-list file: UTF-8, one tag per line, LF or CRLF."""
    text = Path(tags_file).read_text(encoding="utf-8")
    return [line.strip() for line in text.splitlines() if line.strip()]


def extract_extra_tags(descriptor: DatasetDescriptor,
                       tags_file: str | Path) -> dict[str, str | None]:
    """Resolve user-requested header tags for one dataset.

    Tags may be keywords (e.g. "StationName") or "GGGG,EEEE" hex pairs.
    Unresolvable names are skipped with a warning; tags absent from the
    header map to None. Insertion order follows the tags file.
    """
    requested = read_tag_list(tags_file)
    header = None
    if descriptor.format == "dicom":
        try:
            header = parse_dicom(descriptor.files[0].read_bytes())
        except FormatError as exc:
            logger.warning("%s: cannot read header for extra tags: %s", descriptor.id, exc)

    result: dict[str, str | None] = {}
    for name in requested:
        tag = TAG_DICTIONARY.get(name, (None,))[0] or parse_tag_spec(name)
        if tag is None:
            logger.warning("skipping malformed or unknown tag name: %r", name)
            continue
        value = header.elements.get(tag) if header is not None else None
        result[name] = _format_tag_value(value)
    return result


def _format_tag_value(value) -> str | None:
    if value is None:
        return None
    if isinstance(value, bytes):
        text = value.decode("latin-1", errors="replace").strip("\x00 ")
        return text if text else None
    if isinstance(value, (list, tuple)):
        return "\\".join(str(v) for v in value)
    return str(value)
