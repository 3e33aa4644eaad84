"""Test fixtures: a minimal DICOM slice writer independent of the reader."""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

EXPLICIT_LE = "1.2.840.10008.1.2.1"
IMPLICIT_LE = "1.2.840.10008.1.2"

_LONG_VRS = {"OB", "OW", "SQ", "UN", "UT"}


def _encode_value(vr: str, value) -> bytes:
    if vr == "US":
        values = value if isinstance(value, (list, tuple)) else [value]
        return struct.pack(f"<{len(values)}H", *values)
    if vr == "UL":
        return struct.pack("<I", value)
    if vr in ("OB", "OW"):
        return bytes(value)
    if isinstance(value, (list, tuple)):
        text = "\\".join(str(v) for v in value)
    else:
        text = str(value)
    raw = text.encode("ascii")
    if len(raw) % 2:
        raw += b"\x00" if vr == "UI" else b" "
    return raw


def _encode_element(tag: tuple[int, int], vr: str, value, explicit: bool) -> bytes:
    raw = _encode_value(vr, value)
    group, elem = tag
    if not explicit:
        return struct.pack("<HHI", group, elem, len(raw)) + raw
    if vr in _LONG_VRS:
        return struct.pack("<HH2sHI", group, elem, vr.encode(), 0, len(raw)) + raw
    return struct.pack("<HH2sH", group, elem, vr.encode(), len(raw)) + raw


def write_dicom_slice(path: Path, pixels: np.ndarray, *,
                      instance_number: int = 1,
                      position: tuple[float, float, float] | None = (0.0, 0.0, 0.0),
                      orientation: tuple[float, ...] | None = (1, 0, 0, 0, 1, 0),
                      pixel_spacing: tuple[float, float] | None = (0.5, 0.5),
                      slice_thickness: float | None = 3.0,
                      manufacturer: str | None = "TestScanner",
                      field_strength: float | None = 3.0,
                      tr: float | None = 500.0,
                      te: float | None = 15.0,
                      rescale: tuple[float, float] | None = None,
                      station_name: str | None = None,
                      implicit: bool = False,
                      truncate: int | None = None) -> Path:
    """Write one synthetic uint16 DICOM slice file."""
    pixels = np.ascontiguousarray(pixels, dtype="<u2")
    rows, cols = pixels.shape

    elements: list[tuple[tuple[int, int], str, object]] = [
        ((0x0008, 0x0060), "CS", "MR"),
    ]
    if manufacturer is not None:
        elements.append(((0x0008, 0x0070), "LO", manufacturer))
    if station_name is not None:
        elements.append(((0x0008, 0x1010), "SH", station_name))
    if slice_thickness is not None:
        elements.append(((0x0018, 0x0050), "DS", slice_thickness))
    if tr is not None:
        elements.append(((0x0018, 0x0080), "DS", tr))
    if te is not None:
        elements.append(((0x0018, 0x0081), "DS", te))
    if field_strength is not None:
        elements.append(((0x0018, 0x0087), "DS", field_strength))
    if instance_number is not None:
        elements.append(((0x0020, 0x0013), "IS", instance_number))
    if position is not None:
        elements.append(((0x0020, 0x0032), "DS", list(position)))
    if orientation is not None:
        elements.append(((0x0020, 0x0037), "DS", list(orientation)))
    elements += [
        ((0x0028, 0x0002), "US", 1),
        ((0x0028, 0x0004), "CS", "MONOCHROME2"),
        ((0x0028, 0x0010), "US", rows),
        ((0x0028, 0x0011), "US", cols),
    ]
    if pixel_spacing is not None:
        elements.append(((0x0028, 0x0030), "DS", list(pixel_spacing)))
    elements += [
        ((0x0028, 0x0100), "US", 16),
        ((0x0028, 0x0101), "US", 16),
        ((0x0028, 0x0102), "US", 15),
        ((0x0028, 0x0103), "US", 0),
    ]
    if rescale is not None:
        elements.append(((0x0028, 0x1052), "DS", rescale[1]))
        elements.append(((0x0028, 0x1053), "DS", rescale[0]))
    elements.append(((0x7FE0, 0x0010), "OW", pixels.tobytes()))

    syntax = IMPLICIT_LE if implicit else EXPLICIT_LE
    meta = b"".join([
        _encode_element((0x0002, 0x0002), "UI", "1.2.840.10008.5.1.4.1.1.4", True),
        _encode_element((0x0002, 0x0003), "UI", f"1.2.3.4.{instance_number}", True),
        _encode_element((0x0002, 0x0010), "UI", syntax, True),
    ])
    meta = _encode_element((0x0002, 0x0000), "UL", len(meta), True) + meta

    body = b"".join(_encode_element(tag, vr, value, not implicit)
                    for tag, vr, value in sorted(elements))
    blob = b"\x00" * 128 + b"DICM" + meta + body
    if truncate is not None:
        blob = blob[:truncate]
    path = Path(path)
    path.write_bytes(blob)
    return path


def write_dicom_series(directory: Path, volume: np.ndarray, *,
                       reverse_files: bool = False, **kwargs) -> list[Path]:
    """Write one file per slice; file order on disk can oppose slice order."""
    directory.mkdir(parents=True, exist_ok=True)
    num = volume.shape[0]
    paths = []
    indices = range(num - 1, -1, -1) if reverse_files else range(num)
    for file_index, z in enumerate(indices):
        thickness = kwargs.get("slice_thickness", 3.0)
        spacing_z = thickness if thickness is not None else 1.0
        path = directory / f"slice_{file_index:03d}.dcm"
        write_dicom_slice(
            path, volume[z],
            instance_number=z + 1,
            position=(0.0, 0.0, z * spacing_z),
            **kwargs,
        )
        paths.append(path)
    return paths
