"""MetaImage (.mha) reader and writer for embedded-data files."""

from __future__ import annotations

import zlib
from pathlib import Path

import numpy as np

from ..errors import FormatError

_ELEMENT_TYPES = {
    "MET_CHAR": "i1", "MET_UCHAR": "u1",
    "MET_SHORT": "i2", "MET_USHORT": "u2",
    "MET_INT": "i4", "MET_UINT": "u4",
    "MET_FLOAT": "f4", "MET_DOUBLE": "f8",
}


def read_mha(path: str | Path) -> tuple[np.ndarray, tuple[float, float, float]]:
    """Load a .mha file with LOCAL (embedded) element data.

    Returns (voxels indexed (z, y, x), spacing (VRX, VRY, VRZ) in mm).
    """
    data = Path(path).read_bytes()
    fields: dict[str, str] = {}
    pos = 0
    while True:
        newline = data.find(b"\n", pos)
        if newline < 0:
            raise FormatError("MHA header missing ElementDataFile")
        line = data[pos:newline].decode("latin-1").strip()
        pos = newline + 1
        if "=" not in line:
            raise FormatError(f"malformed MHA header line: {line!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        fields[key] = value
        if key == "ElementDataFile":
            break

    if fields.get("ObjectType", "Image") != "Image":
        raise FormatError(f"unsupported MHA ObjectType {fields.get('ObjectType')}")
    if fields["ElementDataFile"].upper() != "LOCAL":
        raise FormatError("only .mha files with embedded (LOCAL) data are supported")
    ndims = int(fields.get("NDims", "3"))
    if ndims != 3:
        raise FormatError(f"expected NDims = 3, got {ndims}")

    dim_size = [int(v) for v in fields["DimSize"].split()]
    if len(dim_size) != 3 or any(d < 1 for d in dim_size):
        raise FormatError(f"invalid DimSize {fields['DimSize']!r}")
    nx, ny, nz = dim_size

    kind = _ELEMENT_TYPES.get(fields.get("ElementType", ""))
    if kind is None:
        raise FormatError(f"unsupported ElementType {fields.get('ElementType')!r}")
    msb = fields.get("BinaryDataByteOrderMSB", "False").lower() == "true"
    if fields.get("BinaryData", "True").lower() != "true":
        raise FormatError("ASCII MHA data is not supported")
    dtype = np.dtype((">" if msb else "<") + kind)

    raw = data[pos:]
    if fields.get("CompressedData", "False").lower() == "true":
        raw = zlib.decompress(raw)
    expected = nx * ny * nz * dtype.itemsize
    if len(raw) < expected:
        raise FormatError(f"MHA data truncated: need {expected} bytes, have {len(raw)}")
    voxels = np.frombuffer(raw[:expected], dtype=dtype).reshape(nz, ny, nx).astype(np.float64)

    spacing_field = fields.get("ElementSpacing") or fields.get("ElementSize")
    if spacing_field:
        parts = [float(v) for v in spacing_field.split()]
        spacing = tuple(p if p > 0 else None for p in parts[:3])
    else:
        spacing = (None, None, None)
    return voxels, spacing  # type: ignore[return-value]


def write_mha(path: str | Path, voxels: np.ndarray,
              spacing: tuple[float | None, float | None, float | None] = (1.0, 1.0, 1.0)) -> None:
    """Write a (z, y, x) float volume as uncompressed .mha (float32)."""
    if voxels.ndim != 3:
        raise ValueError("expected a 3-D array")
    nz, ny, nx = voxels.shape
    sx, sy, sz = (s if s is not None else 1.0 for s in spacing)
    header = (
        "ObjectType = Image\n"
        "NDims = 3\n"
        "BinaryData = True\n"
        "BinaryDataByteOrderMSB = False\n"
        "CompressedData = False\n"
        f"DimSize = {nx} {ny} {nz}\n"
        f"ElementSpacing = {sx} {sy} {sz}\n"
        "ElementType = MET_FLOAT\n"
        "ElementDataFile = LOCAL\n"
    )
    Path(path).write_bytes(header.encode("ascii") + voxels.astype("<f4").tobytes())
