"""NIfTI-1 single-file (.nii / .nii.gz) reader and a minimal writer.

Only the fields the pipeline needs are interpreted: dimensions, voxel
spacing, datatype, and the linear intensity scaling (scl_slope/scl_inter).
Orientation codes are ignored; the voxel grid is returned in (slice z,
row j, col i) index order with the file's native axis order.
"""

from __future__ import annotations

import gzip
import struct
from pathlib import Path

import numpy as np

from ..errors import FormatError

_DTYPES = {
    2: "u1", 4: "i2", 8: "i4", 16: "f4", 64: "f8",
    256: "i1", 512: "u2", 768: "u4",
}
_HEADER_SIZE = 348


def _read_bytes(path: Path) -> bytes:
    data = path.read_bytes()
    if data[:2] == b"\x1f\x8b":
        data = gzip.decompress(data)
    return data


def read_nifti(path: str | Path) -> tuple[np.ndarray, tuple[float, float, float]]:
    """Load a NIfTI-1 file.

    Returns (voxels indexed (z, y, x), spacing (VRX, VRY, VRZ) in mm).
    """
    data = _read_bytes(Path(path))
    if len(data) < _HEADER_SIZE:
        raise FormatError("NIfTI header truncated")
    for endian in ("<", ">"):
        sizeof_hdr = struct.unpack(f"{endian}i", data[0:4])[0]
        if sizeof_hdr == _HEADER_SIZE:
            break
    else:
        raise FormatError("not a NIfTI-1 file (bad sizeof_hdr)")

    magic = data[344:348]
    if magic[:3] not in (b"n+1", b"ni1"):
        raise FormatError(f"bad NIfTI magic {magic!r}")
    if magic[:3] == b"ni1":
        raise FormatError("two-file NIfTI (.hdr/.img) is not supported")

    dim = struct.unpack(f"{endian}8h", data[40:56])
    ndim = dim[0]
    if ndim < 3:
        raise FormatError(f"expected a 3-D NIfTI volume, got {ndim}-D")
    if ndim > 3 and any(d > 1 for d in dim[4:4 + (ndim - 3)]):
        raise FormatError("4-D NIfTI with multiple volumes is not supported")
    nx, ny, nz = dim[1], dim[2], dim[3]
    if nx < 1 or ny < 1 or nz < 1:
        raise FormatError(f"invalid NIfTI dims {dim[1:4]}")

    datatype = struct.unpack(f"{endian}h", data[70:72])[0]
    kind = _DTYPES.get(datatype)
    if kind is None:
        raise FormatError(f"unsupported NIfTI datatype code {datatype}")
    pixdim = struct.unpack(f"{endian}8f", data[76:108])
    vox_offset = int(struct.unpack(f"{endian}f", data[108:112])[0])
    scl_slope = struct.unpack(f"{endian}f", data[112:116])[0]
    scl_inter = struct.unpack(f"{endian}f", data[116:120])[0]

    dtype = np.dtype(endian + kind)
    count = nx * ny * nz
    end = vox_offset + count * dtype.itemsize
    if len(data) < end:
        raise FormatError(f"NIfTI data truncated: need {end} bytes, have {len(data)}")
    flat = np.frombuffer(data[vox_offset:end], dtype=dtype)
    # NIfTI stores x fastest, so a C-order reshape to (z, y, x) is direct.
    voxels = flat.reshape(nz, ny, nx).astype(np.float64)

    if scl_slope not in (0.0, 1.0) or (scl_slope != 0.0 and scl_inter != 0.0):
        voxels = voxels * scl_slope + scl_inter

    spacing = tuple(float(pixdim[i]) if pixdim[i] > 0 else None for i in (1, 2, 3))
    return voxels, spacing  # type: ignore[return-value]


def write_nifti(path: str | Path, voxels: np.ndarray,
                spacing: tuple[float | None, float | None, float | None] = (1.0, 1.0, 1.0)) -> None:
    """Write a (z, y, x) float volume as single-file NIfTI-1 (float32)."""
    path = Path(path)
    if voxels.ndim != 3:
        raise ValueError("expected a 3-D array")
    nz, ny, nx = voxels.shape
    header = bytearray(_HEADER_SIZE)
    struct.pack_into("<i", header, 0, _HEADER_SIZE)
    struct.pack_into("<8h", header, 40, 3, nx, ny, nz, 1, 1, 1, 1)
    struct.pack_into("<h", header, 70, 16)  # float32
    struct.pack_into("<h", header, 72, 32)  # bitpix
    sx, sy, sz = (s if s is not None else 0.0 for s in spacing)
    struct.pack_into("<8f", header, 76, 1.0, sx, sy, sz, 0.0, 0.0, 0.0, 0.0)
    struct.pack_into("<f", header, 108, 352.0)  # vox_offset
    struct.pack_into("<f", header, 112, 1.0)    # scl_slope
    struct.pack_into("<f", header, 116, 0.0)    # scl_inter
    header[344:348] = b"n+1\x00"

    payload = header + b"\x00" * 4 + voxels.astype("<f4").tobytes()
    if path.name.endswith(".nii.gz"):
        # mtime pinned so identical volumes produce identical files
        path.write_bytes(gzip.compress(bytes(payload), mtime=0))
    else:
        path.write_bytes(bytes(payload))
