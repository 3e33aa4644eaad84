"""Minimal DICOM reader for uncompressed single-frame MR slice files.

Supports the implicit/explicit VR little-endian and explicit VR big-endian
transfer syntaxes, which cover raw scanner exports (.dcm, .ima). Encapsulated
(compressed) pixel data is rejected with a clear error.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

from ..errors import FormatError

IMPLICIT_LE = "1.2.840.10008.1.2"
EXPLICIT_LE = "1.2.840.10008.1.2.1"
EXPLICIT_BE = "1.2.840.10008.1.2.2"

# VRs whose explicit encoding uses a 2-byte reserved field + 4-byte length.
_LONG_VRS = {"OB", "OW", "OF", "OD", "OL", "SQ", "UC", "UR", "UT", "UN"}
_KNOWN_VRS = _LONG_VRS | {
    "AE", "AS", "AT", "CS", "DA", "DS", "DT", "FL", "FD", "IS", "LO", "LT",
    "PN", "SH", "SL", "SS", "ST", "TM", "UI", "UL", "US",
}

_STRING_VRS = {"AE", "AS", "CS", "DA", "DS", "DT", "IS", "LO", "LT", "PN",
               "SH", "ST", "TM", "UC", "UI", "UR", "UT"}

# Keyword -> (tag, VR) for the metadata fields the pipeline extracts plus a
# set of commonly requested extras. Arbitrary tags can always be addressed by
# "GGGG,EEEE" hex notation in a tags file.
TAG_DICTIONARY: dict[str, tuple[tuple[int, int], str]] = {
    "SpecificCharacterSet": ((0x0008, 0x0005), "CS"),
    "ImageType": ((0x0008, 0x0008), "CS"),
    "SOPClassUID": ((0x0008, 0x0016), "UI"),
    "SOPInstanceUID": ((0x0008, 0x0018), "UI"),
    "StudyDate": ((0x0008, 0x0020), "DA"),
    "SeriesDate": ((0x0008, 0x0021), "DA"),
    "AcquisitionDate": ((0x0008, 0x0022), "DA"),
    "StudyTime": ((0x0008, 0x0030), "TM"),
    "AcquisitionTime": ((0x0008, 0x0032), "TM"),
    "Modality": ((0x0008, 0x0060), "CS"),
    "Manufacturer": ((0x0008, 0x0070), "LO"),
    "InstitutionName": ((0x0008, 0x0080), "LO"),
    "StationName": ((0x0008, 0x1010), "SH"),
    "StudyDescription": ((0x0008, 0x1030), "LO"),
    "SeriesDescription": ((0x0008, 0x103E), "LO"),
    "ManufacturerModelName": ((0x0008, 0x1090), "LO"),
    "PatientID": ((0x0010, 0x0020), "LO"),
    "PatientSex": ((0x0010, 0x0040), "CS"),
    "PatientAge": ((0x0010, 0x1010), "AS"),
    "BodyPartExamined": ((0x0018, 0x0015), "CS"),
    "ScanningSequence": ((0x0018, 0x0020), "CS"),
    "SequenceVariant": ((0x0018, 0x0021), "CS"),
    "ScanOptions": ((0x0018, 0x0022), "CS"),
    "MRAcquisitionType": ((0x0018, 0x0023), "CS"),
    "SliceThickness": ((0x0018, 0x0050), "DS"),
    "RepetitionTime": ((0x0018, 0x0080), "DS"),
    "EchoTime": ((0x0018, 0x0081), "DS"),
    "InversionTime": ((0x0018, 0x0082), "DS"),
    "NumberOfAverages": ((0x0018, 0x0083), "DS"),
    "ImagingFrequency": ((0x0018, 0x0084), "DS"),
    "EchoNumbers": ((0x0018, 0x0086), "IS"),
    "MagneticFieldStrength": ((0x0018, 0x0087), "DS"),
    "SpacingBetweenSlices": ((0x0018, 0x0088), "DS"),
    "EchoTrainLength": ((0x0018, 0x0091), "IS"),
    "PercentSampling": ((0x0018, 0x0093), "DS"),
    "PercentPhaseFieldOfView": ((0x0018, 0x0094), "DS"),
    "PixelBandwidth": ((0x0018, 0x0095), "DS"),
    "DeviceSerialNumber": ((0x0018, 0x1000), "LO"),
    "SoftwareVersions": ((0x0018, 0x1020), "LO"),
    "ProtocolName": ((0x0018, 0x1030), "LO"),
    "ReceiveCoilName": ((0x0018, 0x1250), "SH"),
    "TransmitCoilName": ((0x0018, 0x1251), "SH"),
    "AcquisitionMatrix": ((0x0018, 0x1310), "US"),
    "FlipAngle": ((0x0018, 0x1314), "DS"),
    "PatientPosition": ((0x0018, 0x5100), "CS"),
    "StudyInstanceUID": ((0x0020, 0x000D), "UI"),
    "SeriesInstanceUID": ((0x0020, 0x000E), "UI"),
    "SeriesNumber": ((0x0020, 0x0011), "IS"),
    "AcquisitionNumber": ((0x0020, 0x0012), "IS"),
    "InstanceNumber": ((0x0020, 0x0013), "IS"),
    "ImagePositionPatient": ((0x0020, 0x0032), "DS"),
    "ImageOrientationPatient": ((0x0020, 0x0037), "DS"),
    "SliceLocation": ((0x0020, 0x1041), "DS"),
    "SamplesPerPixel": ((0x0028, 0x0002), "US"),
    "PhotometricInterpretation": ((0x0028, 0x0004), "CS"),
    "NumberOfFrames": ((0x0028, 0x0008), "IS"),
    "Rows": ((0x0028, 0x0010), "US"),
    "Columns": ((0x0028, 0x0011), "US"),
    "PixelSpacing": ((0x0028, 0x0030), "DS"),
    "BitsAllocated": ((0x0028, 0x0100), "US"),
    "BitsStored": ((0x0028, 0x0101), "US"),
    "HighBit": ((0x0028, 0x0102), "US"),
    "PixelRepresentation": ((0x0028, 0x0103), "US"),
    "WindowCenter": ((0x0028, 0x1050), "DS"),
    "WindowWidth": ((0x0028, 0x1051), "DS"),
    "RescaleIntercept": ((0x0028, 0x1052), "DS"),
    "RescaleSlope": ((0x0028, 0x1053), "DS"),
    "PixelData": ((0x7FE0, 0x0010), "OW"),
}

_TAG_TO_VR = {tag: vr for tag, vr in TAG_DICTIONARY.values()}
_PIXEL_DATA = (0x7FE0, 0x0010)
_ITEM = (0xFFFE, 0xE000)
_ITEM_DELIM = (0xFFFE, 0xE00D)
_SEQ_DELIM = (0xFFFE, 0xE0DD)
_UNDEFINED = 0xFFFFFFFF


@dataclass
class DicomDataset:
    """Decoded top-level data elements of one DICOM file."""

    elements: dict[tuple[int, int], object] = field(default_factory=dict)
    transfer_syntax: str = IMPLICIT_LE

    def get(self, keyword_or_tag, default=None):
        tag = _resolve_tag(keyword_or_tag)
        return self.elements.get(tag, default)

    def get_first(self, keyword_or_tag, default=None):
        """First value of a possibly multi-valued element."""
        value = self.get(keyword_or_tag)
        if value is None:
            return default
        if isinstance(value, (list, tuple)):
            return value[0] if value else default
        return value


def _resolve_tag(keyword_or_tag) -> tuple[int, int]:
    if isinstance(keyword_or_tag, tuple):
        return keyword_or_tag
    entry = TAG_DICTIONARY.get(keyword_or_tag)
    if entry is not None:
        return entry[0]
    tag = parse_tag_spec(keyword_or_tag)
    if tag is None:
        raise KeyError(f"unknown DICOM tag keyword: {keyword_or_tag!r}")
    return tag


def parse_tag_spec(spec: str) -> tuple[int, int] | None:
    """Parse 'GGGG,EEEE' (optionally parenthesized) hex tag notation."""
    text = spec.strip().strip("()")
    parts = text.split(",")
    if len(parts) != 2:
        return None
    try:
        return int(parts[0], 16), int(parts[1], 16)
    except ValueError:
        return None


class _Reader:
    def __init__(self, data: bytes, pos: int = 0):
        self.data = data
        self.pos = pos

    def read(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise FormatError("truncated DICOM stream")
        chunk = self.data[self.pos:self.pos + n]
        self.pos += n
        return chunk

    def eof(self) -> bool:
        return self.pos >= len(self.data)


def _decode_value(vr: str, raw: bytes, endian: str):
    if vr in _STRING_VRS:
        text = raw.decode("latin-1", errors="replace").rstrip("\x00 ")
        if vr == "DS":
            vals = [float(p) for p in text.split("\\") if p.strip()]
            return vals[0] if len(vals) == 1 else vals
        if vr == "IS":
            vals = [int(p) for p in text.split("\\") if p.strip()]
            return vals[0] if len(vals) == 1 else vals
        if "\\" in text:
            return [p.strip() for p in text.split("\\")]
        return text.strip()
    fmt = {"US": "H", "SS": "h", "UL": "I", "SL": "i", "FL": "f", "FD": "d",
           "AT": "H"}.get(vr)
    if fmt is not None:
        size = struct.calcsize(fmt)
        if size == 0 or len(raw) % size:
            return raw
        vals = list(struct.unpack(f"{endian}{len(raw) // size}{fmt}", raw))
        return vals[0] if len(vals) == 1 else vals
    return raw  # OB/OW/UN and friends stay as bytes


def _skip_sequence(reader: _Reader, endian: str) -> None:
    """Skip an undefined-length sequence (items may nest)."""
    while True:
        group, elem = struct.unpack(f"{endian}HH", reader.read(4))
        length = struct.unpack(f"{endian}I", reader.read(4))[0]
        tag = (group, elem)
        if tag == _SEQ_DELIM:
            return
        if tag != _ITEM:
            raise FormatError(f"malformed sequence item tag {tag}")
        if length == _UNDEFINED:
            # Items of undefined length contain a nested element stream.
            _skip_undefined_item(reader, endian)
        else:
            reader.read(length)


def _skip_undefined_item(reader: _Reader, endian: str) -> None:
    while True:
        group, elem = struct.unpack(f"{endian}HH", reader.read(4))
        tag = (group, elem)
        if tag == _ITEM_DELIM:
            reader.read(4)
            return
        # Nested element inside the item; treat as implicit-VR layout.
        length = struct.unpack(f"{endian}I", reader.read(4))[0]
        if length == _UNDEFINED:
            _skip_sequence(reader, endian)
        else:
            reader.read(length)


def _parse_elements(reader: _Reader, explicit: bool, endian: str,
                    stop_at_group: int | None = None) -> dict[tuple[int, int], object]:
    elements: dict[tuple[int, int], object] = {}
    while not reader.eof():
        mark = reader.pos
        group, elem = struct.unpack(f"{endian}HH", reader.read(4))
        if stop_at_group is not None and group != stop_at_group:
            reader.pos = mark
            break
        tag = (group, elem)
        if explicit:
            vr = reader.read(2).decode("ascii", errors="replace")
            if vr in _LONG_VRS:
                reader.read(2)
                length = struct.unpack(f"{endian}I", reader.read(4))[0]
            elif vr in _KNOWN_VRS:
                length = struct.unpack(f"{endian}H", reader.read(2))[0]
            else:
                raise FormatError(f"unknown VR {vr!r} at tag {tag}")
        else:
            vr = _TAG_TO_VR.get(tag, "UN")
            length = struct.unpack(f"{endian}I", reader.read(4))[0]

        if length == _UNDEFINED:
            if tag == _PIXEL_DATA:
                raise FormatError("encapsulated (compressed) pixel data is not supported")
            _skip_sequence(reader, endian)
            continue
        if vr == "SQ":
            reader.read(length)
            continue
        raw = reader.read(length)
        elements[tag] = _decode_value(vr, raw, endian)
    return elements


def parse_dicom(data: bytes) -> DicomDataset:
    """Decode one DICOM file already read into memory."""
    if len(data) > 132 and data[128:132] == b"DICM":
        reader = _Reader(data, 132)
        meta = _parse_elements(reader, explicit=True, endian="<", stop_at_group=0x0002)
        syntax = meta.get((0x0002, 0x0010), EXPLICIT_LE)
        if isinstance(syntax, bytes):
            syntax = syntax.decode("ascii", errors="replace").rstrip("\x00")
    else:
        # Preamble-less file (seen with some .ima exports): sniff the VR style.
        reader = _Reader(data, 0)
        if len(data) < 8:
            raise FormatError("file too short to be DICOM")
        syntax = EXPLICIT_LE if data[4:6] in {v.encode() for v in _KNOWN_VRS} else IMPLICIT_LE

    if syntax == IMPLICIT_LE:
        explicit, endian = False, "<"
    elif syntax == EXPLICIT_LE:
        explicit, endian = True, "<"
    elif syntax == EXPLICIT_BE:
        explicit, endian = True, ">"
    else:
        raise FormatError(f"unsupported transfer syntax {syntax}")

    ds = DicomDataset(transfer_syntax=syntax)
    ds.elements = _parse_elements(reader, explicit=explicit, endian=endian)
    if not ds.elements:
        raise FormatError("no data elements decoded")
    return ds


def pixel_array(ds: DicomDataset) -> np.ndarray:
    """Decode stored pixel values, applying any declared linear rescale."""
    raw = ds.elements.get(_PIXEL_DATA)
    if raw is None:
        raise FormatError("missing PixelData")
    if not isinstance(raw, bytes):
        raise FormatError("unexpected PixelData encoding")
    rows = ds.get_first("Rows")
    cols = ds.get_first("Columns")
    if not rows or not cols:
        raise FormatError("missing Rows/Columns")
    samples = ds.get_first("SamplesPerPixel", 1)
    if samples != 1:
        raise FormatError(f"only single-sample (grayscale) pixel data supported, got {samples}")
    frames = int(ds.get_first("NumberOfFrames", 1) or 1)
    bits = ds.get_first("BitsAllocated", 16)
    signed = bool(ds.get_first("PixelRepresentation", 0))
    kind = {8: "i1" if signed else "u1",
            16: "i2" if signed else "u2",
            32: "i4" if signed else "u4"}.get(bits)
    if kind is None:
        raise FormatError(f"unsupported BitsAllocated {bits}")
    endian = ">" if ds.transfer_syntax == EXPLICIT_BE else "<"
    dtype = np.dtype(endian + kind)
    expected = rows * cols * frames * dtype.itemsize
    if len(raw) < expected:
        raise FormatError(f"pixel data truncated: {len(raw)} bytes < {expected}")
    arr = np.frombuffer(raw[:expected], dtype=dtype).reshape(frames, rows, cols)
    arr = arr.astype(np.float64)

    slope = ds.get_first("RescaleSlope")
    intercept = ds.get_first("RescaleIntercept")
    if slope is not None or intercept is not None:
        arr = arr * float(slope if slope is not None else 1.0) + \
            float(intercept if intercept is not None else 0.0)
    return arr[0] if frames == 1 else arr


def slice_sort_key(ds: DicomDataset, fallback: str):
    """Ordering key along the acquisition axis.

    Primary: ImagePositionPatient projected on the slice normal (cross product
    of the row/column direction cosines). Ties or missing geometry fall back
    to InstanceNumber, then to the file name.
    """
    position = ds.get("ImagePositionPatient")
    orientation = ds.get("ImageOrientationPatient")
    projection = None
    if isinstance(position, list) and len(position) == 3 and \
            isinstance(orientation, list) and len(orientation) == 6:
        row = np.array(orientation[:3], dtype=float)
        col = np.array(orientation[3:], dtype=float)
        normal = np.cross(row, col)
        projection = float(np.dot(np.array(position, dtype=float), normal))
    instance = ds.get_first("InstanceNumber")
    return (
        0 if projection is not None else 1,
        projection if projection is not None else 0.0,
        instance if isinstance(instance, int) else 0,
        fallback,
    )
