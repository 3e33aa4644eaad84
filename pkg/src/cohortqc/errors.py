"""Exception types shared across the package."""


class CohortQCError(Exception):
    """Base class for all package errors."""


class FormatError(CohortQCError):
    """A file could not be decoded (corrupt, truncated, or unsupported)."""


class DatasetError(CohortQCError):
    """A dataset is structurally invalid (e.g. inconsistent slice dims)."""


class DegenerateSliceError(CohortQCError):
    """An operation received a slice with no usable intensity contrast."""
