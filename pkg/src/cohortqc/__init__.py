"""Cohort-scale quality control for structural MRI volumes."""

__version__ = "0.1.0"

from .volume_io.types import DatasetDescriptor, MetadataRecord, Volume  # noqa: F401
