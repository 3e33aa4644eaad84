"""Per-slice unsupervised foreground/background separation.

The detector blends two complementary views of each slice: the raw
intensities (stable under noise, fooled by shading) and a histogram-equalized
version (stable under shading, noise-amplifying). Both are thresholded with a
volume-averaged Otsu threshold, the surviving intensities are mixed with
weights (w1, w2), the mixture is Otsu-thresholded again, and the result is
closed under a per-slice convex hull.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage
from skimage.morphology import convex_hull_image

from .errors import DatasetError, DegenerateSliceError
from .volume_io.types import Volume

#: Connected components smaller than this fraction of the slice area are
#: treated as noise, both before hull filling and in per-object mode.
MIN_OBJECT_FRACTION = 0.005

DEFAULT_WEIGHTS = (0.5, 0.5)

_STRUCTURE_2D = np.ones((3, 3), dtype=bool)
_STRUCTURE_3D = np.ones((3, 3, 3), dtype=bool)


@dataclass
class ForegroundMask:
    """Binary foreground partition of a volume.

    ``masks[z]`` is the final foreground of slice z; ``prehull[z]`` is the
    thresholded mask before hull filling (input to object splitting);
    ``degenerate[z]`` marks slices with no usable contrast (empty foreground).
    In per-object mode ``background`` is the shared air region (complement of
    all kept objects); otherwise the background is simply ``~masks``.
    """

    masks: np.ndarray
    prehull: np.ndarray
    degenerate: np.ndarray
    object_count: np.ndarray
    mode: str = "single-region"
    object_index: int | None = None
    background: np.ndarray | None = None


def equalize_histogram(slice_: np.ndarray) -> np.ndarray:
    """Map intensities through their empirical CDF.

    Output values lie in (0, 1]; the mapping is monotone non-decreasing, so
    intensity ranks are preserved. A constant slice stays constant.
    """
    flat = np.asarray(slice_, dtype=np.float64).ravel()
    if flat.size == 0:
        raise ValueError("empty slice")
    values, counts = np.unique(flat, return_counts=True)
    cdf = np.cumsum(counts, dtype=np.float64) / flat.size
    return cdf[np.searchsorted(values, flat)].reshape(slice_.shape)


def otsu_threshold(values: np.ndarray, bins: int = 256) -> float:
    """Threshold maximizing between-class variance over a binned histogram.

    Raises DegenerateSliceError when the sample has fewer than two distinct
    values. The returned threshold is the center of the optimal cut bin, so it
    lies strictly inside the sample range.
    """
    values = np.asarray(values, dtype=np.float64).ravel()
    vmin = values.min()
    vmax = values.max()
    if not vmax > vmin:
        raise DegenerateSliceError("constant sample: Otsu threshold undefined")
    hist, edges = np.histogram(values, bins=bins, range=(vmin, vmax))
    hist = hist.astype(np.float64)
    centers = (edges[:-1] + edges[1:]) / 2.0

    weight0 = np.cumsum(hist)
    weight1 = weight0[-1] - weight0
    cum_sum = np.cumsum(hist * centers)
    with np.errstate(divide="ignore", invalid="ignore"):
        mean0 = cum_sum / weight0
        mean1 = (cum_sum[-1] - cum_sum) / weight1
        between = weight0 * weight1 * (mean0 - mean1) ** 2
    between = np.nan_to_num(between[:-1], nan=-1.0)
    return float(centers[int(np.argmax(between))])


def _normalize(slice_: np.ndarray) -> np.ndarray | None:
    vmin = slice_.min()
    vmax = slice_.max()
    if not vmax > vmin:
        return None
    return (slice_ - vmin) / (vmax - vmin)


def _hull_fill(mask: np.ndarray) -> np.ndarray:
    # offset_coordinates=False keeps the operation idempotent, so every
    # foreground component equals its own convex hull exactly
    return convex_hull_image(mask, offset_coordinates=False)


def _drop_small_components(mask: np.ndarray, min_area: float) -> tuple[np.ndarray, int]:
    """Remove 2-D components below the area floor; returns (mask, kept count)."""
    if not mask.any():
        return mask, 0
    labels, n = ndimage.label(mask, structure=_STRUCTURE_2D)
    if n == 0:
        return mask, 0
    areas = np.bincount(labels.ravel())[1:]
    keep = np.flatnonzero(areas >= min_area) + 1
    return np.isin(labels, keep), len(keep)


def detect_foreground(volume: Volume,
                      weights: tuple[float, float] = DEFAULT_WEIGHTS) -> ForegroundMask:
    """Run the blended-threshold detector over every slice of a volume."""
    w1, w2 = weights
    if abs(w1 + w2 - 1.0) > 1e-9:
        raise ValueError(f"weights must sum to 1, got {weights}")

    voxels = volume.voxels
    num, rows, cols = voxels.shape
    min_area = MIN_OBJECT_FRACTION * rows * cols

    normalized: list[np.ndarray | None] = []
    equalized: list[np.ndarray | None] = []
    raw_thresholds: list[float] = []
    eq_thresholds: list[float] = []
    for z in range(num):
        norm = _normalize(voxels[z])
        normalized.append(norm)
        if norm is None:
            equalized.append(None)
            continue
        eq = equalize_histogram(voxels[z])
        equalized.append(eq)
        raw_thresholds.append(otsu_threshold(norm))
        eq_thresholds.append(otsu_threshold(eq))

    if not raw_thresholds:
        raise DatasetError(f"{volume.id}: all slices are degenerate (constant)")
    mean_raw_threshold = float(np.mean(raw_thresholds))
    mean_eq_threshold = float(np.mean(eq_thresholds))

    masks = np.zeros(voxels.shape, dtype=bool)
    prehull = np.zeros(voxels.shape, dtype=bool)
    degenerate = np.zeros(num, dtype=bool)
    object_count = np.zeros(num, dtype=np.int64)
    for z in range(num):
        norm = normalized[z]
        if norm is None:
            degenerate[z] = True
            continue
        eq = equalized[z]
        raw_estimate = np.where(norm > mean_raw_threshold, norm, 0.0)
        eq_estimate = np.where(eq > mean_eq_threshold, eq, 0.0)
        combined = w1 * raw_estimate + w2 * eq_estimate
        try:
            threshold = otsu_threshold(combined)
        except DegenerateSliceError:
            degenerate[z] = True
            continue
        thresholded, count = _drop_small_components(combined > threshold, min_area)
        if not thresholded.any():
            degenerate[z] = True
            continue
        prehull[z] = thresholded
        masks[z] = _hull_fill(thresholded)
        object_count[z] = count

    if degenerate.all():
        raise DatasetError(f"{volume.id}: all slices are degenerate (constant)")
    return ForegroundMask(masks=masks, prehull=prehull, degenerate=degenerate,
                          object_count=object_count, mode="single-region")


def split_objects(mask: ForegroundMask) -> list[ForegroundMask]:
    """Split a detection into individual foreground objects.

    Objects are 3-D connected components of the pre-hull threshold mask, each
    hull-filled per slice independently. Components whose largest per-slice
    footprint is below the area floor are discarded as noise.
    """
    num, rows, cols = mask.prehull.shape
    min_area = MIN_OBJECT_FRACTION * rows * cols
    labels, n = ndimage.label(mask.prehull, structure=_STRUCTURE_3D)

    objects: list[ForegroundMask] = []
    for label in range(1, n + 1):
        component = labels == label
        footprints = component.sum(axis=(1, 2))
        if footprints.max() < min_area:
            continue
        obj_masks = np.zeros_like(component)
        for z in range(num):
            if component[z].any():
                obj_masks[z] = _hull_fill(component[z])
        objects.append(ForegroundMask(
            masks=obj_masks,
            prehull=component,
            degenerate=mask.degenerate | ~component.any(axis=(1, 2)),
            object_count=component.any(axis=(1, 2)).astype(np.int64),
            mode="per-object",
            object_index=len(objects),
        ))
    if objects:
        union = np.zeros_like(mask.prehull)
        for obj in objects:
            union |= obj.masks
        shared_background = ~union
        for obj in objects:
            obj.background = shared_background
    return objects
