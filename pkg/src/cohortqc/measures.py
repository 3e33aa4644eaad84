"""Per-slice quality measurements and their per-volume aggregation.

Every measurement is computed slice by slice on the foreground/background
partition and averaged over the slices where it is defined. Undefined cases
(zero denominators, missing patches, empty regions) yield None, which is
serialized as "NA" downstream; no infinities ever leave this module.
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .foreground import ForegroundMask
from .volume_io.types import Volume

MEASURE_NAMES = ("MEAN", "RNG", "VAR", "CV", "CPP", "PSNR", "SNR1", "SNR2",
                 "SNR3", "SNR4", "CNR", "CVP", "CJV", "EFC", "FBER")

PATCH_SIZE = 5
MAX_PATCH_REJECTIONS = 1000

_LAPLACIAN = np.array([[-1, -1, -1], [-1, 8, -1], [-1, -1, -1]], dtype=np.float64) / 8.0


@dataclass
class MeasureRecord:
    """Aggregated measurements of one dataset (or one object in -c mode)."""

    values: dict[str, float | None] = field(default_factory=dict)

    def get(self, name: str) -> float | None:
        return self.values.get(name)


def dataset_rng(seed: int, dataset_id: str, object_index: int = 0) -> np.random.Generator:
    """Per-dataset (and per-object) generator derived from the global seed."""
    sequence = np.random.SeedSequence([seed, zlib.crc32(dataset_id.encode("utf-8")), object_index])
    return np.random.default_rng(sequence)


def _sample_window(slice_: np.ndarray, region: np.ndarray,
                   rng: np.random.Generator) -> np.ndarray | None:
    rows, cols = region.shape
    if rows < PATCH_SIZE or cols < PATCH_SIZE or region.sum() < PATCH_SIZE ** 2:
        return None
    rejections = 0
    while rejections < MAX_PATCH_REJECTIONS:
        i = int(rng.integers(0, rows - PATCH_SIZE + 1))
        j = int(rng.integers(0, cols - PATCH_SIZE + 1))
        if region[i:i + PATCH_SIZE, j:j + PATCH_SIZE].all():
            return slice_[i:i + PATCH_SIZE, j:j + PATCH_SIZE].astype(np.float64, copy=True)
        rejections += 1
    return None


def sample_patches(slice_: np.ndarray, fg_mask: np.ndarray, bg_mask: np.ndarray,
                   rng: np.random.Generator) -> tuple[np.ndarray | None, np.ndarray | None]:
    """Draw one 5x5 patch fully inside the foreground and one inside the
    background. A patch is missing when no window fits or after 1000 rejected
    draws."""
    fp = _sample_window(slice_, fg_mask, rng)
    bp = _sample_window(slice_, bg_mask, rng)
    return fp, bp


def first_order(fg_values: np.ndarray) -> tuple[float | None, float | None,
                                                float | None, float | None]:
    """MEAN, RNG, VAR (population), and CV of the foreground intensities."""
    if fg_values.size == 0:
        return None, None, None, None
    mean = float(fg_values.mean())
    rng_ = float(fg_values.max() - fg_values.min())
    var = float(fg_values.var())
    cv = float(np.sqrt(var) / mean) if mean != 0 else None
    return mean, rng_, var, cv


def cpp(slice_: np.ndarray, fg_mask: np.ndarray) -> float | None:
    """Mean Laplacian response over the foreground (replicate-edge padding)."""
    if not fg_mask.any():
        return None
    response = ndimage.convolve(slice_.astype(np.float64), _LAPLACIAN, mode="nearest")
    return float(response[fg_mask].mean())


def psnr(slice_: np.ndarray, fg_mask: np.ndarray) -> float | None:
    """Peak SNR of the foreground against its 5x5 median-filtered version (dB)."""
    if not fg_mask.any():
        return None
    filtered = ndimage.median_filter(slice_.astype(np.float64), size=PATCH_SIZE, mode="nearest")
    fg = slice_[fg_mask]
    mse = float(((fg - filtered[fg_mask]) ** 2).mean())
    peak = float(fg.max()) ** 2
    if mse == 0.0 or peak == 0.0:
        return None
    return float(10.0 * np.log10(peak / mse))


def snr_suite(fg_values: np.ndarray, bg_values: np.ndarray,
              fp: np.ndarray | None, bp: np.ndarray | None
              ) -> tuple[float | None, float | None, float | None, float | None]:
    """The four signal-to-noise variants (SNR1..SNR4)."""
    sigma_bg = float(bg_values.std()) if bg_values.size else None
    snr1 = snr2 = snr3 = snr4 = None
    if sigma_bg:
        if fg_values.size:
            snr1 = float(fg_values.std()) / sigma_bg
        if fp is not None:
            snr2 = float(fp.mean()) / sigma_bg
    if fp is not None:
        centered_sd = float((fp - fp.mean()).std())
        if centered_sd > 0:
            snr3 = float(fp.mean()) / centered_sd
    if fp is not None and bp is not None:
        sigma_bp = float(bp.std())
        if sigma_bp > 0:
            snr4 = float(fp.mean()) / sigma_bp
    return snr1, snr2, snr3, snr4


def cnr(fp: np.ndarray | None, bp: np.ndarray | None) -> float | None:
    """Contrast-to-noise ratio: mean patch difference over background patch SD."""
    if fp is None or bp is None:
        return None
    sigma_bp = float(bp.std())
    if sigma_bp == 0:
        return None
    return float((fp - bp).mean()) / sigma_bp


def cvp(fp: np.ndarray | None) -> float | None:
    """Coefficient of variation of the foreground patch."""
    if fp is None:
        return None
    mean = float(fp.mean())
    if mean == 0:
        return None
    return float(fp.std()) / mean


def cjv(fg_values: np.ndarray, bg_values: np.ndarray) -> float | None:
    """Coefficient of joint variation between foreground and background."""
    if fg_values.size == 0 or bg_values.size == 0:
        return None
    mu_f, mu_b = float(fg_values.mean()), float(bg_values.mean())
    if mu_f == mu_b:
        return None
    return (float(fg_values.std()) + float(bg_values.std())) / abs(mu_f - mu_b)


def efc(slice_: np.ndarray) -> float | None:
    """Entropy focus criterion of a slice.

    Pixels that are zero (or negative, which is outside the formula's domain)
    contribute nothing to the entropy term. Undefined when the slice has no
    positive energy or the entropy term is not positive.
    """
    arr = np.asarray(slice_, dtype=np.float64)
    pixel_count = arr.size
    f_max = float(np.sqrt((arr ** 2).sum()))
    if f_max == 0.0:
        return None
    x = arr / f_max
    positive = x[x > 0]
    entropy = float(-(positive * np.log(positive)).sum())
    if entropy <= 0.0:
        return None
    root_nm = float(np.sqrt(pixel_count))
    return root_nm * float(np.log(entropy / root_nm))


def fber(fg_values: np.ndarray, bg_values: np.ndarray) -> float | None:
    """Foreground-background energy ratio (median |F|^2 over median |B|^2)."""
    if fg_values.size == 0 or bg_values.size == 0:
        return None
    denom = float(np.median(np.abs(bg_values) ** 2))
    if denom == 0.0:
        return None
    return float(np.median(np.abs(fg_values) ** 2)) / denom


def measure_slice(slice_: np.ndarray, fg_mask: np.ndarray, bg_mask: np.ndarray,
                  fp: np.ndarray | None, bp: np.ndarray | None) -> dict[str, float | None]:
    """All 15 measurements of one slice given its partition and patches."""
    slice_ = np.asarray(slice_, dtype=np.float64)
    fg = slice_[fg_mask]
    bg = slice_[bg_mask]
    mean, rng_, var, cv = first_order(fg)
    snr1, snr2, snr3, snr4 = snr_suite(fg, bg, fp, bp)
    return {
        "MEAN": mean,
        "RNG": rng_,
        "VAR": var,
        "CV": cv,
        "CPP": cpp(slice_, fg_mask),
        "PSNR": psnr(slice_, fg_mask),
        "SNR1": snr1,
        "SNR2": snr2,
        "SNR3": snr3,
        "SNR4": snr4,
        "CNR": cnr(fp, bp),
        "CVP": cvp(fp),
        "CJV": cjv(fg, bg),
        "EFC": efc(np.where(fg_mask, slice_, 0.0)),
        "FBER": fber(fg, bg),
    }


def compute_record(volume: Volume, mask: ForegroundMask,
                   rng: np.random.Generator) -> MeasureRecord:
    """Aggregate per-slice measurements into one record.

    Each measure is the arithmetic mean over the slices where it is defined;
    degenerate slices are excluded entirely. ``rng`` drives patch sampling, so
    identical volume + mask + generator state reproduce the record bit for bit.
    """
    accumulator: dict[str, list[float]] = {name: [] for name in MEASURE_NAMES}
    for z in range(volume.num_slices):
        if mask.degenerate[z]:
            continue
        fg_mask = mask.masks[z]
        if not fg_mask.any():
            continue
        bg_mask = _background_for(mask, z)
        slice_ = volume.voxels[z]
        fp, bp = sample_patches(slice_, fg_mask, bg_mask, rng)
        for name, value in measure_slice(slice_, fg_mask, bg_mask, fp, bp).items():
            if value is not None:
                accumulator[name].append(value)
    values = {name: (float(np.mean(acc)) if acc else None)
              for name, acc in accumulator.items()}
    return MeasureRecord(values=values)


def _background_for(mask: ForegroundMask, z: int) -> np.ndarray:
    background = getattr(mask, "background", None)
    if background is not None:
        return background[z]
    return ~mask.masks[z]
