"""Synthetic MR-like volumes with controlled artifacts for testing and QC.

Generators are deterministic under a fixed seed and return the analytic
ground-truth foreground mask alongside the volume, so detection and measure
behavior can be checked against exact geometry.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .volume_io.nifti import write_nifti
from .volume_io.types import Volume


@dataclass(frozen=True)
class Noise:
    """Additive i.i.d. zero-mean Gaussian noise."""
    sigma: float


@dataclass(frozen=True)
class Bias:
    """Multiplicative linear shading from (1 - strength) to 1 across columns."""
    strength: float


@dataclass(frozen=True)
class Ghosting:
    """Blend with a copy circularly shifted along the row axis."""
    shift_px: int
    alpha: float


Artifact = Noise | Bias | Ghosting


@dataclass
class PhantomSpec:
    dims: tuple[int, int, int]  # (NUM, ROWS, COLS)
    shape: str = "disk"  # "disk" | "ellipse"
    center: tuple[float, float] | None = None  # (row, col); slice center if None
    radii: tuple[float, float] = (40.0, 40.0)  # (row radius, col radius)
    fg_intensity: float = 100.0
    bg_intensity: float = 0.0
    spacing: tuple[float, float, float] = (1.0, 1.0, 1.0)
    artifacts: tuple[Artifact, ...] = ()
    seed: int = 0
    id: str = "phantom"

    def __post_init__(self) -> None:
        num, rows, cols = self.dims
        if num < 1 or rows < 1 or cols < 1:
            raise ValueError(f"invalid dims {self.dims}")
        if self.shape not in ("disk", "ellipse"):
            raise ValueError(f"unknown shape {self.shape!r}")
        if self.fg_intensity == self.bg_intensity:
            raise ValueError("foreground and background intensity must differ")
        center = self.center if self.center is not None else ((rows - 1) / 2, (cols - 1) / 2)
        ry, rx = self.radii
        if self.shape == "disk" and ry != rx:
            raise ValueError("disk requires equal radii")
        if ry <= 0 or rx <= 0:
            raise ValueError(f"radii must be positive, got {self.radii}")
        if center[0] - ry < 0 or center[0] + ry > rows - 1 or \
                center[1] - rx < 0 or center[1] + rx > cols - 1:
            raise ValueError("shape does not fit inside the slice")


def generate(spec: PhantomSpec) -> tuple[Volume, np.ndarray]:
    """Build the phantom volume and its analytic foreground mask."""
    num, rows, cols = spec.dims
    center = spec.center if spec.center is not None else ((rows - 1) / 2, (cols - 1) / 2)
    ry, rx = spec.radii
    ii, jj = np.mgrid[0:rows, 0:cols]
    inside = ((ii - center[0]) / ry) ** 2 + ((jj - center[1]) / rx) ** 2 <= 1.0
    slice_ = np.where(inside, spec.fg_intensity, spec.bg_intensity).astype(np.float64)
    voxels = np.repeat(slice_[None, :, :], num, axis=0)
    mask = np.repeat(inside[None, :, :], num, axis=0)

    volume = Volume(id=spec.id, voxels=voxels, spacing=spec.spacing)
    seeds = np.random.SeedSequence(spec.seed).spawn(len(spec.artifacts))
    for artifact, child in zip(spec.artifacts, seeds):
        if isinstance(artifact, Noise):
            volume = apply_noise(volume, artifact.sigma, rng=np.random.default_rng(child))
        elif isinstance(artifact, Bias):
            volume = apply_bias(volume, artifact.strength)
        elif isinstance(artifact, Ghosting):
            volume = apply_ghosting(volume, artifact.shift_px, artifact.alpha)
        else:
            raise ValueError(f"unknown artifact {artifact!r}")
    return volume, mask


def apply_noise(volume: Volume, sigma: float,
                seed: int | None = None,
                rng: np.random.Generator | None = None) -> Volume:
    """Add i.i.d. zero-mean Gaussian noise; sigma = 0 is the identity."""
    if sigma < 0:
        raise ValueError("sigma must be >= 0")
    if sigma == 0:
        return Volume(id=volume.id, voxels=volume.voxels.copy(), spacing=volume.spacing)
    if rng is None:
        rng = np.random.default_rng(seed)
    noisy = volume.voxels + rng.normal(0.0, sigma, size=volume.voxels.shape)
    return Volume(id=volume.id, voxels=noisy, spacing=volume.spacing)


def apply_bias(volume: Volume, strength: float) -> Volume:
    """Multiply by a linear field rising from (1 - strength) to 1 across columns."""
    if not 0 <= strength < 1:
        raise ValueError("strength must be in [0, 1)")
    cols = volume.voxels.shape[2]
    if cols > 1:
        gain = (1.0 - strength) + strength * np.arange(cols) / (cols - 1)
    else:
        gain = np.array([1.0 - strength])
    return Volume(id=volume.id, voxels=volume.voxels * gain, spacing=volume.spacing)


def apply_ghosting(volume: Volume, shift_px: int, alpha: float) -> Volume:
    """Blend in a row-shifted copy: (1 - alpha) * v + alpha * roll(v, shift)."""
    if not 0 < alpha < 1:
        raise ValueError("alpha must be in (0, 1)")
    shifted = np.roll(volume.voxels, shift_px, axis=1)
    ghosted = (1.0 - alpha) * volume.voxels + alpha * shifted
    return Volume(id=volume.id, voxels=ghosted, spacing=volume.spacing)


def save_nifti(volume: Volume, path) -> None:
    """Write the phantom as single-file NIfTI so it can flow through the pipeline."""
    write_nifti(path, volume.voxels, volume.spacing)
