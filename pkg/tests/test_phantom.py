"""Phantom generation and artifact operators."""

from __future__ import annotations

import numpy as np
import pytest

from cohortqc import phantom
from cohortqc.volume_io.nifti import read_nifti


class TestGenerate:
    def test_disk_mask_is_analytic_membership(self):
        spec = phantom.PhantomSpec(dims=(1, 128, 128), radii=(40, 40))
        _, mask = phantom.generate(spec)
        ii, jj = np.mgrid[0:128, 0:128]
        inside = (ii - 63.5) ** 2 + (jj - 63.5) ** 2 <= 40.0 ** 2
        assert mask[0].sum() == inside.sum()

    def test_deterministic(self):
        spec = phantom.PhantomSpec(dims=(2, 64, 64), radii=(20, 20), seed=5,
                                   artifacts=(phantom.Noise(8.0),))
        v1, m1 = phantom.generate(spec)
        v2, m2 = phantom.generate(spec)
        np.testing.assert_array_equal(v1.voxels, v2.voxels)
        np.testing.assert_array_equal(m1, m2)

    def test_clean_foreground_mean(self):
        spec = phantom.PhantomSpec(dims=(1, 64, 64), radii=(20, 20),
                                   fg_intensity=100.0, bg_intensity=0.0)
        volume, mask = phantom.generate(spec)
        assert volume.voxels[mask].mean() == pytest.approx(100.0)

    def test_invalid_geometry(self):
        with pytest.raises(ValueError):
            phantom.PhantomSpec(dims=(1, 64, 64), radii=(40, 40))  # does not fit
        with pytest.raises(ValueError):
            phantom.PhantomSpec(dims=(1, 64, 64), radii=(10, 10),
                                fg_intensity=5.0, bg_intensity=5.0)

    def test_ellipse(self):
        spec = phantom.PhantomSpec(dims=(1, 64, 64), shape="ellipse", radii=(10, 20))
        _, mask = phantom.generate(spec)
        assert mask[0, 32, 50] and not mask[0, 50, 32]

    def test_artifacts_never_change_dims_or_spacing(self):
        spec = phantom.PhantomSpec(dims=(2, 64, 64), radii=(20, 20),
                                   spacing=(0.5, 0.7, 3.0),
                                   artifacts=(phantom.Noise(5.0), phantom.Bias(0.3),
                                              phantom.Ghosting(8, 0.3)))
        volume, _ = phantom.generate(spec)
        assert volume.dims == (2, 64, 64)
        assert volume.spacing == (0.5, 0.7, 3.0)


class TestNoise:
    def test_identity_at_zero(self):
        spec = phantom.PhantomSpec(dims=(1, 32, 32), radii=(10, 10))
        volume, _ = phantom.generate(spec)
        noisy = phantom.apply_noise(volume, 0.0, seed=1)
        np.testing.assert_array_equal(noisy.voxels, volume.voxels)

    def test_sample_variance_close_to_sigma_squared(self):
        spec = phantom.PhantomSpec(dims=(10, 128, 128), radii=(40, 40))
        volume, _ = phantom.generate(spec)
        noisy = phantom.apply_noise(volume, 10.0, seed=2)
        residual = noisy.voxels - volume.voxels
        assert residual.var() == pytest.approx(100.0, rel=0.05)

    def test_deterministic_per_seed(self):
        spec = phantom.PhantomSpec(dims=(1, 32, 32), radii=(10, 10))
        volume, _ = phantom.generate(spec)
        a = phantom.apply_noise(volume, 5.0, seed=3)
        b = phantom.apply_noise(volume, 5.0, seed=3)
        np.testing.assert_array_equal(a.voxels, b.voxels)


class TestBias:
    def test_identity_at_zero(self):
        spec = phantom.PhantomSpec(dims=(1, 32, 32), radii=(10, 10))
        volume, _ = phantom.generate(spec)
        np.testing.assert_array_equal(phantom.apply_bias(volume, 0.0).voxels, volume.voxels)

    def test_first_column_scaled_exactly(self):
        volume = phantom.generate(phantom.PhantomSpec(dims=(1, 32, 32), radii=(15, 15),
                                                      bg_intensity=10.0))[0]
        biased = phantom.apply_bias(volume, 0.4)
        np.testing.assert_allclose(biased.voxels[:, :, 0], volume.voxels[:, :, 0] * 0.6)
        np.testing.assert_allclose(biased.voxels[:, :, -1], volume.voxels[:, :, -1])


class TestGhosting:
    def test_zero_shift_identity(self):
        spec = phantom.PhantomSpec(dims=(1, 32, 32), radii=(10, 10))
        volume, _ = phantom.generate(spec)
        ghosted = phantom.apply_ghosting(volume, 0, 0.4)
        np.testing.assert_allclose(ghosted.voxels, volume.voxels)

    def test_small_alpha_approaches_identity(self):
        spec = phantom.PhantomSpec(dims=(1, 32, 32), radii=(10, 10))
        volume, _ = phantom.generate(spec)
        ghosted = phantom.apply_ghosting(volume, 8, 1e-9)
        np.testing.assert_allclose(ghosted.voxels, volume.voxels, atol=1e-6)

    def test_blend_formula(self):
        spec = phantom.PhantomSpec(dims=(1, 16, 16), radii=(5, 5))
        volume, _ = phantom.generate(spec)
        ghosted = phantom.apply_ghosting(volume, 4, 0.3)
        expected = 0.7 * volume.voxels + 0.3 * np.roll(volume.voxels, 4, axis=1)
        np.testing.assert_allclose(ghosted.voxels, expected)


class TestNiftiExport:
    def test_round_trips_through_loader(self, tmp_path):
        spec = phantom.PhantomSpec(dims=(3, 32, 32), radii=(10, 10),
                                   spacing=(0.9, 1.1, 2.0),
                                   artifacts=(phantom.Noise(4.0),), seed=7)
        volume, _ = phantom.generate(spec)
        phantom.save_nifti(volume, tmp_path / "p.nii")
        voxels, spacing = read_nifti(tmp_path / "p.nii")
        np.testing.assert_allclose(voxels, volume.voxels, rtol=1e-6)
        assert spacing == pytest.approx((0.9, 1.1, 2.0), rel=1e-6)
