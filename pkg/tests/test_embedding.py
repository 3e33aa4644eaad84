"""Feature matrix construction, whitening, and the 2-D embeddings."""

from __future__ import annotations

import numpy as np
import pytest
from sklearn.metrics import silhouette_score

from cohortqc.embedding import (
    FEATURE_COLUMNS,
    FeatureMatrix,
    compute_embeddings,
    tsne_embedding,
    umap_embedding,
    whiten,
)
from cohortqc.measures import MEASURE_NAMES, MeasureRecord
from cohortqc.volume_io.types import MetadataRecord


def make_features(values: np.ndarray) -> FeatureMatrix:
    ids = tuple(f"d{i}" for i in range(values.shape[0]))
    return FeatureMatrix(ids=ids, values=values.copy(), missing=np.isnan(values))


def three_site_matrix(n_per_site=20, offset=10.0, seed=0):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(3 * n_per_site, len(FEATURE_COLUMNS)))
    X[n_per_site:2 * n_per_site] += offset
    X[2 * n_per_site:] -= offset
    labels = [0] * n_per_site + [1] * n_per_site + [2] * n_per_site
    return X, labels


class TestFeatureMatrix:
    def test_from_records_order_and_missing(self):
        meta = MetadataRecord(ROWS=64, COLS=64, NUM=10, VRX=0.5, VRY=0.5, VRZ=3.0,
                              TR=500.0, TE=None)
        record = MeasureRecord(values={name: float(i) for i, name in enumerate(MEASURE_NAMES)})
        record.values["PSNR"] = None
        fm = FeatureMatrix.from_records(["a"], [meta], [record])
        assert fm.values.shape == (1, 23)
        assert fm.values[0, FEATURE_COLUMNS.index("VRX")] == 0.5
        assert fm.missing[0, FEATURE_COLUMNS.index("TE")]
        assert fm.missing[0, FEATURE_COLUMNS.index("PSNR")]
        assert fm.values[0, FEATURE_COLUMNS.index("NUM")] == 10.0


class TestWhiten:
    def test_two_value_column(self):
        values = np.tile(np.nan, (2, 23))
        values[:, 0] = [1.0, 3.0]
        values[:, 1] = [5.0, 5.0]
        out = whiten(make_features(values))
        np.testing.assert_allclose(out.values[:, 0], [-1.0, 1.0])

    def test_constant_column_zeroed_and_flagged(self):
        values = np.zeros((3, 23))
        values[:, 5] = 7.0
        values[:, 0] = [1.0, 2.0, 3.0]
        out = whiten(make_features(values))
        assert np.all(out.values[:, 5] == 0.0)
        assert FEATURE_COLUMNS[5] in out.constant_columns

    def test_missing_becomes_zero_and_row_flagged(self):
        values = np.zeros((3, 23))
        values[:, 0] = [1.0, 2.0, 3.0]
        values[1, 3] = np.nan
        values[0, 3] = 2.0
        values[2, 3] = 4.0
        out = whiten(make_features(values))
        assert out.values[1, 3] == 0.0
        assert list(out.imputed_rows) == [False, True, False]

    def test_idempotent(self):
        rng = np.random.default_rng(1)
        values = rng.normal(size=(12, 23)) * rng.uniform(0.1, 50, size=23)
        once = whiten(make_features(values)).values
        twice = whiten(make_features(once)).values
        np.testing.assert_allclose(twice, once, atol=1e-12)

    def test_needs_two_datasets(self):
        with pytest.raises(ValueError):
            whiten(make_features(np.zeros((1, 23))))


class TestTsne:
    def test_cluster_separation(self):
        X, labels = three_site_matrix()
        coords = tsne_embedding(whiten(make_features(X)).values, seed=0)
        assert silhouette_score(coords, labels) > 0.5

    def test_duplicates_near_coincident(self):
        X, _ = three_site_matrix()
        Xd = np.vstack([X, X[0]])
        coords = tsne_embedding(Xd, seed=0)
        span = max(np.ptp(coords[:, 0]), np.ptp(coords[:, 1]))
        assert np.linalg.norm(coords[0] - coords[-1]) < 0.01 * span

    def test_deterministic(self):
        X, _ = three_site_matrix()
        a = tsne_embedding(X, seed=3)
        b = tsne_embedding(X, seed=3)
        np.testing.assert_array_equal(a, b)

    def test_too_few_datasets_omitted(self, caplog):
        with caplog.at_level("WARNING"):
            assert tsne_embedding(np.zeros((4, 23)), seed=0) is None
        assert any("t-SNE" in m for m in caplog.messages)


class TestUmap:
    def test_cluster_separation(self):
        X, labels = three_site_matrix()
        coords = umap_embedding(whiten(make_features(X)).values, seed=0)
        assert silhouette_score(coords, labels) > 0.5

    def test_duplicates_coincident(self):
        X, _ = three_site_matrix()
        Xd = np.vstack([X, X[0]])
        coords = umap_embedding(Xd, seed=0)
        span = max(np.ptp(coords[:, 0]), np.ptp(coords[:, 1]))
        assert np.linalg.norm(coords[0] - coords[-1]) < 0.01 * span

    def test_deterministic(self):
        X, _ = three_site_matrix()
        a = umap_embedding(X, seed=4)
        b = umap_embedding(X, seed=4)
        np.testing.assert_array_equal(a, b)

    def test_too_few_datasets_omitted(self, caplog):
        with caplog.at_level("WARNING"):
            assert umap_embedding(np.zeros((2, 23)), seed=0) is None

    def test_small_cohort_shrinks_neighbors(self):
        rng = np.random.default_rng(0)
        coords = umap_embedding(rng.normal(size=(6, 23)), seed=0)
        assert coords.shape == (6, 2)
        assert np.isfinite(coords).all()


class TestPermutationStructure:
    def test_separation_survives_row_permutation(self):
        X, labels = three_site_matrix()
        rng = np.random.default_rng(5)
        perm = rng.permutation(len(labels))
        Xp = X[perm]
        labels_p = [labels[i] for i in perm]
        white = whiten(make_features(Xp)).values
        assert silhouette_score(tsne_embedding(white, seed=0), labels_p) > 0.5
        assert silhouette_score(umap_embedding(white, seed=0), labels_p) > 0.5


class TestComputeEmbeddings:
    def test_all_parts_present(self):
        X, _ = three_site_matrix()
        X[3, 5] = np.nan
        result = compute_embeddings(make_features(X), seed=0)
        assert result.tsne.shape == (60, 2)
        assert result.umap.shape == (60, 2)
        assert result.imputed_rows[3] and not result.imputed_rows[0]
        assert np.isfinite(result.tsne).all() and np.isfinite(result.umap).all()
