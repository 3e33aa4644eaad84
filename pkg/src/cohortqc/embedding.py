"""Cohort feature matrix, whitening, and 2-D embeddings (t-SNE + UMAP).

The feature vector per dataset is the 8 numeric metadata fields followed by
the 15 measurements (23 columns total). Missing entries are mean-imputed so
every dataset stays visible in the scatter plots; imputed rows are flagged.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from sklearn.manifold import TSNE

from .measures import MEASURE_NAMES, MeasureRecord
from .umap_impl import umap_embed
from .volume_io.types import MetadataRecord

logger = logging.getLogger(__name__)

METADATA_FEATURES = ("VRX", "VRY", "VRZ", "ROWS", "COLS", "TR", "TE", "NUM")
FEATURE_COLUMNS = METADATA_FEATURES + MEASURE_NAMES  # 23 columns

TSNE_PERPLEXITY = 30.0
UMAP_NEIGHBORS = 15
UMAP_MIN_DIST = 0.1
MIN_TSNE_DATASETS = 5
MIN_UMAP_DATASETS = 3


@dataclass
class FeatureMatrix:
    """Dataset-by-feature values with an explicit missing mask."""

    ids: tuple[str, ...]
    values: np.ndarray  # (n, 23), NaN where missing
    missing: np.ndarray  # (n, 23) bool

    @classmethod
    def from_records(cls, ids: list[str], metadata: list[MetadataRecord],
                     measures: list[MeasureRecord]) -> "FeatureMatrix":
        n = len(ids)
        values = np.full((n, len(FEATURE_COLUMNS)), np.nan)
        for row, (meta, record) in enumerate(zip(metadata, measures)):
            for col, name in enumerate(METADATA_FEATURES):
                value = getattr(meta, name)
                if value is not None:
                    values[row, col] = float(value)
            for col, name in enumerate(MEASURE_NAMES, start=len(METADATA_FEATURES)):
                value = record.get(name)
                if value is not None:
                    values[row, col] = value
        return cls(ids=tuple(ids), values=values, missing=np.isnan(values))


@dataclass
class WhitenedFeatures:
    values: np.ndarray  # (n, 23), z-scored; constant columns zeroed
    constant_columns: tuple[str, ...]
    imputed_rows: np.ndarray  # bool per row


def whiten(features: FeatureMatrix) -> WhitenedFeatures:
    """Column-wise z-score with mean imputation of missing entries.

    Imputed entries equal the column mean, hence 0 after whitening. Columns
    with zero variance (or no observed values) are zeroed and flagged so they
    drop out of distance computations.
    """
    n = features.values.shape[0]
    if n < 2:
        raise ValueError("whitening needs at least 2 datasets")
    out = features.values.copy()
    constant: list[str] = []
    imputed = np.zeros(n, dtype=bool)
    for col, name in enumerate(FEATURE_COLUMNS):
        column = out[:, col]
        present = ~features.missing[:, col]
        if not present.any():
            # nothing observed cohort-wide: the column is dropped, not imputed
            out[:, col] = 0.0
            constant.append(name)
            continue
        imputed |= ~present
        mean = column[present].mean()
        column[~present] = mean
        sigma = column.std()
        if sigma == 0.0:
            out[:, col] = 0.0
            constant.append(name)
        else:
            out[:, col] = (column - mean) / sigma
    return WhitenedFeatures(values=out, constant_columns=tuple(constant),
                            imputed_rows=imputed)


def tsne_embedding(whitened: np.ndarray, seed: int = 0) -> np.ndarray | None:
    """2-D t-SNE; perplexity shrinks to (n - 1) / 3 for small cohorts."""
    n = whitened.shape[0]
    if n < MIN_TSNE_DATASETS:
        logger.warning("t-SNE skipped: need >= %d datasets, have %d", MIN_TSNE_DATASETS, n)
        return None
    perplexity = min(TSNE_PERPLEXITY, (n - 1) / 3.0)
    model = TSNE(n_components=2, perplexity=perplexity, random_state=seed,
                 init="pca", learning_rate="auto")
    return model.fit_transform(whitened).astype(np.float64)


def umap_embedding(whitened: np.ndarray, seed: int = 0) -> np.ndarray | None:
    """2-D UMAP with the standard neighborhood parameters."""
    n = whitened.shape[0]
    if n < MIN_UMAP_DATASETS:
        logger.warning("UMAP skipped: need >= %d datasets, have %d", MIN_UMAP_DATASETS, n)
        return None
    return umap_embed(whitened, n_components=2,
                      n_neighbors=min(UMAP_NEIGHBORS, n - 1),
                      min_dist=UMAP_MIN_DIST, seed=seed)


@dataclass
class CohortEmbedding:
    tsne: np.ndarray | None
    umap: np.ndarray | None
    imputed_rows: np.ndarray
    constant_columns: tuple[str, ...]


def compute_embeddings(features: FeatureMatrix, seed: int = 0) -> CohortEmbedding:
    whitened = whiten(features)
    return CohortEmbedding(
        tsne=tsne_embedding(whitened.values, seed),
        umap=umap_embedding(whitened.values, seed),
        imputed_rows=whitened.imputed_rows,
        constant_columns=whitened.constant_columns,
    )
