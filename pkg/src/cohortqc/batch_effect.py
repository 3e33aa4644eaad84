"""Batch-effect quantification via resampled hierarchical consensus clustering.

Each iteration subsamples the cohort, clusters it with average-linkage
hierarchical clustering on Pearson distance, and records which pairs land in
the same cluster. The consensus matrix is the per-pair co-clustering
frequency; final labels come from clustering the consensus complement.
Cluster-site overlap accuracy then measures how strongly clusters align with
acquisition sites.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.cluster.hierarchy import fcluster, linkage
from scipy.spatial.distance import squareform

logger = logging.getLogger(__name__)

DEFAULT_ITERATIONS = 1000
DEFAULT_SUBSAMPLE = 0.8


@dataclass
class ConsensusResult:
    consensus_matrix: np.ndarray  # (n, n) in [0, 1], symmetric, diagonal 1
    labels: np.ndarray  # cluster id per dataset, 1..k
    k: int
    overlap_accuracy: dict[str, float] = field(default_factory=dict)
    pair_scores: list[dict] = field(default_factory=list)  # cluster-site precision/recall/F1


def pearson_distance(features: np.ndarray) -> np.ndarray:
    """Pairwise 1 - Pearson correlation between dataset feature rows.

    Rows with zero variance have undefined correlation; their distance to
    every other dataset is set to 1 (and 0 to themselves) with a warning.
    """
    features = np.asarray(features, dtype=np.float64)
    n = features.shape[0]
    if n < 2:
        raise ValueError("need at least 2 datasets")
    centered = features - features.mean(axis=1, keepdims=True)
    norms = np.sqrt((centered ** 2).sum(axis=1))
    flat = norms == 0
    if flat.any():
        logger.warning("%d dataset(s) have zero feature variance; "
                       "their Pearson distances default to 1", int(flat.sum()))
    safe = np.where(flat, 1.0, norms)
    corr = (centered / safe[:, None]) @ (centered / safe[:, None]).T
    dist = 1.0 - corr
    dist[flat, :] = 1.0
    dist[:, flat] = 1.0
    np.fill_diagonal(dist, 0.0)
    # floating error can leave tiny negatives or asymmetry
    dist = np.clip((dist + dist.T) / 2.0, 0.0, 2.0)
    np.fill_diagonal(dist, 0.0)
    return dist


def _cut_average_linkage(distance: np.ndarray, k: int) -> np.ndarray:
    condensed = squareform(distance, checks=False)
    tree = linkage(condensed, method="average")
    return fcluster(tree, t=k, criterion="maxclust")


def consensus_cluster(features: np.ndarray, k: int,
                      iterations: int = DEFAULT_ITERATIONS,
                      subsample: float = DEFAULT_SUBSAMPLE,
                      seed: int = 0) -> ConsensusResult:
    """Resampled hierarchical consensus clustering of dataset feature rows."""
    features = np.asarray(features, dtype=np.float64)
    n = features.shape[0]
    if k < 2:
        raise ValueError("k must be >= 2")
    if n < 2 * k:
        raise ValueError(f"need at least 2k = {2 * k} datasets, have {n}")
    if not 0 < subsample <= 1:
        raise ValueError("subsample must be in (0, 1]")

    distance = pearson_distance(features)
    off_diagonal = distance[~np.eye(n, dtype=bool)]
    if off_diagonal.size and np.ptp(off_diagonal) < 1e-12:
        logger.warning("feature rows are mutually indistinguishable; "
                       "the cluster split is arbitrary (but deterministic)")
    sample_size = math.ceil(subsample * n)
    co_cluster = np.zeros((n, n))
    co_sample = np.zeros((n, n))
    # independent per-iteration streams so a parallel map would reproduce
    # the serial result exactly
    streams = np.random.SeedSequence(seed).spawn(iterations)
    for stream in streams:
        rng = np.random.default_rng(stream)
        idx = np.sort(rng.choice(n, size=sample_size, replace=False))
        labels = _cut_average_linkage(distance[np.ix_(idx, idx)], k)
        same = labels[:, None] == labels[None, :]
        co_sample[np.ix_(idx, idx)] += 1.0
        co_cluster[np.ix_(idx, idx)] += same

    never_sampled = co_sample == 0
    np.fill_diagonal(never_sampled, False)
    if never_sampled.any():
        logger.warning("%d dataset pair(s) were never co-sampled; "
                       "treating their consensus as 0", int(never_sampled.sum() // 2))
    with np.errstate(divide="ignore", invalid="ignore"):
        consensus = np.where(co_sample > 0, co_cluster / np.maximum(co_sample, 1), 0.0)
    np.fill_diagonal(consensus, 1.0)

    labels = _cut_average_linkage(1.0 - consensus, k)
    return ConsensusResult(consensus_matrix=consensus, labels=labels, k=int(labels.max()))


def overlap_accuracy(labels: np.ndarray,
                     site_labels: list[str]) -> tuple[dict[str, float], list[dict]]:
    """Match clusters to sites and score per-site recovery.

    Clusters pair with sites greedily by descending F1 (each used once);
    a site's accuracy is the fraction of its datasets inside its matched
    cluster. The cluster count must equal the site count.
    """
    labels = np.asarray(labels)
    sites = list(dict.fromkeys(site_labels))  # stable unique order
    clusters = sorted(set(int(v) for v in labels))
    if len(clusters) != len(sites):
        raise ValueError(f"cluster count {len(clusters)} != site count {len(sites)}")

    site_arr = np.asarray(site_labels)
    pairs = []
    for cluster in clusters:
        in_cluster = labels == cluster
        for site in sites:
            in_site = site_arr == site
            overlap = int((in_cluster & in_site).sum())
            precision = overlap / int(in_cluster.sum()) if in_cluster.sum() else 0.0
            recall = overlap / int(in_site.sum()) if in_site.sum() else 0.0
            f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
            pairs.append({"cluster": cluster, "site": site, "precision": precision,
                          "recall": recall, "f1": f1})

    matched: dict[str, int] = {}
    used_clusters: set[int] = set()
    for pair in sorted(pairs, key=lambda p: (-p["f1"], p["cluster"], p["site"])):
        if pair["site"] in matched or pair["cluster"] in used_clusters:
            continue
        matched[pair["site"]] = pair["cluster"]
        used_clusters.add(pair["cluster"])

    accuracy = {}
    for site in sites:
        in_site = site_arr == site
        cluster = matched[site]
        accuracy[site] = float((in_site & (labels == cluster)).sum() / in_site.sum())
    return accuracy, pairs
