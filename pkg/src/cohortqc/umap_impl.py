"""Self-contained UMAP for small cohorts.

Standard construction: exact k-nearest-neighbor graph, per-point bandwidth
calibration so each fuzzy neighborhood has cardinality log2(k), fuzzy set
union, spectral initialization, and negative-sampling SGD on the fuzzy
cross-entropy. Gradient updates are applied vectorized per epoch rather than
edge-sequentially; the result is fully deterministic for a fixed seed.
"""

from __future__ import annotations

import numpy as np
from scipy.optimize import curve_fit
from scipy.spatial.distance import squareform, pdist

_SMOOTH_K_TOLERANCE = 1e-5
_MIN_K_DIST_SCALE = 1e-3
_GRAD_CLIP = 4.0


def fit_curve_params(spread: float, min_dist: float) -> tuple[float, float]:
    """Fit (a, b) of 1/(1 + a d^{2b}) to the offset exponential decay."""

    def curve(x, a, b):
        return 1.0 / (1.0 + a * x ** (2 * b))

    xv = np.linspace(0, spread * 3, 300)
    yv = np.where(xv < min_dist, 1.0, np.exp(-(xv - min_dist) / spread))
    params, _ = curve_fit(curve, xv, yv)
    return float(params[0]), float(params[1])


def _smooth_knn(knn_dists: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Per-point (sigma, rho) so that sum_j exp(-(d - rho)/sigma) = log2(k)."""
    n = knn_dists.shape[0]
    target = np.log2(k)
    rho = np.zeros(n)
    sigma = np.zeros(n)
    mean_all = knn_dists.mean()
    for i in range(n):
        dists = knn_dists[i]
        nonzero = dists[dists > 0.0]
        if nonzero.size > 0:
            rho[i] = nonzero[0]
        lo, hi, mid = 0.0, np.inf, 1.0
        for _ in range(64):
            psum = np.exp(-np.maximum(dists - rho[i], 0.0) / mid).sum()
            if abs(psum - target) < _SMOOTH_K_TOLERANCE:
                break
            if psum > target:
                hi = mid
                mid = (lo + hi) / 2.0
            else:
                lo = mid
                mid = mid * 2.0 if hi == np.inf else (lo + hi) / 2.0
        sigma[i] = mid
        if rho[i] > 0.0:
            mean_i = dists.mean()
            if mean_i > 0:
                sigma[i] = max(sigma[i], _MIN_K_DIST_SCALE * mean_i)
        else:
            sigma[i] = max(sigma[i], _MIN_K_DIST_SCALE * mean_all) if mean_all > 0 else 1.0
    return sigma, rho


def _fuzzy_graph(data: np.ndarray, n_neighbors: int) -> np.ndarray:
    n = data.shape[0]
    dist = squareform(pdist(data))
    order = np.argsort(dist, axis=1, kind="stable")
    knn_idx = order[:, 1:n_neighbors + 1]
    knn_dist = np.take_along_axis(dist, knn_idx, axis=1)
    sigma, rho = _smooth_knn(knn_dist, n_neighbors)

    weights = np.zeros((n, n))
    rows = np.repeat(np.arange(n), n_neighbors)
    cols = knn_idx.ravel()
    vals = np.exp(-np.maximum(knn_dist - rho[:, None], 0.0) / sigma[:, None]).ravel()
    weights[rows, cols] = vals
    # fuzzy set union
    return weights + weights.T - weights * weights.T


def _spectral_init(graph: np.ndarray, n_components: int,
                   rng: np.random.Generator) -> np.ndarray:
    n = graph.shape[0]
    degree = graph.sum(axis=1)
    degree[degree == 0] = 1.0
    inv_sqrt = 1.0 / np.sqrt(degree)
    laplacian = np.eye(n) - inv_sqrt[:, None] * graph * inv_sqrt[None, :]
    try:
        _, vectors = np.linalg.eigh(laplacian)
        init = vectors[:, 1:n_components + 1]
    except np.linalg.LinAlgError:
        init = rng.uniform(-10.0, 10.0, size=(n, n_components))
    max_abs = np.abs(init).max()
    if max_abs == 0:
        max_abs = 1.0
    return init * (10.0 / max_abs) + rng.normal(scale=1e-4, size=(n, n_components))


def umap_embed(data: np.ndarray, *, n_components: int = 2, n_neighbors: int = 15,
               min_dist: float = 0.1, spread: float = 1.0, n_epochs: int = 500,
               learning_rate: float = 1.0, negative_sample_rate: int = 5,
               seed: int = 0) -> np.ndarray:
    """Embed rows of ``data`` into ``n_components`` dimensions."""
    data = np.asarray(data, dtype=np.float64)
    n = data.shape[0]
    if n < 3:
        raise ValueError("UMAP needs at least 3 points")

    # identical rows are the same point of the fuzzy topological structure:
    # embed the unique rows and replicate their coordinates
    unique, inverse = np.unique(data, axis=0, return_inverse=True)
    if unique.shape[0] < data.shape[0]:
        if unique.shape[0] < 3:
            return np.zeros((n, n_components))
        coords = umap_embed(unique, n_components=n_components, n_neighbors=n_neighbors,
                            min_dist=min_dist, spread=spread, n_epochs=n_epochs,
                            learning_rate=learning_rate,
                            negative_sample_rate=negative_sample_rate, seed=seed)
        return coords[inverse]
    n_neighbors = min(n_neighbors, n - 1)

    rng = np.random.default_rng(seed)
    graph = _fuzzy_graph(data, n_neighbors)
    embedding = _spectral_init(graph, n_components, rng)
    a, b = fit_curve_params(spread, min_dist)

    # edge list over all ordered pairs with nonzero membership
    graph = graph.copy()
    graph[graph < graph.max() / n_epochs] = 0.0
    heads, tails = np.nonzero(graph)
    keep = heads != tails
    heads, tails = heads[keep], tails[keep]
    weights = graph[heads, tails]
    if heads.size == 0:
        return embedding

    epochs_per_sample = weights.max() / weights
    epochs_per_negative = epochs_per_sample / negative_sample_rate
    next_sample = epochs_per_sample.copy()
    next_negative = epochs_per_negative.copy()

    for epoch in range(n_epochs):
        alpha = learning_rate * (1.0 - epoch / n_epochs)
        due = next_sample <= epoch
        if due.any():
            h, t = heads[due], tails[due]
            diff = embedding[h] - embedding[t]
            dist_sq = (diff ** 2).sum(axis=1)
            coeff = np.zeros_like(dist_sq)
            positive = dist_sq > 0.0
            coeff[positive] = (-2.0 * a * b * dist_sq[positive] ** (b - 1.0)) / \
                (a * dist_sq[positive] ** b + 1.0)
            grad = np.clip(coeff[:, None] * diff, -_GRAD_CLIP, _GRAD_CLIP)
            np.add.at(embedding, h, alpha * grad)
            np.add.at(embedding, t, -alpha * grad)
            next_sample[due] += epochs_per_sample[due]

            n_negative = ((epoch - next_negative[due]) / epochs_per_negative[due]).astype(int)
            n_negative = np.maximum(n_negative, 0)
            total = int(n_negative.sum())
            if total > 0:
                rep_heads = np.repeat(h, n_negative)
                targets = rng.integers(0, n, size=total)
                valid = rep_heads != targets
                rep_heads, targets = rep_heads[valid], targets[valid]
                diff = embedding[rep_heads] - embedding[targets]
                dist_sq = (diff ** 2).sum(axis=1)
                coeff = np.zeros_like(dist_sq)
                positive = dist_sq > 0.0
                # zero-distance pairs get no repulsive kick, so exact
                # duplicates can settle onto coincident coordinates
                coeff[positive] = (2.0 * b) / \
                    ((0.001 + dist_sq[positive]) * (a * dist_sq[positive] ** b + 1.0))
                grad = np.clip(coeff[:, None] * diff, -_GRAD_CLIP, _GRAD_CLIP)
                np.add.at(embedding, rep_heads, alpha * grad)
            next_negative[due] += n_negative * epochs_per_negative[due]
    return embedding
