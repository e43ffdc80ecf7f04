"""Weighted k-means clustering with k-means++ seeding.

Splitting moves use this to decompose a particle cloud into candidate
clusters. The objective is the weighted within-cluster sum of squares,
``sum_p sum_{i in cluster p} w_i ||x_i - y_p||^2``; centroids are the
weight-normalized means of their members, which is where the weighted
variant departs from plain k-means.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from structfilt.errors import MaxItersExceeded, TooFewDistinctPoints

__all__ = ["Clustering", "kmeans_pp_init", "weighted_kmeans"]


@dataclass(frozen=True)
class Clustering:
    """Cluster labels in ``{0..k-1}``, centroids, and the objective value."""

    labels: NDArray
    centroids: NDArray
    objective: float

    @property
    def k(self) -> int:
        return self.centroids.shape[0]


def _sq_distances(points: NDArray, centroids: NDArray) -> NDArray:
    """Pairwise squared Euclidean distances, shape (n, k)."""
    diff = points[:, None, :] - centroids[None, :, :]
    return np.einsum("nkd,nkd->nk", diff, diff)


def kmeans_pp_init(
    particles: NDArray, k: int, rng: np.random.Generator
) -> NDArray:
    """Draw k initial centroids from the particle set.

    The first centroid is uniform over the particles; each further one is
    drawn with probability proportional to its squared distance to the
    nearest centroid chosen so far. Returned centroids are members of the
    input set and mutually distinct.

    Raises:
        TooFewDistinctPoints: if fewer than ``k`` distinct particles exist.
    """
    pts = np.asarray(particles, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    n = pts.shape[0]
    if k < 1:
        raise ValueError("k must be at least 1")
    n_distinct = np.unique(pts, axis=0).shape[0]
    if n_distinct < k:
        raise TooFewDistinctPoints(
            f"requested {k} centroids from {n_distinct} distinct points"
        )
    centroids = np.empty((k, pts.shape[1]))
    centroids[0] = pts[rng.integers(n)]
    d2 = np.einsum("nd,nd->n", pts - centroids[0], pts - centroids[0])
    for j in range(1, k):
        probs = d2 / d2.sum()
        i = rng.choice(n, p=probs)
        centroids[j] = pts[i]
        d2_new = np.einsum("nd,nd->n", pts - centroids[j], pts - centroids[j])
        d2 = np.minimum(d2, d2_new)
    return centroids


def weighted_kmeans(
    particles: NDArray,
    weights: NDArray,
    k: int,
    rng: np.random.Generator,
    max_iters: int = 100,
) -> Clustering:
    """Lloyd iteration on weighted points until the labels stop changing.

    Centroid recomputation uses the weights; label assignment is by
    nearest centroid with ties broken toward the lowest centroid index,
    so runs are deterministic given the seed. Zero-weight particles are
    labeled (the splitting move needs their index sets) but contribute
    nothing to centroids.

    Raises:
        MaxItersExceeded: if no fixed point is reached within ``max_iters``.
        TooFewDistinctPoints: propagated from seeding.
    """
    pts = np.asarray(particles, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    w = np.asarray(weights, dtype=float)
    if np.any(w < 0) or w.sum() <= 0:
        raise ValueError("weights must be nonnegative with positive total")
    centroids = kmeans_pp_init(pts, k, rng)
    labels = np.argmin(_sq_distances(pts, centroids), axis=1)
    for _ in range(max_iters):
        reseeded: list[int] = []
        for j in range(k):
            mask = labels == j
            wsum = w[mask].sum()
            if wsum > 0:
                centroids[j] = (w[mask] @ pts[mask]) / wsum
            else:
                # Empty (or weightless) cluster: reseed at the particle
                # contributing most to the objective, one per cluster.
                contrib = w * np.einsum(
                    "nd,nd->n", pts - centroids[labels], pts - centroids[labels]
                )
                contrib[reseeded] = -1.0
                pick = int(np.argmax(contrib))
                reseeded.append(pick)
                centroids[j] = pts[pick]
        new_labels = np.argmin(_sq_distances(pts, centroids), axis=1)
        if np.array_equal(new_labels, labels):
            obj = float(
                np.sum(
                    w
                    * np.einsum(
                        "nd,nd->n", pts - centroids[labels], pts - centroids[labels]
                    )
                )
            )
            return Clustering(labels=labels, centroids=centroids, objective=obj)
        labels = new_labels
    raise MaxItersExceeded(f"no fixed point within {max_iters} iterations")
