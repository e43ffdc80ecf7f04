import itertools

import numpy as np
import pytest

from structfilt.clustering import kmeans_pp_init, weighted_kmeans
from structfilt.errors import MaxItersExceeded, TooFewDistinctPoints


def brute_force_objective(particles, weights, k):
    """Exact optimum of the weighted objective by assignment enumeration."""
    pts = np.asarray(particles, dtype=float).reshape(len(particles), -1)
    w = np.asarray(weights, dtype=float)
    best = np.inf
    for labels in itertools.product(range(k), repeat=len(pts)):
        labels = np.asarray(labels)
        total = 0.0
        for j in range(k):
            mask = labels == j
            wsum = w[mask].sum()
            if wsum == 0:
                continue
            centroid = (w[mask] @ pts[mask]) / wsum
            total += float(
                np.sum(w[mask] * np.sum((pts[mask] - centroid) ** 2, axis=1))
            )
        best = min(best, total)
    return best


def test_kmeans_pp_single_centroid_is_a_member():
    rng = np.random.default_rng(0)
    particles = rng.normal(size=(10, 2))
    centroids = kmeans_pp_init(particles, 1, rng)
    assert any(np.array_equal(centroids[0], p) for p in particles)


def test_kmeans_pp_two_points_picks_both():
    for seed in range(20):
        rng = np.random.default_rng(seed)
        centroids = kmeans_pp_init(np.array([0.0, 10.0]), 2, rng)
        assert sorted(centroids[:, 0]) == [0.0, 10.0]


def test_kmeans_pp_squared_distance_weighting():
    # With the first draw at 0, the second lands on 100 with probability
    # 100^2 / (1^2 + 100^2), i.e. all but ~1e-4 of the time.
    hits = total = 0
    for seed in range(4000):
        rng = np.random.default_rng(seed)
        centroids = kmeans_pp_init(np.array([0.0, 1.0, 100.0]), 2, rng)
        if centroids[0, 0] == 0.0:
            total += 1
            hits += centroids[1, 0] == 100.0
    assert total > 1000
    assert hits / total > 0.99


def test_kmeans_pp_too_few_distinct_points():
    rng = np.random.default_rng(1)
    with pytest.raises(TooFewDistinctPoints):
        kmeans_pp_init(np.array([1.0, 1.0, 1.0]), 2, rng)


def test_weighted_kmeans_separated_pairs():
    particles = np.array([0.0, 1.0, 10.0, 11.0])
    weights = np.full(4, 0.25)
    result = weighted_kmeans(particles, weights, 2, np.random.default_rng(2))
    assert sorted(result.centroids[:, 0]) == pytest.approx([0.5, 10.5])
    assert result.objective == pytest.approx(
        brute_force_objective(particles, weights, 2)
    )


def test_weighted_kmeans_k1_weighted_mean():
    rng = np.random.default_rng(3)
    particles = rng.normal(size=(15, 2))
    weights = rng.dirichlet(np.ones(15))
    result = weighted_kmeans(particles, weights, 1, rng)
    assert np.allclose(result.centroids[0], weights @ particles)
    assert set(result.labels) == {0}


def test_weighted_kmeans_recovers_weight_bumps():
    # Uniform particle grid whose weights form four well-separated bumps;
    # the weighted clustering must find the bump centers even though the
    # particle positions alone carry no cluster structure.
    rng = np.random.default_rng(4)
    centers = np.array([[0.2, 0.2], [0.2, 0.8], [0.8, 0.2], [0.8, 0.8]])
    particles = rng.uniform(0, 1, size=(2000, 2))
    weights = np.zeros(len(particles))
    for c in centers:
        weights += np.exp(-np.sum((particles - c) ** 2, axis=1) / (2 * 0.03**2))
    weights /= weights.sum()
    best = None
    for attempt in range(5):
        result = weighted_kmeans(particles, weights, 4, rng)
        if best is None or result.objective < best.objective:
            best = result
    found = best.centroids[np.lexsort(best.centroids.T[::-1])]
    expected = centers[np.lexsort(centers.T[::-1])]
    assert np.abs(found - expected).max() < 0.05


def test_weighted_kmeans_weight_scale_invariance():
    rng_a = np.random.default_rng(5)
    rng_b = np.random.default_rng(5)
    particles = np.random.default_rng(6).normal(size=(30, 1))
    weights = np.random.default_rng(7).uniform(0.1, 1.0, 30)
    a = weighted_kmeans(particles, weights, 3, rng_a)
    b = weighted_kmeans(particles, 17.0 * weights, 3, rng_b)
    assert np.array_equal(a.labels, b.labels)
    assert np.allclose(a.centroids, b.centroids)


def test_weighted_kmeans_uniform_weights_match_reference():
    sklearn = pytest.importorskip("sklearn.cluster")
    rng = np.random.default_rng(8)
    particles = np.vstack(
        [rng.normal(0, 0.3, size=(40, 2)), rng.normal(3, 0.3, size=(40, 2))]
    )
    weights = np.full(80, 1.0 / 80)
    result = weighted_kmeans(particles, weights, 2, rng)
    reference = sklearn.KMeans(
        n_clusters=2, init=result.centroids, n_init=1, max_iter=300
    ).fit(particles)
    assert result.objective * 80 == pytest.approx(reference.inertia_, rel=1e-8)


def test_weighted_kmeans_zero_weight_particles_are_labeled():
    particles = np.array([0.0, 0.1, 10.0, 10.1, 5.0])
    weights = np.array([0.25, 0.25, 0.25, 0.25, 0.0])
    result = weighted_kmeans(particles, weights, 2, np.random.default_rng(9))
    assert result.labels.shape == (5,)
    # The zero-weight point is labeled but must not shift any centroid.
    assert sorted(result.centroids[:, 0]) == pytest.approx([0.05, 10.05])


def test_weighted_kmeans_objective_consistent_with_labels():
    rng = np.random.default_rng(10)
    particles = rng.normal(size=(40, 2))
    weights = rng.dirichlet(np.ones(40))
    result = weighted_kmeans(particles, weights, 3, rng)
    recomputed = 0.0
    for j in range(3):
        mask = result.labels == j
        if mask.any():
            recomputed += float(
                np.sum(
                    weights[mask]
                    * np.sum((particles[mask] - result.centroids[j]) ** 2, axis=1)
                )
            )
    assert result.objective == pytest.approx(recomputed, abs=1e-10)


def test_weighted_kmeans_iteration_cap():
    rng = np.random.default_rng(11)
    particles = rng.normal(size=(50, 2))
    with pytest.raises(MaxItersExceeded):
        weighted_kmeans(particles, np.full(50, 0.02), 5, rng, max_iters=0)
