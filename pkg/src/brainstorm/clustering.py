"""k-means partitioning of the population."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import ConfigurationError, ContractViolation, Population

__all__ = ["ClusteringConfig", "lloyd", "kmeans_partition", "within_cluster_ss"]


@dataclass(frozen=True)
class ClusteringConfig:
    n_clusters: int = 5
    max_iterations: int = 100
    empty_cluster_policy: str = "reseed_random_member"

    def __post_init__(self):
        if self.n_clusters < 1:
            raise ConfigurationError("n_clusters must be >= 1")
        if self.max_iterations < 1:
            raise ConfigurationError("max_iterations must be >= 1")
        if self.empty_cluster_policy != "reseed_random_member":
            raise ConfigurationError(f"unknown empty_cluster_policy {self.empty_cluster_policy!r}")


def _assign(points, centroids):
    # squared euclidean distances, (n, C); argmin keeps the lowest index on ties
    diff = points[:, None, :] - centroids[None, :, :]
    return np.argmin(np.einsum("ijk,ijk->ij", diff, diff), axis=1)


def within_cluster_ss(points, labels, centroids) -> float:
    return float(((points - centroids[labels]) ** 2).sum())


def lloyd(points, centroids, max_iterations, rng, history=None):
    """Run Lloyd's iteration from the given initial centroids.

    Stops when no assignment changes or after `max_iterations` updates.
    An empty cluster gets its centroid moved onto a uniformly drawn member.
    Returns ``(labels, centroids)``. If `history` is a list, the
    within-cluster sum of squares after each centroid update is appended.
    """
    points = np.asarray(points, dtype=float)
    centroids = np.array(centroids, dtype=float, copy=True)
    n, k = points.shape[0], centroids.shape[0]
    labels = _assign(points, centroids)
    for _ in range(max_iterations):
        onehot = labels[None, :] == np.arange(k)[:, None]
        counts = onehot.sum(axis=1)
        sums = onehot.astype(float) @ points
        nonempty = counts > 0
        centroids[nonempty] = sums[nonempty] / counts[nonempty, None]
        for c in np.flatnonzero(~nonempty):
            centroids[c] = points[rng.integers(n)]
        if history is not None:
            history.append(within_cluster_ss(points, labels, centroids))
        new_labels = _assign(points, centroids)
        if np.array_equal(new_labels, labels):
            break
        labels = new_labels
    return labels, centroids


def kmeans_partition(population: Population, cfg: ClusteringConfig, rng) -> Population:
    """Cluster the population and mark the best member of each cluster.

    Parameters
    ----------
    population : Population
        Members to cluster; positions and fitness are read, not copied.
    cfg : ClusteringConfig
    rng : numpy.random.Generator
        The clustering stream. Initial centroids are ``n_clusters`` distinct
        members drawn without replacement from it.

    Returns
    -------
    Population
        Same positions and fitness with ``cluster_assignment`` and
        ``centers`` filled in. Every cluster is non-empty.
    """
    n = population.size
    if n < 1:
        raise ContractViolation("cannot cluster an empty population")
    k = cfg.n_clusters
    if k > n:
        raise ConfigurationError(f"n_clusters={k} exceeds population size {n}")
    points = population.positions
    init = points[rng.choice(n, size=k, replace=False)]
    labels, _ = lloyd(points, init, cfg.max_iterations, rng)
    labels = _fill_empty(labels, k, rng)
    centers = np.empty(k, dtype=int)
    for c in range(k):
        members = np.flatnonzero(labels == c)
        centers[c] = members[np.argmin(population.fitness[members])]
    return Population(population.positions, population.fitness, labels, centers)


def _fill_empty(labels, k, rng):
    # Duplicate points can leave a cluster empty even after reseeding; move a
    # random member out of a cluster that can spare one.
    labels = labels.copy()
    counts = np.bincount(labels, minlength=k)
    for c in np.flatnonzero(counts == 0):
        donors = np.flatnonzero(counts[labels] > 1)
        i = donors[rng.integers(donors.size)]
        counts[labels[i]] -= 1
        labels[i] = c
        counts[c] = 1
    return labels
