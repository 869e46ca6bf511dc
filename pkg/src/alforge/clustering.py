"""k-means over the representation space.

Lloyd's algorithm with k-means++ seeding. Behaviour pinned for reproducibility:

* input rows are processed in ascending-sample-id order;
* a restart draws all its randomness from one generator seeded once per fit,
  consumed restart by restart; the best restart (lowest final objective,
  earliest restart on ties) wins;
* an empty cluster is re-seeded at the point farthest from its currently
  assigned centroid (lowest row on ties), then assignments are recomputed;
* the per-iteration objective (sum of squared distances after each assignment
  step) is recorded and is non-increasing.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .core import AlforgeError


class TooFewPoints(AlforgeError):
    pass


class BadClusterIndex(AlforgeError):
    pass


@dataclass
class ClusterModel:
    """Fitted clustering: centroids, per-sample assignment, sizes, objective."""

    centroids: np.ndarray
    ids: np.ndarray
    labels: np.ndarray
    objective: float
    objective_history: list[float] = field(default_factory=list)
    n_iter: int = 0

    @property
    def k(self) -> int:
        return self.centroids.shape[0]

    @property
    def sizes(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.k).astype(np.int64)

    def assignment(self) -> dict[int, int]:
        return {int(i): int(c) for i, c in zip(self.ids, self.labels)}

    def members(self, cluster: int) -> list[int]:
        """Sample ids assigned to ``cluster``, ascending."""
        if not 0 <= cluster < self.k:
            raise BadClusterIndex(f"cluster {cluster} outside 0..{self.k - 1}")
        return [int(i) for i in self.ids[self.labels == cluster]]


def _kmeanspp_init(x: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = x.shape[0]
    centers = np.empty((k, x.shape[1]))
    first = int(rng.integers(n))
    centers[0] = x[first]
    best = kernels.pairwise_sqdist(x, centers[0:1])[:, 0]
    for j in range(1, k):
        total = best.sum()
        if total > 0.0:
            r = rng.random() * total
            idx = int(np.searchsorted(np.cumsum(best), r, side="right"))
            idx = min(idx, n - 1)
        else:
            idx = int(rng.integers(n))
        centers[j] = x[idx]
        d_new = kernels.pairwise_sqdist(x, centers[j : j + 1])[:, 0]
        best = np.minimum(best, d_new)
    return centers


def _reseed_empty(
    x: np.ndarray, centers: np.ndarray, labels: np.ndarray, sqd: np.ndarray, k: int
) -> bool:
    """Re-seed empty clusters at the farthest points; returns True if any."""
    counts = np.bincount(labels, minlength=k)
    empties = np.flatnonzero(counts == 0)
    if len(empties) == 0:
        return False
    sqd = sqd.copy()
    for j in empties:
        far = int(np.argmax(sqd))
        centers[j] = x[far]
        sqd[far] = -1.0  # not reused for another empty cluster this round
    return True


def _lloyd(
    x: np.ndarray, centers: np.ndarray, max_iter: int, tol: float
) -> tuple[np.ndarray, np.ndarray, float, list[float], int]:
    k = centers.shape[0]
    history: list[float] = []
    it = 0
    for it in range(1, max_iter + 1):
        labels, sqd = kernels.assign_nearest(x, centers)
        while _reseed_empty(x, centers, labels, sqd, k):
            labels, sqd = kernels.assign_nearest(x, centers)
        history.append(float(sqd.sum()))
        sums, counts = kernels.centroid_sums(x, labels, k)
        new_centers = sums / counts[:, None]
        movement = np.sqrt(((new_centers - centers) ** 2).sum(axis=1)).max()
        centers = new_centers
        if movement < tol:
            break
    labels, sqd = kernels.assign_nearest(x, centers)
    while _reseed_empty(x, centers, labels, sqd, k):
        labels, sqd = kernels.assign_nearest(x, centers)
    history.append(float(sqd.sum()))
    return centers, labels, history[-1], history, it


def kmeans_fit(
    ids,
    features: np.ndarray,
    k: int,
    *,
    seed: int,
    max_iter: int = 300,
    tol: float = 1e-6,
    n_restarts: int = 10,
) -> ClusterModel:
    """Fit ``k`` clusters on ``features`` keyed by ``ids``.

    Raises :class:`TooFewPoints` when fewer than ``k`` samples are given.
    """
    ids = np.asarray(ids, dtype=np.int64)
    features = np.ascontiguousarray(features, dtype=np.float64)
    if features.ndim != 2 or len(ids) != len(features):
        raise ValueError("ids and features disagree in length")
    if len(ids) < k:
        raise TooFewPoints(f"{len(ids)} points cannot form {k} clusters")
    order = np.argsort(ids, kind="stable")
    ids = ids[order]
    x = np.ascontiguousarray(features[order])

    rng = np.random.default_rng(seed)
    best: ClusterModel | None = None
    for _ in range(max(1, n_restarts)):
        centers = _kmeanspp_init(x, k, rng)
        centers, labels, obj, history, n_iter = _lloyd(x, centers.copy(), max_iter, tol)
        if best is None or obj < best.objective:
            best = ClusterModel(
                centroids=centers,
                ids=ids,
                labels=labels,
                objective=obj,
                objective_history=history,
                n_iter=n_iter,
            )
    assert best is not None
    return best


def centroid_distance(model: ClusterModel, cluster: int, h: np.ndarray) -> float:
    """Euclidean distance between centroid ``cluster`` and the vector ``h``."""
    if not 0 <= cluster < model.k:
        raise BadClusterIndex(f"cluster {cluster} outside 0..{model.k - 1}")
    h = np.asarray(h, dtype=np.float64)
    if h.shape != (model.centroids.shape[1],):
        raise ValueError(
            f"vector of dimension {h.shape} against centroids of dimension "
            f"{model.centroids.shape[1]}"
        )
    return float(np.sqrt(((model.centroids[cluster] - h) ** 2).sum()))
