"""Acquisition strategies over the unlabeled pool.

Five strategies are provided: ``random``, ``least_confidence``, ``entropy``
(uncertainty family, scored on the classifier softmax after filtering out
candidates whose argmax is the auxiliary class), and the cluster-based pair
``random_cl`` / ``distance_cl``.

Pinned selection protocols (the brute-force reference in the test suite
re-codes these rules independently):

* candidates are always considered in ascending sample-id order before any
  scoring or permutation; every tie breaks toward the lower id;
* ``random`` draws one ``numpy`` generator from the request seed and emits
  ``rng.permutation`` of the filtered ascending id list;
* ``random_cl`` draws one generator per acquisition call; at each cluster
  visit it permutes the cluster's ascending unlabeled member list and takes
  the first ``quota`` entries in permutation order;
* ``distance_cl`` needs no randomness.

Both cluster strategies share the outer loop: the cluster with the highest
labeled non-iD proportion is excluded once per call (no exclusion while the
labeled pool is empty), then passes repeat until the requested number of
oracle-confirmed iD samples is reached or the pool is exhausted. Each pass
apportions the residual iD shortfall over clusters proportionally to their
current unlabeled membership (largest remainder), so a pass can never
overshoot the target.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .clustering import ClusterModel
from .core import AlforgeError, LabeledExample, PoolState

STRATEGIES = ("random", "least_confidence", "entropy", "random_cl", "distance_cl")
UNCERTAINTY_STRATEGIES = ("random", "least_confidence", "entropy")
CLUSTER_STRATEGIES = ("random_cl", "distance_cl")


class NotAProbabilityVector(AlforgeError):
    pass


class NoLabeledData(AlforgeError):
    pass


class NoEligibleClusters(AlforgeError):
    pass


class PoolExhausted(AlforgeError):
    pass


@dataclass(frozen=True)
class AcquisitionRequest:
    """How many oracle-confirmed iD samples to acquire, and by which rule."""

    n_id: int
    strategy: str
    seed: int = 0
    refresh_radius_per_sample: bool = False

    def __post_init__(self):
        if self.n_id < 1:
            raise ValueError("n_id must be at least 1")
        if self.strategy not in STRATEGIES:
            raise ValueError(f"strategy must be one of {STRATEGIES}, got {self.strategy!r}")


@dataclass
class ClusterQuota:
    """Per-cluster acquisition counts for one pass; they sum to the batch."""

    quotas: dict[int, int]

    @property
    def total(self) -> int:
        return sum(self.quotas.values())


@dataclass
class AcquisitionResult:
    """Annotated examples in selection order, plus an exhaustion flag."""

    examples: list[LabeledExample] = field(default_factory=list)
    exhausted: bool = False

    @property
    def selection_order(self) -> list[int]:
        return [ex.sample_id for ex in self.examples]


def _check_probability(p: np.ndarray) -> np.ndarray:
    p = np.asarray(p, dtype=np.float64)
    if p.ndim != 1 or len(p) == 0:
        raise NotAProbabilityVector("expected a 1-D probability vector")
    if (p < -1e-12).any() or abs(p.sum() - 1.0) > 1e-9:
        raise NotAProbabilityVector(f"entries sum to {p.sum():.12g} or are negative")
    return np.maximum(p, 0.0)


def score_entropy(p: np.ndarray) -> float:
    """Shannon entropy in nats; zero entries contribute nothing."""
    p = _check_probability(p)
    nz = p[p > 0]
    return float(-(nz * np.log(nz)).sum())


def score_least_confidence(p: np.ndarray) -> float:
    """``1 - max(p)``; higher means less confident."""
    p = _check_probability(p)
    return float(1.0 - p.max())


def aux_filter(candidate_ids: np.ndarray, probs: np.ndarray) -> np.ndarray:
    """Drop candidates whose predicted class is the auxiliary (last) one.

    Argmax takes the lowest index on ties, which keeps a candidate whenever a
    target class ties the auxiliary class.
    """
    candidate_ids = np.asarray(candidate_ids, dtype=np.int64)
    if len(candidate_ids) == 0:
        return candidate_ids
    probs = np.asarray(probs, dtype=np.float64)
    aux = probs.shape[1] - 1
    keep = probs.argmax(axis=1) != aux
    return candidate_ids[keep]


def acquire_uncertainty(
    unlabeled_ids: np.ndarray, probs: np.ndarray, request: AcquisitionRequest
) -> np.ndarray:
    """Ordered candidate stream for the uncertainty-family strategies.

    ``probs`` holds one softmax row per candidate. The stream is the full
    filtered ordering; the driver consumes it until enough iD samples are
    confirmed by the oracle.
    """
    if request.strategy not in UNCERTAINTY_STRATEGIES:
        raise ValueError(f"not an uncertainty strategy: {request.strategy}")
    unlabeled_ids = np.asarray(unlabeled_ids, dtype=np.int64)
    probs = np.asarray(probs, dtype=np.float64)
    order = np.argsort(unlabeled_ids, kind="stable")
    ids = unlabeled_ids[order]
    probs = probs[order]
    kept = probs.argmax(axis=1) != probs.shape[1] - 1
    ids, probs = ids[kept], probs[kept]
    if request.strategy == "random":
        rng = np.random.default_rng(request.seed)
        return ids[rng.permutation(len(ids))]
    if request.strategy == "entropy":
        scores = np.array([score_entropy(row) for row in probs])
    else:
        scores = np.array([score_least_confidence(row) for row in probs])
    return ids[np.lexsort((ids, -scores))]


def exclude_nonid_cluster(model: ClusterModel, labeled: list[LabeledExample], n_classes: int) -> int:
    """Index of the cluster with the highest labeled non-iD proportion.

    Clusters with no labeled members score zero; ties break toward the lower
    cluster index.
    """
    if not labeled:
        raise NoLabeledData("no labeled examples to base the exclusion on")
    assignment = model.assignment()
    n_lab = np.zeros(model.k)
    n_non = np.zeros(model.k)
    for ex in labeled:
        c = assignment[ex.sample_id]
        n_lab[c] += 1
        if ex.y == n_classes + 1:
            n_non[c] += 1
    props = np.where(n_lab > 0, n_non / np.maximum(n_lab, 1.0), 0.0)
    return int(np.argmax(props))


def compute_quotas(sizes: dict[int, int], batch: int) -> ClusterQuota:
    """Largest-remainder apportionment of ``batch`` proportional to ``sizes``.

    Exact integer arithmetic: cluster ``k`` gets ``batch * s_k // S`` plus one
    of the leftover units, awarded by descending remainder ``batch * s_k % S``
    with ties toward the lower cluster index. Clusters of size zero get zero.
    """
    if batch < 1:
        raise ValueError("batch must be at least 1")
    total = sum(sizes.values())
    if total <= 0:
        raise NoEligibleClusters("no cluster has unlabeled members")
    quotas: dict[int, int] = {}
    remainders: dict[int, int] = {}
    for k in sorted(sizes):
        s = sizes[k]
        quotas[k] = batch * s // total
        remainders[k] = batch * s % total
    leftover = batch - sum(quotas.values())
    for k in sorted(remainders, key=lambda k: (-remainders[k], k))[:leftover]:
        quotas[k] += 1
    return ClusterQuota(quotas=quotas)


class _ClusterAcquisition:
    """Shared outer loop of the two cluster-based strategies."""

    def __init__(self, model: ClusterModel, pool: PoolState, request: AcquisitionRequest, oracle):
        self.model = model
        self.request = request
        self.oracle = oracle
        self.n_classes = oracle.n_classes
        self.unlabeled = set(pool.unlabeled)
        self.labeled_y = {ex.sample_id: ex.y for ex in pool.labeled.values()}
        self.assignment = model.assignment()
        self.excluded = (
            exclude_nonid_cluster(model, list(pool.labeled.values()), self.n_classes)
            if pool.labeled
            else None
        )
        self.result = AcquisitionResult()
        self.n_id_found = 0

    def _cluster_unlabeled(self, cluster: int) -> list[int]:
        return sorted(i for i in self.unlabeled if self.assignment[i] == cluster)

    def _annotate(self, sample_id: int) -> LabeledExample:
        ex = self.oracle.annotate(sample_id)
        self.result.examples.append(ex)
        self.unlabeled.discard(sample_id)
        self.labeled_y[sample_id] = ex.y
        if ex.y <= self.n_classes:
            self.n_id_found += 1
        return ex

    def run(self, fill_cluster) -> AcquisitionResult:
        while self.n_id_found < self.request.n_id:
            residual = self.request.n_id - self.n_id_found
            sizes = {
                k: sum(1 for i in self.unlabeled if self.assignment[i] == k)
                for k in range(self.model.k)
                if k != self.excluded
            }
            if sum(sizes.values()) == 0:
                break
            quotas = compute_quotas(sizes, residual)
            annotated_before = len(self.result.examples)
            for k in sorted(quotas.quotas):
                quota = quotas.quotas[k]
                if quota == 0:
                    continue
                fill_cluster(self, k, quota)
                if self.n_id_found >= self.request.n_id:
                    break
            if len(self.result.examples) == annotated_before:
                break
        self.result.exhausted = self.n_id_found < self.request.n_id
        return self.result


def _fill_random(acq: _ClusterAcquisition, cluster: int, quota: int, rng: np.random.Generator) -> None:
    members = acq._cluster_unlabeled(cluster)
    if not members:
        return
    perm = rng.permutation(len(members))
    for idx in perm[: min(quota, len(members))]:
        acq._annotate(members[int(idx)])


def acquire_random_cl(
    model: ClusterModel, pool: PoolState, request: AcquisitionRequest, oracle
) -> AcquisitionResult:
    """Seeded-uniform picks within clusters, under the shared quota machinery."""
    acq = _ClusterAcquisition(model, pool, request, oracle)
    rng = np.random.default_rng(request.seed)
    return acq.run(lambda a, k, q: _fill_random(a, k, q, rng))


def _nonid_radius(acq: _ClusterAcquisition, cluster: int, features: dict[int, np.ndarray]) -> float:
    """Distance from the centroid to its closest labeled non-iD cluster member;
    infinite when the cluster has none (the whole cluster counts as inside)."""
    c = acq.model.centroids[cluster]
    best = math.inf
    for sid, y in acq.labeled_y.items():
        if y == acq.n_classes + 1 and acq.assignment.get(sid) == cluster:
            d = float(np.sqrt(((features[sid] - c) ** 2).sum()))
            if d < best:
                best = d
    return best


def _fill_distance(
    acq: _ClusterAcquisition, cluster: int, quota: int, features: dict[int, np.ndarray]
) -> None:
    members = acq._cluster_unlabeled(cluster)
    if not members:
        return
    c = acq.model.centroids[cluster]
    delta = {
        sid: float(np.sqrt(((features[sid] - c) ** 2).sum())) for sid in members
    }
    radius = _nonid_radius(acq, cluster, features)
    remaining = list(members)
    taken = 0
    while taken < quota and remaining:
        inside = [sid for sid in remaining if delta[sid] <= radius]
        if inside:
            pick = min(inside, key=lambda sid: (-delta[sid], sid))
        else:
            pick = min(remaining, key=lambda sid: (delta[sid], sid))
        remaining.remove(pick)
        ex = acq._annotate(pick)
        taken += 1
        if acq.request.refresh_radius_per_sample and ex.y == acq.n_classes + 1:
            radius = min(radius, delta[pick])
        if acq.n_id_found >= acq.request.n_id:
            return


def acquire_distance_cl(
    model: ClusterModel,
    pool: PoolState,
    features: dict[int, np.ndarray],
    request: AcquisitionRequest,
    oracle,
) -> AcquisitionResult:
    """Radius-guided selection within clusters.

    Within a cluster pass, while candidates at distance ``<= radius`` exist the
    farthest of them is taken (closest to the boundary from inside); once none
    remain the closest outside candidate is taken. The radius is the distance
    from the centroid to its nearest labeled non-iD member, recomputed at every
    cluster visit (and additionally after each annotation when the request sets
    ``refresh_radius_per_sample``).
    """
    acq = _ClusterAcquisition(model, pool, request, oracle)
    return acq.run(lambda a, k, q: _fill_distance(a, k, q, features))
