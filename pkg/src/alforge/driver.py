"""Simulated annotation oracle and the stage loop.

One experiment is: bootstrap (acquire the initial labeled iD quota), then
stages of acquire -> annotate -> pool update -> train/finetune -> evaluate,
until the labeled iD count reaches the target or the pool is exhausted.

The oracle is the only component that reads ground truth on the pool; it
charges exactly one ledger count per annotation. Every phase derives its own
seed from the experiment seed, a phase code, and the round index, so metrics
are a pure function of (dataset, config, seed).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .acquisition import (
    CLUSTER_STRATEGIES,
    STRATEGIES,
    AcquisitionRequest,
    AcquisitionResult,
    PoolExhausted,
    acquire_distance_cl,
    acquire_random_cl,
    acquire_uncertainty,
)
from .clustering import kmeans_fit
from .core import (
    CATEGORY_ID,
    AlforgeError,
    AnnotationLedger,
    Dataset,
    LabeledExample,
    PoolState,
    pool_update,
)
from .learner import (
    EncoderParams,
    TrainConfig,
    finetune_classifier,
    predict_batch,
    represent,
    train_representation,
    train_supervised_baseline,
)


class AlreadyAnnotated(AlforgeError):
    pass


class UnknownId(AlforgeError):
    pass


class EmptyTestSet(AlforgeError):
    pass


class ZeroAccuracy(AlforgeError):
    pass


# Phase codes for per-round seed derivation.
_PHASE_REP0 = 0
_PHASE_REP_CONT = 1
_PHASE_FINETUNE = 2
_PHASE_BASELINE = 3
_PHASE_ACQUIRE = 4
_PHASE_KMEANS = 5


def derive_seed(base: int, phase: int, round_index: int = 0, chunk: int = 0) -> int:
    ss = np.random.SeedSequence(entropy=base, spawn_key=(phase, round_index, chunk))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


class OracleHandle:
    """Annotator simulated from ground truth.

    ``annotate`` returns the true class for iD samples and the auxiliary
    label ``K + 1`` otherwise, charging exactly one ledger count split by the
    sample's hidden category.
    """

    def __init__(self, dataset: Dataset, ledger: AnnotationLedger):
        self.dataset = dataset
        self.ledger = ledger
        self._annotated: set[int] = set()

    @property
    def n_classes(self) -> int:
        return self.dataset.n_classes

    def annotate(self, sample_id: int) -> LabeledExample:
        sample_id = int(sample_id)
        if sample_id in self._annotated:
            raise AlreadyAnnotated(f"sample {sample_id} was already annotated")
        try:
            category = self.dataset.category_of(sample_id)
        except KeyError:
            raise UnknownId(f"no sample with id {sample_id}") from None
        self.ledger.record(category)
        self._annotated.add(sample_id)
        if category == CATEGORY_ID:
            y = self.dataset.class_of(sample_id)
        else:
            y = self.n_classes + 1
        return LabeledExample(sample_id=sample_id, y=y)

    def peek_is_id(self, sample_id: int) -> bool:
        """Uncharged category check, used only by the waived baseline
        bootstrap accounting (non-iD examinations are free there)."""
        try:
            return self.dataset.category_of(int(sample_id)) == CATEGORY_ID
        except KeyError:
            raise UnknownId(f"no sample with id {sample_id}") from None


@dataclass
class StageMetrics:
    stage: int
    labeled_id: int
    queried_id: int
    queried_ambiguous: int
    queried_ood: int
    cumulative_cost: int
    test_accuracy: float
    labeled_total: int = 0
    unlabeled_total: int = 0


@dataclass(frozen=True)
class ExperimentConfig:
    strategy: str
    initial_id: int = 100
    per_stage_id: int = 10
    target_id: int = 300
    seed: int = 0
    baseline_free_bootstrap: bool = True
    refresh_radius_per_sample: bool = False
    cluster_restarts: int = 2
    rep_train: TrainConfig = field(
        default_factory=lambda: TrainConfig(
            epochs=20, batch_size_unlabeled=256, batch_size_labeled=64,
            learning_rate=0.3, weight_decay=1e-4,
            augment_noise_sigma=0.5, augment_mask_prob=0.1,
        )
    )
    rep_continue: TrainConfig = field(
        default_factory=lambda: TrainConfig(
            epochs=1, batch_size_unlabeled=256, batch_size_labeled=64,
            learning_rate=0.1, weight_decay=1e-4,
            augment_noise_sigma=0.5, augment_mask_prob=0.1,
        )
    )
    finetune: TrainConfig = field(
        default_factory=lambda: TrainConfig(
            epochs=50, batch_size_labeled=64, learning_rate=0.1, weight_decay=1e-6,
        )
    )
    baseline_train: TrainConfig = field(
        default_factory=lambda: TrainConfig(
            epochs=50, batch_size_labeled=64, learning_rate=0.1, weight_decay=1e-4,
        )
    )

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ValueError(f"strategy must be one of {STRATEGIES}, got {self.strategy!r}")
        if not 1 <= self.initial_id < self.target_id:
            raise ValueError("need 1 <= initial_id < target_id")
        if self.per_stage_id < 1:
            raise ValueError("per_stage_id must be at least 1")


def evaluate_accuracy(params: EncoderParams, test_set: Dataset) -> float:
    """Percent accuracy of the K-way argmax (auxiliary logit excluded)."""
    if len(test_set) == 0:
        raise EmptyTestSet("test set is empty")
    k = test_set.n_classes
    for sid in test_set.ids:
        if test_set.category_of(int(sid)) != CATEGORY_ID:
            raise ValueError("test set must contain only iD samples")
    probs = predict_batch(params, test_set.x)
    pred = probs[:, :k].argmax(axis=1) + 1
    truth = np.array([test_set.class_of(int(sid)) for sid in test_set.ids])
    return 100.0 * float((pred == truth).mean())


def cost_per_accuracy(cost: int, accuracy: float) -> float:
    """Annotation cost per percentage point of accuracy, to two decimals."""
    if accuracy <= 0:
        raise ZeroAccuracy("accuracy must be positive")
    return round(cost / accuracy, 2)


class Experiment:
    """Mutable experiment state; :meth:`run` executes the full protocol."""

    def __init__(
        self,
        dataset: Dataset,
        test_dataset: Dataset,
        config: ExperimentConfig,
        oracle_cls=OracleHandle,
    ):
        self.dataset = dataset
        self.test_dataset = test_dataset
        self.config = config
        self.pool = PoolState.initial(dataset.ids)
        self.ledger = AnnotationLedger()
        self.oracle = oracle_cls(dataset, self.ledger)
        self.rep_params: EncoderParams | None = None
        self.eval_params: EncoderParams | None = None
        self.metrics: list[StageMetrics] = []

    @property
    def is_cl(self) -> bool:
        return self.config.strategy in CLUSTER_STRATEGIES

    @property
    def n_classes(self) -> int:
        return self.dataset.n_classes

    # -- per-phase helpers -------------------------------------------------

    def _acquire_cl(self, n_id: int, round_index: int) -> AcquisitionResult:
        """Cluster-based acquisition against one k-means fit per round.

        The quota is requested in ``per_stage_id``-sized chunks so that the
        non-iD radii and the excluded cluster can develop from the labels the
        round itself produces; regular stages are a single chunk, the larger
        bootstrap quota benefits most.
        """
        h = represent(self.rep_params, self.dataset.x)
        model = kmeans_fit(
            self.dataset.ids,
            h,
            self.n_classes + 1,
            seed=derive_seed(self.config.seed, _PHASE_KMEANS, round_index),
            n_restarts=self.config.cluster_restarts,
        )
        features = None
        if self.config.strategy == "distance_cl":
            features = {int(sid): h[r] for r, sid in enumerate(self.dataset.ids)}

        result = AcquisitionResult()
        pool = self.pool
        remaining = n_id
        chunk_index = 0
        while remaining > 0:
            request = AcquisitionRequest(
                n_id=min(self.config.per_stage_id, remaining),
                strategy=self.config.strategy,
                seed=derive_seed(self.config.seed, _PHASE_ACQUIRE, round_index, chunk_index),
                refresh_radius_per_sample=self.config.refresh_radius_per_sample,
            )
            if features is not None:
                part = acquire_distance_cl(model, pool, features, request, self.oracle)
            else:
                part = acquire_random_cl(model, pool, request, self.oracle)
            result.examples.extend(part.examples)
            found = sum(1 for ex in part.examples if ex.y <= self.n_classes)
            remaining -= found
            if part.exhausted:
                result.exhausted = True
                break
            # Thread the intermediate pool for the next chunk; the round's
            # single pool_update (stage increment) happens in the caller.
            labeled = dict(pool.labeled)
            taken = set()
            for ex in part.examples:
                labeled[ex.sample_id] = ex
                taken.add(ex.sample_id)
            pool = PoolState(labeled=labeled, unlabeled=pool.unlabeled - taken, stage=pool.stage)
            chunk_index += 1
        return result

    def _acquire_baseline(self, n_id: int, round_index: int) -> AcquisitionResult:
        ids = np.array(self.pool.unlabeled_sorted(), dtype=np.int64)
        probs = predict_batch(self.eval_params, self.dataset.features(ids))
        request = AcquisitionRequest(
            n_id=n_id,
            strategy=self.config.strategy,
            seed=derive_seed(self.config.seed, _PHASE_ACQUIRE, round_index),
        )
        order = acquire_uncertainty(ids, probs, request)
        result = AcquisitionResult()
        found = 0
        for sid in order:
            ex = self.oracle.annotate(int(sid))
            result.examples.append(ex)
            if ex.y <= self.n_classes:
                found += 1
                if found >= n_id:
                    break
        result.exhausted = found < n_id
        return result

    def _bootstrap_acquire(self) -> AcquisitionResult:
        cfg = self.config
        if self.is_cl:
            rep_cfg = replace(cfg.rep_train, seed=derive_seed(cfg.seed, _PHASE_REP0))
            self.rep_params = train_representation(self.pool, self.dataset, rep_cfg).params
            return self._acquire_cl(cfg.initial_id, 0)
        rng = np.random.default_rng(derive_seed(cfg.seed, _PHASE_ACQUIRE, 0))
        order = rng.permutation(np.array(self.pool.unlabeled_sorted(), dtype=np.int64))
        result = AcquisitionResult()
        found = 0
        for sid in order:
            if cfg.baseline_free_bootstrap and not self.oracle.peek_is_id(int(sid)):
                continue
            ex = self.oracle.annotate(int(sid))
            result.examples.append(ex)
            if ex.y <= self.n_classes:
                found += 1
                if found >= cfg.initial_id:
                    break
        result.exhausted = found < cfg.initial_id
        return result

    def _train_eval_model(self, round_index: int) -> None:
        labeled = list(self.pool.labeled.values())
        cfg = self.config
        if self.is_cl:
            ft = replace(cfg.finetune, seed=derive_seed(cfg.seed, _PHASE_FINETUNE, round_index))
            self.eval_params = finetune_classifier(self.rep_params, labeled, self.dataset, ft).params
        else:
            bt = replace(cfg.baseline_train, seed=derive_seed(cfg.seed, _PHASE_BASELINE, round_index))
            self.eval_params = train_supervised_baseline(labeled, self.dataset, bt).params

    def _record_metrics(self, round_index: int) -> None:
        rec = self.ledger.stages[-1]
        self.metrics.append(
            StageMetrics(
                stage=round_index,
                labeled_id=self.pool.labeled_id_count(self.n_classes),
                queried_id=rec.queried_id,
                queried_ambiguous=rec.queried_ambiguous,
                queried_ood=rec.queried_ood,
                cumulative_cost=self.ledger.cumulative_cost,
                test_accuracy=evaluate_accuracy(self.eval_params, self.test_dataset),
                labeled_total=self.pool.n_labeled,
                unlabeled_total=self.pool.n_unlabeled,
            )
        )

    # -- protocol ----------------------------------------------------------

    def bootstrap(self) -> None:
        """Acquire the initial iD quota; every examined sample moves to the
        labeled pool (baselines skip non-iD for free under the waived
        accounting). Raises :class:`PoolExhausted` when the pool cannot
        supply the initial quota."""
        self.ledger.begin_stage()
        result = self._bootstrap_acquire()
        if result.exhausted:
            raise PoolExhausted(
                f"pool exhausted during bootstrap: needed {self.config.initial_id} iD"
            )
        self.pool = pool_update(self.pool, result.examples)
        self._train_eval_model(0)
        self._record_metrics(0)

    def run_stage(self, round_index: int) -> bool:
        """One acquisition round; returns True when the pool ran out."""
        if self.pool.labeled_id_count(self.n_classes) >= self.config.target_id:
            raise ValueError("labeled iD count already at target")
        self.ledger.begin_stage()
        if self.is_cl:
            cont = replace(
                self.config.rep_continue,
                seed=derive_seed(self.config.seed, _PHASE_REP_CONT, round_index),
            )
            self.rep_params = train_representation(
                self.pool, self.dataset, cont, init=self.rep_params
            ).params
            result = self._acquire_cl(self.config.per_stage_id, round_index)
        else:
            result = self._acquire_baseline(self.config.per_stage_id, round_index)
        self.pool = pool_update(self.pool, result.examples)
        self._train_eval_model(round_index)
        self._record_metrics(round_index)
        return result.exhausted

    def run(self) -> list[StageMetrics]:
        self.bootstrap()
        round_index = 1
        while self.pool.labeled_id_count(self.n_classes) < self.config.target_id:
            exhausted = self.run_stage(round_index)
            if exhausted:
                break
            round_index += 1
        return self.metrics


def run_experiment(
    dataset: Dataset, test_dataset: Dataset, config: ExperimentConfig
) -> list[StageMetrics]:
    """Execute one full experiment and return the per-stage metrics series."""
    return Experiment(dataset, test_dataset, config).run()


def metrics_to_csv(metrics: list[StageMetrics]) -> str:
    lines = ["stage,labeled_id,queried_id,queried_ambiguous,queried_ood,cumulative_cost,test_accuracy"]
    for m in metrics:
        lines.append(
            f"{m.stage},{m.labeled_id},{m.queried_id},{m.queried_ambiguous},"
            f"{m.queried_ood},{m.cumulative_cost},{float(m.test_accuracy)!r}"
        )
    return "\n".join(lines) + "\n"


def summarize(
    config: ExperimentConfig, metrics: list[StageMetrics], dataset_digest: str
) -> dict:
    final = metrics[-1]
    return {
        "strategy": config.strategy,
        "seed": config.seed,
        "dataset_digest": dataset_digest,
        "stages": len(metrics),
        "final_accuracy": float(final.test_accuracy),
        "final_cost": int(final.cumulative_cost),
        "cost_per_accuracy": cost_per_accuracy(final.cumulative_cost, final.test_accuracy),
    }
