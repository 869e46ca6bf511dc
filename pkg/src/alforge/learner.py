"""Representation model, losses, and training loops.

The network is fixed: a fully connected backbone ``d -> 128 -> 128 -> 64``
with ELU between layers, a linear projection head ``64 -> 32`` whose output is
normalized to unit Euclidean length, and a linear classifier head
``64 -> n_out``. Gradients are hand-derived for this architecture; every loss
below is checkable against central finite differences.

All training operations are pure functions of their inputs and the seed in
the config: parameter initialization, batch order, and augmentation noise all
come from one ``numpy`` generator consumed in a pinned order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import kernels
from .core import AlforgeError, Dataset, DimensionMismatch, LabeledExample, PoolState

HIDDEN1 = 128
HIDDEN2 = 128
REPR_DIM = 64
PROJ_DIM = 32

_PARAM_FIELDS = ("w1", "b1", "w2", "b2", "w3", "b3", "wp", "bp", "wc", "bc")
_WEIGHT_FIELDS = ("w1", "w2", "w3", "wp", "wc")


class NonUnitInput(AlforgeError):
    pass


class NoPositivePairs(AlforgeError):
    pass


class InsufficientLabels(AlforgeError):
    pass


class DivergedLoss(AlforgeError):
    pass


@dataclass(frozen=True)
class LossConfig:
    """Temperature for the contrastive losses; similarity is the dot product
    of unit-normalized projections."""

    tau: float = 0.07

    def __post_init__(self):
        if self.tau <= 0:
            raise ValueError("tau must be positive")


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 30
    batch_size_unlabeled: int = 256
    batch_size_labeled: int = 64
    learning_rate: float = 0.3
    weight_decay: float = 1e-4
    momentum: float = 0.9
    clip_norm: float = 5.0
    seed: int = 0
    augment_noise_sigma: float = 0.5
    augment_mask_prob: float = 0.1
    label_smoothing: float = 0.1
    tau: float = 0.07

    def __post_init__(self):
        if self.epochs < 0 or self.batch_size_unlabeled < 1 or self.batch_size_labeled < 1:
            raise ValueError("epochs and batch sizes must be positive")
        if self.learning_rate <= 0 or self.weight_decay < 0:
            raise ValueError("learning_rate must be positive, weight_decay nonnegative")
        if not 0.0 <= self.augment_mask_prob < 1.0:
            raise ValueError("augment_mask_prob must be in [0, 1)")
        if self.augment_noise_sigma < 0:
            raise ValueError("augment_noise_sigma must be nonnegative")
        if self.clip_norm < 0:
            raise ValueError("clip_norm must be nonnegative (0 disables clipping)")

    def loss_config(self) -> LossConfig:
        return LossConfig(tau=self.tau)


@dataclass
class EncoderParams:
    """All weights of the backbone, projection head, and classifier head."""

    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: np.ndarray
    w3: np.ndarray
    b3: np.ndarray
    wp: np.ndarray
    bp: np.ndarray
    wc: np.ndarray
    bc: np.ndarray

    @property
    def dim(self) -> int:
        return self.w1.shape[0]

    @property
    def n_out(self) -> int:
        return self.wc.shape[1]

    @classmethod
    def init(cls, dim: int, n_out: int, rng: np.random.Generator) -> "EncoderParams":
        """He-scaled Gaussian weights, zero biases; draw order is pinned."""

        def layer(n_in, n_o):
            w = rng.standard_normal((n_in, n_o)) * math.sqrt(2.0 / n_in)
            return w, np.zeros(n_o)

        w1, b1 = layer(dim, HIDDEN1)
        w2, b2 = layer(HIDDEN1, HIDDEN2)
        w3, b3 = layer(HIDDEN2, REPR_DIM)
        wp, bp = layer(REPR_DIM, PROJ_DIM)
        wc, bc = layer(REPR_DIM, n_out)
        return cls(w1, b1, w2, b2, w3, b3, wp, bp, wc, bc)

    def copy(self) -> "EncoderParams":
        return EncoderParams(*(getattr(self, f).copy() for f in _PARAM_FIELDS))

    def zeros_like(self) -> "EncoderParams":
        return EncoderParams(*(np.zeros_like(getattr(self, f)) for f in _PARAM_FIELDS))

    def to_vector(self) -> np.ndarray:
        return np.concatenate([getattr(self, f).ravel() for f in _PARAM_FIELDS])

    @classmethod
    def from_vector(cls, vec: np.ndarray, dim: int, n_out: int) -> "EncoderParams":
        shapes = [
            (dim, HIDDEN1), (HIDDEN1,),
            (HIDDEN1, HIDDEN2), (HIDDEN2,),
            (HIDDEN2, REPR_DIM), (REPR_DIM,),
            (REPR_DIM, PROJ_DIM), (PROJ_DIM,),
            (REPR_DIM, n_out), (n_out,),
        ]
        arrays = []
        pos = 0
        for shape in shapes:
            size = int(np.prod(shape))
            arrays.append(vec[pos : pos + size].reshape(shape).copy())
            pos += size
        if pos != len(vec):
            raise ValueError("parameter vector has wrong length")
        return cls(*arrays)


def save_params(params: EncoderParams, path) -> None:
    """Versioned binary checkpoint; round-trips bit-exactly."""
    np.savez(
        path,
        format_version=np.int64(1),
        **{f: getattr(params, f) for f in _PARAM_FIELDS},
    )


def load_params(path) -> EncoderParams:
    with np.load(path) as blob:
        if int(blob["format_version"]) != 1:
            raise AlforgeError(f"unsupported checkpoint version {blob['format_version']}")
        return EncoderParams(*(blob[f] for f in _PARAM_FIELDS))


def _elu(v: np.ndarray) -> np.ndarray:
    return np.where(v > 0, v, np.expm1(np.minimum(v, 0.0)))


def _elu_deriv(v: np.ndarray) -> np.ndarray:
    return np.where(v > 0, 1.0, np.exp(np.minimum(v, 0.0)))


def _backbone_forward(p: EncoderParams, x: np.ndarray):
    u1 = x @ p.w1 + p.b1
    a1 = _elu(u1)
    u2 = a1 @ p.w2 + p.b2
    a2 = _elu(u2)
    h = a2 @ p.w3 + p.b3
    return x, u1, a1, u2, a2, h


def _backbone_backward(p: EncoderParams, cache, dh: np.ndarray, grads: EncoderParams) -> None:
    x, u1, a1, u2, a2, _ = cache
    grads.w3 += a2.T @ dh
    grads.b3 += dh.sum(axis=0)
    du2 = (dh @ p.w3.T) * _elu_deriv(u2)
    grads.w2 += a1.T @ du2
    grads.b2 += du2.sum(axis=0)
    du1 = (du2 @ p.w2.T) * _elu_deriv(u1)
    grads.w1 += x.T @ du1
    grads.b1 += du1.sum(axis=0)


def _project(p: EncoderParams, h: np.ndarray):
    u = h @ p.wp + p.bp
    norms = np.sqrt((u * u).sum(axis=1, keepdims=True))
    z = u / norms
    return u, norms, z


def _project_backward(
    p: EncoderParams, h: np.ndarray, norms: np.ndarray, z: np.ndarray,
    dz: np.ndarray, grads: EncoderParams,
) -> np.ndarray:
    """Backprop through unit normalization and the projection layer; returns dh."""
    du = (dz - z * (z * dz).sum(axis=1, keepdims=True)) / norms
    grads.wp += h.T @ du
    grads.bp += du.sum(axis=0)
    return du @ p.wp.T


def encoder_forward(params: EncoderParams, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Map one feature vector to its representation ``h`` and unit projection ``z``."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (params.dim,):
        raise DimensionMismatch(f"input of shape {x.shape}, model expects ({params.dim},)")
    *_, h = _backbone_forward(params, x[None, :])
    _, _, z = _project(params, h)
    return h[0], z[0]


def represent(params: EncoderParams, x: np.ndarray) -> np.ndarray:
    """Batch representation ``h`` for an (n, d) feature matrix."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != params.dim:
        raise DimensionMismatch(f"batch of shape {x.shape}, model expects (*, {params.dim})")
    return _backbone_forward(params, x)[-1]


def project(params: EncoderParams, x: np.ndarray) -> np.ndarray:
    """Batch unit projections ``z`` for an (n, d) feature matrix."""
    h = represent(params, x)
    return _project(params, h)[2]


def augment(x: np.ndarray, rng: np.random.Generator, sigma: float, mask_prob: float) -> np.ndarray:
    """Vector-space augmentation: add isotropic noise, then zero coordinates
    independently with probability ``mask_prob``. Noise is drawn before the
    mask so the generator stream is pinned."""
    x = np.asarray(x, dtype=np.float64)
    noisy = x + rng.normal(0.0, sigma, size=x.shape)
    keep = rng.random(size=x.shape) >= mask_prob
    return np.where(keep, noisy, 0.0)


def _pair_positive_mask(n_rows: int) -> np.ndarray:
    pos = np.zeros((n_rows, n_rows))
    idx = np.arange(n_rows)
    pos[idx, idx ^ 1] = 1.0
    return pos


def _label_positive_mask(labels: np.ndarray) -> np.ndarray:
    eq = labels[:, None] == labels[None, :]
    pos = eq.astype(np.float64)
    np.fill_diagonal(pos, 0.0)
    return pos


def _check_unit(z: np.ndarray) -> None:
    norms = np.sqrt((z * z).sum(axis=1))
    worst = np.abs(norms - 1.0).max()
    if worst > 1e-6:
        raise NonUnitInput(f"projection norm deviates from 1 by {worst:.3g}")


def nt_xent_loss(pairs: np.ndarray, cfg: LossConfig) -> float:
    """Instance-discrimination contrastive loss over paired views.

    ``pairs`` is (2N, p) with rows (2i, 2i+1) holding two views of the same
    sample; the denominator for anchor i runs over every other row.
    """
    pairs = np.asarray(pairs, dtype=np.float64)
    if pairs.ndim != 2 or pairs.shape[0] < 2 or pairs.shape[0] % 2 != 0:
        raise ValueError("pairs must be a (2N, p) array with N >= 1")
    _check_unit(pairs)
    loss, _ = kernels.contrastive_loss_grad(
        np.ascontiguousarray(pairs), _pair_positive_mask(pairs.shape[0]), cfg.tau
    )
    return float(loss)


def nt_xent_loss_grad(pairs: np.ndarray, cfg: LossConfig) -> tuple[float, np.ndarray]:
    pairs = np.asarray(pairs, dtype=np.float64)
    _check_unit(pairs)
    return kernels.contrastive_loss_grad(
        np.ascontiguousarray(pairs), _pair_positive_mask(pairs.shape[0]), cfg.tau
    )


def supcon_loss(projections: np.ndarray, labels, cfg: LossConfig) -> float:
    """Label-driven contrastive loss: same-label rows are positives.

    Each anchor averages the log-probabilities of its positives; anchors
    without a positive contribute nothing, and the loss is the mean over
    contributing anchors.
    """
    z = np.asarray(projections, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    if z.ndim != 2 or z.shape[0] < 2:
        raise ValueError("need at least two projections")
    if len(labels) != z.shape[0]:
        raise ValueError("labels and projections disagree in length")
    _check_unit(z)
    pos = _label_positive_mask(labels)
    if pos.sum() == 0:
        raise NoPositivePairs("no label appears twice in the batch")
    loss, _ = kernels.contrastive_loss_grad(np.ascontiguousarray(z), pos, cfg.tau)
    return float(loss)


def supcon_loss_grad(projections: np.ndarray, labels, cfg: LossConfig) -> tuple[float, np.ndarray]:
    z = np.ascontiguousarray(projections, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    _check_unit(z)
    pos = _label_positive_mask(labels)
    if pos.sum() == 0:
        raise NoPositivePairs("no label appears twice in the batch")
    return kernels.contrastive_loss_grad(z, pos, cfg.tau)


def cross_entropy_loss(logits: np.ndarray, y: int, alpha: float = 0.1) -> float:
    """Label-smoothed softmax cross-entropy for one prediction.

    ``y`` is 1-based; the smoothed target puts ``1 - alpha`` on the true class
    and spreads ``alpha`` uniformly over all classes.
    """
    logits = np.asarray(logits, dtype=np.float64)
    if logits.ndim != 1:
        raise ValueError("logits must be a vector")
    if not 1 <= y <= len(logits):
        raise ValueError(f"label {y} outside 1..{len(logits)}")
    loss, _ = kernels.cross_entropy_rows(
        np.ascontiguousarray(logits[None, :]), np.array([y - 1], dtype=np.int64), alpha
    )
    return float(loss)


def predict(params: EncoderParams, x: np.ndarray) -> np.ndarray:
    """Softmax class probabilities for one feature vector."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (params.dim,):
        raise DimensionMismatch(f"input of shape {x.shape}, model expects ({params.dim},)")
    return predict_batch(params, x[None, :])[0]


def predict_batch(params: EncoderParams, x: np.ndarray) -> np.ndarray:
    h = represent(params, x)
    logits = h @ params.wc + params.bc
    return kernels.softmax_rows(np.ascontiguousarray(logits))


# ---------------------------------------------------------------------------
# Combined loss over both pools and its parameter gradient
# ---------------------------------------------------------------------------


def _contrastive_param_grads(
    params: EncoderParams,
    views: np.ndarray | None,
    labeled_x: np.ndarray | None,
    labeled_y: np.ndarray | None,
    cfg: LossConfig,
) -> tuple[float, EncoderParams]:
    """Loss value and parameter gradients for the two-pool objective.

    ``views`` is the (2N, d) paired-view batch (may be None), ``labeled_x`` /
    ``labeled_y`` the labeled batch (may be None or empty). A labeled batch
    without any repeated label contributes zero, matching the per-anchor rule.
    """
    grads = params.zeros_like()
    total = 0.0
    if views is not None and len(views) > 0:
        cache = _backbone_forward(params, views)
        u, norms, z = _project(params, cache[-1])
        loss, dz = kernels.contrastive_loss_grad(
            np.ascontiguousarray(z), _pair_positive_mask(z.shape[0]), cfg.tau
        )
        total += loss
        dh = _project_backward(params, cache[-1], norms, z, dz, grads)
        _backbone_backward(params, cache, dh, grads)
    if labeled_x is not None and len(labeled_x) > 0:
        cache = _backbone_forward(params, labeled_x)
        u, norms, z = _project(params, cache[-1])
        pos = _label_positive_mask(np.asarray(labeled_y, dtype=np.int64))
        loss, dz = kernels.contrastive_loss_grad(np.ascontiguousarray(z), pos, cfg.tau)
        total += loss
        dh = _project_backward(params, cache[-1], norms, z, dz, grads)
        _backbone_backward(params, cache, dh, grads)
    return total, grads


def total_loss(
    unlabeled_batch: np.ndarray | None,
    labeled_batch: tuple[np.ndarray, np.ndarray] | None,
    params: EncoderParams,
    cfg: LossConfig,
) -> float:
    """Sum of the view-pair loss on the unlabeled batch and the label-driven
    loss on the labeled batch; an empty labeled batch contributes zero."""
    lx, ly = labeled_batch if labeled_batch is not None else (None, None)
    if lx is not None and len(lx) > 0:
        pos = _label_positive_mask(np.asarray(ly, dtype=np.int64))
        if pos.sum() == 0:
            raise NoPositivePairs("no label appears twice in the labeled batch")
    loss, _ = _contrastive_param_grads(params, unlabeled_batch, lx, ly, cfg)
    return loss


def total_loss_grad(
    unlabeled_batch: np.ndarray | None,
    labeled_batch: tuple[np.ndarray, np.ndarray] | None,
    params: EncoderParams,
    cfg: LossConfig,
) -> tuple[float, EncoderParams]:
    lx, ly = labeled_batch if labeled_batch is not None else (None, None)
    return _contrastive_param_grads(params, unlabeled_batch, lx, ly, cfg)


def _classifier_param_grads(
    params: EncoderParams, x: np.ndarray, y0: np.ndarray, alpha: float
) -> tuple[float, EncoderParams]:
    grads = params.zeros_like()
    cache = _backbone_forward(params, x)
    h = cache[-1]
    logits = np.ascontiguousarray(h @ params.wc + params.bc)
    loss, dlogits = kernels.cross_entropy_rows(logits, y0, alpha)
    grads.wc += h.T @ dlogits
    grads.bc += dlogits.sum(axis=0)
    dh = dlogits @ params.wc.T
    _backbone_backward(params, cache, dh, grads)
    return loss, grads


def classifier_loss(params: EncoderParams, x: np.ndarray, y0: np.ndarray, alpha: float) -> float:
    """Mean smoothed cross-entropy of the classifier head on a batch."""
    return _classifier_param_grads(params, x, y0, alpha)[0]


# ---------------------------------------------------------------------------
# Optimization
# ---------------------------------------------------------------------------


@dataclass
class TrainResult:
    params: EncoderParams
    loss_history: list[float] = field(default_factory=list)


class _Momentum:
    """SGD with momentum and cosine learning-rate decay to zero."""

    def __init__(self, params: EncoderParams, cfg: TrainConfig, total_steps: int,
                 fields: tuple[str, ...] = _PARAM_FIELDS):
        self.params = params
        self.cfg = cfg
        self.total_steps = max(1, total_steps)
        self.fields = fields
        self.velocity = params.zeros_like()
        self.step_index = 0

    def lr(self) -> float:
        frac = self.step_index / self.total_steps
        return self.cfg.learning_rate * 0.5 * (1.0 + math.cos(math.pi * frac))

    def step(self, grads: EncoderParams) -> None:
        lr = self.lr()
        mu = self.cfg.momentum
        wd = self.cfg.weight_decay
        clip = self.cfg.clip_norm
        scale = 1.0
        if clip > 0:
            total = sum(float((getattr(grads, f) ** 2).sum()) for f in self.fields)
            norm = math.sqrt(total)
            if norm > clip:
                scale = clip / norm
        for name in self.fields:
            g = getattr(grads, name) * scale
            if wd > 0 and name in _WEIGHT_FIELDS:
                g = g + wd * getattr(self.params, name)
            v = getattr(self.velocity, name)
            v *= mu
            v -= lr * g
            getattr(self.params, name)[...] += v
        self.step_index += 1


def _interleave_views(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    out = np.empty((2 * len(a), a.shape[1]))
    out[0::2] = a
    out[1::2] = b
    return out


def train_representation(
    pool: PoolState,
    dataset: Dataset,
    cfg: TrainConfig,
    init: EncoderParams | None = None,
) -> TrainResult:
    """Contrastive training on both pools.

    Each step draws one unlabeled batch (two augmented views per sample) and,
    when the labeled pool is non-empty, one labeled batch; the two losses are
    summed. Optimized with momentum SGD under a cosine schedule. Raises
    :class:`DivergedLoss` if the loss stops being finite.
    """
    unlabeled_ids = pool.unlabeled_sorted()
    if not unlabeled_ids:
        raise ValueError("unlabeled pool is empty")
    rng = np.random.default_rng(cfg.seed)
    n_out = dataset.n_classes + 1
    params = (init.copy() if init is not None else EncoderParams.init(dataset.dim, n_out, rng))
    if cfg.epochs == 0:
        return TrainResult(params=params, loss_history=[])

    x_u = dataset.features(unlabeled_ids)
    labeled = sorted(pool.labeled.values(), key=lambda ex: ex.sample_id)
    x_l = dataset.features([ex.sample_id for ex in labeled]) if labeled else None
    y_l = np.array([ex.y for ex in labeled], dtype=np.int64) if labeled else None

    n_u = len(x_u)
    bs_u = min(cfg.batch_size_unlabeled, n_u)
    steps_per_epoch = math.ceil(n_u / bs_u)
    opt = _Momentum(params, cfg, total_steps=cfg.epochs * steps_per_epoch)
    loss_cfg = cfg.loss_config()
    history: list[float] = []

    labeled_order: list[int] = []
    for _ in range(cfg.epochs):
        perm = rng.permutation(n_u)
        for s in range(steps_per_epoch):
            batch = perm[s * bs_u : (s + 1) * bs_u]
            xb = x_u[batch]
            view_a = augment(xb, rng, cfg.augment_noise_sigma, cfg.augment_mask_prob)
            view_b = augment(xb, rng, cfg.augment_noise_sigma, cfg.augment_mask_prob)
            views = _interleave_views(view_a, view_b)

            lx = ly = None
            if x_l is not None:
                bs_l = min(cfg.batch_size_labeled, len(x_l))
                if len(labeled_order) < bs_l:
                    labeled_order = list(rng.permutation(len(x_l)))
                take = [labeled_order.pop(0) for _ in range(bs_l)]
                lx, ly = x_l[take], y_l[take]
                if len(np.unique(ly)) == len(ly):
                    lx = ly = None  # no repeated label: the batch has no positives

            loss, grads = _contrastive_param_grads(params, views, lx, ly, loss_cfg)
            if not math.isfinite(loss):
                raise DivergedLoss(f"loss became {loss} at step {opt.step_index}")
            opt.step(grads)
            history.append(loss)
    return TrainResult(params=params, loss_history=history)


def undersample_non_id(labeled: list[LabeledExample], n_classes: int) -> list[LabeledExample]:
    """Clamp the auxiliary-class count to the mean per-class iD count.

    The mean is ``total_iD // K``; kept non-iD examples are the ones with the
    lowest sample ids. iD examples are always kept.
    """
    id_examples = [ex for ex in labeled if ex.y <= n_classes]
    non_id = sorted(
        (ex for ex in labeled if ex.y == n_classes + 1), key=lambda ex: ex.sample_id
    )
    target = len(id_examples) // n_classes
    kept = non_id[:target]
    merged = id_examples + kept
    merged.sort(key=lambda ex: ex.sample_id)
    return merged


def _fit_classifier(
    params: EncoderParams,
    examples: list[LabeledExample],
    dataset: Dataset,
    cfg: TrainConfig,
    rng: np.random.Generator,
) -> TrainResult:
    x = dataset.features([ex.sample_id for ex in examples])
    y0 = np.array([ex.y - 1 for ex in examples], dtype=np.int64)
    n = len(x)
    bs = min(cfg.batch_size_labeled, n)
    steps_per_epoch = math.ceil(n / bs)
    # Projection head is untouched by the classification objective.
    trainable = ("w1", "b1", "w2", "b2", "w3", "b3", "wc", "bc")
    opt = _Momentum(params, cfg, total_steps=cfg.epochs * steps_per_epoch, fields=trainable)
    history: list[float] = []
    for _ in range(cfg.epochs):
        perm = rng.permutation(n)
        for s in range(steps_per_epoch):
            batch = perm[s * bs : (s + 1) * bs]
            loss, grads = _classifier_param_grads(params, x[batch], y0[batch], cfg.label_smoothing)
            if not math.isfinite(loss):
                raise DivergedLoss(f"loss became {loss} at step {opt.step_index}")
            opt.step(grads)
            history.append(loss)
    return TrainResult(params=params, loss_history=history)


def _check_label_variety(examples: list[LabeledExample]) -> None:
    if len({ex.y for ex in examples}) < 2:
        raise InsufficientLabels("need examples of at least two distinct labels")


def finetune_classifier(
    params: EncoderParams,
    labeled: list[LabeledExample],
    dataset: Dataset,
    cfg: TrainConfig,
) -> TrainResult:
    """Train classifier head and backbone on the labeled pool after
    undersampling the auxiliary class; starts from ``params`` (copied)."""
    _check_label_variety(labeled)
    examples = undersample_non_id(list(labeled), dataset.n_classes)
    out = params.copy()
    if cfg.epochs == 0:
        return TrainResult(params=out, loss_history=[])
    rng = np.random.default_rng(cfg.seed)
    return _fit_classifier(out, examples, dataset, cfg, rng)


def train_supervised_baseline(
    labeled: list[LabeledExample],
    dataset: Dataset,
    cfg: TrainConfig,
    n_out: int | None = None,
) -> TrainResult:
    """As :func:`finetune_classifier` but from a fresh seeded initialization.

    ``n_out`` defaults to ``K + 1`` (one auxiliary class); committee members
    pass ``n_out = K``.
    """
    _check_label_variety(labeled)
    if n_out is None:
        n_out = dataset.n_classes + 1
    examples = undersample_non_id(list(labeled), dataset.n_classes)
    rng = np.random.default_rng(cfg.seed)
    params = EncoderParams.init(dataset.dim, n_out, rng)
    if cfg.epochs == 0:
        return TrainResult(params=params, loss_history=[])
    return _fit_classifier(params, examples, dataset, cfg, rng)
