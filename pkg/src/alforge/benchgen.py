"""Synthetic contaminated-pool construction and embedding ingestion.

The pool mixes three categories at an exact ratio (4:1:1 by default):

* iD: one isotropic unit-variance Gaussian per class, means placed at
  pairwise distance at least ``class_separation``;
* ambiguous: convex combinations of two iD samples from different classes
  (``interp_lambda`` toward the first), kept only when a committee of
  independently seeded classifiers neither agrees unanimously nor splits over
  too many classes;
* OoD: half from Gaussian components displaced well beyond the iD region,
  half uniform over the iD bounding box scaled by 1.5.

All randomness flows through one generator seeded from the spec, consumed in
a pinned order (class means, iD draws, ambiguous pair indices in blocks of
512, OoD, held-out test draws, final shuffle), so a spec reproduces its
dataset bit for bit. Committee members use their own seeds ``seed + 1 ..
seed + committee_size``.
"""

from __future__ import annotations

import hashlib
import io
from dataclasses import dataclass, field, asdict
from pathlib import Path

import numpy as np

from .core import (
    CATEGORY_AMBIGUOUS,
    CATEGORY_ID,
    CATEGORY_OOD,
    AlforgeError,
    Dataset,
    LabeledExample,
    Sample,
    read_dataset,
    write_dataset,
)
from .learner import EncoderParams, InsufficientLabels, TrainConfig, predict_batch, train_supervised_baseline

OOD_COMPONENTS = 3
_AMBIGUOUS_BLOCK = 512

# Committee members are trained briefly on purpose: fully converged members
# agree on almost every interpolation, which starves the ambiguity filter.
COMMITTEE_TRAIN = TrainConfig(
    epochs=8,
    batch_size_labeled=64,
    learning_rate=0.03,
    weight_decay=1e-4,
    clip_norm=2.5,
    label_smoothing=0.1,
    augment_noise_sigma=0.0,
    augment_mask_prob=0.0,
)


class PlacementFailure(AlforgeError):
    pass


class BudgetExhausted(AlforgeError):
    pass


@dataclass(frozen=True)
class BenchmarkSpec:
    """Recipe for one synthetic pool; defaults give the 4:1:1 mix."""

    n_classes: int = 8
    dim: int = 16
    n_id: int = 4000
    n_ambiguous: int = 1000
    n_ood: int = 1000
    class_separation: float = 4.0
    ood_offset: float = 12.0
    committee_size: int = 10
    interp_lambda: float = 0.7
    seed: int = 0
    cross_class_only: bool = True
    max_distinct_votes: int = 4
    n_test: int = 1000

    def __post_init__(self):
        if min(self.n_id, self.n_ambiguous, self.n_ood, self.n_test) < 1:
            raise ValueError("sample counts must be positive")
        if self.n_classes < 1 or self.dim < 1:
            raise ValueError("n_classes and dim must be positive")
        if not 0.5 < self.interp_lambda < 1.0:
            raise ValueError("interp_lambda must lie in (0.5, 1)")
        if self.committee_size < 1:
            raise ValueError("committee_size must be positive")
        if self.class_separation <= 0 or self.ood_offset <= 0:
            raise ValueError("class_separation and ood_offset must be positive")


@dataclass
class Committee:
    """Independently seeded classifiers trained on iD data only (K outputs)."""

    members: list[EncoderParams] = field(default_factory=list)

    def votes(self, x: np.ndarray) -> np.ndarray:
        """(n, committee_size) matrix of 1-based argmax predictions."""
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        out = np.empty((x.shape[0], len(self.members)), dtype=np.int64)
        for j, member in enumerate(self.members):
            out[:, j] = predict_batch(member, x).argmax(axis=1) + 1
        return out

    def passes_filter(self, votes_row: np.ndarray, max_distinct: int) -> bool:
        """Ambiguity filter: reject unanimous rows and rows spread over
        ``max_distinct`` or more classes."""
        distinct = len(np.unique(votes_row))
        return distinct != 1 and distinct < max_distinct


def _place_means(spec: BenchmarkSpec, rng: np.random.Generator) -> np.ndarray:
    # Gaussian placement with the scale chosen so typical pairwise distances
    # land ~25% above the enforced minimum; rejection keeps the minimum.
    scale = 1.25 * spec.class_separation / np.sqrt(2.0 * spec.dim)
    means = np.empty((spec.n_classes, spec.dim))
    for c in range(spec.n_classes):
        for _ in range(1000):
            cand = rng.standard_normal(spec.dim) * scale
            if c == 0 or np.sqrt(((means[:c] - cand) ** 2).sum(axis=1)).min() >= spec.class_separation:
                means[c] = cand
                break
        else:
            raise PlacementFailure(
                f"could not place mean {c + 1} of {spec.n_classes} at separation "
                f"{spec.class_separation} in 1000 attempts"
            )
    return means


def _class_counts(total: int, k: int) -> list[int]:
    base, extra = divmod(total, k)
    return [base + (1 if c < extra else 0) for c in range(k)]


def gen_id(spec: BenchmarkSpec, rng: np.random.Generator) -> tuple[list[Sample], np.ndarray]:
    """Generate the iD portion; returns the samples and the class means."""
    means = _place_means(spec, rng)
    samples: list[Sample] = []
    sid = 0
    for c, count in enumerate(_class_counts(spec.n_id, spec.n_classes)):
        x = means[c] + rng.standard_normal((count, spec.dim))
        for row in x:
            samples.append(Sample(id=sid, x=row, category=CATEGORY_ID, klass=c + 1))
            sid += 1
    return samples, means


def committee_train(id_samples: list[Sample], spec: BenchmarkSpec) -> Committee:
    """Train ``committee_size`` classifiers on the iD data with seeds
    ``spec.seed + 1 .. spec.seed + committee_size``."""
    classes = {s.klass for s in id_samples}
    if len(classes) < 2:
        raise InsufficientLabels("committee needs at least two iD classes")
    ds = Dataset.from_samples(id_samples, spec.n_classes)
    labeled = [LabeledExample(s.id, s.klass) for s in id_samples]
    members = []
    for j in range(spec.committee_size):
        cfg = TrainConfig(**{**asdict(COMMITTEE_TRAIN), "seed": spec.seed + 1 + j})
        members.append(train_supervised_baseline(labeled, ds, cfg, n_out=spec.n_classes).params)
    return Committee(members=members)


def gen_ambiguous(
    spec: BenchmarkSpec,
    id_samples: list[Sample],
    committee: Committee,
    rng: np.random.Generator,
) -> tuple[list[Sample], bool]:
    """Rejection-sample interpolated candidates through the committee filter.

    Pairs are drawn in blocks of 512 index pairs; same-class pairs are
    redrawn without counting as attempts when ``cross_class_only`` is set.
    Returns the kept samples and a flag that is True when the attempt budget
    (100 per requested sample) ran out first.
    """
    x = np.stack([s.x for s in id_samples])
    klass = np.array([s.klass for s in id_samples])
    n = len(id_samples)
    budget = 100 * spec.n_ambiguous
    lam = spec.interp_lambda
    kept: list[Sample] = []
    attempts = 0
    while len(kept) < spec.n_ambiguous and attempts < budget:
        ia = rng.integers(0, n, size=_AMBIGUOUS_BLOCK)
        ib = rng.integers(0, n, size=_AMBIGUOUS_BLOCK)
        if spec.cross_class_only:
            mask = klass[ia] != klass[ib]
            ia, ib = ia[mask], ib[mask]
        if len(ia) == 0:
            continue
        cand = lam * x[ia] + (1.0 - lam) * x[ib]
        votes = committee.votes(cand)
        for row in range(len(cand)):
            attempts += 1
            if committee.passes_filter(votes[row], spec.max_distinct_votes):
                kept.append(
                    Sample(id=len(kept), x=cand[row], category=CATEGORY_AMBIGUOUS, klass=-1)
                )
                if len(kept) >= spec.n_ambiguous:
                    break
            if attempts >= budget:
                break
    return kept, len(kept) < spec.n_ambiguous


def gen_ood(
    spec: BenchmarkSpec, id_samples: list[Sample], rng: np.random.Generator
) -> list[Sample]:
    """Generate the OoD portion from two sources.

    Half comes from :data:`OOD_COMPONENTS` unit Gaussians whose means sit at
    distance ``R + ood_offset`` from the center of the empirical class means
    (``R`` the center-to-farthest-class-mean radius, so every component mean
    is at least ``ood_offset`` from every class mean); the other half is
    uniform over the iD bounding box scaled by 1.5 about its center.
    """
    x_id = np.stack([s.x for s in id_samples])
    klass = np.array([s.klass for s in id_samples])
    class_means = np.stack([x_id[klass == c + 1].mean(axis=0) for c in range(spec.n_classes)])
    center = class_means.mean(axis=0)
    radius = float(np.sqrt(((class_means - center) ** 2).sum(axis=1)).max())

    n_gauss = spec.n_ood - spec.n_ood // 2
    n_uniform = spec.n_ood // 2
    samples: list[Sample] = []
    sid = 0
    counts = _class_counts(n_gauss, OOD_COMPONENTS)
    for count in counts:
        direction = rng.standard_normal(spec.dim)
        direction /= np.sqrt((direction**2).sum())
        mean = center + (radius + spec.ood_offset) * direction
        x = mean + rng.standard_normal((count, spec.dim))
        for row in x:
            samples.append(Sample(id=sid, x=row, category=CATEGORY_OOD, klass=-1))
            sid += 1

    lo, hi = x_id.min(axis=0), x_id.max(axis=0)
    box_center, box_half = (lo + hi) / 2.0, (hi - lo) / 2.0 * 1.5
    x = rng.uniform(box_center - box_half, box_center + box_half, size=(n_uniform, spec.dim))
    for row in x:
        samples.append(Sample(id=sid, x=row, category=CATEGORY_OOD, klass=-1))
        sid += 1
    return samples


def _gen_test(spec: BenchmarkSpec, means: np.ndarray, rng: np.random.Generator) -> Dataset:
    samples: list[Sample] = []
    sid = 0
    for c, count in enumerate(_class_counts(spec.n_test, spec.n_classes)):
        x = means[c] + rng.standard_normal((count, spec.dim))
        for row in x:
            samples.append(Sample(id=sid, x=row, category=CATEGORY_ID, klass=c + 1))
            sid += 1
    return Dataset.from_samples(samples, spec.n_classes)


@dataclass
class BenchmarkResult:
    dataset: Dataset
    test_dataset: Dataset
    manifest: dict


def dataset_digest(dataset: Dataset) -> str:
    """sha256 of the canonical text serialization."""
    buf = io.StringIO()
    buf.write(f"{len(dataset)} {dataset.dim} {dataset.n_classes}\n")
    for r in range(len(dataset)):
        vals = " ".join("%.17g" % v for v in dataset.x[r])
        buf.write(f"{dataset.ids[r]} {dataset._categories[r]} {dataset._classes[r]} {vals}\n")
    return hashlib.sha256(buf.getvalue().encode()).hexdigest()


def build(spec: BenchmarkSpec) -> BenchmarkResult:
    """Generate the full benchmark in memory; counts match the spec exactly."""
    rng = np.random.default_rng(spec.seed)
    id_samples, means = gen_id(spec, rng)
    committee = committee_train(id_samples, spec)
    ambiguous, short = gen_ambiguous(spec, id_samples, committee, rng)
    if short:
        raise BudgetExhausted(
            f"ambiguity filter kept only {len(ambiguous)} of {spec.n_ambiguous} "
            f"samples within {100 * spec.n_ambiguous} attempts"
        )
    ood = gen_ood(spec, id_samples, rng)
    test_dataset = _gen_test(spec, means, rng)

    x = np.concatenate(
        [np.stack([s.x for s in group]) for group in (id_samples, ambiguous, ood)]
    )
    cats = np.concatenate(
        [np.array([s.category for s in group]) for group in (id_samples, ambiguous, ood)]
    )
    classes = np.concatenate(
        [np.array([s.klass for s in group]) for group in (id_samples, ambiguous, ood)]
    )
    perm = rng.permutation(len(x))
    dataset = Dataset(
        ids=np.arange(len(x)),
        x=x[perm],
        categories=cats[perm],
        classes=classes[perm],
        n_classes=spec.n_classes,
    )
    manifest = {
        "n_id": len(id_samples),
        "n_ambiguous": len(ambiguous),
        "n_ood": len(ood),
        "n_total": len(dataset),
        "n_test": len(test_dataset),
        "digest": dataset_digest(dataset),
        "test_digest": dataset_digest(test_dataset),
    }
    for key, value in sorted(asdict(spec).items()):
        manifest[f"spec.{key}"] = value
    return BenchmarkResult(dataset=dataset, test_dataset=test_dataset, manifest=manifest)


def manifest_path_for(out_path) -> Path:
    return Path(out_path).with_suffix(".manifest")


def test_path_for(out_path) -> Path:
    p = Path(out_path)
    return p.with_name(p.stem + ".test" + p.suffix)


def assemble(spec: BenchmarkSpec, out_path) -> BenchmarkResult:
    """Build the pool and write ``<out>``, ``<out stem>.test<suffix>`` and the
    ``.manifest`` sidecar; manifest lines are ``key = value``."""
    result = build(spec)
    out_path = Path(out_path)
    write_dataset(result.dataset, out_path)
    write_dataset(result.test_dataset, test_path_for(out_path))
    result.manifest["path"] = out_path.name
    result.manifest["test_path"] = test_path_for(out_path).name
    with open(manifest_path_for(out_path), "w") as fh:
        for key, value in result.manifest.items():
            fh.write(f"{key} = {value}\n")
    return result


def ingest_embeddings(path) -> Dataset:
    """Parse and validate an externally produced embedding file."""
    return read_dataset(path, origin="ingested")
