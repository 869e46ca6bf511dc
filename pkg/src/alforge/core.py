"""Domain types, pool bookkeeping, and the dataset on-disk format.

Categories are encoded as integers throughout: 0 = in-distribution (iD),
1 = ambiguous, 2 = out-of-distribution (OoD). iD samples carry a class label
in ``1..K``; non-iD samples carry class ``-1``. Sample ids are dense integers
assigned at dataset construction; ordering by id is the universal tie-break
for every downstream selection rule.

Ground truth (category and class) lives inside :class:`Dataset` but must be
read only through the oracle and the evaluator; acquisition code receives
feature arrays and ids with truth stripped.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

CATEGORY_ID = 0
CATEGORY_AMBIGUOUS = 1
CATEGORY_OOD = 2

CATEGORY_NAMES = {CATEGORY_ID: "iD", CATEGORY_AMBIGUOUS: "ambiguous", CATEGORY_OOD: "OoD"}

# Floats are written with 17 significant digits, which round-trips IEEE-754
# doubles exactly.
_FLOAT_FMT = "%.17g"


class AlforgeError(Exception):
    """Base class for all package errors."""


class DuplicateAnnotation(AlforgeError):
    pass


class AnnotatedNotInUnlabeled(AlforgeError):
    pass


class DimensionMismatch(AlforgeError):
    pass


class DatasetFormatError(AlforgeError):
    """A dataset file violated the on-disk format; message names the line."""


class MalformedHeader(DatasetFormatError):
    pass


class BadCategoryCode(DatasetFormatError):
    pass


class ClassOutOfRange(DatasetFormatError):
    pass


@dataclass(frozen=True)
class Sample:
    """One pool element: feature vector plus hidden ground truth."""

    id: int
    x: np.ndarray
    category: int
    klass: int
    origin: str = "generated"


@dataclass(frozen=True)
class LabeledExample:
    """An oracle-assigned label: ``y in 1..K`` for iD, ``y = K + 1`` otherwise."""

    sample_id: int
    y: int


class Dataset:
    """Array-backed sample collection with truth kept behind accessors.

    The feature matrix ``x`` and the id vector are public; the category and
    class arrays are private and should be read only via :meth:`category_of`
    and :meth:`class_of` (the oracle/evaluator boundary).
    """

    def __init__(
        self,
        ids: np.ndarray,
        x: np.ndarray,
        categories: np.ndarray,
        classes: np.ndarray,
        n_classes: int,
        origin: str = "generated",
    ):
        ids = np.asarray(ids, dtype=np.int64)
        x = np.asarray(x, dtype=np.float64)
        categories = np.asarray(categories, dtype=np.int64)
        classes = np.asarray(classes, dtype=np.int64)
        if x.ndim != 2 or len(ids) != len(x):
            raise DimensionMismatch("ids and feature matrix disagree in length")
        if len(np.unique(ids)) != len(ids):
            raise DatasetFormatError("sample ids are not unique")
        self.ids = ids
        self.x = x
        self.n_classes = int(n_classes)
        self.origin = origin
        self._categories = categories
        self._classes = classes
        self._row_of = {int(i): r for r, i in enumerate(ids)}

    @classmethod
    def from_samples(cls, samples: Sequence[Sample], n_classes: int, origin: str = "generated") -> "Dataset":
        ids = np.array([s.id for s in samples], dtype=np.int64)
        x = np.stack([np.asarray(s.x, dtype=np.float64) for s in samples])
        cats = np.array([s.category for s in samples], dtype=np.int64)
        classes = np.array([s.klass for s in samples], dtype=np.int64)
        return cls(ids, x, cats, classes, n_classes, origin)

    def __len__(self) -> int:
        return len(self.ids)

    @property
    def dim(self) -> int:
        return self.x.shape[1]

    def row_of(self, sample_id: int) -> int:
        try:
            return self._row_of[int(sample_id)]
        except KeyError:
            raise KeyError(f"unknown sample id {sample_id}") from None

    def features(self, sample_ids: Iterable[int]) -> np.ndarray:
        rows = [self.row_of(i) for i in sample_ids]
        return self.x[rows]

    def category_of(self, sample_id: int) -> int:
        """Ground-truth category; oracle/evaluator use only."""
        return int(self._categories[self.row_of(sample_id)])

    def class_of(self, sample_id: int) -> int:
        """Ground-truth iD class (``-1`` for non-iD); oracle/evaluator use only."""
        return int(self._classes[self.row_of(sample_id)])

    def sample(self, sample_id: int) -> Sample:
        r = self.row_of(sample_id)
        return Sample(
            id=int(self.ids[r]),
            x=self.x[r].copy(),
            category=int(self._categories[r]),
            klass=int(self._classes[r]),
            origin=self.origin,
        )


@dataclass(frozen=True)
class PoolState:
    """Disjoint labeled/unlabeled pools plus the acquisition-round counter.

    Instances are immutable; :func:`pool_update` returns a new state. The
    labeled mapping preserves annotation order.
    """

    labeled: dict[int, LabeledExample]
    unlabeled: frozenset[int]
    stage: int = 0

    @classmethod
    def initial(cls, sample_ids: Iterable[int]) -> "PoolState":
        return cls(labeled={}, unlabeled=frozenset(int(i) for i in sample_ids), stage=0)

    @property
    def n_labeled(self) -> int:
        return len(self.labeled)

    @property
    def n_unlabeled(self) -> int:
        return len(self.unlabeled)

    def labeled_id_count(self, n_classes: int) -> int:
        """Number of labeled examples carrying a target-class label (y <= K)."""
        return sum(1 for ex in self.labeled.values() if ex.y <= n_classes)

    def unlabeled_sorted(self) -> list[int]:
        return sorted(self.unlabeled)


def pool_update(pool: PoolState, annotated: Sequence[LabeledExample]) -> PoolState:
    """Move annotated samples from the unlabeled to the labeled pool.

    Raises :class:`DuplicateAnnotation` if an id appears twice in ``annotated``
    and :class:`AnnotatedNotInUnlabeled` if any id is not currently unlabeled.
    The stage counter increments by exactly one, also for an empty batch.
    """
    seen: set[int] = set()
    for ex in annotated:
        if ex.sample_id in seen:
            raise DuplicateAnnotation(f"sample {ex.sample_id} annotated twice")
        seen.add(ex.sample_id)
        if ex.sample_id not in pool.unlabeled:
            raise AnnotatedNotInUnlabeled(
                f"sample {ex.sample_id} is not in the unlabeled pool"
            )
    labeled = dict(pool.labeled)
    for ex in annotated:
        labeled[ex.sample_id] = ex
    return PoolState(
        labeled=labeled,
        unlabeled=pool.unlabeled - seen,
        stage=pool.stage + 1,
    )


@dataclass
class StageQueries:
    """Oracle-query counts for one acquisition round, split by category."""

    queried_id: int = 0
    queried_ambiguous: int = 0
    queried_ood: int = 0

    @property
    def total(self) -> int:
        return self.queried_id + self.queried_ambiguous + self.queried_ood


@dataclass
class AnnotationLedger:
    """Per-stage and cumulative accounting of oracle queries."""

    stages: list[StageQueries] = field(default_factory=list)

    def begin_stage(self) -> StageQueries:
        rec = StageQueries()
        self.stages.append(rec)
        return rec

    def record(self, category: int) -> None:
        """Count one oracle query against the current stage record."""
        if not self.stages:
            self.begin_stage()
        rec = self.stages[-1]
        if category == CATEGORY_ID:
            rec.queried_id += 1
        elif category == CATEGORY_AMBIGUOUS:
            rec.queried_ambiguous += 1
        elif category == CATEGORY_OOD:
            rec.queried_ood += 1
        else:
            raise ValueError(f"unknown category code {category}")

    @property
    def cumulative_cost(self) -> int:
        return sum(rec.total for rec in self.stages)


def ledger_totals(ledger: AnnotationLedger) -> tuple[int, int, int]:
    """Return ``(cost, iD_count, nonID_count)`` aggregated over all stages."""
    id_count = sum(rec.queried_id for rec in ledger.stages)
    nonid = sum(rec.queried_ambiguous + rec.queried_ood for rec in ledger.stages)
    return id_count + nonid, id_count, nonid


def write_dataset(dataset: Dataset, path) -> None:
    """Write the line-oriented text format: ``n d K`` header, one sample per line.

    Each sample line is ``id category class v_1 ... v_d`` with values printed
    at 17 significant digits (bit-exact round trip for doubles).
    """
    with open(path, "w") as fh:
        fh.write(f"{len(dataset)} {dataset.dim} {dataset.n_classes}\n")
        for r in range(len(dataset)):
            vals = " ".join(_FLOAT_FMT % v for v in dataset.x[r])
            fh.write(
                f"{dataset.ids[r]} {dataset._categories[r]} {dataset._classes[r]} {vals}\n"
            )


def read_dataset(path, origin: str = "ingested") -> Dataset:
    """Parse and validate a dataset file; format errors name the line number."""
    with open(path) as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise MalformedHeader("line 1: empty file")
    head = lines[0].split()
    if len(head) != 3:
        raise MalformedHeader(f"line 1: expected 'n d K', got {lines[0]!r}")
    try:
        n, d, k = (int(tok) for tok in head)
    except ValueError:
        raise MalformedHeader(f"line 1: non-integer header field in {lines[0]!r}") from None
    if n < 0 or d < 1 or k < 1:
        raise MalformedHeader(f"line 1: invalid sizes n={n} d={d} K={k}")
    body = [ln for ln in lines[1:] if ln.strip()]
    if len(body) != n:
        raise DatasetFormatError(
            f"line {len(lines)}: header promises {n} samples, file has {len(body)}"
        )

    ids = np.empty(n, dtype=np.int64)
    cats = np.empty(n, dtype=np.int64)
    classes = np.empty(n, dtype=np.int64)
    x = np.empty((n, d))
    for r, line in enumerate(body):
        lineno = r + 2
        tok = line.split()
        if len(tok) != 3 + d:
            raise DimensionMismatch(
                f"line {lineno}: expected {3 + d} fields, got {len(tok)}"
            )
        try:
            sid, cat, cls = int(tok[0]), int(tok[1]), int(tok[2])
            vec = np.array([float(t) for t in tok[3:]])
        except ValueError:
            raise DatasetFormatError(f"line {lineno}: unparseable field") from None
        if cat not in (CATEGORY_ID, CATEGORY_AMBIGUOUS, CATEGORY_OOD):
            raise BadCategoryCode(f"line {lineno}: category code {cat}")
        if cat == CATEGORY_ID:
            if not 1 <= cls <= k:
                raise ClassOutOfRange(
                    f"line {lineno}: iD class {cls} outside 1..{k}"
                )
        elif cls != -1:
            raise ClassOutOfRange(
                f"line {lineno}: non-iD sample must have class -1, got {cls}"
            )
        ids[r], cats[r], classes[r] = sid, cat, cls
        x[r] = vec
    if len(np.unique(ids)) != n:
        raise DatasetFormatError("duplicate sample id in file")
    return Dataset(ids, x, cats, classes, k, origin=origin)
