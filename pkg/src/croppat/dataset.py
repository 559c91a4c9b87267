"""Labeled NDVI time-series data: CSV I/O, splitting, scaling, synthesis."""

import csv
import math
import re
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .rng import make_rng

LABEL_RE = re.compile(r"^[A-Za-z0-9_-]+$")


class DataError(ValueError):
    """Malformed or unusable input data."""


class Sample(NamedTuple):
    features: np.ndarray
    label: int


@dataclass(frozen=True, eq=False)
class Dataset:
    """An immutable ``(n, F)`` feature matrix with integer labels.

    ``labels[i]`` indexes into ``class_names``.  The arrays are made
    read-only on construction so a Dataset can be shared freely.
    """

    features: np.ndarray
    labels: np.ndarray
    class_names: tuple

    def __post_init__(self):
        X = np.array(self.features, dtype=np.float64, copy=True)
        y = np.array(self.labels, dtype=np.int64, copy=True)
        names = tuple(str(c) for c in self.class_names)
        if X.ndim != 2:
            raise DataError(f"features must be 2-D, got shape {X.shape}")
        if y.shape != (X.shape[0],):
            raise DataError(f"{y.shape[0]} labels for {X.shape[0]} samples")
        if y.size and (y.min() < 0 or y.max() >= len(names)):
            raise DataError("label index outside class_names")
        if len(set(names)) != len(names):
            raise DataError("duplicate class names")
        X.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "features", X)
        object.__setattr__(self, "labels", y)
        object.__setattr__(self, "class_names", names)

    @property
    def feature_count(self) -> int:
        return self.features.shape[1]

    @property
    def n_classes(self) -> int:
        return len(self.class_names)

    def __len__(self):
        return self.features.shape[0]

    def __iter__(self):
        for x, y in zip(self.features, self.labels):
            yield Sample(x, int(y))

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        return (
            self.class_names == other.class_names
            and self.features.shape == other.features.shape
            and np.array_equal(self.features, other.features)
            and np.array_equal(self.labels, other.labels)
        )

    def class_counts(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.n_classes)

    def subset(self, indices) -> "Dataset":
        idx = np.asarray(indices, dtype=np.int64)
        return Dataset(self.features[idx], self.labels[idx], self.class_names)

    def with_features(self, features) -> "Dataset":
        return Dataset(features, self.labels, self.class_names)


# --------------------------------------------------------------------------
# CSV

def write_csv(d: Dataset, path) -> None:
    """Write ``f0,...,f{F-1},label`` rows; floats use shortest round-trip repr."""
    for name in d.class_names:
        if not LABEL_RE.match(name):
            raise DataError(f"class name {name!r} is not CSV-safe")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([f"f{i}" for i in range(d.feature_count)] + ["label"])
        for x, y in zip(d.features, d.labels):
            w.writerow([repr(float(v)) for v in x] + [d.class_names[y]])


def load_csv(path) -> Dataset:
    """Read a dataset written by :func:`write_csv`.

    Class names are indexed in order of first appearance.  Errors carry the
    1-based line number of the offending row.
    """
    path = Path(path)
    if not path.is_file():
        raise DataError(f"no such data file: {path}")
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file, expected a header row") from None
        if len(header) < 2 or header[-1] != "label":
            raise DataError(f"{path}: header must be f0,...,f{{F-1}},label")
        n_feat = len(header) - 1
        expected = [f"f{i}" for i in range(n_feat)]
        if header[:-1] != expected:
            raise DataError(f"{path}: header feature columns must be f0..f{n_feat - 1}")

        rows, labels, names, index = [], [], [], {}
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != n_feat + 1:
                raise DataError(
                    f"{path}: row {lineno} has {len(row) - 1} features, header declares {n_feat}"
                )
            try:
                vals = [float(v) for v in row[:-1]]
            except ValueError:
                raise DataError(f"{path}: row {lineno} has a non-numeric feature") from None
            if not all(math.isfinite(v) for v in vals):
                raise DataError(f"{path}: row {lineno} has a non-finite feature")
            name = row[-1]
            if not LABEL_RE.match(name):
                raise DataError(f"{path}: row {lineno} has invalid label {name!r}")
            if name not in index:
                index[name] = len(names)
                names.append(name)
            rows.append(vals)
            labels.append(index[name])

    X = np.array(rows, dtype=np.float64).reshape(len(rows), n_feat)
    return Dataset(X, np.array(labels, dtype=np.int64), tuple(names))


# --------------------------------------------------------------------------
# splitting

@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float = 0.70
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.train_fraction < 1.0:
            raise ValueError("train_fraction must lie in (0, 1)")


def split_indices(d: Dataset, spec: SplitSpec):
    """Per-class seeded shuffle; returns sorted ``(train_idx, test_idx)``.

    Each class with ``n`` members sends ``round(train_fraction * n)`` to
    train, clamped so both sides keep at least one.  ``round`` is Python's
    round-half-to-even.
    """
    rng = make_rng(spec.seed)
    train, test = [], []
    for c in range(d.n_classes):
        members = np.flatnonzero(d.labels == c)
        n = members.size
        if n == 0:
            continue
        if n < 2:
            raise DataError(f"class {d.class_names[c]!r} has {n} sample; need at least 2 to split")
        n_train = min(max(round(spec.train_fraction * n), 1), n - 1)
        perm = rng.permutation(members)
        train.append(perm[:n_train])
        test.append(perm[n_train:])
    if not train:
        raise DataError("cannot split an empty dataset")
    return np.sort(np.concatenate(train)), np.sort(np.concatenate(test))


def stratified_split(d: Dataset, spec: SplitSpec):
    tr, te = split_indices(d, spec)
    return d.subset(tr), d.subset(te)


# --------------------------------------------------------------------------
# min-max scaling

@dataclass(frozen=True, eq=False)
class Normalizer:
    minimum: np.ndarray
    maximum: np.ndarray

    def apply(self, d: Dataset) -> Dataset:
        return d.with_features(self.transform(d.features))

    def transform(self, X):
        X = np.asarray(X, dtype=np.float64)
        span = self.maximum - self.minimum
        out = np.zeros_like(X)
        ok = span > 0
        # constant training features map to 0; test values are not clamped
        out[..., ok] = (X[..., ok] - self.minimum[ok]) / span[ok]
        return out

    def to_dict(self):
        return {"minimum": self.minimum.tolist(), "maximum": self.maximum.tolist()}

    @classmethod
    def from_dict(cls, doc):
        return cls(np.asarray(doc["minimum"], dtype=np.float64),
                   np.asarray(doc["maximum"], dtype=np.float64))


def fit_normalizer(train: Dataset) -> Normalizer:
    if len(train) == 0:
        raise DataError("cannot fit a normalizer on an empty training set")
    return Normalizer(train.features.min(axis=0), train.features.max(axis=0))


def apply(n: Normalizer, d: Dataset) -> Dataset:
    return n.apply(d)


# --------------------------------------------------------------------------
# synthetic phenology

@dataclass(frozen=True)
class SyntheticSpec:
    class_count: int = 8
    feature_count: int = 136
    samples_per_class: int = 50
    noise_sigma: float = 0.02
    seed: int = 0

    def __post_init__(self):
        if self.class_count < 2:
            raise ValueError("class_count must be >= 2")
        if self.feature_count < 2:
            raise ValueError("feature_count must be >= 2")
        if self.samples_per_class < 1:
            raise ValueError("samples_per_class must be positive")
        if not self.noise_sigma >= 0:
            raise ValueError("noise_sigma must be nonnegative")


def double_logistic(t, base, amplitude, green_up, senescence, rise, fall):
    """Seasonal NDVI curve: logistic green-up minus logistic senescence."""
    t = np.asarray(t, dtype=np.float64)
    up = 1.0 / (1.0 + np.exp(-(t - green_up) / rise))
    down = 1.0 / (1.0 + np.exp(-(t - senescence) / fall))
    return base + amplitude * (up - down)


def phenology_params(k, class_count):
    """Deterministic curve parameters for class ``k`` of ``class_count``.

    Green-up dates spread evenly over the first 55% of the season; season
    length, peak height and slopes cycle with short periods so that
    neighbouring classes differ in more than one respect.
    """
    frac = k / (class_count - 1)
    green_up = 0.08 + 0.55 * frac
    length = 0.22 + 0.08 * (k % 3)
    return dict(
        base=0.12 + 0.03 * (k % 2),
        amplitude=0.55 + 0.1 * ((k + 1) % 3) / 2,
        green_up=green_up,
        senescence=green_up + length,
        rise=0.025 + 0.01 * (k % 2),
        fall=0.03 + 0.01 * ((k + 1) % 2),
    )


def class_prototypes(class_count, feature_count) -> np.ndarray:
    t = np.linspace(0.0, 1.0, feature_count)
    return np.stack([double_logistic(t, **phenology_params(k, class_count))
                     for k in range(class_count)])


def generate_synthetic(spec: SyntheticSpec) -> Dataset:
    """Noisy draws around per-class double-logistic NDVI prototypes.

    Samples are emitted class-major: all of class 0, then class 1, ...
    """
    protos = class_prototypes(spec.class_count, spec.feature_count)
    labels = np.repeat(np.arange(spec.class_count), spec.samples_per_class)
    X = protos[labels].copy()
    if spec.noise_sigma > 0:
        rng = make_rng(spec.seed)
        X += spec.noise_sigma * rng.standard_normal(X.shape)
    names = tuple(f"crop{k}" for k in range(spec.class_count))
    return Dataset(X, labels, names)
