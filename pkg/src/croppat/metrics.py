"""Confusion matrices and the agreement statistics derived from them."""

from dataclasses import dataclass
from typing import Optional

import numpy as np

# Lower edges of the Cohen's Kappa interpretation bands.  A value that falls
# between two tabulated ranges (e.g. 0.205, between 0.20 and 0.21) belongs
# to the lower band; anything in (0.99, 1) is still "nearly perfect".
KAPPA_BANDS = (
    (0.81, "nearly perfect"),
    (0.61, "substantial"),
    (0.41, "moderate"),
    (0.21, "fair"),
    (0.0, "slight"),
)
BAND_GAP_RULE = "values between tabulated bands are assigned to the lower band"


@dataclass(frozen=True, eq=False)
class ConfusionMatrix:
    """``counts[t, p]``: samples of true class ``t`` predicted as ``p``."""

    counts: np.ndarray
    class_names: tuple = ()

    def __post_init__(self):
        c = np.array(self.counts, dtype=np.int64, copy=True)
        if c.ndim != 2 or c.shape[0] != c.shape[1]:
            raise ValueError(f"confusion counts must be square, got {c.shape}")
        if (c < 0).any():
            raise ValueError("confusion counts must be nonnegative")
        c.setflags(write=False)
        object.__setattr__(self, "counts", c)
        names = tuple(self.class_names) or tuple(str(k) for k in range(c.shape[0]))
        if len(names) != c.shape[0]:
            raise ValueError("class_names length does not match the matrix")
        object.__setattr__(self, "class_names", names)

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def n_classes(self) -> int:
        return self.counts.shape[0]

    def one_vs_rest(self, k):
        """``(TP, FN, FP, TN)`` after collapsing to class ``k`` vs the rest."""
        c = self.counts
        tp = int(c[k, k])
        fn = int(c[k].sum()) - tp
        fp = int(c[:, k].sum()) - tp
        tn = self.total - tp - fn - fp
        return tp, fn, fp, tn


def confusion(truth, pred, n_classes, class_names=()) -> ConfusionMatrix:
    truth = np.asarray(truth, dtype=np.int64)
    pred = np.asarray(pred, dtype=np.int64)
    if truth.shape != pred.shape or truth.ndim != 1:
        raise ValueError(f"truth and pred lengths differ: {truth.shape} vs {pred.shape}")
    if truth.size == 0:
        raise ValueError("cannot build a confusion matrix from no samples")
    for name, arr in (("truth", truth), ("pred", pred)):
        if arr.min() < 0 or arr.max() >= n_classes:
            raise ValueError(f"{name} label outside 0..{n_classes - 1}")
    flat = np.bincount(truth * n_classes + pred, minlength=n_classes * n_classes)
    return ConfusionMatrix(flat.reshape(n_classes, n_classes), class_names)


def accuracy(cm: ConfusionMatrix) -> float:
    return float(np.trace(cm.counts)) / cm.total


def expected_agreement(cm: ConfusionMatrix) -> float:
    """Chance agreement from the row and column marginals."""
    n = float(cm.total)
    rows = cm.counts.sum(axis=1).astype(np.float64)
    cols = cm.counts.sum(axis=0).astype(np.float64)
    return float(np.dot(rows, cols)) / (n * n)


def kappa(cm: ConfusionMatrix) -> Optional[float]:
    """Cohen's Kappa, or ``None`` when chance agreement is exactly 1."""
    p0 = accuracy(cm)
    pe = expected_agreement(cm)
    if pe >= 1.0:
        return None
    return (p0 - pe) / (1.0 - pe)


def kappa_band(value: Optional[float]) -> Optional[str]:
    if value is None:
        return None
    if value >= 1.0:
        return "perfect"
    if value == 0.0:
        return "equivalent to chance"
    if value < 0.0:
        return "less than chance"
    for lower, name in KAPPA_BANDS:
        if value >= lower:
            return name
    raise AssertionError("unreachable")  # pragma: no cover


def sensitivity(cm: ConfusionMatrix, k: int) -> Optional[float]:
    tp, fn, _, _ = cm.one_vs_rest(k)
    return tp / (tp + fn) if tp + fn else None


def specificity(cm: ConfusionMatrix, k: int) -> Optional[float]:
    _, _, fp, tn = cm.one_vs_rest(k)
    return tn / (tn + fp) if tn + fp else None


@dataclass(frozen=True)
class ClassRates:
    name: str
    sensitivity: Optional[float]
    specificity: Optional[float]

    def to_dict(self):
        return {"class": self.name, "sensitivity": self.sensitivity,
                "specificity": self.specificity}


@dataclass(frozen=True)
class MetricSet:
    accuracy: float
    kappa: Optional[float]
    kappa_band: Optional[str]
    per_class: tuple

    @classmethod
    def from_confusion(cls, cm: ConfusionMatrix) -> "MetricSet":
        k = kappa(cm)
        rates = tuple(
            ClassRates(name, sensitivity(cm, i), specificity(cm, i))
            for i, name in enumerate(cm.class_names)
        )
        return cls(accuracy(cm), k, kappa_band(k), rates)

    def to_dict(self):
        return {
            "accuracy": self.accuracy,
            "kappa": self.kappa,
            "kappa_band": self.kappa_band,
            "per_class": [r.to_dict() for r in self.per_class],
        }

    @classmethod
    def from_dict(cls, doc):
        rates = tuple(ClassRates(r["class"], r["sensitivity"], r["specificity"])
                      for r in doc["per_class"])
        return cls(doc["accuracy"], doc["kappa"], doc["kappa_band"], rates)


def evaluate(truth, pred, class_names) -> MetricSet:
    return MetricSet.from_confusion(confusion(truth, pred, len(class_names), class_names))
