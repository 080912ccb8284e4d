"""Confusion matrices and binary / micro / macro classification measures.

A measure whose defining ratio has a zero denominator is *undefined*; it is
represented as ``None`` in Python and rendered as ``"--"`` everywhere else.
Ratios are formed from integer counts as exact fractions and converted to
float only at the end.
"""

from __future__ import annotations

from dataclasses import dataclass, fields
from fractions import Fraction
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .network import MlpNetwork, predict_batch
from .training import encode_one_hot, mse

__all__ = [
    "MEASURES",
    "UNDEFINED",
    "BinaryMetrics",
    "ConfusionMatrix",
    "MetricsReport",
    "PerClassCounts",
    "average_accuracy",
    "binary_metrics",
    "classification_measures",
    "confusion_from_predictions",
    "evaluate",
    "f_score",
    "format_value",
    "macro_average",
    "micro_average",
    "per_class_counts",
]

UNDEFINED = "--"

MetricValue = Optional[float]

KINDS = ("precision", "specificity", "sensitivity")


@dataclass(frozen=True, eq=False)
class ConfusionMatrix:
    """Counts with rows indexed by true class and columns by predicted class."""

    counts: np.ndarray

    def __post_init__(self):
        counts = np.asarray(self.counts)
        if counts.ndim != 2 or counts.shape[0] != counts.shape[1]:
            raise ValueError(f"confusion matrix must be square, got shape {counts.shape}")
        if (counts < 0).any():
            raise ValueError("confusion counts must be non-negative")
        object.__setattr__(self, "counts", counts.astype(np.int64))

    @property
    def m(self) -> int:
        return self.counts.shape[0]

    @property
    def n(self) -> int:
        return int(self.counts.sum())

    def __eq__(self, other):
        if not isinstance(other, ConfusionMatrix):
            return NotImplemented
        return np.array_equal(self.counts, other.counts)


@dataclass(frozen=True)
class PerClassCounts:
    tp: tuple[int, ...]
    fp: tuple[int, ...]
    fn: tuple[int, ...]
    tn: tuple[int, ...]

    @property
    def m(self) -> int:
        return len(self.tp)

    @property
    def n(self) -> int:
        return self.tp[0] + self.fp[0] + self.fn[0] + self.tn[0]

    def present(self) -> list[int]:
        """Classes that occur in the evaluated truth labels."""
        return [i for i in range(self.m) if self.tp[i] + self.fn[i] > 0]


def confusion_from_predictions(truth: Sequence[int], pred: Sequence[int], m: int) -> ConfusionMatrix:
    truth = np.asarray(truth, dtype=np.int64)
    pred = np.asarray(pred, dtype=np.int64)
    if truth.shape != pred.shape or truth.ndim != 1:
        raise ValueError(f"label lists differ in shape: {truth.shape} vs {pred.shape}")
    for name, labels in (("truth", truth), ("pred", pred)):
        if labels.size and (labels.min() < 0 or labels.max() >= m):
            raise ValueError(f"{name} labels must lie in [0, {m})")
    counts = np.zeros((m, m), dtype=np.int64)
    np.add.at(counts, (truth, pred), 1)
    return ConfusionMatrix(counts)


def per_class_counts(cm: ConfusionMatrix) -> PerClassCounts:
    counts = cm.counts
    n = int(counts.sum())
    tp = np.diag(counts)
    fn = counts.sum(axis=1) - tp
    fp = counts.sum(axis=0) - tp
    tn = n - tp - fn - fp
    as_ints = lambda a: tuple(int(v) for v in a)  # noqa: E731
    return PerClassCounts(as_ints(tp), as_ints(fp), as_ints(fn), as_ints(tn))


# -- exact helpers -------------------------------------------------------------

def _ratio(num: int, den: int) -> Fraction | None:
    return Fraction(num, den) if den else None


def _to_float(value) -> MetricValue:
    return None if value is None else float(value)


def _class_ratio(pcc: PerClassCounts, i: int, kind: str) -> Fraction | None:
    tp, fp, fn, tn = pcc.tp[i], pcc.fp[i], pcc.fn[i], pcc.tn[i]
    if kind == "precision":
        return _ratio(tp, tp + fp)
    if kind == "specificity":
        return _ratio(tn, fp + tn)
    if kind == "sensitivity":
        return _ratio(tp, tp + fn)
    raise ValueError(f"unknown measure kind {kind!r}; expected one of {KINDS}")


def _average_accuracy(pcc: PerClassCounts) -> Fraction:
    per_class = [Fraction(pcc.tp[i] + pcc.tn[i], pcc.tp[i] + pcc.fn[i] + pcc.fp[i] + pcc.tn[i])
                 for i in range(pcc.m)]
    return sum(per_class, Fraction(0)) / pcc.m


def _micro(pcc: PerClassCounts, kind: str) -> Fraction | None:
    tp, fp, fn, tn = (sum(v) for v in (pcc.tp, pcc.fp, pcc.fn, pcc.tn))
    if kind == "precision":
        return _ratio(tp, tp + fp)
    if kind == "specificity":
        return _ratio(tn, fp + tn)
    if kind == "sensitivity":
        return _ratio(tp, tp + fn)
    raise ValueError(f"unknown measure kind {kind!r}; expected one of {KINDS}")


def _macro(pcc: PerClassCounts, kind: str, evaluable=None) -> Fraction | None:
    classes = pcc.present() if evaluable is None else list(evaluable)
    if not classes:
        raise ValueError("macro average over an empty class set")
    ratios = [_class_ratio(pcc, i, kind) for i in classes]
    if any(r is None for r in ratios):
        return None
    return sum(ratios, Fraction(0)) / len(ratios)


def _f(precision, recall, beta):
    if precision is None or recall is None:
        return None
    b2 = Fraction(beta) ** 2
    den = b2 * precision + recall
    if den == 0:
        return Fraction(0)
    return (b2 + 1) * precision * recall / den


# -- public measures -------------------------------------------------------------

class BinaryMetrics(NamedTuple):
    accuracy: MetricValue
    sensitivity: MetricValue
    specificity: MetricValue
    precision: MetricValue
    fscore: MetricValue


def binary_metrics(tp: int, fp: int, fn: int, tn: int, beta: float = 1.0) -> BinaryMetrics:
    if min(tp, fp, fn, tn) < 0:
        raise ValueError("counts must be non-negative")
    total = tp + fp + fn + tn
    if total == 0:
        raise ValueError("all counts are zero")
    b2 = Fraction(beta) ** 2
    fscore_den = (b2 + 1) * tp + b2 * fn + fp
    fscore = (b2 + 1) * tp / fscore_den if fscore_den else None
    return BinaryMetrics(
        accuracy=_to_float(Fraction(tp + tn, total)),
        sensitivity=_to_float(_ratio(tp, tp + fn)),
        specificity=_to_float(_ratio(tn, fp + tn)),
        precision=_to_float(_ratio(tp, tp + fp)),
        fscore=_to_float(fscore),
    )


def average_accuracy(pcc: PerClassCounts) -> float:
    """Mean over classes of the per-class (one-vs-rest) accuracy."""
    return float(_average_accuracy(pcc))


def micro_average(pcc: PerClassCounts, kind: str) -> MetricValue:
    """Pool the counts of all classes, then take the ratio."""
    return _to_float(_micro(pcc, kind))


def macro_average(pcc: PerClassCounts, kind: str, evaluable=None) -> MetricValue:
    """Mean of per-class ratios over ``evaluable`` classes.

    ``evaluable`` defaults to the classes present in the truth labels.
    Undefined when any of those classes has a zero denominator, e.g. a
    present class that is never predicted makes macro precision undefined.
    """
    return _to_float(_macro(pcc, kind, evaluable))


def f_score(precision: MetricValue, recall: MetricValue, beta: float = 1.0) -> MetricValue:
    if not beta > 0:
        raise ValueError("beta must be positive")
    value = _f(None if precision is None else Fraction(precision),
               None if recall is None else Fraction(recall), beta)
    return _to_float(value)


def classification_measures(cm: ConfusionMatrix, beta: float = 1.0) -> dict[str, MetricValue]:
    """The nine count-based measures of a results column, keyed by report field."""
    pcc = per_class_counts(cm)
    p_mu, p_m = _micro(pcc, "precision"), _macro(pcc, "precision")
    r_mu, r_m = _micro(pcc, "sensitivity"), _macro(pcc, "sensitivity")
    exact = {
        "accuracy": _average_accuracy(pcc),
        "precision_micro": p_mu,
        "precision_macro": p_m,
        "specificity_micro": _micro(pcc, "specificity"),
        "specificity_macro": _macro(pcc, "specificity"),
        "sensitivity_micro": r_mu,
        "sensitivity_macro": r_m,
        "fscore_micro": _f(p_mu, r_mu, beta),
        "fscore_macro": _f(p_m, r_m, beta),
    }
    return {k: _to_float(v) for k, v in exact.items()}


# -- report ----------------------------------------------------------------------

@dataclass(frozen=True)
class MetricsReport:
    mse_train: float
    time_train_s: float
    mse_test: float
    accuracy: MetricValue
    precision_micro: MetricValue
    precision_macro: MetricValue
    specificity_micro: MetricValue
    specificity_macro: MetricValue
    sensitivity_micro: MetricValue
    sensitivity_macro: MetricValue
    fscore_micro: MetricValue
    fscore_macro: MetricValue

    def to_dict(self) -> dict:
        return {f.name: UNDEFINED if getattr(self, f.name) is None else getattr(self, f.name)
                for f in fields(self)}

    @classmethod
    def from_dict(cls, d: dict) -> MetricsReport:
        return cls(**{f.name: None if d[f.name] == UNDEFINED else float(d[f.name])
                      for f in fields(cls)})


# Report field -> row label, in table order.
MEASURES = (
    ("mse_train", "MSE_train"),
    ("time_train_s", "Time_train"),
    ("mse_test", "MSE_test"),
    ("accuracy", "Accuracy"),
    ("precision_micro", "Precision_mu"),
    ("precision_macro", "Precision_M"),
    ("specificity_micro", "Specificity_mu"),
    ("specificity_macro", "Specificity_M"),
    ("sensitivity_micro", "Sensitivity_mu"),
    ("sensitivity_macro", "Sensitivity_M"),
    ("fscore_micro", "F-score_mu"),
    ("fscore_macro", "F-score_M"),
)


def format_value(value: MetricValue, digits: int = 4) -> str:
    return UNDEFINED if value is None else f"{value:.{digits}f}"


def evaluate(net: MlpNetwork, inputs: np.ndarray, labels: Sequence[int], mse_train: float,
             time_train_s: float, beta: float = 1.0, c: float = 1.0) -> MetricsReport:
    """Score ``net`` on a held-out set and assemble the full report."""
    labels = np.asarray(labels, dtype=np.int64)
    if labels.size == 0:
        raise ValueError("empty test set")
    pred = predict_batch(net, inputs, c)
    cm = confusion_from_predictions(labels, pred, net.n_out)
    mse_test = mse(net, inputs, encode_one_hot(labels, net.n_out), c)
    return MetricsReport(
        mse_train=float(mse_train),
        time_train_s=float(time_train_s),
        mse_test=mse_test,
        **classification_measures(cm, beta),
    )
