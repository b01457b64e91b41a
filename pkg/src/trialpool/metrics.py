"""Binary classification metrics used as trial performance values."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Sequence

from .errors import EmptyInput, LengthMismatch, ParseError
from .trials import MetricKind


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    tn: int
    fp: int
    fn: int

    def __post_init__(self):
        if min(self.tp, self.tn, self.fp, self.fn) < 0:
            raise ValueError("confusion counts must be nonnegative")
        if self.total < 1:
            raise EmptyInput("confusion counts must sum to at least 1")

    @property
    def total(self) -> int:
        return self.tp + self.tn + self.fp + self.fn


def confusion_counts(labels: Sequence[int], preds: Sequence[int]) -> ConfusionCounts:
    """Counts with label 1 as the positive class."""
    if len(labels) != len(preds):
        raise LengthMismatch(f"{len(labels)} labels vs {len(preds)} predictions")
    if not labels:
        raise EmptyInput("no labels")
    tp = tn = fp = fn = 0
    for y, yhat in zip(labels, preds):
        if y not in (0, 1) or yhat not in (0, 1):
            raise ValueError(f"binary labels expected, got ({y!r}, {yhat!r})")
        if y == 1:
            if yhat == 1:
                tp += 1
            else:
                fn += 1
        elif yhat == 1:
            fp += 1
        else:
            tn += 1
    return ConfusionCounts(tp, tn, fp, fn)


def accuracy(c: ConfusionCounts) -> float:
    return (c.tp + c.tn) / c.total


def f1(c: ConfusionCounts) -> float:
    denom = 2 * c.tp + c.fp + c.fn
    return 2 * c.tp / denom if denom else 0.0


def mcc(c: ConfusionCounts) -> float:
    # 0 when any marginal is empty, the chance-level value.
    factors = (c.tp + c.fp, c.tp + c.fn, c.tn + c.fp, c.tn + c.fn)
    if 0 in factors:
        return 0.0
    num = c.tp * c.tn - c.fp * c.fn
    r = num / math.sqrt(math.prod(factors))
    return min(1.0, max(-1.0, r))


def metric_value(kind: MetricKind, c: ConfusionCounts) -> float:
    kind = MetricKind.parse(kind)
    if kind is MetricKind.ACCURACY:
        return accuracy(c)
    if kind is MetricKind.F1:
        return f1(c)
    if kind is MetricKind.ACC_F1_MEAN:
        return (accuracy(c) + f1(c)) / 2
    return mcc(c)


def metric_from_csv(path, kind: MetricKind) -> float:
    """Score one checkpoint from a two-column (label, prediction) CSV.

    A header row is skipped when its first cell is not an integer.
    """
    labels, preds = [], []
    with open(path, newline="", encoding="utf-8") as fh:
        for lineno, row in enumerate(csv.reader(fh), 1):
            if not row or not "".join(row).strip():
                continue
            if len(row) < 2:
                raise ParseError(f"{path}:{lineno}: expected label,prediction")
            try:
                y, yhat = int(row[0]), int(row[1])
            except ValueError:
                if lineno == 1:
                    continue
                raise ParseError(f"{path}:{lineno}: non-integer label") from None
            labels.append(y)
            preds.append(yhat)
    return metric_value(kind, confusion_counts(labels, preds))
