"""Pearson and Spearman correlation between checkpoints across trials."""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import LengthMismatch, NoCommonCheckpoints, TooFewSamples
from .trials import TrialPool, value_at_fraction

log = logging.getLogger(__name__)


class CorrelationMethod(enum.Enum):
    SPEARMAN = "spearman"
    PEARSON = "pearson"


def _pair(xs, ys) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(xs, dtype=float).ravel()
    y = np.asarray(ys, dtype=float).ravel()
    if x.size != y.size:
        raise LengthMismatch(f"{x.size} vs {y.size} values")
    if x.size < 2:
        raise TooFewSamples("correlation needs at least 2 paired values")
    return x, y


def pearson(xs: Sequence[float], ys: Sequence[float]) -> Optional[float]:
    """Pearson r, or None when either input has zero variance."""
    x, y = _pair(xs, ys)
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = float(dx @ dx)
    syy = float(dy @ dy)
    if sxx == 0.0 or syy == 0.0:
        return None
    r = float(dx @ dy) / math.sqrt(sxx * syy)
    return min(1.0, max(-1.0, r))


def average_ranks(values: Sequence[float]) -> np.ndarray:
    """1-based ranks; tied values share the mean of the ranks they span."""
    a = np.asarray(values, dtype=float).ravel()
    order = np.argsort(a, kind="mergesort")
    ranks = np.empty(a.size, dtype=float)
    sorted_a = a[order]
    i = 0
    while i < a.size:
        j = i
        while j + 1 < a.size and sorted_a[j + 1] == sorted_a[i]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def spearman(xs: Sequence[float], ys: Sequence[float]) -> Optional[float]:
    x, y = _pair(xs, ys)
    return pearson(average_ranks(x), average_ranks(y))


@dataclass(frozen=True)
class CorrelationMatrix:
    fractions: tuple[float, ...]
    values: tuple[tuple[Optional[float], ...], ...]
    method: CorrelationMethod

    def as_array(self) -> np.ndarray:
        """Matrix with NaN where the correlation is undefined."""
        return np.array([[np.nan if v is None else v for v in row] for row in self.values], dtype=float)


def checkpoint_correlation_matrix(
    pool: TrialPool,
    method: CorrelationMethod | str = CorrelationMethod.SPEARMAN,
    running_best: bool = False,
) -> CorrelationMatrix:
    """Correlation across trials between values at every pair of common checkpoints.

    Checkpoints missing from any trial are dropped (logged as a warning).
    With ``running_best`` the value at a checkpoint is the best value seen
    up to it instead of the raw value.
    """
    method = CorrelationMethod(method) if isinstance(method, str) else method
    if len(pool) < 2:
        raise TooFewSamples("correlation matrix needs at least 2 trials")
    fracs = pool.common_fractions
    if not fracs:
        raise NoCommonCheckpoints("trials share no checkpoint fractions")
    dropped = [f for f in pool.all_fractions if round(f, 9) not in {round(c, 9) for c in fracs}]
    if dropped:
        log.warning("dropping %d checkpoint fractions not shared by all trials: %s", len(dropped), dropped)
    cols = np.array([[value_at_fraction(t, f) for f in fracs] for t in pool.trials], dtype=float)
    if running_best:
        cols = np.maximum.accumulate(cols, axis=1)
    corr = spearman if method is CorrelationMethod.SPEARMAN else pearson
    n = len(fracs)
    out: list[list[Optional[float]]] = [[None] * n for _ in range(n)]
    for i in range(n):
        for j in range(i, n):
            r = corr(cols[:, i], cols[:, j])
            if i == j and r is not None:
                r = 1.0
            out[i][j] = out[j][i] = r
    return CorrelationMatrix(tuple(fracs), tuple(tuple(r) for r in out), method)
