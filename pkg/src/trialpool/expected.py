"""Expected best-of-x validation performance under i.i.d. draws from a pool."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import EmptyValues


@dataclass(frozen=True)
class CurvePoint:
    x: int
    mean: float
    std: float
    min: float
    max: float


@dataclass(frozen=True)
class ExpectedMaxCurve:
    points: tuple[CurvePoint, ...]

    def __len__(self):
        return len(self.points)

    def __getitem__(self, i):
        return self.points[i]

    def at(self, x: int) -> CurvePoint:
        return self.points[x - 1]

    @property
    def x(self) -> np.ndarray:
        return np.array([p.x for p in self.points])

    @property
    def mean(self) -> np.ndarray:
        return np.array([p.mean for p in self.points])

    @property
    def std(self) -> np.ndarray:
        return np.array([p.std for p in self.points])

    def band(self, kind: str = "std") -> tuple[np.ndarray, np.ndarray]:
        """Lower/upper shading: ``"std"`` is mean +/- std, ``"minmax"`` the observed pool range."""
        if kind == "std":
            return self.mean - self.std, self.mean + self.std
        if kind == "minmax":
            n = len(self.points)
            return np.full(n, self.points[0].min), np.full(n, self.points[0].max)
        raise ValueError(f"unknown band kind {kind!r}")


def max_distribution(values: Sequence[float], x: int) -> tuple[np.ndarray, np.ndarray]:
    """Distinct sorted values and P(max of x draws == value)."""
    v, counts = np.unique(np.asarray(values, dtype=float), return_counts=True)
    cdf = np.cumsum(counts) / counts.sum()
    cdf[-1] = 1.0
    prev = np.concatenate(([0.0], cdf[:-1]))
    return v, cdf**x - prev**x


def expected_max_curve(values: Sequence[float], x_max: int) -> ExpectedMaxCurve:
    """Expected maximum (and its std) of x draws with replacement, x = 1..x_max."""
    arr = np.asarray(values, dtype=float).ravel()
    if arr.size == 0:
        raise EmptyValues("expected_max_curve needs at least one value")
    if not np.all(np.isfinite(arr)):
        raise ValueError("values must be finite")
    if x_max < 1:
        raise ValueError(f"x_max must be >= 1, got {x_max}")
    v, counts = np.unique(arr, return_counts=True)
    cdf = np.cumsum(counts) / arr.size
    cdf[-1] = 1.0
    prev = np.concatenate(([0.0], cdf[:-1]))
    lo, hi = float(v[0]), float(v[-1])
    gaps = np.diff(v)
    points = []
    for x in range(1, x_max + 1):
        below = cdf[:-1] ** x
        # E[max] = v_max - sum_i gap_i * F(v_i)^x; every term shrinks with x,
        # so the mean is nondecreasing even in floating point.
        mean = min(max(hi - float(gaps @ below), lo), hi)
        w = cdf**x - prev**x
        var = float(w @ (v - mean) ** 2)
        points.append(CurvePoint(x, mean, float(np.sqrt(max(var, 0.0))), lo, hi))
    return ExpectedMaxCurve(tuple(points))


def expected_max(values: Sequence[float], x: int) -> float:
    """Mean of the max of ``x`` draws; equivalent to the last point of the curve."""
    v, w = max_distribution(values, x)
    return float(w @ v)
