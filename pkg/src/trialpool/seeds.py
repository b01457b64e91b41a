"""Seed-axis variance decomposition, seed ranking, one-way ANOVA and KDE."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DegenerateAxis, EmptyValues, TooFewGroups, TooFewSamples
from .specfun import f_sf
from .trials import SeedAxis, SeedGrid


@dataclass(frozen=True)
class AggregatedStdReport:
    axis: SeedAxis
    per_seed: tuple[tuple[int, float], ...]
    expected_std: float
    overall_std: float


@dataclass(frozen=True)
class AnovaResult:
    f_stat: float
    df_between: int
    df_within: int
    p_value: float

    def to_dict(self) -> dict:
        return {
            "f_stat": self.f_stat,
            "df_between": self.df_between,
            "df_within": self.df_within,
            "p_value": self.p_value,
        }


def aggregated_std(grid: SeedGrid, axis: SeedAxis) -> AggregatedStdReport:
    """Per-seed sample std (n-1) across the opposite axis, and their mean."""
    axis = SeedAxis.parse(axis)
    m = grid.matrix(axis)
    if m.shape[1] < 2:
        raise DegenerateAxis(
            f"each {axis.value} seed has {m.shape[1]} trial(s); need at least 2 for a sample std"
        )
    stds = m.std(axis=1, ddof=1)
    # The mean of equal values can be off by an ulp; constant groups are exactly 0.
    stds[np.ptp(m, axis=1) == 0] = 0.0
    overall = float(m.std(ddof=1)) if np.ptp(m) > 0 else 0.0
    per_seed = tuple((int(s), float(sd)) for s, sd in zip(grid.seeds(axis), stds))
    return AggregatedStdReport(
        axis=axis,
        per_seed=per_seed,
        expected_std=float(stds.mean()),
        overall_std=overall,
    )


def rank_seeds(grid: SeedGrid, axis: SeedAxis) -> list[tuple[int, float]]:
    """Seeds on ``axis`` sorted best first by mean final value; ties go to the lower seed."""
    axis = SeedAxis.parse(axis)
    means = grid.matrix(axis).mean(axis=1)
    pairs = [(int(s), float(mu)) for s, mu in zip(grid.seeds(axis), means)]
    return sorted(pairs, key=lambda p: (-p[1], p[0]))


def seed_values(grid: SeedGrid, axis: SeedAxis, seed: int) -> np.ndarray:
    """Final values of all trials sharing ``seed`` on ``axis``."""
    axis = SeedAxis.parse(axis)
    idx = grid.seeds(axis).index(seed)
    return np.array(grid.matrix(axis)[idx])


def anova_f_test(groups: Sequence[Sequence[float]]) -> AnovaResult:
    """One-way ANOVA F test for equal group means.

    When every group is constant but the means differ, F is reported as
    +inf with p = 0; when all values are identical, F = 0 and p = 1.
    """
    if len(groups) < 2:
        raise TooFewGroups(f"ANOVA needs at least 2 groups, got {len(groups)}")
    arrays = [np.asarray(g, dtype=float).ravel() for g in groups]
    for i, g in enumerate(arrays):
        if g.size < 2:
            raise TooFewSamples(f"group {i} has {g.size} value(s); need at least 2")
    k = len(arrays)
    n = sum(g.size for g in arrays)
    grand = np.concatenate(arrays).mean()
    ssb = float(sum(g.size * (g.mean() - grand) ** 2 for g in arrays))
    ssw = float(sum(((g - g.mean()) ** 2).sum() for g in arrays))
    dfb, dfw = k - 1, n - k
    if ssw == 0.0:
        if ssb == 0.0:
            return AnovaResult(0.0, dfb, dfw, 1.0)
        return AnovaResult(math.inf, dfb, dfw, 0.0)
    f_stat = (ssb / dfb) / (ssw / dfw)
    return AnovaResult(f_stat, dfb, dfw, f_sf(f_stat, dfb, dfw))


def best_worst_anova(grid: SeedGrid, axis: SeedAxis) -> AnovaResult:
    """ANOVA between the trials of the best and the worst seed on ``axis``."""
    ranked = rank_seeds(grid, axis)
    best, worst = ranked[0][0], ranked[-1][0]
    return anova_f_test([seed_values(grid, axis, best), seed_values(grid, axis, worst)])


def silverman_bandwidth(values: Sequence[float]) -> float:
    arr = np.asarray(values, dtype=float).ravel()
    n = arr.size
    if n == 0:
        raise EmptyValues("bandwidth of an empty sample")
    sigma = float(arr.std(ddof=1)) if n > 1 else 0.0
    if sigma == 0.0:
        return 1e-3 * max(float(np.abs(arr).max()), 1.0)
    q75, q25 = np.percentile(arr, [75, 25])
    iqr = float(q75 - q25)
    if iqr == 0.0:
        return sigma * n ** (-0.2)
    return 0.9 * min(sigma, iqr / 1.34) * n ** (-0.2)


def kde(
    values: Sequence[float], bandwidth: float | None = None, eval_points: int = 512
) -> tuple[np.ndarray, np.ndarray]:
    """Gaussian KDE on a uniform grid over [min - 3h, max + 3h].

    Returns ``(grid, density)``. Bandwidth defaults to Silverman's rule.
    """
    arr = np.asarray(values, dtype=float).ravel()
    if arr.size == 0:
        raise EmptyValues("kde needs at least one value")
    if bandwidth is None:
        h = silverman_bandwidth(arr)
    elif bandwidth > 0:
        h = float(bandwidth)
    else:
        raise ValueError(f"bandwidth must be positive, got {bandwidth}")
    if eval_points < 2:
        raise ValueError("eval_points must be at least 2")
    xs = np.linspace(arr.min() - 3 * h, arr.max() + 3 * h, eval_points)
    z = (xs[:, None] - arr[None, :]) / h
    density = np.exp(-0.5 * z * z).sum(axis=1) / (arr.size * h * math.sqrt(2 * math.pi))
    return xs, density
