"""Start many trials, stop early, continue some.

A policy ``(t, f, p)`` starts ``t`` trials, evaluates them after a fraction
``f`` of training, and trains only the ``p`` most promising to completion.
Its cost is ``(t*f + p*(1-f)) * s`` epochs when a full trial takes ``s``.
Policies are scored by resampling trials with replacement from a recorded
pool; the score of one run is the best final value among the survivors.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np

from . import rng
from ._config import DEFAULT_REPS, DEFAULT_STEPS_PER_TRIAL, default_seed, default_threads
from .errors import (
    EmptyFeasibleSet,
    EmptyPool,
    EnumerationTooLarge,
    InvalidPolicy,
    PerfectBaseline,
)
from .expected import expected_max
from .trials import FRACTION_TOL, SeedAxis, SeedGrid, TrialPool, value_at_fraction

CHUNK_REPS = 4096
BUDGET_TOL = 1e-9
DEFAULT_ENUMERATION_CAP = 10**7


@dataclass(frozen=True)
class EarlyStopPolicy:
    t: int
    f: float
    p: int
    s: float = DEFAULT_STEPS_PER_TRIAL

    def __post_init__(self):
        if int(self.t) != self.t or self.t < 1:
            raise InvalidPolicy(f"t must be a positive integer, got {self.t}")
        if int(self.p) != self.p or self.p < 1:
            raise InvalidPolicy(f"p must be a positive integer, got {self.p}")
        if self.p > self.t:
            raise InvalidPolicy(f"cannot continue p={self.p} of t={self.t} trials")
        if not 0.0 < self.f <= 1.0 + FRACTION_TOL:
            raise InvalidPolicy(f"f must lie in (0, 1], got {self.f}")
        if not self.s > 0:
            raise InvalidPolicy(f"s must be positive, got {self.s}")

    @property
    def budget(self) -> float:
        return budget_of(self)


def budget_of(policy: EarlyStopPolicy) -> float:
    """Training cost in epochs: ``(t*f + p*(1-f)) * s``."""
    return (policy.t * policy.f + policy.p * (1.0 - policy.f)) * policy.s


@dataclass(frozen=True)
class SimulationReport:
    expected_perf: float
    std_perf: float
    budget_epochs: float
    reps: int
    policy: EarlyStopPolicy

    def to_dict(self) -> dict:
        out = asdict(self)
        out["budget_trials"] = self.budget_epochs / self.policy.s
        return out


@dataclass(frozen=True)
class OptimizationResult:
    budget_trials: int
    best_policy: EarlyStopPolicy
    expected_perf: float
    std_perf: float
    baseline_perf: float
    relative_error_reduction: float
    n_candidates: int

    def to_row(self) -> dict:
        return {
            "x": self.budget_trials,
            "t": self.best_policy.t,
            "f": self.best_policy.f,
            "p": self.best_policy.p,
            "expected_perf": self.expected_perf,
            "baseline_perf": self.baseline_perf,
            "rer": self.relative_error_reduction,
        }


def relative_error_reduction(perf_es: float, perf_base: float) -> float:
    """Drop in error (one minus performance) relative to the baseline's error."""
    if perf_base >= 1.0:
        raise PerfectBaseline("baseline performance is 1; relative error reduction undefined")
    base_err = 1.0 - perf_base
    return (base_err - (1.0 - perf_es)) / base_err


# ---------------------------------------------------------------------------
# Selection kernel


def _descending_rank(early: np.ndarray) -> np.ndarray:
    """Dense rank, 0 = best early value; equal values share a rank."""
    _, inv = np.unique(-early, return_inverse=True)
    return inv.astype(np.int64)


def _top_p_outcomes(rank: np.ndarray, final: np.ndarray, idx: np.ndarray, p: int) -> np.ndarray:
    """Best final value among the ``p`` best-ranked draws of each row.

    Ties in rank go to the earlier draw.
    """
    t = idx.shape[1]
    keys = rank[idx] * t + np.arange(t, dtype=np.int64)
    if p < t:
        keys = np.partition(keys, p - 1, axis=1)[:, :p]
    cols = keys % t
    return final[np.take_along_axis(idx, cols, axis=1)].max(axis=1)


def _all_p_outcomes(rank: np.ndarray, final: np.ndarray, idx: np.ndarray) -> np.ndarray:
    """Outcomes for every p = 1..t at once; column p-1 holds policy p."""
    t = idx.shape[1]
    keys = np.sort(rank[idx] * t + np.arange(t, dtype=np.int64), axis=1)
    ordered = final[np.take_along_axis(idx, keys % t, axis=1)]
    return np.maximum.accumulate(ordered, axis=1)


def _chunks(reps: int):
    for start in range(0, reps, CHUNK_REPS):
        yield np.arange(start, min(start + CHUNK_REPS, reps), dtype=np.uint64)


def _map_chunks(fn, reps: int, threads: int | None):
    threads = default_threads() if threads is None else max(1, int(threads))
    chunks = list(_chunks(reps))
    if threads == 1 or len(chunks) == 1:
        return [fn(c) for c in chunks]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(fn, chunks))


def _simulate_arrays(
    early: np.ndarray, final: np.ndarray, t: int, p: int, reps: int, master_seed: int, threads: int | None
) -> np.ndarray:
    rank = _descending_rank(early)
    n = final.size

    def run(rep_ids):
        idx = rng.uniform_indices(master_seed, rep_ids, t, n)
        return _top_p_outcomes(rank, final, idx, p)

    return np.concatenate(_map_chunks(run, reps, threads))


def _enumerate_arrays(early: np.ndarray, final: np.ndarray, t: int, p: int, cap: int) -> np.ndarray:
    # Walks every ordered t-tuple and orders draws with lexsort, independently
    # of the rank/partition kernel used by the sampler.
    n = final.size
    total = n**t
    if total > cap:
        raise EnumerationTooLarge(f"{n}^{t} = {total} draw tuples exceeds the cap of {cap}")
    outcomes = np.empty(total, dtype=float)
    pos = np.arange(t)
    step = max(1, 2**20 // t)
    for start in range(0, total, step):
        lin = np.arange(start, min(start + step, total), dtype=np.int64)
        digits = np.empty((lin.size, t), dtype=np.int64)
        rest = lin.copy()
        for k in range(t - 1, -1, -1):
            digits[:, k] = rest % n
            rest //= n
        ev = early[digits]
        order = np.lexsort((np.broadcast_to(pos, ev.shape), -ev), axis=-1)
        kept = np.take_along_axis(digits, order[:, :p], axis=1)
        outcomes[lin] = final[kept].max(axis=1)
    return outcomes


def _pool_arrays(pool: TrialPool, f: float) -> tuple[np.ndarray, np.ndarray]:
    if len(pool) == 0:
        raise EmptyPool("cannot simulate on an empty pool")
    return pool.values_at(f), np.asarray(pool.final_values, dtype=float)


def simulate_policy(
    pool: TrialPool,
    policy: EarlyStopPolicy,
    reps: int = DEFAULT_REPS,
    master_seed: int | None = None,
    threads: int | None = None,
) -> SimulationReport:
    """Monte-Carlo estimate of a policy's expected best final value."""
    if reps < 1:
        raise ValueError("reps must be >= 1")
    master_seed = default_seed() if master_seed is None else master_seed
    early, final = _pool_arrays(pool, policy.f)
    out = _simulate_arrays(early, final, policy.t, policy.p, reps, master_seed, threads)
    return SimulationReport(float(out.mean()), float(out.std()), budget_of(policy), reps, policy)


def enumerate_policy(
    pool: TrialPool, policy: EarlyStopPolicy, cap: int = DEFAULT_ENUMERATION_CAP
) -> SimulationReport:
    """Exact expectation over all ``len(pool) ** t`` equiprobable draw tuples."""
    early, final = _pool_arrays(pool, policy.f)
    out = _enumerate_arrays(early, final, policy.t, policy.p, cap)
    return SimulationReport(float(out.mean()), float(out.std()), budget_of(policy), 0, policy)


# ---------------------------------------------------------------------------
# Policy search


def feasible_policies(
    budget_trials: int, f_grid: Sequence[float], s: float = DEFAULT_STEPS_PER_TRIAL, max_trials: int | None = None
) -> list[EarlyStopPolicy]:
    """Every ``(t, f, p)`` on the grid whose cost fits ``budget_trials`` full trials."""
    out = []
    for f in sorted(set(float(v) for v in f_grid)):
        for t, p_max in _t_p_bounds(budget_trials, f, max_trials):
            out.extend(EarlyStopPolicy(t, f, p, s) for p in range(1, p_max + 1))
    return out


def _t_p_bounds(x: int, f: float, max_trials: int | None) -> list[tuple[int, int]]:
    # Budgets are compared in full-trial units; s cancels.
    if f >= 1.0 - FRACTION_TOL:
        t_max = int(math.floor(x + BUDGET_TOL))
    else:
        t_max = int(math.floor((x - (1.0 - f)) / f + BUDGET_TOL))
    if max_trials is not None:
        t_max = min(t_max, max_trials)
    bounds = []
    for t in range(1, t_max + 1):
        if f >= 1.0 - FRACTION_TOL:
            p_max = t
        else:
            p_max = min(t, int(math.floor((x - t * f) / (1.0 - f) + BUDGET_TOL)))
        if p_max >= 1:
            bounds.append((t, p_max))
    return bounds


def optimize_policy(
    pool: TrialPool,
    budget_trials: int,
    f_grid: Sequence[float] | None = None,
    reps: int = DEFAULT_REPS,
    master_seed: int | None = None,
    s: float = DEFAULT_STEPS_PER_TRIAL,
    max_trials: int | None = None,
    threads: int | None = None,
) -> OptimizationResult:
    """Best policy within a budget of ``budget_trials`` fully trained trials.

    Every candidate is scored on the same random draws (repetition ``r``
    uses the same stream for all candidates), which sharpens comparisons
    between policies. Ties prefer smaller t, then larger f, then smaller p.
    """
    if budget_trials < 1:
        raise ValueError("budget_trials must be >= 1")
    master_seed = default_seed() if master_seed is None else master_seed
    f_grid = pool.common_fractions if f_grid is None else tuple(f_grid)
    final = np.asarray(pool.final_values, dtype=float)
    n = final.size

    plans = []
    for f in sorted(set(float(v) for v in f_grid)):
        bounds = _t_p_bounds(budget_trials, f, max_trials)
        if bounds:
            plans.append((f, _descending_rank(pool.values_at(f)), bounds))
    if not plans:
        raise EmptyFeasibleSet(f"no policy fits a budget of {budget_trials} trials on f grid {list(f_grid)}")
    t_cap = max(t for _, _, b in plans for t, _ in b)

    def run(rep_ids):
        idx_all = rng.uniform_indices(master_seed, rep_ids, t_cap, n)
        sums = []
        for _, rank, bounds in plans:
            per_f = []
            for t, p_max in bounds:
                outcomes = _all_p_outcomes(rank, final, idx_all[:, :t])[:, :p_max]
                per_f.append(outcomes.sum(axis=0))
            sums.append(per_f)
        return sums

    partial = _map_chunks(run, reps, threads)

    best = None
    n_candidates = 0
    for fi, (f, _, bounds) in enumerate(plans):
        for ti, (t, p_max) in enumerate(bounds):
            total = partial[0][fi][ti].copy()
            for part in partial[1:]:
                total += part[fi][ti]
            means = total / reps
            n_candidates += p_max
            for p in range(1, p_max + 1):
                key = (-means[p - 1], t, -f, p)
                if best is None or key < best[0]:
                    best = (key, EarlyStopPolicy(t, f, p, s))

    policy = best[1]
    report = simulate_policy(pool, policy, reps, master_seed, threads)
    baseline = expected_max(final, budget_trials)
    try:
        rer = relative_error_reduction(report.expected_perf, baseline)
    except PerfectBaseline:
        rer = math.nan
    return OptimizationResult(
        budget_trials=budget_trials,
        best_policy=policy,
        expected_perf=report.expected_perf,
        std_perf=report.std_perf,
        baseline_perf=baseline,
        relative_error_reduction=rer,
        n_candidates=n_candidates,
    )


# ---------------------------------------------------------------------------
# Stopping whole seed groups (experimental)


def _group_arrays(grid: SeedGrid, axis: SeedAxis, f: float) -> tuple[np.ndarray, np.ndarray, int]:
    groups = grid.trial_groups(axis)
    if not groups or not groups[0]:
        raise EmptyPool("seed grid has no trials")
    early = np.array([np.mean([value_at_fraction(t, f) for t in g]) for g in groups], dtype=float)
    final = np.array([max(t.final_value for t in g) for g in groups], dtype=float)
    return early, final, len(groups[0])


def seed_stopping_policy(
    grid: SeedGrid, axis: SeedAxis, groups_started: int, f: float, groups_kept: int, s: float = DEFAULT_STEPS_PER_TRIAL
) -> EarlyStopPolicy:
    """Seed-group policy expressed in group units: one "trial" is a whole seed group.

    A group of ``m`` trials costs ``m * s`` epochs to train fully, so the
    returned policy's budget is ``(g_t*f + g_p*(1-f)) * s * m``.
    """
    axis = SeedAxis.parse(axis)
    n_seeds = len(grid.seeds(axis))
    if groups_started > n_seeds:
        raise InvalidPolicy(f"{groups_started} groups started but only {n_seeds} {axis.value} seeds exist")
    m = grid.matrix(axis).shape[1]
    return EarlyStopPolicy(groups_started, f, groups_kept, s * m)


def simulate_seed_stopping(
    grid: SeedGrid,
    axis: SeedAxis,
    groups_started: int,
    f: float,
    groups_kept: int,
    reps: int = DEFAULT_REPS,
    master_seed: int | None = None,
    s: float = DEFAULT_STEPS_PER_TRIAL,
    threads: int | None = None,
) -> SimulationReport:
    """Experimental: stop whole seed groups ranked by their mean value at ``f``.

    Each repetition draws ``groups_started`` seeds on ``axis`` with
    replacement; every seed brings all of its trials across the other axis.
    The ``groups_kept`` seeds with the best mean at ``f`` continue, and the
    outcome is the best final value among their trials.
    """
    policy = seed_stopping_policy(grid, axis, groups_started, f, groups_kept, s)
    master_seed = default_seed() if master_seed is None else master_seed
    early, final, _ = _group_arrays(grid, axis, f)
    out = _simulate_arrays(early, final, policy.t, policy.p, reps, master_seed, threads)
    return SimulationReport(float(out.mean()), float(out.std()), budget_of(policy), reps, policy)


def enumerate_seed_stopping(
    grid: SeedGrid,
    axis: SeedAxis,
    groups_started: int,
    f: float,
    groups_kept: int,
    s: float = DEFAULT_STEPS_PER_TRIAL,
    cap: int = DEFAULT_ENUMERATION_CAP,
) -> SimulationReport:
    policy = seed_stopping_policy(grid, axis, groups_started, f, groups_kept, s)
    early, final, _ = _group_arrays(grid, axis, f)
    out = _enumerate_arrays(early, final, policy.t, policy.p, cap)
    return SimulationReport(float(out.mean()), float(out.std()), budget_of(policy), 0, policy)
