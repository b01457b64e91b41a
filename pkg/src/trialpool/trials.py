"""Trial records, pools and seed grids.

A trial is one fine-tuning run identified by its weight-initialization (WI)
and data-order (DO) seeds, carrying the validation curve recorded at
fractions of the full training budget.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping

import numpy as np

from .errors import (
    DuplicateSeedPair,
    EmptyPool,
    IncompleteGrid,
    MissingFinalEval,
    MixedMetricKinds,
    MixedTasks,
    NoCheckpointBefore,
    NonMonotoneFractions,
    OutOfRangeValue,
    ParseError,
)

# Slack for fractions such as 3 * 0.1 that land a hair above the nominal grid.
FRACTION_TOL = 1e-9


class MetricKind(enum.Enum):
    ACCURACY = "accuracy"
    F1 = "f1"
    ACC_F1_MEAN = "acc_f1_mean"
    MCC = "mcc"

    @property
    def value_range(self) -> tuple[float, float]:
        if self is MetricKind.MCC:
            return (-1.0, 1.0)
        return (0.0, 1.0)

    @property
    def higher_is_better(self) -> bool:
        return True

    @classmethod
    def parse(cls, name) -> "MetricKind":
        if isinstance(name, cls):
            return name
        key = str(name).strip().lower().replace("-", "_")
        aliases = {"acc": "accuracy", "acc_f1": "acc_f1_mean", "accf1mean": "acc_f1_mean"}
        key = aliases.get(key, key)
        try:
            return cls(key)
        except ValueError:
            raise ParseError(f"unknown metric kind {name!r}") from None


class SeedAxis(enum.Enum):
    WI = "wi"
    DO = "do"

    @classmethod
    def parse(cls, name) -> "SeedAxis":
        if isinstance(name, cls):
            return name
        try:
            return cls(str(name).strip().lower())
        except ValueError:
            raise ParseError(f"unknown seed axis {name!r}") from None


@dataclass(frozen=True)
class EvalPoint:
    fraction: float
    value: float


@dataclass(frozen=True)
class TrialRecord:
    task_id: str
    wi_seed: int
    do_seed: int
    metric_kind: MetricKind
    evals: tuple[EvalPoint, ...]
    meta: Mapping[str, str] = field(default_factory=dict)

    @property
    def seeds(self) -> tuple[int, int]:
        return (self.wi_seed, self.do_seed)

    @property
    def final_value(self) -> float:
        return self.evals[-1].value

    @property
    def fractions(self) -> tuple[float, ...]:
        return tuple(e.fraction for e in self.evals)

    @property
    def label(self) -> str:
        return f"{self.task_id}[wi={self.wi_seed}, do={self.do_seed}]"


def value_at_fraction(trial: TrialRecord, f: float) -> float:
    """Value of the last evaluation taken at or before fraction ``f``.

    Never interpolates: a stopping rule acting at ``f`` can only see
    evaluations already recorded.
    """
    if not 0.0 < f <= 1.0 + FRACTION_TOL:
        raise ValueError(f"fraction must lie in (0, 1], got {f}")
    found = None
    for e in trial.evals:
        if e.fraction <= f + FRACTION_TOL:
            found = e.value
        else:
            break
    if found is None:
        raise NoCheckpointBefore(
            f"{trial.label} has no evaluation at or before fraction {f}",
            trial=trial.label,
            fraction=f,
        )
    return found


def best_value(trial: TrialRecord, fractions: Iterable[float] | None = None) -> float:
    """Best value seen at the given checkpoints (all checkpoints when None).

    This is the score of a trial when the best checkpoint is kept, rather
    than the final one.
    """
    if fractions is None:
        return max(e.value for e in trial.evals)
    return max(value_at_fraction(trial, f) for f in fractions)


def check_trial(trial: TrialRecord) -> None:
    evals = trial.evals
    if not evals:
        raise MissingFinalEval(f"{trial.label} has no evaluations", trial=trial.label)
    lo, hi = trial.metric_kind.value_range
    prev = 0.0
    for e in evals:
        if not 0.0 < e.fraction <= 1.0 + FRACTION_TOL:
            raise OutOfRangeValue(f"{trial.label}: fraction {e.fraction} outside (0, 1]", trial=trial.label)
        if e.fraction <= prev:
            raise NonMonotoneFractions(
                f"{trial.label}: fractions not strictly increasing at {e.fraction}",
                trial=trial.label,
            )
        if not math.isfinite(e.value) or not lo <= e.value <= hi:
            raise OutOfRangeValue(
                f"{trial.label}: value {e.value} outside [{lo}, {hi}] for {trial.metric_kind.value}",
                trial=trial.label,
            )
        prev = e.fraction
    if abs(evals[-1].fraction - 1.0) > FRACTION_TOL:
        raise MissingFinalEval(
            f"{trial.label}: last evaluation at fraction {evals[-1].fraction}, expected 1",
            trial=trial.label,
        )


@dataclass(frozen=True)
class TrialPool:
    task_id: str
    metric_kind: MetricKind
    trials: tuple[TrialRecord, ...]

    def __len__(self) -> int:
        return len(self.trials)

    def __iter__(self):
        return iter(self.trials)

    @cached_property
    def final_values(self) -> np.ndarray:
        out = np.array([t.final_value for t in self.trials], dtype=float)
        out.flags.writeable = False
        return out

    def values_at(self, f: float) -> np.ndarray:
        return np.array([value_at_fraction(t, f) for t in self.trials], dtype=float)

    @cached_property
    def common_fractions(self) -> tuple[float, ...]:
        """Checkpoint fractions present in every trial, ascending."""
        common = _fraction_keys(self.trials[0])
        for t in self.trials[1:]:
            common &= _fraction_keys(t)
        first = {round(e.fraction, 9): e.fraction for e in self.trials[0].evals}
        return tuple(first[k] for k in sorted(common))

    @cached_property
    def all_fractions(self) -> tuple[float, ...]:
        seen: dict[float, float] = {}
        for t in self.trials:
            for e in t.evals:
                seen.setdefault(round(e.fraction, 9), e.fraction)
        return tuple(seen[k] for k in sorted(seen))


def _fraction_keys(trial: TrialRecord) -> set[float]:
    return {round(e.fraction, 9) for e in trial.evals}


def validate_pool(raw_records: Iterable[TrialRecord]) -> TrialPool:
    records = list(raw_records)
    if not records:
        raise EmptyPool("no trial records supplied")
    first = records[0]
    seen: dict[tuple[int, int], TrialRecord] = {}
    for r in records:
        if r.metric_kind is not first.metric_kind:
            raise MixedMetricKinds(
                f"{r.label} uses {r.metric_kind.value}, pool uses {first.metric_kind.value}",
                trial=r.label,
            )
        if r.task_id != first.task_id:
            raise MixedTasks(f"{r.label} belongs to task {r.task_id!r}, pool is {first.task_id!r}", trial=r.label)
        if r.seeds in seen:
            raise DuplicateSeedPair(
                f"duplicate seed pair (wi={r.wi_seed}, do={r.do_seed})",
                trial=r.label,
                wi_seed=r.wi_seed,
                do_seed=r.do_seed,
            )
        seen[r.seeds] = r
        check_trial(r)
    ordered = tuple(sorted(records, key=lambda r: r.seeds))
    return TrialPool(task_id=first.task_id, metric_kind=first.metric_kind, trials=ordered)


@dataclass(frozen=True)
class SeedGrid:
    """Fully crossed WI x DO view of a pool. Rows are WI seeds, columns DO seeds."""

    wi_seeds: tuple[int, ...]
    do_seeds: tuple[int, ...]
    final_values: np.ndarray
    trials: tuple[tuple[TrialRecord, ...], ...] = ()

    @property
    def shape(self) -> tuple[int, int]:
        return self.final_values.shape

    def seeds(self, axis: SeedAxis) -> tuple[int, ...]:
        return self.wi_seeds if SeedAxis.parse(axis) is SeedAxis.WI else self.do_seeds

    def matrix(self, axis: SeedAxis) -> np.ndarray:
        """Final values with one row per seed on ``axis``."""
        return self.final_values if SeedAxis.parse(axis) is SeedAxis.WI else self.final_values.T

    def trial_groups(self, axis: SeedAxis) -> list[tuple[TrialRecord, ...]]:
        if SeedAxis.parse(axis) is SeedAxis.WI:
            return [tuple(row) for row in self.trials]
        return [tuple(col) for col in zip(*self.trials)]

    def transpose(self) -> "SeedGrid":
        trials = tuple(zip(*self.trials)) if self.trials else ()
        return SeedGrid(self.do_seeds, self.wi_seeds, _frozen(self.final_values.T), trials)


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.flags.writeable = False
    return a


def build_seed_grid(pool: TrialPool, sort: bool = False) -> SeedGrid:
    """Arrange a fully crossed pool as a WI x DO grid of final values.

    With ``sort=True`` rows are ordered by descending mean (best WI seed on
    top) and columns by ascending mean (best DO seed right-most). Ties keep
    seed order.
    """
    by_pair = {t.seeds: t for t in pool.trials}
    wi = sorted({t.wi_seed for t in pool.trials})
    do = sorted({t.do_seed for t in pool.trials})
    missing = [(i, j) for i in wi for j in do if (i, j) not in by_pair]
    if missing:
        raise IncompleteGrid(f"grid is missing {len(missing)} (wi, do) pairs: {missing[:10]}", missing=missing)
    trials = [[by_pair[(i, j)] for j in do] for i in wi]
    values = np.array([[t.final_value for t in row] for row in trials], dtype=float)
    if sort:
        row_order = sorted(range(len(wi)), key=lambda k: (-values[k].mean(), wi[k]))
        col_order = sorted(range(len(do)), key=lambda k: (values[:, k].mean(), do[k]))
        wi = [wi[k] for k in row_order]
        do = [do[k] for k in col_order]
        trials = [[trials[r][c] for c in col_order] for r in row_order]
        values = values[np.ix_(row_order, col_order)]
    return SeedGrid(tuple(wi), tuple(do), _frozen(values), tuple(tuple(r) for r in trials))


# ---------------------------------------------------------------------------
# JSON-lines ingestion


def record_from_dict(obj: Mapping) -> TrialRecord:
    try:
        evals = tuple(EvalPoint(float(e["frac"]), float(e["value"])) for e in obj["evals"])
        meta = {str(k): str(v) for k, v in (obj.get("meta") or {}).items()}
        wi, do = obj["wi_seed"], obj["do_seed"]
        if isinstance(wi, bool) or isinstance(do, bool) or int(wi) != wi or int(do) != do:
            raise ParseError(f"seeds must be integers, got wi={wi!r} do={do!r}")
        return TrialRecord(
            task_id=str(obj["task"]),
            wi_seed=int(wi),
            do_seed=int(do),
            metric_kind=MetricKind.parse(obj["metric"]),
            evals=evals,
            meta=meta,
        )
    except (KeyError, TypeError) as exc:
        raise ParseError(f"malformed trial record: {exc!r}") from None


def record_to_dict(trial: TrialRecord) -> dict:
    out = {
        "task": trial.task_id,
        "metric": trial.metric_kind.value,
        "wi_seed": trial.wi_seed,
        "do_seed": trial.do_seed,
        "evals": [{"frac": e.fraction, "value": e.value} for e in trial.evals],
    }
    if trial.meta:
        out["meta"] = dict(trial.meta)
    return out


def parse_jsonl(lines: Iterable[str]) -> list[TrialRecord]:
    records = []
    for lineno, line in enumerate(lines, 1):
        line = line.strip()
        if not line:
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(f"line {lineno}: {exc.msg}", line=lineno) from None
        records.append(record_from_dict(obj))
    return records


def dumps_jsonl(pool: TrialPool | Iterable[TrialRecord]) -> str:
    trials = pool.trials if isinstance(pool, TrialPool) else pool
    return "".join(json.dumps(record_to_dict(t)) + "\n" for t in trials)


def read_pool(path) -> TrialPool:
    with open(path, encoding="utf-8") as fh:
        return validate_pool(parse_jsonl(fh))
