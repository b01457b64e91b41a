"""Synthetic trial pools with known seed effects and divergent runs."""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from ._config import DEFAULT_MASTER_SEED
from .errors import InvalidConfig, ParseError
from .trials import EvalPoint, MetricKind, TrialPool, TrialRecord, validate_pool


def _default_checkpoints() -> tuple[float, ...]:
    return tuple(round(k / 10, 10) for k in range(1, 11))


@dataclass(frozen=True)
class SynthConfig:
    n_wi: int = 10
    n_do: int = 10
    base: float = 0.8
    wi_effect_scale: float = 0.02
    do_effect_scale: float = 0.02
    noise_scale: float = 0.01
    diverge_prob: float = 0.0
    diverge_value: float = 0.5
    checkpoints: tuple[float, ...] = field(default_factory=_default_checkpoints)
    curve_rate: float = 5.0
    master_seed: int = DEFAULT_MASTER_SEED
    metric: MetricKind = MetricKind.ACCURACY
    task: str = "synthetic"

    def __post_init__(self):
        object.__setattr__(self, "checkpoints", tuple(float(c) for c in self.checkpoints))
        object.__setattr__(self, "metric", MetricKind.parse(self.metric))
        problems = self.problems()
        if problems:
            raise InvalidConfig("invalid synth config: " + "; ".join(problems), fields=problems)

    def problems(self) -> list[str]:
        out = []
        for name in ("n_wi", "n_do"):
            v = getattr(self, name)
            if isinstance(v, bool) or int(v) != v or v < 1:
                out.append(f"{name} must be a positive integer (got {v!r})")
        for name in ("wi_effect_scale", "do_effect_scale", "noise_scale"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0):
                out.append(f"{name} must be a nonnegative real (got {v!r})")
        if not 0.0 <= self.diverge_prob <= 1.0:
            out.append(f"diverge_prob must lie in [0, 1] (got {self.diverge_prob!r})")
        if not (math.isfinite(self.curve_rate) and self.curve_rate > 0):
            out.append(f"curve_rate must be positive (got {self.curve_rate!r})")
        lo, hi = self.metric.value_range
        for name in ("base", "diverge_value"):
            v = getattr(self, name)
            if not (math.isfinite(v) and lo <= v <= hi):
                out.append(f"{name} must lie in [{lo}, {hi}] for {self.metric.value} (got {v!r})")
        cps = self.checkpoints
        if not cps:
            out.append("checkpoints must be nonempty")
        elif any(b <= a for a, b in zip(cps, cps[1:])) or cps[0] <= 0:
            out.append("checkpoints must be strictly increasing in (0, 1]")
        elif cps[-1] != 1.0:
            out.append(f"last checkpoint must be 1 (got {cps[-1]!r})")
        return out

    @classmethod
    def from_mapping(cls, data: Mapping) -> "SynthConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise InvalidConfig(f"unknown synth config fields: {unknown}", fields=unknown)
        kwargs = dict(data)
        if isinstance(kwargs.get("checkpoints"), str):
            kwargs["checkpoints"] = [float(c) for c in kwargs["checkpoints"].split(",")]
        try:
            return cls(**kwargs)
        except (TypeError, ValueError) as exc:
            if isinstance(exc, InvalidConfig):
                raise
            raise InvalidConfig(f"invalid synth config: {exc}") from None

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["metric"] = self.metric.value
        d["checkpoints"] = list(self.checkpoints)
        return d


def load_config(path) -> SynthConfig:
    """Read a flat key/value config (JSON, or YAML when the file is not JSON)."""
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    try:
        data = json.loads(text)
    except json.JSONDecodeError:
        import yaml

        try:
            data = yaml.safe_load(text)
        except yaml.YAMLError as exc:
            raise ParseError(f"{path}: not JSON or YAML: {exc}") from None
    if not isinstance(data, dict):
        raise InvalidConfig(f"{path}: expected a key/value mapping")
    return SynthConfig.from_mapping(data)


@dataclass(frozen=True)
class SynthTruth:
    """Ground truth behind a generated pool."""

    wi_effects: np.ndarray
    do_effects: np.ndarray
    noise: np.ndarray
    diverged: np.ndarray
    finals: np.ndarray


def generate(config: SynthConfig) -> tuple[TrialPool, SynthTruth]:
    """Generate a pool together with the effects it was built from."""
    c = config
    gen = np.random.default_rng(c.master_seed)
    # Fixed draw order keeps each quantity stable when another scale changes.
    a = gen.normal(0.0, 1.0, c.n_wi) * c.wi_effect_scale
    b = gen.normal(0.0, 1.0, c.n_do) * c.do_effect_scale
    eps = gen.normal(0.0, 1.0, (c.n_wi, c.n_do)) * c.noise_scale
    diverged = gen.random((c.n_wi, c.n_do)) < c.diverge_prob
    lo, hi = c.metric.value_range
    finals = np.clip(c.base + a[:, None] + b[None, :] + eps, lo, hi)

    taus = np.array(c.checkpoints)
    shape = -np.expm1(-c.curve_rate * taus) / -np.expm1(-c.curve_rate)
    shape[-1] = 1.0

    records = []
    for i in range(c.n_wi):
        for j in range(c.n_do):
            if diverged[i, j]:
                values = np.full(taus.size, c.diverge_value)
            else:
                values = finals[i, j] * shape
            evals = tuple(EvalPoint(float(tau), float(v)) for tau, v in zip(taus, values))
            records.append(
                TrialRecord(
                    task_id=c.task,
                    wi_seed=i,
                    do_seed=j,
                    metric_kind=c.metric,
                    evals=evals,
                    meta={"source": "synthgen", "diverged": str(bool(diverged[i, j])).lower()},
                )
            )
    effective = np.where(diverged, c.diverge_value, finals)
    truth = SynthTruth(a, b, eps, diverged, effective)
    return validate_pool(records), truth


def generate_pool(config: SynthConfig) -> TrialPool:
    return generate(config)[0]
