"""Convert flat per-evaluation tables into trial records.

Released experiment logs usually come as one row per (trial, checkpoint).
``ColumnMapping`` names the columns holding each field; everything else in
the row is ignored.
"""

from __future__ import annotations

import csv
from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, Mapping

from .errors import ParseError
from .trials import EvalPoint, MetricKind, TrialRecord


@dataclass(frozen=True)
class ColumnMapping:
    wi_seed: str = "wi_seed"
    do_seed: str = "do_seed"
    value: str = "value"
    # Either a fraction column, or a step column normalized by the trial's
    # largest step (or by ``total_steps`` when given).
    fraction: str | None = "frac"
    step: str | None = None
    total_steps: float | None = None
    task: str | None = "task"
    metric: str | None = "metric"
    default_task: str = "task"
    default_metric: MetricKind | str = MetricKind.ACCURACY


def _get(row: Mapping, col: str, rownum: int):
    try:
        return row[col]
    except KeyError:
        raise ParseError(f"row {rownum}: missing column {col!r}") from None


def records_from_rows(rows: Iterable[Mapping], mapping: ColumnMapping = ColumnMapping()) -> list[TrialRecord]:
    if mapping.fraction is None and mapping.step is None:
        raise ValueError("mapping needs a fraction or a step column")
    points: dict[tuple, list[tuple[float, float]]] = defaultdict(list)
    for rownum, row in enumerate(rows, 1):
        task = str(row.get(mapping.task, mapping.default_task)) if mapping.task else mapping.default_task
        metric = row.get(mapping.metric, mapping.default_metric) if mapping.metric else mapping.default_metric
        try:
            wi = int(float(_get(row, mapping.wi_seed, rownum)))
            do = int(float(_get(row, mapping.do_seed, rownum)))
            pos_col = mapping.fraction if mapping.fraction is not None else mapping.step
            pos = float(_get(row, pos_col, rownum))
            value = float(_get(row, mapping.value, rownum))
        except ValueError as exc:
            raise ParseError(f"row {rownum}: {exc}") from None
        points[(task, str(MetricKind.parse(metric).value), wi, do)].append((pos, value))

    records = []
    for (task, metric, wi, do), pts in points.items():
        pts.sort()
        if mapping.fraction is None:
            total = mapping.total_steps or max(p for p, _ in pts)
            pts = [(p / total, v) for p, v in pts]
        records.append(
            TrialRecord(
                task_id=task,
                wi_seed=wi,
                do_seed=do,
                metric_kind=MetricKind.parse(metric),
                evals=tuple(EvalPoint(p, v) for p, v in pts),
            )
        )
    return records


def read_csv_records(path, mapping: ColumnMapping = ColumnMapping()) -> list[TrialRecord]:
    with open(path, newline="", encoding="utf-8") as fh:
        return records_from_rows(csv.DictReader(fh), mapping)
