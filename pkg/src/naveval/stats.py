"""Pearson correlation between metric scores and human judgments."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence


def pearson(x: Sequence[float], y: Sequence[float]) -> float:
    """Pearson product-moment correlation of two equal-length series.

    Raises ValueError on length mismatch, fewer than two points, or a constant
    series (undefined correlation).
    """
    xs = [float(v) for v in x]
    ys = [float(v) for v in y]
    if len(xs) != len(ys):
        raise ValueError(f"length mismatch: {len(xs)} vs {len(ys)}")
    n = len(xs)
    if n < 2:
        raise ValueError("at least two points are required")
    mx = math.fsum(xs) / n
    my = math.fsum(ys) / n
    dx = [v - mx for v in xs]
    dy = [v - my for v in ys]
    sxx = math.fsum(d * d for d in dx)
    syy = math.fsum(d * d for d in dy)
    if sxx == 0.0 or syy == 0.0:
        raise ValueError("correlation is undefined for a constant series")
    sxy = math.fsum(a * b for a, b in zip(dx, dy))
    return sxy / math.sqrt(sxx * syy)


@dataclass(frozen=True)
class PairedScores:
    """Metric and human scores paired by instruction id."""

    ids: tuple[str, ...]
    metric: tuple[float, ...]
    human: tuple[float, ...]

    def __post_init__(self) -> None:
        if not (len(self.ids) == len(self.metric) == len(self.human)):
            raise ValueError("ids, metric, and human must have equal length")
        if len(self.ids) < 2:
            raise ValueError("at least two paired scores are required")
        if not all(math.isfinite(v) for v in self.metric + self.human):
            raise ValueError("scores must be finite")

    def correlation(self) -> float:
        return pearson(self.metric, self.human)


@dataclass(frozen=True)
class MetricCorrelation:
    metric: str
    pearson: float
    n: int


@dataclass(frozen=True)
class CorrelationReport:
    """Per-metric correlations sorted best-first, plus row-deletion bookkeeping."""

    entries: tuple[MetricCorrelation, ...]
    n_used: int
    n_dropped: int


def correlate_metrics(
    metric_columns: Mapping[str, Sequence[float | None]],
    human: Sequence[float | None],
) -> CorrelationReport:
    """Correlate each metric column with the human column.

    Rows where any metric or the human value is missing (None) are dropped
    entirely and counted. Entries come back sorted by correlation descending;
    ties keep the input column order.
    """
    if not metric_columns:
        raise ValueError("at least one metric column is required")
    n_rows = len(human)
    for name, column in metric_columns.items():
        if len(column) != n_rows:
            raise ValueError(f"column {name!r} has {len(column)} rows, expected {n_rows}")

    keep = [
        i
        for i in range(n_rows)
        if human[i] is not None and all(col[i] is not None for col in metric_columns.values())
    ]
    n_used = len(keep)
    if n_used < 2:
        raise ValueError(f"need at least two complete rows, got {n_used}")

    human_kept = [float(human[i]) for i in keep]  # type: ignore[arg-type]
    entries = []
    for name, column in metric_columns.items():
        try:
            r = pearson([float(column[i]) for i in keep], human_kept)  # type: ignore[arg-type]
        except ValueError as exc:
            raise ValueError(f"column {name!r}: {exc}") from None
        entries.append(MetricCorrelation(metric=name, pearson=r, n=n_used))
    entries.sort(key=lambda e: -e.pearson)
    return CorrelationReport(entries=tuple(entries), n_used=n_used, n_dropped=n_rows - n_used)
