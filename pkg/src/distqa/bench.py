"""Size-up and speedup measurements over generated or supplied datasets.

Timings cover the evaluation stage only; parsing is measured separately.
Every configuration runs three times and reports the mean.

CSV schemas:

* size-up: ``size,parse_time,mean_time,std_time,runs``
* speedup: ``n_workers,time,speedup,efficiency`` with ``speedup = T1 / Tn``
  and ``efficiency = speedup / n_workers``
"""
from __future__ import annotations

import csv
import logging
import os
import statistics
import tempfile
import time
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .engine import AssessmentConfig, assess
from .generator import INTERNAL_BASE, GeneratorProfile, generate_file
from .qap.context import EvaluationContext
from .rdf import parse_dataset

logger = logging.getLogger(__name__)

RUNS = 3
SIZEUP_HEADER = ("size", "parse_time", "mean_time", "std_time", "runs")
SPEEDUP_HEADER = ("n_workers", "time", "speedup", "efficiency")
SPEEDUP_MIN_TRIPLES = 1_000_000


@dataclass(frozen=True)
class SizeupRow:
    size: int
    parse_time: float
    mean_time: float
    std_time: float
    runs: int

    def as_row(self) -> tuple:
        return (self.size, self.parse_time, self.mean_time, self.std_time, self.runs)


@dataclass(frozen=True)
class SpeedupRow:
    n_workers: int
    time: float
    speedup: float
    efficiency: float

    def as_row(self) -> tuple:
        return (self.n_workers, self.time, self.speedup, self.efficiency)


def generated_context() -> EvaluationContext:
    return EvaluationContext(internal_prefixes=(INTERNAL_BASE,))


def time_evaluation(d, metrics: Sequence, workers: int, ctx: EvaluationContext, runs: int = RUNS) -> list[float]:
    config = AssessmentConfig(metrics=list(metrics), context=ctx, workers=workers)
    times = []
    for _ in range(runs):
        start = time.perf_counter()
        assess(config, d)
        times.append(time.perf_counter() - start)
    return times


def _mean_std(times: Sequence[float]) -> tuple[float, float]:
    return statistics.fmean(times), statistics.stdev(times) if len(times) > 1 else 0.0


def bench_sizeup(
    sizes: Sequence[int],
    metrics: Sequence = ("L1", "I2", "RC1"),
    workers: int = 4,
    runs: int = RUNS,
    seed: int = 42,
    workdir: str | None = None,
) -> list[SizeupRow]:
    """Generate one dataset per size and time its evaluation ``runs`` times."""
    if not sizes:
        raise ValueError("at least one size is required")
    if list(sizes) != sorted(sizes):
        raise ValueError("sizes must be ascending")
    ctx = generated_context()
    rows = []
    with tempfile.TemporaryDirectory(dir=workdir) as tmp:
        for size in sizes:
            path = os.path.join(tmp, f"gen-{size}.nt")
            generate_file(GeneratorProfile(seed=seed, n_triples=size), path)
            start = time.perf_counter()
            d = parse_dataset(path)
            parse_time = time.perf_counter() - start
            os.remove(path)
            mean, std = _mean_std(time_evaluation(d, metrics, workers, ctx, runs))
            logger.info("size %d: parse %.2fs, eval %.3fs +- %.3fs", size, parse_time, mean, std)
            rows.append(SizeupRow(size, parse_time, mean, std, runs))
            del d
    return rows


def bench_speedup(
    d,
    workers: Sequence[int],
    metrics: Sequence = ("L1", "I2", "RC1"),
    ctx: EvaluationContext | None = None,
    runs: int = RUNS,
) -> list[SpeedupRow]:
    """Mean evaluation time per worker count; the baseline T1 is always measured."""
    if not workers:
        raise ValueError("at least one worker count is required")
    if any(n < 1 for n in workers):
        raise ValueError("worker counts must be >= 1")
    if len(d) < SPEEDUP_MIN_TRIPLES:
        logger.warning(
            "dataset has %d triples; below %d process start-up dominates and speedup is not meaningful",
            len(d),
            SPEEDUP_MIN_TRIPLES,
        )
    ctx = ctx or generated_context()
    means = {n: statistics.fmean(time_evaluation(d, metrics, n, ctx, runs)) for n in sorted({1, *workers})}
    rows = []
    for n in workers:
        s = means[1] / means[n]
        rows.append(SpeedupRow(n, means[n], s, s / n))
    return rows


def linear_fit(x: Sequence[float], y: Sequence[float]) -> tuple[float, float, float]:
    """Least-squares line ``y = slope * x + intercept`` and its R²."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    slope, intercept = np.polyfit(x, y, 1)
    residual = y - (slope * x + intercept)
    total = ((y - y.mean()) ** 2).sum()
    r2 = 1.0 - (residual**2).sum() / total if total > 0 else 1.0
    return float(slope), float(intercept), float(r2)


def write_csv(header: Sequence[str], rows, fh) -> None:
    writer = csv.writer(fh, lineterminator="\r\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([repr(v) if isinstance(v, float) else v for v in row.as_row()])
