"""Partition-parallel metric evaluation.

Each partition is scanned independently: rule nodes become boolean masks,
masks combine into per-action counts (or partial distinct sets), and the
partials merge by addition or set union. Only integers and sets cross the
worker boundary, so results do not depend on partitioning or on worker
completion order.
"""
from __future__ import annotations

import gc
import logging
import multiprocessing
import os
import time
from dataclasses import dataclass, field
from itertools import compress
from operator import itemgetter
from typing import Sequence

import numpy as np

from .metrics import COUNT, RATIO, MetricDefinition, registry_lookup
from .qap import ast as A
from .qap.context import ConfigurationError, EvaluationContext
from .qap.evaluate import (
    RATIO_ABOVE_ONE,
    UNKNOWN_DATATYPES,
    action_label,
    combine,
    projection,
)
from .qap.plan import PlanError, plan_problems, transformation_is_distinct
from .qap.rules import RULES, term_predicate
from .rdf import LITERAL, Triple

logger = logging.getLogger(__name__)

PER_METRIC = "per-metric"
SHARED_SCAN = "shared-scan"
SERIAL = "serial"
PROCESS = "process"


class AssessmentTimeout(RuntimeError):
    pass


# --- partitioning ------------------------------------------------------------


@dataclass(frozen=True)
class PartitionedDataset:
    """Contiguous, balanced slices of a triple sequence (stored as bounds)."""

    source: Sequence[Triple]
    bounds: tuple[tuple[int, int], ...]

    @property
    def partition_count(self) -> int:
        return len(self.bounds)

    @property
    def partitions(self) -> list[Sequence[Triple]]:
        return [self.source[lo:hi] for lo, hi in self.bounds]

    def sizes(self) -> list[int]:
        return [hi - lo for lo, hi in self.bounds]

    def __len__(self) -> int:
        return len(self.source)


def partition(d: Sequence[Triple], p: int) -> PartitionedDataset:
    """Split into ``min(p, |d|)`` slices whose sizes differ by at most one."""
    if p < 1:
        raise ValueError("partition count must be >= 1")
    triples = d.triples if hasattr(d, "triples") else d
    n = len(triples)
    p = max(1, min(p, n))
    q, rem = divmod(n, p)
    bounds = []
    lo = 0
    for i in range(p):
        hi = lo + q + (1 if i < rem else 0)
        bounds.append((lo, hi))
        lo = hi
    return PartitionedDataset(triples, tuple(bounds))


# --- per-partition kernel ----------------------------------------------------


class _Columns:
    """Lazily materialized s/p/o columns of one partition."""

    def __init__(self, part: Sequence[Triple]):
        self.part = part
        self.n = len(part)
        self._cols: dict[int, list] = {}

    def __getitem__(self, i: int) -> list:
        col = self._cols.get(i)
        if col is None:
            col = self._cols[i] = list(map(itemgetter(i), self.part))
        return col


def _filter_mask(f: A.Filter, pred, cols: _Columns) -> np.ndarray:
    if isinstance(f, A.Pos):
        return np.fromiter(map(pred, cols[A.POSITION_INDEX[f.name]]), dtype=bool, count=cols.n)
    if isinstance(f, A.Distinct):
        return _filter_mask(f.inner, pred, cols)
    left = _filter_mask(f.left, pred, cols)
    right = _filter_mask(f.right, pred, cols)
    return left & right if isinstance(f, A.FilterAnd) else left | right


class _Kernel:
    def __init__(self, ctx: EvaluationContext, cols: _Columns, memo: dict | None):
        self.ctx = ctx
        self.cols = cols
        self.memo = memo
        self.rule_evaluations = 0
        self._preds: dict[str, object] = {}

    def _pred(self, name: str):
        pred = self._preds.get(name)
        if pred is None:
            pred = self._preds[name] = term_predicate(name, self.ctx)
        return pred

    def rule_mask(self, node: A.RuleNode) -> np.ndarray:
        if self.memo is not None:
            hit = self.memo.get(node.rule)
            if hit is not None:
                return hit
        rule = node.rule
        pred = self._pred(rule.name)
        if RULES[rule.name].predicate_based:
            mask = np.fromiter(map(pred, self.cols[1]), dtype=bool, count=self.cols.n)
        else:
            mask = _filter_mask(rule.arg, pred, self.cols)
        if rule.negated:
            mask = ~mask
        assert mask.shape[0] == self.cols.n
        self.rule_evaluations += self.cols.n
        if self.memo is not None:
            self.memo[rule] = mask
        return mask

    def mask(self, t: A.Transformation) -> np.ndarray:
        if isinstance(t, A.RuleNode):
            return self.rule_mask(t)
        left = self.mask(t.left)
        right = self.mask(t.right)
        return left & right if isinstance(t, A.Intersect) else left | right

    def distinct_sets(self, t: A.Transformation) -> list[set]:
        """One partial set per leaf, in leaf order."""
        out = []
        for node in A.rule_nodes(t):
            keep = projection(node.rule)
            selected = compress(self.cols.part, self.rule_mask(node))
            out.append({tuple(tr[i] for i in keep) for tr in selected})
        return out


def _uses_datatypes(m: A.Metric) -> bool:
    return any(
        n.rule.name in ("getDatatype", "isLexicalFormCompatibleWithDatatype") for n in A.all_rule_nodes(m)
    )


@dataclass
class _Partial:
    # per action index: int, or list of per-leaf sets for distinct counts
    actions: list
    rule_evaluations: int = 0
    unknown_datatypes: int = 0


def _scan(part: Sequence[Triple], plans: Sequence[A.Metric], ctx: EvaluationContext, shared: bool) -> list[_Partial]:
    cols = _Columns(part)
    memo: dict | None = {} if shared else None
    out = []
    for m in plans:
        kernel = _Kernel(ctx, cols, memo)
        values = []
        for a in A.actions(m):
            if isinstance(a, A.CountTriples):
                values.append(cols.n)
            elif transformation_is_distinct(a.transformation):
                values.append(kernel.distinct_sets(a.transformation))
            else:
                values.append(int(np.count_nonzero(kernel.mask(a.transformation))))
        unknown = 0
        if _uses_datatypes(m):
            known = ctx.datatype_validators
            unknown = sum(1 for o in cols[2] if o[0] == LITERAL and o[2] not in known)
        out.append(_Partial(values, kernel.rule_evaluations, unknown))
    return out


def _merge(plans: Sequence[A.Metric], partials_by_partition: list[list[_Partial]]) -> list[_Partial]:
    merged = []
    for j, m in enumerate(plans):
        parts = [pp[j] for pp in partials_by_partition]
        n_actions = len(list(A.actions(m)))
        values = []
        for k in range(n_actions):
            first = parts[0].actions[k] if parts else 0
            if isinstance(first, list):
                sets = [set() for _ in first]
                for p in parts:
                    for acc, s in zip(sets, p.actions[k]):
                        acc |= s
                values.append(sets)
            else:
                values.append(sum(p.actions[k] for p in parts))
        merged.append(
            _Partial(values, sum(p.rule_evaluations for p in parts), sum(p.unknown_datatypes for p in parts))
        )
    return merged


def _combine_sets(t: A.Transformation, leaf_sets: list[set]) -> set:
    it = iter(leaf_sets)

    def go(node):
        if isinstance(node, A.RuleNode):
            return next(it)
        left = go(node.left)
        right = go(node.right)
        return left & right if isinstance(node, A.Intersect) else left | right

    return go(t)


def _action_counts(m: A.Metric, merged: _Partial) -> dict[A.Metric, int]:
    counts: dict[A.Metric, int] = {}
    for a, v in zip(A.actions(m), merged.actions):
        if isinstance(v, list):
            v = len(_combine_sets(a.transformation, v))
        counts[a] = v
    return counts


# --- executors ---------------------------------------------------------------

_SHARED: Sequence[Triple] | None = None


def _process_task(args):
    lo, hi, plans, ctx, shared = args
    return _scan(_SHARED[lo:hi], plans, ctx, shared)


class _Runner:
    """Maps the scan over partitions, serially or on a forked process pool."""

    def __init__(self, pd: PartitionedDataset, executor: str, workers: int, timeout: float | None):
        self.pd = pd
        self.executor = executor
        self.workers = workers
        self.timeout = timeout
        self.deadline = None
        self.pool = None

    def __enter__(self):
        global _SHARED
        if self.timeout is not None:
            self.deadline = time.monotonic() + self.timeout
        if self.executor == PROCESS:
            _SHARED = self.pd.source
            # keep the collector in forked workers from touching (and so copying) every inherited object
            gc.freeze()
            self.pool = multiprocessing.get_context("fork").Pool(self.workers)
        return self

    def __exit__(self, *exc):
        global _SHARED
        if self.pool is not None:
            self.pool.terminate()
            self.pool.join()
            self.pool = None
            gc.unfreeze()
        _SHARED = None
        return False

    def run(self, plans: Sequence[A.Metric], ctx: EvaluationContext, shared: bool) -> list[_Partial]:
        if self.pool is None:
            per_part = []
            for part in self.pd.partitions:
                self._check_deadline()
                per_part.append(_scan(part, plans, ctx, shared))
            self._check_deadline()
        else:
            tasks = [(lo, hi, list(plans), ctx, shared) for lo, hi in self.pd.bounds]
            async_result = self.pool.map_async(_process_task, tasks, chunksize=1)
            remaining = None if self.deadline is None else max(0.0, self.deadline - time.monotonic())
            try:
                per_part = async_result.get(remaining)
            except multiprocessing.TimeoutError:
                raise AssessmentTimeout(f"evaluation exceeded {self.timeout}s") from None
        return _merge(plans, per_part)

    def _check_deadline(self):
        # serial scans cannot be interrupted, so the deadline is checked between partitions
        if self.deadline is not None and time.monotonic() > self.deadline:
            raise AssessmentTimeout(f"evaluation exceeded {self.timeout}s")


def _resolve_executor(executor: str, workers: int) -> str:
    if executor == "auto":
        return PROCESS if workers > 1 else SERIAL
    if executor not in (SERIAL, PROCESS):
        raise ConfigurationError(f"unknown executor {executor!r}")
    return executor


def evaluate_count_parallel(
    t: A.Transformation,
    pd: PartitionedDataset,
    ctx: EvaluationContext,
    executor: str = SERIAL,
    workers: int = 1,
) -> int:
    """Count of ``t`` over all partitions, merged by sum or set union."""
    m = A.Count(t)
    problems = plan_problems(m, ctx)
    if problems:
        raise PlanError(problems)
    with _Runner(pd, _resolve_executor(executor, workers), workers, None) as runner:
        (merged,) = runner.run([m], ctx, shared=False)
    return _action_counts(m, merged)[m]


# --- assessment --------------------------------------------------------------


def default_workers() -> int:
    return os.cpu_count() or 1


@dataclass
class AssessmentConfig:
    metrics: list = field(default_factory=list)
    context: EvaluationContext = field(default_factory=EvaluationContext)
    workers: int = 1
    partition_count: int | None = None
    mode: str = PER_METRIC
    executor: str = "auto"
    timeout: float | None = None
    emit_dqv: bool = False
    dqv_base: str = "http://example.org/quality/"
    dataset_iri: str | None = None
    timestamp: str | None = None

    def definitions(self) -> list[MetricDefinition]:
        """Resolve metric ids and definitions; raises ConfigurationError."""
        if not self.metrics:
            raise ConfigurationError("at least one metric must be requested")
        out = []
        seen = set()
        for m in self.metrics:
            if isinstance(m, str):
                try:
                    m = registry_lookup(m)
                except KeyError as e:
                    raise ConfigurationError(str(e.args[0])) from None
            if m.id in seen:
                continue
            seen.add(m.id)
            out.append(m)
        return out


@dataclass
class MetricResult:
    metric_id: str
    value: float | None
    action_counts: dict[str, int] = field(default_factory=dict)
    flags: frozenset[str] = frozenset()
    wall_time: float = 0.0
    origin: str = ""
    value_kind: str = RATIO
    rule_evaluations: int = 0
    extras: dict[str, int] = field(default_factory=dict)
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None


@dataclass
class AssessmentReport:
    results: list[MetricResult]
    dqv: list[Triple] | None = None
    partition_count: int = 1
    workers: int = 1
    mode: str = PER_METRIC
    eval_time: float = 0.0

    def values(self) -> dict[str, float | None]:
        return {r.metric_id: r.value for r in self.results}


def _result(defn: MetricDefinition, merged: _Partial, elapsed: float, origin: str) -> MetricResult:
    counts = _action_counts(defn.expr, merged)
    value, flags = combine(defn.expr, counts.__getitem__)
    flags = set(flags)
    extras = {}
    if defn.value_kind == RATIO and value > 1.0:
        flags.add(RATIO_ABOVE_ONE)
        logger.warning("%s: ratio %.6g exceeds 1 (overlapping rule counts)", defn.id, value)
    if _uses_datatypes(defn.expr):
        extras["unknown_datatype_literals"] = merged.unknown_datatypes
        if merged.unknown_datatypes:
            flags.add(UNKNOWN_DATATYPES)
    if defn.value_kind == COUNT and value != int(value):
        raise AssertionError(f"{defn.id}: count metric produced a fractional value")
    return MetricResult(
        defn.id,
        value,
        {action_label(a): v for a, v in counts.items()},
        frozenset(flags),
        elapsed,
        origin,
        defn.value_kind,
        merged.rule_evaluations,
        extras,
    )


def assess(config: AssessmentConfig, d) -> AssessmentReport:
    """Evaluate every requested metric against the full dataset.

    Configuration problems abort before any scan; a metric whose plan is
    illegal yields an error result while the others still run.
    """
    definitions = config.definitions()
    ctx = config.context
    runnable = []
    failed: dict[str, str] = {}
    config_problems = []
    for defn in definitions:
        problems = plan_problems(defn.expr, ctx)
        cfg = [p for p in problems if p.kind == "config"]
        if cfg:
            config_problems.extend(f"{defn.id}: {p.message}" for p in cfg)
        elif problems:
            failed[defn.id] = "; ".join(p.message for p in problems)
        else:
            runnable.append(defn)
    if config_problems:
        raise ConfigurationError("; ".join(dict.fromkeys(config_problems)))
    if config.workers < 1:
        raise ConfigurationError("workers must be >= 1")

    triples = d.triples if hasattr(d, "triples") else d
    origin = getattr(d, "origin", "")
    p = config.partition_count or config.workers
    pd = partition(triples, p)
    executor = _resolve_executor(config.executor, config.workers)
    by_id: dict[str, MetricResult] = {}

    t0 = time.perf_counter()
    with _Runner(pd, executor, config.workers, config.timeout) as runner:
        if config.mode == SHARED_SCAN and runnable:
            start = time.perf_counter()
            merged = runner.run([defn.expr for defn in runnable], ctx, shared=True)
            elapsed = time.perf_counter() - start
            for defn, mp in zip(runnable, merged):
                by_id[defn.id] = _result(defn, mp, elapsed, origin)
        elif config.mode in (PER_METRIC, SHARED_SCAN):
            for defn in runnable:
                start = time.perf_counter()
                (mp,) = runner.run([defn.expr], ctx, shared=False)
                by_id[defn.id] = _result(defn, mp, time.perf_counter() - start, origin)
        else:
            raise ConfigurationError(f"unknown engine mode {config.mode!r}")
    eval_time = time.perf_counter() - t0

    results = []
    for defn in definitions:
        if defn.id in failed:
            results.append(
                MetricResult(defn.id, None, origin=origin, value_kind=defn.value_kind, error=failed[defn.id])
            )
        else:
            results.append(by_id[defn.id])

    report = AssessmentReport(results, None, pd.partition_count, config.workers, config.mode, eval_time)
    if config.emit_dqv:
        from .dqv import dqvify

        dataset_iri = config.dataset_iri or _dataset_iri(origin, config.dqv_base)
        report.dqv = dqvify([r for r in results if r.ok], dataset_iri, config.dqv_base, config.timestamp)
    return report


def assess_shared_scan(config: AssessmentConfig, d) -> AssessmentReport:
    """Like :func:`assess` but every metric's rules run in one pass per partition."""
    from dataclasses import replace

    return assess(replace(config, mode=SHARED_SCAN), d)


def _dataset_iri(origin: str, base: str) -> str:
    from urllib.parse import quote

    name = os.path.basename(origin) if origin else "dataset"
    return f"{base}dataset/{quote(name, safe='')}"
