"""Sequential reference semantics for the algebra.

The partitioned engine must agree with these functions on every input;
they favour clarity over speed.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

from ..rdf import Triple
from .ast import (
    Arith,
    Const,
    Count,
    CountTriples,
    Distinct,
    Filter,
    FilterAnd,
    FilterOr,
    Intersect,
    Metric,
    Pos,
    POSITION_INDEX,
    Positive,
    Rule,
    RuleNode,
    Transformation,
    actions,
    filter_positions,
    to_text,
)
from .context import ConfigurationError, EvaluationContext
from .plan import PlanError, check_plan, transformation_is_distinct
from .rules import RULES, term_predicate

ZERO_DENOMINATOR = "zero-denominator"
RATIO_ABOVE_ONE = "ratio-above-one"
UNKNOWN_DATATYPES = "unknown-datatypes-skipped"

TripleTest = Callable[[Triple], bool]


def _filter_test(f: Filter, pred) -> TripleTest:
    if isinstance(f, Pos):
        i = POSITION_INDEX[f.name]
        return lambda t: pred(t[i])
    if isinstance(f, Distinct):
        return _filter_test(f.inner, pred)
    left = _filter_test(f.left, pred)
    right = _filter_test(f.right, pred)
    if isinstance(f, FilterAnd):
        return lambda t: left(t) and right(t)
    assert isinstance(f, FilterOr)
    return lambda t: left(t) or right(t)


def compile_rule(rule: Rule, ctx: EvaluationContext) -> TripleTest:
    """Triple-level test for a plan-legal rule."""
    info = RULES.get(rule.name)
    if info is None:
        raise PlanError([f"unknown rule {rule.name!r}"])
    if info.suspended:
        raise PlanError([info.suspended])
    if info.requires and not getattr(ctx, info.requires):
        raise ConfigurationError(f"{rule.name} requires a non-empty {info.requires} setting")
    pred = term_predicate(rule.name, ctx)
    if info.predicate_based:
        test = lambda t: pred(t[1])  # noqa: E731
    else:
        test = _filter_test(rule.arg, pred)
    if rule.negated:
        inner = test
        return lambda t: not inner(t)
    return test


def eval_rule(rule: Rule, triple: Triple, ctx: EvaluationContext) -> bool:
    return bool(compile_rule(rule, ctx)(triple))


def projection(rule: Rule) -> tuple[int, ...]:
    """Triple indices kept by a distinct filter."""
    assert isinstance(rule.arg, Distinct)
    return tuple(POSITION_INDEX[p] for p in filter_positions(rule.arg.inner))


def _validate(t: Transformation, ctx: EvaluationContext) -> None:
    try:
        check_plan(Count(t), ctx)
    except PlanError as e:
        if e.is_configuration_error:
            raise ConfigurationError(str(e)) from None
        raise


def eval_transformation(t: Transformation, d: Sequence[Triple], ctx: EvaluationContext):
    """Triples of ``d`` selected by ``t`` (in input order, duplicates kept),
    or a set of projected term tuples when the filters are distinct."""
    _validate(t, ctx)
    triples = list(d)
    if transformation_is_distinct(t):
        return _eval_distinct(t, triples, ctx)
    selected = _eval_indices(t, triples, ctx)
    return [triples[i] for i in sorted(selected)]


def _eval_indices(t: Transformation, triples: list[Triple], ctx) -> set[int]:
    if isinstance(t, RuleNode):
        test = compile_rule(t.rule, ctx)
        return {i for i, tr in enumerate(triples) if test(tr)}
    left = _eval_indices(t.left, triples, ctx)
    right = _eval_indices(t.right, triples, ctx)
    return left & right if isinstance(t, Intersect) else left | right


def _eval_distinct(t: Transformation, triples: list[Triple], ctx) -> set[tuple]:
    if isinstance(t, RuleNode):
        test = compile_rule(t.rule, ctx)
        keep = projection(t.rule)
        return {tuple(tr[i] for i in keep) for tr in triples if test(tr)}
    left = _eval_distinct(t.left, triples, ctx)
    right = _eval_distinct(t.right, triples, ctx)
    return left & right if isinstance(t, Intersect) else left | right


def eval_action(a: Metric, d: Sequence[Triple], ctx: EvaluationContext) -> int:
    if isinstance(a, CountTriples):
        return len(d)
    if isinstance(a, Count):
        return len(eval_transformation(a.transformation, d, ctx))
    raise TypeError(f"not an action: {type(a).__name__}")


@dataclass(frozen=True)
class MetricOutcome:
    value: float
    action_counts: dict[str, int] = field(default_factory=dict)
    flags: frozenset[str] = frozenset()


def combine(m: Metric, action_value: Callable[[Metric], int]) -> tuple[float, frozenset[str]]:
    """Fold the arithmetic of ``m`` over already-computed action values.

    Integer arithmetic stays exact until a division; a zero denominator
    yields 0.0 and the ``zero-denominator`` flag.
    """
    flags: set[str] = set()

    def go(node: Metric):
        if isinstance(node, (Count, CountTriples)):
            return action_value(node)
        if isinstance(node, Const):
            return node.value
        if isinstance(node, Positive):
            return 1 if go(node.inner) > 0 else 0
        assert isinstance(node, Arith)
        left, right = go(node.left), go(node.right)
        op = node.op
        if op == "+":
            return left + right
        if op == "-":
            return left - right
        if op == "*":
            return left * right
        if right == 0:
            flags.add(ZERO_DENOMINATOR)
            return 0.0
        return left / right

    return float(go(m)), frozenset(flags)


def action_label(a: Metric) -> str:
    return to_text(a)


def eval_metric(m: Metric, d: Sequence[Triple], ctx: EvaluationContext) -> MetricOutcome:
    try:
        check_plan(m, ctx)
    except PlanError as e:
        if e.is_configuration_error:
            raise ConfigurationError(str(e)) from None
        raise
    counts: dict[Metric, int] = {}
    for a in actions(m):
        if a not in counts:
            counts[a] = eval_action(a, d, ctx)
    value, flags = combine(m, counts.__getitem__)
    return MetricOutcome(value, {action_label(a): v for a, v in counts.items()}, flags)


def outcome_from_counts(m: Metric, counts: Mapping[Metric, int]) -> MetricOutcome:
    value, flags = combine(m, counts.__getitem__)
    return MetricOutcome(value, {action_label(a): v for a, v in counts.items()}, flags)
