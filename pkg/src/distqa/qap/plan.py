"""Well-formedness checks that turn a parsed tree into an executable plan."""
from __future__ import annotations

import math
from dataclasses import dataclass

from .ast import (
    Arith,
    Const,
    Count,
    Distinct,
    Filter,
    Intersect,
    Metric,
    Node,
    Positive,
    Pos,
    RuleNode,
    Transformation,
    Union,
    _RES_TOO_LONG_ARG,
    actions,
)
from .context import EvaluationContext
from .rules import RULES


@dataclass(frozen=True)
class Problem:
    message: str
    node: Node | None = None
    kind: str = "plan"  # or "config"


class PlanError(ValueError):
    def __init__(self, problems):
        problems = [p if isinstance(p, Problem) else Problem(str(p)) for p in problems]
        super().__init__("; ".join(dict.fromkeys(p.message for p in problems)))
        self.problems = problems

    @property
    def is_configuration_error(self) -> bool:
        return all(p.kind == "config" for p in self.problems)


def _has_distinct(f: Filter) -> bool:
    if isinstance(f, Pos):
        return False
    if isinstance(f, Distinct):
        return True
    return _has_distinct(f.left) or _has_distinct(f.right)


def _check_filter(f: Filter, out: list[Problem]) -> None:
    inner = f.inner if isinstance(f, Distinct) else f
    if _has_distinct(inner):
        out.append(Problem("distinct is only allowed at the top level of a filter", f))


def leaf_is_distinct(node: RuleNode) -> bool:
    return isinstance(node.rule.arg, Distinct)


def transformation_is_distinct(t: Transformation) -> bool:
    """True when every leaf projects distinct terms; raises on a mix."""
    if isinstance(t, RuleNode):
        return leaf_is_distinct(t)
    left = transformation_is_distinct(t.left)
    right = transformation_is_distinct(t.right)
    if left != right:
        raise PlanError([Problem("cannot combine distinct and non-distinct transformations", t)])
    return left


def _check_transformation(t: Transformation, ctx: EvaluationContext | None, out: list[Problem]) -> None:
    if isinstance(t, (Intersect, Union)):
        _check_transformation(t.left, ctx, out)
        _check_transformation(t.right, ctx, out)
        try:
            transformation_is_distinct(t)
        except PlanError as e:
            out.extend(p for p in e.problems if p.node is t)
        return
    rule = t.rule
    info = RULES.get(rule.name)
    if info is None:
        out.append(Problem(f"unknown rule {rule.name!r}", rule))
        return
    if info.suspended:
        out.append(Problem(info.suspended, rule))
        return
    if rule.arg is None:
        out.append(Problem(f"{rule.name} needs a filter argument", rule))
        return
    _check_filter(rule.arg, out)
    if rule.name == "resTooLong":
        arg = rule.arg.inner if isinstance(rule.arg, Distinct) else rule.arg
        if arg != _RES_TOO_LONG_ARG:
            out.append(Problem("resTooLong takes exactly (?s, ?p, ?o)", rule))
    if ctx is not None and info.requires and not getattr(ctx, info.requires):
        out.append(Problem(f"{rule.name} requires a non-empty {info.requires} setting", rule, "config"))


def _check_metric(m: Metric, out: list[Problem]) -> None:
    if isinstance(m, Const):
        if isinstance(m.value, bool) or not isinstance(m.value, (int, float)) or not math.isfinite(m.value):
            out.append(Problem("constants must be finite numbers", m))
    elif isinstance(m, Arith):
        _check_metric(m.left, out)
        _check_metric(m.right, out)
    elif isinstance(m, Positive):
        _check_metric(m.inner, out)


def plan_problems(m: Metric, ctx: EvaluationContext | None = None) -> list[Problem]:
    """All reasons ``m`` cannot run; ``ctx`` enables configuration checks."""
    out: list[Problem] = []
    _check_metric(m, out)
    for a in actions(m):
        if isinstance(a, Count):
            _check_transformation(a.transformation, ctx, out)
    return out


def check_plan(m: Metric, ctx: EvaluationContext | None = None) -> Metric:
    problems = plan_problems(m, ctx)
    if problems:
        raise PlanError(problems)
    return m

