"""Typed syntax trees for filters, rules, transformations, actions and metrics.

All nodes are frozen dataclasses. Equality ignores the optional source
span so that parsed and hand-built trees compare equal.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator


@dataclass(frozen=True)
class SourceSpan:
    start: int
    end: int
    line: int = 1
    column: int = 1


@dataclass(frozen=True)
class Node:
    span: SourceSpan | None = field(default=None, compare=False, repr=False, kw_only=True)


# --- filters ---------------------------------------------------------------

POSITIONS = ("s", "p", "o")
POSITION_INDEX = {"s": 0, "p": 1, "o": 2}


class Filter(Node):
    def __and__(self, other: Filter) -> Filter:
        return FilterAnd(self, other)

    def __or__(self, other: Filter) -> Filter:
        return FilterOr(self, other)


@dataclass(frozen=True)
class Pos(Filter):
    name: str

    def __post_init__(self):
        if self.name not in POSITION_INDEX:
            raise ValueError(f"unknown triple position {self.name!r}")


@dataclass(frozen=True)
class Distinct(Filter):
    inner: Filter


@dataclass(frozen=True)
class FilterAnd(Filter):
    left: Filter
    right: Filter


@dataclass(frozen=True)
class FilterOr(Filter):
    left: Filter
    right: Filter


S = Pos("s")
P = Pos("p")
O = Pos("o")  # noqa: E741


def filter_positions(f: Filter) -> tuple[str, ...]:
    """Positions mentioned by a filter, in s, p, o order."""
    seen = set()

    def walk(g):
        if isinstance(g, Pos):
            seen.add(g.name)
        elif isinstance(g, Distinct):
            walk(g.inner)
        else:
            walk(g.left)
            walk(g.right)

    walk(f)
    return tuple(p for p in POSITIONS if p in seen)


# --- rules and transformations ---------------------------------------------


@dataclass(frozen=True)
class Rule(Node):
    name: str
    arg: Filter | None
    negated: bool = False

    def __invert__(self) -> Rule:
        return Rule(self.name, self.arg, not self.negated)


class Transformation(Node):
    def __and__(self, other: Transformation) -> Transformation:
        return Intersect(self, other)

    def __or__(self, other: Transformation) -> Transformation:
        return Union(self, other)


@dataclass(frozen=True)
class RuleNode(Transformation):
    rule: Rule


@dataclass(frozen=True)
class Intersect(Transformation):
    left: Transformation
    right: Transformation


@dataclass(frozen=True)
class Union(Transformation):
    left: Transformation
    right: Transformation


def r(name: str, arg: Filter | None = None, negated: bool = False) -> RuleNode:
    """Shorthand for a single-rule transformation."""
    return RuleNode(Rule(name, arg, negated))


def rule_nodes(t: Transformation) -> Iterator[RuleNode]:
    if isinstance(t, RuleNode):
        yield t
    else:
        yield from rule_nodes(t.left)
        yield from rule_nodes(t.right)


# --- metrics ----------------------------------------------------------------


class Metric(Node):
    def _wrap(self, other) -> Metric:
        return other if isinstance(other, Metric) else Const(other)

    def __add__(self, other):
        return Arith("+", self, self._wrap(other))

    def __sub__(self, other):
        return Arith("-", self, self._wrap(other))

    def __mul__(self, other):
        return Arith("*", self, self._wrap(other))

    def __truediv__(self, other):
        return Arith("/", self, self._wrap(other))


@dataclass(frozen=True)
class CountTriples(Metric):
    pass


@dataclass(frozen=True)
class Count(Metric):
    transformation: Transformation


@dataclass(frozen=True)
class Const(Metric):
    value: int | float


@dataclass(frozen=True)
class Arith(Metric):
    op: str
    left: Metric
    right: Metric

    def __post_init__(self):
        if self.op not in ARITH_OPS:
            raise ValueError(f"unknown arithmetic operator {self.op!r}")


@dataclass(frozen=True)
class Positive(Metric):
    """1 when the inner value is strictly positive, otherwise 0."""

    inner: Metric


ARITH_OPS = {"+": 1, "-": 1, "*": 2, "/": 2}

Action = (Count, CountTriples)


def actions(m: Metric) -> Iterator[Metric]:
    """Action leaves of a metric in left-to-right order (duplicates kept)."""
    if isinstance(m, (Count, CountTriples)):
        yield m
    elif isinstance(m, Arith):
        yield from actions(m.left)
        yield from actions(m.right)
    elif isinstance(m, Positive):
        yield from actions(m.inner)


def all_rule_nodes(m: Metric) -> list[RuleNode]:
    out = []
    for a in actions(m):
        if isinstance(a, Count):
            out.extend(rule_nodes(a.transformation))
    return out


# --- canonical text ----------------------------------------------------------

_RES_TOO_LONG_ARG = FilterOr(FilterOr(S, P), O)


def _filter_text(f: Filter, parent: int = 0) -> str:
    # precedence: || = 1, && = 2, atoms = 3
    if isinstance(f, Pos):
        return "?" + f.name
    if isinstance(f, Distinct):
        return f"distinct({_filter_text(f.inner)})"
    if isinstance(f, FilterOr):
        prec, op = 1, "||"
    else:
        prec, op = 2, "&&"
    text = f"{_filter_text(f.left, prec)} {op} {_filter_text(f.right, prec + 1)}"
    return f"({text})" if prec < parent else text


def rule_text(rule: Rule) -> str:
    bang = "!" if rule.negated else ""
    if rule.arg is None:
        return bang + rule.name
    if rule.name == "resTooLong" and rule.arg == _RES_TOO_LONG_ARG:
        return f"{bang}resTooLong(?s, ?p, ?o)"
    return f"{bang}{rule.name}({_filter_text(rule.arg)})"


def _transformation_text(t: Transformation, parent: int = 0) -> str:
    # precedence: OR = 1, AND = 2, rule application = 3
    if isinstance(t, RuleNode):
        return rule_text(t.rule)
    if isinstance(t, Union):
        prec, op = 1, "OR"
    else:
        prec, op = 2, "AND"
    text = f"{_transformation_text(t.left, prec)} {op} {_transformation_text(t.right, prec + 1)}"
    return f"({text})" if prec < parent else text


def _metric_text(m: Metric, parent: int = 0) -> str:
    if isinstance(m, CountTriples):
        return "count(triples)"
    if isinstance(m, Count):
        return f"count({_transformation_text(m.transformation)})"
    if isinstance(m, Positive):
        return f"positive({_metric_text(m.inner)})"
    if isinstance(m, Const):
        text = repr(m.value)
        return f"({text})" if m.value < 0 else text
    prec = ARITH_OPS[m.op]
    text = f"{_metric_text(m.left, prec)} {m.op} {_metric_text(m.right, prec + 1)}"
    return f"({text})" if prec < parent else text


def to_text(node: Node) -> str:
    """Render any node in the canonical DSL syntax with minimal parentheses."""
    if isinstance(node, Metric):
        return _metric_text(node)
    if isinstance(node, Transformation):
        return _transformation_text(node)
    if isinstance(node, Rule):
        return rule_text(node)
    if isinstance(node, Filter):
        return _filter_text(node)
    raise TypeError(f"cannot render {type(node).__name__}")
