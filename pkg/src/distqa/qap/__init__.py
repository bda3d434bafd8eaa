"""The quality assessment pattern: filters, rules, transformations, actions, metrics."""
from .ast import (
    Arith,
    Const,
    Count,
    CountTriples,
    Distinct,
    FilterAnd,
    FilterOr,
    Intersect,
    Metric,
    O,
    P,
    Pos,
    Positive,
    Rule,
    RuleNode,
    S,
    SourceSpan,
    Transformation,
    Union,
    all_rule_nodes,
    r,
    to_text,
)
from .context import ConfigurationError, EvaluationContext
from .evaluate import (
    RATIO_ABOVE_ONE,
    UNKNOWN_DATATYPES,
    ZERO_DENOMINATOR,
    MetricOutcome,
    combine,
    eval_action,
    eval_metric,
    eval_rule,
    eval_transformation,
)
from .plan import PlanError, Problem, check_plan, plan_problems
