"""The seven built-in metrics, composed from the pattern algebra."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .qap import Arith, Const, CountTriples, Count, EvaluationContext, Metric, O, P, Positive, S, r
from .qap.ast import FilterOr
from .qap.evaluate import MetricOutcome, eval_metric
from .rdf import LITERAL, Triple

INDICATOR = "indicator"
RATIO = "ratio"
COUNT = "count"


@dataclass(frozen=True)
class MetricDefinition:
    id: str
    name: str
    dimension: str
    expr: Metric
    value_kind: str
    description: str = ""


class UnknownMetricError(KeyError):
    pass


def _triples() -> Metric:
    return CountTriples()


def _l1() -> Metric:
    return Positive(Count(r("hasLicenceAssociated", P)))


def _l2() -> Metric:
    t = r("isURI", S) & r("hasLicenceIndications", P) & r("isLiteral", O) & r("isLicenseStatement", O)
    return Positive(Count(t))


def _i2() -> Metric:
    internal_to_external = r("isIRI", S) & r("isInternal", S) & r("isIRI", O) & r("isExternal", O)
    external_to_internal = r("isIRI", S) & r("isExternal", S) & r("isIRI", O) & r("isInternal", O)
    return Count(internal_to_external | external_to_internal) / _triples()


def _u1() -> Metric:
    labeled_subject = r("isURI", S) & r("isInternal", S) & r("isLabeled", P)
    labeled_predicate = r("isInternal", P) & r("isLabeled", P)
    labeled_object = r("isURI", O) & r("isInternal", O) & r("isLabeled", P)
    return (Count(labeled_subject) + Count(labeled_predicate) + Count(labeled_object)) / _triples()


def _rc1() -> Metric:
    has_uri = r("isURI", S) | r("isURI", P) | r("isURI", O)
    too_long = r("resTooLong", FilterOr(FilterOr(S, P), O))
    return Count(has_uri & too_long) / _triples()


def _sv3() -> Metric:
    return Count(
        r("isLiteral", O) & r("getDatatype", O) & r("isLexicalFormCompatibleWithDatatype", O, negated=True)
    )


def _cn2() -> Metric:
    return (_triples() - Count(r("isURI", S) & r("isURI", O))) / _triples()


BUILTINS: dict[str, MetricDefinition] = {
    d.id: d
    for d in (
        MetricDefinition("L1", "Detection of a machine readable license", "licensing", _l1(), INDICATOR),
        MetricDefinition("L2", "Detection of a human readable license", "licensing", _l2(), INDICATOR),
        MetricDefinition(
            "I2", "Linkage degree of linked external data providers", "interlinking", _i2(), RATIO
        ),
        MetricDefinition("U1", "Detection of human readable labels", "understandability", _u1(), RATIO),
        MetricDefinition("RC1", "Short URIs", "representational-conciseness", _rc1(), RATIO),
        MetricDefinition(
            "SV3", "Identification of literals with malformed datatypes", "syntactic-validity", _sv3(), COUNT
        ),
        MetricDefinition("CN2", "Extensional conciseness", "conciseness", _cn2(), RATIO),
    )
}


def registry_lookup(metric_id: str) -> MetricDefinition:
    try:
        return BUILTINS[metric_id]
    except KeyError:
        raise UnknownMetricError(f"unknown metric {metric_id!r}; known: {', '.join(BUILTINS)}") from None


def list_metrics() -> list[MetricDefinition]:
    return list(BUILTINS.values())


def evaluate_builtin(metric_id: str, d: Sequence[Triple], ctx: EvaluationContext) -> MetricOutcome:
    return eval_metric(registry_lookup(metric_id).expr, d, ctx)


def metric_L1(d, ctx: EvaluationContext | None = None) -> float:
    return evaluate_builtin("L1", d, ctx or EvaluationContext()).value


def metric_L2(d, ctx: EvaluationContext | None = None) -> float:
    return evaluate_builtin("L2", d, ctx or EvaluationContext()).value


def metric_I2(d, ctx: EvaluationContext) -> float:
    return evaluate_builtin("I2", d, ctx).value


def metric_U1(d, ctx: EvaluationContext) -> float:
    return evaluate_builtin("U1", d, ctx).value


def metric_RC1(d, ctx: EvaluationContext | None = None) -> float:
    return evaluate_builtin("RC1", d, ctx or EvaluationContext()).value


def metric_SV3(d, ctx: EvaluationContext | None = None) -> float:
    return evaluate_builtin("SV3", d, ctx or EvaluationContext()).value


def metric_CN2(d, ctx: EvaluationContext | None = None) -> float:
    return evaluate_builtin("CN2", d, ctx or EvaluationContext()).value


def datatype_breakdown(d: Sequence[Triple], ctx: EvaluationContext) -> tuple[dict[str, int], dict[str, int]]:
    """Per-datatype malformed counts and counts of literals with unsupported datatypes."""
    failures: dict[str, int] = {}
    unknown: dict[str, int] = {}
    validators = ctx.datatype_validators
    for t in d:
        o = t[2]
        if o[0] != LITERAL:
            continue
        check = validators.get(o[2])
        if check is None:
            unknown[o[2]] = unknown.get(o[2], 0) + 1
        elif not check(o[1]):
            failures[o[2]] = failures.get(o[2], 0) + 1
    return failures, unknown


def infer_value_kind(expr: Metric) -> str:
    """Indicator for ``positive(...)``, count for integer arithmetic, ratio otherwise."""
    if isinstance(expr, Positive):
        return INDICATOR
    return COUNT if _integral(expr) else RATIO


def _integral(m: Metric) -> bool:
    if isinstance(m, (Count, CountTriples, Positive)):
        return True
    if isinstance(m, Const):
        return float(m.value).is_integer()
    if isinstance(m, Arith):
        return m.op != "/" and _integral(m.left) and _integral(m.right)
    return False


def custom_definition(name: str, expr: Metric, description: str = "") -> MetricDefinition:
    return MetricDefinition(name, description or name, "custom", expr, infer_value_kind(expr), description)
