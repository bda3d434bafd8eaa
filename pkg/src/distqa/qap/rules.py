"""Rule catalog: names, aliases, context requirements and term predicates."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from ..rdf import IRI, LITERAL, Term
from .context import EvaluationContext

TermPredicate = Callable[[Term], bool]


@dataclass(frozen=True)
class RuleInfo:
    name: str
    # EvaluationContext attribute that must be non-empty, if any
    requires: str | None = None
    # rule looks at the predicate whatever position its filter names
    predicate_based: bool = False
    # parsed but never executable
    suspended: str | None = None
    takes_filter: bool = True


RULES: dict[str, RuleInfo] = {
    info.name: info
    for info in (
        RuleInfo("isURI"),
        RuleInfo("isIRI"),
        RuleInfo("isInternal", requires="internal_prefixes"),
        RuleInfo("isExternal", requires="internal_prefixes"),
        RuleInfo("isLiteral"),
        RuleInfo("isLabeled", requires="label_predicates"),
        RuleInfo("hasLicenceAssociated", requires="license_predicates"),
        RuleInfo("hasLicenceIndications", requires="license_indication_predicates"),
        RuleInfo("isLicenseStatement", requires="license_phrase_patterns"),
        RuleInfo("hasType", requires="type_predicates", predicate_based=True),
        RuleInfo("resTooLong"),
        RuleInfo("getDatatype", requires="datatype_validators"),
        RuleInfo("isLexicalFormCompatibleWithDatatype", requires="datatype_validators"),
        RuleInfo("isBroken", suspended="network rule suspended: dereferencing is not supported"),
        RuleInfo(
            "hasPredicateP",
            suspended="hasPredicateP has no defined argument convention and cannot be planned",
            takes_filter=False,
        ),
    )
}

ALIASES = {
    "internal": "isInternal",
    "external": "isExternal",
    "lexicalFormCompatibleWithDatatype": "isLexicalFormCompatibleWithDatatype",
}


def canonical_rule_name(name: str) -> str | None:
    name = ALIASES.get(name, name)
    return name if name in RULES else None


def term_predicate(name: str, ctx: EvaluationContext) -> TermPredicate:
    """Return the per-term test for a rule under ``ctx``.

    For predicate-based rules (``hasType``) the returned function must be
    applied to the triple's predicate.
    """
    if name in ("isURI", "isIRI"):
        return lambda t: t[0] == IRI
    if name == "isLiteral":
        return lambda t: t[0] == LITERAL
    if name in ("isInternal", "isExternal"):
        prefixes = tuple(ctx.internal_prefixes)
        if name == "isInternal":
            return lambda t: t[0] == IRI and t[1].startswith(prefixes)
        return lambda t: t[0] == IRI and not t[1].startswith(prefixes)
    if name in ("isLabeled", "hasLicenceAssociated", "hasLicenceIndications", "hasType"):
        members = {
            "isLabeled": ctx.label_predicates,
            "hasLicenceAssociated": ctx.license_predicates,
            "hasLicenceIndications": ctx.license_indication_predicates,
            "hasType": ctx.type_predicates,
        }[name]
        return lambda t: t[0] == IRI and t[1] in members
    if name == "isLicenseStatement":
        rx = ctx.license_regex
        if rx is None:
            return lambda t: False
        search = rx.search
        return lambda t: t[0] == LITERAL and search(t[1]) is not None
    if name == "resTooLong":
        limit = ctx.uri_length_threshold
        return lambda t: t[0] == IRI and len(t[1]) > limit
    if name == "getDatatype":
        known = ctx.datatype_validators
        return lambda t: t[0] == LITERAL and t[2] in known
    if name == "isLexicalFormCompatibleWithDatatype":
        validators = ctx.datatype_validators

        def compatible(t: Term) -> bool:
            if t[0] != LITERAL:
                return False
            check = validators.get(t[2])
            return check is None or check(t[1])

        return compatible
    info = RULES.get(name)
    if info is not None and info.suspended:
        from .plan import PlanError

        raise PlanError([info.suspended])
    raise KeyError(f"unknown rule {name!r}")
