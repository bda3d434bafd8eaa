from __future__ import annotations

import dataclasses
import re
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Mapping

from ..xsd import Validator, default_validators

DCTERMS = "http://purl.org/dc/terms/"
DC = "http://purl.org/dc/elements/1.1/"
RDFS = "http://www.w3.org/2000/01/rdf-schema#"
SKOS = "http://www.w3.org/2004/02/skos/core#"
FOAF = "http://xmlns.com/foaf/0.1/"
RDF_TYPE = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type"

DEFAULT_LICENSE_PREDICATES = frozenset(
    {
        DCTERMS + "license",
        DCTERMS + "rights",
        "http://creativecommons.org/ns#license",
        "http://www.w3.org/1999/xhtml/vocab#license",
        "http://schema.org/license",
    }
)
DEFAULT_LICENSE_INDICATION_PREDICATES = frozenset(
    {DCTERMS + "rights", DC + "rights", DCTERMS + "licenseDocument"}
)
DEFAULT_LICENSE_PHRASES = ("licen[sc]e", "copyright", "all rights reserved")
DEFAULT_LABEL_PREDICATES = frozenset(
    {RDFS + "label", SKOS + "prefLabel", SKOS + "altLabel", FOAF + "name", DCTERMS + "title"}
)
DEFAULT_TYPE_PREDICATES = frozenset({RDF_TYPE})
DEFAULT_URI_LENGTH_THRESHOLD = 95


class ConfigurationError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class EvaluationContext:
    """Everything a rule needs beyond the triple itself.

    Defaults follow common linked-data practice; ``internal_prefixes`` has
    no sensible default and must be set before evaluating metrics that
    distinguish internal from external resources.
    """

    internal_prefixes: tuple[str, ...] = ()
    license_predicates: frozenset[str] = DEFAULT_LICENSE_PREDICATES
    license_indication_predicates: frozenset[str] = DEFAULT_LICENSE_INDICATION_PREDICATES
    license_phrase_patterns: tuple[str, ...] = DEFAULT_LICENSE_PHRASES
    label_predicates: frozenset[str] = DEFAULT_LABEL_PREDICATES
    type_predicates: frozenset[str] = DEFAULT_TYPE_PREDICATES
    uri_length_threshold: int = DEFAULT_URI_LENGTH_THRESHOLD
    datatype_validators: Mapping[str, Validator] = field(default_factory=default_validators)

    def __post_init__(self):
        # accept any iterable from callers, store canonical immutable forms
        set_ = object.__setattr__
        set_(self, "internal_prefixes", tuple(self.internal_prefixes))
        set_(self, "license_phrase_patterns", tuple(self.license_phrase_patterns))
        for name in ("license_predicates", "license_indication_predicates", "label_predicates", "type_predicates"):
            set_(self, name, frozenset(getattr(self, name)))
        if not isinstance(self.uri_length_threshold, int) or self.uri_length_threshold <= 0:
            raise ConfigurationError("uri_length_threshold must be a positive integer")
        for pattern in self.license_phrase_patterns:
            try:
                re.compile(pattern)
            except re.error as e:
                raise ConfigurationError(f"bad license phrase pattern {pattern!r}: {e}") from None

    @cached_property
    def license_regex(self) -> re.Pattern | None:
        if not self.license_phrase_patterns:
            return None
        return re.compile("|".join(f"(?:{p})" for p in self.license_phrase_patterns), re.IGNORECASE)

    def __getstate__(self):
        state = dict(self.__dict__)
        state.pop("license_regex", None)
        return state

    def __setstate__(self, state):
        self.__dict__.update(state)

    def __eq__(self, other):
        if not isinstance(other, EvaluationContext):
            return NotImplemented
        return all(getattr(self, f.name) == getattr(other, f.name) for f in dataclasses.fields(self))

    def replace(self, **changes) -> "EvaluationContext":
        return dataclasses.replace(self, **changes)

    @classmethod
    def from_dict(cls, data: Mapping[str, Any], base: "EvaluationContext | None" = None) -> "EvaluationContext":
        """Build a context from JSON-style overrides (unknown keys are rejected)."""
        base = base or cls()
        known = {f.name for f in dataclasses.fields(cls)} - {"datatype_validators"}
        unknown = set(data) - known
        if unknown:
            raise ConfigurationError(f"unknown context field(s): {', '.join(sorted(unknown))}")
        return base.replace(**dict(data))

    def to_dict(self) -> dict[str, Any]:
        out = {}
        for f in dataclasses.fields(self):
            if f.name == "datatype_validators":
                out["supported_datatypes"] = sorted(self.datatype_validators)
                continue
            v = getattr(self, f.name)
            out[f.name] = sorted(v) if isinstance(v, frozenset) else list(v) if isinstance(v, tuple) else v
        return out
