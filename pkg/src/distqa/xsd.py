"""Lexical-space checks for the XSD datatypes the syntactic-validity metric covers."""
from __future__ import annotations

import re
from typing import Callable

from .rdf import RDF_LANGSTRING, XSD

Validator = Callable[[str], bool]

_INTEGER = re.compile(r"[+-]?[0-9]+\Z")
_DECIMAL = re.compile(r"[+-]?(?:[0-9]+(?:\.[0-9]*)?|\.[0-9]+)\Z")
_DOUBLE = re.compile(r"(?:[+-]?(?:[0-9]+(?:\.[0-9]*)?|\.[0-9]+)(?:[eE][+-]?[0-9]+)?|[+-]?INF|NaN)\Z")
_BOOLEAN = frozenset(("true", "false", "1", "0"))
_TZ = r"(?:Z|[+-](?:(?:0[0-9]|1[0-3]):[0-5][0-9]|14:00))?"
_DATE_PART = r"(-?(?:[1-9][0-9]{3,}|0[0-9]{3}))-(0[1-9]|1[0-2])-(0[1-9]|[12][0-9]|3[01])"
_DATE = re.compile(_DATE_PART + _TZ + r"\Z")
_DATETIME = re.compile(
    _DATE_PART + r"T(?:(?:[01][0-9]|2[0-3]):[0-5][0-9]:[0-5][0-9](?:\.[0-9]+)?|24:00:00(?:\.0+)?)" + _TZ + r"\Z"
)
_NO_SPACE = re.compile(r"[^\x00-\x20\x7f]*\Z")

# (min, max) inclusive; None for unbounded
_INTEGER_RANGES = {
    "integer": (None, None),
    "long": (-(2**63), 2**63 - 1),
    "int": (-(2**31), 2**31 - 1),
    "short": (-(2**15), 2**15 - 1),
    "byte": (-128, 127),
    "nonNegativeInteger": (0, None),
    "positiveInteger": (1, None),
    "nonPositiveInteger": (None, 0),
    "negativeInteger": (None, -1),
    "unsignedLong": (0, 2**64 - 1),
    "unsignedInt": (0, 2**32 - 1),
    "unsignedShort": (0, 2**16 - 1),
    "unsignedByte": (0, 255),
}


def _days_in_month(year: int, month: int) -> int:
    if month == 2:
        leap = year % 4 == 0 and (year % 100 != 0 or year % 400 == 0)
        return 29 if leap else 28
    return 30 if month in (4, 6, 9, 11) else 31


class IntegerRange:
    """Validator for xsd:integer and its range-restricted subtypes."""

    def __init__(self, lo: int | None, hi: int | None):
        self.lo = lo
        self.hi = hi

    def __call__(self, lex: str) -> bool:
        if not _INTEGER.match(lex):
            return False
        if self.lo is None and self.hi is None:
            return True
        v = int(lex)
        return (self.lo is None or v >= self.lo) and (self.hi is None or v <= self.hi)

    def __eq__(self, other):
        if not isinstance(other, IntegerRange):
            return NotImplemented
        return (self.lo, self.hi) == (other.lo, other.hi)

    def __hash__(self):
        return hash((IntegerRange, self.lo, self.hi))

    def __repr__(self):
        return f"IntegerRange({self.lo}, {self.hi})"


def is_decimal(lex: str) -> bool:
    return _DECIMAL.match(lex) is not None


def is_double(lex: str) -> bool:
    return _DOUBLE.match(lex) is not None


def is_boolean(lex: str) -> bool:
    return lex in _BOOLEAN


def _valid_day(m: re.Match) -> bool:
    year, month, day = int(m.group(1)), int(m.group(2)), int(m.group(3))
    return day <= _days_in_month(year, month)


def is_date(lex: str) -> bool:
    m = _DATE.match(lex)
    return m is not None and _valid_day(m)


def is_datetime(lex: str) -> bool:
    m = _DATETIME.match(lex)
    return m is not None and _valid_day(m)


def is_any_uri(lex: str) -> bool:
    return _NO_SPACE.match(lex) is not None


def _always(lex: str) -> bool:
    return True


def default_validators() -> dict[str, Validator]:
    v: dict[str, Validator] = {
        XSD + "string": _always,
        RDF_LANGSTRING: _always,
        XSD + "decimal": is_decimal,
        XSD + "double": is_double,
        XSD + "float": is_double,
        XSD + "boolean": is_boolean,
        XSD + "dateTime": is_datetime,
        XSD + "date": is_date,
        XSD + "anyURI": is_any_uri,
    }
    for name, (lo, hi) in _INTEGER_RANGES.items():
        v[XSD + name] = IntegerRange(lo, hi)
    return v
