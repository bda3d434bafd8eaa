"""Seeded random datasets that exercise every rule branch."""
from __future__ import annotations

import math
import random
from functools import lru_cache

from distqa import rdf
from distqa.rdf import Triple

# the term pool is small, so validated terms are built once
iri = lru_cache(maxsize=None)(rdf.iri)
bnode = lru_cache(maxsize=None)(rdf.bnode)
literal = lru_cache(maxsize=None)(rdf.literal)

XSD = "http://www.w3.org/2001/XMLSchema#"
INTERNAL = "http://in.example.org/"
EXTERNALS = ("http://ext.example.net/", "https://other.example.com/res/", "urn:x-ext:")

PREDICATES = [
    "http://purl.org/dc/terms/license",
    "http://purl.org/dc/terms/rights",
    "http://purl.org/dc/elements/1.1/rights",
    "http://purl.org/dc/terms/licenseDocument",
    "http://creativecommons.org/ns#license",
    "http://schema.org/license",
    "http://www.w3.org/2000/01/rdf-schema#label",
    "http://www.w3.org/2004/02/skos/core#prefLabel",
    "http://xmlns.com/foaf/0.1/name",
    "http://www.w3.org/1999/02/22-rdf-syntax-ns#type",
    INTERNAL + "vocab/p",
    INTERNAL + "vocab/q",
    "http://ext.example.net/vocab/r",
]

DATATYPES = [
    "integer", "int", "long", "short", "byte", "unsignedByte", "unsignedInt", "nonNegativeInteger",
    "positiveInteger", "negativeInteger", "nonPositiveInteger", "decimal", "double", "float",
    "boolean", "date", "dateTime", "anyURI", "string",
]
LEXICAL_SAMPLES = [
    "0", "1", "-1", "+7", "127", "128", "-129", "255", "256", "32768", "2147483648", "-2147483649",
    "18446744073709551615", "18446744073709551616", "9223372036854775808", "01", "",
    "1.5", ".5", "5.", "-.5", "1.2.3", "1e5", "1.5E-3", "E5", "1e", "INF", "-INF", "+INF", "NaN", "nan",
    "true", "false", "TRUE", "yes",
    "2020-02-29", "2019-02-29", "2000-02-29", "1900-02-29", "2020-04-31", "2020-13-01", "0000-01-01",
    "-0044-03-15", "12020-01-01", "02020-01-01", "2020-1-01", "2020-01-01Z", "2020-01-01+14:00",
    "2020-01-01+14:01", "2020-01-01-05:30",
    "2020-01-01T12:00:00", "2020-01-01T24:00:00", "2020-01-01T24:00:01", "2020-01-01T23:59:60",
    "2020-01-01T10:00:00.123Z", "2020-01-01T10:00:00.Z", "2020-01-01 10:00:00", "2020-01-01T1:00:00",
    "http://a.example/x", "has space", "tab\there", "ok-uri#frag",
]
FUZZ_ALPHABET = "0123456789+-.eE:TZ"
TEXTS = [
    "Alpha", "Licensed under CC-BY 4.0", "licence: ODbL", "Copyright 2019 Example",
    "ALL RIGHTS RESERVED", "no statement here", "LiCeNsE", "", "quote \" and \\ backslash",
    "line\nbreak", "ünïcödé ☃",
]


def _iri_value(rng: random.Random, base: str) -> str:
    roll = rng.random()
    if roll < 0.1:
        # straddle the default length threshold
        length = rng.choice((94, 95, 96, 97, 140))
        stem = f"{base}long/{rng.randrange(1000)}/"
        return stem + "x" * max(1, length - len(stem))
    return f"{base}r{rng.randrange(40)}"


def _resource(rng: random.Random):
    roll = rng.random()
    if roll < 0.5:
        return iri(_iri_value(rng, INTERNAL))
    if roll < 0.85:
        return iri(_iri_value(rng, rng.choice(EXTERNALS)))
    return bnode(f"b{rng.randrange(20)}")


def _literal(rng: random.Random):
    roll = rng.random()
    if roll < 0.25:
        return literal(rng.choice(TEXTS))
    if roll < 0.35:
        return literal(rng.choice(TEXTS), lang=rng.choice(("en", "de-CH")))
    if roll < 0.45:
        return literal(rng.choice(TEXTS), INTERNAL + "datatype/custom")
    dt = XSD + rng.choice(DATATYPES)
    if rng.random() < 0.2:
        lex = "".join(rng.choice(FUZZ_ALPHABET) for _ in range(rng.randrange(1, 12)))
    else:
        lex = rng.choice(LEXICAL_SAMPLES)
    return literal(lex, dt)


def _predicate(rng: random.Random):
    if rng.random() < 0.05:
        return iri(_iri_value(rng, INTERNAL + "vocab/"))
    return iri(rng.choice(PREDICATES))


def random_triples(rng: random.Random, n: int) -> list[Triple]:
    out: list[Triple] = []
    for _ in range(n):
        if out and rng.random() < 0.05:
            out.append(rng.choice(out))
            continue
        s = _resource(rng)
        p = _predicate(rng)
        o = _literal(rng) if rng.random() < 0.45 else _resource(rng)
        out.append(Triple(s, p, o))
    return out


def log_uniform_size(rng: random.Random, max_size: int = 10_000) -> int:
    if rng.random() < 0.01:
        return 0
    return int(math.exp(rng.uniform(0.0, math.log(max_size))))


def random_datasets(count: int, seed: int, max_size: int = 10_000) -> list[list[Triple]]:
    rng = random.Random(seed)
    return [random_triples(rng, log_uniform_size(rng, max_size)) for _ in range(count)]
