"""DQV (W3C Data Quality Vocabulary) rendering of assessment results."""
from __future__ import annotations

import hashlib
from datetime import datetime, timezone
from typing import Iterable

from .rdf import XSD, Triple, iri, literal, write_ntriples

DQV = "http://www.w3.org/ns/dqv#"
PROV = "http://www.w3.org/ns/prov#"
RDF_TYPE = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type"


def now_timestamp() -> str:
    return datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def content_hash(origin: str, timestamp: str) -> str:
    return hashlib.sha256(f"{origin}\n{timestamp}".encode("utf-8")).hexdigest()[:16]


def metric_iri(base: str, metric_id: str) -> str:
    return f"{base}metric/{metric_id}"


def _value_literal(result):
    if result.value_kind == "count":
        return literal(str(int(result.value)), XSD + "integer")
    return literal(repr(float(result.value)), XSD + "double")


def dqvify(results: Iterable, dataset_iri: str, base: str, timestamp: str | None = None) -> list[Triple]:
    """Five triples per result: type, metric, dataset, value and generation time.

    Measurement IRIs are ``base + metric id + "-" + hash(origin, timestamp)``,
    so pinning ``timestamp`` makes the output byte-reproducible.
    """
    results = list(results)
    if not results:
        raise ValueError("no results to describe")
    dataset = iri(dataset_iri)
    iri(base + "x")
    timestamp = timestamp or now_timestamp()
    stamp = literal(timestamp, XSD + "dateTime")
    rdf_type = iri(RDF_TYPE)
    measurement_class = iri(DQV + "QualityMeasurement")
    is_measurement_of = iri(DQV + "isMeasurementOf")
    computed_on = iri(DQV + "computedOn")
    value_p = iri(DQV + "value")
    generated = iri(PROV + "generatedAtTime")

    out = []
    seen = set()
    for res in results:
        if res.value is None:
            raise ValueError(f"{res.metric_id}: cannot describe a failed metric")
        m = iri(f"{base}{res.metric_id}-{content_hash(res.origin, timestamp)}")
        if m in seen:
            raise ValueError(f"duplicate measurement for metric {res.metric_id}")
        seen.add(m)
        out += [
            Triple(m, rdf_type, measurement_class),
            Triple(m, is_measurement_of, iri(metric_iri(base, res.metric_id))),
            Triple(m, computed_on, dataset),
            Triple(m, value_p, _value_literal(res)),
            Triple(m, generated, stamp),
        ]
    return out


def write_dqv(triples: Iterable[Triple], path) -> int:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        return write_ntriples(triples, fh)
