import io
import os

import pytest

from distqa.dqv import DQV, PROV, content_hash, dqvify, write_dqv
from distqa.engine import AssessmentConfig, MetricResult, assess
from distqa.metrics import BUILTINS
from distqa.qap import EvaluationContext
from distqa.rdf import XSD, parse_dataset, write_ntriples

D1 = parse_dataset(os.path.join(os.path.dirname(__file__), "data", "d1.nt"))
CTX = EvaluationContext(internal_prefixes=("http://ex.org/",))
BASE = "http://example.org/quality/"
DATASET = "http://example.org/dataset/d1"
STAMP = "2024-01-01T00:00:00Z"


def _results(metrics):
    return assess(AssessmentConfig(metrics=list(metrics), context=CTX), D1).results


def test_single_result_shape():
    out = dqvify(_results(["L1"]), DATASET, BASE, STAMP)
    assert len(out) == 5
    preds = [t.predicate.value for t in out]
    assert preds == [
        "http://www.w3.org/1999/02/22-rdf-syntax-ns#type",
        DQV + "isMeasurementOf",
        DQV + "computedOn",
        DQV + "value",
        PROV + "generatedAtTime",
    ]
    value = out[3].object
    assert (value.value, value.datatype) == ("1.0", XSD + "double")
    assert out[2].object.value == DATASET
    assert out[4].object.datatype == XSD + "dateTime"


def test_all_metrics_distinct_measurements():
    out = dqvify(_results(BUILTINS), DATASET, BASE, STAMP)
    assert len(out) == 35
    assert len({t.subject for t in out}) == 7


def test_count_metric_is_integer():
    (t,) = [t for t in dqvify(_results(["SV3"]), DATASET, BASE, STAMP) if t.predicate.value == DQV + "value"]
    assert (t.object.value, t.object.datatype) == ("1", XSD + "integer")


def test_measurement_iri_depends_on_origin_and_time():
    res = _results(["L1"])
    a = dqvify(res, DATASET, BASE, STAMP)[0].subject.value
    assert a == f"{BASE}L1-{content_hash(D1.origin, STAMP)}"
    assert dqvify(res, DATASET, BASE, "2025-01-01T00:00:00Z")[0].subject.value != a


def test_rejects_empty_and_failed():
    with pytest.raises(ValueError):
        dqvify([], DATASET, BASE, STAMP)
    with pytest.raises(ValueError):
        dqvify([MetricResult("X", None, error="boom")], DATASET, BASE, STAMP)


def test_reparse_round_trip(tmp_path):
    out = dqvify(_results(BUILTINS), DATASET, BASE, STAMP)
    path = tmp_path / "q.nt"
    assert write_dqv(out, path) == 35
    assert parse_dataset(path, policy="strict").triples == out
    buf = io.StringIO()
    write_ntriples(out, buf)
    assert path.read_text(encoding="utf-8") == buf.getvalue()
