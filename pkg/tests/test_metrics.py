import logging
import os

import pytest

from distqa.engine import AssessmentConfig, assess
from distqa.metrics import (
    BUILTINS,
    COUNT,
    INDICATOR,
    RATIO,
    UnknownMetricError,
    custom_definition,
    datatype_breakdown,
    evaluate_builtin,
    infer_value_kind,
    list_metrics,
    metric_CN2,
    metric_I2,
    metric_L1,
    metric_L2,
    metric_RC1,
    metric_SV3,
    metric_U1,
    registry_lookup,
)
from distqa.qap import ZERO_DENOMINATOR, ConfigurationError, EvaluationContext
from distqa.rdf import XSD, Triple, iri, literal, parse_dataset

from randgen import INTERNAL, random_datasets

D1 = parse_dataset(os.path.join(os.path.dirname(__file__), "data", "d1.nt")).triples
CTX = EvaluationContext(internal_prefixes=("http://ex.org/",))
A, B = iri("http://ex.org/a"), iri("http://ex.org/b")
RDFS_LABEL = iri("http://www.w3.org/2000/01/rdf-schema#label")


def test_d1_values():
    assert metric_L1(D1) == 1
    assert metric_L2(D1) == 0
    assert metric_I2(D1, CTX) == 0.4
    assert metric_U1(D1, CTX) == 0.2
    assert metric_RC1(D1, CTX) == 0.0
    assert metric_SV3(D1) == 1
    assert metric_CN2(D1) == 0.4


def test_empty_dataset():
    for f in (metric_L1, metric_L2, metric_RC1, metric_SV3, metric_CN2):
        assert f([]) == 0
    out = evaluate_builtin("I2", [], CTX)
    assert out.value == 0.0 and ZERO_DENOMINATOR in out.flags


def test_l1_without_license_triple():
    assert metric_L1(D1[1:]) == 0


def test_l2_rights_statement():
    t = Triple(A, iri("http://purl.org/dc/terms/rights"), literal("All rights reserved"))
    assert metric_L2([t]) == 1
    wrong_subject_kind = Triple(t.subject._replace(kind="bnode", value="x"), t.predicate, t.object)
    assert metric_L2([wrong_subject_kind]) == 0


def test_i2_internal_only():
    assert metric_I2([Triple(A, iri("http://ex.org/p"), B)], CTX) == 0.0


def test_i2_requires_internal_prefixes():
    with pytest.raises(ConfigurationError, match="internal_prefixes"):
        metric_I2(D1, EvaluationContext())
    with pytest.raises(ConfigurationError):
        assess(AssessmentConfig(metrics=["I2"]), D1)


def test_u1_no_labels_and_overlap():
    assert metric_U1([Triple(A, iri("http://ex.org/p"), B)], CTX) == 0.0
    wide = EvaluationContext(internal_prefixes=("http://ex.org/", "http://www.w3.org/2000/01/rdf-schema#"))
    assert metric_U1([Triple(A, RDFS_LABEL, literal("x"))], wide) == 2.0


def test_u1_above_one_is_flagged_and_logged(caplog):
    wide = EvaluationContext(internal_prefixes=("http://ex.org/", "http://www.w3.org/2000/01/rdf-schema#"))
    with caplog.at_level(logging.WARNING):
        (res,) = assess(AssessmentConfig(metrics=["U1"], context=wide), [Triple(A, RDFS_LABEL, literal("x"))]).results
    assert res.value == 2.0 and "ratio-above-one" in res.flags
    assert "exceeds 1" in caplog.text


def test_rc1_examples():
    long_subject = Triple(iri("http://ex.org/" + "s" * 106), iri("http://ex.org/p"), B)
    assert len(long_subject.subject.value) == 120
    assert metric_RC1([long_subject]) == 1.0
    assert metric_RC1(D1, CTX.replace(uri_length_threshold=10)) == 1.0


def test_sv3_examples():
    p = iri("http://ex.org/p")
    assert metric_SV3([Triple(A, p, literal("12", XSD + "int"))]) == 0
    assert metric_SV3([Triple(A, p, literal("plain"))]) == 0


def test_sv3_unknown_datatypes_tallied():
    p = iri("http://ex.org/p")
    d = [Triple(A, p, literal("zz", "http://ex.org/dt")), Triple(A, p, literal("x", XSD + "int"))]
    (res,) = assess(AssessmentConfig(metrics=["SV3"], context=CTX), d).results
    assert res.value == 1
    assert res.extras["unknown_datatype_literals"] == 1
    assert "unknown-datatypes-skipped" in res.flags


def test_cn2_extremes():
    p = iri("http://ex.org/p")
    assert metric_CN2([Triple(A, p, literal("x"))]) == 1.0
    assert metric_CN2([Triple(A, p, B)]) == 0.0


def test_registry():
    assert registry_lookup("L1").id == "L1"
    with pytest.raises(UnknownMetricError):
        registry_lookup("XX")
    assert len(list_metrics()) == 7
    assert {m.dimension for m in list_metrics()} == {
        "licensing", "interlinking", "understandability", "representational-conciseness",
        "syntactic-validity", "conciseness",
    }


def test_value_kind_inference():
    assert [infer_value_kind(BUILTINS[m].expr) for m in BUILTINS] == [m.value_kind for m in BUILTINS.values()]
    assert custom_definition("x", BUILTINS["SV3"].expr * 0.5).value_kind == RATIO
    assert custom_definition("x", BUILTINS["SV3"].expr * 2).value_kind == COUNT
    assert custom_definition("x", BUILTINS["L1"].expr).value_kind == INDICATOR


RANDOM = random_datasets(40, seed=9, max_size=2000)
RCTX = EvaluationContext(internal_prefixes=(INTERNAL,))


@pytest.mark.parametrize("i", range(len(RANDOM)))
def test_ranges_and_breakdown(i):
    d = RANDOM[i]
    v = {m: evaluate_builtin(m, d, RCTX).value for m in BUILTINS}
    assert v["L1"] in (0, 1) and v["L2"] in (0, 1)
    for m in ("I2", "RC1", "CN2"):
        assert 0.0 <= v[m] <= 1.0
    assert v["SV3"] >= 0 and float(v["SV3"]).is_integer()
    failures, _ = datatype_breakdown(d, RCTX)
    assert sum(failures.values()) == v["SV3"]
