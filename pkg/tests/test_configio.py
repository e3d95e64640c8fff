"""Config reading and writing: round trips, determinism, failure reporting."""

import json
from pathlib import Path

import pytest
from hypothesis import HealthCheck, given, settings

from ea4rca.configio import (
    ConfigDocument,
    ConfigParseError,
    cc_from_expr,
    cc_to_expr,
    document_to_data,
    load_design,
    parse_design,
    save_design,
    serialize_design,
    try_parse_design,
)
from ea4rca.model import Butterfly, Cascade, Parallel, Single
from design_strategies import deployable_designs

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"
FIXTURE_FILES = sorted(FIXTURES.glob("*.ea4rca.json"))


@pytest.mark.parametrize("path", FIXTURE_FILES, ids=lambda p: p.name)
def test_fixture_round_trip_is_byte_identical(path):
    text = path.read_text()
    doc = parse_design(text)
    assert serialize_design(doc) == text


@settings(max_examples=100, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(deployable_designs())
def test_parse_serialize_identity(design):
    text = serialize_design(design)
    doc = parse_design(text)
    assert doc.design == design
    assert serialize_design(doc) == text


def test_serialization_is_deterministic():
    doc = load_design(FIXTURES / "mm.ea4rca.json")
    assert serialize_design(doc) == serialize_design(doc)
    # key order of input dicts must not leak into the output
    data = document_to_data(doc)
    shuffled = json.loads(json.dumps(data))
    reordered = dict(reversed(list(shuffled.items())))
    doc2, report = try_parse_design(json.dumps(reordered))
    assert report.ok
    assert serialize_design(doc2) == serialize_design(doc)


def test_unknown_fields_survive_round_trip():
    data = json.loads((FIXTURES / "mm.ea4rca.json").read_text())
    data["vendor_notes"] = {"board": "vck5000"}
    data["pus"][0]["placement_hint"] = "col0"
    data["dus"][0]["trace_tag"] = 7
    text = json.dumps(data)
    doc = parse_design(text)
    out = json.loads(serialize_design(doc))
    assert out["vendor_notes"] == {"board": "vck5000"}
    assert out["pus"][0]["placement_hint"] == "col0"
    assert out["dus"][0]["trace_tag"] == 7


def test_cc_expressions():
    cases = [
        (Single("k"), "Single"),
        (Cascade(4, "k"), "Cascade<4>"),
        (Parallel(16, Cascade(4, "k")), "Parallel<16>*Cascade<4>"),
        (Parallel(2, Parallel(3, Single("k"))), "Parallel<2>*Parallel<3>*Single"),
        (Butterfly(4, ("a", "b")), "Butterfly<4>"),
    ]
    for cc, expr in cases:
        assert cc_to_expr(cc) == expr
        rebuilt = cc_from_expr(expr, "k", ("a", "b"))
        assert cc_to_expr(rebuilt) == expr


def test_cc_expression_errors():
    bad = [
        "Cascade",  # missing argument
        "Cascade<x>",
        "Parallel<2>",  # Parallel cannot be a leaf
        "Single*Single",  # only Parallel may wrap
        "Garbage<3>",
        "Parallel<2>*",
        "Cascade<4",
    ]
    for expr in bad:
        with pytest.raises(ValueError):
            cc_from_expr(expr, "k", ())


def _parse_codes(text: str):
    doc, report = try_parse_design(text)
    return doc, {(d.code, d.path) for d in report.errors}


def test_failures_name_the_offending_path():
    base = json.loads((FIXTURES / "mm.ea4rca.json").read_text())

    broken = json.loads(json.dumps(base))
    del broken["pus"][1]["name"]
    _, codes = _parse_codes(json.dumps(broken))
    assert ("MISSING_FIELD", "$.pus[1].name") in codes

    broken = json.loads(json.dumps(base))
    broken["pus"][0]["psts"][0]["dacs"][0]["mode"] = "WARP"
    _, codes = _parse_codes(json.dumps(broken))
    assert ("BAD_ENUM", "$.pus[0].psts[0].dacs[0].mode") in codes

    broken = json.loads(json.dumps(base))
    broken["pus"][0]["psts"][0]["dacs"][1]["serves"] = "9-3"
    _, codes = _parse_codes(json.dumps(broken))
    assert ("BAD_SELECTOR", "$.pus[0].psts[0].dacs[1].serves") in codes

    broken = json.loads(json.dumps(base))
    broken["pus"][0]["psts"][0]["cc"]["expr"] = "Ring<4>"
    _, codes = _parse_codes(json.dumps(broken))
    assert ("CC_EXPR", "$.pus[0].psts[0].cc.expr") in codes

    broken = json.loads(json.dumps(base))
    broken["dus"][0]["tpc"]["tb_bytes_in"] = True
    _, codes = _parse_codes(json.dumps(broken))
    assert ("BAD_TYPE", "$.dus[0].tpc.tb_bytes_in") in codes

    broken = json.loads(json.dumps(base))
    broken["format_version"] = "99.0"
    _, codes = _parse_codes(json.dumps(broken))
    assert any(code == "FORMAT_VERSION" for code, _ in codes)

    doc, report = try_parse_design("{not json")
    assert doc is None
    assert report.errors[0].code == "JSON_SYNTAX"
    assert report.errors[0].path.startswith("$:")


def test_no_failure_yields_a_partial_design():
    base = json.loads((FIXTURES / "mm.ea4rca.json").read_text())
    del base["pus"][0]["psts"][0]["cc"]
    text = json.dumps(base)
    with pytest.raises(ConfigParseError) as err:
        parse_design(text)
    assert any(
        d.code == "MISSING_FIELD" and d.path == "$.pus[0].psts[0].cc.expr"
        for d in err.value.diagnostics
    )
    # decode errors never produce a half-built design
    doc, report = try_parse_design(text)
    assert doc is None and not report.ok


def test_structural_violations_block_parse_design():
    base = json.loads((FIXTURES / "mm.ea4rca.json").read_text())
    base["pairings"]["du0"] = ["pu0", "no_such_pu"]
    with pytest.raises(ConfigParseError) as err:
        parse_design(json.dumps(base))
    assert any(d.code == "PAIRING_UNKNOWN_PU" for d in err.value.diagnostics)


def test_save_and_load(tmp_path):
    doc = load_design(FIXTURES / "fft.ea4rca.json")
    out = tmp_path / "copy.ea4rca.json"
    save_design(out, doc)
    assert load_design(out) == doc
    assert out.read_text() == serialize_design(doc)


def test_serialize_accepts_bare_design():
    doc = load_design(FIXTURES / "mmt.ea4rca.json")
    assert serialize_design(doc.design) == serialize_design(ConfigDocument(doc.design))
