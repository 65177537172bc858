"""Tests for the command-line front end."""

import json
from pathlib import Path

import pytest

from sproclab.cli import main

INSTANCES = Path(__file__).resolve().parent.parent / "src" / "sproclab" / "instances"


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_check_a_bundled_holds(capsys):
    code, out, _ = run(capsys, "check-a", str(INSTANCES / "trust_region.json"),
                       "--seed", "3")
    assert code == 0
    rep = json.loads(out)
    assert rep["result"]["verdict"] == "holds"
    assert rep["kind"] == "check-a"
    assert rep["config"]["seed"] == 3
    assert rep["input_sha256"]


def test_certify_b_none_is_definite(capsys):
    code, out, _ = run(capsys, "certify-b",
                       str(INSTANCES / "negative_const.json"), "--seed", "3")
    assert code == 0
    rep = json.loads(out)
    assert rep["result"]["certificate"] is None
    assert rep["result"]["verdict"] == "none"


def test_validate_regression_t2_1(capsys):
    code, out, _ = run(capsys, "validate",
                       str(INSTANCES / "regression_nonconvex.json"),
                       "--theorem", "t2_1", "--seed", "3")
    assert code == 0
    rep = json.loads(out)
    assert rep["result"]["agreement"] is True
    assert rep["result"]["sides"]["procedure_valid"] is False


def test_check_ah_with_rhs_file(tmp_path, capsys):
    rhs = tmp_path / "h.json"
    rhs.write_text(json.dumps({
        "kind": "affine",
        "pieces": [{"slope": ["0"], "intercept": "-1"}]}))
    code, out, _ = run(capsys, "check-ah", str(INSTANCES / "trust_region.json"),
                       "--rhs", str(rhs), "--seed", "3")
    assert code == 0
    assert json.loads(out)["result"]["verdict"] == "holds"
    code2, out2, _ = run(capsys, "certify-bh",
                         str(INSTANCES / "trust_region.json"),
                         "--rhs", str(rhs), "--seed", "3")
    assert code2 == 0
    assert json.loads(out2)["result"]["valid_on_probes"] is True


def test_hypotheses_report(capsys):
    code, out, _ = run(capsys, "hypotheses",
                       str(INSTANCES / "trust_region.json"), "--seed", "3")
    rep = json.loads(out)
    assert "H1" in rep["result"]
    assert code in (0, 2)


def test_malformed_json_diagnostics(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"dim_x": 1,\n  "oops"\n}')
    code, _out, err = run(capsys, "check-a", str(bad))
    assert code == 1
    assert "bad.json:" in err and ":" in err.split("bad.json:")[1]


def test_missing_file_is_input_error(capsys):
    code, _out, err = run(capsys, "check-a", "/nonexistent/file.json")
    assert code == 1
    assert "error" in err


def test_report_byte_identical(tmp_path, capsys):
    out1 = tmp_path / "r1.json"
    out2 = tmp_path / "r2.json"
    for target in (out1, out2):
        code = main(["check-a", str(INSTANCES / "trust_region.json"),
                     "--seed", "9", "--out", str(target)])
        assert code == 0
    assert out1.read_bytes() == out2.read_bytes()


def test_roundtrip_parse_serialize_parse():
    from sproclab.rockafellian import RobustInstance
    text = (INSTANCES / "regression_nonconvex.json").read_text()
    inst = RobustInstance.loads(text)
    again = RobustInstance.loads(inst.dumps())
    assert again.dumps() == inst.dumps()


def test_influence_reduce_and_raster(tmp_path, capsys):
    code, out, _ = run(capsys, "influence-reduce",
                       str(INSTANCES / "influence_demo.json"),
                       "--center", "s", "--claim-const", "-1",
                       "--instance-out", str(tmp_path / "inst.json"),
                       "--seed", "3")
    assert code == 0
    rep = json.loads(out)
    assert rep["result"]["system"]["center"] == "s"
    assert (tmp_path / "inst.json").exists()

    csv = tmp_path / "r.csv"
    pgm = tmp_path / "r.pgm"
    code2, out2, _ = run(capsys, "influence-raster",
                         str(INSTANCES / "influence_demo.json"),
                         "--center", "s", "--bbox=-5,5,-5,5",
                         "--res", "20,20", "--csv", str(csv),
                         "--pgm", str(pgm), "--seed", "3")
    assert code2 == 0
    assert csv.read_text().count("\n") == 20
    assert pgm.read_text().startswith("P2\n20 20\n1\n")
    body = json.loads(out2)["result"]
    assert body["cells"] == 400
    assert 0 < body["inside"] < 400


def test_influence_reduce_missing_center(capsys):
    code, _out, err = run(capsys, "influence-reduce",
                          str(INSTANCES / "influence_demo.json"),
                          "--center", "zz")
    assert code == 1 and "error" in err


def test_validate_needs_rhs_for_t4(capsys):
    code, _out, err = run(capsys, "validate",
                          str(INSTANCES / "trust_region.json"),
                          "--theorem", "t4_1")
    assert code == 1 and "error" in err


def test_selftest_passes(capsys):
    code, out, _ = run(capsys, "selftest", "--seed", "3")
    assert code == 0
    assert "[PASS]" in out
    assert "[FAIL]" not in out


def test_exit_2_on_unknown(tmp_path, capsys):
    # an instance engineered so the certificate search ends borderline is
    # hard to pin; instead check the marker logic through a validate run on
    # a nonconvex instance where the biconjugate side is unknown
    code, out, _ = run(capsys, "validate",
                       str(INSTANCES / "regression_nonconvex.json"),
                       "--theorem", "t3_1", "--seed", "3")
    rep = json.loads(out)
    has_unknown = "unknown" in json.dumps(rep["result"]).lower() or \
        rep["result"]["agreement"] is None
    assert (code == 2) == has_unknown
