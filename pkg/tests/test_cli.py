import io
import json
import subprocess
import sys
from pathlib import Path

import pytest

from bestapprox import __version__
from bestapprox.cli import parse_config, run
from bestapprox.exactreal import parse_scalar

SQRT2 = "quad:(0+1*sqrt(2))/1"


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), out, err)
    doc = json.loads(out.getvalue()) if out.getvalue() else None
    return code, doc, err.getvalue()


def test_bsa_sqrt2():
    code, doc, _ = call("bsa", "--target", SQRT2, "--norm", "sup", "--up-to-p", "500")
    assert code == 0
    entries = doc["sequence"]["entries"]
    assert [e["p"] for e in entries] == [1, 2, 5, 12, 29, 70, 169, 408]
    assert entries[0]["D_lo"] == entries[0]["D_hi"] == "quad:(-1+1*sqrt(2))/1"
    assert doc["sequence"]["bound"] == 500 and doc["sequence"]["exhaustive"]
    assert doc["version"] == __version__
    assert doc["config"]["command"] == "bsa" and doc["config"]["target"] == ["quad:(0+1*sqrt(2))/1"]


def test_ba_lf_rational_dependence():
    code, doc, err = call("ba-lf", "--target", "rat:1/2", "--up-to-M", "10")
    assert code == 2
    assert doc["error"]["kind"] == "RationalDependence" and doc["error"]["witness"] == [-1, 2]
    assert "RationalDependence" in err


def test_ba_lf_targets_separated_by_semicolon():
    code, doc, _ = call("ba-lf", "--target", "quad:(0+1*sqrt(2))/1;quad:(0+1*sqrt(3))/1", "--up-to-M", "20")
    assert code == 0 and len(doc["sequence"]["target"]) == 2
    for e in doc["sequence"]["entries"]:
        assert 0 < parse_scalar(e["zeta_lo"]) < parse_scalar(e["zeta_hi"])


@pytest.mark.parametrize("argv", [
    ["bsa", "--target", "1/2", "--up-to-p", "5"],
    ["bsa", "--target", "rat:1/3", "--up-to-p", "0"],
    ["bsa", "--target", "rat:1/3", "--norm", "poly:fstar", "--up-to-p", "5"],
    ["bsa", "--target", "rat:1/3", "--up-to-p", "5", "--max-bits", "8"],
    ["analyze", "--target", "rat:1/3"],
    ["singular", "--psi", "cosh:2"],
    ["nonsense"],
])
def test_parse_errors_exit_1(argv):
    code, doc, err = call(*argv)
    assert code == 1 and doc is None and err.startswith("error:")


def test_precision_cap_from_environment(monkeypatch):
    monkeypatch.setenv("BESTAPPROX_MAX_BITS", "16")
    code, doc, _ = call("ba-lf", "--target", SQRT2, "--target", "quad:(0+1*sqrt(3))/1", "--up-to-M", "2000")
    assert code == 3 and doc["error"]["kind"] == "PrecisionExhausted"
    assert doc["config"]["max_bits"] == 16


def test_search_exhausted_keeps_partial_trace():
    code, doc, _ = call("steer", "--count", "2", "--budget", "1")
    assert code == 4 and doc["error"]["kind"] == "SearchExhausted"
    assert doc["partial"]["tau"] == [[1, [0, 0]]]


def test_degenerate_exits_2():
    code, doc, _ = call("singular", "--psi", "power:1/2")
    assert code == 2 and doc["error"]["kind"] == "AdmissibilityFailure"
    code, doc, _ = call("bsa", "--target", "rat:1/2", "--target", "rat:0", "--up-to-p", "3")
    assert code == 2 and doc["error"]["kind"] == "TieAtOptimum"
    code, doc, _ = call("steer", "--norm", "sup", "--direction", "1,1/2", "--direction", "1,1/3", "--count", "2")
    assert code == 2 and doc["error"]["kind"] == "IlluminationViolated"


def test_singular_document():
    code, doc, _ = call("singular", "--psi", "power:3", "--depth", "3")
    assert code == 0
    assert doc["validation"]["ok"] and doc["singularity"]["ok"]
    assert [lv["p"] for lv in doc["certificate"]["levels"]][:2] == [2, 97]
    assert all(w["nonzero"] and w["in_band"] for w in doc["witnesses"])


def test_outputs_are_deterministic():
    for argv in (["lift", "--samples", "2", "--seed", "5"], ["singular", "--depth", "3"],
                 ["analyze", "--target", "rat:3/7", "--target", "rat:5/11", "--up-to-p", "77"]):
        texts = []
        for _ in range(2):
            out = io.StringIO()
            assert run(argv, out, io.StringIO()) == 0
            texts.append(out.getvalue())
        assert texts[0] == texts[1]


def test_config_argv_roundtrip():
    for argv in (["bsa", "--target", "dec:0.25", "--target", "rat:2/6", "--norm", "poly:fstar", "--up-to-p", "9"],
                 ["steer", "--direction=-1,1/2", "--direction", "3/5,1/5", "--tol", "2/16"],
                 ["singular", "--psi", "exp:18/80", "--sigma", "8", "--lambda-bits", "1,0"],
                 ["report", "x.json", "y.json", "--csv", "r.csv"]):
        cfg = parse_config(argv)
        assert parse_config(cfg.argv()).canonical() == cfg.canonical()
    cfg = parse_config(["bsa", "--target", "dec:0.25", "--up-to-p", "9"])
    assert cfg.options["target"] == ["rat:1/4"]


def test_side_files_and_report(tmp_path):
    seq_json, seq_csv, svg = tmp_path / "s.json", tmp_path / "s.csv", tmp_path / "d.svg"
    code, _, _ = call("analyze", "--target", "rat:3/7", "--target", "rat:5/11", "--up-to-p", "77",
                      "--out", str(seq_json), "--svg", str(svg))
    assert code == 0 and svg.read_text().startswith("<svg")
    assert call("bsa", "--target", SQRT2, "--up-to-p", "100", "--csv", str(seq_csv))[0] == 0
    lines = seq_csv.read_text().splitlines()
    assert lines[0] == "nu,p,a,D,signature" and len(lines) == 7
    cert = tmp_path / "c.json"
    assert call("singular", "--out", str(cert))[0] == 0
    rep_csv = tmp_path / "r.csv"
    code, doc, _ = call("report", str(seq_json), str(cert), "--csv", str(rep_csv))
    assert code == 0
    assert [r["command"] for r in doc["reports"]] == ["analyze", "singular"]
    assert "certificate valid=True" in rep_csv.read_text()
    assert call("report", str(tmp_path / "missing.json"))[0] == 1


def test_demo_small_count():
    code, doc, _ = call("demo-fstar", "--count", "2")
    assert code == 0
    assert doc["verification"]["fstar_constant"] and doc["fstar"]["signatures"] == ["(+,+)", "(+,+)"]


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "bestapprox", "--version"], capture_output=True, text=True)
    assert out.returncode == 0 and out.stdout.strip() == __version__


SCHEMAS = Path(__file__).resolve().parent.parent / "docs" / "schemas"


@pytest.mark.parametrize("argv", [
    ["bsa", "--target", "rat:3/7", "--target", "rat:5/11", "--up-to-p", "77"],
    ["ba-lf", "--target", SQRT2, "--up-to-M", "50"],
    ["ba-lf", "--target", "rat:1/2", "--up-to-M", "5"],
    ["analyze", "--target", "rat:3/7", "--target", "rat:5/11", "--up-to-p", "77"],
    ["analyze", "--target", SQRT2, "--up-to-M", "40"],
    ["singular"],
    ["singular", "--depth", "1"],
    ["lift", "--samples", "1"],
    ["steer", "--count", "1"],
    ["steer", "--count", "2", "--budget", "1"],
    ["demo-fstar", "--count", "1"],
])
def test_outputs_match_schema(argv):
    jsonschema = pytest.importorskip("jsonschema")
    code, doc, _ = call(*argv)
    assert code in (0, 2, 4)
    schema = json.loads((SCHEMAS / f"{doc['schema']}.json").read_text())
    jsonschema.validate(doc, schema)


def test_report_matches_schema(tmp_path):
    jsonschema = pytest.importorskip("jsonschema")
    src = tmp_path / "s.json"
    call("singular", "--out", str(src))
    code, doc, _ = call("report", str(src))
    jsonschema.validate(doc, json.loads((SCHEMAS / "report.v1.json").read_text()))
