import json
import math

import jsonschema
import pytest

from metricjet.cli import main, parse_number
from metricjet.report import report_schema, validate_report


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def run_json(capsys, *argv):
    code, out, err = run(capsys, *argv, "--json", "-", "--reproducible")
    doc = json.loads(out)
    validate_report(doc)
    return code, doc


def test_contact_theta(capsys):
    code, doc = run_json(capsys, "contact", "--fn", "catalog:theta", "--at", "0", "--monoid", "rplus")
    assert code == 0
    r = doc["results"]
    assert r["status"] == "Contactable"
    lims = {tuple(d["x"]): d["limit"][0] for d in r["directions"]}
    assert lims[(1.0,)] == pytest.approx(1.0) and lims[(-1.0,)] == pytest.approx(1.0)
    assert r["closed_form"]["max_abs_diff"] <= 1e-9


def test_contact_x_sin_inv_x(capsys):
    code, doc = run_json(capsys, "contact", "--fn", "x1*sin(1/x1)", "--at", "0", "--monoid", "rplus",
                         "--value-at-0", "0")
    assert code == 0
    assert doc["results"]["status"] == "NotContactable"
    assert doc["results"]["oscillation_witness"]["state"] == "oscillating"


def test_contact_giseh(capsys):
    code, doc = run_json(capsys, "contact", "--fn", "catalog:giseh", "--at", "0", "--monoid", "nr",
                         "--r", "0.3333333333")
    assert code == 0
    r = doc["results"]
    assert r["status"] == "Contactable" and r["closed_form"]["max_abs_diff"] <= 1e-6


def test_rho_x_sin_log(capsys):
    code, doc = run_json(capsys, "rho", "--fn", "catalog:x_sin_log", "--class", "fractal", "--r-exp", "2pi")
    assert code == 0
    r = doc["results"]
    assert r["rho"] == pytest.approx(math.sqrt(2), abs=1e-3)
    assert r["norm"] == pytest.approx(1.0, abs=1e-3)
    assert r["good_jet"] is False


def test_cantor(capsys):
    code, doc = run_json(capsys, "cantor", "--at", "0.5")
    assert code == 0
    r = doc["results"]
    assert r["distance"] == pytest.approx(1 / 6) and r["distance_exact"] == "1/6"
    assert r["bracket_exact"] == ["1/3", "2/3"]
    code, out, _ = run(capsys, "cantor", "--at", "1/2,2/3")
    assert "1/6" in out


def test_suite(capsys):
    code, out, _ = run(capsys, "suite")
    assert code == 0
    assert "13/13 rows passed" in out


def test_other_commands(capsys, tmp_path):
    code, doc = run_json(capsys, "extremum", "--fn", "abs(x1) + abs(x2)", "--at", "0,0")
    assert code == 0 and doc["results"]["status"] == "StrictLocalMin"
    code, doc = run_json(capsys, "jetdist", "--fn", "catalog:x_sin_log", "--at", "0")
    assert code == 0 and doc["results"]["distance"] == pytest.approx(1.0, abs=1e-3)
    code, doc = run_json(capsys, "jetdist", "--fn", "x + x^2", "--gn", "x", "--at", "0")
    assert doc["results"]["tangent"] is True
    code, doc = run_json(capsys, "classify", "--fn", "catalog:theta", "--at", "0")
    assert code == 0 and doc["results"]["ladder_violations"] == []
    assert doc["results"]["ground_truth"]["mismatches"] == []
    code, doc = run_json(capsys, "fractalize", "--fp", "sin(2*x1)", "--grid", "11")
    assert code == 0 and doc["results"]["homogeneous"] is True
    assert len(doc["traces"]["samples"]["rows"]) == 11
    code, doc = run_json(capsys, "catalog")
    assert code == 0 and len(doc["results"]["entries"]) >= 17
    code, doc = run_json(capsys, "catalog", "--name", "giseh")
    assert [p["name"] for p in doc["results"]["points"]] == ["0", "2/3", "1/3", "1/2"]


def test_determinism(capsys, tmp_path):
    args = ["contact", "--fn", "catalog:max", "--at", "1,1", "--seed", "3", "--reproducible"]
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert main(args + ["--json", str(a)]) == 0
    assert main(args + ["--json", str(b)]) == 0
    capsys.readouterr()
    assert a.read_bytes() == b.read_bytes()
    doc = json.loads(a.read_text())
    assert "timestamp" not in doc and doc["seed"] == 3
    main(["cantor", "--at", "0.5", "--json", str(a)])
    capsys.readouterr()
    assert "timestamp" in json.loads(a.read_text())


def test_csv_traces(capsys, tmp_path):
    d = tmp_path / "tr"
    assert main(["contact", "--fn", "catalog:theta", "--at", "0", "--csv-traces", str(d)]) == 0
    files = sorted(p.name for p in d.iterdir())
    assert files == ["contact_dir000.csv", "contact_dir001.csv"]
    lines = (d / "contact_dir000.csv").read_text().splitlines()
    assert lines[0] == "index,scale,value_1"
    assert lines[2].split(",")[:2] == ["1", "0.10000000000000001"]
    capsys.readouterr()


def test_config_overrides(capsys):
    code, doc = run_json(capsys, "jetdist", "--fn", "2*x", "--at", "0", "--radii", "1e-1,1e-2,1e-3",
                         "--tol", "1e-8", "--dirs", "8", "--seed", "9")
    assert code == 0 and doc["seed"] == 9
    assert [row[1] for row in doc["traces"]["tangency"]["rows"]] == [0.1, 0.01, 0.001]


def test_seed_from_environment(capsys, monkeypatch):
    monkeypatch.setenv("METRIC_JET_SEED", "17")
    _, doc = run_json(capsys, "cantor", "--at", "1")
    assert doc["seed"] == 17


@pytest.mark.parametrize("argv", [
    ["contact", "--fn", "sin(", "--at", "0"],
    ["contact", "--fn", "catalog:nope", "--at", "0"],
    ["contact", "--fn", "catalog:theta", "--at", "0", "--monoid", "nr"],
    ["contact", "--fn", "log(x)", "--at", "0"],
    ["extremum", "--fn", "x1, x1", "--at", "0"],
    ["jetdist", "--fn", "catalog:cbrt", "--at", "0"],
    ["contact", "--fn", "catalog:theta", "--at", "0,0"],
])
def test_errors_exit_nonzero(capsys, argv):
    code, out, err = run(capsys, *argv)
    assert code != 0 and "error" in err


def test_error_report_is_valid(capsys):
    code, out, _ = run(capsys, "contact", "--fn", "sin(", "--at", "0", "--json", "-", "--reproducible")
    doc = json.loads(out)
    validate_report(doc)
    assert code == 2 and doc["ok"] is False and doc["error"]


def test_schema_rejects_bad_reports():
    with pytest.raises(jsonschema.ValidationError):
        validate_report({"command": "contact"})
    assert report_schema()["title"] == "metricjet report"


def test_parse_number():
    assert parse_number("2pi") == pytest.approx(2 * math.pi)
    assert parse_number("2/3") == pytest.approx(2 / 3)
    assert parse_number("-pi") == pytest.approx(-math.pi)
    assert parse_number("1e-3") == 1e-3
