import json
import os
import subprocess
import sys

import pytest

from dhtransfer.cli import REPORT_SCHEMA, main

BASE_KEYS = {"schema", "command", "arguments", "status", "exit_code"}


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, out


def run_json(capsys, *argv):
    code, out = run(capsys, *argv)
    report = json.loads(out)
    assert report["schema"] == REPORT_SCHEMA
    assert report["exit_code"] == code
    assert BASE_KEYS <= set(report)
    return code, report


def _subprocess(argv, threads):
    env = dict(os.environ, DHTRANSFER_THREADS=str(threads))
    return subprocess.run([sys.executable, "-m", "dhtransfer.cli", *argv], capture_output=True, env=env,
                          check=False).stdout


@pytest.mark.parametrize("argv", [
    ["verify", "dugger-shipley", "--rmax", "3", "--imax", "2"],
    ["transfer", "dugger-shipley", "--rmax", "3", "--imax", "2"],
    ["obstruct", "dugger-shipley", "H(A)", "--p", "2"],
])
def test_output_is_byte_identical(argv):
    first = _subprocess(argv, 1)
    assert first
    assert _subprocess(argv, 1) == first
    assert _subprocess(argv, 4) == first


def test_verify_exit_codes(capsys):
    code, rep = run_json(capsys, "verify", "dugger-shipley")
    assert code == 0 and rep["status"] == "pass"
    assert {"fixture", "ring", "parameters", "window", "bounds", "checks"} <= set(rep)
    code, rep = run_json(capsys, "verify", "dugger-shipley-literal")
    assert code == 1 and rep["status"] == "fail"
    failing = [c for c in rep["checks"] if c["status"] == "fail"]
    assert failing


def test_transfer_expected_variants(capsys):
    code, rep = run_json(capsys, "transfer", "dugger-shipley", "--rmax", "3", "--imax", "2",
                         "--expect", "consistent")
    assert code == 0
    assert rep["expected"]["status"] == "match"
    assert all(c["status"] == "pass" for c in rep["checks"])
    code, rep = run_json(capsys, "transfer", "dugger-shipley", "--rmax", "3", "--imax", "2")
    assert code == 1
    assert rep["expected"]["variant"] == "literal"
    assert rep["expected"]["differences"] > 0


def test_obstruct_reports(capsys):
    code, rep = run_json(capsys, "obstruct", "dugger-shipley", "H(A)", "--p", "2")
    assert code == 0
    assert rep["result"] == "Obstructed"
    assert (rep["obstruction"]["i"], rep["obstruction"]["r"]) == (1, 2)
    assert rep["obstruction"]["reproduces"]
    code, rep = run_json(capsys, "obstruct", "dugger-shipley", "H(A)", "--p", "3")
    assert rep["result"] == "Obstructed"
    assert (rep["obstruction"]["i"], rep["obstruction"]["r"]) == (2, 2)
    assert any("1/2" in f.get("small_fractions", []) for f in rep["forced"])


def test_ce_resolve_and_spectral(capsys):
    code, rep = run_json(capsys, "ce-resolve", "z-p-z")
    assert code == 0
    code, rep = run_json(capsys, "spectral", "z-p-z")
    assert code == 0


def test_koszul_and_fixtures(capsys):
    code, rep = run_json(capsys, "koszul-dual-numbers", "--weight", "4")
    assert code == 0
    code, rep = run_json(capsys, "fixtures")
    names = {f["name"] for f in rep["fixtures"]}
    assert {"dugger-shipley", "commutative", "lie", "z-p-z", "H(A)"} <= names


def test_strictify_commutative(capsys):
    code, rep = run_json(capsys, "strictify", "commutative", "--weight", "3")
    assert code == 0


@pytest.mark.parametrize("argv, kind", [
    (["verify", "nosuch"], None),
    (["strictify", "dugger-shipley"], "LaurentCarrier"),
    (["verify", "dugger-shipley", "--ring", "ZZ/1"], None),
    (["verify", "dugger-shipley", "--window", "n=oops"], "usage"),
    (["bogus-command"], "usage"),
])
def test_user_errors_exit_2(capsys, argv, kind):
    code, out = run(capsys, *argv)
    rep = json.loads(out)
    assert code == 2 and rep["exit_code"] == 2
    assert rep["status"] == "error"
    if kind:
        assert kind in (rep["error"]["kind"], rep["error"]["type"])


def test_fixture_file_error_path(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"schema": "dhtransfer.fixture/1", "name": "b", "ring": "ZZ",
                               "algebras": {"A": {"families": [], "operations": []}},
                               "morphisms": [{"name": "f", "source": "A", "target": "B"}]}))
    code, out = run(capsys, "verify", str(bad))
    rep = json.loads(out)
    assert code == 2
    assert rep["error"]["type"] == "FixtureError"
    assert "'B'" in rep["error"]["message"]


def test_fixture_files_verify(capsys):
    root = os.path.join(os.path.dirname(__file__), os.pardir, "fixtures")
    code, _ = run(capsys, "verify", os.path.join(root, "dugger_shipley.json"))
    assert code == 0


def test_text_output(capsys):
    code, out = run(capsys, "verify", "zero", "--output", "text")
    assert code == 0
    assert "status: pass" in out
    with pytest.raises(json.JSONDecodeError):
        json.loads(out)


def test_timings_opt_in(capsys):
    _, rep = run_json(capsys, "fixtures")
    assert "timings" not in rep
    _, rep = run_json(capsys, "fixtures", "--timings")
    assert "seconds" in rep["timings"]
