import json
import subprocess
import sys
from importlib import resources

import pytest

from crninject.cli import main

NETWORKS = resources.files("crninject").joinpath("networks")


def path(name):
    return str(NETWORKS.joinpath(f"{name}.crn"))


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_analyze_futile_text(capsys):
    code, out, _ = run(capsys, "analyze", path("futile_cycle"), "--det", "--no-timing")
    assert code == 0
    assert "verdict: INJECTIVE (det sign: negative, −det all-positive)" in out
    assert "-det = k3*k4*k5*c_S2 + k2*k4*k5*c_S2" in out
    assert "timings" not in out


def test_analyze_two_site_json(capsys):
    code, out, _ = run(capsys, "analyze", path("two_site"), "--json", "--no-timing")
    assert code == 2
    rep = json.loads(out)
    assert rep["format_version"] == 1
    assert rep["verdict"]["kind"] == "not_injective"
    w = rep["verdict"]["witnesses"]
    assert w["positive"]["monomial"][0] != "-" and w["negative"]["monomial"].startswith("-")
    assert "timings" not in rep


def test_analyze_two_site_det_contains_reference_terms(capsys):
    code, out, _ = run(capsys, "analyze", path("two_site"), "--json", "--det", "--no-timing")
    det = json.loads(out)["determinant"]["polynomial"]
    assert " + k1*k3*k4*k7*k9*k12*c_S1*c_S3*c_S2" in det
    assert " - k2*k4*k6*k7*k10*k12*c_S1*c_S4*c_S2" in det


def test_analyze_degenerate(capsys):
    code, out, _ = run(capsys, "analyze", path("degenerate"))
    assert code == 3
    assert "ALL STEADY STATES DEGENERATE" in out


def test_json_is_byte_stable(capsys):
    args = ("analyze", path("unique_not_injective"), "--json", "--det", "--degeneracy",
            "--open-closed", "--wsd", "--no-timing")
    _, first, _ = run(capsys, *args)
    _, second, _ = run(capsys, *args)
    assert first == second
    rep = json.loads(first)
    assert {"degeneracy", "open_closed", "wsd", "determinant"} <= rep.keys()


def test_text_and_json_agree(capsys):
    _, text, _ = run(capsys, "analyze", path("two_site"), "--no-timing")
    _, js, _ = run(capsys, "analyze", path("two_site"), "--json", "--no-timing")
    w = json.loads(js)["verdict"]["witnesses"]
    assert w["positive"]["monomial"] in text and w["negative"]["monomial"] in text


def test_method_and_budget_flags(capsys):
    code, out, err = run(capsys, "analyze", path("two_site"), "--method", "subset", "--budget", "10")
    assert code == 1 and "budget" in err
    code, out, _ = run(capsys, "analyze", path("two_site"), "--budget", "10", "--json", "--no-timing")
    assert code == 2 and json.loads(out)["method"] == "elimination"


def test_errors(capsys, tmp_path):
    code, _, err = run(capsys, "analyze", str(tmp_path / "missing.crn"))
    assert code == 1 and "cannot read" in err
    bad = tmp_path / "bad.crn"
    bad.write_text("A -> B\nC -> C\n")
    code, _, err = run(capsys, "analyze", str(bad))
    assert code == 1 and "line 2" in err


def test_crosscheck(capsys):
    code, out, _ = run(capsys, "crosscheck", path("futile_cycle"), "--trials", "100", "--seed", "7")
    assert code == 0
    assert "fully open identity: holds" in out
    assert "100/100" in out


def test_crosscheck_golden(capsys, tmp_path):
    _, golden, _ = run(capsys, "analyze", path("futile_cycle"), "--json", "--det", "--no-timing")
    good = tmp_path / "good.json"
    good.write_text(golden)
    code, out, _ = run(capsys, "crosscheck", path("futile_cycle"), "--trials", "5", "--golden", str(good))
    assert code == 0 and "golden: match" in out
    bad = tmp_path / "bad.json"
    bad.write_text(golden.replace("k3*k4*k5*c_S2", "k3*k4*k5*c_S1", 1))
    code, out, _ = run(capsys, "crosscheck", path("futile_cycle"), "--trials", "5", "--golden", str(bad))
    assert code == 1
    assert "golden: MISMATCH" in out and "+++ produced" in out


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "crninject", "analyze", path("single"), "--no-timing"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert "verdict: INJECTIVE" in proc.stdout
