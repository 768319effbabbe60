import json
import os
import subprocess
import sys
from pathlib import Path

import pytest

from cxlin.cli import EXIT_OK, EXIT_PARSE, EXIT_UNDECIDED, main

GOLDEN = Path(__file__).parent / "golden"
SEVEN = ("sys3", "sys4", "sys5", "sys6", "sys7", "sys8", "sys1")


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.mark.parametrize("name", SEVEN)
def test_golden_reports(capsys, name):
    code, out, _ = run(capsys, "analyze", f"corpus:{name}")
    assert code == EXIT_OK
    assert out == (GOLDEN / f"{name}.json").read_text(encoding="utf-8")


def test_reports_stable_across_processes():
    env = dict(os.environ, PYTHONHASHSEED="12345")
    cmd = [sys.executable, "-m", "cxlin.cli", "analyze", "corpus:sys1", "--seed", "0"]
    out = subprocess.run(cmd, capture_output=True, env=env, check=True).stdout
    assert out.decode("utf-8") == (GOLDEN / "sys1.json").read_text(encoding="utf-8")


def test_report_keys_and_tolerances(capsys):
    _, out, _ = run(capsys, "analyze", "corpus:sys3")
    rep = json.loads(out)
    assert list(rep) == [
        "input", "cr", "base_equation", "cubic", "classification", "symmetries", "linear_target",
        "solution", "g2", "verification", "warnings", "tolerances", "status",
    ]
    for check in rep["verification"]:
        assert "tolerance" in check
    assert json.loads(json.dumps(rep)) == rep


def test_text_format(capsys):
    code, out, _ = run(capsys, "analyze", "corpus:sys4", "--format", "text")
    assert code == EXIT_OK
    assert "Υ2" in out and "U'' = -U" in out


def test_all_serial_and_parallel_agree(capsys):
    code1, serial, _ = run(capsys, "analyze", "--all")
    code2, parallel, _ = run(capsys, "analyze", "--all", "--jobs", "3")
    assert code1 == code2 == EXIT_OK
    assert serial == parallel
    names = [r["input"]["name"] for r in json.loads(serial)]
    assert names == list(SEVEN)


def test_warnings_go_to_stderr(capsys):
    code, out, err = run(capsys, "analyze", "corpus:sys8_scalar")
    assert code == EXIT_OK
    assert "warning: reference-discrepancy" in err
    rep = json.loads(out)
    assert rep["classification"]["class"] == "Υ2"
    assert rep["linear_target"]["tag"] == "general-linear"


MALFORMED = [
    "f1'' = +\n",
    "f1'' = 2x\nf2'' = 0\n",
    "u'' = f1\n",
    "f1'' = f1\n",
    "name = a\n",
    "bogus = 3\n",
    "f1'' = f1^(1/2)\nf2'' = 0\n",
    "f1'' = u\nf2'' = 0\n",
    "f1'' = (f1\nf2'' = 0\n",
    "generator X1: zeta = 1\nf1'' = 0\nf2'' = 0\n",
    "target t: U'' = 0\nf1'' = 0\nf2'' = 0\n",
]


@pytest.mark.parametrize("text", MALFORMED)
def test_malformed_files_exit_2(capsys, tmp_path, text):
    p = tmp_path / "bad.ode"
    p.write_text(text, encoding="utf-8")
    code, out, err = run(capsys, "analyze", str(p))
    assert code == EXIT_PARSE
    assert out == ""
    assert err.startswith(f"error: {p}: line ")


def test_usage_errors(capsys, tmp_path):
    assert run(capsys, "analyze")[0] == EXIT_PARSE
    assert run(capsys, "analyze", str(tmp_path / "missing.ode"))[0] == EXIT_PARSE
    assert run(capsys, "analyze", "corpus:nope")[0] == EXIT_PARSE
    with pytest.raises(SystemExit):
        main(["analyze", "corpus:sys3", "--degree", "-1"])


def test_undecided_exit_code(capsys, monkeypatch):
    from cxlin import kernel

    monkeypatch.setattr(kernel, "is_zero", lambda *a, **k: None)
    import cxlin.classify as classify_mod
    import cxlin.complexify as complexify_mod

    monkeypatch.setattr(classify_mod.kernel, "is_zero", lambda *a, **k: None)
    monkeypatch.setattr(complexify_mod.kernel, "is_zero", lambda *a, **k: None)
    code, out, err = run(capsys, "analyze", "corpus:sys3")
    assert code == EXIT_UNDECIDED
    assert "undecided" in err


def test_stdin_input(capsys, monkeypatch):
    import io

    monkeypatch.setattr(sys, "stdin", io.StringIO("u'' = x*u'^3\n"))
    code, out, _ = run(capsys, "analyze", "-")
    assert code == EXIT_OK
    assert json.loads(out)["input"]["source"] == "<stdin>"


def test_symmetries_subcommand(capsys):
    code, out, _ = run(capsys, "symmetries", "corpus:sys7")
    assert code == EXIT_OK
    sec = json.loads(out)["symmetries"]
    assert sec["dimension"] == 3
    flags = {d["name"]: d["is_symmetry"] for d in sec["declared"]}
    assert flags == {"X1": True, "X2": True, "X3": False}


def test_geometry_csv(capsys):
    code, out, _ = run(capsys, "geometry", "corpus:sys7", "--constants", "1", "0", "0", "0", "--n", "3")
    assert code == EXIT_OK
    lines = out.splitlines()
    assert lines[0] == "surface-id,chi1,chi2,value"
    assert lines[-1] == "dot,,,0"
    assert sum(1 for ln in lines if ln.startswith("F1,")) == 9
    assert "F1,1.0,-1.0,1.0" in lines
    assert "F2,1.0,-1.0,-1.0" in lines


def test_geometry_errors(capsys):
    assert run(capsys, "geometry", "corpus:sys7", "--constants", "0", "0", "1", "1")[0] == EXIT_PARSE
    assert run(capsys, "geometry", "corpus:sys3")[0] == EXIT_PARSE
    assert run(capsys, "geometry", "corpus:sys7", "--constants", "a", "0", "0", "0")[0] == EXIT_PARSE
