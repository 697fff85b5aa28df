import json
import subprocess
import sys

import pytest

from qmrigid.cli import OUT_ENV, SCHEMA, main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, out, json.loads(out)


def test_minor_determinant(capsys):
    code, _, rep = run(capsys, "minor", "--n", "2", "--rows", "1,2", "--cols", "1,2")
    assert code == 0 and rep["schema"] == SCHEMA and rep["ok"]
    assert [t["word"] for t in rep["element"]["terms"]] == [[1, 4], [2, 3]]


def test_presentation(capsys):
    code, _, rep = run(capsys, "presentation", "--n", "2")
    assert code == 0 and rep["indexing"]["n"] == 2


def test_center_exit_codes(capsys):
    code, _, rep = run(capsys, "center", "--n", "2")
    assert code == 0 and rep["verdict"] == "match"
    assert sorted(rep["kernel_basis"]) == [[0, 1, -1, 0], [1, 0, 0, 0]]
    code, _, rep = run(capsys, "center", "--n", "3")
    assert code == 1
    assert rep["formula_verdict"] == "mismatch" and rep["shifted_verdict"] == "match"


def test_cauchon(capsys):
    code, _, rep = run(capsys, "cauchon", "--n", "2", "--trace", "--verify-ca1")
    assert code == 0 and rep["ca1"]["ok"] and rep["nontrivial_steps"] == [4]
    assert len(rep["trace"]) == 4


def test_solve_reports(capsys):
    code, _, rep = run(capsys, "solve-unipotent", "--n", "2", "--max-degree", "4", "--fix-minors")
    assert code == 0
    assert rep["verdict"] == "nontrivial" and "note" in rep
    assert [p["solution_dim"] for p in rep["per_degree"]] == [2, 4, 6]


@pytest.mark.parametrize("n", ["2", "3"])
def test_verify_all(capsys, n):
    code, _, rep = run(capsys, "verify", "--suite", "all", "--n", n)
    assert code == 0
    assert set(rep["suites"]) == {"pbw", "minors", "torus", "cauchon", "autos"}


def test_determinism(capsys):
    _, a, _ = run(capsys, "verify", "--suite", "autos", "--n", "2", "--seed", "3")
    _, b, _ = run(capsys, "verify", "--suite", "autos", "--n", "2", "--seed", "3")
    assert a == b


def test_output_file_and_env(capsys, tmp_path, monkeypatch):
    target = tmp_path / "sub" / "m.json"
    _, out, _ = run(capsys, "minor", "--n", "2", "--rows", "1", "--cols", "2", "--output", str(target))
    assert target.read_text() == out
    monkeypatch.setenv(OUT_ENV, str(tmp_path))
    _, out, _ = run(capsys, "presentation", "--n", "1")
    assert (tmp_path / "presentation-n1.json").read_text() == out


@pytest.mark.parametrize(
    "argv",
    [
        ["minor", "--n", "2", "--rows", "3", "--cols", "1"],
        ["minor", "--n", "2", "--rows", "1,2", "--cols", "1"],
        ["minor", "--n", "2", "--rows", "a", "--cols", "1"],
        ["solve-unipotent", "--n", "2", "--max-degree", "1"],
        ["center", "--n", "0"],
        ["verify", "--suite", "nope", "--n", "2"],
    ],
)
def test_usage_errors(capsys, argv):
    with pytest.raises(SystemExit) as exc:
        main(argv)
    assert exc.value.code == 2
    assert "usage" in capsys.readouterr().err


def test_budget_error_is_reported(capsys):
    code, _, rep = run(capsys, "solve-unipotent", "--n", "2", "--max-degree", "9")
    assert code == 1 and "DegreeBudgetExceeded" in rep["error"]


def test_console_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "qmrigid.cli", "minor", "--n", "1", "--rows", "1", "--cols", "1"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0 and json.loads(proc.stdout)["ok"]
