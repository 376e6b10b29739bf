import csv
import json

import pytest

from sgdc import cli
from sgdc.config import settings
from sgdc.io import save_problem
from sgdc.schemas.solver import SolveReport


@pytest.fixture
def toy_problem(tmp_path, toy_spec):
    path = tmp_path / "toy.json"
    save_problem(toy_spec, path)
    return path


def test_solve_writes_report_and_trace(tmp_path, toy_problem, capsys):
    out, trace = tmp_path / "report.json", tmp_path / "trace.csv"
    code = cli.main(
        ["solve", "--algorithm", "line-search", "--problem", str(toy_problem),
         "--out", str(out), "--trace", str(trace)]
    )
    assert code == 0
    report = SolveReport.model_validate_json(out.read_text())
    assert report.support == [0]
    with trace.open() as stream:
        rows = list(csv.DictReader(stream))
    assert len(rows) == report.iterations + 1
    assert rows[0]["k"] == "0"
    assert "line_search" in capsys.readouterr().out


def test_solve_with_overrides(tmp_path, toy_problem):
    x0 = tmp_path / "x0.json"
    x0.write_text("[1.0, 1.0]")
    out = tmp_path / "report.json"
    code = cli.main(
        ["solve", "--algorithm", "extrapolation", "--problem", str(toy_problem), "--x0", str(x0),
         "--M", "2", "--step-divisor", "10", "--beta", "0.3", "--max-outer", "500",
         "--out", str(out)]
    )
    assert code == 0
    report = SolveReport.model_validate_json(out.read_text())
    assert report.algorithm == "extrapolation"
    assert report.beta == 0.3
    assert report.objective_trace[0].mu == 2.0


def test_round_trip_certifies(tmp_path, toy_problem, capsys):
    out = tmp_path / "report.json"
    assert cli.main(["solve", "--problem", str(toy_problem), "--out", str(out)]) == 0
    capsys.readouterr()
    code = cli.main(["certify", "--problem", str(toy_problem), "--x", str(out), "--tol", "1e-6"])
    assert code == 0
    assert "is_sw_d_stationary: true" in capsys.readouterr().out.splitlines()


def test_certify_reports_violations(tmp_path, toy_problem, capsys):
    candidate = tmp_path / "cand.json"
    candidate.write_text("[2.0, 0.001]")
    certificate = tmp_path / "certificate.json"
    code = cli.main(
        ["certify", "--problem", str(toy_problem), "--x", str(candidate),
         "--out", str(certificate)]
    )
    assert code == 0
    lines = capsys.readouterr().out.splitlines()
    assert "is_sw_d_stationary: false" in lines
    assert "lower_bound_ok: false" in lines
    assert json.loads(certificate.read_text())["violations"] == [1]


def test_bench_signal_writes_table(tmp_path):
    out, detail = tmp_path / "table.csv", tmp_path / "trials.json"
    code = cli.main(
        ["bench-signal", "--n", "40", "--trials", "2", "--seed", "1", "--sigma", "1e-2",
         "--out", str(out), "--json", str(detail)]
    )
    assert code == 0
    with out.open() as stream:
        rows = list(csv.DictReader(stream))
    assert len(rows) == 1
    assert rows[0]["n"] == "40" and rows[0]["trials"] == "2"
    columns = {"mean_iterations", "mean_time", "mean_mse", "mean_last_step", "mean_support"}
    assert columns <= set(rows[0])
    assert len(json.loads(detail.read_text())[0]["results"]) == 2


def test_bench_group_prints_to_stdout(capsys):
    argv = ["bench-group", "--n", "30", "--s", "0", "--sigma", "0", "--x0", "0", "--trials", "1"]
    code = cli.main(argv)
    assert code == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0].startswith("label,model")
    assert ",group_l0," in out[1]


def _trial_errors(path):
    return [r["mse"] for r in json.loads(path.read_text())[0]["results"]]


def test_seed_environment_overrides_flag(tmp_path, monkeypatch):
    base = ["bench-signal", "--n", "40", "--trials", "2"]
    expected = tmp_path / "expected.json"
    argv = [*base, "--seed", "3", "--json", str(expected), "--out", str(tmp_path / "a.csv")]
    assert cli.main(argv) == 0
    monkeypatch.setattr(settings, "seed", 3)
    overridden = tmp_path / "overridden.json"
    argv = [*base, "--seed", "1", "--json", str(overridden), "--out", str(tmp_path / "b.csv")]
    assert cli.main(argv) == 0
    assert _trial_errors(expected) == _trial_errors(overridden)


@pytest.mark.parametrize(
    "argv",
    [
        ["solve", "--problem", "missing.json", "--out", "r.json"],
        ["solve"],
        ["bench-signal", "--n", "160", "--m", "400"],
        ["bench-signal", "--algorithm", "newton"],
        ["nonsense"],
    ],
)
def test_configuration_errors_exit_with_one(argv, capsys, tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    assert cli.main(argv) == 1
    assert "sgdc" in capsys.readouterr().err


def test_malformed_problem_names_the_field(tmp_path, capsys):
    problem = tmp_path / "bad.json"
    problem.write_text('{"loss": {"A": {"dense": [[1.0]]}, "b": [1.0]}, "lambda1": "lots"}')
    code = cli.main(["solve", "--problem", str(problem), "--out", str(tmp_path / "r.json")])
    assert code == 1
    assert "lambda1" in capsys.readouterr().err


def test_line_search_rejects_beta(tmp_path, toy_problem):
    code = cli.main(
        ["solve", "--problem", str(toy_problem), "--beta", "0.5", "--out", str(tmp_path / "r")]
    )
    assert code == 1


def test_unwritable_output_exits_with_one(tmp_path, toy_problem, capsys):
    out = tmp_path / "missing" / "report.json"
    code = cli.main(["solve", "--problem", str(toy_problem), "--out", str(out)])
    assert code == 1
    assert "configuration error" in capsys.readouterr().err
