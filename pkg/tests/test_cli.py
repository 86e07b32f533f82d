import json

import pytest

from kacim.cli import main

FAST = ["--iterations", "20", "--batch-size", "64"]


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_estimate_generated(tmp_path, capsys):
    code, out, _ = run(capsys, "estimate", "--gen", "additive", "--n", "128", "--dx", "3", "--dy", "3",
                       "--seed", "1", "--trace", str(tmp_path / "trace.csv"), "--out", str(tmp_path), *FAST)
    assert code == 0
    header = json.loads(out.splitlines()[0])
    assert header["config"]["estimator"]["seed"] == 1
    assert (tmp_path / "estimate.csv").exists() and (tmp_path / "estimate.json").exists()
    assert len((tmp_path / "trace.csv").read_text().splitlines()) == 21


def test_estimate_from_csv_and_mismatch(tmp_path, capsys):
    (tmp_path / "a.csv").write_text("a,b\n" + "".join(f"{i},{i * i % 7}\n" for i in range(80)))
    (tmp_path / "b.csv").write_text("c\n" + "".join(f"{(i * 3) % 5}\n" for i in range(80)))
    (tmp_path / "c.csv").write_text("c\n1\n2\n")
    code, out, _ = run(capsys, "estimate", "--x", str(tmp_path / "a.csv"), "--y", str(tmp_path / "b.csv"), *FAST)
    assert code == 0 and "kappa_hat" in out
    code, _, err = run(capsys, "estimate", "--x", str(tmp_path / "a.csv"), "--y", str(tmp_path / "c.csv"))
    assert code == 2 and "shape error" in err


@pytest.mark.parametrize("argv", [
    ["estimate"],
    ["estimate", "--x", "/nonexistent.csv", "--y", "/nonexistent.csv"],
    ["estimate", "--gen", "additive", "--n", "50", "--batch-size", "100"],
    ["estimate", "--gen", "gaussian", "--r", "1.5"],
    ["fx", "--gen", "--runs", "3"],
])
def test_input_errors_exit_2(argv, capsys):
    assert run(capsys, *argv)[0] == 2


def test_numerical_failure_exits_1(monkeypatch, capsys):
    from kacim import cli
    from kacim.estimator import EstimationError

    def boom(*a, **k):
        raise EstimationError("non-finite gradient", 3)

    monkeypatch.setattr(cli, "run_estimate", boom)
    code, _, err = run(capsys, "estimate", "--gen", "independent", "--n", "64", *FAST)
    assert code == 1 and "numerical" in err


def test_seed_from_environment(monkeypatch, capsys):
    monkeypatch.setenv("KACIM_SEED", "17")
    code, out, _ = run(capsys, "estimate", "--gen", "independent", "--n", "64", *FAST)
    assert code == 0 and json.loads(out.splitlines()[0])["config"]["estimator"]["seed"] == 17


def test_null_calibration_under_independence(capsys):
    code, out, _ = run(capsys, "estimate", "--gen", "independent", "--n", "256", "--dx", "2", "--dy", "2",
                       "--null", "20", "--iterations", "30", "--batch-size", "128")
    row = out.splitlines()[2].split(",")
    assert code == 0 and float(row[4]) >= 0.05


def test_generate_round_trip(tmp_path, capsys):
    assert run(capsys, "generate", "--gen", "additive", "--n", "30", "--dx", "2", "--dy", "2",
               "--out", str(tmp_path))[0] == 0
    assert len((tmp_path / "x.csv").read_text().splitlines()) == 31
    assert run(capsys, "generate", "--gen", "classification", "--n", "60", "--dx", "12",
               "--out", str(tmp_path))[0] == 0
    code, out, _ = run(capsys, "fx", "--data", str(tmp_path / "classification.csv"), "--label-column", "label",
                       "--runs", "5", "--iterations", "10", "--grid", "10", "--batch-size", "20")
    assert code == 0 and "ranking_score" in out
