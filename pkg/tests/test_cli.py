from __future__ import annotations

import json
import subprocess
import sys

import pytest

from rankattach.cli import main


def read_csv(path):
    lines = path.read_text().split("\n")
    assert lines[-1] == ""
    return lines[0], lines[1], [row.split(",") for row in lines[2:-1]]


def test_generate_files(tmp_path):
    out = tmp_path / "run"
    argv = ["generate", "--scheme", "age", "--n", "100000", "--d", "1", "--alpha", "0.5", "--seed", "1", "--output", str(out)]
    assert main(argv + ["--theory-tail"]) == 0
    header, columns, rows = read_csv(out / "degrees.csv")
    assert header.startswith("# rankattach generate schema=1 ") and "n=100000" in header and "seed=1" in header
    assert columns == "k,count,tail_count,theory_tail"
    assert sum(int(r[1]) for r in rows) == 100000
    assert "\r" not in (out / "degrees.csv").read_text()
    summary = json.loads((out / "summary.json").read_text())
    assert summary["schema"] == 1 and summary["sum_degrees"] == 200000 and summary["seed"] == 1
    assert set(summary) == {"schema", "params", "seed", "sum_degrees", "max_degree", "fitted_exponent"}


def test_generate_is_byte_identical(tmp_path):
    argv = ["generate", "--scheme", "degree", "--n", "5000", "--d", "2", "--seed", "3", "--format", "all", "--track", "10,20"]
    main(argv + ["--output", str(tmp_path / "a")])
    main(argv + ["--output", str(tmp_path / "b")])
    names = sorted(p.name for p in (tmp_path / "a").iterdir())
    assert names == sorted(p.name for p in (tmp_path / "b").iterdir())
    assert "result.npz" in names and "trajectory_20.csv" in names
    for name in names:
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_trajectory_checkpoints(tmp_path):
    main(["generate", "--scheme", "random:2.0", "--n", "20000", "--track", "1000", "--output", str(tmp_path)])
    _, columns, rows = read_csv(tmp_path / "trajectory_1000.csv")
    assert columns == "t,rank,degree"
    times = [int(r[0]) for r in rows]
    assert times[0] == 1000 and times[-1] == 20000
    assert all(b / a <= 1.1 + 1e-3 for a, b in zip(times, times[1:]))


def test_output_dir_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv("RANKATTACH_OUTPUT_DIR", str(tmp_path))
    assert main(["generate", "--n", "100", "--runs", "2"]) == 0
    assert (tmp_path / "run_0" / "degrees.csv").exists() and (tmp_path / "run_1" / "summary.json").exists()


def test_theory_tables(tmp_path, capsys):
    assert main(["theory", "--ck", "--alpha", "0.5", "--kmax", "100"]) == 0
    lines = capsys.readouterr().out.split("\n")
    assert lines[0].startswith("# rankattach theory schema=1")
    assert lines[1] == "k,C_k" and lines[2] == "0,1.0" and len(lines) == 104
    out = tmp_path / "tail.csv"
    assert main(["theory", "--tail", "age", "--alpha", "0.5", "--d", "1", "--n", "1e6", "--kmin", "5", "--kmax", "20", "--output", str(out)]) == 0
    rows = {int(r[0]): float(r[1]) for r in read_csv(out)[2]}
    assert rows[10] == pytest.approx(10000)
    for flag in (["--fractions"], ["--ode", "--kmax", "3"], ["--expected", "age", "--n", "1000"], ["--expected", "inverse-age", "--n", "1000"]):
        assert main(["theory", *flag]) == 0


def test_usage_errors(capsys):
    assert main(["theory", "--ck", "--alpha", "1.5"]) == 2
    assert "(0, 1)" in capsys.readouterr().err
    assert main(["generate", "--n", "10", "--scheme", "random"]) == 2
    assert main(["generate", "--n", "0"]) == 2
    assert main(["generate", "--n", "10", "--track", "11"]) == 2
    assert main(["frobnicate"]) == 2
    assert main(["theory", "--expected", "age", "--n", "10", "--i", "20"]) == 2
    assert main(["verify", "--only", "nonsense"]) == 2


def test_unwritable_output(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert main(["generate", "--n", "10", "--output", str(blocker / "sub")]) == 1


def test_analyze(tmp_path, capsys):
    main(["generate", "--scheme", "label", "--n", "50000", "--format", "npz", "--output", str(tmp_path)])
    assert main(["analyze", str(tmp_path / "result.npz")]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["schema"] == 1 and report["n"] == 50000
    assert report["comparison"]["rows"][0]["quantity"] == "tail_count"
    assert main(["analyze", str(tmp_path / "missing.json")]) == 2


def test_verify_subset_and_zero_tolerance(tmp_path):
    ok = tmp_path / "ok.json"
    assert main(["verify", "--only", "ck,sampler", "--output", str(ok)]) == 0
    report = json.loads(ok.read_text())
    assert report["passed"] and [c["criterion"] for c in report["criteria"]] == [1, 2, 10]
    strict = tmp_path / "strict.json"
    assert main(["verify", "--only", "1", "--tolerance", "0", "--output", str(strict)]) == 1
    assert not json.loads(strict.read_text())["passed"]


def test_sweep(tmp_path):
    out = tmp_path / "sweep.csv"
    assert main(["sweep", "--n", "3000", "--schemes", "age,degree", "--output", str(out)]) == 0
    header, columns, rows = read_csv(out)
    assert "alphas=0.3,0.5,0.7,0.9" in header
    assert columns.startswith("alpha,scheme,")
    assert [(r[0], r[1]) for r in rows] == [(a, s) for a in ("0.3", "0.5", "0.7", "0.9") for s in ("age", "degree")]
    assert all(int(r[6]) == 6000 for r in rows)


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "rankattach", "theory", "--ck", "--kmax", "2"], capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.split("\n")[2] == "0,1.0"
