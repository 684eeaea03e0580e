import json
import subprocess
import sys

import numpy as np
import pytest

from mctm_coreset.cli import main


@pytest.fixture
def csv_file(tmp_path):
    path = tmp_path / "data.csv"
    assert main(["simulate", "--dgp", "1", "--n", "400", "--seed", "3", "--out", str(path)]) == 0
    return path


def test_simulate_writes_data_and_echo(csv_file):
    arr = np.loadtxt(csv_file, delimiter=",", skiprows=1)
    assert arr.shape == (400, 2)
    echo = json.loads((csv_file.parent / "data.csv.config.json").read_text())
    assert echo["seed"] == 3 and echo["subcommand"] == "simulate" and echo["n"] == 400


def test_coreset_then_fit_pipeline(csv_file, tmp_path):
    cs = tmp_path / "cs.csv"
    assert main(["coreset", "--input", str(csv_file), "--columns", "0-1", "--method", "l2-hull",
                 "--k", "40", "--out", str(cs)]) == 0
    arr = np.loadtxt(cs, delimiter=",", skiprows=1, ndmin=2)
    assert arr.shape[1] == 2 and len(arr) <= 40
    assert json.loads((tmp_path / "cs.csv.meta.json").read_text())["method"] == "l2-hull"
    params = tmp_path / "p.json"
    assert main(["fit", "--input", str(csv_file), "--coreset", str(cs), "--out", str(params)]) == 0
    doc = json.loads(params.read_text())
    assert np.asarray(doc["theta"]).shape == (2, 7) and len(doc["lambda"]) == 1


def test_scores_and_expand(csv_file, tmp_path):
    out = tmp_path / "s.csv"
    assert main(["scores", "--input", str(csv_file), "--out", str(out)]) == 0
    assert out.read_text().startswith("index,u,s,p\n")
    npz = tmp_path / "e.npz"
    assert main(["expand", "--input", str(csv_file), "--degree", "3", "--out", str(npz)]) == 0
    assert np.load(npz)["Aprime"].shape == (400, 2, 4)


def test_bench_and_real_are_byte_identical(csv_file, tmp_path):
    args = ["--k", "20", "--methods", "uniform,l2-hull", "--reps", "2", "--seed", "7", "--no-timings",
            "--max-iters", "100"]
    for name in ("a", "b"):
        assert main(["bench", "--dgps", "1,9", "--n", "300", "--out", str(tmp_path / name)] + args) == 0
    a = (tmp_path / "a" / "bench_rows.csv").read_bytes()
    assert a == (tmp_path / "b" / "bench_rows.csv").read_bytes()
    assert (tmp_path / "a" / "bench_aggregates.json").exists()
    assert main(["real", "--input", str(csv_file), "--out", str(tmp_path / "r")] + args) == 0
    assert (tmp_path / "r" / "real_rows.csv").read_text().count("\n") == 1 + 2 * 2


@pytest.mark.parametrize("argv", [
    ["simulate", "--dgp", "1", "--bogus"],
    ["simulate", "--dgp", "99"],
    ["coreset", "--input", "x.csv", "--k", "5", "--method", "nope"],
    ["bench", "--k", "a,b"],
    ["bench", "--epsilon", "2"],
    ["simulate", "--dgp", "1", "--out", "/nonexistent/dir/x.csv"],
    ["fit", "--input", "/nonexistent.csv"],
    [],
])
def test_config_errors_exit_1(argv, tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    assert main(argv) == 1


def test_bad_data_exits_1_and_runtime_failure_exits_2(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    bad = tmp_path / "bad.csv"
    bad.write_text("a,b\n1,x\n")
    assert main(["fit", "--input", str(bad)]) == 1
    const = tmp_path / "const.csv"
    const.write_text("a,b\n1,1\n1,2\n1,3\n")
    assert main(["fit", "--input", str(const)]) == 2


def test_module_entry_point_logs_to_stderr(tmp_path):
    out = tmp_path / "d.csv"
    proc = subprocess.run([sys.executable, "-m", "mctm_coreset.cli", "simulate", "--dgp", "circular",
                           "--n", "10", "--out", str(out)], capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout == ""
    assert json.loads(proc.stderr.splitlines()[-1])["level"] == "INFO"
