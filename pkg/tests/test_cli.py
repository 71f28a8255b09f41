import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from bootsgd.cli import CURVE_COLUMNS, PRESETS, RunConfig, main
from bootsgd.datagen import generate_dataset, read_dataset_csv

SMALL_FIT = ["fit", "--preset", "quick", "--n", "60", "--B", "11", "--passes", "5",
             "--grid", "0:33:50", "--seed", "4"]


def _rows(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_presets():
    paper = PRESETS["paper"]
    assert (paper.n, paper.B, paper.passes, paper.eta_c) == (1000, 101, 400, 10.0)
    assert paper.sigma == pytest.approx(1 / np.sqrt(20))
    assert paper.grid == (0.0, 33.0, 512)
    assert RunConfig() == paper
    quick = PRESETS["quick"]
    assert (quick.n, quick.B, quick.passes, quick.grid[2]) == (200, 31, 50, 256)


def test_run_config_validation():
    with pytest.raises(ValueError):
        RunConfig(grid=(0.0, 1.0, 1))
    with pytest.raises(ValueError):
        RunConfig(r=3)
    with pytest.raises(ValueError):
        RunConfig(B=10, r=4, s=11)


def test_tables_rows_and_determinism(tmp_path):
    assert main(["tables", "--out", str(tmp_path / "a")]) == 0
    assert main(["tables", "--out", str(tmp_path / "b")]) == 0
    t1 = _rows(tmp_path / "a" / "table1.csv")
    t2 = _rows(tmp_path / "a" / "table2.csv")
    assert len(t1) == 19 and len(t2) == 37
    for name in ("table1.csv", "table2.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_fit_outputs(tmp_path):
    assert main(SMALL_FIT + ["--out", str(tmp_path), "--robust-agg"]) == 0
    rows = _rows(tmp_path / "curves.csv")
    assert rows[0] == CURVE_COLUMNS + ["h_wrobust"]
    data = np.array(rows[1:], dtype=float)
    assert data.shape == (50, 9)
    cols = {c: data[:, k] for k, c in enumerate(rows[0])}
    assert np.max(np.abs(cols["h_type1"] - cols["h_type2"])) <= 1e-9
    assert np.all(cols["ci_lo"] <= cols["h_type3"]) and np.all(cols["h_type3"] <= cols["ci_hi"])
    run = json.loads((tmp_path / "run.json").read_text())
    assert run["config"]["B"] == 11 and run["config"]["n"] == 60
    # (3, 9) only reaches 1914/2048 < 0.95 at B = 11
    assert (run["config"]["r"], run["config"]["s"]) == (2, 10)
    assert set(run["timing_seconds"]) == {"train", "total"}
    assert b"\r" not in (tmp_path / "curves.csv").read_bytes()


def test_fit_rerun_byte_identical(tmp_path):
    for d in ("a", "b"):
        assert main(SMALL_FIT + ["--out", str(tmp_path / d)]) == 0
    assert (tmp_path / "a" / "curves.csv").read_bytes() == (tmp_path / "b" / "curves.csv").read_bytes()
    runs = [json.loads((tmp_path / d / "run.json").read_text()) for d in ("a", "b")]
    for r in runs:
        r.pop("timing_seconds")
    assert runs[0] == runs[1]


def test_fit_explicit_pair_and_data_file(tmp_path):
    generate_dataset(40, seed=1).to_csv(tmp_path / "d.csv")
    args = ["fit", "--preset", "quick", "--data", str(tmp_path / "d.csv"), "--B", "9",
            "--passes", "3", "--r", "2", "--s", "8", "--grid", "0:33:20", "--loss", "rlogis",
            "--out", str(tmp_path / "o")]
    assert main(args) == 0
    run = json.loads((tmp_path / "o" / "run.json").read_text())
    assert run["config"]["n"] == 40 and run["config"]["loss"] == "rlogis"
    assert (run["config"]["r"], run["config"]["s"]) == (2, 8)


def test_datagen_round_trip(tmp_path):
    assert main(["datagen", "--n", "1000", "--seed", "5", "--out", str(tmp_path / "d.csv")]) == 0
    assert main(["datagen", "--n", "1000", "--seed", "6", "--out", str(tmp_path / "e.csv")]) == 0
    lines = (tmp_path / "d.csv").read_text().splitlines()
    assert len(lines) == 1001 and lines[0] == "x,y"
    assert read_dataset_csv(tmp_path / "d.csv", x_range=(0.0, 33.0)) == generate_dataset(1000, seed=5)
    assert (tmp_path / "d.csv").read_bytes() != (tmp_path / "e.csv").read_bytes()


def test_stability_identical_smoke(tmp_path):
    args = ["stability", "--n", "30", "--trials", "5", "--B-sweep", "1,4", "--identical",
            "--out", str(tmp_path)]
    assert main(args) == 0
    rep = json.loads((tmp_path / "stability.json").read_text())
    assert rep["l1_empirical"] == rep["l2_empirical"] == rep["sup_gap_type2"] == 0.0
    rows = _rows(tmp_path / "stability_sweep.csv")
    assert [r[0] for r in rows[1:]] == ["1", "4"]
    head = rows[0]
    assert all(float(r[head.index("l2_empirical")]) == 0.0 for r in rows[1:])


def test_stability_outputs(tmp_path):
    args = ["stability", "--n", "40", "--trials", "20", "--B-sweep", "1,8", "--pairs", "3",
            "--seed", "2", "--out", str(tmp_path)]
    assert main(args) == 0
    rep = json.loads((tmp_path / "stability.json").read_text())
    assert 0 < rep["l1_empirical"] <= rep["l1_bound"]
    assert rep["l2_empirical"] <= rep["l2_bound"]
    rows = list(csv.DictReader(open(tmp_path / "stability_sweep.csv")))
    for r in rows:
        assert float(r["l2_empirical"]) <= float(r["l2_bound"])
    first = (tmp_path / "stability_sweep.csv").read_bytes()
    assert main(args) == 0
    assert (tmp_path / "stability_sweep.csv").read_bytes() == first


def test_stability_rbf_runs(tmp_path):
    args = ["stability", "--model", "rbf", "--n", "30", "--trials", "3", "--B-sweep", "2",
            "--out", str(tmp_path)]
    assert main(args) == 0
    assert json.loads((tmp_path / "stability.json").read_text())["config"]["model"]["family"] == "rbf"


def test_errors_exit_nonzero(tmp_path, capsys):
    assert main(["fit", "--data", str(tmp_path / "missing.csv"), "--out", str(tmp_path)]) == 1
    err = capsys.readouterr().err.strip().splitlines()
    assert len(err) == 1 and err[0].startswith("bootsgd: error:")
    assert main(["fit", "--preset", "quick", "--B", "2", "--alpha", "0.001", "--out", str(tmp_path)]) == 1


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "bootsgd", "fit", "--grid", "bad"],
                          capture_output=True, text=True)
    assert proc.returncode != 0 and "grid" in proc.stderr
    proc = subprocess.run([sys.executable, "-m", "bootsgd", "tables", "--kind", "ci",
                           "--out", str(tmp_path)], capture_output=True, text=True)
    assert proc.returncode == 0 and (tmp_path / "table1.csv").exists()
