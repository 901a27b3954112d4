import csv
import json

import numpy as np
import pytest

from tflr import kld, read_composition_csv
from tflr.cli import main
from tflr.io import write_matrix_csv


def run(*argv):
    return main([str(a) for a in argv])


@pytest.fixture
def sim_dir(tmp_path):
    out = tmp_path / "sim"
    assert run("simulate", "--n", 100, "--dp", 5, "--dr", 3,
               "--kind", "dependent", "--seed", 7, "--out-dir", out) == 0
    return out


class TestSimulate:
    def test_writes_expected_files(self, sim_dir):
        assert (sim_dir / "X.csv").exists()
        assert (sim_dir / "Y.csv").exists()
        assert (sim_dir / "B_true.csv").exists()
        meta = json.loads((sim_dir / "meta.json").read_text())
        assert meta["n"] == 100 and meta["seed"] == 7 and meta["kind"] == "dependent"

    def test_line_counts(self, sim_dir):
        assert len((sim_dir / "X.csv").read_text().strip().splitlines()) == 101
        assert len((sim_dir / "Y.csv").read_text().strip().splitlines()) == 101

    def test_b_true_rows_on_simplex(self, sim_dir):
        b = read_composition_csv(sim_dir / "B_true.csv")
        assert np.abs(b.values.sum(axis=1) - 1.0).max() <= 1e-9

    def test_byte_identical_rerun(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        for out in (a, b):
            assert run("simulate", "--n", 50, "--dp", 3, "--dr", 3,
                       "--kind", "independent", "--seed", 11, "--out-dir", out) == 0
        for name in ("X.csv", "Y.csv", "meta.json"):
            assert (a / name).read_bytes() == (b / name).read_bytes()

    def test_independent_has_no_b_true(self, tmp_path):
        out = tmp_path / "ind"
        assert run("simulate", "--n", 20, "--dp", 3, "--dr", 3,
                   "--kind", "independent", "--seed", 1, "--out-dir", out) == 0
        assert not (out / "B_true.csv").exists()

    def test_invalid_spec_exits_2(self, tmp_path):
        assert run("simulate", "--n", 0, "--dp", 3, "--dr", 3,
                   "--seed", 1, "--out-dir", tmp_path / "x") == 2


class TestFit:
    def test_round_trip_with_both_methods(self, sim_dir, tmp_path):
        for method in ("em", "cirls"):
            out = tmp_path / f"{method}.json"
            code = run("fit", "--x", sim_dir / "X.csv", "--y", sim_dir / "Y.csv",
                       "--method", method, "--out", out)
            assert code == 0
            payload = json.loads(out.read_text())
            B = np.array(payload["B"])
            assert B.min() >= -1e-9
            assert np.abs(B.sum(axis=1) - 1.0).max() <= 1e-9
            assert payload["converged"] is True
            assert payload["method"] == method

    def test_json_precision_allows_kld_recompute(self, sim_dir, tmp_path):
        out = tmp_path / "fit.json"
        assert run("fit", "--x", sim_dir / "X.csv", "--y", sim_dir / "Y.csv",
                   "--method", "cirls", "--out", out) == 0
        payload = json.loads(out.read_text())
        X = read_composition_csv(sim_dir / "X.csv")
        Y = read_composition_csv(sim_dir / "Y.csv")
        recomputed = kld(Y.values, X.values @ np.array(payload["B"]), 1e-8)
        assert abs(recomputed - payload["kld"]) <= 1e-12

    def test_cls_on_identity_design(self, tmp_path):
        write_matrix_csv(tmp_path / "X.csv", np.eye(3), ("x1", "x2", "x3"))
        y = np.array([[0.2, 0.8], [0.7, 0.3], [0.5, 0.5]])
        write_matrix_csv(tmp_path / "Y.csv", y, ("y1", "y2"))
        out = tmp_path / "cls.json"
        assert run("fit", "--x", tmp_path / "X.csv", "--y", tmp_path / "Y.csv",
                   "--method", "cls", "--out", out) == 0
        payload = json.loads(out.read_text())
        assert np.abs(np.array(payload["B"]) - y).max() <= 1e-8

    def test_malformed_row_exits_2(self, tmp_path, capsys):
        write_matrix_csv(tmp_path / "X.csv", np.array([[0.5, 0.5], [0.2, 0.8]]), ("x1", "x2"))
        (tmp_path / "Y.csv").write_text("y1,y2\n0.5,0.5\n0.5,0.6\n")
        code = run("fit", "--x", tmp_path / "X.csv", "--y", tmp_path / "Y.csv",
                   "--method", "em", "--out", tmp_path / "r.json")
        assert code == 2
        err = capsys.readouterr().err
        assert "RowSumViolation" in err and "row 2" in err

    def test_non_convergence_exits_3_but_writes(self, sim_dir, tmp_path):
        out = tmp_path / "short.json"
        code = run("fit", "--x", sim_dir / "X.csv", "--y", sim_dir / "Y.csv",
                   "--method", "em", "--eps", 1e-14, "--max-iter", 2, "--out", out)
        assert code == 3
        payload = json.loads(out.read_text())
        assert payload["converged"] is False
        assert payload["iterations"] == 2

    def test_new_x_writes_fitted(self, sim_dir, tmp_path):
        out = tmp_path / "fit.json"
        code = run("fit", "--x", sim_dir / "X.csv", "--y", sim_dir / "Y.csv",
                   "--method", "cirls", "--out", out,
                   "--new-x", sim_dir / "X.csv")
        assert code == 0
        fitted_path = tmp_path / "fit_fitted.csv"
        assert fitted_path.exists()
        with open(fitted_path) as fh:
            rows = list(csv.reader(fh))
        assert len(rows) == 101  # header + 100 predictions
        sums = [sum(map(float, r)) for r in rows[1:]]
        assert max(abs(s - 1.0) for s in sums) <= 1e-9

    def test_row_count_mismatch_exits_2(self, sim_dir, tmp_path):
        write_matrix_csv(tmp_path / "Yshort.csv", np.array([[0.5, 0.5]]), ("y1", "y2"))
        assert run("fit", "--x", sim_dir / "X.csv", "--y", tmp_path / "Yshort.csv",
                   "--method", "em", "--out", tmp_path / "r.json") == 2


class TestBench:
    def test_end_to_end(self, tmp_path):
        out = tmp_path / "bench"
        code = run("bench", "--sizes", "50,100", "--replicates", 2,
                   "--dp", 3, "--dr", 3, "--kind", "independent",
                   "--seed", 5, "--out-dir", out)
        assert code == 0
        with open(out / "records.csv") as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == 8
        summary = json.loads((out / "summary.json").read_text())
        assert "speedup_per_size" in summary
        assert "skipped" in summary["scaling_em"]  # only two sizes
        assert (out / "speedup_vs_n.csv").exists()
        assert (out / "speedup_vs_n.png").exists()
        assert (out / "time_vs_n.png").exists()

    def test_no_figures_flag(self, tmp_path):
        out = tmp_path / "bench2"
        assert run("bench", "--sizes", "50", "--replicates", 1,
                   "--dp", 3, "--dr", 3, "--kind", "independent",
                   "--seed", 5, "--out-dir", out, "--no-figures") == 0
        assert not (out / "speedup_vs_n.png").exists()
        assert (out / "records.csv").exists()

    def test_scaling_reported_with_three_sizes(self, tmp_path):
        out = tmp_path / "bench3"
        assert run("bench", "--sizes", "50,100,200", "--replicates", 1,
                   "--dp", 3, "--dr", 3, "--kind", "independent",
                   "--seed", 6, "--out-dir", out, "--no-figures") == 0
        summary = json.loads((out / "summary.json").read_text())
        assert "beta" in summary["scaling_em"]
        assert "beta" in summary["scaling_cirls"]

    def test_invalid_grid_exits_2(self, tmp_path):
        assert run("bench", "--sizes", "100,50", "--dp", 3, "--dr", 3,
                   "--seed", 5, "--out-dir", tmp_path / "x") == 2
