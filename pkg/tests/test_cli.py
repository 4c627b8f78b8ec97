"""Unit tests for the command-line interface."""

import json
import math

import numpy as np
import pytest

from tensortree import from_newick, robinson_foulds, write_model
from tensortree.bench import diagnostics, random_tree_model
from tensortree.cli import main
from tensortree.model import sample


def read_rows(path):
    lines = path.read_text().strip().splitlines()
    return lines[0], [line.split(",") for line in lines[1:]]


class TestQuartetBench:
    def test_row_count_and_schema(self, tmp_path):
        out = tmp_path / "q.csv"
        code = main(["quartet-bench", "--kh", "2", "--kg", "4", "--n", "10",
                     "--mu", "0.5", "--samples", "50,2000", "--trials", "10",
                     "--methods", "tensor,oracle", "--seed", "7",
                     "--out", str(out)])
        assert code == 0
        header, rows = read_rows(out)
        assert header == "method,m,trial,outcome,elapsed_ms"
        assert len(rows) == 40  # 2 methods x 2 sample sizes x 10 trials
        manifest = json.loads((tmp_path / "q.csv.manifest.json").read_text())
        assert manifest["subcommand"] == "quartet-bench"
        assert manifest["seed"] == 7

    def test_rerun_identical_outcomes(self, tmp_path):
        args = ["quartet-bench", "--kh", "2", "--kg", "2", "--n", "4",
                "--mu", "0.8", "--samples", "100", "--trials", "5",
                "--methods", "tensor", "--seed", "3"]
        out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
        assert main(args + ["--out", str(out1)]) == 0
        assert main(args + ["--out", str(out2)]) == 0
        strip = lambda p: [r[:4] for r in read_rows(p)[1]]
        assert strip(out1) == strip(out2)

    def test_spectral_k_exceeding_n_is_usage_error(self, tmp_path):
        code = main(["quartet-bench", "--kh", "2", "--kg", "2", "--n", "2",
                     "--mu", "0.5", "--samples", "50", "--trials", "1",
                     "--methods", "spectral@3", "--seed", "0",
                     "--out", str(tmp_path / "q.csv")])
        assert code == 2

    def test_env_seed_default(self, tmp_path, monkeypatch):
        monkeypatch.setenv("TENSORTREE_SEED", "99")
        out = tmp_path / "q.csv"
        main(["quartet-bench", "--kh", "2", "--kg", "2", "--n", "4",
              "--mu", "0.5", "--samples", "50", "--trials", "1",
              "--methods", "oracle", "--out", str(out)])
        manifest = json.loads((tmp_path / "q.csv.manifest.json").read_text())
        assert manifest["seed"] == 99


class TestTreeBench:
    def test_row_count_and_oracle(self, tmp_path):
        out = tmp_path / "t.csv"
        code = main(["tree-bench", "--d", "6", "--beta", "0.5", "--mu", "0.5",
                     "--samples", "200", "--trials", "2",
                     "--methods", "nj,oracle", "--seed", "1",
                     "--out", str(out)])
        assert code == 0
        _, rows = read_rows(out)
        assert len(rows) == 4
        oracle_rf = [float(r[3]) for r in rows if r[0] == "oracle"]
        assert oracle_rf == [0.0, 0.0]

    def test_bad_k_range(self, tmp_path):
        code = main(["tree-bench", "--d", "6", "--beta", "0.5", "--mu", "0.5",
                     "--k-range", "2", "--samples", "50", "--trials", "1",
                     "--methods", "nj", "--out", str(tmp_path / "t.csv")])
        assert code == 2


@pytest.fixture(scope="module")
def fixture_data(tmp_path_factory):
    base = tmp_path_factory.mktemp("build")
    tree = random_tree_model(8, 0.5, 6, 3, 0.5, [21, 0], hidden_base="identity")
    csv = base / "samples.csv"
    sample(tree, 20000, [22, 0]).to_csv(csv)
    return tree, csv


class TestBuild:
    def test_tensor_build_recovers(self, fixture_data, tmp_path):
        tree, csv = fixture_data
        out = tmp_path / "tree.nwk"
        assert main(["build", "--input", str(csv), "--method", "tensor",
                     "--seed", "3", "--out", str(out)]) == 0
        built = from_newick(out.read_text())
        assert robinson_foulds(built, tree) == 0

    def test_nj_build_valid_newick(self, fixture_data, tmp_path):
        _, csv = fixture_data
        out = tmp_path / "tree.nwk"
        assert main(["build", "--input", str(csv), "--method", "nj",
                     "--out", str(out)]) == 0
        assert from_newick(out.read_text()).d == 8

    def test_too_few_variables(self, tmp_path):
        csv = tmp_path / "s.csv"
        csv.write_text("a,b,c\n1,1,1\n2,2,2\n")
        assert main(["build", "--input", str(csv),
                     "--out", str(tmp_path / "t.nwk")]) == 3

    def test_malformed_csv(self, tmp_path):
        csv = tmp_path / "s.csv"
        csv.write_text("a,b,c,d\n1,1,x,1\n")
        assert main(["build", "--input", str(csv),
                     "--out", str(tmp_path / "t.nwk")]) == 3

    def test_missing_file(self, tmp_path):
        assert main(["build", "--input", str(tmp_path / "nope.csv"),
                     "--out", str(tmp_path / "t.nwk")]) == 3

    def test_oracle_not_allowed(self, tmp_path):
        csv = tmp_path / "s.csv"
        csv.write_text("a,b,c,d\n1,1,1,1\n")
        assert main(["build", "--input", str(csv), "--method", "oracle",
                     "--out", str(tmp_path / "t.nwk")]) == 2


class TestDiagnose:
    def test_report_matches_library(self, tmp_path, capsys):
        tree = random_tree_model(5, 0.5, 4, 2, 0.6, 2, hidden_base="identity")
        model = tmp_path / "model.txt"
        write_model(tree, model)
        out = tmp_path / "diag.csv"
        assert main(["diagnose", "--model", str(model),
                     "--samples", "1000", "--out", str(out)]) == 0
        captured = capsys.readouterr().out
        d = diagnostics(tree)
        assert f"{d.alpha_min:.12g}" in captured
        # The reported bound equals the closed form recomputed by hand.
        expected = 1 - 8 * math.exp(-1000 * d.alpha_min ** 2 / 32)
        rows = dict(line.split(",") for line in
                    out.read_text().strip().splitlines()[1:])
        assert float(rows["quartet_success_bound_m1000"]) == pytest.approx(
            expected, abs=1e-9)

    def test_independent_edge_reports_zero_delta(self, tmp_path, capsys):
        tree = random_tree_model(4, 0.5, 3, 2, 0.0, 3)
        model = tmp_path / "model.txt"
        write_model(tree, model)
        assert main(["diagnose", "--model", str(model),
                     "--out", str(tmp_path / "d.csv")]) == 0
        assert "delta                0" in capsys.readouterr().out

    def test_unparameterized_model_is_data_error(self, tmp_path):
        model = tmp_path / "model.txt"
        model.write_text(
            "leaf 0 a\nleaf 1 b\nleaf 2 c\nleaf 3 d\nhidden 4\nhidden 5\n"
            "edge 4 0\nedge 4 1\nedge 4 5\nedge 5 2\nedge 5 3\n")
        assert main(["diagnose", "--model", str(model),
                     "--out", str(tmp_path / "d.csv")]) == 3

    def test_missing_model_file(self, tmp_path):
        assert main(["diagnose", "--model", str(tmp_path / "nope.txt"),
                     "--out", str(tmp_path / "d.csv")]) == 3
