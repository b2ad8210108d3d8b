"""Command-line surface: formats, determinism, golden files, exit codes."""

from __future__ import annotations

import json
from pathlib import Path

import pytest

from rgw.cli import run

REPO = Path(__file__).resolve().parent.parent
LAW = str(REPO / "demos" / "laws" / "uniform12.json")
GOLDEN = REPO / "tests" / "golden"


def invoke(args, tmp_path, name="out.txt"):
    out = tmp_path / name
    code = run([*args, "--out", str(out)])
    text = out.read_text() if out.exists() else ""
    return code, text


class TestGoldenFiles:
    def test_rate_curve(self, tmp_path):
        code, text = invoke(["rate", "--law", LAW, "--q", "1/3",
                             "--grid", "0.05"], tmp_path)
        assert code == 0
        assert text == (GOLDEN / "rate_flagship.csv").read_text()

    def test_classification_curve(self, tmp_path):
        code, text = invoke(["classify", "--law", LAW, "--q", "1/3",
                             "--grid", "0.1"], tmp_path)
        assert code == 0
        assert text == (GOLDEN / "classify_flagship.csv").read_text()

    def test_survival_grid(self, tmp_path):
        code, text = invoke(["survival", "--law", LAW, "--q-grid",
                             "1/5:4/5:1/5"], tmp_path)
        assert code == 0
        assert text == (GOLDEN / "survival_grid.csv").read_text()

    def test_simulation_with_histograms(self, tmp_path):
        code, text = invoke(["simulate", "--law", LAW, "--q", "1/3",
                             "--n-max", "6", "--replicas", "50", "--seed",
                             "9", "--histograms"], tmp_path)
        assert code == 0
        assert text == (GOLDEN / "simulate_small.csv").read_text()


class TestDeterminism:
    def test_identical_invocations_are_byte_identical(self, tmp_path):
        args = ["simulate", "--law", LAW, "--q", "0", "--n-max", "8",
                "--replicas", "2000", "--seed", "7"]
        _, first = invoke(args, tmp_path, "a.csv")
        _, second = invoke(args, tmp_path, "b.csv")
        assert first == second
        assert first.splitlines()[0] == ("replica,generation,population,"
                                         "survived,truncated,hist_key,"
                                         "hist_count")


class TestFormats:
    def test_rate_json_rows(self, tmp_path):
        code, text = invoke(["rate", "--law", LAW, "--q", "0", "--rho",
                             "1:0.2;2:0.8", "--format", "json"], tmp_path)
        assert code == 0
        rows = json.loads(text)
        assert rows[0]["rate_closed_form_available"] is True
        assert rows[0]["neg_log_q"] == "inf"
        assert rows[0]["lambda_star"] == pytest.approx(0.19274475702175753)

    def test_rho_accepts_inline_json(self, tmp_path):
        code, text = invoke(["rate", "--law", LAW, "--q", "1/3", "--rho",
                             '{"support": [1, 2], "probs": [0.2, 0.8]}'],
                            tmp_path)
        assert code == 0
        line = text.splitlines()[1]
        assert line.split(",")[2] == pytest.approx("0.084514115202220574")

    def test_verify_control_report(self, tmp_path):
        code, text = invoke(["verify", "control", "--rho", "1:0.2;2:0.8",
                             "--m", "8", "--restarts", "2", "--seed", "5",
                             "--threads", "1"], tmp_path)
        assert code == 0
        report = json.loads(text)
        assert set(report) == {"value", "gap_to_dual", "gap_to_upper_bound",
                               "best_path"}
        assert report["gap_to_dual"] >= -1e-6
        assert report["gap_to_upper_bound"] >= -1e-6
        path_lines = report["best_path"].splitlines()
        assert path_lines[0] == "step,eta_1,eta_2"
        assert len(path_lines) == 9

    def test_spine_columns(self, tmp_path):
        code, text = invoke(["spine", "--law", LAW, "--q", "1/3",
                             "--activities", "1:0.5;2:1.3333333333333333",
                             "--steps", "2000", "--seed", "3"], tmp_path)
        assert code == 0
        assert text.splitlines()[0] == ("atom,activity,stationary_frequency,"
                                        "observed_frequency")


class TestExitCodes:
    def test_help_is_success(self, capsys):
        assert run(["--help"]) == 0
        capsys.readouterr()

    def test_missing_subcommand_is_usage_error(self, capsys):
        assert run([]) == 1
        capsys.readouterr()

    def test_unknown_subcommand_is_usage_error(self, capsys):
        assert run(["frobnicate"]) == 1
        capsys.readouterr()

    def test_bad_memory_parameter(self, capsys):
        assert run(["rate", "--law", LAW, "--q", "1.5",
                    "--grid", "0.25"]) == 1
        capsys.readouterr()

    def test_missing_law_file(self, capsys):
        assert run(["rate", "--law", "/nonexistent/law.json", "--q", "1/3",
                    "--grid", "0.25"]) == 1
        capsys.readouterr()

    def test_off_support_target(self, capsys):
        assert run(["rate", "--law", LAW, "--q", "1/3", "--rho",
                    "1:0.5;3:0.5"]) == 1
        capsys.readouterr()

    def test_unnormalized_target(self, capsys):
        assert run(["classify", "--law", LAW, "--q", "1/3", "--rho",
                    "1:0.5;2:0.6"]) == 1
        capsys.readouterr()

    def test_statistical_failure(self, capsys):
        assert run(["gibbs", "--law", LAW, "--q", "1/3", "--n", "5", "--w",
                    "1:0;2:1", "--c", "1.01", "--replicas", "200"]) == 2
        capsys.readouterr()

    def test_quick_verification_passes(self, tmp_path, capsys):
        code, text = invoke(["verify", "--quick", "--seed", "42",
                             "--threads", "1"], tmp_path)
        capsys.readouterr()
        assert code == 0
        report = json.loads(text)
        assert report["all_passed"] is True
        assert {"name", "tolerance", "observed", "passed",
                "seconds"} <= set(report["checks"][0])
