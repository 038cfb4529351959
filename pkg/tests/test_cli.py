"""End-to-end CLI coverage over the documented subcommands and flags."""

import json

import pytest

from pnu.cli import main


class TestAdviseCommand:
    def test_prints_json(self, capsys):
        code = main(["advise", "--pi", "0.5", "--n-pos", "45", "--n-neg", "5",
                     "--n-unl", "100"])
        assert code == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["verdict"] == "pu-promising"
        assert doc["alpha_pu_pn"] == pytest.approx(0.7805469288332914, abs=1e-12)

    def test_unbounded_unlabeled(self, capsys):
        code = main(["advise", "--pi", "0.5", "--n-pos", "45", "--n-neg", "5",
                     "--n-unl", "inf"])
        assert code == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["n_unl"] is None

    def test_writes_file(self, tmp_path):
        out = tmp_path / "advice.json"
        code = main(["advise", "--pi", "0.5", "--n-pos", "5", "--n-neg", "45",
                     "--n-unl", "100", "--out", str(out)])
        assert code == 0
        assert json.loads(out.read_text(encoding="utf-8"))["verdict"] == "nu-promising"

    def test_contract_violation_exits_nonzero(self, capsys):
        code = main(["advise", "--pi", "1.5", "--n-pos", "5", "--n-neg", "5",
                     "--n-unl", "10"])
        assert code == 2
        assert "error" in capsys.readouterr().err


class TestSweepCommands:
    def test_sweep_nu_to_csv(self, tmp_path):
        out = tmp_path / "sweep.csv"
        code = main([
            "sweep-nu", "--n-unl", "5,15", "--pi", "0.5", "--n-pos", "8", "--n-neg", "8",
            "--trials", "1", "--test-size", "500", "--seed", "3",
            "--out", str(out), "--format", "csv",
        ])
        assert code == 0
        lines = out.read_text(encoding="utf-8").strip().splitlines()
        assert lines[0].startswith("sweep_value,mode")
        assert len(lines) == 1 + 2 * 3

    def test_sweep_pi_stdout(self, capsys):
        code = main([
            "sweep-pi", "--pi", "0.3,0.7", "--n-unl", "10", "--n-pos", "6", "--n-neg", "6",
            "--trials", "1", "--test-size", "500", "--seed", "4",
        ])
        assert code == 0
        out_lines = capsys.readouterr().out.strip().splitlines()
        assert out_lines[0].startswith("sweep_value,mode")
        assert len(out_lines) == 1 + 2 * 3

    def test_train_config_file(self, tmp_path, capsys):
        cfg = tmp_path / "train.json"
        cfg.write_text(json.dumps({"lambda": 0.01, "inner_max_iter": 30,
                                   "cccp_max_outer": 3}), encoding="utf-8")
        code = main([
            "sweep-nu", "--n-unl", "5", "--pi", "0.5", "--n-pos", "6", "--n-neg", "6",
            "--trials", "1", "--test-size", "400", "--seed", "5",
            "--train-config", str(cfg),
        ])
        assert code == 0
        assert capsys.readouterr().out.strip()

    def test_missing_data_file_is_a_clean_error(self, capsys):
        code = main([
            "sweep-nu", "--n-unl", "5", "--pi", "0.5", "--n-pos", "6", "--n-neg", "6",
            "--trials", "1", "--data", "nope.csv", "--label-col", "y",
        ])
        assert code == 2
        assert "error" in capsys.readouterr().err


class TestVerifyCommand:
    def test_fast_verify_passes(self, capsys):
        code = main(["verify", "--fast", "--seed", "1"])
        out = capsys.readouterr().out
        assert code == 0
        assert out.count("[PASS]") == 5
        assert "[FAIL]" not in out
