import csv
import json

import pytest

from qprl.cli import build_parser, main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out


@pytest.fixture
def data(tmp_path, capsys):
    d = tmp_path / "d"
    code, _ = run(capsys, "gen-data", "--n", "4", "--kinds", "maxcut", "--train-n", "30", "--val-n", "4",
                  "--test-n", "5", "--out", str(d))
    assert code == 0
    return d


class TestGenData:
    def test_counts(self, data):
        with open(data / "train.jsonl") as f:
            assert sum(1 for _ in f) == 30

    def test_config_echo(self, tmp_path, capsys):
        code, out = run(capsys, "gen-data", "--n", "3", "--train-n", "2", "--val-n", "1", "--test-n", "1",
                        "--seed", "4", "--out", str(tmp_path / "x"))
        line = json.loads(out.out.strip().splitlines()[-1])
        assert code == 0 and line["ok"] and line["config"]["seed"] == 4

    def test_env_seed(self, tmp_path, capsys, monkeypatch):
        monkeypatch.setenv("QPRL_SEED", "11")
        run(capsys, "gen-data", "--n", "3", "--train-n", "1", "--val-n", "1", "--test-n", "1",
            "--out", str(tmp_path / "x"))
        first = json.loads((tmp_path / "x" / "train.jsonl").read_text().splitlines()[0])
        # split 0, index 0 under root seed 11
        assert first["seed"] == 11


class TestTrainEval:
    def test_one_update(self, data, tmp_path, capsys):
        out = tmp_path / "t"
        code, _ = run(capsys, "train", "--data", str(data), "--steps", "512", "--out", str(out))
        assert code == 0
        with open(out / "curve.csv") as f:
            rows = list(csv.reader(f))
        assert len(rows) == 2
        assert rows[0][:4] == ["steps", "mean_ep_reward", "mean_ep_len", "entropy"]
        assert (out / "checkpoint_final.bin").exists() and (out / "checkpoint_best.bin").exists()

    def test_untrained_needs_no_checkpoint(self, data, tmp_path, capsys):
        code, out = run(capsys, "eval", "--untrained", "--data", str(data), "--out", str(tmp_path / "u.jsonl"))
        assert code == 0
        recs = [json.loads(l) for l in (tmp_path / "u.jsonl").read_text().splitlines()]
        assert len(recs) == 5 and all(r["agent"] == "untrained" for r in recs)

    def test_checkpoint_eval(self, data, tmp_path, capsys):
        run(capsys, "train", "--data", str(data), "--steps", "512", "--out", str(tmp_path / "t"))
        code, _ = run(capsys, "eval", "--checkpoint", str(tmp_path / "t" / "checkpoint_final.bin"),
                      "--data", str(data), "--out", str(tmp_path / "e.jsonl"))
        assert code == 0

    def test_missing_checkpoint_is_run_error(self, data, tmp_path, capsys):
        code, out = run(capsys, "eval", "--checkpoint", str(tmp_path / "nope.bin"), "--data", str(data),
                        "--out", str(tmp_path / "e.jsonl"))
        assert code == 2


class TestOtherCommands:
    def test_qaoa(self, data, tmp_path, capsys):
        code, _ = run(capsys, "qaoa", "--data", str(data), "--bins", "5", "--out", str(tmp_path / "q.jsonl"))
        assert code == 0
        rec = json.loads((tmp_path / "q.jsonl").read_text().splitlines()[0])
        assert rec["agent"] == "qaoa" and 0 <= rec["score"] <= 1

    def test_transpile_program(self, tmp_path, capsys):
        code, _ = run(capsys, "transpile", "--program", "RZ(pi/2) 0; RZ(pi/2) 0", "--out", str(tmp_path / "p.jsonl"))
        rec = json.loads((tmp_path / "p.jsonl").read_text())
        assert code == 0 and rec["native"] == ["RZ(pi) 0"] and rec["compiled_len"] == 1

    def test_report(self, data, tmp_path, capsys):
        run(capsys, "eval", "--untrained", "--data", str(data), "--out", str(tmp_path / "u.jsonl"))
        code, _ = run(capsys, "report", "--records", str(tmp_path / "u.jsonl"), "--out", str(tmp_path / "r"))
        assert code == 0
        assert (tmp_path / "r" / "manifest.json").exists()


class TestUsage:
    def test_unknown_subcommand(self, capsys):
        code, out = run(capsys, "bogus")
        assert code == 1 and "usage" in out.err

    def test_unknown_flag(self, capsys, tmp_path):
        code, out = run(capsys, "gen-data", "--frobnicate", "--out", str(tmp_path))
        assert code == 1 and "usage" in out.err

    def test_help_lists_defaults(self):
        parser = build_parser()
        text = {name: sub.format_help() for name, sub in parser.commands.items()}
        assert "default: 512" in text["train"]
        assert "default: 10" in text["eval"] and "default: 25" in text["eval"] and "default: 0.8" in text["eval"]
        assert "default: 20" in text["qaoa"]

    def test_config_file(self, tmp_path, capsys):
        cfg = tmp_path / "c.txt"
        cfg.write_text(f"# comment\nn=3\ntrain_n=2\nval_n=1\ntest_n=1\nout={tmp_path / 'x'}\n")
        code, out = run(capsys, "--config", str(cfg), "gen-data", "--train-n", "3")
        echo = json.loads(out.out.strip().splitlines()[-1])["config"]
        assert code == 0 and echo["n"] == 3 and echo["train_n"] == 3

    def test_bad_config_key(self, tmp_path, capsys):
        cfg = tmp_path / "c.txt"
        cfg.write_text("bins=3\n")
        code, _ = run(capsys, "--config", str(cfg), "gen-data", "--out", str(tmp_path / "x"))
        assert code == 1
