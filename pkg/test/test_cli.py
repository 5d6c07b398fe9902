import json
import os

import numpy as np
import pytest

from elulab.frontend import artifacts as ar
from elulab.frontend import settings as st
from elulab.nn import diagnostics as dg
from elulab.nn import lemmas as lm
from elulab.nn import network_file as nf
from elulab.nn import optimizer as op

@pytest.fixture
def trained_run(cli, mnist_fixture, small_config, tmp_path):
    """One ELU classifier trained for 2 epochs on the fixture MNIST"""
    out = tmp_path / "runs"
    assert cli("train", "--epochs", 2, "--mnist-dir", mnist_fixture, "--config", small_config, "-o", out) == 0
    return out / "elu" / "seed0"

class TestDispatch:

    def test_help(self, cli, capsys):
        assert cli() == 0
        out = capsys.readouterr().out
        for name in ("train", "autoencoder", "trace", "natgrad-check", "lemma-check", "show", "config"):
            assert name in out

    def test_command_help(self, cli, capsys):
        assert cli("train", "-h") == 0
        assert "--activation" in capsys.readouterr().out

    def test_unknown_command(self, cli, capsys):
        assert cli("fit") == 2
        assert "unknown command" in capsys.readouterr().err

    def test_invalid_activation(self, cli):
        assert cli("train", "--activation", "tanh") == 2

    def test_invalid_number(self, cli):
        assert cli("train", "--epochs", "0") == 2

    def test_negative_seed(self, cli, capsys):
        assert cli("train", "--seeds", "-1") == 2
        assert "seeds must be >= 0" in capsys.readouterr().err

    def test_unexpected_error_is_reported(self, cli, capsys, monkeypatch):
        def broken(*args, **kwargs):
            raise RuntimeError("broken suite")

        monkeypatch.setattr(lm, "run_all", broken)
        assert cli("lemma-check", "--cases", 1) == 1
        assert "unexpected RuntimeError: broken suite" in capsys.readouterr().err

    def test_no_mnist_dir(self, cli, capsys):
        assert cli("train", "--epochs", 1) == 1
        assert st.MNIST_DIR_ENV in capsys.readouterr().err

    def test_mnist_dir_from_environment(self, cli, monkeypatch, mnist_fixture, small_config, tmp_path):
        monkeypatch.setenv(st.MNIST_DIR_ENV, str(mnist_fixture))
        assert cli("train", "--epochs", 1, "--config", small_config, "-o", tmp_path / "r") == 0

    def test_bad_config_file(self, cli, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        assert cli("config", "--config", bad) == 1

    def test_missing_config_file(self, cli, tmp_path):
        assert cli("config", "--config", tmp_path / "nope.json") == 2

class TestConfig:

    def test_defaults(self, cli, capsys):
        assert cli("config", "-s", "Train") == 0
        out = capsys.readouterr().out
        assert "learning_rate" in out
        assert "128x8" in out
        assert "[Fisher]" not in out

    def test_overlay_source(self, cli, capsys, small_config):
        assert cli("config", "--config", small_config) == 0
        assert small_config in capsys.readouterr().out

class TestTrain:

    def test_outputs(self, trained_run):
        metrics = ar.read_csv(trained_run / "metrics.csv")
        assert metrics[0] == op.METRICS_HEADER
        assert [row[0] for row in metrics[1:]] == ["1", "2"]
        # classifier with a validation set: every column is filled
        assert all(cell != "" for row in metrics[1:] for cell in row)

        trace = dg.read_trace_csv(trained_run / "trace.csv")
        assert trace.levels == [1, 2]
        assert trace.per_unit_medians.shape == (2, 16)
        assert float(metrics[1][4]) == float(np.median(trace.per_unit_medians[0]))

        assert ar.read_csv(trained_run / "summary.csv")[0] == dg.SUMMARY_HEADER
        net = nf.load(trained_run / "network.bin")
        assert net.sizes == [784, 8, 8, 10]
        assert not (trained_run / "variance.csv").exists()

    def test_reruns_are_byte_identical(self, cli, mnist_fixture, small_config, tmp_path):
        for out in ("a", "b"):
            assert cli("train", "--epochs", 2, "--mnist-dir", mnist_fixture, "--config", small_config,
                       "-o", tmp_path / out) == 0
        for name in ("metrics.csv", "trace.csv", "summary.csv", "network.bin"):
            a = (tmp_path / "a" / "elu" / "seed0" / name).read_bytes()
            b = (tmp_path / "b" / "elu" / "seed0" / name).read_bytes()
            assert a == b, name

    def test_seeds_and_alpha(self, cli, mnist_fixture, small_config, tmp_path):
        assert cli("train", "-a", "lrelu", "--alpha", 0.2, "--seeds", "0-1", "--epochs", 1, "--limit", 40,
                   "--mnist-dir", mnist_fixture, "--config", small_config, "-o", tmp_path) == 0
        assert sorted(os.listdir(tmp_path / "lrelu0.2")) == ["seed0", "seed1"]

    def test_limit_and_loglevel(self, cli, mnist_fixture, small_config, tmp_path):
        assert cli("train", "--epochs", 1, "--limit", 10, "--mnist-dir", mnist_fixture,
                   "--config", small_config, "-o", tmp_path, "--loglevel", "debug") == 0
        # the median subset is capped by the 10 training examples left
        assert len(ar.read_csv(tmp_path / "elu" / "seed0" / "metrics.csv")) == 2

class TestTrace:

    def test_variance_outputs(self, cli, capsys, mnist_fixture, small_config, tmp_path):
        assert cli("trace", "--epochs", 3, "--mnist-dir", mnist_fixture, "--config", small_config,
                   "-o", tmp_path) == 0
        run = tmp_path / "elu" / "seed0"
        rows = ar.read_csv(run / "variance.csv")
        assert rows[0] == dg.VARIANCE_HEADER
        assert len(rows) == 1 + 6 * 3
        assert all(r[3] != "" for r in rows[1:])
        assert dg.read_trace_csv(run / "trace.csv").levels == [1, 2, 3]
        assert "mean variance of median" in capsys.readouterr().out

    def test_one_epoch_is_not_enough(self, cli, mnist_fixture, small_config, tmp_path):
        assert cli("trace", "--epochs", 1, "--mnist-dir", mnist_fixture, "--config", small_config,
                   "-o", tmp_path) == 1

class TestAutoencoder:

    def test_reconstruction_csv(self, cli, mnist_fixture, small_config, tmp_path):
        assert cli("autoencoder", "--lr", "0.01,0.001", "--epochs", 2, "--limit", 30,
                   "--mnist-dir", mnist_fixture, "--config", small_config, "-o", tmp_path) == 0
        for lr in ("lr0.01", "lr0.001"):
            rows = ar.read_csv(tmp_path / "elu" / lr / "seed0" / "reconstruction.csv")
            assert rows[0] == ["epoch", "train_mse", "test_mse"]
            assert len(rows) == 3
            assert all(float(v) >= 0.0 for r in rows[1:] for v in r[1:])

class TestNatgrad:

    def test_report(self, cli, trained_run, mnist_fixture, small_config, tmp_path):
        out = tmp_path / "natgrad.json"
        assert cli("natgrad-check", trained_run / "network.bin", "--mnist-dir", mnist_fixture,
                   "--config", small_config, "-o", out) == 0
        entries = json.loads(out.read_text())
        # 2 units on levels 2 and 3, minibatch and full gradient each
        assert len(entries) == 8
        assert {(x["layer"], x["unit"]) for x in entries} == {(2, 0), (2, 1), (3, 0), (3, 1)}
        assert {x["gradient"] for x in entries} == {"minibatch", "full"}
        assert all(x["identities_ok"] for x in entries)

    def test_default_output_path(self, cli, trained_run, mnist_fixture, small_config):
        assert cli("natgrad-check", trained_run / "network.bin", "--units", "2:3",
                   "--delta-mode", "model-sampled", "--mc-samples", 2,
                   "--mnist-dir", mnist_fixture, "--config", small_config) == 0
        entries = json.loads((trained_run / "network.natgrad.json").read_text())
        assert [x["delta_mode"] for x in entries] == ["model-sampled", "model-sampled"]
        assert entries[0]["n_samples"] == 2 * 64

    def test_synthetic_data(self, cli, trained_run, small_config, tmp_path):
        assert cli("natgrad-check", trained_run / "network.bin", "--data", "synthetic", "--units", "3:0",
                   "--config", small_config, "-o", tmp_path / "s.json") == 0

    def test_unit_out_of_range(self, cli, trained_run, mnist_fixture, small_config):
        assert cli("natgrad-check", trained_run / "network.bin", "--units", "2:8",
                   "--mnist-dir", mnist_fixture, "--config", small_config) == 1

    def test_level_out_of_range(self, cli, trained_run, mnist_fixture, small_config, capsys):
        assert cli("natgrad-check", trained_run / "network.bin", "--units", "9:0",
                   "--mnist-dir", mnist_fixture, "--config", small_config) == 1
        assert "unit level 9" in capsys.readouterr().err

    def test_bad_unit_syntax(self, cli, trained_run):
        assert cli("natgrad-check", trained_run / "network.bin", "--units", "two") == 2

    def test_missing_network(self, cli, tmp_path):
        assert cli("natgrad-check", tmp_path / "missing.bin") == 2

class TestLemma:

    def test_pass(self, cli, tmp_path, capsys):
        out = tmp_path / "lemmas.json"
        assert cli("lemma-check", "--cases", 10, "--network-cases", 1, "-o", out) == 0
        report = json.loads(out.read_text())
        assert len(report) == 7
        assert all(r["passed"] and r["seed"] == 0 for r in report)
        assert "FAILED" not in capsys.readouterr().out

    def test_corrupt_fails(self, cli, capsys):
        assert cli("lemma-check", "--cases", 5, "--network-cases", 0, "--corrupt") == 1
        assert "FAILED" in capsys.readouterr().out

class TestShow:

    def test_show(self, cli, trained_run, capsys):
        assert cli("show", trained_run / "network.bin", "-x", "-v") == 0
        out = capsys.readouterr().out
        assert "ELUNET01" in out
        assert "00000000:" in out
        assert "784-8-8-10" in out

    def test_not_a_network(self, cli, tmp_path):
        bad = tmp_path / "bad.bin"
        bad.write_bytes(b"NOTANET0" + bytes(16))
        assert cli("show", bad) == 1

class TestArtifacts:

    def test_runs_leave_no_temporary_files(self, trained_run):
        assert list(trained_run.parent.parent.rglob("*.tmp")) == []

    def test_failed_write_keeps_the_target(self, tmp_path, monkeypatch):
        target = tmp_path / "metrics.csv"
        ar.write_csv(target, [["a"], ["1"]])

        def interrupted(src, dst):
            raise OSError("disk full")

        monkeypatch.setattr(ar.os, "replace", interrupted)
        with pytest.raises(OSError):
            ar.write_csv(target, [["a"], ["2"]])
        assert ar.read_csv(target) == [["a"], ["1"]]
        assert sorted(p.name for p in tmp_path.iterdir()) == ["metrics.csv"]

    def test_creates_missing_directories(self, tmp_path):
        path = ar.write_json(tmp_path / "a" / "b" / "r.json", {"k": 1})
        assert json.loads(open(path).read()) == {"k": 1}
