import subprocess
import sys

import numpy as np
import pytest

from fractgv import load_signal, save_signal, Signal, make_grid
from fractgv.cli import main


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def parse_kv(text):
    pairs = {}
    for line in text.splitlines():
        key, value = line.split("=", 1)
        pairs[key] = value
    return pairs


@pytest.fixture
def signals(tmp_path, capsys):
    clean, noisy = tmp_path / "clean.csv", tmp_path / "noisy.csv"
    code, _, _ = run(capsys, "generate", "--kind", "corner", "--n", 32, "--sigma", 0.1, "--seed", 3,
                     "--out-clean", clean, "--out-noisy", noisy)
    assert code == 0
    return clean, noisy


def test_generate_flat_zero_noise(tmp_path, capsys):
    clean, noisy = tmp_path / "c.csv", tmp_path / "n.csv"
    code, out, _ = run(capsys, "generate", "--kind", "flat", "--sigma", 0, "--n", 16,
                       "--out-clean", clean, "--out-noisy", noisy)
    assert code == 0
    assert clean.read_bytes() == noisy.read_bytes()
    assert parse_kv(out) == {"n": "16", "noise_l2_sq": "0.0"}


def test_generate_is_reproducible(tmp_path, capsys):
    paths = []
    for tag in "ab":
        c, n = tmp_path / f"c{tag}.csv", tmp_path / f"n{tag}.csv"
        run(capsys, "generate", "--seed", 11, "--zero-mean", "--out-clean", c, "--out-noisy", n)
        paths.append(n)
    assert paths[0].read_bytes() == paths[1].read_bytes()
    u = load_signal(paths[0])
    assert u.n == 256


@pytest.mark.parametrize("argv", [
    ["generate", "--n", "1", "--out-clean", "c", "--out-noisy", "n"],
    ["generate", "--kind", "zigzag"],
    ["generate", "--sigma", "-1", "--out-clean", "c", "--out-noisy", "n"],
    ["generate", "--out-clean", "c"],
    ["denoise", "--alpha", "abc"],
    ["frobnicate"],
    [],
])
def test_usage_errors(tmp_path, capsys, monkeypatch, argv):
    monkeypatch.chdir(tmp_path)
    code, _, _ = run(capsys, *argv)
    assert code == 2


def test_denoise_outputs(signals, tmp_path, capsys):
    clean, noisy = signals
    out = tmp_path / "den.csv"
    code, text, _ = run(capsys, "denoise", "--in", noisy, "--clean", clean, "--alpha", 0.05,
                        "--r", 1.5, "--out", out)
    assert code == 0
    kv = parse_kv(text)
    assert set(kv) == {"energy", "tgv", "fidelity", "iterations", "converged", "cost"}
    assert float(kv["energy"]) == pytest.approx(float(kv["tgv"]) + float(kv["fidelity"]))
    assert load_signal(out).n == 32


def test_denoise_zero_alpha_and_constant(tmp_path, capsys, signals):
    _, noisy = signals
    out = tmp_path / "den.csv"
    assert run(capsys, "denoise", "--in", noisy, "--alpha", 0, "--r", 1.5, "--out", out)[0] == 0
    assert load_signal(out) == load_signal(noisy)
    const = tmp_path / "const.csv"
    save_signal(Signal(make_grid(8), np.full(8, 2.5)), const)
    assert run(capsys, "denoise", "--in", const, "--alpha", 1, "--r", 1.3, "--out", out)[0] == 0
    np.testing.assert_allclose(load_signal(out).values, 2.5, atol=1e-9)


def test_denoise_weight_count(signals, tmp_path, capsys):
    _, noisy = signals
    code, _, err = run(capsys, "denoise", "--in", noisy, "--alpha", 1, 2, 3, "--r", 1.5,
                       "--out", tmp_path / "o.csv")
    assert code == 2 and "weights" in err


def test_io_errors(tmp_path, capsys):
    code, _, _ = run(capsys, "denoise", "--in", tmp_path / "none.csv", "--alpha", 1,
                     "--out", tmp_path / "o.csv")
    assert code == 1
    bad = tmp_path / "bad.csv"
    bad.write_text("1\nx\n")
    code, _, err = run(capsys, "seminorm", "--in", bad, "--s", 0.5)
    assert code == 1 and ":2:" in err
    code, _, _ = run(capsys, "generate", "--out-clean", tmp_path / "no" / "c.csv",
                     "--out-noisy", tmp_path / "n.csv")
    assert code == 1


def test_outputs_validated_before_compute(signals, tmp_path, capsys):
    clean, noisy = signals
    code, _, _ = run(capsys, "train", "--noisy", noisy, "--clean", clean,
                     "--out-landscape", tmp_path / "missing" / "l.csv")
    assert code == 1


def test_numeric_failure_exit_code(signals, tmp_path, capsys, monkeypatch):
    from fractgv import NumericalError, cli

    def boom(problem):
        raise NumericalError("non-finite iterate")

    monkeypatch.setattr(cli, "solve", boom)
    _, noisy = signals
    code, _, err = run(capsys, "denoise", "--in", noisy, "--alpha", 1, "--out", tmp_path / "o.csv")
    assert code == 3 and "numerical" in err


def test_training_failure_exit_code(signals, tmp_path, capsys, monkeypatch):
    from fractgv import NumericalError, trainer

    def boom(problem):
        raise NumericalError("non-finite iterate")

    monkeypatch.setattr(trainer, "solve", boom)
    clean, noisy = signals
    code, _, _ = run(capsys, "train", "--noisy", noisy, "--clean", clean, "--alpha-grid", "0.1",
                     "--r-grid", "1:0.5:2", "--out-landscape", tmp_path / "l.csv")
    assert code == 4


def test_train_single_cell_matches_denoise(signals, tmp_path, capsys):
    clean, noisy = signals
    land, best = tmp_path / "land.csv", tmp_path / "best.csv"
    code, text, _ = run(capsys, "train", "--noisy", noisy, "--clean", clean, "--alpha-grid", "0.05",
                        "--r-grid", "1.5", "--out-landscape", land, "--out-signal", best)
    assert code == 0
    first, *rest = text.splitlines()
    assert first.startswith("argmin alpha=0.05 r=1.5 cost=")
    assert parse_kv("\n".join(rest)) == {"cells": "1", "failed": "0"}
    _, den_text, _ = run(capsys, "denoise", "--in", noisy, "--clean", clean, "--alpha", 0.05,
                         "--r", 1.5, "--out", tmp_path / "den.csv")
    assert first.split("cost=")[1] == parse_kv(den_text)["cost"]
    assert best.read_bytes() == (tmp_path / "den.csv").read_bytes()
    lines = land.read_text().splitlines()
    assert lines[0] == "alpha,r,cost,iterations,converged"
    assert len(lines) == 3 and lines[2].startswith("# argmin,0.05,1.5,")


def test_train_jobs_identical(signals, tmp_path, capsys):
    clean, noisy = signals
    outs = []
    for jobs in (1, 2):
        path = tmp_path / f"land{jobs}.csv"
        code, _, _ = run(capsys, "train", "--noisy", noisy, "--clean", clean, "--alpha-grid",
                         "0:0.05:0.1", "--r-grid", "1:0.5:2", "--jobs", jobs, "--out-landscape", path)
        assert code == 0
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]


def test_train_rejects_grid_outside_box(signals, tmp_path, capsys):
    clean, noisy = signals
    code, _, _ = run(capsys, "train", "--noisy", noisy, "--clean", clean, "--alpha-grid", "0.001",
                     "--r-grid", "1", "--out-landscape", tmp_path / "l.csv")
    assert code == 2


def test_config_file_and_flag_precedence(signals, tmp_path, capsys):
    clean, noisy = signals
    cfg = tmp_path / "run.cfg"
    cfg.write_text(f"# training run\nnoisy={noisy}\nclean={clean}\nalpha-grid=0.05\n"
                   f"r-grid=1.5\nout-landscape={tmp_path / 'land.csv'}\nmax_iter=5\n")
    code, text, _ = run(capsys, "train", "--config", cfg)
    assert code == 0 and "r=1.5" in text
    code, text, _ = run(capsys, "train", "--config", cfg, "--r-grid", "2")
    assert code == 0 and "r=2.0" in text
    land = (tmp_path / "land.csv").read_text().splitlines()
    assert land[1].split(",")[3] == "5"  # max_iter=5 from the file applies


def test_bad_config(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("n=4\nbroken line\n")
    code, _, err = run(capsys, "generate", "--config", cfg)
    assert code == 1 and ":2:" in err


def test_unknown_solver_option_in_config(signals, tmp_path, capsys):
    _, noisy = signals
    cfg = tmp_path / "run.cfg"
    cfg.write_text("tol_rel=abc\n")
    code, _, _ = run(capsys, "denoise", "--config", cfg, "--in", noisy, "--alpha", 1,
                     "--out", tmp_path / "o.csv")
    assert code == 2


def test_seminorm_examples(tmp_path, capsys):
    step = tmp_path / "step.csv"
    step.write_text("0\n1\n")
    code, text, _ = run(capsys, "seminorm", "--in", step, "--s", 0.5, "--rule", "midpoint")
    assert code == 0
    assert float(parse_kv(text)["value"]) == pytest.approx(2**0.5, rel=1e-12)
    const = tmp_path / "const.csv"
    const.write_text("3\n3\n3\n")
    assert parse_kv(run(capsys, "seminorm", "--in", const, "--s", 0.3)[1]) == {"value": "0.0"}
    code, text, _ = run(capsys, "seminorm", "--in", step, "--tgv", "--alpha", 1e6, "--r", 1.5)
    assert code == 0 and np.isfinite(float(parse_kv(text)["value"]))
    assert run(capsys, "seminorm", "--in", step, "--s", 1.5)[0] == 2


def test_limits_bbm_and_ms(tmp_path, capsys):
    out = tmp_path / "bbm.csv"
    code, text, _ = run(capsys, "limits", "--check", "bbm", "--s-grid", "0.5,0.9", "--n", 256, "--out", out)
    assert code == 0 and text.splitlines()[-1] == "check=pass"
    assert out.read_text().splitlines()[0] == "s,value"
    code, text, _ = run(capsys, "limits", "--check", "ms", "--s-grid", "0.3", "--m", 64, "--L", 10)
    assert code == 0 and text.endswith("check=pass\n")


def test_limits_failure_exit_code(capsys):
    # the midpoint rule misses the reference by more than 3% close to s = 1
    code, text, _ = run(capsys, "limits", "--check", "bbm", "--s-grid", "0.95", "--n", 64,
                        "--rule", "midpoint")
    assert code == 5 and "check=fail" in text


def test_limits_tgv_small(capsys):
    code, text, _ = run(capsys, "limits", "--check", "tgv", "--s-grid", "0.3,0.6", "--n", 32)
    assert code == 0 and "check=pass" in text


def test_limits_bad_s(capsys):
    assert run(capsys, "limits", "--check", "bbm", "--s-grid", "0,0.5")[0] == 2
    assert run(capsys, "limits", "--check", "bbm", "--s-grid", "0.5,x")[0] == 2


def test_stdout_is_key_value(signals, tmp_path, capsys):
    clean, noisy = signals
    _, text, _ = run(capsys, "denoise", "--in", noisy, "--alpha", 0.05, "--out", tmp_path / "o.csv")
    for line in text.splitlines():
        key, _, value = line.partition("=")
        assert key and value and "=" not in value


def test_module_entry_point(tmp_path):
    res = subprocess.run([sys.executable, "-m", "fractgv", "generate", "--n", "1",
                          "--out-clean", str(tmp_path / "c"), "--out-noisy", str(tmp_path / "n")],
                         capture_output=True, text=True)
    assert res.returncode == 2
    res = subprocess.run([sys.executable, "-m", "fractgv", "--help"], capture_output=True, text=True)
    assert res.returncode == 0 and "train" in res.stdout
