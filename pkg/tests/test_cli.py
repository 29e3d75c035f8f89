import json
import os

import numpy as np
import pytest

from hamelflow import cli


def run_cfg(tmp_path, **kw):
    out = tmp_path / "out"
    defaults = dict(alpha=1.0, gamma=4.0, rho=2.5, mode_cutoff=1, panels=24,
                    epsilon=1e-3, output_dir=str(out))
    defaults.update(kw)
    return cli.RunConfig(**defaults), out


def test_parse_defaults_and_flags():
    cfg = cli.parse_config(["--gamma", "3.5", "--rho", "2.4", "--epsilon", "0.01"])
    assert cfg.gamma == 3.5 and cfg.rho == 2.4 and cfg.epsilon == 0.01
    assert cfg.family == "power"


def test_parse_config_file_with_flag_override(tmp_path):
    cfg_file = tmp_path / "run.json"
    cfg_file.write_text(json.dumps({
        "alpha": 2.0, "gamma": 3.0, "rho": 2.4, "mode_cutoff": 2,
        "forcing": {"family": "bump", "epsilon": 0.5, "coefficients": {"0": 1.0}},
    }))
    cfg = cli.parse_config(["--config", str(cfg_file), "--epsilon", "0.25"])
    assert cfg.alpha == 2.0 and cfg.family == "bump"
    assert cfg.epsilon == 0.25
    assert cfg.coefficients == {0: 1.0}


@pytest.mark.parametrize("kw,fragment", [
    (dict(gamma=1.5), "gamma"),
    (dict(rho=3.0), "rho"),
    (dict(rho=2.9, gamma=2.5), "rho"),
])
def test_invalid_parameters_exit_code(tmp_path, capsys, kw, fragment):
    cfg, _ = run_cfg(tmp_path, **kw)
    assert cli.run(cfg) == cli.EXIT_CONFIG
    err = capsys.readouterr().err
    assert "parameters outside Theorem hypotheses" in err
    assert fragment in err


def test_unknown_family_lists_families(tmp_path, capsys):
    cfg, _ = run_cfg(tmp_path, family="vortex-soup")
    assert cli.run(cfg) == cli.EXIT_CONFIG
    err = capsys.readouterr().err
    for name in ("power", "bump", "random"):
        assert name in err


def test_inadmissible_envelope_rejected(tmp_path, capsys):
    cfg, _ = run_cfg(tmp_path, family_options={"f_exponent": -1.2})
    assert cli.run(cfg) == cli.EXIT_CONFIG
    assert "envelope" in capsys.readouterr().err


def test_zero_amplitude_run(tmp_path):
    cfg, out = run_cfg(tmp_path, epsilon=0.0)
    assert cli.run(cfg) == cli.EXIT_OK
    summary = json.loads((out / "summary.json").read_text())
    assert summary["picard"]["iterations"] == 1
    assert summary["picard"]["converged"] is True
    assert summary["solution_norms"]["x_rho"] == 0.0
    assert summary["decay_fit"] is None


def test_converged_run_artifacts(tmp_path):
    cfg, out = run_cfg(tmp_path)
    assert cli.run(cfg) == cli.EXIT_OK
    summary = json.loads((out / "summary.json").read_text())
    assert summary["picard"]["converged"] is True
    assert summary["weak_residual"] < 1e-5
    assert "decay_fit" in summary and "slope" in summary["decay_fit"]
    assert summary["lambda_formula_c0_1"] > 0

    decay = (out / "decay.csv").read_text().splitlines()
    assert decay[0] == "r,amplitude"
    r, amp = zip(*(map(float, line.split(",")) for line in decay[1:]))
    assert len(r) == 24 * 8 + 2
    assert all(a >= 0 for a in amp)

    profiles = sorted(os.listdir(out / "profiles"))
    assert "mode_+0_vr.csv" in profiles and "mode_-1_v3.csv" in profiles
    header = (out / "profiles" / "mode_+1_vt.csv").read_text().splitlines()[0]
    assert header == "r,re,im"


def test_byte_identical_summaries(tmp_path):
    cfg_a, out_a = run_cfg(tmp_path, family="random", seed=11)
    cli.run(cfg_a)
    first = (out_a / "summary.json").read_bytes()
    cli.run(cfg_a)
    assert (out_a / "summary.json").read_bytes() == first


def test_thread_override_does_not_change_bytes(tmp_path, monkeypatch):
    cfg_a, out_a = run_cfg(tmp_path)
    cli.run(cfg_a)
    base = (out_a / "summary.json").read_bytes()
    monkeypatch.setenv("HAMELFLOW_THREADS", "3")
    cfg_b, out_b = run_cfg(tmp_path)
    cfg_b.output_dir = str(out_b) + "_threads"
    cli.run(cfg_b)
    assert (tmp_path / "out_threads" / "summary.json").read_bytes() == base


def test_non_contraction_exit_with_diagnostics(tmp_path, capsys):
    cfg, out = run_cfg(tmp_path, epsilon=1000.0, max_iter=20)
    assert cli.run(cfg) == cli.EXIT_NO_CONTRACTION
    assert "outside contraction regime" in capsys.readouterr().err
    summary = json.loads((out / "summary.json").read_text())
    assert "error" in summary
    assert len(summary["picard"]["contraction_factors"]) >= 3


def test_main_entrypoint_config_error(capsys):
    assert cli.main(["--gamma", "1.0"]) == cli.EXIT_CONFIG
