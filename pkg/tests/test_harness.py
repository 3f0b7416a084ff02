"""Config parsing, run orchestration, determinism, CLI."""

import os

import numpy as np
import pytest

from shocklab import cli, runner
from shocklab.config import RunConfig, parse_config, serialize_config
from shocklab.errors import ParseError, RangeError


def write(tmp_path, text, name="run.cfg"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def test_empty_file_gives_defaults(tmp_path):
    cfg = parse_config(write(tmp_path, ""))
    assert cfg[("run", "solver")] == "plane"
    assert cfg[("metric", "model")] == "model-quadratic"
    assert cfg[("data", "profile")] == "ramp"
    assert cfg[("data", "lam")] == 0.1
    assert cfg[("grid", "nu")] == 512


def test_range_error_names_key(tmp_path):
    path = write(tmp_path, "[run]\nmu_stop = -1\n")
    with pytest.raises(RangeError) as err:
        parse_config(path)
    assert "mu_stop" in str(err.value)


def test_parse_error_carries_line_number(tmp_path):
    path = write(tmp_path, "[run]\nsolver = plane\nnonsense line\n")
    with pytest.raises(ParseError) as err:
        parse_config(path)
    assert "line 3" in str(err.value)


def test_unknown_key_rejected(tmp_path):
    path = write(tmp_path, "[run]\nwarp_drive = on\n")
    with pytest.raises(ParseError) as err:
        parse_config(path)
    assert "warp_drive" in str(err.value)


def test_round_trip(tmp_path):
    cfg = RunConfig()
    cfg[("run", "solver")] = "geo2d"
    cfg[("data", "eps")] = 0.0125
    cfg[("output", "snap_times")] = [0.5, 1.25]
    text = serialize_config(cfg)
    reparsed = parse_config(write(tmp_path, text))
    assert reparsed == cfg
    assert serialize_config(reparsed) == text


def _fast_plane_cfg(out, eps=0.0):
    cfg = RunConfig()
    cfg[("run", "out")] = out
    cfg[("grid", "nu")] = 128
    cfg[("grid", "cfl")] = 2.0
    cfg[("data", "eps")] = eps
    cfg[("run", "seed")] = 11
    return cfg


def test_run_writes_artifacts(tmp_path):
    out = str(tmp_path / "r1")
    cfg = _fast_plane_cfg(out)
    cfg[("output", "snap_times")] = [2.0]
    rep = runner.run(cfg)
    assert rep["case"] == "II"
    assert abs(rep["T_shock"] - 10.0) < 1e-4
    assert os.path.exists(os.path.join(out, "series.csv"))
    assert os.path.exists(os.path.join(out, "shock_report"))
    assert os.path.exists(os.path.join(out, "snapshot_000.txt"))
    series = runner.read_series(os.path.join(out, "series.csv"))
    assert series["mu_star"][0] == 1.0
    rep2 = runner.read_report(os.path.join(out, "shock_report"))
    assert abs(rep2["T_shock"] - rep["T_shock"]) < 1e-12


def test_zero_data_reports_case_one(tmp_path):
    out = str(tmp_path / "r0")
    cfg = _fast_plane_cfg(out)
    cfg[("data", "lam")] = 0.0
    cfg[("run", "t_max")] = 1.0
    rep = runner.run(cfg)
    assert rep["case"] == "I"
    assert "T_shock" not in rep


def test_determinism_byte_identical_series(tmp_path):
    outs = []
    for name in ("a", "b"):
        out = str(tmp_path / name)
        cfg = _fast_plane_cfg(out, eps=0.002)
        runner.run(cfg)
        outs.append(open(os.path.join(out, "series.csv"), "rb").read())
    assert outs[0] == outs[1]


def test_seed_changes_series(tmp_path):
    blobs = []
    for seed in (1, 2):
        out = str(tmp_path / f"s{seed}")
        cfg = _fast_plane_cfg(out, eps=0.002)
        cfg[("run", "seed")] = seed
        runner.run(cfg)
        blobs.append(open(os.path.join(out, "series.csv"), "rb").read())
    assert blobs[0] != blobs[1]


def test_sweep_lambda_lifespan_law(tmp_path):
    out = str(tmp_path / "sweep")
    cfg = _fast_plane_cfg(out)
    cfg[("data", "profile")] = "bump"
    rows = runner.sweep(cfg, "data.lam", [0.02, 0.05, 0.1])
    assert all(r["status"] == "ok" for r in rows)
    dev = [abs(r["T_shock"] * r["deltastar"] - 1.0) for r in rows]
    assert dev[0] <= dev[-1] + 1e-3  # deviation shrinks with amplitude
    assert os.path.exists(os.path.join(out, "sweep.csv"))


def test_sweep_empty_values(tmp_path):
    out = str(tmp_path / "sweep0")
    cfg = _fast_plane_cfg(out)
    rows = runner.sweep(cfg, "data.lam", [])
    assert rows == []
    assert os.path.exists(os.path.join(out, "sweep.csv"))


def test_sweep_continues_after_failure(tmp_path):
    out = str(tmp_path / "sweepf")
    cfg = _fast_plane_cfg(out)
    cfg[("run", "t_max")] = 1.0  # too short for a shock at small lam
    rows = runner.sweep(cfg, "data.lam", [0.1])
    assert rows[0]["status"] in ("ok", "failed")


def test_params_mode(tmp_path, capsys):
    path = write(tmp_path, "[grid]\nnu = 64\n")
    rc = cli.main(["params", path])
    assert rc == 0
    out = capsys.readouterr().out
    assert "deltastar = 0.1" in out


def test_cli_run_and_compare(tmp_path):
    cfg_text = (
        "[run]\nsolver = compare\nt_max = 0.5\n"
        "[data]\nprofile = bump\nlam = 0.1\neps = 0.004\n"
        "[grid]\nnu = 64\nntheta = 16\nnx = 256\n")
    path = write(tmp_path, cfg_text)
    out = str(tmp_path / "cmp")
    rc = cli.main(["--out", out, "run", path])
    assert rc == 0
    assert os.path.exists(os.path.join(out, "compare.csv"))
    rep = runner.read_report(os.path.join(out, "shock_report"))
    assert rep["cmp_max_psi"] < 0.05


def test_cli_error_exit_code(tmp_path):
    path = write(tmp_path, "[run]\nmu_stop = 0.9\n")
    rc = cli.main(["run", path])
    assert rc == 1


def test_compare_dirs_cli(tmp_path):
    """File-level compare: geo2d and cartesian run dirs with snapshots."""
    geo_out = str(tmp_path / "geo")
    cart_out = str(tmp_path / "cart")
    base = (
        "[data]\nprofile = bump\nlam = 0.1\neps = 0.004\n"
        "[grid]\nnu = 64\nntheta = 16\nnx = 256\n"
        "[output]\nsnap_times = 0.4\n")
    geo_cfg = tmp_path / "geo.cfg"
    geo_cfg.write_text("[run]\nsolver = geo2d\nt_max = 0.4\n" + base)
    cart_cfg = tmp_path / "cart.cfg"
    cart_cfg.write_text("[run]\nsolver = cartesian\nt_max = 0.4\n" + base)
    assert cli.main(["--out", geo_out, "--seed", "5", "run",
                     str(geo_cfg)]) == 0
    assert cli.main(["--out", cart_out, "--seed", "5", "run",
                     str(cart_cfg)]) == 0
    rep = runner.compare_dirs(geo_out, cart_out,
                              out_path=str(tmp_path / "cmp.csv"))
    assert rep["max_psi"] < 1e-3
    assert os.path.exists(str(tmp_path / "cmp.csv"))


def test_custom_metric_model_from_config(tmp_path):
    path = write(tmp_path, "[run]\nsolver = geo2d\n"
                           "[metric]\nmodel = custom\ng11 = 2.0,1.0\n"
                           "[grid]\nnu = 64\nntheta = 8\n")
    cfg = parse_config(path)
    params = runner.compute_params(cfg)
    assert abs(params["deltastar"] - 0.1) < 1e-8  # quadratic-equivalent


def test_plane_solver_rejects_custom_metric(tmp_path):
    path = write(tmp_path, "[metric]\nmodel = custom\ng11 = 1.0\n")
    cfg = parse_config(path)
    with pytest.raises(RangeError):
        runner.compute_params(cfg)
