"""Criterion 10: render all five figure kinds from a recorded shock run.

Drives the simulator through its command-line interface (the only coupling
allowed), then renders and structurally checks every figure kind.
"""

import os
import shutil
import subprocess
import sys

import pytest

from plotkit import FigureSpec, render
from plotkit.io import read_report, read_series

pytestmark = pytest.mark.skipif(
    shutil.which("shocklab") is None,
    reason="simulator CLI not installed")


@pytest.fixture(scope="module")
def shock_run(tmp_path_factory):
    root = tmp_path_factory.mktemp("runs")
    run_dir = str(root / "shock")
    cfg = root / "run.cfg"
    cfg.write_text(
        "[run]\nsolver = plane\nmu_stop = 0.05\n"
        "[data]\nprofile = ramp\nlam = 0.1\neps = 0.002\n"
        "[grid]\nnu = 128\ncfl = 2.0\n"
        "[output]\nsnap_times = 2.0,5.0,8.0\n")
    proc = subprocess.run(
        ["shocklab", "--out", run_dir, "--seed", "3", "run", str(cfg)],
        capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    sweep_cfg = root / "sweep.cfg"
    sweep_cfg.write_text(
        "[run]\nsolver = plane\n"
        "[data]\nprofile = bump\n[grid]\nnu = 128\ncfl = 2.0\n")
    proc = subprocess.run(
        ["shocklab", "--out", run_dir, "sweep", str(sweep_cfg),
         "--key", "data.lam", "--values", "0.05,0.1"],
        capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    return run_dir


@pytest.mark.parametrize("kind", ("mustar", "fan", "blowup", "slow",
                                  "convergence"))
def test_criterion_10_render_from_recorded_run(shock_run, tmp_path, kind):
    out = str(tmp_path / f"{kind}.png")
    summary = render(FigureSpec(kind, shock_run, out))
    assert os.path.exists(out) and os.path.getsize(out) > 0
    series = read_series(os.path.join(shock_run, "series.csv"))
    rep = read_report(os.path.join(shock_run, "shock_report"))
    if kind == "mustar":
        # axes bracket the data and the T_shock marker is in range
        assert summary["xlim"][1] >= rep["T_shock"] >= summary["xlim"][0]
        assert summary["ylim"][1] >= max(series["mu_star"])
    if kind == "slow":
        assert summary["ylim"][1] >= max(series["sup_w0"])
    print(f"[PASS] criterion 10 ({kind}): {summary['n_elements']} elements, "
          f"axes {summary['xlim']}")


def test_criterion_10_cli_exit_codes(shock_run, tmp_path):
    for kind in ("mustar", "fan", "blowup", "slow", "convergence"):
        out = str(tmp_path / f"c_{kind}.png")
        proc = subprocess.run(
            [sys.executable, "-m", "plotkit.cli", kind, shock_run,
             "-o", out], capture_output=True, text=True)
        assert proc.returncode == 0, (kind, proc.stderr)
        assert os.path.getsize(out) > 0
