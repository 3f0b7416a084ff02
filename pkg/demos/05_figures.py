"""Record a perturbed shock run and render the standard figures.

Produces runs/demo_figures/ with the series, snapshots, and shock report,
then renders mu_star(t), the characteristic fan, the blowup-rate fit, and
the slow-wave sup norms with plotkit.
"""

import os

from plotkit import FigureSpec, render
from shocklab import runner
from shocklab.config import RunConfig

out = "runs/demo_figures"
cfg = RunConfig()
cfg[("run", "out")] = out
cfg[("run", "seed")] = 3
cfg[("data", "eps")] = 0.002
cfg[("grid", "nu")] = 256
cfg[("grid", "cfl")] = 2.0
cfg[("output", "snap_times")] = [1.0, 3.0, 5.0, 7.0, 9.0]
report = runner.run(cfg)
print("run complete: T_shock = %.4f" % report["T_shock"])

runner.sweep(cfg, "data.lam", [0.02, 0.05, 0.1], out_dir=out)
for kind in ("mustar", "fan", "blowup", "slow", "convergence"):
    summary = render(FigureSpec(kind, out, os.path.join(out, kind + ".png")))
    print("wrote", summary["path"])
