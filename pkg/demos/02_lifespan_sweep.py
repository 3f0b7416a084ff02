"""Lifespan law: T_shock * deltastar -> 1 as the data amplitude shrinks.

Sweeps the bump-profile amplitude and aggregates the shock reports; the
deviation |T_shock * deltastar - 1| is O(amplitude).
"""

from shocklab.config import RunConfig
from shocklab import runner

cfg = RunConfig()
cfg[("run", "out")] = "runs/demo_sweep"
cfg[("data", "profile")] = "bump"
cfg[("grid", "nu")] = 512
cfg[("grid", "cfl")] = 2.0

rows = runner.sweep(cfg, "data.lam", [0.02, 0.05, 0.1])
print(f"{'lam':>6} {'T_shock':>10} {'deltastar':>10} {'|T d* - 1|':>12}")
for r in rows:
    dev = abs(r["T_shock"] * r["deltastar"] - 1.0)
    print(f"{r['value']:>6.2f} {r['T_shock']:>10.4f} "
          f"{r['deltastar']:>10.5f} {dev:>12.5f}")
print("aggregate written to runs/demo_sweep/sweep.csv")
