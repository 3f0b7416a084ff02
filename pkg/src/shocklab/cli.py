"""Command-line surface: run / sweep / compare / params."""

import argparse
import sys

from .config import RunConfig, parse_config
from .errors import ShockLabError
from . import runner


def _load(path, args):
    cfg = parse_config(path) if path else RunConfig()
    if args.out:
        cfg[("run", "out")] = args.out
    if args.seed is not None:
        cfg[("run", "seed")] = args.seed
    if args.quiet:
        cfg[("run", "quiet")] = True
    return cfg


def main(argv=None):
    ap = argparse.ArgumentParser(
        prog="shocklab",
        description="Shock-formation simulation laboratory for a coupled "
                    "fast/slow quasilinear wave system")
    ap.add_argument("--out", help="override output directory")
    ap.add_argument("--seed", type=int, help="override perturbation seed")
    ap.add_argument("--quiet", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute one configured run")
    p_run.add_argument("config", help="path to the run configuration")

    p_sweep = sub.add_parser("sweep", help="repeat a run over values of "
                                           "one numeric key")
    p_sweep.add_argument("config")
    p_sweep.add_argument("--key", required=True,
                         help="dotted key, e.g. grid.nu or data.lam")
    p_sweep.add_argument("--values", required=True,
                         help="comma-separated values")

    p_cmp = sub.add_parser("compare", help="difference a geo2d run dir "
                                           "against a cartesian run dir")
    p_cmp.add_argument("geo_dir")
    p_cmp.add_argument("cart_dir")

    p_par = sub.add_parser("params", help="print the data-size parameters")
    p_par.add_argument("config")

    args = ap.parse_args(argv)
    try:
        if args.command == "run":
            cfg = _load(args.config, args)
            rep = runner.run(cfg)
            if not cfg[("run", "quiet")]:
                for k in ("case", "T_shock", "kappa", "deltastar"):
                    if k in rep:
                        print(f"{k} = {rep[k]}")
            return 0
        if args.command == "sweep":
            cfg = _load(args.config, args)
            values = [float(v) for v in args.values.split(",")]
            rows = runner.sweep(cfg, args.key, values)
            if not cfg[("run", "quiet")]:
                for r in rows:
                    print(f"point {r['index']}: {args.key} = {r['value']} "
                          f"-> {r['status']}")
            return 0
        if args.command == "compare":
            rep = runner.compare_dirs(args.geo_dir, args.cart_dir)
            for k in sorted(rep):
                print(f"{k} = {rep[k]}")
            return 0
        if args.command == "params":
            cfg = _load(args.config, args)
            params = runner.compute_params(cfg)
            for k in ("alpha0", "eps0", "eps0_measured", "delta0",
                      "deltastar"):
                print(f"{k} = {params[k]:.17g}")
            return 0
    except ShockLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
