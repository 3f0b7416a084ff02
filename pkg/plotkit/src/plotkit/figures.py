"""The five standard figures rendered from recorded runs.

Every renderer returns a structural summary (output path, axis ranges,
number of plotted elements) so tests can assert correctness without golden
images.  Rendering is deterministic for fixed inputs.
"""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .io import (MissingColumn, SchemaError, need, read_report, read_series,
                 read_snapshot, read_sweep, run_dir_files)

KINDS = ("mustar", "fan", "blowup", "slow", "convergence")


class FigureSpec:
    """What to draw: input paths, figure kind, output image path."""

    def __init__(self, kind, run_dir, out_path, dpi=130):
        if kind not in KINDS:
            raise SchemaError(f"unknown figure kind {kind!r}; "
                              f"expected one of {KINDS}")
        self.kind = kind
        self.run_dir = run_dir
        self.out_path = out_path
        self.dpi = dpi


def _finish(fig, ax, spec, n_elements):
    fig.savefig(spec.out_path, dpi=spec.dpi)
    xlim, ylim = ax.get_xlim(), ax.get_ylim()
    plt.close(fig)
    return {"path": spec.out_path, "kind": spec.kind,
            "xlim": xlim, "ylim": ylim, "n_elements": n_elements}


def render_mustar(spec):
    files = run_dir_files(spec.run_dir)
    series = read_series(files["series"])
    t, mu = need(series, "t", "mu_star")
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(t, mu, lw=1.5, label="mu_star(t)")
    n = 1
    if files["report"]:
        rep = read_report(files["report"])
        if "T_shock" in rep and "kappa" in rep:
            T, k = rep["T_shock"], rep["kappa"]
            tt = np.linspace(t[0], T, 64)
            ax.plot(tt, k * (T - tt), "--", lw=1.0, label="linear fit")
            ax.axvline(T, color="k", lw=0.8, alpha=0.6)
            ax.annotate(f"T_shock = {T:.3f}", (T, 0.5),
                        textcoords="offset points", xytext=(-8, 0),
                        ha="right", fontsize=9)
            n += 2
    ax.set_xlabel("t")
    ax.set_ylabel("mu_star")
    ax.set_ylim(bottom=0.0)
    ax.legend(loc="upper right", fontsize=9)
    ax.set_title("Inverse foliation density minimum")
    return _finish(fig, ax, spec, n)


def render_fan(spec):
    files = run_dir_files(spec.run_dir)
    if not files["snapshots"]:
        raise MissingColumn(f"no snapshots in {spec.run_dir} for the fan")
    times, curves, u_sel = [], [], None
    for path in files["snapshots"]:
        t, table = read_snapshot(path)
        u, x1 = need(table, "u", "x1")
        uu = np.unique(u)
        if u_sel is None:
            u_sel = uu[np.linspace(0, len(uu) - 1, 11).astype(int)]
        times.append(t)
        row = []
        for us in u_sel:
            mask = u == us
            row.append(float(np.mean(x1[mask])))  # theta_0 slice/average
        curves.append(row)
    curves = np.array(curves)  # (n_times, 11)
    fig, ax = plt.subplots(figsize=(6, 4))
    for j in range(curves.shape[1]):
        ax.plot(curves[:, j], times, lw=1.0)
    ax.set_xlabel("x^1")
    ax.set_ylabel("t")
    ax.set_title("Characteristic fan (u-decile footprints)")
    return _finish(fig, ax, spec, curves.shape[1])


def render_blowup(spec):
    files = run_dir_files(spec.run_dir)
    series = read_series(files["series"])
    mu, d1 = need(series, "mu_star", "max_d1psi")
    mask = (mu <= 0.8) & (d1 > 0)
    if np.count_nonzero(mask) < 3:
        mask = d1 > 0
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.loglog(1.0 / mu[mask], d1[mask], ".", ms=3, label="max |d1 psi|")
    n = 1
    if files["report"]:
        rep = read_report(files["report"])
        if "blowup_exponent" in rep and np.isfinite(rep["blowup_exponent"]):
            x = 1.0 / mu[mask]
            c = d1[mask][-1] / x[-1] ** rep["blowup_exponent"]
            ax.loglog(x, c * x ** rep["blowup_exponent"], "--", lw=1.0,
                      label=f"slope {rep['blowup_exponent']:.3f}")
            n += 1
    ax.set_xlabel("1 / mu_star")
    ax.set_ylabel("max |d1 psi|")
    ax.legend(fontsize=9)
    ax.set_title("Transversal-derivative blowup rate")
    return _finish(fig, ax, spec, n)


def render_slow(spec):
    files = run_dir_files(spec.run_dir)
    series = read_series(files["series"])
    (t,) = need(series, "t")
    fig, ax = plt.subplots(figsize=(6, 4))
    n = 0
    for c in ("sup_w", "sup_w0", "sup_w1", "sup_w2"):
        if c in series:
            ax.plot(t, series[c], lw=1.2, label=c)
            n += 1
    if n == 0:
        raise MissingColumn("no slow-wave sup-norm columns in the series")
    ax.set_xlabel("t")
    ax.set_ylabel("sup norm")
    ax.set_title("Slow-wave sup norms (bounded up to the shock)")
    ax.legend(fontsize=9)
    return _finish(fig, ax, spec, n)


def render_convergence(spec):
    files = run_dir_files(spec.run_dir)
    if not files["sweep"]:
        raise MissingColumn(f"no sweep.csv in {spec.run_dir}")
    sweep = read_sweep(files["sweep"])
    vals, = need(sweep, "value")
    fig, ax = plt.subplots(figsize=(6, 4))
    n = 0
    if "T_shock" in sweep and "deltastar" in sweep:
        dev = np.abs(np.asarray(sweep["T_shock"])
                     * np.asarray(sweep["deltastar"]) - 1.0)
        ax.loglog(vals, np.maximum(dev, 1e-16), "o-", lw=1.2,
                  label="|T_shock deltastar - 1|")
        n += 1
    for c in sorted(sweep):
        if c.startswith("cmp_max_"):
            ax.loglog(vals, np.maximum(np.asarray(sweep[c], dtype=float),
                                       1e-16), "s--", lw=1.0, label=c)
            n += 1
            break
    if n == 0:
        raise MissingColumn("sweep.csv lacks T_shock/deltastar or cmp_ "
                            "columns to plot")
    ax.set_xlabel("swept value")
    ax.set_ylabel("deviation")
    ax.set_title("Sweep convergence")
    ax.legend(fontsize=9)
    return _finish(fig, ax, spec, n)


RENDERERS = {
    "mustar": render_mustar,
    "fan": render_fan,
    "blowup": render_blowup,
    "slow": render_slow,
    "convergence": render_convergence,
}


def render(spec):
    """Render one figure; returns the structural summary dict."""
    return RENDERERS[spec.kind](spec)
