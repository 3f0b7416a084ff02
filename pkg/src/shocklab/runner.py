"""Experiment orchestration: run, sweep, compare, params.

All outputs are plain text.  The series CSV carries a fixed, versioned
header (schema 1); shock reports are `key = value` files.  Identical
configs (including the seed) produce byte-identical series files.
"""

import os
import time

import numpy as np

from . import cartesian, diagnostics, frame, geo2d, metric, plane
from .config import parse_config, serialize_config
from .errors import NoShock, ShockLabError
from .profiles import Geo2DDataSpec, PlaneDataSpec

SERIES_COLUMNS = (
    "t", "mu_star", "u_star", "theta_star", "max_d1psi", "max_dtpsi",
    "sup_w", "sup_w0", "sup_w1", "sup_w2", "E_fast", "F_fast", "E_slow",
    "F_slow", "K", "res_jacobian", "res_curl", "res_bmu", "res_lnups",
    "res_xbu", "res_xbL")

REPORT_KEYS = (
    "T_shock", "kappa", "r2", "u_star", "theta_star", "blowup_exponent",
    "max_w_sup", "deltastar", "alpha0", "eps0", "delta0")


def _fmt(x):
    return f"{float(x):.17g}"


def write_series(path, series):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("# schema=1\n")
        fh.write(",".join(SERIES_COLUMNS) + "\n")
        n = len(series["t"])
        for i in range(n):
            row = [series.get(c, [0.0] * n)[i] if c in series else 0.0
                   for c in SERIES_COLUMNS]
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def read_series(path):
    with open(path, "r", encoding="utf-8") as fh:
        first = fh.readline().strip()
        if first != "# schema=1":
            raise ShockLabError(f"harness-cli: {path} is not a schema-1 "
                                "series file")
        cols = fh.readline().strip().split(",")
        data = {c: [] for c in cols}
        for line in fh:
            for c, v in zip(cols, line.strip().split(",")):
                data[c].append(float(v))
    return {c: np.array(v) for c, v in data.items()}


def write_snapshot(path, header_cols, arrays, t):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("# schema=1\n")
        fh.write(f"# t = {_fmt(t)}\n")
        fh.write(" ".join(header_cols) + "\n")
        flat = [np.asarray(a).ravel() for a in arrays]
        for vals in zip(*flat):
            fh.write(" ".join(_fmt(v) for v in vals) + "\n")


def read_snapshot(path):
    with open(path, "r", encoding="utf-8") as fh:
        fh.readline()
        t = float(fh.readline().split("=")[1])
        cols = fh.readline().split()
        data = np.loadtxt(fh)
    return t, cols, data


def write_report(path, rep):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for k in REPORT_KEYS:
            if k in rep:
                fh.write(f"{k} = {_fmt(rep[k])}\n")
        for k in sorted(rep):
            if k not in REPORT_KEYS:
                v = rep[k]
                fh.write(f"{k} = {v if isinstance(v, str) else _fmt(v)}\n")


def read_report(path):
    out = {}
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            k, _, v = line.partition("=")
            k = k.strip()
            v = v.strip()
            try:
                out[k] = float(v)
            except ValueError:
                out[k] = v
    return out


# ---------------------------------------------------------------------------
# plane-run diagnostics recorder
# ---------------------------------------------------------------------------

class PlaneRecorder:
    """Appends energy/flux columns to the plane series and optionally
    collects order-zero audit records."""

    def __init__(self, model, du, audit=False):
        self.model = model
        self.rec = diagnostics.EnergyRecorder(du, 1.0)
        self.audit = audit
        self.audit_times = []
        self.audit_fast = []
        self.audit_slow = []

    def fields(self, st):
        geval = metric.eval_fast_metric(self.model, st.psi, check=False)
        Ls = np.stack([1.0 / (1.0 + st.psi) - 1.0, np.zeros_like(st.psi)],
                      axis=-1)
        fb = frame.build_frame(geval, st.mu, Ls, check=False)
        return geval, fb

    def __call__(self, st, series):
        geval, fb = self.fields(st)
        a = st.a
        xb = st.xb_psi
        W = np.stack([st.w, st.w0, st.w1, np.zeros_like(st.w)], axis=-1)
        hinv = metric.eval_slow_metric(self.model, st.psi, W)
        J0 = diagnostics.slow_current_time(hinv, W)
        JH = diagnostics.slow_flux_density(hinv, W, geval, fb)
        area = st.mu / (1.0 + st.psi)
        Theta = np.zeros(st.psi.shape + (3,))
        Theta[..., 2] = 1.0
        gram = diagnostics.null_surface_gram(fb, Theta)
        ff = diagnostics.fast_flux_density(st.mu, a, 0.0)
        dens = {
            "e_fast": diagnostics.fast_energy_density(st.mu, a, xb, 0.0),
            "e_slow": J0 * area,
            "flux_fast_out": ff[-1], "flux_fast_in": ff[0],
            "flux_slow_out": (JH * gram)[-1], "flux_slow_in": (JH * gram)[0],
            "k_dens": np.zeros_like(st.mu),
            "ups": 1.0, "ups_out": 1.0, "ups_in": 1.0,
        }
        self.rec.push(st.t, dens)
        for k in ("E_fast", "F_fast", "E_slow", "F_slow", "K"):
            series.setdefault(k, []).append(self.rec.series[k][-1])
        if self.audit:
            self._push_audit(st, geval, fb, W, hinv)

    def _push_audit(self, st, geval, fb, W, hinv):
        z = np.zeros_like(st.mu)
        Lmu = (st.b + st.mu * st.a) / (2.0 * (1.0 + st.psi))
        h = st.u[1] - st.u[0]
        from .stencils import d_du
        Xbmu = d_du(st.mu, h)
        source = -(st.a * st.b + st.w0 * st.b + st.mu * st.w0 * st.psi)
        self.audit_times.append(st.t)
        self.audit_fast.append({
            "mu": st.mu.copy(), "Lf": st.a.copy(), "Xbf": st.xb_psi.copy(),
            "dthf": z, "ups": 1.0 + z, "Lmu": Lmu, "Xbmu": Xbmu,
            "dthmu": z, "trchi": z, "trk_trans": z, "trk_tan": z,
            "zeta_trans_Th": z, "zeta_tan_Th": z, "source": source,
        })
        # slow identity inhomogeneity: F_0 = -mu * F_slow with
        # F_slow = Q - w0 psi and mu Q = -a b (plane symmetry)
        mu_F_slow = -st.a * st.b - st.mu * st.w0 * st.psi
        wdens, fterm = diagnostics.slow_bulk_density(hinv, W, -mu_F_slow,
                                                     st.mu)
        Theta = np.zeros(st.psi.shape + (3,))
        Theta[..., 2] = 1.0
        self.audit_slow.append({
            "J0": diagnostics.slow_current_time(hinv, W),
            "JH": diagnostics.slow_flux_density(hinv, W, geval, fb),
            "area_factor": st.mu / (1.0 + st.psi),
            "gram": diagnostics.null_surface_gram(fb, Theta),
            "ups": 1.0 + z, "mu": st.mu.copy(),
            "wdens": wdens, "fterm": fterm,
        })


# ---------------------------------------------------------------------------
# run orchestration
# ---------------------------------------------------------------------------

def _build_model(cfg):
    coeffs = {k: cfg[("metric", k)] for k in ("g11", "g22", "g12",
                                              "g01", "g02")
              if cfg[("metric", k)]}
    return metric.make_model(cfg[("metric", "model")],
                             sources=cfg[("metric", "sources")],
                             slow_speed=cfg[("metric", "slow_speed")],
                             coeffs=coeffs)


def _plane_spec(cfg):
    return PlaneDataSpec.from_profile(
        cfg[("data", "profile")], cfg[("data", "lam")],
        eps=cfg[("data", "eps")], seed=cfg[("run", "seed")])


def _geo_spec(cfg):
    return Geo2DDataSpec.from_profile(
        cfg[("data", "profile")], cfg[("data", "lam")],
        eps=cfg[("data", "eps")], seed=cfg[("run", "seed")],
        U0=cfg[("data", "U0")])


def _check_plane_model(cfg):
    if cfg[("run", "solver")] == "plane" \
            and cfg[("metric", "model")] != "model-quadratic":
        from .errors import RangeError
        raise RangeError(
            "harness-cli: the plane solver integrates the quadratic model "
            "problem; use solver = geo2d for custom metrics")


def compute_params(cfg):
    """DataSizeParams of the configured data at t = 0."""
    _check_plane_model(cfg)
    model = _build_model(cfg)
    if cfg[("run", "solver")] == "plane":
        spec = _plane_spec(cfg)
        st = plane.init_plane(spec, cfg[("grid", "nu")],
                              U0=cfg[("data", "U0")])
        gll = 2.0 / (1.0 + st.psi)
        W = np.stack([st.w, st.w0, st.w1, np.zeros_like(st.w)], axis=-1)
        return diagnostics.data_size_params(
            st.psi, st.a, st.xb_psi, gll, W=W,
            eps_configured=cfg[("data", "eps")])
    data = _geo_spec(cfg)
    st = geo2d.init_geo2d(model, data, cfg[("grid", "nu")],
                          cfg[("grid", "ntheta")])
    d = geo2d.spatial_derivatives(st, model)
    return diagnostics.data_size_params(
        st.psi, d.a, d.Xb_psi, d.fc.G_LL, W=st.W,
        grad_psi_tan=d.dth_psi / d.ups, eps_configured=cfg[("data", "eps")])


def run(cfg, out_dir=None):
    """Execute the configured run; writes series.csv, snapshots, and
    shock_report into the output directory.  Returns the report dict.
    NoShock is reported as case I with exit status 0 semantics.
    """
    out = out_dir or cfg[("run", "out")]
    os.makedirs(out, exist_ok=True)
    with open(os.path.join(out, "config.cfg"), "w", encoding="utf-8") as fh:
        fh.write(serialize_config(cfg))
    solver = cfg[("run", "solver")]
    _check_plane_model(cfg)
    t0 = time.time()
    t_max = cfg[("run", "t_max")] or None
    snap_times = cfg[("output", "snap_times")]
    try:
        if solver == "plane":
            rep = _run_plane(cfg, out, t_max, snap_times)
        elif solver == "geo2d":
            rep = _run_geo2d(cfg, out, t_max, snap_times)
        elif solver == "cartesian":
            rep = _run_cartesian(cfg, out, t_max, snap_times)
        elif solver == "compare":
            rep = _run_compare(cfg, out, t_max)
        else:  # pragma: no cover - schema forbids
            raise ShockLabError(f"unknown solver {solver}")
        rep["case"] = "II" if "T_shock" in rep else "I"
    except NoShock as exc:
        rep = {"case": "I", "note": str(exc)}
        params = compute_params(cfg)
        rep.update(params)
    rep["wall_time"] = time.time() - t0
    write_report(os.path.join(out, "shock_report"), rep)
    return rep


def _run_plane(cfg, out, t_max, snap_times):
    model = _build_model(cfg)
    spec = _plane_spec(cfg)
    nu = cfg[("grid", "nu")]
    if t_max is None and plane.deltastar_closed_form(spec) < 1e-8:
        t_max = 20.0  # trivial data: finite case-I budget
    recorder = PlaneRecorder(model, cfg[("data", "U0")] / nu,
                             audit=cfg[("run", "audit")])
    rep, series, snaps, state = plane.run_plane(
        spec, Nu=nu, cfl=cfg[("grid", "cfl")],
        mu_stop=cfg[("run", "mu_stop")], U0=cfg[("data", "U0")],
        t_max=t_max, record=recorder,
        series_stride=cfg[("output", "series_stride")],
        snap_times=snap_times)
    rep["max_w_sup"] = rep.pop("sup_w_run")
    rep.update(compute_params(cfg))
    write_series(os.path.join(out, "series.csv"), series)
    for i, st in enumerate(snaps):
        write_snapshot(
            os.path.join(out, f"snapshot_{i:03d}.txt"),
            ["u", "psi", "a", "b", "mu", "r", "s", "w", "x1"],
            [st.u, st.psi, st.a, st.b, st.mu, st.r, st.s, st.w, st.x1],
            st.t)
    if cfg[("run", "audit")]:
        _write_audits(out, recorder.audit_times, recorder.audit_fast,
                      recorder.audit_slow, cfg[("data", "U0")] / nu, 1.0)
    return rep


def _write_audits(out, times, fast_recs, slow_recs, du, dth):
    fa = diagnostics.fast_energy_audit(times, fast_recs, du, dth)
    sa = diagnostics.slow_energy_audit(times, slow_recs, du, dth)
    with open(os.path.join(out, "audit.csv"), "w", encoding="utf-8") as fh:
        fh.write("# schema=1\n")
        fh.write("t,fast_imbalance,slow_imbalance,fast_E,slow_E\n")
        for i, t in enumerate(times):
            fh.write(",".join(_fmt(v) for v in (
                t, fa["imbalance"][i], sa["imbalance"][i], fa["E"][i],
                sa["E"][i])) + "\n")


def _geo_snapshot(out, i, st):
    uu = st.u[:, None] + 0.0 * st.theta[None, :]
    tt = st.theta[None, :] + 0.0 * st.u[:, None]
    write_snapshot(
        os.path.join(out, f"snapshot_{i:03d}.txt"),
        ["u", "theta", "psi", "b", "mu", "L1s", "L2s", "x1", "x2",
         "w", "w0", "w1", "w2"],
        [uu, tt, st.psi, st.b, st.mu, st.Ls1, st.Ls2, st.x1,
         tt + st.x2s, st.W[..., 0], st.W[..., 1], st.W[..., 2],
         st.W[..., 3]],
        st.t)


def _run_geo2d(cfg, out, t_max, snap_times):
    model = _build_model(cfg)
    data = _geo_spec(cfg)
    run_obj = geo2d.Geo2DRun(
        model, data, Nu=cfg[("grid", "nu")], Ntheta=cfg[("grid", "ntheta")],
        cfl=cfg[("grid", "cfl")], mu_stop=cfg[("run", "mu_stop")],
        t_max=t_max, fast_a_mode=cfg[("run", "fast_a_mode")],
        audit=cfg[("run", "audit")])
    try:
        run_obj.advance(series_stride=cfg[("output", "series_stride")],
                        snap_times=snap_times)
        rep = run_obj.report()
        rep["max_w_sup"] = rep.pop("sup_w_run")
    finally:
        series = dict(run_obj.series)
        for k in ("E_fast", "F_fast", "E_slow", "F_slow", "K"):
            if run_obj.recorder is not None:
                series[k] = run_obj.recorder.series[k]
        write_series(os.path.join(out, "series.csv"), series)
        for i, st in enumerate(run_obj.snapshots):
            _geo_snapshot(out, i, st)
        if cfg[("run", "audit")] and run_obj.audit_times:
            _write_audits(out, run_obj.audit_times, run_obj.audit_fast,
                          run_obj.audit_slow, run_obj.state.du,
                          run_obj.state.dth)
    return rep


def _run_cartesian(cfg, out, t_max, snap_times):
    model = _build_model(cfg)
    data = _geo_spec(cfg)
    if t_max is None:
        params = compute_params(cfg)
        t_max = 0.5 / max(params["deltastar"], 1e-6)
    state, snaps = cartesian.run_cartesian(
        model, data, t_max, Nx=cfg[("grid", "nx")],
        Ntheta=cfg[("grid", "ntheta")], cfl=cfg[("grid", "cfl")],
        x_lo=cfg[("grid", "x_lo")], x_hi=cfg[("grid", "x_hi")],
        snap_times=snap_times or [t_max])
    for i, st in enumerate(snaps or [state]):
        xx = st.x1[:, None] + 0.0 * st.x2[None, :]
        tt = st.x2[None, :] + 0.0 * st.x1[:, None]
        write_snapshot(
            os.path.join(out, f"snapshot_{i:03d}.txt"),
            ["x1", "x2", "psi", "dtpsi", "w", "w0", "w1", "w2"],
            [xx, tt, st.psi, st.pt, st.W[..., 0], st.W[..., 1],
             st.W[..., 2], st.W[..., 3]],
            st.t)
    rep = compute_params(cfg)
    rep["t_end"] = state.t
    return rep


def _run_compare(cfg, out, t_max):
    """Run geo2d and cartesian on the same data and difference them."""
    model = _build_model(cfg)
    data = _geo_spec(cfg)
    run_obj = geo2d.Geo2DRun(
        model, data, Nu=cfg[("grid", "nu")], Ntheta=cfg[("grid", "ntheta")],
        cfl=cfg[("grid", "cfl")], mu_stop=cfg[("run", "mu_stop")],
        t_max=1e30, record_energies=False)
    dstar = run_obj.params["deltastar"]
    t_cmp = t_max if t_max else 0.3 / max(dstar, 1e-6)
    run_obj.t_max = t_cmp + 1.0
    run_obj.advance(snap_times=[t_cmp], until=t_cmp)
    geo_state = run_obj.snapshots[-1]
    cart_state, _ = cartesian.run_cartesian(
        model, data, t_cmp, Nx=cfg[("grid", "nx")],
        Ntheta=cfg[("grid", "ntheta")], cfl=min(cfg[("grid", "cfl")], 0.4),
        x_lo=cfg[("grid", "x_lo")], x_hi=cfg[("grid", "x_hi")])
    report = cartesian.compare_to_geo(cart_state, geo_state, model)
    with open(os.path.join(out, "compare.csv"), "w", encoding="utf-8") as fh:
        fh.write("# schema=1\n")
        fh.write("field,max_rel,l2_rel\n")
        for name in ("psi", "dt_psi", "d1_psi", "d2_psi", "W0", "W1",
                     "W2", "W3"):
            fh.write(f"{name},{_fmt(report['max_' + name])},"
                     f"{_fmt(report['l2_' + name])}\n")
    rep = dict(run_obj.params)
    rep.update({f"cmp_{k}": v for k, v in report.items()})
    rep["t_compare"] = t_cmp
    return rep


def sweep(cfg, key, values, out_dir=None):
    """Repeat the run over values of a numeric config key; aggregate the
    shock reports into sweep.csv.  Per-run failures are recorded and the
    sweep continues."""
    out = out_dir or cfg[("run", "out")]
    os.makedirs(out, exist_ok=True)
    section, _, name = key.partition(".")
    rows = []
    for i, v in enumerate(values):
        sub = dict(cfg.values)
        from .config import RunConfig
        sub_cfg = RunConfig(sub)
        sub_cfg[(section, name)] = v
        point_dir = os.path.join(out, f"point_{i:03d}")
        try:
            rep = run(sub_cfg, out_dir=point_dir)
            status = "ok"
        except ShockLabError as exc:
            rep = {"note": str(exc)}
            status = "failed"
        row = {"index": i, "value": v, "status": status}
        row.update({k: rep[k] for k in rep if isinstance(rep[k], (int, float))})
        rows.append(row)
    cols = ["index", "value", "status"]
    for r in rows:
        for k in r:
            if k not in cols:
                cols.append(k)
    with open(os.path.join(out, "sweep.csv"), "w", encoding="utf-8") as fh:
        fh.write("# schema=1\n")
        fh.write(",".join(cols) + "\n")
        for r in rows:
            fh.write(",".join(
                str(r.get(c, "")) if c in ("status",)
                else ("" if c not in r else _fmt(r[c]) if not isinstance(r[c], str) else r[c])
                for c in cols) + "\n")
    return rows


def compare_dirs(geo_dir, cart_dir, out_path=None):
    """File-level comparison of recorded snapshots from two run dirs."""
    geo_cfg = parse_config(os.path.join(geo_dir, "config.cfg"))
    model = _build_model(geo_cfg)
    geo_t, geo_cols, geo_data = read_snapshot(_last_snapshot(geo_dir))
    cart_t, cart_cols, cart_data = read_snapshot(_last_snapshot(cart_dir))
    nu = geo_cfg[("grid", "nu")]
    nth = geo_cfg[("grid", "ntheta")]
    shape = (nu + 1, nth)

    def geo_col(name):
        return geo_data[:, geo_cols.index(name)].reshape(shape)

    u = geo_col("u")[:, 0]
    theta = geo_col("theta")[0, :]
    W = np.stack([geo_col(c) for c in ("w", "w0", "w1", "w2")], axis=-1)
    st = geo2d.Geo2DState(
        geo_t, u, theta, geo_col("psi"), geo_col("b"), geo_col("mu"),
        geo_col("L1s"), geo_col("L2s"), geo_col("x1"),
        geo_col("x2") - theta[None, :], W)

    nx = cart_data[:, cart_cols.index("x1")]
    x1_ax = np.unique(nx)
    x2_ax = np.unique(cart_data[:, cart_cols.index("x2")])
    cshape = (len(x1_ax), len(x2_ax))

    def cart_col(name):
        return cart_data[:, cart_cols.index(name)].reshape(cshape)

    cst = cartesian.CartesianState(
        cart_t, x1_ax, x2_ax, cart_col("psi"), cart_col("dtpsi"),
        np.stack([cart_col(c) for c in ("w", "w0", "w1", "w2")], axis=-1))
    report = cartesian.compare_to_geo(cst, st, model)
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write("# schema=1\n")
            fh.write("field,max_rel,l2_rel\n")
            for name in ("psi", "dt_psi", "d1_psi", "d2_psi", "W0", "W1",
                         "W2", "W3"):
                fh.write(f"{name},{_fmt(report['max_' + name])},"
                         f"{_fmt(report['l2_' + name])}\n")
    return report


def _last_snapshot(run_dir):
    snaps = sorted(f for f in os.listdir(run_dir)
                   if f.startswith("snapshot_"))
    if not snaps:
        raise ShockLabError(f"harness-cli: no snapshots in {run_dir}")
    return os.path.join(run_dir, snaps[-1])
