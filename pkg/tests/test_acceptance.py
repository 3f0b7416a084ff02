"""Acceptance suite: one test per criterion, each printing a pass line.

Tolerances are pinned to their stated values; runtimes are measured
against the stated budgets.  Criterion 10 (figure rendering) lives in the
plotkit package's own test suite.
"""

import time

import numpy as np
import pytest

import shocklab as sl
from shocklab import cartesian, diagnostics as dg, geo2d, plane
from shocklab.profiles import Geo2DDataSpec, PlaneDataSpec
from shocklab.runner import PlaneRecorder


def _report(name, runtime, budget, detail=""):
    print(f"[PASS] {name} ({runtime:.2f}s < {budget:.0f}s) {detail}")


@pytest.fixture(scope="module")
def model():
    return sl.make_model(sources="plane-model")


@pytest.fixture(scope="module")
def perturbed_plane_run():
    """Shared by criteria 4-6: ramp with eps = 0.01 delta."""
    spec0 = PlaneDataSpec.from_profile("ramp", 0.1)
    st0 = plane.init_plane(spec0, 256)
    delta = float(np.max(np.abs(st0.xb_psi)))
    eps = 0.01 * delta
    spec = PlaneDataSpec.from_profile("ramp", 0.1, eps=eps, seed=20)
    t0 = time.time()
    rep, series, _, st = plane.run_plane(spec, Nu=256, cfl=2.0, mu_stop=0.05)
    return {"rep": rep, "series": series, "eps": eps,
            "runtime": time.time() - t0}


def test_criterion_1_frame_algebra_suite(model):
    t0 = time.time()
    rng = np.random.default_rng(1)
    psi = rng.uniform(-0.1, 0.1, 1000)
    ge = sl.eval_fast_metric(model, psi)
    mu, Ls, _ = sl.initial_eikonal(ge)
    fb = sl.build_frame(ge, mu, Ls)
    worst = float(np.max(sl.frame_residuals(fb, ge)))
    runtime = time.time() - t0
    assert worst <= 1e-12
    assert runtime < 1.0
    _report("criterion 1: frame algebra (1000 states)", runtime, 1,
            f"max residual {worst:.2e}")


def test_criterion_2_simple_wave_exactness():
    t0 = time.time()
    spec = PlaneDataSpec.from_profile("ramp", 0.1)
    rep, series, _, st = plane.run_plane(spec, Nu=512, cfl=2.0, mu_stop=0.05,
                                         series_stride=2)
    runtime = time.time() - t0
    mu_err = float(np.max(np.abs(st.mu - plane.simple_wave_mu(spec, st.t,
                                                              st.u))))
    assert mu_err <= 1e-8
    for f in (st.a, st.r, st.s):
        assert float(np.max(np.abs(f))) <= 1e-12
    assert abs(rep["T_shock"] - 10.0) <= 1e-4
    assert rep["u_star"] == 1.0
    assert runtime < 5.0
    _report("criterion 2: simple-wave exactness", runtime, 5,
            f"mu err {mu_err:.2e}, T_shock {rep['T_shock']:.6f}")


def test_criterion_3_shock_time_law():
    t0 = time.time()
    devs = []
    for lam in (0.02, 0.05, 0.1):
        spec = PlaneDataSpec.from_profile("bump", lam)
        rep, *_ = plane.run_plane(spec, Nu=512, cfl=2.0, mu_stop=0.05)
        dev = abs(rep["T_shock"] * rep["deltastar"] - 1.0)
        assert dev <= 3 * lam + 0.02, (lam, dev)
        devs.append(dev)
    assert devs[0] <= devs[2] + 1e-3  # decreasing with amplitude
    runtime = time.time() - t0
    assert runtime < 60.0
    _report("criterion 3: shock-time law", runtime, 60,
            f"|T d* - 1| = {['%.4f' % d for d in devs]}")


def test_criterion_4_mustar_linearity(perturbed_plane_run):
    rep = perturbed_plane_run["rep"]
    runtime = perturbed_plane_run["runtime"]
    assert rep["r2"] >= 0.999
    assert abs(rep["kappa"] / rep["deltastar"] - 1.0) <= 0.05 + 3 * 0.1
    assert runtime < 10.0
    _report("criterion 4: mu_star linearity", runtime, 10,
            f"R2 {rep['r2']:.6f}, kappa/d* {rep['kappa']/rep['deltastar']:.4f}")


def test_criterion_5_blowup_rate(perturbed_plane_run):
    rep = perturbed_plane_run["rep"]
    runtime = perturbed_plane_run["runtime"]
    assert rep["blowup_product_variation"] <= 0.15
    assert abs(rep["blowup_exponent"] - 1.0) <= 0.05
    assert runtime < 10.0
    _report("criterion 5: blowup rate", runtime, 10,
            f"exponent {rep['blowup_exponent']:.4f}, "
            f"product variation {rep['blowup_product_variation']:.3f}")


def test_criterion_6_slow_wave_boundedness(model, perturbed_plane_run):
    t0 = time.time()
    # plane side (shared run)
    eps_p = perturbed_plane_run["eps"]
    assert perturbed_plane_run["rep"]["sup_w_run"] <= 10 * eps_p
    # 2D side: bump data with eps = 0.01 delta
    data0 = Geo2DDataSpec.from_profile("bump", 0.1)
    run0 = geo2d.Geo2DRun(model, data0, Nu=64, Ntheta=8, mu_stop=0.05)
    delta = run0.params["delta0"]
    eps = 0.01 * delta
    data = Geo2DDataSpec.from_profile("bump", 0.1, eps=eps, seed=21)
    rep, series, _, run = geo2d.run_geo2d(model, data, Nu=96, Ntheta=16,
                                          cfl=0.5, mu_stop=0.05,
                                          series_stride=10)
    sup_w = rep["sup_w_run"]
    runtime = time.time() - t0 + perturbed_plane_run["runtime"]
    assert sup_w <= 10 * eps, (sup_w, eps)
    assert runtime < 120.0
    _report("criterion 6: slow-wave boundedness", runtime, 120,
            f"plane sup {perturbed_plane_run['rep']['sup_w_run']:.4f} "
            f"<= {10*eps_p:.4f}; geo2d sup {sup_w:.5f} <= {10*eps:.5f}")


def test_criterion_7_cross_solver(model):
    t0 = time.time()
    # (a) plane data through geo2d vs the plane solver, five output times
    times = [2.0, 4.0, 6.0, 8.0, 9.0]
    spec = PlaneDataSpec.from_profile("ramp", 0.1)
    _, _, psnaps, _ = plane.run_plane(spec, Nu=96, cfl=0.5, mu_stop=0.04,
                                      snap_times=times)
    data = Geo2DDataSpec.from_profile("ramp", 0.1)
    run = geo2d.Geo2DRun(model, data, Nu=96, Ntheta=8, cfl=0.5,
                         mu_stop=0.06, record_energies=False)
    run.advance(snap_times=times, until=times[-1], series_stride=100)
    worst = 0.0
    for gs, ps in zip(run.snapshots, psnaps):
        d = geo2d.spatial_derivatives(gs, model)
        for gf, pf in ((gs.psi[:, 0], ps.psi), (gs.b[:, 0], ps.b),
                       (gs.mu[:, 0], ps.mu), (gs.x1[:, 0], ps.x1),
                       (d.a[:, 0], ps.a)):
            worst = max(worst, float(np.max(np.abs(gf - pf))))
        worst = max(worst, float(np.max(np.abs(gs.W))))
    assert worst <= 1e-6, worst

    # (b) perturbed 2D geo2d vs cartesian oracle at t = 0.3/deltastar
    errs = []
    for (nu, nth, nx) in ((128, 64, 512), (256, 128, 1024)):
        data2 = Geo2DDataSpec.from_profile("bump", 0.1, eps=0.004, seed=6)
        grun = geo2d.Geo2DRun(model, data2, Nu=nu, Ntheta=nth, cfl=0.4,
                              mu_stop=0.05, t_max=10.0,
                              record_energies=False)
        t_cmp = 0.3 / grun.params["deltastar"]
        grun.advance(until=t_cmp, series_stride=1000)
        cst, _ = cartesian.run_cartesian(model, data2, t_cmp, Nx=nx,
                                         Ntheta=nth)
        crep = cartesian.compare_to_geo(cst, grun.state, model)
        errs.append(max(crep["max_psi"], crep["max_dt_psi"],
                        crep["max_d1_psi"]))
    runtime = time.time() - t0
    assert errs[-1] <= 1e-3, errs
    order = float(np.log2(errs[0] / errs[1]))
    assert order >= 2.0, (errs, order)
    assert runtime < 300.0
    _report("criterion 7: cross-solver oracles", runtime, 300,
            f"plane-geo2d {worst:.2e}; geo-cart {errs[-1]:.2e}, "
            f"order {order:.2f}")


def test_criterion_8_geometric_identity_monitors(model):
    t0 = time.time()
    res = {}
    for nu, nth in ((96, 24), (192, 48)):
        data = Geo2DDataSpec.from_profile("bump", 0.1, eps=0.004, seed=6)
        run = geo2d.Geo2DRun(model, data, Nu=nu, Ntheta=nth, cfl=0.4,
                             mu_stop=0.05, t_max=10.0,
                             record_energies=False)
        run.advance(until=0.5, series_stride=5)
        res[nu] = (max(run.series["res_jacobian"][1:]),
                   max(run.series["res_lnups"][2:]),
                   max(run.series["res_curl"][1:]))
    runtime = time.time() - t0
    for k, name in enumerate(("jacobian", "lnups-trchi", "curl")):
        ratio = res[96][k] / max(res[192][k], 1e-300)
        # O(h^2) residuals shrink by ~4x when h halves
        assert ratio >= 2.0, (name, res)
    _report("criterion 8: geometric-identity monitors", runtime, 300,
            f"halving ratios {[f'{res[96][k]/res[192][k]:.1f}' for k in range(3)]}")


def test_criterion_9_energy_machinery(model):
    t0 = time.time()
    # coercivity on 1e4 admissible samples
    rng = np.random.default_rng(99)
    n = 10000
    psi = rng.uniform(-0.05, 0.05, n)
    ge = sl.eval_fast_metric(model, psi)
    mu, Ls, _ = sl.initial_eikonal(ge)
    fb = sl.build_frame(ge, mu, Ls)
    W = rng.uniform(-0.05, 0.05, (n, 4))
    hinv = sl.eval_slow_metric(model, psi, W)
    J0, JH = dg.check_slow_coercivity(hinv, W, ge, fb)
    assert np.all(J0 > 0.0) and np.all(JH > 0.0)

    # order-zero audits on a short smooth run converge to balance
    imb = {}
    for nu in (128, 256):
        spec = PlaneDataSpec.from_profile("bump", 0.08, eps=0.01, seed=5)
        rec = PlaneRecorder(model, 1.0 / nu, audit=True)
        st = plane.init_plane(spec, nu)
        rec(st, {})
        while st.t < 0.8 - 1e-12:
            st = plane.step_plane(st, 1.0 / nu, spec)
            rec(st, {})
        fa = dg.fast_energy_audit(rec.audit_times, rec.audit_fast,
                                  1.0 / nu, 1.0)
        sa = dg.slow_energy_audit(rec.audit_times, rec.audit_slow,
                                  1.0 / nu, 1.0)
        imb[nu] = (np.max(np.abs(fa["imbalance"])),
                   np.max(np.abs(sa["imbalance"])))
    for k in range(2):
        if imb[128][k] > 1e-7:
            assert np.log2(imb[128][k] / imb[256][k]) >= 1.5, imb
    runtime = time.time() - t0
    _report("criterion 9: energy machinery", runtime, 300,
            f"min J0 {float(np.min(J0)):.3e}; audit imbalance "
            f"fast {imb[256][0]:.1e} slow {imb[256][1]:.1e}")
