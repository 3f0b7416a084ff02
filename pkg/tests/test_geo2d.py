"""2D geometric-coordinate solver: reductions, MMS, monitors."""

import numpy as np
import pytest

import shocklab as sl
from shocklab import geo2d, plane
from shocklab.errors import NoShock
from shocklab.geo2d import Geo2DRun, Geo2DState, spatial_derivatives
from shocklab.metric import MetricModel, zero_sources
from shocklab.perturb import _bump, _bump_prime
from shocklab.profiles import Geo2DDataSpec, PlaneDataSpec


@pytest.fixture(scope="module")
def model():
    return sl.make_model(sources="plane-model")


def flat_model():
    return MetricModel(
        lambda p: np.zeros(np.shape(p) + (3, 3)),
        lambda p, W: np.broadcast_to(np.diag([-1.0, 0.25, 0.25]),
                                     np.shape(p) + (3, 3)).copy(),
        zero_sources())


def test_init_trivial(model):
    data = Geo2DDataSpec.from_profile("ramp", 0.0)
    st = geo2d.init_geo2d(model, data, Nu=32, Ntheta=8)
    assert np.max(np.abs(st.psi)) == 0.0
    assert np.max(np.abs(st.mu - 1.0)) == 0.0
    assert np.max(np.abs(st.Ls1)) == 0.0
    assert np.max(np.abs(st.W)) == 0.0


def test_init_model_plane_profile(model):
    data = Geo2DDataSpec.from_profile("ramp", 0.1)
    st = geo2d.init_geo2d(model, data, Nu=32, Ntheta=8)
    assert np.allclose(st.mu, 1.0 + st.psi)
    assert np.allclose(st.Ls1, 1.0 / (1.0 + st.psi) - 1.0)


def test_init_curl_constraint_exact(model):
    data = Geo2DDataSpec.from_profile("bump", 0.05, eps=0.01, seed=4)
    # mixed partials of the analytic perturbation commute
    pw = data.pert_w
    uu = np.linspace(0.05, 0.95, 41)[:, None]
    tt = np.linspace(0.0, 1.0, 17)[None, :]
    h = 1e-6
    d_th_of_du = (pw.du(uu, tt + h) - pw.du(uu, tt - h)) / (2 * h)
    d_u_of_dth = (pw.dtheta(uu + h, tt) - pw.dtheta(uu - h, tt)) / (2 * h)
    assert np.max(np.abs(d_th_of_du - d_u_of_dth)) < 1e-6
    # solver-level residual at t = 0 is pure stencil error: 4th order
    res = {}
    for nu in (64, 128):
        run = Geo2DRun(model, data, Nu=nu, Ntheta=nu // 2, mu_stop=0.05)
        d = spatial_derivatives(run.state, model)
        res[nu] = np.max(np.abs(run._curl_residual(run.state, d)))
    assert res[64] < 1e-2
    assert res[64] / res[128] > 5.0, res


def test_symmetry_preservation(model):
    data = Geo2DDataSpec.from_profile("ramp", 0.1)
    run = Geo2DRun(model, data, Nu=48, Ntheta=8, cfl=0.4, mu_stop=0.5)
    run.advance(until=1.0, series_stride=50)
    st = run.state
    for f in (st.psi, st.b, st.mu, st.Ls1, st.Ls2, st.x1, st.x2s):
        assert np.max(f.max(axis=1) - f.min(axis=1)) <= 1e-10


def test_plane_reduction_matches_plane_solver(model):
    """theta-independent geo2d run equals the plane solver field by field."""
    spec = PlaneDataSpec.from_profile("ramp", 0.1)
    times = [1.0, 3.0]
    prep, pseries, psnaps, pstate = plane.run_plane(
        spec, Nu=64, cfl=1.0, mu_stop=0.3, snap_times=times)
    data = Geo2DDataSpec.from_profile("ramp", 0.1)
    run = Geo2DRun(model, data, Nu=64, Ntheta=8, cfl=0.4, mu_stop=0.05)
    run.advance(snap_times=times, until=times[-1])
    assert len(run.snapshots) == len(psnaps) == len(times)
    for gsnap, psnap in zip(run.snapshots, psnaps):
        assert abs(gsnap.t - psnap.t) < 1e-10
        for gf, pf in ((gsnap.psi, psnap.psi), (gsnap.b, psnap.b),
                       (gsnap.mu, psnap.mu), (gsnap.x1, psnap.x1)):
            assert np.max(np.abs(gf[:, 0] - pf)) < 1e-6
        assert np.max(np.abs(gsnap.W)) < 1e-12


def test_zero_data_fixed_point_and_noshock(model):
    data = Geo2DDataSpec.from_profile("ramp", 0.0)
    run = Geo2DRun(model, data, Nu=32, Ntheta=8, mu_stop=0.05, t_max=0.5)
    with pytest.raises(NoShock):
        run.advance(series_stride=10)
    st = run.state
    assert np.max(np.abs(st.psi)) == 0.0
    assert np.max(np.abs(st.mu - 1.0)) == 0.0
    assert np.max(np.abs(st.W)) == 0.0


def test_eikonal_rhs_plane_closed_form(model):
    data = Geo2DDataSpec.from_profile("ramp", 0.1)
    st = geo2d.init_geo2d(model, data, Nu=48, Ntheta=8)
    d = spatial_derivatives(st, model)
    Lmu, _, _, lx1, _ = geo2d.eikonal_rhs(st, d)
    expect = (st.b + st.mu * d.a) / (2.0 * (1.0 + st.psi))
    assert np.max(np.abs(Lmu - expect)) < 1e-10
    assert np.max(np.abs(lx1 - 1.0 / (1.0 + st.psi))) < 1e-12


def test_fast_rhs_matches_plane_model_sources(model):
    """In plane symmetry L b equals a b + w0 b + mu w0 psi."""
    data = Geo2DDataSpec.from_profile("ramp", 0.1)
    st = geo2d.init_geo2d(model, data, Nu=48, Ntheta=8)
    # inject a plane-symmetric slow field through the state
    st.W[..., 1] = 0.01
    st.b = st.b + 0.05
    d = spatial_derivatives(st, model)
    lb = geo2d.fast_rhs(st, d, model)
    expect = d.a * st.b + 0.01 * st.b + st.mu * 0.01 * st.psi
    assert np.max(np.abs(lb - expect)) < 1e-8


def manufactured_run(Nu, Ntheta, t_end=0.25):
    """Flat-metric manufactured solution for the fast-wave block."""
    model = flat_model()
    A, om, m = 0.02, 3.0, 2
    s = lambda u: _bump((u - 0.15) / 0.7)
    sp = lambda u: _bump_prime((u - 0.15) / 0.7) / 0.7

    def psi_m(t, uu, tt):
        return A * np.sin(om * t) * s(uu) * np.cos(2 * np.pi * m * tt)

    def b_m(t, uu, tt):
        dt_psi = A * om * np.cos(om * t) * s(uu) * np.cos(2 * np.pi * m * tt)
        du_psi = A * np.sin(om * t) * sp(uu) * np.cos(2 * np.pi * m * tt)
        return dt_psi + 2.0 * du_psi

    def force(state):
        uu = state.u[:, None] + 0.0 * state.theta[None, :]
        tt = state.theta[None, :] + 0.0 * state.u[:, None]
        t = state.t
        ddt_b = (-A * om * om * np.sin(om * t) * s(uu)
                 * np.cos(2 * np.pi * m * tt)
                 + 2.0 * A * om * np.cos(om * t) * sp(uu)
                 * np.cos(2 * np.pi * m * tt))
        lap = -(2 * np.pi * m) ** 2 * psi_m(t, uu, tt)
        return ddt_b - lap

    u = np.linspace(0.0, 1.0, Nu + 1)
    theta = np.arange(Ntheta) / Ntheta
    uu = u[:, None] + 0.0 * theta[None, :]
    tt = theta[None, :] + 0.0 * u[:, None]
    st = Geo2DState(0.0, u, theta, psi_m(0.0, uu, tt), b_m(0.0, uu, tt),
                    np.ones_like(uu), np.zeros_like(uu), np.zeros_like(uu),
                    1.0 - uu, np.zeros_like(uu), np.zeros(uu.shape + (4,)))
    d = spatial_derivatives(st, model)
    detJ0 = d.detJ.copy()
    boundary = {"dpsi": 0.0, "db": 0.0, "dW": 0.0}
    dt = 0.4 / max(Nu, Ntheta)
    while st.t < t_end - 1e-12:
        step = min(dt, t_end - st.t)
        st, _ = geo2d.step_geo2d(st, step, model, detJ0, boundary,
                                 force=force)
    err = np.max(np.abs(st.psi - psi_m(t_end, uu, tt)))
    return err


def test_manufactured_solution_order():
    e1 = manufactured_run(32, 16)
    e2 = manufactured_run(64, 32)
    order = np.log2(e1 / e2)
    assert order >= 3.4, (e1, e2, order)


def test_slow_dalembert(model):
    """psi = 0, w(x^1) plane pulse: the slow system reduces to the 1D wave
    equation with speed 1/2."""
    data = Geo2DDataSpec.from_profile("ramp", 0.0, eps=0.01, seed=2)

    class Pulse:
        def __call__(self, u, th):
            return _bump((1.0 - np.asarray(u) - 0.35) / 0.3) + 0.0 * th

        def du(self, u, th):
            return -_bump_prime((1.0 - np.asarray(u) - 0.35) / 0.3) / 0.3 \
                + 0.0 * th

        def dtheta(self, u, th):
            return 0.0 * (np.asarray(u) + th)

    class Zero(Pulse):
        def __call__(self, u, th):
            return 0.0 * (np.asarray(u) + th)

        def du(self, u, th):
            return 0.0 * (np.asarray(u) + th)

    data.pert_psi = None
    data.pert_a = None
    data.pert_w = Pulse()
    data.pert_w0 = Zero()
    t_end = 0.4
    run = Geo2DRun(model, data, Nu=192, Ntheta=8, cfl=0.4, mu_stop=0.05,
                   t_max=10.0, record_energies=False)
    run.advance(until=t_end, series_stride=100)
    st = run.state
    x = st.x1[:, 0]
    f = lambda x1: 0.01 * _bump((np.asarray(x1) - 0.35) / 0.3)
    expect = 0.5 * (f(x - 0.5 * t_end) + f(x + 0.5 * t_end))
    err = np.max(np.abs(st.W[:, 0, 0] - expect))
    assert err < 5e-5, err


def test_jacobian_and_lnups_monitors_second_order(model):
    errs = {}
    for nu, nth in ((96, 24), (192, 48)):
        data = Geo2DDataSpec.from_profile("bump", 0.1, eps=0.004, seed=6)
        run = Geo2DRun(model, data, Nu=nu, Ntheta=nth, cfl=0.4, mu_stop=0.05,
                       t_max=10.0)
        run.advance(until=0.6, series_stride=5)
        errs[nu] = (max(run.series["res_jacobian"][1:]),
                    max(run.series["res_lnups"][2:]),
                    max(run.series["res_xbL"][1:]),
                    max(run.series["res_curl"][1:]))
    for k in range(4):
        ratio = errs[96][k] / max(errs[192][k], 1e-300)
        assert ratio > 2.5, (k, errs)


def test_fast_a_semilagrangian_mode(model):
    data = Geo2DDataSpec.from_profile("bump", 0.1, eps=0.004, seed=6)
    runs = {}
    for mode in ("algebraic", "semilagrangian"):
        run = Geo2DRun(model, data, Nu=64, Ntheta=16, cfl=0.4, mu_stop=0.05,
                       t_max=10.0, fast_a_mode=mode, record_energies=False)
        run.advance(until=0.5, series_stride=100)
        runs[mode] = run.state
    diff = np.max(np.abs(runs["algebraic"].psi - runs["semilagrangian"].psi))
    assert diff < 5e-4, diff
    # in the transported mode the b - mu a - 2 Xb psi residual is monitored
    assert runs["semilagrangian"].a_sl is not None


def test_run_geo2d_shock_report(model):
    data = Geo2DDataSpec.from_profile("ramp", 0.1)
    rep, series, snaps, run = geo2d.run_geo2d(
        model, data, Nu=96, Ntheta=8, cfl=0.5, mu_stop=0.1,
        series_stride=20)
    assert abs(rep["T_shock"] * rep["deltastar"] - 1.0) <= 3 * 0.1 + 0.02
    assert rep["u_star"] == 1.0
    assert rep["r2"] > 0.995


def test_custom_metric_generic_path_advances():
    """A non-quadratic custom metric runs through the generic machinery."""
    model = sl.make_model("custom", sources="plane-model",
                          coeffs={"g11": [1.5, 0.3], "g22": [0.2]})
    data = Geo2DDataSpec.from_profile("bump", 0.08)
    run = Geo2DRun(model, data, Nu=96, Ntheta=12, cfl=0.4, mu_stop=0.05,
                   t_max=10.0, record_energies=False)
    mu0 = run.state.mu.copy()
    run.advance(until=0.4, series_stride=10)
    assert run.state.t >= 0.4 - 1e-9
    assert np.min(run.state.mu) < np.min(mu0)  # steepening proceeds
    assert np.all(np.isfinite(run.state.psi))
    assert max(run.series["res_xbu"]) < 1e-4
