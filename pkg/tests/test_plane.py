"""Plane-symmetric characteristic solver."""

import numpy as np
import pytest

import shocklab as sl  # noqa: F401
from shocklab.errors import InvalidProfile, NoShock
from shocklab.profiles import PlaneDataSpec
from shocklab import plane


def ramp_spec(lam=0.1, eps=0.0, seed=0):
    return PlaneDataSpec.from_profile("ramp", lam, eps=eps, seed=seed)


def test_init_trivial():
    spec = ramp_spec(0.0)
    st = plane.init_plane(spec, 64)
    assert np.all(st.mu == 1.0)
    assert np.max(np.abs(st.b)) == 0.0


def test_init_model_metric():
    spec = ramp_spec(0.1)
    st = plane.init_plane(spec, 64)
    assert np.allclose(st.mu, 1.0 + 0.1 * (1.0 - st.u))
    # b = -2 d1 psi0 in simple-wave mode
    assert np.allclose(st.b, -0.2)


def test_init_near_unity():
    spec = PlaneDataSpec.from_profile("bump", 0.05)
    st = plane.init_plane(spec, 128)
    assert np.max(np.abs(st.mu - 1.0)) <= 0.05 + 1e-12


def test_init_invalid_profile():
    bad = PlaneDataSpec(lambda x: -1.0 + 0.0 * np.asarray(x),
                        lambda x: 0.0 * np.asarray(x))
    with pytest.raises(InvalidProfile):
        plane.init_plane(bad, 64)


def test_deltastar_examples():
    assert plane.deltastar(plane.init_plane(ramp_spec(0.0), 64)) == 0.0
    st = plane.init_plane(ramp_spec(0.1), 256)
    assert abs(plane.deltastar(st) - 0.1) < 1e-14
    # negative slope: no shock from this mechanism
    dec = PlaneDataSpec(lambda x: 0.1 * (1.0 - np.asarray(x)),
                        lambda x: -0.1 + 0.0 * np.asarray(x))
    assert plane.deltastar(plane.init_plane(dec, 64)) == 0.0


def test_deltastar_grid_matches_closed_form():
    for name, lam in (("ramp", 0.1), ("bump", 0.08)):
        spec = PlaneDataSpec.from_profile(name, lam)
        st = plane.init_plane(spec, 4096)
        assert abs(plane.deltastar(st)
                   - plane.deltastar_closed_form(spec)) < 1e-6


def test_zero_data_fixed_point():
    spec = ramp_spec(0.0)
    st = plane.init_plane(spec, 64)
    st2 = plane.step_plane(st, 0.01, spec)
    for f in ("psi", "a", "b", "r", "s"):
        assert np.max(np.abs(getattr(st2, f))) == 0.0
    assert np.max(np.abs(st2.mu - 1.0)) == 0.0


def test_simple_wave_step_structure():
    spec = ramp_spec(0.1)
    st = plane.init_plane(spec, 128)
    st2 = plane.step_plane(st, 0.01, spec)
    assert np.max(np.abs(st2.a)) <= 1e-14
    assert np.max(np.abs(st2.b - st.b)) <= 1e-14
    slope = (st2.mu - st.mu) / 0.01
    assert np.max(np.abs(slope - st.b / (2.0 * (1.0 + st.psi)))) < 1e-12


def test_simple_wave_run_exactness():
    spec = ramp_spec(0.1)
    rep, series, _, st = plane.run_plane(spec, Nu=128, cfl=2.0, mu_stop=0.05)
    mu_exact = plane.simple_wave_mu(spec, st.t, st.u)
    assert np.max(np.abs(st.mu - mu_exact)) <= 1e-10
    assert np.max(np.abs(st.a)) <= 1e-12
    assert np.max(np.abs(st.r)) <= 1e-12
    assert np.max(np.abs(st.s)) <= 1e-12
    assert abs(rep["T_shock"] - 10.0) < 1e-6
    assert rep["u_star"] == 1.0


def test_blowup_product_constant_in_time():
    # |d1 psi| mu = (1+psi0) d1 psi0 along each vertical line
    spec = ramp_spec(0.1)
    rep, series, snaps, st = plane.run_plane(spec, Nu=128, cfl=2.0,
                                             mu_stop=0.05,
                                             snap_times=[2.0, 6.0])
    for snap in snaps + [st]:
        prod = np.abs(snap.d1_psi()) * snap.mu
        x1 = 1.0 - snap.u
        expect = (1.0 + 0.1 * x1) * 0.1
        assert np.max(np.abs(prod - expect)) < 1e-10


def test_noshock_raised_for_trivial_data():
    spec = ramp_spec(0.0)
    with pytest.raises(NoShock):
        plane.run_plane(spec, Nu=64, cfl=2.0, mu_stop=0.05, t_max=2.0)


def test_perturbed_run_physics():
    spec = ramp_spec(0.1, eps=0.002, seed=7)
    rep, series, _, st = plane.run_plane(spec, Nu=256, cfl=2.0, mu_stop=0.05)
    assert rep["r2"] >= 0.999
    assert abs(rep["kappa"] / rep["deltastar"] - 1.0) <= 0.05 + 3 * 0.1
    assert abs(rep["blowup_exponent"] - 1.0) <= 0.05
    assert rep["sup_w_run"] <= 10 * 0.002


def test_time_convergence_of_coupled_step():
    # coupled Picard + semi-Lagrangian update converges at >= 2nd order
    spec = PlaneDataSpec.from_profile("bump", 0.08, eps=0.01, seed=3)
    t_end = 1.0
    fields = {}
    for nu in (64, 128, 256, 512):
        st = plane.init_plane(spec, nu)
        dt = t_end / (2 * nu)
        while st.t < t_end - 1e-12:
            st = plane.step_plane(st, min(dt, t_end - st.t), spec)
        fields[nu] = st
    errs = []
    for nu in (64, 128, 256):
        coarse = fields[nu]
        fine = fields[512]
        ref = np.interp(coarse.u, fine.u, fine.a)
        errs.append(np.max(np.abs(coarse.a - ref)))
    order1 = np.log2(errs[0] / errs[1])
    order2 = np.log2(errs[1] / errs[2])
    assert order2 >= 1.7, (errs, order1, order2)


def test_boundary_trace_configurable():
    spec = ramp_spec(0.1)
    spec.boundary_trace = lambda t: (0.001 * np.sin(t), 0.0, 0.0)
    st = plane.init_plane(spec, 64)
    for _ in range(10):
        st = plane.step_plane(st, 0.02, spec)
    assert abs(st.a[0] - 0.001 * np.sin(st.t)) < 1e-12
