"""Independent pre-shock reference solver on a Cartesian grid.

Solves the same system in Cartesian coordinates (t, x^1, x^2): the fast
wave in expanded second-order form (using (g^-1)^00 = -1 to isolate
d_t^2 psi) and the slow wave as the first-order system, both with RK4 in
time and 4th-order centered differences (periodic in x^2, one-sided at the
x^1 edges).  Valid only while the solution is smooth; the run window is
capped at 0.5/delta_star and the data must stay away from the x^1 edges.
"""

import numpy as np

from . import frame, metric
from .errors import OutOfChart, SupportBreach
from .stencils import d_du, d_dtheta

_SUPPORT_TOL = 1e-9


class CartesianState:
    __slots__ = ("t", "x1", "x2", "psi", "pt", "W", "dx1", "dx2")

    def __init__(self, t, x1, x2, psi, pt, W):
        self.t = t
        self.x1 = x1
        self.x2 = x2
        self.dx1 = x1[1] - x1[0]
        self.dx2 = x2[1] - x2[0]
        self.psi = psi
        self.pt = pt  # d_t psi
        self.W = W

    def copy(self):
        return CartesianState(self.t, self.x1, self.x2, self.psi.copy(),
                              self.pt.copy(), self.W.copy())


def init_cartesian(model, data, Nx=512, Ntheta=128, x_lo=-1.0, x_hi=3.0):
    """Same physical data as init_geo2d, laid out on the Cartesian grid.

    Profiles must be compactly supported inside [0, 1] (the guard band
    check enforces this during the run).
    """
    x1 = np.linspace(x_lo, x_hi, Nx + 1)
    x2 = np.arange(Ntheta) / Ntheta
    xx = x1[:, None] + 0.0 * x2[None, :]
    tt = x2[None, :] + 0.0 * x1[:, None]
    uu = 1.0 - xx
    psi = np.asarray(data.psi0(xx), dtype=float)
    d1psi = np.asarray(data.dpsi0(xx), dtype=float)
    d2psi = np.zeros_like(psi)
    a0 = np.zeros_like(psi)
    if data.pert_psi is not None:
        psi = psi + data.eps * data.pert_psi(uu, tt)
        d1psi = d1psi - data.eps * data.pert_psi.du(uu, tt)
        d2psi = d2psi + data.eps * data.pert_psi.dtheta(uu, tt)
        a0 = data.eps * data.pert_a(uu, tt)
    geval = metric.eval_fast_metric(model, psi)
    _, L_small, _ = frame.initial_eikonal(geval)
    L1 = 1.0 + L_small[..., 0]
    L2 = L_small[..., 1]
    pt = a0 - L1 * d1psi - L2 * d2psi
    W = np.zeros(psi.shape + (4,))
    if data.pert_w is not None:
        W[..., 0] = data.eps * data.pert_w(uu, tt)
        W[..., 1] = data.eps * data.pert_w0(uu, tt)
        W[..., 2] = -data.eps * data.pert_w.du(uu, tt)
        W[..., 3] = data.eps * data.pert_w.dtheta(uu, tt)
    return CartesianState(0.0, x1, x2, psi, pt, W)


def _d2_dx1(f, h):
    """4th-order second derivative along axis 0 (2nd order at edges)."""
    out = np.empty_like(f)
    out[2:-2] = (-f[:-4] + 16.0 * f[1:-3] - 30.0 * f[2:-2]
                 + 16.0 * f[3:-1] - f[4:]) / (12.0 * h * h)
    for idx in (0, 1):
        out[idx] = (f[idx] - 2.0 * f[idx + 1] + f[idx + 2]) / (h * h)
    for idx in (-1, -2):
        out[idx] = (f[idx] - 2.0 * f[idx - 1] + f[idx - 2]) / (h * h)
    return out


def _d2_dx2(f, h):
    return (-np.roll(f, 2, 1) + 16.0 * np.roll(f, 1, 1) - 30.0 * f
            + 16.0 * np.roll(f, -1, 1) - np.roll(f, -2, 1)) / (12.0 * h * h)


def _rhs(state, model):
    psi, pt, W = state.psi, state.pt, state.W
    h1, h2 = state.dx1, state.dx2
    d1p = d_du(psi, h1)
    d2p = d_dtheta(psi, h2)
    d1pt = d_du(pt, h1)
    d2pt = d_dtheta(pt, h2)
    dpsi = np.stack([pt, d1p, d2p], axis=-1)

    if model.fast_kind == "quadratic-diag":
        # g = diag(-1,(1+psi)^2,1): the first-order correction matrix is
        # diag(-1/(1+psi), -(1+psi)^-3, 1/(1+psi))
        op = 1.0 + psi
        inv_op = 1.0 / op
        gi11 = inv_op * inv_op
        Q = -pt * pt + gi11 * d1p * d1p + d2p * d2p
        Bdot = (-pt * pt - gi11 * d1p * d1p + d2p * d2p) * inv_op
        f_fast, f_slow = metric.semilinear_sources(model, psi, dpsi, W, Q)
        dtt = (gi11 * _d2_dx1(psi, h1) + _d2_dx2(psi, h2)
               + Bdot - f_fast)
    else:
        geval = metric.eval_fast_metric(model, psi, check=False)
        gi = geval.ginv
        # B^b = {tr(g^-1 G)/2 (g^-1)^{ab} - (g^-1 G g^-1)^{ab}} d_a psi
        GiG = np.matmul(gi, geval.G)
        trGiG = GiG[..., 0, 0] + GiG[..., 1, 1] + GiG[..., 2, 2]
        GiGGi = np.matmul(GiG, gi)
        M = 0.5 * trGiG[..., None, None] * gi - GiGGi
        B = np.matmul(dpsi[..., None, :], M)[..., 0, :]
        Q = metric.null_form(geval, dpsi)
        f_fast, f_slow = metric.semilinear_sources(model, psi, dpsi, W, Q)
        dtt = (2.0 * gi[..., 0, 1] * d1pt + 2.0 * gi[..., 0, 2] * d2pt
               + gi[..., 1, 1] * _d2_dx1(psi, h1)
               + gi[..., 2, 2] * _d2_dx2(psi, h2)
               + 2.0 * gi[..., 1, 2] * d_dtheta(d_du(psi, h1), h2)
               + B[..., 0] * pt + B[..., 1] * d1p + B[..., 2] * d2p
               - f_fast)

    hinv = metric.eval_slow_metric(model, psi, W)
    d1W = d_du(W, h1)
    d2W = d_dtheta(W, h2)
    dW = np.zeros_like(W)
    dW[..., 0] = W[..., 1]
    dW[..., 1] = (hinv[..., 1, 1] * d1W[..., 2] + hinv[..., 1, 2] * d2W[..., 2]
                  + hinv[..., 2, 1] * d1W[..., 3] + hinv[..., 2, 2] * d2W[..., 3]
                  + 2.0 * (hinv[..., 0, 1] * d1W[..., 1]
                           + hinv[..., 0, 2] * d2W[..., 1])
                  - f_slow)
    dW[..., 2] = d1W[..., 1]
    dW[..., 3] = d2W[..., 1]
    return pt, dtt, dW


def _support_ok(state):
    band = 3
    mag = (np.abs(state.psi) + np.abs(state.pt)
           + np.sum(np.abs(state.W), axis=-1))
    return (float(np.max(mag[:band])) < _SUPPORT_TOL
            and float(np.max(mag[-band:])) < _SUPPORT_TOL)


def step_cartesian(state, dt, model):
    """One RK4 step; raises SupportBreach if the guard band is touched."""
    if not _support_ok(state):
        raise SupportBreach(
            "cartesian-oracle.step_cartesian: solution support reached the "
            "x^1 edge guard band")
    y = (state.psi, state.pt, state.W)

    def add(yv, k, c):
        return tuple(a + c * dt * b for a, b in zip(yv, k))

    def rhs_of(yv, t):
        st = CartesianState(t, state.x1, state.x2, *yv)
        return _rhs(st, model)

    k1 = rhs_of(y, state.t)
    k2 = rhs_of(add(y, k1, 0.5), state.t + 0.5 * dt)
    k3 = rhs_of(add(y, k2, 0.5), state.t + 0.5 * dt)
    k4 = rhs_of(add(y, k3, 1.0), state.t + dt)
    new = tuple(a + (dt / 6.0) * (b1 + 2.0 * b2 + 2.0 * b3 + b4)
                for a, b1, b2, b3, b4 in zip(y, k1, k2, k3, k4))
    return CartesianState(state.t + dt, state.x1, state.x2, *new)


def run_cartesian(model, data, t_end, Nx=512, Ntheta=128, cfl=0.4,
                  x_lo=-1.0, x_hi=3.0, snap_times=()):
    """March to t_end, landing exactly on requested snapshot times."""
    state = init_cartesian(model, data, Nx, Ntheta, x_lo, x_hi)
    dt0 = cfl * min(state.dx1, state.dx2) / 1.3
    snapshots = []
    stop = sorted(set(list(snap_times) + [t_end]))
    snap_set = set(snap_times)
    while state.t < t_end - 1e-12:
        dt = dt0
        for ts in stop:
            if state.t < ts - 1e-12:
                dt = min(dt, ts - state.t)
                break
        state = step_cartesian(state, dt, model)
        for ts in list(stop):
            if abs(state.t - ts) <= 1e-10 and ts in snap_set:
                snapshots.append(state.copy())
                stop.remove(ts)
    return state, snapshots


# ---------------------------------------------------------------------------
# comparison against the geometric solver
# ---------------------------------------------------------------------------

def _invert_maps(geo_state, x1q, x2q, n_iter=12):
    """Newton-invert (u, theta) -> (x^1, x^2) at query points.

    The torus map is handled through its periodic deviation
    x^2 = theta + x2s, so no branch cut crosses the interpolation.
    """
    from .geo2d import _bicubic_periodic

    u_grid, th_grid = geo_state.u, geo_state.theta
    du, dth = geo_state.du, geo_state.dth
    x1u = d_du(geo_state.x1, du)
    x1t = d_dtheta(geo_state.x1, dth)
    x2u = d_du(geo_state.x2s, du)
    x2t = d_dtheta(geo_state.x2s, dth)
    u = np.clip(1.0 - x1q, u_grid[0], u_grid[-1])
    th = np.mod(x2q, 1.0)
    for _ in range(n_iter):
        F1 = _bicubic_periodic(geo_state.x1, u, th, u_grid, th_grid) - x1q
        F2 = th + _bicubic_periodic(geo_state.x2s, u, th, u_grid, th_grid) - x2q
        F2 = (F2 + 0.5) % 1.0 - 0.5  # periodic branch
        J11 = _bicubic_periodic(x1u, u, th, u_grid, th_grid)
        J12 = _bicubic_periodic(x1t, u, th, u_grid, th_grid)
        J21 = _bicubic_periodic(x2u, u, th, u_grid, th_grid)
        J22 = 1.0 + _bicubic_periodic(x2t, u, th, u_grid, th_grid)
        det = J11 * J22 - J12 * J21
        un = u - (J22 * F1 - J12 * F2) / det
        th = th - (-J21 * F1 + J11 * F2) / det
        u = np.clip(un, u_grid[0] - 0.1, u_grid[-1] + 0.1)
    res = np.hypot(F1, F2)
    return u, th, res


def compare_to_geo(cart_state, geo_run_or_state, model, margin_cells=4,
                   time_tol=1e-9):
    """Sample geometric fields at Cartesian grid points via the stored
    coordinate maps and report max/L2 relative errors for psi, dpsi, W.
    """
    from .geo2d import Geo2DRun, _bicubic_periodic, spatial_derivatives

    geo_state = geo_run_or_state.state \
        if isinstance(geo_run_or_state, Geo2DRun) else geo_run_or_state
    if abs(geo_state.t - cart_state.t) > time_tol:
        raise OutOfChart(
            "cartesian-oracle.compare_to_geo: snapshot times differ "
            f"({geo_state.t:.6g} vs {cart_state.t:.6g})")
    d = spatial_derivatives(geo_state, model)
    # chart image bounds in x^1 (torus direction is unbounded)
    x1_inner = float(np.max(geo_state.x1[-1]))
    x1_outer = float(np.min(geo_state.x1[0]))
    lo = x1_inner + margin_cells * cart_state.dx1
    hi = x1_outer - margin_cells * cart_state.dx1
    sel = (cart_state.x1 >= lo) & (cart_state.x1 <= hi)
    if not np.any(sel):
        raise OutOfChart("cartesian-oracle.compare_to_geo: no Cartesian "
                         "points inside the chart image")
    xx = (cart_state.x1[sel][:, None] + 0.0 * cart_state.x2[None, :]).ravel()
    tt = (cart_state.x2[None, :] + 0.0 * cart_state.x1[sel][:, None]).ravel()
    u, th, res = _invert_maps(geo_state, xx, tt)
    if float(np.max(res)) > 1e-8 or np.any(u < geo_state.u[0] - 1e-9) \
            or np.any(u > geo_state.u[-1] + 1e-9):
        raise OutOfChart(
            "cartesian-oracle.compare_to_geo: map inversion left the chart "
            f"(max residual {float(np.max(res)):.3e})")

    geo_dpsi = d.mu_dpsi / geo_state.mu[..., None]
    fields_geo = {
        "psi": geo_state.psi,
        "dt_psi": geo_dpsi[..., 0],
        "d1_psi": geo_dpsi[..., 1],
        "d2_psi": geo_dpsi[..., 2],
    }
    for k in range(4):
        fields_geo[f"W{k}"] = geo_state.W[..., k]

    cpsi = cart_state.psi[sel]
    cart_fields = {
        "psi": cpsi,
        "dt_psi": cart_state.pt[sel],
        "d1_psi": d_du(cart_state.psi, cart_state.dx1)[sel],
        "d2_psi": d_dtheta(cart_state.psi, cart_state.dx2)[sel],
    }
    for k in range(4):
        cart_fields[f"W{k}"] = cart_state.W[sel][..., k]

    report = {}
    for name, geo_f in fields_geo.items():
        gi = _bicubic_periodic(geo_f, u, th, geo_state.u, geo_state.theta)
        ci = cart_fields[name].ravel()
        scale = max(float(np.max(np.abs(ci))), 1e-30)
        diff = gi - ci
        report[f"max_{name}"] = float(np.max(np.abs(diff))) / scale
        report[f"l2_{name}"] = float(np.sqrt(np.mean(diff ** 2))) / scale
    report["n_points"] = int(xx.size)
    return report
