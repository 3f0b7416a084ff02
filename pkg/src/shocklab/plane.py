"""Plane-symmetric model problem: method of characteristics on (t, u).

Unknowns per u-node are psi, a = L psi, b = UL psi, mu, and the Riemann
invariants r = w0 - w1/2, s = w0 + w1/2 of the slow subsystem.  With the
quadratic model metric the system is

    L psi = a,
    L b   = a b + w0 b + mu w0 psi,
    L mu  = (b + mu a) / (2 (1 + psi)),
    UL a  = a b + mu a^2 + w0 b + mu w0 psi          (dt/du = mu/2),
    V_r r = 4 (a b + mu w0 psi)                      (dt/du = 2mu/(1-psi)),
    V_s s = 4 (a b + mu w0 psi)                      (dt/du = 2mu/(3+psi)),

with V_r = (1-psi) UL + mu (3+psi) L and V_s its mirror.  The L-equations
are vertical ODEs in (t,u) and are stepped with classical RK4; the
transversal equations are integrated semi-Lagrangially: each node traces
its characteristic one time step back, takes the departure value from the
completed level (cubic interpolation in u) or from the u = 0 boundary
trace when the characteristic crosses the inflow edge, and accumulates the
source along the arc.  Two Picard sweeps couple the blocks.  No division
by mu appears anywhere in the update.

The r/s source factor 4 comes from rewriting the slow caricature system in
Riemann-invariant form exactly (keeping all constants), so the fields agree
with the 2D geometric solver run on the same data.
"""

import numpy as np

from .errors import CharacteristicExit, InvalidProfile, NoShock
from . import diagnostics

HISTORY_FIELDS = ("psi", "a", "b", "mu", "w0", "r", "s")


class PlaneState:
    """Nodal fields at one time level (x1 is the tracked characteristic
    footprint x^1(t,u), used only by post-processing)."""

    __slots__ = ("t", "u", "psi", "a", "b", "mu", "r", "s", "w", "x1")

    def __init__(self, t, u, psi, a, b, mu, r, s, w=None, x1=None):
        self.t = t
        self.u = u
        self.psi = psi
        self.a = a
        self.b = b
        self.mu = mu
        self.r = r
        self.s = s
        self.w = np.zeros_like(psi) if w is None else w
        self.x1 = (1.0 - u).copy() if x1 is None else x1

    @property
    def w0(self):
        return 0.5 * (self.r + self.s)

    @property
    def w1(self):
        return self.s - self.r

    @property
    def xb_psi(self):
        return 0.5 * (self.b - self.mu * self.a)

    def copy(self):
        return PlaneState(self.t, self.u, self.psi.copy(), self.a.copy(),
                          self.b.copy(), self.mu.copy(), self.r.copy(),
                          self.s.copy(), self.w.copy(), self.x1.copy())

    def d1_psi(self):
        """d psi/dx^1 from 2 d1 = (1+psi)(L - UL/mu)."""
        return 0.5 * (1.0 + self.psi) * (self.a - self.b / self.mu)

    def dt_psi(self):
        """d psi/dt from 2 dt = L + UL/mu."""
        return 0.5 * (self.a + self.b / self.mu)


def init_plane(spec, Nu, U0=1.0):
    """Nodal data at t = 0 from a PlaneDataSpec.

    mu|_0 = 1 + psi0 for the model metric; b = mu a + 2 Xb psi with
    Xb psi|_0 = -d1 psi0 (Xb is Sigma_0-tangent, so the profile fixes it).
    """
    if Nu < 16:
        raise ValueError("plane-solver.init_plane: Nu must be >= 16")
    u = np.linspace(0.0, U0, Nu + 1)
    x1 = 1.0 - u
    psi = np.asarray(spec.psi0(x1), dtype=float)
    if np.any(1.0 + psi <= 0.0):
        raise InvalidProfile("plane-solver.init_plane: 1 + psi0 <= 0, "
                             "fast metric is not Lorentzian")
    dpsi = np.asarray(spec.dpsi0(x1), dtype=float)
    mu = 1.0 + psi
    a = spec.a0(u)
    b = mu * a - 2.0 * dpsi
    w0 = spec.w0_0(u)
    w1 = spec.w1_0(u)
    st = PlaneState(0.0, u, psi, a, b, mu, w0 - 0.5 * w1, w0 + 0.5 * w1)
    st.w = spec.w_0(u)
    return st


def deltastar(state0):
    """(1/2) sup [G_LL Xb psi]_- on the t = 0 grid (model metric:
    G_LL = 2/(1+psi))."""
    gll = 2.0 / (1.0 + state0.psi)
    q = gll * state0.xb_psi
    return 0.5 * float(np.max(np.maximum(-q, 0.0)))


def deltastar_closed_form(spec, n=4097, U0=1.0):
    """sup over x^1 of [d1 psi0 / (1 + psi0)]_+ on a fine grid."""
    x1 = np.linspace(1.0 - U0, 1.0, n)
    val = (np.asarray(spec.dpsi0(x1), dtype=float)
           / (1.0 + np.asarray(spec.psi0(x1), dtype=float)))
    return float(np.max(np.maximum(val, 0.0)))


def simple_wave_mu(spec, t, u):
    """Closed-form mu(t,u) = (1+psi0) - t d1 psi0/(1+psi0) for simple waves."""
    x1 = 1.0 - np.asarray(u, dtype=float)
    p = np.asarray(spec.psi0(x1), dtype=float)
    dp = np.asarray(spec.dpsi0(x1), dtype=float)
    return (1.0 + p) - t * dp / (1.0 + p)


def simple_wave_shock_time(spec, n=4097, U0=1.0):
    """T_shock = min over the grid of (1+psi0)^2 / [d1 psi0]_+."""
    x1 = np.linspace(1.0 - U0, 1.0, n)
    p = np.asarray(spec.psi0(x1), dtype=float)
    dp = np.asarray(spec.dpsi0(x1), dtype=float)
    with np.errstate(divide="ignore"):
        times = np.where(dp > 0.0, (1.0 + p) ** 2 / np.where(dp > 0, dp, 1.0),
                         np.inf)
    return float(np.min(times))


# ---------------------------------------------------------------------------
# stepping
# ---------------------------------------------------------------------------

def _rk4_lblock(state, dt, a_pair, w0_pair, w1_pair):
    """RK4 for (psi, b, mu, w, x1) with the transversal inputs a(t), w0(t),
    w1(t) taken linear in t across the step (Picard coupling)."""
    a0, a1 = a_pair
    w00, w01 = w0_pair
    w10, w11 = w1_pair
    psi, b, mu, w, x1 = state.psi, state.b, state.mu, state.w, state.x1

    def rhs(p, bb, m, ww, xx, sigma):
        a_s = a0 + (a1 - a0) * sigma
        w0_s = w00 + (w01 - w00) * sigma
        w1_s = w10 + (w11 - w10) * sigma
        return (a_s,
                a_s * bb + w0_s * bb + m * w0_s * p,
                (bb + m * a_s) / (2.0 * (1.0 + p)),
                w0_s + w1_s / (1.0 + p),
                1.0 / (1.0 + p))

    k1 = rhs(psi, b, mu, w, x1, 0.0)
    k2 = rhs(psi + 0.5 * dt * k1[0], b + 0.5 * dt * k1[1],
             mu + 0.5 * dt * k1[2], w + 0.5 * dt * k1[3],
             x1 + 0.5 * dt * k1[4], 0.5)
    k3 = rhs(psi + 0.5 * dt * k2[0], b + 0.5 * dt * k2[1],
             mu + 0.5 * dt * k2[2], w + 0.5 * dt * k2[3],
             x1 + 0.5 * dt * k2[4], 0.5)
    k4 = rhs(psi + dt * k3[0], b + dt * k3[1], mu + dt * k3[2],
             w + dt * k3[3], x1 + dt * k3[4], 1.0)
    out = []
    for i, f in enumerate((psi, b, mu, w, x1)):
        out.append(f + (dt / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
    return out


_FI = {f: i for i, f in enumerate(HISTORY_FIELDS)}
_BASE = ("psi", "a", "b", "mu", "w0")


def interp_u_cubic(level, u_q, h):
    """Cubic Lagrange interpolation of nodal rows at scattered u points.

    ``level`` has shape (M, N) (M stacked fields); ``u_q`` holds u
    coordinates on the uniform grid (spacing h, first node 0).
    Returns (M, Q).
    """
    N = level.shape[-1]
    f = np.clip(u_q / h, 0.0, N - 1.0)
    i0 = np.clip(np.floor(f).astype(int) - 1, 0, N - 4)
    s = f - i0
    w0 = -(s - 1.0) * (s - 2.0) * (s - 3.0) / 6.0
    w1 = s * (s - 2.0) * (s - 3.0) / 2.0
    w2 = -s * (s - 1.0) * (s - 3.0) / 2.0
    w3 = s * (s - 1.0) * (s - 2.0) / 6.0
    return (w0 * level[..., i0] + w1 * level[..., i0 + 1]
            + w2 * level[..., i0 + 2] + w3 * level[..., i0 + 3])


class _Family:
    """Descriptor of one transversal characteristic family (speed is
    du/dt; source is d(value)/du along the characteristic)."""

    def __init__(self, value_field, speed, source):
        self.value_field = value_field
        self.speed = speed
        self.source = source
        self.fields = _BASE if value_field in _BASE \
            else _BASE + (value_field,)


def _slow_source(f, _val):
    return f["a"] * f["b"] + f["mu"] * f["w0"] * f["psi"]


_FAMILIES = (
    _Family("a",
            lambda f: 2.0 / f["mu"],
            lambda f, val: 0.5 * (val * f["b"] + f["mu"] * val ** 2
                                  + f["w0"] * f["b"]
                                  + f["mu"] * f["w0"] * f["psi"])),
    _Family("r",
            lambda f: 0.5 * (1.0 - f["psi"]) / f["mu"],
            lambda f, val: 2.0 * _slow_source(f, val) / (1.0 - f["psi"])),
    _Family("s",
            lambda f: 0.5 * (3.0 + f["psi"]) / f["mu"],
            lambda f, val: 2.0 * _slow_source(f, val) / (3.0 + f["psi"])),
)


def _interp_u_linear(level, u_q, h):
    """Linear interpolation of nodal rows at scattered u points (used only
    for the midpoint speed probe)."""
    N = level.shape[-1]
    f = np.clip(u_q / h, 0.0, N - 1.0)
    i0 = np.minimum(f.astype(int), N - 2)
    s = f - i0
    return (1.0 - s) * level[..., i0] + s * level[..., i0 + 1]


def _sl_trajectories(old_level, trial, u_grid, dt, h):
    """Departure points of all families from a midpoint-speed trace."""
    u_arr = u_grid[1:]
    arr = {"psi": trial[_FI["psi"], 1:], "mu": trial[_FI["mu"], 1:]}
    mid_fields = 0.5 * (old_level[(_FI["psi"], _FI["mu"]), :]
                        + trial[(_FI["psi"], _FI["mu"]), :])
    u_deps = {}
    for fam in _FAMILIES:
        v_arr = fam.speed(arr)
        u_mid = np.maximum(u_arr - 0.5 * dt * v_arr, 0.0)
        probe = _interp_u_linear(mid_fields, u_mid, h)
        v_mid = fam.speed({"psi": probe[0], "mu": probe[1]})
        u_dep = u_arr - dt * v_mid
        if not np.all(np.isfinite(u_dep)):
            raise CharacteristicExit(
                "plane-solver.step_plane: characteristic tracing failed "
                "(non-finite departure point)")
        u_deps[fam.value_field] = u_dep
    return u_deps


def _sl_departures(old_level, u_deps, traces, u_grid, dt, h, t_new):
    """Departure-side values of every family (cubic in u on the completed
    level, boundary trace where the characteristic crossed u = 0)."""
    u_arr = u_grid[1:]
    deps = {}
    for fam in _FAMILIES:
        name = fam.value_field
        u_dep = u_deps[name]
        u_cl = np.clip(u_dep, 0.0, None)
        idx = [_FI[f] for f in fam.fields]
        vals = interp_u_cubic(old_level[idx, :], u_cl, h)
        dep = {f: row for f, row in zip(fam.fields, vals)}
        dep_val = dep[name]
        du_seg = u_arr - u_dep
        crossed = u_dep < 0.0
        if np.any(crossed):
            frac = u_arr / np.maximum(u_arr - u_dep, 1e-300)
            t_c = t_new - frac * dt
            tr = traces(t_c)
            for f in fam.fields:
                dep[f] = np.where(crossed, tr[f], dep[f])
            dep_val = np.where(crossed, tr[name], dep_val)
            du_seg = np.where(crossed, u_arr, du_seg)
        deps[name] = (dep, dep_val, du_seg)
    return deps


def _sl_update(deps, trial):
    """Trapezoidal source integration along the arcs."""
    arr = {f: trial[_FI[f], 1:] for f in _FI}
    out = {}
    for fam in _FAMILIES:
        dep, dep_val, du_seg = deps[fam.value_field]
        q_dep = fam.source(dep, dep_val)
        new_val = dep_val + du_seg * q_dep
        for _ in range(2):
            q_arr = fam.source(arr, new_val)
            new_val = dep_val + 0.5 * du_seg * (q_dep + q_arr)
        out[fam.value_field] = new_val
    return out


def step_plane(state, dt, spec, n_picard=2):
    """Advance one time level (two Picard sweeps couple the vertical RK4
    block with the semi-Lagrangian transversal block)."""
    t_new = state.t + dt
    h = state.u[1] - state.u[0]
    old_level = np.stack([state.psi, state.a, state.b, state.mu, state.w0,
                          state.r, state.s])

    if spec.boundary_trace is not None:
        def traces(t_c):
            tr_a, tr_r, tr_s = spec.boundary_trace(t_c)
            return _trace_fields(state, tr_a, tr_r, tr_s)
        tr_now = spec.boundary_trace(t_new)
    else:
        def traces(t_c):
            return _trace_fields(state, state.a[0] + 0.0 * t_c,
                                 state.r[0] + 0.0 * t_c,
                                 state.s[0] + 0.0 * t_c)
        tr_now = (state.a[0], state.r[0], state.s[0])

    a_new = state.a.copy()
    r_new = state.r.copy()
    s_new = state.s.copy()
    w0_new = 0.5 * (r_new + s_new)
    w1_new = s_new - r_new
    deps = None

    for sweep in range(n_picard):
        psi_n, b_n, mu_n, w_n, x1_n = _rk4_lblock(
            state, dt, (state.a, a_new), (state.w0, w0_new),
            (state.w1, w1_new))
        mu_n = np.maximum(mu_n, 1e-12)
        trial = np.stack([psi_n, a_new, b_n, mu_n, w0_new, r_new, s_new])
        if sweep == 0:
            # trajectories and departure values converge after the first
            # sweep (their error is already higher order); later sweeps
            # refresh only the arrival-side source coupling
            u_deps = _sl_trajectories(old_level, trial, state.u, dt, h)
            deps = _sl_departures(old_level, u_deps, traces, state.u, dt,
                                  h, t_new)
        upd = _sl_update(deps, trial)
        a_new = np.concatenate(([tr_now[0]], upd["a"]))
        r_new = np.concatenate(([tr_now[1]], upd["r"]))
        s_new = np.concatenate(([tr_now[2]], upd["s"]))
        w0_new = 0.5 * (r_new + s_new)
        w1_new = s_new - r_new

    return PlaneState(t_new, state.u, psi_n, a_new, b_n, mu_n, r_new, s_new,
                      w_n, x1_n)


def _trace_fields(state, tr_a, tr_r, tr_s):
    """Field values carried by the u = 0 boundary for crossing
    characteristics.  psi, b, mu at u = 0 evolve slowly; their node-0
    values are used (the free data a, r, s come from the trace)."""
    w0 = 0.5 * (tr_r + tr_s)
    return {"psi": state.psi[0], "a": tr_a, "b": state.b[0],
            "mu": state.mu[0], "w0": w0, "r": tr_r, "s": tr_s}


def run_plane(spec, Nu=512, cfl=1.0, mu_stop=0.05, U0=1.0, t_max=None,
              record=None, series_stride=1, snap_times=(), n_picard=2):
    """March until mu_star <= mu_stop; return (report, series, snapshots,
    final state).  Raises NoShock (case I) when the threshold is never
    reached in the allotted time.
    """
    if not (0.0 < mu_stop < 0.5):
        raise ValueError("plane-solver.run_plane: mu_stop must lie in (0, 0.5)")
    state = init_plane(spec, Nu, U0=U0)
    dstar = deltastar(state)
    t_limit = 4.0 / max(dstar, 1e-6)
    if t_max is not None:
        t_limit = min(t_limit, t_max)
    h = U0 / Nu
    dt = cfl * h
    series = {k: [] for k in ("t", "mu_star", "u_star", "max_d1psi",
                              "max_dtpsi", "sup_w0", "sup_w1", "sup_w")}
    snapshots = []
    snap_left = sorted(snap_times)

    def sample(st):
        j = int(np.argmin(st.mu))
        series["t"].append(st.t)
        series["mu_star"].append(min(1.0, float(st.mu[j])))
        series["u_star"].append(float(st.u[j]))
        series["max_d1psi"].append(float(np.max(np.abs(st.d1_psi()))))
        series["max_dtpsi"].append(float(np.max(np.abs(st.dt_psi()))))
        series["sup_w0"].append(float(np.max(np.abs(st.w0))))
        series["sup_w1"].append(float(np.max(np.abs(st.w1))))
        series["sup_w"].append(float(np.max(np.abs(st.w))))
        if record is not None:
            record(st, series)

    sample(state)
    n = 0
    min_mu_seen = float(np.min(state.mu))
    while min(1.0, float(np.min(state.mu))) > mu_stop:
        if state.t >= t_limit:
            raise NoShock(
                f"plane-solver.run_plane: mu_star = {min_mu_seen:.4g} > "
                f"mu_stop = {mu_stop:g} at t = {state.t:.4g} (case I)")
        state = step_plane(state, dt, spec, n_picard=n_picard)
        n += 1
        min_mu_seen = min(min_mu_seen, float(np.min(state.mu)))
        if n % series_stride == 0 or float(np.min(state.mu)) <= mu_stop:
            sample(state)
        while snap_left and state.t >= snap_left[0] - 1e-12:
            snapshots.append(state.copy())
            snap_left.pop(0)

    report = diagnostics.shock_fit(
        np.array(series["t"]), np.array(series["mu_star"]),
        np.array(series["max_d1psi"]))
    j = int(np.argmin(state.mu))
    report["u_star"] = float(state.u[j])
    report["theta_star"] = 0.0
    report["deltastar"] = dstar
    report["sup_w_run"] = max(max(series["sup_w0"], default=0.0),
                              max(series["sup_w1"], default=0.0),
                              max(series["sup_w"], default=0.0))
    return report, series, snapshots, state
