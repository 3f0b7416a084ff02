"""Full 1+2D evolution in geometric coordinates (t, u, theta).

Evolved unknowns on the (u, theta) grid: psi, b = UL psi, mu, the frame
perturbations L_small^i, the coordinate maps x^i, and the slow array
W = (w, w0, w1, w2).  Since L = d/dt in these coordinates, every equation
is a vertical transport equation; a = L psi is recovered algebraically
from b = mu a + 2 Xb psi (default) or transported semi-Lagrangially along
the second null direction (fast_a_mode = "semilagrangian").

The fast wave is stepped through the frame decomposition of mu box_g:

    L b = mu lap psi - trchi Xb psi - (mu trk) a
          - 2 (mu zeta_Th) (dth psi)/ups^2 - mu F_fast,

and the slow first-order system is converted to frame derivatives through
the coefficient table d_nu = c^L L + c^X X + c^Y Y.  All mu-weighted
quantities are assembled without dividing by mu except where the equations
genuinely carry 1/mu (the slow-wave transversal term and the a-recovery),
which is why the run stops at mu_stop.
"""

import numpy as np

from . import diagnostics, frame, metric
from .errors import DegenerateMap, DegenerateTorus, InvalidProfile, NoShock
from .stencils import d_du, d_du_upwind, d_dtheta

class Geo2DState:
    """Grid fields at one time level.  W has trailing axis (w, w0, w1, w2)."""

    __slots__ = ("t", "u", "theta", "du", "dth", "psi", "b", "mu",
                 "Ls1", "Ls2", "x1", "x2s", "W", "a_sl")

    def __init__(self, t, u, theta, psi, b, mu, Ls1, Ls2, x1, x2s, W,
                 a_sl=None):
        self.t = t
        self.u = u
        self.theta = theta
        self.du = u[1] - u[0]
        self.dth = theta[1] - theta[0]
        self.psi = psi
        self.b = b
        self.mu = mu
        self.Ls1 = Ls1
        self.Ls2 = Ls2
        self.x1 = x1
        self.x2s = x2s  # periodic deviation: x^2 = theta + x2s
        self.W = W
        self.a_sl = a_sl

    def pack(self):
        return [self.psi, self.b, self.mu, self.Ls1, self.Ls2,
                self.x1, self.x2s, self.W]

    def replace(self, arrs, t=None):
        return Geo2DState(self.t if t is None else t, self.u, self.theta,
                          *arrs, a_sl=self.a_sl)

    def copy(self):
        return self.replace([f.copy() for f in self.pack()])


class DerivedFields:
    """Per-stage scratch: frame, derivatives, connection pieces, coefficients."""
    __slots__ = ("geval", "fb", "fc", "Theta", "ups", "xi", "xb_u_res",
                 "a", "Xb_psi", "dth_psi", "lap_psi", "Xb_W", "Y_W", "dth_W",
                 "conn", "coef", "y_fib", "gYY", "detJ", "hinv", "mu_Q",
                 "mu_dpsi", "Xb_mu", "dth_mu")


def init_geo2d(model, data, Nu=256, Ntheta=128):
    """Initial state from a Geo2DDataSpec.

    x^1 = 1 - u, x^2 = theta; mu and L_small from the flat-eikonal algebra
    of the induced metric; b = mu L psi + 2 Xb psi with the near-simple
    construction L psi|_0 = eps * perturbation; w_1, w_2 are analytic
    Cartesian derivatives of the w profile so the curl constraint is exact.
    """
    u = np.linspace(0.0, data.U0, Nu + 1)
    theta = np.arange(Ntheta) / Ntheta
    uu = u[:, None] + 0.0 * theta[None, :]
    tt = theta[None, :] + 0.0 * u[:, None]
    x1 = 1.0 - uu
    x2s = np.zeros_like(uu)
    psi = np.asarray(data.psi0(x1), dtype=float)
    dpsi_x1 = np.asarray(data.dpsi0(x1), dtype=float)
    dpsi_x2 = np.zeros_like(psi)
    if data.pert_psi is not None:
        psi = psi + data.eps * data.pert_psi(uu, tt)
        # d/dx1 = -d/du, d/dx2 = d/dtheta at t = 0
        dpsi_x1 = dpsi_x1 - data.eps * data.pert_psi.du(uu, tt)
        dpsi_x2 = dpsi_x2 + data.eps * data.pert_psi.dtheta(uu, tt)
    if np.any(1.0 + psi <= 0.0):
        raise InvalidProfile("geo2d-solver.init_geo2d: 1 + psi <= 0")
    geval = metric.eval_fast_metric(model, psi)
    mu, L_small, _ = frame.initial_eikonal(geval)
    fb = frame.build_frame(geval, mu, L_small, check=False)
    a0 = data.eps * data.pert_a(uu, tt) if data.pert_a is not None \
        else np.zeros_like(psi)
    xb_psi0 = (fb.Xb[..., 1] * dpsi_x1 + fb.Xb[..., 2] * dpsi_x2)
    b = mu * a0 + 2.0 * xb_psi0
    W = np.zeros(psi.shape + (4,))
    if data.pert_w is not None:
        W[..., 0] = data.eps * data.pert_w(uu, tt)
        W[..., 1] = data.eps * data.pert_w0(uu, tt)
        W[..., 2] = -data.eps * data.pert_w.du(uu, tt)   # d_1 w
        W[..., 3] = data.eps * data.pert_w.dtheta(uu, tt)  # d_2 w
    return Geo2DState(0.0, u, theta, psi, b, mu, L_small[..., 0],
                      L_small[..., 1], x1, x2s, W)


def spatial_derivatives(state, model, detJ0=None):
    """All per-stage derived fields; raises DegenerateMap when the
    coordinate maps fold.  Field derivatives are taken in two fused
    stencil calls on stacked bundles (u: one-sided edges, theta: periodic).
    """
    d = DerivedFields()
    du, dth = state.du, state.dth
    quad = model.fast_kind == "quadratic-diag"
    if quad:
        # diag(-1,(1+psi)^2,1): the frame closes without tensor temporaries
        d.geval = None
        op = 1.0 + state.psi
        L = np.empty(state.psi.shape + (3,))
        L[..., 0] = 1.0
        L[..., 1] = 1.0 + state.Ls1
        L[..., 2] = state.Ls2
        X = np.empty_like(L)
        X[..., 0] = 0.0
        X[..., 1] = -L[..., 1]
        X[..., 2] = -L[..., 2]
        Y = np.empty_like(L)
        Y[..., 0] = 0.0
        Y[..., 1] = L[..., 2] * X[..., 1]
        Y[..., 2] = 1.0 + L[..., 2] * X[..., 2]
        d.fb = frame.FrameBundle(state.mu, L, X,
                                 state.mu[..., None] * X, Y, L + X)
    else:
        d.geval = metric.eval_fast_metric(model, state.psi, check=False)
        Ls = np.stack([state.Ls1, state.Ls2], axis=-1)
        d.fb = frame.build_frame(d.geval, state.mu, Ls, check=False)

    # fused derivatives: bundle axis first, grid axes (u, theta) after
    W0, W1, W2, W3 = (state.W[..., k] for k in range(4))
    th_bundle = np.stack([state.x1, state.x2s, state.psi, state.mu,
                          state.Ls1, state.Ls2, W0, W1, W2, W3])
    dthB = d_dtheta(th_bundle, dth, axis=2)
    u_bundle = np.stack([state.x1, state.x2s, state.mu])
    duB = d_du(u_bundle, du, axis=1)
    uw_bundle = np.stack([state.psi, W0, W1, W2, W3])
    duU = d_du_upwind(uw_bundle, du, axis=1)

    th1 = dthB[0]
    th2 = 1.0 + dthB[1]
    d.Theta = np.zeros(state.psi.shape + (3,))
    d.Theta[..., 1] = th1
    d.Theta[..., 2] = th2
    x1u = duB[0]
    x2u = duB[1]
    d.detJ = x1u * th2 - th1 * x2u
    if detJ0 is not None:
        if np.any(np.abs(d.detJ) < 1e-3 * np.abs(detJ0)):
            raise DegenerateMap(
                "geo2d-solver.spatial_derivatives: coordinate maps folded "
                "(|det J| fell below 1e-3 of initial)")
    # xi from expressing Xb^cart = mu X^cart in the (d_u, d_theta) basis
    muX1 = state.mu * d.fb.X[..., 1]
    muX2 = state.mu * d.fb.X[..., 2]
    inv_det = 1.0 / d.detJ
    c_u = (muX1 * th2 - th1 * muX2) * inv_det
    d.xi = -(x1u * muX2 - x2u * muX1) * inv_det
    d.xb_u_res = np.abs(c_u - 1.0)

    # frame/fiber contractions of g and G
    L1 = d.fb.L[..., 1]
    L2 = d.fb.L[..., 2]
    X1 = d.fb.X[..., 1]
    X2 = d.fb.X[..., 2]
    Y1 = d.fb.Y[..., 1]
    Y2 = d.fb.Y[..., 2]
    if quad:
        # g = diag(-1, (1+psi)^2, 1), G = diag(0, 2(1+psi), 0): all
        # contractions collapse to products with g11 and G11
        g11 = op * op
        G11 = 2.0 * op
        ups2 = g11 * th1 ** 2 + th2 ** 2
        d.gYY = g11 * Y1 ** 2 + Y2 ** 2
        gYTh = g11 * Y1 * th1 + Y2 * th2
        fc = frame.FrameComponents(
            G_LL=G11 * L1 ** 2, G_LX=G11 * L1 * X1, G_XX=G11 * X1 ** 2,
            G_LTh=G11 * L1 * th1, G_XTh=G11 * X1 * th1,
            G_ThTh=G11 * th1 ** 2, ups=None)
    else:
        V = np.stack([d.fb.L, d.fb.X, d.Theta, d.fb.Y], axis=-2)
        low = np.matmul(V, d.geval.g)
        gVV = np.matmul(low, np.swapaxes(V, -1, -2))
        lowG = np.matmul(V, d.geval.G)
        GVV = np.matmul(lowG, np.swapaxes(V, -1, -2))
        ups2 = gVV[..., 2, 2]
        d.gYY = gVV[..., 3, 3]
        gYTh = gVV[..., 2, 3]
        fc = frame.FrameComponents(
            G_LL=GVV[..., 0, 0], G_LX=GVV[..., 0, 1], G_XX=GVV[..., 1, 1],
            G_LTh=GVV[..., 0, 2], G_XTh=GVV[..., 1, 2],
            G_ThTh=GVV[..., 2, 2], ups=None)
    if np.any(ups2 <= 0.0):
        raise DegenerateTorus(
            "geo2d-solver.spatial_derivatives: g(Theta,Theta) <= 0")
    d.ups = np.sqrt(ups2)
    fc.ups = d.ups
    d.fc = fc
    d.y_fib = gYTh / ups2

    d.dth_psi = dthB[2]
    d.Xb_psi = duU[0] - d.xi * d.dth_psi
    d.a = (state.b - 2.0 * d.Xb_psi) / state.mu
    if state.a_sl is not None:
        d.a = state.a_sl
    d.dth_mu = dthB[3]
    d.Xb_mu = duB[2] - d.xi * d.dth_mu
    inv_ups = 1.0 / d.ups
    d.lap_psi = inv_ups * d_dtheta(inv_ups * d.dth_psi, dth)

    d.dth_W = np.moveaxis(dthB[6:10], 0, -1)
    d.Xb_W = np.moveaxis(duU[1:5], 0, -1) - d.xi[..., None] * d.dth_W
    d.Y_W = d.y_fib[..., None] * d.dth_W

    # connection pieces and the Cartesian-to-frame coefficient table,
    # with the tiny tensor contractions expanded in components
    inv_ups2 = inv_ups * inv_ups
    if quad:
        chi_geo = (g11 * dthB[4] * th1 + dthB[5] * th2) * inv_ups2
        rho = X2
        L_lo0 = -np.ones_like(state.psi)
        X_lo1, X_lo2 = g11 * X1, X2
        Y_lo0 = np.zeros_like(state.psi)
        Y_lo1, Y_lo2 = g11 * Y1, Y2
    else:
        g = d.geval.g
        dL1, dL2 = dthB[4], dthB[5]
        chi_geo = ((g[..., 1, 1] * dL1 + g[..., 2, 1] * dL2) * th1
                   + (g[..., 1, 2] * dL1 + g[..., 2, 2] * dL2) * th2) \
            * inv_ups2
        rho = g[..., 2, 1] * X1 + g[..., 2, 2] * X2
        L_lo0 = (g[..., 0, 0] + g[..., 0, 1] * L1 + g[..., 0, 2] * L2)
        X_lo1 = g[..., 1, 1] * X1 + g[..., 1, 2] * X2
        X_lo2 = g[..., 2, 1] * X1 + g[..., 2, 2] * X2
        Y_lo0 = g[..., 0, 1] * Y1 + g[..., 0, 2] * Y2
        Y_lo1 = g[..., 1, 1] * Y1 + g[..., 1, 2] * Y2
        Y_lo2 = g[..., 2, 1] * Y1 + g[..., 2, 2] * Y2
    trchi = chi_geo + 0.5 * (fc.G_ThTh * inv_ups2) * d.a
    mu_zeta_Th = (-0.5 * fc.G_LTh * d.Xb_psi
                  + state.mu * (0.5 * fc.G_XTh * d.a
                                - 0.5 * (fc.G_LX + fc.G_XX) * d.dth_psi))
    trk_tan = (0.5 * (fc.G_ThTh * inv_ups2) * d.a
               - (fc.G_LTh + fc.G_XTh) * d.dth_psi * inv_ups2)
    mu_trk = 0.5 * (fc.G_ThTh * inv_ups2) * d.Xb_psi + state.mu * trk_tan
    d.conn = frame.ConnectionPieces(trchi, mu_zeta_Th, mu_trk, rho)

    inv_gYY = 1.0 / d.gYY
    coef = np.zeros(state.psi.shape + (3, 3))
    coef[..., 0, 0] = 1.0
    coef[..., 0, 1] = -L_lo0
    coef[..., 0, 2] = Y_lo0 * inv_gYY
    coef[..., 1, 1] = X_lo1
    coef[..., 1, 2] = Y_lo1 * inv_gYY
    coef[..., 2, 1] = X_lo2
    coef[..., 2, 2] = Y_lo2 * inv_gYY
    d.coef = coef

    d.hinv = metric.eval_slow_metric(model, state.psi, state.W)
    # mu-weighted null form and Cartesian gradient (regular as mu -> 0)
    Y_psi = d.y_fib * d.dth_psi
    d.mu_Q = (-state.mu * d.a ** 2 - 2.0 * d.a * d.Xb_psi
              + state.mu * Y_psi ** 2 / d.gYY)
    c = d.coef
    d.mu_dpsi = (c[..., 0] * (state.mu * d.a)[..., None]
                 + c[..., 1] * d.Xb_psi[..., None]
                 + c[..., 2] * (state.mu * Y_psi)[..., None])
    return d


def fast_rhs(state, d, model):
    """L b from the frame decomposition of mu box_g psi = mu F_fast."""
    s = model.sources
    N1 = np.asarray(s["N1"](state.psi, state.W), dtype=float)
    mu_F = (np.asarray(s["M"](state.psi, state.W)) * d.mu_Q
            + N1[..., 0] * d.mu_dpsi[..., 0]
            + N1[..., 1] * d.mu_dpsi[..., 1]
            + N1[..., 2] * d.mu_dpsi[..., 2]
            + state.mu * np.asarray(s["N2"](state.psi, state.W)))
    return (state.mu * d.lap_psi
            - d.conn.trchi * d.Xb_psi
            - d.conn.mu_trk * d.a
            - 2.0 * d.conn.mu_zeta_Th * d.dth_psi / d.ups ** 2
            - mu_F)


def slow_rhs(state, d, model):
    """L W from the frame-converted first-order slow system.

    The Cartesian system is A^0 dt V + A^a da V = F with A^0 = I; with
    d_nu = c^L L + c^X X + c^Y Y this gives
    L W = F - M_X (Xb W)/mu - M_Y (Y W), the matrices expanded by hand.
    """
    s = model.sources
    hinv = d.hinv
    Nt1 = np.asarray(s["Nt1"](state.psi, state.W), dtype=float)
    mu_F_slow = (np.asarray(s["Mt"](state.psi, state.W)) * d.mu_Q
                 + Nt1[..., 0] * d.mu_dpsi[..., 0]
                 + Nt1[..., 1] * d.mu_dpsi[..., 1]
                 + Nt1[..., 2] * d.mu_dpsi[..., 2]
                 + state.mu * np.asarray(s["Nt2"](state.psi, state.W)))
    F = np.zeros_like(state.W)
    F[..., 0] = state.W[..., 1]
    F[..., 1] = -mu_F_slow / state.mu

    c = d.coef
    out = F.copy()
    XW = d.Xb_W / state.mu[..., None]
    for DW, c_slot in ((XW, 1), (d.Y_W, 2)):
        c0, c1, c2 = c[..., 0, c_slot], c[..., 1, c_slot], c[..., 2, c_slot]
        # M = c0 I + c1 A^1 + c2 A^2 applied to DW
        out[..., 0] -= c0 * DW[..., 0]
        out[..., 1] -= (c0 * DW[..., 1]
                        + c1 * (-2.0 * hinv[..., 0, 1] * DW[..., 1]
                                - hinv[..., 1, 1] * DW[..., 2]
                                - hinv[..., 1, 2] * DW[..., 3])
                        + c2 * (-2.0 * hinv[..., 0, 2] * DW[..., 1]
                                - hinv[..., 2, 1] * DW[..., 2]
                                - hinv[..., 2, 2] * DW[..., 3]))
        out[..., 2] -= c0 * DW[..., 2] + c1 * (-DW[..., 1])
        out[..., 3] -= c0 * DW[..., 3] + c2 * (-DW[..., 1])
    return out


def eikonal_rhs(state, d):
    """(L mu, L Ls1, L Ls2, L x1, L x2) from the transport equations."""
    fc = d.fc
    Lmu = (0.5 * fc.G_LL * d.Xb_psi
           - 0.5 * state.mu * fc.G_LL * d.a
           - state.mu * fc.G_LX * d.a)
    ups2 = d.ups ** 2
    dLs = []
    for i in (1, 2):
        Thi = d.Theta[..., i]
        gi0 = 0.0 if d.geval is None else d.geval.ginv[..., 0, i]
        dLs.append(-0.5 * fc.G_LL * d.a * (d.fb.L[..., i] + gi0)
                   - (fc.G_LTh * Thi / ups2) * d.a
                   + 0.5 * fc.G_LL * d.dth_psi * Thi / ups2)
    Lx1 = d.fb.L[..., 1]
    Lx2s = d.fb.L[..., 2]  # L x^2 = L^2 and L theta = 0
    return Lmu, dLs[0], dLs[1], Lx1, Lx2s


def full_rhs(state, model, detJ0, boundary=None, d=None, force=None):
    """Stage derivative of every evolved field (returns list + derived).
    ``force`` is an optional manufactured-solution source added to L b."""
    if d is None:
        d = spatial_derivatives(state, model, detJ0)
    Lb = fast_rhs(state, d, model)
    if force is not None:
        Lb = Lb + force(state)
    LW = slow_rhs(state, d, model)
    Lmu, LLs1, LLs2, Lx1, Lx2 = eikonal_rhs(state, d)
    Lpsi = d.a
    if boundary is not None:
        # u = 0 carries the prescribed trace of the free data (psi, b, W);
        # the eikonal quantities evolve with one-sided stencils
        Lpsi = Lpsi.copy()
        Lb = Lb.copy()
        LW = LW.copy()
        Lpsi[0, :] = boundary.get("dpsi", 0.0)
        Lb[0, :] = boundary.get("db", 0.0)
        LW[0, :, :] = boundary.get("dW", 0.0)
    return [Lpsi, Lb, Lmu, LLs1, LLs2, Lx1, Lx2, LW], d


def cfl_dt(state, d, cfl):
    """Stable step from the characteristic speeds in (u, theta).

    The fast u-speed is 2/mu; with RK4 + 4th-order centered stencils the
    stability limit is ~2.06 speed*dt/h, so s_u = mu*h_u keeps a 2x margin
    at cfl = 1.
    """
    mu_min = float(np.min(state.mu))
    s_u = mu_min * state.du
    theta_speed = (1.0 / d.ups + 2.0 * np.abs(d.xi) / state.mu
                   + np.abs(d.y_fib))
    s_th = state.dth / float(np.max(theta_speed))
    ups_min = float(np.min(d.ups))
    return cfl * min(s_u, s_th, state.du, ups_min * state.dth)


def step_geo2d(state, dt, model, detJ0, boundary=None, d1=None, force=None):
    """One RK4 step of the coupled system (derived fields per stage).

    ``d1`` optionally carries precomputed stage-1 derived fields (the
    marching loop reuses the post-step derivatives of the previous step).
    """
    y0 = state.pack()

    k1, d1 = full_rhs(state, model, detJ0, boundary, d=d1, force=force)
    s2 = state.replace([y + 0.5 * dt * k for y, k in zip(y0, k1)],
                       t=state.t + 0.5 * dt)
    k2, _ = full_rhs(s2, model, detJ0, boundary, force=force)
    s3 = state.replace([y + 0.5 * dt * k for y, k in zip(y0, k2)],
                       t=state.t + 0.5 * dt)
    k3, _ = full_rhs(s3, model, detJ0, boundary, force=force)
    s4 = state.replace([y + dt * k for y, k in zip(y0, k3)],
                       t=state.t + dt)
    k4, _ = full_rhs(s4, model, detJ0, boundary, force=force)
    new = state.replace(
        [y + (dt / 6.0) * (a + 2.0 * b + 2.0 * c + e)
         for y, a, b, c, e in zip(y0, k1, k2, k3, k4)],
        t=state.t + dt)
    return new, d1


def _bicubic_periodic(field, uq, tq, u_grid, theta_grid):
    """Cubic Lagrange interpolation on the uniform (u, theta) grid; theta
    periodic, u clipped to the grid."""
    du = u_grid[1] - u_grid[0]
    dth = theta_grid[1] - theta_grid[0]
    Nu = len(u_grid)
    Nth = len(theta_grid)
    fu = np.clip((uq - u_grid[0]) / du, 0.0, Nu - 1.0)
    iu = np.clip(np.floor(fu).astype(int) - 1, 0, Nu - 4)
    su = fu - iu
    ft = (tq - theta_grid[0]) / dth
    it = np.floor(ft).astype(int) - 1
    st = ft - it

    def lag_w(s):
        w0 = -(s - 1.0) * (s - 2.0) * (s - 3.0) / 6.0
        w1 = s * (s - 2.0) * (s - 3.0) / 2.0
        w2 = -s * (s - 1.0) * (s - 3.0) / 2.0
        w3 = s * (s - 1.0) * (s - 2.0) / 6.0
        return w0, w1, w2, w3

    wu = lag_w(su)
    wt = lag_w(st)
    out = np.zeros_like(uq, dtype=float)
    for a in range(4):
        row = iu + a
        acc = np.zeros_like(out)
        for bb in range(4):
            col = np.mod(it + bb, Nth)
            acc += wt[bb] * field[row, col]
        out += wu[a] * acc
    return out


def sl_a_update(state_old, state_new, d_old, d_new, dt, xi_prev):
    """Semi-Lagrangian transport of a = L psi along the second null
    direction: (dt, du, dtheta)/ds = (mu, 2, -2 xi), with source
    UL a = L b - (L mu) a + 2 (L xi) dth psi."""
    a_old = state_old.a_sl
    mu = state_new.mu
    u2 = state_new.u[:, None] + 0.0 * state_new.theta[None, :]
    th2 = state_new.theta[None, :] + 0.0 * state_new.u[:, None]
    u_dep = u2 - 2.0 * dt / mu
    th_dep = th2 + 2.0 * d_new.xi * dt / mu
    a_dep = _bicubic_periodic(a_old, u_dep, th_dep, state_new.u,
                              state_new.theta)
    Lb = (state_new.b - state_old.b) / dt
    Lmu = (state_new.mu - state_old.mu) / dt
    Lxi = (d_new.xi - xi_prev) / dt if xi_prev is not None \
        else np.zeros_like(d_new.xi)
    src = (Lb - Lmu * d_new.a + 2.0 * Lxi * d_new.dth_psi) / mu
    a_new = a_dep + dt * src
    a_new[0, :] = d_new.a[0, :]
    return a_new


class Geo2DRun:
    """Marching loop with series recording and residual monitors."""

    def __init__(self, model, data, Nu=256, Ntheta=128, cfl=0.4,
                 mu_stop=0.05, t_max=None, fast_a_mode="algebraic",
                 record_energies=True, audit=False, quad_rule="trapezoid"):
        self.model = model
        self.data = data
        self.state = init_geo2d(model, data, Nu, Ntheta)
        if fast_a_mode == "semilagrangian":
            d0 = spatial_derivatives(self.state, model)
            self.state.a_sl = d0.a.copy()
        self.cfl = cfl
        self.mu_stop = mu_stop
        self.fast_a_mode = fast_a_mode
        d0 = spatial_derivatives(self.state, model)
        self.detJ0 = d0.detJ.copy()
        self.params = diagnostics.data_size_params(
            self.state.psi, d0.a, d0.Xb_psi, d0.fc.G_LL,
            W=self.state.W, grad_psi_tan=d0.dth_psi / d0.ups,
            eps_configured=data.eps)
        dstar = self.params["deltastar"]
        self.t_max = t_max if t_max is not None else \
            (2.0 / dstar if dstar > 1e-8 else 20.0)
        self.boundary = {
            "dpsi": 0.0, "db": 0.0, "dW": 0.0,
        }
        self.force_fast = None  # optional manufactured source added to L b
        self.recorder = diagnostics.EnergyRecorder(
            self.state.du, self.state.dth, quad_rule) if record_energies \
            else None
        self.audit = audit
        self.audit_times = []
        self.audit_fast = []
        self.audit_slow = []
        self.series = {k: [] for k in (
            "t", "mu_star", "u_star", "theta_star", "max_d1psi", "max_dtpsi",
            "sup_w", "sup_w0", "sup_w1", "sup_w2", "res_jacobian", "res_curl",
            "res_bmu", "res_lnups", "res_xbu", "res_xbL")}
        self._lnups_buf = []
        self.snapshots = []

    # -- residual monitors -------------------------------------------------

    def _curl_residual(self, state, d):
        # d_1 w_2 - d_2 w_1 through the frame conversion
        c = d.coef
        XW = d.Xb_W / state.mu[..., None]
        d1w2 = c[..., 1, 1] * XW[..., 3] + c[..., 1, 2] * d.Y_W[..., 3]
        d2w1 = c[..., 2, 1] * XW[..., 2] + c[..., 2, 2] * d.Y_W[..., 2]
        return d1w2 - d2w1

    def _xbL_residual(self, state, d):
        """Grid Xb L_small^i minus the algebraic transversal identity."""
        fc = d.fc
        ups2 = d.ups ** 2
        brack = (-0.5 * fc.G_LL * d.Xb_psi
                 + 0.5 * state.mu * fc.G_LL * d.a
                 + state.mu * fc.G_LX * d.a
                 + 0.5 * state.mu * fc.G_XX * d.a)
        worst = 0.0
        for i, Lsi in ((1, state.Ls1), (2, state.Ls2)):
            Thi = d.Theta[..., i]
            alg = (brack * (d.fb.L[..., i] + d.geval.ginv[..., 0, i])
                   - (fc.G_LTh * d.Xb_psi
                      + 0.5 * state.mu * fc.G_XX * d.dth_psi) * Thi / ups2
                   + d.dth_mu * Thi / ups2)
            grid = d_du(Lsi, state.du) - d.xi * d_dtheta(Lsi, state.dth)
            worst = max(worst, float(np.max(np.abs(grid - alg))))
        return worst

    def sample(self, state, d):
        if d.geval is None:
            d.geval = metric.eval_fast_metric(self.model, state.psi,
                                              check=False)
        mu_star = min(1.0, float(np.min(state.mu)))
        flat = np.argmin(state.mu)
        ju, jt = np.unravel_index(flat, state.mu.shape)
        # Cartesian derivatives of psi through the frame table
        dpsi = d.mu_dpsi / state.mu[..., None]
        s = self.series
        s["t"].append(state.t)
        s["mu_star"].append(mu_star)
        s["u_star"].append(float(state.u[ju]))
        s["theta_star"].append(float(state.theta[jt]))
        s["max_d1psi"].append(float(np.max(np.abs(dpsi[..., 1]))))
        s["max_dtpsi"].append(float(np.max(np.abs(dpsi[..., 0]))))
        for k, idx in (("sup_w", 0), ("sup_w0", 1), ("sup_w1", 2),
                       ("sup_w2", 3)):
            s[k].append(float(np.max(np.abs(state.W[..., idx]))))
        jac = frame.jacobian_residual(state.x1, state.x2s, state.mu, d.ups,
                                      d.geval, state.du, state.dth)
        s["res_jacobian"].append(float(np.max(np.abs(jac))))
        s["res_curl"].append(float(np.max(np.abs(self._curl_residual(state, d)))))
        if state.a_sl is not None:
            bmu = state.b - state.mu * state.a_sl - 2.0 * d.Xb_psi
            s["res_bmu"].append(float(np.max(np.abs(bmu))))
        else:
            s["res_bmu"].append(0.0)
        # L ln ups vs trchi by centered differencing of stored ups
        self._lnups_buf.append((state.t, np.log(d.ups), d.conn.trchi))
        if len(self._lnups_buf) > 3:
            self._lnups_buf.pop(0)
        if len(self._lnups_buf) == 3:
            (t0, l0, _), (t1, _, tr1), (t2, l2, _) = self._lnups_buf
            res = (l2 - l0) / (t2 - t0) - tr1
            s["res_lnups"].append(float(np.max(np.abs(res))))
        else:
            s["res_lnups"].append(0.0)
        s["res_xbu"].append(float(np.max(d.xb_u_res)))
        s["res_xbL"].append(self._xbL_residual(state, d))

        if self.recorder is not None:
            self._record_energies(state, d)
        if self.audit:
            self._record_audit(state, d)

    def _record_energies(self, state, d):
        gs = d.dth_psi ** 2 / d.ups ** 2
        ef = diagnostics.fast_energy_density(state.mu, d.a, d.Xb_psi, gs)
        ff = diagnostics.fast_flux_density(state.mu, d.a, gs)
        J0 = diagnostics.slow_current_time(d.hinv, state.W)
        JH = diagnostics.slow_flux_density(d.hinv, state.W, d.geval, d.fb)
        area = state.mu / np.sqrt(frame.det_spatial_metric(d.geval))
        gram = diagnostics.null_surface_gram(d.fb, d.Theta)
        Lmu, _, _, _, _ = eikonal_rhs(state, d)
        dens = {
            "e_fast": ef, "e_slow": J0 * area,
            "flux_fast_out": ff[-1], "flux_fast_in": ff[0],
            "flux_slow_out": (JH * gram / d.ups)[-1],
            "flux_slow_in": (JH * gram / d.ups)[0],
            "k_dens": diagnostics.coercive_density(Lmu, gs),
            "ups": d.ups, "ups_out": d.ups[-1], "ups_in": d.ups[0],
        }
        self.recorder.push(state.t, dens)

    def _record_audit(self, state, d):
        gs = d.dth_psi ** 2 / d.ups ** 2
        fc = d.fc
        ups2 = d.ups ** 2
        Lmu, _, _, _, _ = eikonal_rhs(state, d)
        s = self.model.sources
        mu_F = (np.asarray(s["M"](state.psi, state.W)) * d.mu_Q
                + np.einsum("...a,...a->...",
                            np.asarray(s["N1"](state.psi, state.W), dtype=float),
                            d.mu_dpsi)
                + state.mu * np.asarray(s["N2"](state.psi, state.W)))
        trk_trans = 0.5 * (fc.G_ThTh / ups2) * d.Xb_psi
        trk_tan = (0.5 * (fc.G_ThTh / ups2) * d.a
                   - (fc.G_LTh + fc.G_XTh) * d.dth_psi / ups2)
        zeta_trans = -0.5 * fc.G_LTh * d.Xb_psi
        zeta_tan = (0.5 * fc.G_XTh * d.a
                    - 0.5 * (fc.G_LX + fc.G_XX) * d.dth_psi)
        self.audit_times.append(state.t)
        self.audit_fast.append({
            "mu": state.mu.copy(), "Lf": d.a.copy(), "Xbf": d.Xb_psi.copy(),
            "dthf": d.dth_psi.copy(), "ups": d.ups.copy(),
            "Lmu": Lmu.copy(), "Xbmu": d.Xb_mu.copy(),
            "dthmu": d.dth_mu.copy(),
            "trchi": d.conn.trchi.copy(), "trk_trans": trk_trans,
            "trk_tan": trk_tan, "zeta_trans_Th": zeta_trans,
            "zeta_tan_Th": zeta_tan, "source": mu_F,
        })
        sset = self.model.sources
        mu_F_slow = (np.asarray(sset["Mt"](state.psi, state.W)) * d.mu_Q
                     + np.einsum("...a,...a->...",
                                 np.asarray(sset["Nt1"](state.psi, state.W),
                                            dtype=float), d.mu_dpsi)
                     + state.mu * np.asarray(sset["Nt2"](state.psi, state.W)))
        J0 = diagnostics.slow_current_time(d.hinv, state.W)
        JH = diagnostics.slow_flux_density(d.hinv, state.W, d.geval, d.fb)
        wdens, fterm = diagnostics.slow_bulk_density(
            d.hinv, state.W, -mu_F_slow, state.mu)
        self.audit_slow.append({
            "J0": J0, "JH": JH,
            "area_factor": state.mu / np.sqrt(frame.det_spatial_metric(d.geval)),
            "gram": diagnostics.null_surface_gram(d.fb, d.Theta),
            "ups": d.ups.copy(), "mu": state.mu.copy(),
            "wdens": wdens, "fterm": fterm,
        })

    # -- marching -----------------------------------------------------------

    def advance(self, stop_times=(), series_stride=1, snap_times=(),
                until=None):
        """March to mu_stop / t_max, landing exactly on requested times.
        With ``until`` set, stop cleanly at that time instead of treating
        the time budget as a case-I outcome."""
        if until is not None:
            stop_times = list(stop_times) + [until]
        stop_times = sorted(set(list(stop_times) + list(snap_times)))
        snap_set = set(snap_times)
        d = spatial_derivatives(self.state, self.model, self.detJ0)
        self.sample(self.state, d)
        if self.state.t in snap_set:
            self.snapshots.append(self.state.copy())
        n = 0
        xi_prev = None
        while True:
            mu_star = min(1.0, float(np.min(self.state.mu)))
            if mu_star <= self.mu_stop:
                return "shock"
            if until is not None and self.state.t >= until - 1e-10:
                return "time"
            if self.state.t >= self.t_max - 1e-12:
                raise NoShock(
                    f"geo2d-solver.run_geo2d: mu_star = {mu_star:.4g} at "
                    f"t_max = {self.t_max:.4g} (case I)")
            dt = cfl_dt(self.state, d, self.cfl)
            for ts in stop_times:
                if self.state.t < ts - 1e-12:
                    dt = min(dt, ts - self.state.t)
                    break
            old = self.state
            self.state, d_start = step_geo2d(self.state, dt, self.model,
                                             self.detJ0, self.boundary, d1=d,
                                             force=self.force_fast)
            d = spatial_derivatives(self.state, self.model, self.detJ0)
            if self.fast_a_mode == "semilagrangian":
                self.state.a_sl = sl_a_update(old, self.state, d_start, d,
                                              dt, xi_prev)
                xi_prev = d.xi.copy()
                d.a = self.state.a_sl
            n += 1
            if n % series_stride == 0 or \
                    min(1.0, float(np.min(self.state.mu))) <= self.mu_stop:
                self.sample(self.state, d)
            for ts in list(stop_times):
                if abs(self.state.t - ts) <= 1e-10:
                    if ts in snap_set:
                        self.snapshots.append(self.state.copy())
                    stop_times.remove(ts)

    def report(self):
        rep = diagnostics.shock_fit(
            np.array(self.series["t"]), np.array(self.series["mu_star"]),
            np.array(self.series["max_d1psi"]))
        rep["u_star"] = self.series["u_star"][-1]
        rep["theta_star"] = self.series["theta_star"][-1]
        rep.update(self.params)
        rep["sup_w_run"] = max(
            max(self.series["sup_w"], default=0.0),
            max(self.series["sup_w0"], default=0.0),
            max(self.series["sup_w1"], default=0.0),
            max(self.series["sup_w2"], default=0.0))
        return rep


def run_geo2d(model, data, Nu=256, Ntheta=128, cfl=0.4, mu_stop=0.05,
              t_max=None, fast_a_mode="algebraic", series_stride=1,
              snap_times=(), audit=False):
    """Convenience wrapper: march to the shock and return
    (report, series, snapshots, run object)."""
    run = Geo2DRun(model, data, Nu, Ntheta, cfl, mu_stop, t_max,
                   fast_a_mode, audit=audit)
    run.advance(series_stride=series_stride, snap_times=snap_times)
    return run.report(), run.series, run.snapshots, run
