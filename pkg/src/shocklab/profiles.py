"""Initial-data profiles and the plane/2D data specifications.

Profiles are functions of x^1 (the data live on Sigma_0 where x^1 = 1 - u).
``ramp`` is the linear profile lam * x^1 used by the closed-form checks;
``bump`` is a compactly supported C^infinity bump with unit sup, so the
amplitude lam doubles as the sup-norm target for psi.
"""

import numpy as np

from .perturb import SmoothField, _bump, _bump_prime


def ramp(lam):
    def f(x1):
        return lam * np.asarray(x1, dtype=float)

    def fp(x1):
        return lam * np.ones_like(np.asarray(x1, dtype=float))

    return f, fp


def bump(lam):
    def f(x1):
        return lam * _bump(np.asarray(x1, dtype=float))

    def fp(x1):
        return lam * _bump_prime(np.asarray(x1, dtype=float))

    return f, fp


PROFILES = {"ramp": ramp, "bump": bump}


class PlaneDataSpec:
    """Plane-symmetric initial data.

    psi0 / dpsi0 are functions of x^1.  The transversal datum is always
    slaved to the profile (Xb is Sigma_t-tangent, so Xb psi|_0 = -d1 psi0);
    perturbations of size eps enter through L psi|_0 and the slow-wave
    traces.  In simple-wave mode (eps = 0) the initial a, r, s vanish and
    UL psi|_0 = -2 d1 psi0.
    """

    def __init__(self, psi0, dpsi0, eps=0.0, seed=0,
                 boundary_trace=None):
        self.psi0 = psi0
        self.dpsi0 = dpsi0
        self.eps = float(eps)
        self.seed = seed
        if eps > 0.0:
            self.pert_a = SmoothField(seed * 4 + 1, modes=0)
            self.pert_w0 = SmoothField(seed * 4 + 2, modes=0)
            self.pert_w = SmoothField(seed * 4 + 3, modes=0)
        else:
            self.pert_a = self.pert_w0 = self.pert_w = None
        self.boundary_trace = boundary_trace

    @classmethod
    def from_profile(cls, name, lam, eps=0.0, seed=0):
        f, fp = PROFILES[name](lam)
        return cls(f, fp, eps=eps, seed=seed)

    def a0(self, u):
        if self.pert_a is None:
            return np.zeros_like(np.asarray(u, dtype=float))
        return self.eps * self.pert_a(u)

    def w0_0(self, u):
        if self.pert_w0 is None:
            return np.zeros_like(np.asarray(u, dtype=float))
        return self.eps * self.pert_w0(u)

    def w_0(self, u):
        if self.pert_w is None:
            return np.zeros_like(np.asarray(u, dtype=float))
        return self.eps * self.pert_w(u)

    def w1_0(self, u):
        # w_1 = d_1 w = -d_u w at t = 0: the gradient constraint is built in
        if self.pert_w is None:
            return np.zeros_like(np.asarray(u, dtype=float))
        return -self.eps * self.pert_w.du(u)


class Geo2DDataSpec:
    """Initial data for the 2D geometric solver.

    psi(0,u,theta) = psi0(1-u) + eps * pert_psi(u,theta); the near-simple
    construction sets L psi|_0 = eps * pert_a and w close to zero with
    w_i = d_i w taken from analytic derivatives of the w-profile, so the
    curl constraint holds exactly at t = 0.
    """

    def __init__(self, psi0, dpsi0, eps=0.0, seed=0, U0=1.0):
        self.psi0 = psi0
        self.dpsi0 = dpsi0
        self.eps = float(eps)
        self.seed = seed
        self.U0 = float(U0)
        if eps > 0.0:
            self.pert_psi = SmoothField(seed * 8 + 1)
            self.pert_a = SmoothField(seed * 8 + 2)
            self.pert_w = SmoothField(seed * 8 + 3)
            self.pert_w0 = SmoothField(seed * 8 + 4)
        else:
            self.pert_psi = self.pert_a = self.pert_w = self.pert_w0 = None

    @classmethod
    def from_profile(cls, name, lam, eps=0.0, seed=0, U0=1.0):
        f, fp = PROFILES[name](lam)
        return cls(f, fp, eps=eps, seed=seed, U0=U0)
