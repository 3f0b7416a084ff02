"""Null frame construction and the geometric identities built on it.

A frame {L, X, Xb = mu*X, Y, N} is assembled pointwise from (psi, mu,
L_small) using the eikonal normalizations: L is null with L^0 = 1, X is the
Sigma_t-tangent unit vector g-orthogonal to the torus fibers with
g(L,X) = -1, and N = L + X is the future unit normal of Sigma_t.  The torus
fibers are one-dimensional, so every fiber-tangent tensor contraction
reduces to a scalar formula through Theta = dx/dtheta and
ups^2 = g(Theta,Theta).

All functions broadcast over leading grid axes (tensor indices trailing).
"""

import numpy as np

from .errors import DegenerateFrame, DegenerateTorus
from . import stencils

FRAME_TOL = 1e-8


class FrameBundle:
    __slots__ = ("mu", "L", "X", "Xb", "Y", "N", "L_small", "X_small", "Y_small")

    def __init__(self, mu, L, X, Xb, Y, N):
        self.mu = mu
        self.L = L
        self.X = X
        self.Xb = Xb
        self.Y = Y
        self.N = N
        self.L_small = L[..., 1:].copy()
        self.L_small[..., 0] -= 1.0
        self.X_small = X[..., 1:].copy()
        self.X_small[..., 0] += 1.0
        self.Y_small = Y[..., 1:].copy()
        self.Y_small[..., 1] -= 1.0


class FrameComponents:
    """Contractions of G = dg/dpsi against the frame and the fiber direction."""

    __slots__ = ("G_LL", "G_LX", "G_XX", "G_LTh", "G_XTh", "G_ThTh", "ups")

    def __init__(self, G_LL, G_LX, G_XX, G_LTh, G_XTh, G_ThTh, ups):
        self.G_LL = G_LL
        self.G_LX = G_LX
        self.G_XX = G_XX
        self.G_LTh = G_LTh
        self.G_XTh = G_XTh
        self.G_ThTh = G_ThTh
        self.ups = ups


class ConnectionPieces:
    __slots__ = ("trchi", "mu_zeta_Th", "mu_trk", "rho")

    def __init__(self, trchi, mu_zeta_Th, mu_trk, rho):
        self.trchi = trchi
        self.mu_zeta_Th = mu_zeta_Th
        self.mu_trk = mu_trk
        self.rho = rho


def gdot(g, A, B):
    """g(A, B) for vectors with trailing component axes."""
    return np.einsum("...ab,...a,...b->...", g, A, B)


def build_frame(geval, mu, L_small, check=True):
    """Assemble the frame from (psi, mu, L_small).

    L = (1, 1 + L_small^1, L_small^2); X^nu = -L^nu - (g^-1)^{0 nu};
    Xb = mu X; Y^i = delta_2^i + L_2 X^i; N = L + X.  Raises
    DegenerateFrame when any residual exceeds 1e-8, which signals an
    inconsistent (psi, L_small) pair.
    """
    mu = np.asarray(mu, dtype=float)
    L_small = np.asarray(L_small, dtype=float)
    shape = np.broadcast_shapes(geval.psi.shape, mu.shape, L_small.shape[:-1])
    L = np.zeros(shape + (3,))
    L[..., 0] = 1.0
    L[..., 1] = 1.0 + L_small[..., 0]
    L[..., 2] = L_small[..., 1]
    X = -L - geval.ginv[..., 0, :]
    Xb = mu[..., None] * X
    L_lo = np.einsum("...ab,...b->...a", geval.g, L)
    Y = np.zeros(shape + (3,))
    Y[..., 1] = L_lo[..., 2] * X[..., 1]
    Y[..., 2] = 1.0 + L_lo[..., 2] * X[..., 2]
    N = L + X
    fb = FrameBundle(mu, L, X, Xb, Y, N)
    if check:
        worst = float(np.max(frame_residuals(fb, geval)))
        if worst > FRAME_TOL:
            raise DegenerateFrame(
                f"frame-geometry.build_frame: residual {worst:.3e} > {FRAME_TOL:g}; "
                "(psi, L_small) inputs are inconsistent")
    return fb


def frame_residuals(fb, geval):
    """The five defining residuals |g(L,L)|, |g(L,X)+1|, |g(X,X)-1|,
    |g(N,N)+1|, max_nu |N^nu + (g^-1)^{0 nu}|."""
    g = geval.g
    r = np.stack([
        np.abs(gdot(g, fb.L, fb.L)),
        np.abs(gdot(g, fb.L, fb.X) + 1.0),
        np.abs(gdot(g, fb.X, fb.X) - 1.0),
        np.abs(gdot(g, fb.N, fb.N) + 1.0),
        np.max(np.abs(fb.N + geval.ginv[..., 0, :]), axis=-1),
    ])
    return r


def frame_G_components(geval, fb, Theta):
    """Contract G against (L, X, Theta) and return ups = sqrt(g(Theta,Theta)).

    Theta must be Sigma_t-tangent (Theta^0 = 0).
    """
    Theta = np.asarray(Theta, dtype=float)
    G = geval.G
    ups2 = gdot(geval.g, Theta, Theta)
    if np.any(ups2 <= 0.0):
        raise DegenerateTorus("frame-geometry.frame_G_components: g(Theta,Theta) <= 0")
    return FrameComponents(
        G_LL=gdot(G, fb.L, fb.L),
        G_LX=gdot(G, fb.L, fb.X),
        G_XX=gdot(G, fb.X, fb.X),
        G_LTh=gdot(G, fb.L, Theta),
        G_XTh=gdot(G, fb.X, Theta),
        G_ThTh=gdot(G, Theta, Theta),
        ups=np.sqrt(ups2))


def connection_pieces(geval, fb, fc, LPsi, XbPsi, dth_psi, dth_L, dth_x):
    """trchi, mu-weighted torsion and second-fundamental-form traces, rho.

    dth_L holds (dL^1/dtheta, dL^2/dtheta) and dth_x holds
    (dx^1/dtheta, dx^2/dtheta) on the trailing axis.  The mu-weighted
    combinations are assembled directly (never zeta or trk alone), so the
    formulas stay regular as mu -> 0.
    """
    ups2 = fc.ups ** 2
    g = geval.g
    gs = g[..., 1:, 1:]
    trchi = (np.einsum("...ab,...a,...b->...", gs, dth_L, dth_x) / ups2
             + 0.5 * (fc.G_ThTh / ups2) * LPsi)
    mu_zeta_Th = (-0.5 * fc.G_LTh * XbPsi
                  + fb.mu * (0.5 * fc.G_XTh * LPsi
                             - 0.5 * (fc.G_LX + fc.G_XX) * dth_psi))
    trk_tan = (0.5 * (fc.G_ThTh / ups2) * LPsi
               - (fc.G_LTh + fc.G_XTh) * dth_psi / ups2)
    mu_trk = 0.5 * (fc.G_ThTh / ups2) * XbPsi + fb.mu * trk_tan
    rho = np.einsum("...a,...a->...", g[..., 2, 1:], fb.X[..., 1:])
    return ConnectionPieces(trchi, mu_zeta_Th, mu_trk, rho)


def cartesian_in_frame(geval, fb):
    """Coefficients (c^L, c^X, c^Y) with d_nu = c^L L + c^X X + c^Y Y.

    Returns an array of shape (..., 3, 3) indexed [nu, {L,X,Y}].  Raises
    DegenerateTorus when g(Y,Y) <= 0.
    """
    g = geval.g
    V = np.stack([fb.L, fb.X, fb.Y], axis=-2)
    lowered = np.einsum("...ab,...vb->...va", g, V)
    L_lo = lowered[..., 0, :]
    X_lo = lowered[..., 1, :]
    Y_lo = lowered[..., 2, :]
    gYY = np.einsum("...a,...a->...", Y_lo, fb.Y)
    if np.any(gYY <= 0.0):
        raise DegenerateTorus("frame-geometry.cartesian_in_frame: g(Y,Y) <= 0")
    shape = gYY.shape
    c = np.zeros(shape + (3, 3))
    c[..., 0, 0] = 1.0
    c[..., 0, 1] = -L_lo[..., 0]
    c[..., 0, 2] = Y_lo[..., 0] / gYY
    for i in (1, 2):
        c[..., i, 1] = X_lo[..., i]
        c[..., i, 2] = Y_lo[..., i] / gYY
    return c


def expand_in_frame(c, fb):
    """Reconstruct the coordinate basis vectors from a coefficient table
    (round-trip check for cartesian_in_frame)."""
    return (c[..., :, 0:1] * fb.L[..., None, :]
            + c[..., :, 1:2] * fb.X[..., None, :]
            + c[..., :, 2:3] * fb.Y[..., None, :])


def spatial_metric_inverse(geval):
    """(gbar^-1)^{ij} of the induced metric on Sigma_t, as a (..., 2, 2) array.

    Uses (gbar^-1)^{ij} = (g^-1)^{ij} + (g^-1)^{0i}(g^-1)^{0j}, valid under
    the normalization (g^-1)^{00} = -1.
    """
    gi = geval.ginv
    return gi[..., 1:, 1:] + gi[..., 0, 1:, None] * gi[..., 0, None, 1:]


def det_spatial_metric(geval):
    """Determinant of the 2x2 Cartesian spatial block of g on Sigma_t."""
    gs = geval.g[..., 1:, 1:]
    return gs[..., 0, 0] * gs[..., 1, 1] - gs[..., 0, 1] * gs[..., 1, 0]


def initial_eikonal(geval):
    """(mu, L_small, xi_vec) on Sigma_0 from the flat eikonal data u = 1 - x^1.

    mu = ((gbar^-1)^11)^(-1/2); L_small^i = (gbar^-1)^{i1}/sqrt((gbar^-1)^11)
    - delta^{i1} - (g^-1)^{0i}; Xi^i = (gbar^-1)^{i1}/(gbar^-1)^{11} - delta^{i1}.
    """
    B = spatial_metric_inverse(geval)
    B11 = B[..., 0, 0]
    root = np.sqrt(B11)
    mu = 1.0 / root
    L_small = np.stack([
        B[..., 0, 0] / root - 1.0 - geval.ginv[..., 0, 1],
        B[..., 1, 0] / root - geval.ginv[..., 0, 2],
    ], axis=-1)
    xi = np.stack([
        B[..., 0, 0] / B11 - 1.0,
        B[..., 1, 0] / B11,
    ], axis=-1)
    return mu, L_small, xi


def jacobian_residual(x1, x2s, mu, ups, geval, du, dtheta):
    """Residual of det d(x^1,x^2)/d(u,theta) = -mu (det gbar)^{-1/2} ups.

    ``x2s`` is the periodic deviation x^2 - theta (the raw torus coordinate
    would break the periodic stencils at the seam).  The determinant is
    formed with the solvers' 4th-order stencils; the pointwise residual
    field is returned (O(h^2) on smooth evolutions).
    """
    x1u = stencils.d_du(x1, du)
    x2u = stencils.d_du(x2s, du)
    x1t = stencils.d_dtheta(x1, dtheta)
    x2t = 1.0 + stencils.d_dtheta(x2s, dtheta)
    det = x1u * x2t - x1t * x2u
    rhs = -mu * ups / np.sqrt(det_spatial_metric(geval))
    return det - rhs


# spec name for the same operation
jacobian_check = jacobian_residual
