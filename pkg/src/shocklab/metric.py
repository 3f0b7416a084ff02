"""The concrete PDE system: fast metric, slow metric, semilinear sources.

The fast wave metric is g = m + g_small(psi) with m = diag(-1,1,1); the slow
wave is governed by an inverse metric h_inv(psi, W).  Both waves are sourced
by combinations of the g-null form Q = (g^-1)^{ab} d_a psi d_b psi and
W-linear terms that vanish when W = 0, so simple outgoing plane waves
(L psi = 0, W = 0) are exact solutions.

All evaluators broadcast: psi may be a scalar or an array of any shape, and
tensor indices live on the trailing axes (shape + (3,) or shape + (3, 3)).
"""

import numpy as np

from .errors import NonLorentzian, SpeedOrderViolation

MINKOWSKI = np.diag([-1.0, 1.0, 1.0])

_FD_STEP = 1e-6  # central-difference step for metric psi-derivatives


class MetricModel:
    """User-facing bundle of metric and source callbacks.

    Parameters
    ----------
    g_small : callable psi -> (..., 3, 3)
        Symmetric metric perturbation with g_small(0) = 0.
    h_inv : callable (psi, W) -> (..., 3, 3)
        Inverse slow metric; W has shape (..., 4) ordered (w, w0, w1, w2).
    sources : dict of callables, keys
        "M", "N1", "N2" (fast) and "Mt", "Nt1", "Nt2" (slow); each takes
        (psi, W); N1/Nt1 return shape (..., 3).  The N-type entries must
        vanish at W = 0.
    g_small_dpsi, g_small_d2psi : optional analytic derivative callbacks;
        central differences at step 1e-6 are used when omitted.
    """

    def __init__(self, g_small, h_inv, sources, g_small_dpsi=None,
                 g_small_d2psi=None, name="custom"):
        self.g_small = g_small
        self.h_inv = h_inv
        self.sources = sources
        self.g_small_dpsi = g_small_dpsi
        self.g_small_d2psi = g_small_d2psi
        self.name = name
        self.fast_kind = None    # closed-form evaluator tag for built-ins
        self.hinv_const = None   # constant h^-1 matrix, when applicable


class MetricEval:
    """Pointwise fast-metric evaluation: g, g^-1, G = dg/dpsi, G' = d2g/dpsi2."""

    __slots__ = ("g", "ginv", "G", "Gp", "psi")

    def __init__(self, g, ginv, G, Gp, psi):
        self.g = g
        self.ginv = ginv
        self.G = G
        self.Gp = Gp
        self.psi = psi


def _sym3(a):
    return 0.5 * (a + np.swapaxes(a, -1, -2))


def inv3x3(m):
    """Cofactor inverse of (..., 3, 3) arrays (faster than linalg.inv on
    large stacks and free of LAPACK thresholding)."""
    a, b, c = m[..., 0, 0], m[..., 0, 1], m[..., 0, 2]
    d, e, f = m[..., 1, 0], m[..., 1, 1], m[..., 1, 2]
    g, h, i = m[..., 2, 0], m[..., 2, 1], m[..., 2, 2]
    A = e * i - f * h
    B = -(d * i - f * g)
    C = d * h - e * g
    det = a * A + b * B + c * C
    out = np.empty_like(m)
    out[..., 0, 0] = A
    out[..., 0, 1] = -(b * i - c * h)
    out[..., 0, 2] = b * f - c * e
    out[..., 1, 0] = B
    out[..., 1, 1] = a * i - c * g
    out[..., 1, 2] = -(a * f - c * d)
    out[..., 2, 0] = C
    out[..., 2, 1] = -(a * h - b * g)
    out[..., 2, 2] = a * e - b * d
    return out / det[..., None, None]


def eval_fast_metric(model, psi, check=True):
    """Evaluate g = m + g_small(psi) together with g^-1, G, G'.

    Raises NonLorentzian when the signature check fails: we require
    g_00 < 0 and a positive-definite spatial block (via its leading minors).
    """
    psi = np.asarray(psi, dtype=float)
    if getattr(model, "fast_kind", None) == "quadratic-diag":
        # g = diag(-1, (1+psi)^2, 1): build everything closed-form
        if check and np.any(1.0 + psi <= 0.0):
            raise NonLorentzian(
                "metric-model.eval_fast_metric: 1 + psi <= 0")
        shape = psi.shape + (3, 3)
        g = np.zeros(shape)
        ginv = np.zeros(shape)
        G = np.zeros(shape)
        Gp = np.zeros(shape)
        op = 1.0 + psi
        g[..., 0, 0] = -1.0
        g[..., 1, 1] = op * op
        g[..., 2, 2] = 1.0
        ginv[..., 0, 0] = -1.0
        ginv[..., 1, 1] = 1.0 / (op * op)
        ginv[..., 2, 2] = 1.0
        G[..., 1, 1] = 2.0 * op
        Gp[..., 1, 1] = 2.0
        return MetricEval(g, ginv, G, Gp, psi)
    g = MINKOWSKI + _sym3(np.asarray(model.g_small(psi), dtype=float))
    if check:
        d1 = g[..., 1, 1]
        d2 = g[..., 1, 1] * g[..., 2, 2] - g[..., 1, 2] ** 2
        if np.any(g[..., 0, 0] >= 0.0) or np.any(d1 <= 0.0) or np.any(d2 <= 0.0):
            raise NonLorentzian(
                "metric-model.eval_fast_metric: signature check failed at "
                f"|psi| up to {np.max(np.abs(psi)):.3g}")
    ginv = inv3x3(g)
    if model.g_small_dpsi is not None:
        G = _sym3(np.asarray(model.g_small_dpsi(psi), dtype=float))
    else:
        G = _sym3((np.asarray(model.g_small(psi + _FD_STEP), dtype=float)
                   - np.asarray(model.g_small(psi - _FD_STEP), dtype=float))
                  / (2.0 * _FD_STEP))
    if model.g_small_d2psi is not None:
        Gp = _sym3(np.asarray(model.g_small_d2psi(psi), dtype=float))
    else:
        Gp = _sym3((np.asarray(model.g_small(psi + _FD_STEP), dtype=float)
                    - 2.0 * np.asarray(model.g_small(psi), dtype=float)
                    + np.asarray(model.g_small(psi - _FD_STEP), dtype=float))
                   / _FD_STEP ** 2)
    return MetricEval(g, ginv, G, Gp, psi)


def eval_slow_metric(model, psi, W, check_state=None):
    """Evaluate (h^-1)(psi, W).

    When ``check_state`` is a covector array of shape (..., 3) that is
    g-causal, verify the speed ordering (h^-1)(w,w) < 0 there and raise
    SpeedOrderViolation otherwise.
    """
    psi = np.asarray(psi, dtype=float)
    W = np.asarray(W, dtype=float)
    const = getattr(model, "hinv_const", None)
    if const is not None:
        hinv = np.broadcast_to(const, psi.shape + (3, 3))
    else:
        hinv = _sym3(np.asarray(model.h_inv(psi, W), dtype=float))
    if check_state is not None:
        om = np.asarray(check_state, dtype=float)
        hh = np.einsum("...ab,...a,...b->...", hinv, om, om)
        if np.any(hh >= 0.0):
            raise SpeedOrderViolation(
                "metric-model.eval_slow_metric: g-causal covector is not "
                f"h-timelike (max (h^-1)(w,w) = {np.max(hh):.3g})")
    return hinv


def null_form(geval, dpsi):
    """Standard g-null form Q = (g^-1)^{ab} d_a psi d_b psi."""
    dpsi = np.asarray(dpsi, dtype=float)
    return np.einsum("...ab,...a,...b->...", geval.ginv, dpsi, dpsi)


def semilinear_sources(model, psi, dpsi, W, Q):
    """Assemble (F_fast, F_slow) from the six coefficient functions.

    F_fast = M*Q + N1^a d_a psi + N2 and similarly for the slow side.
    ``Q`` is the precomputed null form.
    """
    psi = np.asarray(psi, dtype=float)
    dpsi = np.asarray(dpsi, dtype=float)
    W = np.asarray(W, dtype=float)
    s = model.sources
    f_fast = (np.asarray(s["M"](psi, W)) * Q
              + np.einsum("...a,...a->...", np.asarray(s["N1"](psi, W), dtype=float), dpsi)
              + np.asarray(s["N2"](psi, W)))
    f_slow = (np.asarray(s["Mt"](psi, W)) * Q
              + np.einsum("...a,...a->...", np.asarray(s["Nt1"](psi, W), dtype=float), dpsi)
              + np.asarray(s["Nt2"](psi, W)))
    return f_fast, f_slow


# ---------------------------------------------------------------------------
# built-in models
# ---------------------------------------------------------------------------

def _quadratic_g_small(psi):
    psi = np.asarray(psi, dtype=float)
    out = np.zeros(psi.shape + (3, 3))
    out[..., 1, 1] = (1.0 + psi) ** 2 - 1.0
    return out


def _quadratic_g_small_dpsi(psi):
    psi = np.asarray(psi, dtype=float)
    out = np.zeros(psi.shape + (3, 3))
    out[..., 1, 1] = 2.0 * (1.0 + psi)
    return out


def _quadratic_g_small_d2psi(psi):
    psi = np.asarray(psi, dtype=float)
    out = np.zeros(psi.shape + (3, 3))
    out[..., 1, 1] = 2.0
    return out


def _diag_h_inv(speed):
    c2 = speed * speed

    def h_inv(psi, W):
        psi = np.asarray(psi, dtype=float)
        out = np.zeros(psi.shape + (3, 3))
        out[..., 0, 0] = -1.0
        out[..., 1, 1] = c2
        out[..., 2, 2] = c2
        return out

    return h_inv


def _zeros_like_vec(psi):
    psi = np.asarray(psi, dtype=float)
    return np.zeros(psi.shape + (3,))


def default_sources():
    """W-linear source set: M = Mt = 1, N1 = Nt1 = w0*delta^a_0,
    N2 = w*psi, Nt2 = w.  All N-type terms vanish at W = 0."""

    def N1(psi, W):
        out = _zeros_like_vec(psi)
        out[..., 0] = W[..., 1]
        return out

    return {
        "M": lambda psi, W: np.ones(np.shape(psi)),
        "N1": N1,
        "N2": lambda psi, W: W[..., 0] * np.asarray(psi),
        "Mt": lambda psi, W: np.ones(np.shape(psi)),
        "Nt1": N1,
        "Nt2": lambda psi, W: W[..., 0] + np.zeros(np.shape(psi)),
    }


def plane_model_sources():
    """Source set that reproduces the plane-symmetric caricature system.

    With the quadratic metric these give, in plane symmetry,
        L(UL psi) = L psi * UL psi + w0 * UL psi + mu w0 psi,
        dt w0 = (1/4) d1 w1 + Q-coupling + w0 psi,
    i.e. exactly the system the plane solver integrates, so the two solvers
    can be cross-validated field by field.
    """

    def N1(psi, W):
        out = _zeros_like_vec(psi)
        out[..., 0] = -W[..., 1]
        out[..., 1] = W[..., 1] / (1.0 + np.asarray(psi))
        return out

    def N2(psi, W):
        return -W[..., 1] * np.asarray(psi)

    return {
        "M": lambda psi, W: np.ones(np.shape(psi)),
        "N1": N1,
        "N2": N2,
        "Mt": lambda psi, W: np.ones(np.shape(psi)),
        "Nt1": lambda psi, W: _zeros_like_vec(psi),
        "Nt2": N2,
    }


def zero_sources():
    """All six coefficients identically zero (decoupled test mode)."""
    z = lambda psi, W: np.zeros(np.shape(psi))
    return {"M": z, "N1": lambda psi, W: _zeros_like_vec(psi), "N2": z,
            "Mt": z, "Nt1": lambda psi, W: _zeros_like_vec(psi), "Nt2": z}


_SOURCE_SETS = {
    "default": default_sources,
    "plane-model": plane_model_sources,
    "none": zero_sources,
}


_POLY_SLOTS = (("g11", 1, 1), ("g22", 2, 2), ("g12", 1, 2),
               ("g01", 0, 1), ("g02", 0, 2))


def _poly_g_small(coeffs, derivative=0):
    """g_small from per-component polynomial coefficients (powers >= 1,
    so g_small(0) = 0 automatically)."""

    def evaluate(psi):
        psi = np.asarray(psi, dtype=float)
        out = np.zeros(psi.shape + (3, 3))
        for key, i, j in _POLY_SLOTS:
            val = 0.0
            for k, c in enumerate(coeffs.get(key, ()), start=1):
                if derivative == 0:
                    val = val + c * psi ** k
                elif derivative == 1:
                    val = val + c * k * psi ** (k - 1)
                else:
                    val = val + (c * k * (k - 1) * psi ** (k - 2)
                                 if k >= 2 else 0.0)
            out[..., i, j] += val
            if i != j:
                out[..., j, i] += val
        return out

    return evaluate


def make_model(name="model-quadratic", sources="plane-model", slow_speed=0.5,
               coeffs=None):
    """Build one of the named models.

    "model-quadratic" uses g_small_11 = (1+psi)^2 - 1; "custom" builds
    g_small from tabulated polynomial coefficients (powers of psi starting
    at 1), e.g. coeffs={"g11": [2.0, 1.0]} reproduces the quadratic model.
    Both use h^-1 = diag(-1, c^2, c^2) with c = slow_speed.
    """
    if isinstance(sources, str):
        try:
            sources = _SOURCE_SETS[sources]()
        except KeyError:
            raise ValueError(f"metric-model: unknown source set {sources!r}")
    if name == "model-quadratic":
        model = MetricModel(
            _quadratic_g_small, _diag_h_inv(slow_speed), sources,
            g_small_dpsi=_quadratic_g_small_dpsi,
            g_small_d2psi=_quadratic_g_small_d2psi,
            name=name)
        model.fast_kind = "quadratic-diag"
    elif name == "custom":
        coeffs = coeffs or {}
        model = MetricModel(
            _poly_g_small(coeffs), _diag_h_inv(slow_speed), sources,
            g_small_dpsi=_poly_g_small(coeffs, 1),
            g_small_d2psi=_poly_g_small(coeffs, 2),
            name=name)
    else:
        raise ValueError(f"metric-model: unknown model name {name!r}")
    model.hinv_const = np.diag([-1.0, slow_speed ** 2, slow_speed ** 2])
    return model


# ---------------------------------------------------------------------------
# structural validation by random sampling
# ---------------------------------------------------------------------------

def validate_model(model, n_samples=10000, seed=0, state_bound=0.2):
    """Check the structural assumptions on random (state, covector) samples.

    Verifies g_small(0) = 0, (g^-1)^00 = (h^-1)^00 = -1, vanishing of the
    N-type sources at W = 0, and the speed ordering on g-causal covectors.
    Returns a dict of worst-case residuals; raises on hard violations.
    """
    rng = np.random.default_rng(seed)
    out = {}

    gz = np.asarray(model.g_small(0.0), dtype=float)
    out["g_small_at_zero"] = float(np.max(np.abs(gz)))
    if out["g_small_at_zero"] > 1e-14:
        raise NonLorentzian("metric-model.validate: g_small(0) != 0")

    psi = rng.uniform(-state_bound, state_bound, n_samples)
    W = rng.uniform(-state_bound, state_bound, (n_samples, 4))
    scale = state_bound / np.maximum(np.abs(psi) + np.sum(np.abs(W), axis=-1), state_bound)
    psi = psi * scale
    W = W * scale[:, None]

    ge = eval_fast_metric(model, psi)
    out["ginv00_plus_one"] = float(np.max(np.abs(ge.ginv[..., 0, 0] + 1.0)))
    hinv = eval_slow_metric(model, psi, W)
    out["hinv00_plus_one"] = float(np.max(np.abs(hinv[..., 0, 0] + 1.0)))

    W0 = np.zeros_like(W)
    s = model.sources
    n_at_zero = max(
        float(np.max(np.abs(s["N1"](psi, W0)))),
        float(np.max(np.abs(s["N2"](psi, W0)))),
        float(np.max(np.abs(s["Nt1"](psi, W0)))),
        float(np.max(np.abs(s["Nt2"](psi, W0)))),
    )
    out["sources_at_w_zero"] = n_at_zero

    # random g-causal covectors: om = d-normalized spatial part, time part
    # chosen inside [0, 1] of the causal threshold
    spatial = rng.normal(size=(n_samples, 2))
    spatial /= np.linalg.norm(spatial, axis=-1, keepdims=True)
    om = np.zeros((n_samples, 3))
    om[:, 1:] = spatial
    # solve (g^-1)(om,om) <= 0 for the time component: with (g^-1)^00 = -1,
    # -t^2 + 2 b t + c <= 0 for t >= b + sqrt(b^2 + c)
    b = np.einsum("ni,ni->n", ge.ginv[:, 0, 1:], spatial)
    c = np.einsum("nij,ni,nj->n", ge.ginv[:, 1:, 1:], spatial, spatial)
    t_null = b + np.sqrt(b * b + c)
    om[:, 0] = t_null * rng.uniform(1.0, 1.5, n_samples)
    gc = np.einsum("nab,na,nb->n", ge.ginv, om, om)
    om[:, 0] = np.where(gc > 1e-12, t_null, om[:, 0])  # guard roundoff
    hh = np.einsum("nab,na,nb->n", hinv, om, om)
    out["max_h_on_g_causal"] = float(np.max(hh))
    if out["max_h_on_g_causal"] >= 0.0:
        raise SpeedOrderViolation(
            "metric-model.validate: speed ordering failed on sampled covector")
    return out
