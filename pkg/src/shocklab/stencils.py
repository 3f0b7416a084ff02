"""Finite-difference stencils shared by the grid solvers.

Grids are (Nu, Ntheta) with u on axis 0 (bounded, one-sided edges) and
theta on axis 1 (periodic).  All derivatives are 4th order.  The ``axis``
arguments let the solvers difference stacked field bundles in one call.
"""

import numpy as np


def _sl(axis, s):
    out = [slice(None)] * (axis + 1)
    out[axis] = s
    return tuple(out)


def d_du(f, du, axis=0):
    """4th-order d/du along ``axis``; one-sided at both edges."""
    f = np.asarray(f)
    out = np.empty_like(f, dtype=float)
    A = lambda s: f[_sl(axis, s)]
    out[_sl(axis, slice(2, -2))] = (
        A(slice(None, -4)) - 8.0 * A(slice(1, -3))
        + 8.0 * A(slice(3, -1)) - A(slice(4, None))) / (12.0 * du)
    c = 1.0 / (12.0 * du)
    out[_sl(axis, 0)] = c * (-25.0 * A(0) + 48.0 * A(1) - 36.0 * A(2)
                             + 16.0 * A(3) - 3.0 * A(4))
    out[_sl(axis, 1)] = c * (-3.0 * A(0) - 10.0 * A(1) + 18.0 * A(2)
                             - 6.0 * A(3) + A(4))
    out[_sl(axis, -2)] = -c * (-3.0 * A(-1) - 10.0 * A(-2) + 18.0 * A(-3)
                               - 6.0 * A(-4) + A(-5))
    out[_sl(axis, -1)] = -c * (-25.0 * A(-1) + 48.0 * A(-2) - 36.0 * A(-3)
                               + 16.0 * A(-4) - 3.0 * A(-5))
    return out


def d_dtheta(f, dtheta, axis=1):
    """4th-order periodic d/dtheta along ``axis``."""
    f = np.asarray(f)
    return (np.roll(f, 2, axis=axis) - 8.0 * np.roll(f, 1, axis=axis)
            + 8.0 * np.roll(f, -1, axis=axis)
            - np.roll(f, -2, axis=axis)) / (12.0 * dtheta)


def d_du_upwind(f, du, axis=0):
    """4th-order upwind-biased d/du along ``axis`` for rightward transport
    (the transversal characteristics run toward larger u).

    Interior stencil spans offsets {-3..+1}; its truncation term is a
    dissipative fifth derivative, which keeps the advective closure stable
    where centered differencing is only neutrally stable.  Rows 0-1 use
    the one-sided closures (the inflow rows are data-dominated), row 2 is
    centered, and the last row is fully one-sided from the left.
    """
    f = np.asarray(f)
    out = np.empty_like(f, dtype=float)
    A = lambda s: f[_sl(axis, s)]
    c = 1.0 / (12.0 * du)
    out[_sl(axis, slice(3, -1))] = c * (
        -A(slice(None, -4)) + 6.0 * A(slice(1, -3)) - 18.0 * A(slice(2, -2))
        + 10.0 * A(slice(3, -1)) + 3.0 * A(slice(4, None)))
    out[_sl(axis, 0)] = c * (-25.0 * A(0) + 48.0 * A(1) - 36.0 * A(2)
                             + 16.0 * A(3) - 3.0 * A(4))
    out[_sl(axis, 1)] = c * (-3.0 * A(0) - 10.0 * A(1) + 18.0 * A(2)
                             - 6.0 * A(3) + A(4))
    out[_sl(axis, 2)] = c * (A(0) - 8.0 * A(1) + 8.0 * A(3) - A(4))
    out[_sl(axis, -1)] = -c * (-25.0 * A(-1) + 48.0 * A(-2) - 36.0 * A(-3)
                               + 16.0 * A(-4) - 3.0 * A(-5))
    return out


def lagrange_interp_time(times, values, t_query):
    """Cubic (falls back to available order) Lagrange interpolation in time.

    ``times`` is an increasing 1-D array of K stored levels, ``values`` has
    shape (K, N) and ``t_query`` shape (N,); one interpolated value per
    column is returned.
    """
    times = np.asarray(times, dtype=float)
    K = len(times)
    if K >= 4:
        j = np.searchsorted(times, t_query, side="right") - 1
        lo = np.minimum(np.maximum(j - 1, 0), K - 4)
        cols = np.arange(values.shape[1])
        t0, t1, t2, t3 = (times[lo + k] for k in range(4))
        v0, v1, v2, v3 = (values[lo + k, cols] for k in range(4))
        d0 = t_query - t0
        d1 = t_query - t1
        d2 = t_query - t2
        d3 = t_query - t3
        w0 = d1 * d2 * d3 / ((t0 - t1) * (t0 - t2) * (t0 - t3))
        w1 = d0 * d2 * d3 / ((t1 - t0) * (t1 - t2) * (t1 - t3))
        w2 = d0 * d1 * d3 / ((t2 - t0) * (t2 - t1) * (t2 - t3))
        w3 = d0 * d1 * d2 / ((t3 - t0) * (t3 - t1) * (t3 - t2))
        return w0 * v0 + w1 * v1 + w2 * v2 + w3 * v3
    n_st = K
    j = np.searchsorted(times, t_query, side="right") - 1
    lo = np.clip(j - (n_st // 2 - 1), 0, K - n_st)
    cols = np.arange(values.shape[1])
    ts = times[lo[:, None] + np.arange(n_st)[None, :]]
    vs = values[(lo[:, None] + np.arange(n_st)[None, :]), cols[:, None]]
    out = np.zeros_like(t_query, dtype=float)
    for a in range(n_st):
        w = np.ones_like(t_query, dtype=float)
        for b in range(n_st):
            if b == a:
                continue
            w *= (t_query - ts[:, b]) / (ts[:, a] - ts[:, b])
        out += w * vs[:, a]
    return out
