"""Seeded, platform-portable smooth perturbation fields.

Random numbers come from a 64-bit counter-based SplitMix64 stream, so a
fixed seed reproduces bit-identical perturbations on any platform.  The
fields are finite sums of compact bumps in u times Fourier modes in theta,
with analytic derivatives, so constrained initial data (e.g. w_i = d_i w)
can be built exactly.
"""

import numpy as np

_MASK = (1 << 64) - 1


def splitmix64(seed, count):
    """First ``count`` doubles in [0,1) of the SplitMix64 stream."""
    out = np.empty(count)
    state = seed & _MASK
    for i in range(count):
        state = (state + 0x9E3779B97F4A7C15) & _MASK
        z = state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
        z = z ^ (z >> 31)
        out[i] = (z >> 11) * (1.0 / (1 << 53))
    return out


def _bump(x):
    """C^infinity bump supported on (0,1), peak value 1 at x = 1/2."""
    x = np.asarray(x, dtype=float)
    inside = (x > 0.0) & (x < 1.0)
    xs = np.where(inside, x, 0.5)
    v = np.exp(4.0 - 1.0 / (xs * (1.0 - xs)))
    return np.where(inside, v, 0.0)


def _bump_prime(x):
    x = np.asarray(x, dtype=float)
    inside = (x > 0.0) & (x < 1.0)
    xs = np.where(inside, x, 0.5)
    v = np.exp(4.0 - 1.0 / (xs * (1.0 - xs)))
    # d/dx [-1/(x(1-x))] = (1-2x)/(x(1-x))^2
    dv = v * (1.0 - 2.0 * xs) / (xs * (1.0 - xs)) ** 2
    return np.where(inside, dv, 0.0)


class SmoothField:
    """Deterministic smooth field on (u, theta) in [0,1] x T, normalized so
    that max(sup|f|, sup|df/du|, sup|df/dtheta|) = 1 (perturbation sizes
    bound tangential derivatives, not just amplitudes).

    f(u, th) = sum_j A_j bump((u - a_j)/w_j) cos(2 pi m_j th + phi_j).
    Setting ``modes=0`` forces m_j = 0 (plane-symmetric perturbations).
    The bumps vanish identically for u < 0.05, keeping the inflow boundary
    on its unperturbed trace.
    """

    def __init__(self, seed, n_terms=4, modes=3):
        raw = splitmix64(seed, 5 * n_terms)
        self.amp = 2.0 * raw[0::5] - 1.0
        self.a = 0.05 + 0.6 * raw[1::5]
        self.w = 0.25 + 0.35 * raw[2::5]
        if modes > 0:
            self.m = np.floor(1.0 + modes * raw[3::5])
        else:
            self.m = np.zeros(n_terms)
        self.phase = 2.0 * np.pi * raw[4::5]
        self.scale = 1.0
        uu = np.linspace(0.0, 1.0, 801)[:, None]
        tt = np.linspace(0.0, 1.0, 257)[None, :]
        samp = max(np.max(np.abs(self._raw(uu, tt))),
                   np.max(np.abs(self.du(uu, tt))),
                   np.max(np.abs(self.dtheta(uu, tt))))
        self.scale = 1.0 / samp if samp > 0 else 1.0

    def _raw(self, u, th):
        u = np.asarray(u, dtype=float)
        th = np.asarray(th, dtype=float)
        total = 0.0
        for A, a, w, m, ph in zip(self.amp, self.a, self.w, self.m, self.phase):
            total = total + A * _bump((u - a) / w) * np.cos(2.0 * np.pi * m * th + ph)
        return total

    def __call__(self, u, th=0.0):
        return self.scale * self._raw(u, th)

    def du(self, u, th=0.0):
        u = np.asarray(u, dtype=float)
        th = np.asarray(th, dtype=float)
        total = 0.0
        for A, a, w, m, ph in zip(self.amp, self.a, self.w, self.m, self.phase):
            total = total + (A / w) * _bump_prime((u - a) / w) \
                * np.cos(2.0 * np.pi * m * th + ph)
        return self.scale * total

    def dtheta(self, u, th=0.0):
        u = np.asarray(u, dtype=float)
        th = np.asarray(th, dtype=float)
        total = 0.0
        for A, a, w, m, ph in zip(self.amp, self.a, self.w, self.m, self.phase):
            total = total - A * _bump((u - a) / w) * 2.0 * np.pi * m \
                * np.sin(2.0 * np.pi * m * th + ph)
        return self.scale * total
