"""Exception types raised by the solvers and the harness.

Every error carries enough context (module, operation, offending quantity)
to be actionable from the command line.
"""


class ShockLabError(Exception):
    """Base class for all package errors."""


class NonLorentzian(ShockLabError):
    """Fast metric lost its (-,+,+) signature at the sampled state."""


class SpeedOrderViolation(ShockLabError):
    """A g-causal covector failed to be timelike for the slow metric."""


class DegenerateFrame(ShockLabError):
    """Frame residuals exceed tolerance; (psi, L_small) inputs inconsistent."""


class DegenerateTorus(ShockLabError):
    """g(Y,Y) <= 0; the torus direction collapsed."""


class DegenerateMap(ShockLabError):
    """Coordinate-map Jacobian fell below its non-degeneracy floor."""


class CflViolation(ShockLabError):
    """Requested time step exceeds the stability limit."""


class CharacteristicExit(ShockLabError):
    """A transversal characteristic left the stored history window."""


class InvalidProfile(ShockLabError):
    """Initial data profile makes the fast metric non-Lorentzian."""


class NoShock(ShockLabError):
    """mu_star stayed above threshold through the allotted time (case I)."""


class SupportBreach(ShockLabError):
    """Cartesian solution support reached the edge guard band."""


class OutOfChart(ShockLabError):
    """A Cartesian sample point lies outside the geometric chart image."""


class CoercivityViolation(ShockLabError):
    """Slow-wave current density went non-positive in the admissible regime."""


class ParseError(ShockLabError):
    """Config file syntax error; message carries the line number."""


class RangeError(ShockLabError):
    """Config value outside its documented range; message names the key."""
