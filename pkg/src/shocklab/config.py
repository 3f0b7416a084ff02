"""Flat `key = value` run-configuration files with [section] headers.

Unknown keys are errors (typos must not silently fall back to defaults);
every value is validated against its documented range.  The same structure
serializes back to a canonical text form, so parse(serialize(cfg)) round
trips.
"""

from .errors import ParseError, RangeError

_BOOL = {"true": True, "false": False, "1": True, "0": False,
         "yes": True, "no": False}


def _as_bool(v):
    try:
        return _BOOL[str(v).strip().lower()]
    except KeyError:
        raise ValueError(f"not a boolean: {v!r}")


def _float_list(v):
    v = str(v).strip()
    if not v:
        return []
    return [float(x) for x in v.split(",")]


# (section, key) -> (type, default, validator, doc)
SCHEMA = {
    ("run", "solver"): (str, "plane",
                        lambda v: v in ("plane", "geo2d", "cartesian",
                                        "compare"),
                        "plane | geo2d | cartesian | compare"),
    ("run", "out"): (str, "runs/out", lambda v: len(v) > 0,
                     "output directory"),
    ("run", "seed"): (int, 0, lambda v: 0 <= v < 2 ** 64,
                      "64-bit perturbation seed"),
    ("run", "quiet"): (_as_bool, False, lambda v: True,
                       "suppress progress output"),
    ("run", "t_max"): (float, 0.0, lambda v: v >= 0.0,
                       "time budget; 0 = automatic from deltastar"),
    ("run", "mu_stop"): (float, 0.05, lambda v: 0.0 < v < 0.5,
                         "stop when mu_star falls below this (0, 0.5)"),
    ("run", "fast_a_mode"): (str, "algebraic",
                             lambda v: v in ("algebraic", "semilagrangian"),
                             "recovery of L psi in the 2D solver"),
    ("run", "audit"): (_as_bool, False, lambda v: True,
                       "record order-zero energy-identity audit data"),
    ("metric", "model"): (str, "model-quadratic",
                          lambda v: v in ("model-quadratic", "custom"),
                          "fast metric family"),
    ("metric", "slow_speed"): (float, 0.5, lambda v: 0.0 < v < 1.0,
                               "slow wave speed (0, 1)"),
    ("metric", "g11"): (_float_list, [], lambda v: True,
                        "custom model: psi-polynomial coefficients of "
                        "g_small_11 (powers >= 1)"),
    ("metric", "g22"): (_float_list, [], lambda v: True,
                        "custom model: coefficients of g_small_22"),
    ("metric", "g12"): (_float_list, [], lambda v: True,
                        "custom model: coefficients of g_small_12"),
    ("metric", "g01"): (_float_list, [], lambda v: True,
                        "custom model: coefficients of g_small_01"),
    ("metric", "g02"): (_float_list, [], lambda v: True,
                        "custom model: coefficients of g_small_02"),
    ("metric", "sources"): (str, "plane-model",
                            lambda v: v in ("plane-model", "default",
                                            "none"),
                            "semilinear coefficient set"),
    ("data", "profile"): (str, "ramp", lambda v: v in ("ramp", "bump"),
                          "psi profile on Sigma_0"),
    ("data", "lam"): (float, 0.1, lambda v: -0.25 <= v <= 0.25,
                      "profile amplitude (sup-norm target for psi)"),
    ("data", "eps"): (float, 0.0, lambda v: 0.0 <= v <= 0.1,
                      "perturbation scale"),
    ("data", "U0"): (float, 1.0, lambda v: 0.0 < v <= 1.0,
                     "eikonal depth of the data slab (0, 1]"),
    ("grid", "nu"): (int, 512, lambda v: v >= 16, "u-nodes (>= 16)"),
    ("grid", "ntheta"): (int, 128, lambda v: v >= 8,
                         "periodic theta cells (>= 8)"),
    ("grid", "nx"): (int, 1024, lambda v: v >= 32,
                     "cartesian x^1 cells (>= 32)"),
    ("grid", "x_lo"): (float, -1.0, lambda v: v < 0.0,
                       "cartesian domain lower edge (< 0)"),
    ("grid", "x_hi"): (float, 3.0, lambda v: v > 1.0,
                       "cartesian domain upper edge (> 1)"),
    ("grid", "cfl"): (float, 0.4, lambda v: 0.0 < v <= 4.0,
                      "Courant fraction (0, 4]"),
    ("output", "snap_times"): (_float_list, [], lambda v: True,
                               "comma-separated snapshot times"),
    ("output", "series_stride"): (int, 1, lambda v: v >= 1,
                                  "sample the series every N steps"),
}

_SECTIONS = []
for (_s, _k) in SCHEMA:
    if _s not in _SECTIONS:
        _SECTIONS.append(_s)


class RunConfig:
    """Validated run configuration; attribute access via cfg[section, key]."""

    def __init__(self, values=None):
        self.values = {sk: SCHEMA[sk][1] for sk in SCHEMA}
        if values:
            self.values.update(values)

    def __getitem__(self, sk):
        return self.values[sk]

    def __setitem__(self, sk, value):
        if sk not in SCHEMA:
            raise RangeError(f"harness-cli: unknown config key "
                             f"[{sk[0]}] {sk[1]}")
        typ, _, check, doc = SCHEMA[sk]
        try:
            if typ is _as_bool and isinstance(value, bool):
                coerced = value
            elif typ is _float_list and isinstance(value, (list, tuple)):
                coerced = [float(x) for x in value]
            else:
                coerced = typ(value)
        except Exception:
            raise RangeError(
                f"harness-cli: bad value for [{sk[0]}] {sk[1]} = {value!r} "
                f"({doc})")
        if not check(coerced):
            raise RangeError(
                f"harness-cli: [{sk[0]}] {sk[1]} = {value!r} outside its "
                f"documented range ({doc})")
        self.values[sk] = coerced

    def __eq__(self, other):
        return isinstance(other, RunConfig) and self.values == other.values


def parse_config(path):
    """Parse a config file; ParseError carries the offending line number."""
    cfg = RunConfig()
    section = None
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].split(";", 1)[0].strip()
            if not line:
                continue
            if line.startswith("[") and line.endswith("]"):
                section = line[1:-1].strip()
                if section not in _SECTIONS:
                    raise ParseError(
                        f"harness-cli: line {lineno}: unknown section "
                        f"[{section}]")
                continue
            if "=" not in line:
                raise ParseError(
                    f"harness-cli: line {lineno}: expected 'key = value', "
                    f"got {line!r}")
            key, _, value = line.partition("=")
            key = key.strip()
            value = value.strip()
            if section is None:
                raise ParseError(
                    f"harness-cli: line {lineno}: key {key!r} before any "
                    "[section] header")
            if (section, key) not in SCHEMA:
                raise ParseError(
                    f"harness-cli: line {lineno}: unknown key {key!r} in "
                    f"[{section}]")
            try:
                cfg[(section, key)] = value
            except RangeError:
                raise
    return cfg


def serialize_config(cfg):
    """Canonical text form (stable ordering, parse round-trips)."""
    lines = []
    for section in _SECTIONS:
        lines.append(f"[{section}]")
        for (s, k) in SCHEMA:
            if s != section:
                continue
            v = cfg[(s, k)]
            if isinstance(v, bool):
                v = "true" if v else "false"
            elif isinstance(v, list):
                v = ",".join(f"{x:.17g}" for x in v)
            elif isinstance(v, float):
                v = f"{v:.17g}"
            lines.append(f"{k} = {v}")
        lines.append("")
    return "\n".join(lines)
