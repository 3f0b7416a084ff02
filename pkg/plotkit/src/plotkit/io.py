"""Readers for the schema-1 artifacts written by the simulation harness.

plotkit talks to the simulator only through these files: the series CSV
(`# schema=1` + one header line), whitespace snapshot tables, the
`shock_report` key = value file, and sweep aggregates.
"""

import os

import numpy as np


class SchemaError(Exception):
    """File is not a schema-1 artifact."""


class MissingColumn(Exception):
    """A required column is absent from the input."""


def read_series(path):
    with open(path, "r", encoding="utf-8") as fh:
        if fh.readline().strip() != "# schema=1":
            raise SchemaError(f"{path}: missing '# schema=1' marker")
        cols = fh.readline().strip().split(",")
        rows = [line.strip().split(",") for line in fh if line.strip()]
    data = np.array(rows, dtype=float)
    return {c: data[:, i] for i, c in enumerate(cols)}


def read_sweep(path):
    with open(path, "r", encoding="utf-8") as fh:
        if fh.readline().strip() != "# schema=1":
            raise SchemaError(f"{path}: missing '# schema=1' marker")
        cols = fh.readline().strip().split(",")
        rows = [line.strip().split(",") for line in fh if line.strip()]
    out = {c: [] for c in cols}
    for r in rows:
        for c, v in zip(cols, r):
            try:
                out[c].append(float(v))
            except ValueError:
                out[c].append(v)
    return out


def read_snapshot(path):
    with open(path, "r", encoding="utf-8") as fh:
        if fh.readline().strip() != "# schema=1":
            raise SchemaError(f"{path}: missing '# schema=1' marker")
        t = float(fh.readline().split("=")[1])
        cols = fh.readline().split()
        data = np.loadtxt(fh)
    if data.ndim == 1:
        data = data[None, :]
    return t, {c: data[:, i] for i, c in enumerate(cols)}


def read_report(path):
    out = {}
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            k, _, v = line.partition("=")
            try:
                out[k.strip()] = float(v.strip())
            except ValueError:
                out[k.strip()] = v.strip()
    return out


def need(table, *cols):
    for c in cols:
        if c not in table:
            raise MissingColumn(f"required column {c!r} not found "
                                f"(have {sorted(table)[:8]}...)")
    return [np.asarray(table[c]) for c in cols]


def run_dir_files(run_dir):
    series = os.path.join(run_dir, "series.csv")
    report = os.path.join(run_dir, "shock_report")
    snaps = sorted(os.path.join(run_dir, f) for f in os.listdir(run_dir)
                   if f.startswith("snapshot_") and f.endswith(".txt"))
    sweep = os.path.join(run_dir, "sweep.csv")
    return {"series": series if os.path.exists(series) else None,
            "report": report if os.path.exists(report) else None,
            "snapshots": snaps,
            "sweep": sweep if os.path.exists(sweep) else None}
