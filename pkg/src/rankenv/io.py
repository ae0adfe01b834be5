"""Curve-set CSV files and JSON result files.

A curve-set CSV is wide: the first column ``r`` holds the grid, the
second the observed curve and every further column one simulated curve.
"""
from __future__ import annotations

import csv
import json
import os

import numpy as np

from .combined import CurveSet
from .envelope import RankTestResult, write_envelope_csv

__all__ = ["read_curveset_csv", "write_curveset_csv", "write_json", "write_result"]


def read_curveset_csv(path, name: str | None = None, side="two-sided") -> CurveSet:
    """Read a wide curve-set CSV; diagnostics carry the line number."""
    rows = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header or header[0].strip() != "r" or len(header) < 3:
            raise ValueError(f"{path}:1: header must be 'r,observed,sim1,...' with at least one simulation")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise ValueError(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
            try:
                vals = [float(v) for v in row]
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from None
            if not np.all(np.isfinite(vals)):
                raise ValueError(f"{path}:{lineno}: non-finite value")
            rows.append(vals)
    if not rows:
        raise ValueError(f"{path}: no data rows")
    a = np.asarray(rows)
    r = a[:, 0]
    if r.size > 1 and np.any(np.diff(r) <= 0):
        bad = int(np.argmax(np.diff(r) <= 0)) + 3
        raise ValueError(f"{path}:{bad}: grid column r is not strictly increasing")
    if name is None:
        name = os.path.splitext(os.path.basename(os.fspath(path)))[0]
    return CurveSet(r, a[:, 1:].T.copy(), name=name, side=side)


def write_curveset_csv(path, cs: CurveSet) -> None:
    s = cs.curves.shape[0] - 1
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["r", "observed"] + [f"sim{i}" for i in range(1, s + 1)])
        for k, r in enumerate(cs.args):
            w.writerow([repr(float(r))] + [repr(float(v)) for v in cs.curves[:, k]])


def write_json(path, obj) -> None:
    """Sorted, indented JSON with a trailing newline, so equal inputs give equal bytes."""
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_result(outdir, result: RankTestResult, extra: dict | None = None) -> dict:
    """``result.json`` and ``envelope.csv`` for a single rank test."""
    os.makedirs(outdir, exist_ok=True)
    summary = result.summary()
    if extra:
        summary.update(extra)
    write_json(os.path.join(outdir, "result.json"), summary)
    write_envelope_csv(os.path.join(outdir, "envelope.csv"), result)
    return summary
