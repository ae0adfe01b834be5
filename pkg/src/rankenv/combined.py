"""Combining several test functions, patterns or deviation measures."""
from __future__ import annotations

import enum
import json
import os
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .envelope import RankTestResult, run_rank_test, write_envelope_csv
from .rank_core import Side, TestMatrix, extreme_ranks, pointwise_ranks

__all__ = [
    "CurveSet",
    "CombinedCurveSet",
    "Measure",
    "DeviationVector",
    "concatenate",
    "two_stage_extreme_ranks",
    "deviation_measures",
    "deviation_vector",
    "combined_deviation_test",
    "write_combined_result",
]


@dataclass
class CurveSet:
    """Observed curve (row 0) and ``s`` simulated curves on a common grid."""

    args: np.ndarray
    curves: np.ndarray
    name: str = "T"
    side: Side = Side.TWO_SIDED

    def __post_init__(self):
        self.args = np.asarray(self.args, dtype=float)
        self.curves = np.asarray(self.curves, dtype=float)
        if self.curves.ndim == 1:
            self.curves = self.curves[:, None]
        if self.args.ndim != 1 or self.args.size < 1:
            raise ValueError("argument grid must be a non-empty vector")
        if not np.all(np.isfinite(self.args)):
            raise ValueError("argument grid must be finite")
        if self.args.size > 1 and np.any(np.diff(self.args) <= 0):
            raise ValueError("argument grid must be strictly increasing")
        if self.curves.ndim != 2 or self.curves.shape[1] != self.args.size:
            raise ValueError(f"curves of shape {self.curves.shape} do not match a grid of length {self.args.size}")
        if self.curves.shape[0] < 2:
            raise ValueError("need the observed curve and at least one simulated curve")
        self.side = Side.parse(self.side)

    @property
    def s(self) -> int:
        return self.curves.shape[0] - 1

    @property
    def K(self) -> int:
        return self.args.size

    def to_matrix(self) -> TestMatrix:
        return TestMatrix(self.curves, side=self.side, args=self.args,
                          segments=[(self.name, 0, self.K)])


@dataclass
class CombinedCurveSet:
    parts: list
    allow_unequal: bool = False

    def __post_init__(self):
        if not self.parts:
            raise ValueError("nothing to combine")
        s = {p.s for p in self.parts}
        if len(s) != 1:
            raise ValueError(f"parts disagree on the number of simulations: {sorted(s)}")
        ks = {p.K for p in self.parts}
        if len(ks) != 1 and not self.allow_unequal:
            raise ValueError(
                f"parts have unequal grid lengths {sorted(ks)}; equal lengths give each "
                "function the same weight (pass allow_unequal=True to override)")

    @property
    def offsets(self) -> list[int]:
        out = [0]
        for p in self.parts:
            out.append(out[-1] + p.K)
        return out

    def to_matrix(self) -> TestMatrix:
        values = np.hstack([p.curves for p in self.parts])
        sides = [p.side for p in self.parts for _ in range(p.K)]
        args = np.concatenate([p.args for p in self.parts])
        off = self.offsets
        segments = [(p.name, off[i], off[i + 1]) for i, p in enumerate(self.parts)]
        if len({p.side for p in self.parts}) == 1:
            sides = self.parts[0].side
        return TestMatrix(values, side=sides, args=args, segments=segments)


def concatenate(parts: Sequence[CurveSet], allow_unequal: bool = False) -> TestMatrix:
    """Concatenate curve sets into one test matrix, part after part."""
    return CombinedCurveSet(list(parts), allow_unequal=allow_unequal).to_matrix()


def two_stage_extreme_ranks(parts: Sequence[CurveSet]) -> np.ndarray:
    """Row-wise minimum of the extreme ranks of each part's own test."""
    parts = list(parts)
    CombinedCurveSet(parts, allow_unequal=True)
    per_part = [extreme_ranks(pointwise_ranks(p.to_matrix())) for p in parts]
    return np.min(np.vstack(per_part), axis=0)


class Measure(str, enum.Enum):
    INT_L2 = "int_l2"
    MAX = "max"
    SCALED_MAX_Q = "scaled_max_q"

    @classmethod
    def parse(cls, value) -> "Measure":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower().replace("-", "_")
        aliases = {"intl2": "int_l2", "l2": "int_l2", "scaledmaxq": "scaled_max_q", "qdir": "scaled_max_q"}
        return cls(aliases.get(key, key))


@dataclass
class DeviationVector:
    u: np.ndarray  # (s+1, d)
    measure: Measure
    names: list | None = None


def _trapezoid_weights(r: np.ndarray) -> np.ndarray:
    if r.size == 1:
        return np.ones(1)
    w = np.empty_like(r)
    dr = np.diff(r)
    w[0] = dr[0] / 2
    w[-1] = dr[-1] / 2
    w[1:-1] = (dr[:-1] + dr[1:]) / 2
    return w


def deviation_measures(c: CurveSet, measure="max", quantiles=(0.025, 0.975)) -> np.ndarray:
    """Scalar discrepancy ``u_i`` of each curve from the central function.

    The central function is the pointwise mean of all ``s+1`` curves, so
    every row is treated alike.

    ``int_l2``
        trapezoid-weighted integral of the squared difference.
    ``max``
        largest absolute difference; one-sided curve sets use the signed
        difference in the extreme direction.
    ``scaled_max_q``
        largest difference scaled by the distance from the central
        function to the upper or lower pointwise quantile.  Grid points
        where a scaling denominator is not positive are skipped with a
        warning.
    """
    measure = Measure.parse(measure)
    if c.s < 2:
        raise ValueError("need s >= 2 to estimate the central function")
    T = c.curves
    T0 = T.mean(axis=0)
    dev = T - T0
    if measure is Measure.INT_L2:
        return (dev ** 2) @ _trapezoid_weights(c.args)
    if measure is Measure.MAX:
        if c.side is Side.UPPER:
            return dev.max(axis=1)
        if c.side is Side.LOWER:
            return (-dev).max(axis=1)
        return np.abs(dev).max(axis=1)
    lo_q, hi_q = quantiles
    q_low, q_upp = np.quantile(T, [lo_q, hi_q], axis=0)
    up = q_upp - T0
    down = T0 - q_low
    ok = (up > 0) & (down > 0)
    if c.side is Side.UPPER:
        ok = up > 0
    elif c.side is Side.LOWER:
        ok = down > 0
    n_bad = int(np.count_nonzero(~ok))
    if n_bad:
        warnings.warn(f"{c.name}: {n_bad} grid point(s) with degenerate quantile scaling skipped",
                      RuntimeWarning, stacklevel=2)
    if not ok.any():
        return np.zeros(T.shape[0])
    with np.errstate(divide="ignore", invalid="ignore"):
        a = dev[:, ok] / up[ok]
        b = -dev[:, ok] / down[ok]
    if c.side is Side.UPPER:
        return a.max(axis=1)
    if c.side is Side.LOWER:
        return b.max(axis=1)
    return np.maximum(a, b).max(axis=1)


def deviation_vector(parts: Sequence[CurveSet], measure="max") -> DeviationVector:
    """One deviation column per curve set."""
    parts = list(parts)
    CombinedCurveSet(parts, allow_unequal=True)
    u = np.column_stack([deviation_measures(p, measure) for p in parts])
    return DeviationVector(u=u, measure=Measure.parse(measure), names=[p.name for p in parts])


def combined_deviation_test(devs: DeviationVector, alpha: float = 0.05) -> RankTestResult:
    """One-sided rank test on deviation values; large ``u`` is extreme."""
    u = devs.u if isinstance(devs, DeviationVector) else np.asarray(devs, dtype=float)
    if u.ndim == 1:
        u = u[:, None]
    names = devs.names if isinstance(devs, DeviationVector) and devs.names else [f"u{j + 1}" for j in range(u.shape[1])]
    m = TestMatrix(u, side=Side.UPPER, args=np.arange(1, u.shape[1] + 1, dtype=float),
                   segments=[(n, j, j + 1) for j, n in enumerate(names)])
    return run_rank_test(m, alpha)


def write_combined_result(outdir, result: RankTestResult) -> dict:
    """Write one envelope CSV per segment plus ``manifest.json``.

    Returns the manifest dictionary.
    """
    os.makedirs(outdir, exist_ok=True)
    m = result.matrix
    sides = m.column_sides()
    parts = []
    names = [seg[0] for seg in m.segments]
    for k, (name, a, b) in enumerate(m.segments):
        stem = _safe(name) if names.count(name) == 1 else f"{k + 1}_{_safe(name)}"
        fname = f"envelope_{stem}.csv"
        write_envelope_csv(os.path.join(outdir, fname), result, slice(a, b))
        parts.append({"name": name, "offset": a, "length": b - a,
                      "side": sides[a].value, "file": fname})
    manifest = {"parts": parts, **result.summary()}
    with open(os.path.join(outdir, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return manifest


def _safe(name: str) -> str:
    return "".join(ch if ch.isalnum() or ch in "-_." else "_" for ch in str(name))
