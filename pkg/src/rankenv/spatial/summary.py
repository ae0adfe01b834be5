"""Estimators of the L, F, G and J functions and the cross-type L function."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .pattern import PointPattern

__all__ = ["EdgeCorrection", "SummarySpec", "estimate_summary", "k_function", "l_function",
           "f_function", "g_function", "j_function", "cross_l_function", "pcf"]


class EdgeCorrection(str, enum.Enum):
    NONE = "none"
    TRANSLATIONAL = "translational"
    BORDER = "border"
    PERIODIC = "periodic"

    @classmethod
    def parse(cls, value) -> "EdgeCorrection":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower()
        aliases = {"translate": "translational", "trans": "translational",
                   "torus": "periodic", "rs": "border", "reduced": "border"}
        return cls(aliases.get(key, key))


_MODE = {
    EdgeCorrection.NONE: _kernels.NONE,
    EdgeCorrection.TRANSLATIONAL: _kernels.TRANSLATE,
    EdgeCorrection.BORDER: _kernels.BORDER,
    EdgeCorrection.PERIODIC: _kernels.PERIODIC,
}

J_EPS = 1e-6


@dataclass(frozen=True)
class SummarySpec:
    """Which summary function to estimate and where.

    ``function`` is one of ``"L"``, ``"F"``, ``"G"``, ``"J"`` or a
    ``("crossL", i, j)`` tuple.  ``edge_correction`` applies to L and
    cross-L; F and G always use the border (reduced sample) estimator.
    """

    function: object
    grid: tuple
    edge_correction: EdgeCorrection = EdgeCorrection.TRANSLATIONAL
    lattice: int = 64

    @property
    def r(self) -> np.ndarray:
        return np.asarray(self.grid, dtype=float)

    @property
    def name(self) -> str:
        if isinstance(self.function, tuple):
            return f"L{self.function[1]}{self.function[2]}"
        return str(self.function)


def _grid(r) -> np.ndarray:
    r = np.asarray(r, dtype=float)
    if r.ndim != 1 or r.size < 1:
        raise ValueError("distance grid must be a non-empty vector")
    if r[0] < 0 or (r.size > 1 and np.any(np.diff(r) <= 0)):
        raise ValueError("distance grid must be non-negative and strictly increasing")
    return r


def k_function(p: PointPattern, r, correction="translational") -> np.ndarray:
    """Ripley's K with intensity-squared estimate ``n (n-1) / |W|^2``."""
    r = _grid(r)
    corr = EdgeCorrection.parse(correction)
    n = p.n
    if n < 2:
        raise ValueError("K/L estimation needs at least 2 points")
    x0, x1, y0, y1 = p.window.bounds
    A = p.window.area
    s = _kernels.pair_counts(p.x, p.y, r, x0, x1, y0, y1, _MODE[corr])
    if corr is EdgeCorrection.TRANSLATIONAL:
        return A * A * s / (n * (n - 1))
    if corr is EdgeCorrection.BORDER:
        nb = _kernels.border_counts(p.x, p.y, r, x0, x1, y0, y1)
        with np.errstate(divide="ignore", invalid="ignore"):
            k = np.where(nb > 0, A * s / (n * np.maximum(nb, 1)), np.nan)
        return _carry_forward(k)
    return A * s / (n * (n - 1))


def l_function(p: PointPattern, r, correction="translational") -> np.ndarray:
    return np.sqrt(k_function(p, r, correction) / math.pi)


def cross_l_function(p: PointPattern, i, j, r, correction="translational") -> np.ndarray:
    """Bivariate L from points of type ``i`` to points of type ``j``."""
    r = _grid(r)
    corr = EdgeCorrection.parse(correction)
    if p.marks is None:
        raise ValueError("cross-type L needs a marked pattern")
    a = p.points[p.marks == i]
    b = p.points[p.marks == j]
    if i == j:
        if a.shape[0] < 2:
            raise ValueError(f"type {i} has {a.shape[0]} point(s); need at least 2")
        sub = PointPattern(a, p.window)
        return l_function(sub, r, corr)
    for t, pts in ((i, a), (j, b)):
        if pts.shape[0] < 1:
            raise ValueError(f"type {t} has no points")
    x0, x1, y0, y1 = p.window.bounds
    A = p.window.area
    s = _kernels.cross_pair_counts(a[:, 0].copy(), a[:, 1].copy(), b[:, 0].copy(), b[:, 1].copy(),
                                   r, x0, x1, y0, y1, _MODE[corr])
    na, nb = a.shape[0], b.shape[0]
    if corr is EdgeCorrection.TRANSLATIONAL:
        k = A * A * s / (na * nb)
    elif corr is EdgeCorrection.BORDER:
        sub = PointPattern(a, p.window)
        cnt = _kernels.border_counts(sub.x, sub.y, r, x0, x1, y0, y1)
        with np.errstate(divide="ignore", invalid="ignore"):
            k = _carry_forward(np.where(cnt > 0, A * s / (nb * np.maximum(cnt, 1)), np.nan))
    else:
        k = A * s / (na * nb)
    return np.sqrt(k / math.pi)


def g_function(p: PointPattern, r) -> np.ndarray:
    """Nearest-neighbour distance distribution, border corrected."""
    r = _grid(r)
    if p.n < 2:
        raise ValueError("G estimation needs at least 2 points")
    d = _kernels.nn_distances(p.x, p.y)
    return _kernels.reduced_sample_cdf(d, _border_dist(p.points, p.window), r)


def _lattice(window, nx, ny) -> np.ndarray:
    gx = window.xmin + (np.arange(nx) + 0.5) * window.width / nx
    gy = window.ymin + (np.arange(ny) + 0.5) * window.height / ny
    xx, yy = np.meshgrid(gx, gy)
    return np.column_stack([xx.ravel(), yy.ravel()])


def _border_dist(pts, window) -> np.ndarray:
    return np.minimum.reduce([pts[:, 0] - window.xmin, window.xmax - pts[:, 0],
                              pts[:, 1] - window.ymin, window.ymax - pts[:, 1]])


_LATTICE_BORDER = {}


def f_function(p: PointPattern, r, lattice: int = 64) -> np.ndarray:
    """Empty-space function from an ``lattice x lattice`` grid of cell centres."""
    r = _grid(r)
    if p.n < 1:
        raise ValueError("F estimation needs at least 1 point")
    w = p.window
    key = (w, lattice)
    if key not in _LATTICE_BORDER:
        _LATTICE_BORDER[key] = _border_dist(_lattice(w, lattice, lattice), w)
    x0, x1, y0, y1 = w.bounds
    e = _kernels.lattice_empty_space(p.x, p.y, x0, x1, y0, y1, lattice, lattice, float(r[-1]))
    return _kernels.reduced_sample_cdf(e, _LATTICE_BORDER[key], r)


def j_function(p: PointPattern, r, lattice: int = 64, g=None, f=None, eps: float = J_EPS) -> np.ndarray:
    """``(1 - G) / (1 - F)``; past the first r with ``1 - F < eps`` the last value is held."""
    r = _grid(r)
    g = g_function(p, r) if g is None else g
    f = f_function(p, r, lattice) if f is None else f
    ok = (1.0 - f) >= eps
    with np.errstate(divide="ignore", invalid="ignore"):
        j = np.where(ok, (1.0 - g) / (1.0 - f), np.nan)
    if not ok.all():
        j[np.argmin(ok):] = np.nan
    return _carry_forward(j, start=1.0)


def _carry_forward(v: np.ndarray, start: float = 0.0) -> np.ndarray:
    ok = ~np.isnan(v)
    if ok.all():
        return v.copy()
    # index of the latest defined value at or before each position, -1 if none
    idx = np.maximum.accumulate(np.where(ok, np.arange(v.size), -1))
    return np.where(idx >= 0, v[np.maximum(idx, 0)], start)


def pcf(p: PointPattern, r, bandwidth: float | None = None) -> np.ndarray:
    """Translation-corrected kernel estimate of the pair correlation function.

    Epanechnikov kernel; the default bandwidth ``0.15 / sqrt(lambda)``
    follows Stoyan's rule of thumb.
    """
    r = _grid(r)
    if np.any(r <= 0):
        raise ValueError("pair correlation needs r > 0")
    n = p.n
    if n < 2:
        raise ValueError("pair correlation needs at least 2 points")
    lam = p.intensity
    bw = 0.15 / math.sqrt(lam) if bandwidth is None else bandwidth
    x0, x1, y0, y1 = p.window.bounds
    s = _kernels.pcf_epanechnikov(p.x, p.y, r, bw, x0, x1, y0, y1)
    A = p.window.area
    return s * A * A / (n * (n - 1))


def estimate_summary(p: PointPattern, spec: SummarySpec) -> np.ndarray:
    """Estimate the summary function described by ``spec`` on its grid."""
    r = spec.r
    fn = spec.function
    if isinstance(fn, tuple):
        _, i, j = fn
        return cross_l_function(p, i, j, r, spec.edge_correction)
    key = str(fn).upper()
    if key == "L":
        return l_function(p, r, spec.edge_correction)
    if key == "K":
        return k_function(p, r, spec.edge_correction)
    if key == "F":
        return f_function(p, r, spec.lattice)
    if key == "G":
        return g_function(p, r)
    if key == "J":
        return j_function(p, r, spec.lattice)
    raise ValueError(f"unknown summary function {fn!r}")


def estimate_many(p: PointPattern, functions, r, correction="translational", lattice: int = 64) -> dict:
    """Several summary functions at once, sharing the F and G work for J."""
    r = _grid(r)
    want = [str(f).upper() for f in functions]
    out = {}
    if "L" in want:
        out["L"] = l_function(p, r, correction)
    if "K" in want:
        out["K"] = k_function(p, r, correction)
    f = f_function(p, r, lattice) if ("F" in want or "J" in want) else None
    g = g_function(p, r) if ("G" in want or "J" in want) else None
    if "F" in want:
        out["F"] = f
    if "G" in want:
        out["G"] = g
    if "J" in want:
        out["J"] = j_function(p, r, lattice, g=g, f=f)
    unknown = set(want) - {"L", "K", "F", "G", "J"}
    if unknown:
        raise ValueError(f"unknown summary function(s) {sorted(unknown)}")
    return {k: out[k] for k in want}
