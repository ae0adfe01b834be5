"""Fitting null models to an observed pattern."""
from __future__ import annotations

import math

import numpy as np
from scipy import optimize

from .models import MatClust, Poisson
from .pattern import PointPattern
from .summary import pcf

__all__ = ["fit_csr", "fit_matclust", "fit_null", "FitError"]


class FitError(RuntimeError):
    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


def fit_csr(p: PointPattern) -> Poisson:
    """Poisson model with intensity ``n / |W|``."""
    if p.n < 1:
        raise ValueError("cannot fit an empty pattern")
    return Poisson(p.intensity)


def fit_matclust(p: PointPattern, rmax: float | None = None, rmin: float | None = None,
                 q: float = 0.25, K: int = 128, bandwidth: float | None = None) -> MatClust:
    """Minimum-contrast fit of a Matérn cluster process.

    Minimises ``int (g_hat(r)^q - g(r; kappa, R)^q)^2 dr`` over
    ``(kappa, R)`` on ``[rmin, rmax]`` and sets ``mu = n / (kappa |W|)``.
    ``rmin`` defaults to the kernel bandwidth, below which the kernel
    estimate of ``g`` is biased towards 0.  ``rmax`` defaults to a
    sixteenth of the shorter window side (but at least four bandwidths):
    the short range is where cluster structure shows, and fits over longer
    ranges blur mixtures of cluster sizes.
    """
    if p.n < 2:
        raise ValueError("cannot fit a cluster process to fewer than 2 points")
    lam = p.intensity
    bw = 0.15 / math.sqrt(lam) if bandwidth is None else bandwidth
    lo = bw if rmin is None else rmin
    if rmax is None:
        rmax = max(min(p.window.width, p.window.height) / 16, 4 * bw)
    if not 0 < lo < rmax:
        raise ValueError(f"empty contrast range [{lo}, {rmax}]")
    r = np.linspace(lo, rmax, K)
    ghat = np.maximum(pcf(p, r, bw), 0.0) ** q
    wts = np.full(K, (rmax - lo) / (K - 1))
    wts[[0, -1]] /= 2

    def contrast(theta):
        kappa, R = np.exp(theta)
        g = MatClust(kappa, R, 1.0).pcf(r)
        return float(np.sum(wts * (ghat - g ** q) ** 2))

    # start: parents as dense as a tenth of the points, clusters of radius rmax/2
    starts = [np.log([lam / 10, rmax / 2]), np.log([lam / 50, rmax / 4]), np.log([lam / 2, rmax])]
    best = None
    for x0 in starts:
        res = optimize.minimize(contrast, x0, method="Nelder-Mead",
                                options={"xatol": 1e-6, "fatol": 1e-12, "maxiter": 2000})
        if best is None or res.fun < best.fun:
            best = res
    kappa, R = np.exp(best.x)
    if not (np.isfinite(kappa) and np.isfinite(R) and kappa > 0 and R > 0):
        raise FitError("minimum contrast fit failed", best=best.x)
    return MatClust(float(kappa), float(R), float(p.n / (kappa * p.window.area)))


def fit_null(model_family: str, p: PointPattern, **kw):
    """Fit ``"csr"`` or ``"matclust"`` to ``p``."""
    fam = model_family.strip().lower()
    if fam in ("csr", "csrfit", "poisson"):
        return fit_csr(p)
    if fam in ("matclust", "matclustmincontrast"):
        return fit_matclust(p, **kw)
    raise ValueError(f"unknown model family {model_family!r}")
