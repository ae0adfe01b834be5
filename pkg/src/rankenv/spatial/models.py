"""Point process models and their simulation."""
from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .pattern import PointPattern, Window

__all__ = [
    "Poisson",
    "Binomial",
    "MatClust",
    "HardCore",
    "Superposition",
    "mix_matclust",
    "generate",
    "parse_model",
    "as_rng",
]


def as_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


@dataclass(frozen=True)
class Poisson:
    """Homogeneous Poisson process (CSR) with the given intensity."""

    intensity: float

    def __post_init__(self):
        if not self.intensity > 0:
            raise ValueError("Poisson intensity must be positive")

    def __str__(self):
        return f"Poisson({self.intensity:g})"


@dataclass(frozen=True)
class Binomial:
    """Fixed number of independent uniform points."""

    n: int

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("point count must be non-negative")

    def __str__(self):
        return f"Binomial({self.n})"


@dataclass(frozen=True)
class MatClust:
    """Matérn cluster process.

    Parents form a Poisson process of intensity ``kappa``; each has a
    Poisson(``mu``) number of daughters uniform in a disc of radius
    ``radius``.
    """

    kappa: float
    radius: float
    mu: float

    def __post_init__(self):
        if not (self.kappa > 0 and self.radius > 0 and self.mu > 0):
            raise ValueError("MatClust parameters must be positive")

    @property
    def intensity(self) -> float:
        return self.kappa * self.mu

    def pcf(self, r):
        """Pair correlation function ``1 + f(r) / (2 pi r kappa)``.

        ``f`` is the density of the distance between two independent
        uniform points in a disc of radius ``radius``.
        """
        r = np.asarray(r, dtype=float)
        R = self.radius
        z = np.clip(r / (2 * R), 0.0, 1.0)
        # f(r) / (2 pi r), finite at r = 0
        f_over = (2.0 / (np.pi ** 2 * R ** 2)) * (np.arccos(z) - z * np.sqrt(1.0 - z * z))
        return 1.0 + np.where(r < 2 * R, f_over, 0.0) / self.kappa

    def __str__(self):
        return f"MatClust({self.kappa:g}, {self.radius:g}, {self.mu:g})"


@dataclass(frozen=True)
class HardCore:
    """``n`` points with all pairwise distances at least ``h``.

    Starts from random sequential adsorption and then applies ``sweeps``
    rounds of uniform single-point relocations that respect the hard
    core; the relocation chain targets the uniform distribution on
    admissible configurations, i.e. the hard-core Gibbs process
    conditioned on ``n`` points.
    """

    n: int
    h: float
    sweeps: int = 20
    max_tries: int = 1_000_000

    def __post_init__(self):
        if self.n < 0 or self.h < 0:
            raise ValueError("need n >= 0 and h >= 0")

    def __str__(self):
        return f"HardCore({self.n}, {self.h:g})"


@dataclass(frozen=True)
class Superposition:
    """Union of independent component processes."""

    components: tuple

    def __str__(self):
        return "Superposition(" + ", ".join(str(c) for c in self.components) + ")"


def mix_matclust() -> Superposition:
    """The mixed Matérn cluster model: MatClust(10, .06, 30) + MatClust(10, .03, 30)."""
    return Superposition((MatClust(10, 0.06, 30), MatClust(10, 0.03, 30)))


def _uniform(rng, n, window: Window) -> np.ndarray:
    u = rng.random((n, 2))
    u[:, 0] = window.xmin + u[:, 0] * window.width
    u[:, 1] = window.ymin + u[:, 1] * window.height
    return u


def _matclust(model: MatClust, window: Window, rng) -> np.ndarray:
    big = window.dilate(model.radius)
    npar = rng.poisson(model.kappa * big.area)
    parents = _uniform(rng, npar, big)
    counts = rng.poisson(model.mu, size=npar)
    total = int(counts.sum())
    centre = np.repeat(parents, counts, axis=0)
    rad = model.radius * np.sqrt(rng.random(total))
    ang = 2 * np.pi * rng.random(total)
    pts = centre + np.column_stack([rad * np.cos(ang), rad * np.sin(ang)])
    return pts[window.inside(pts[:, 0], pts[:, 1])]


def _hardcore(model: HardCore, window: Window, rng) -> np.ndarray:
    xs = np.empty(model.n)
    ys = np.empty(model.n)
    placed = used = 0
    batch = max(1024, 4 * model.n)
    x0, x1, y0, y1 = window.bounds
    while placed < model.n and used < model.max_tries:
        take = min(batch, model.max_tries - used)
        placed, t = _kernels.rsa_fill(xs, ys, placed, model.h, x0, x1, y0, y1, rng.random(2 * take))
        used += t
    if placed < model.n:
        raise RuntimeError(
            f"hard-core packing failed: placed {placed} of {model.n} points "
            f"with h={model.h} after {used} attempts")
    if model.sweeps > 0 and model.n > 1:
        u = rng.random(3 * model.sweeps * model.n)
        _kernels.hardcore_relax(xs, ys, model.h, x0, x1, y0, y1, model.sweeps, u)
    return np.column_stack([xs, ys])


def _points(model, window: Window, rng) -> np.ndarray:
    if isinstance(model, Poisson):
        return _uniform(rng, rng.poisson(model.intensity * window.area), window)
    if isinstance(model, Binomial):
        return _uniform(rng, model.n, window)
    if isinstance(model, MatClust):
        return _matclust(model, window, rng)
    if isinstance(model, HardCore):
        return _hardcore(model, window, rng)
    if isinstance(model, Superposition):
        parts = [_points(c, window, rng) for c in model.components]
        return np.vstack(parts) if parts else np.empty((0, 2))
    raise TypeError(f"unknown model {model!r}")


def generate(model, window: Window = Window(), seed=None) -> PointPattern:
    """Simulate one realization of ``model`` in ``window``.

    ``seed`` may be an int, a SeedSequence or a Generator; equal seeds
    give identical patterns.
    """
    rng = as_rng(seed)
    return PointPattern(_points(model, window, rng), window)


_NUM = r"[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?"


def parse_model(text: str):
    """Parse a model description such as ``poisson(200)``.

    Accepted forms (case-insensitive, ``:`` may replace the brackets)::

        poisson(200)   binomial(200)   matclust(50, 0.06, 4)
        hardcore(n, h)   mixmatclust   mixmatclust(10, .06, 30, 10, .03, 30)
    """
    s = text.strip().lower().replace(" ", "")
    m = re.fullmatch(r"([a-z]+)(?:[(:](.*?)\)?)?", s)
    if not m:
        raise ValueError(f"cannot parse model {text!r}")
    name, rest = m.group(1), m.group(2) or ""
    nums = [float(v) for v in re.findall(_NUM, rest)]

    def need(k):
        if len(nums) != k:
            raise ValueError(f"model {name} takes {k} parameters, got {len(nums)} in {text!r}")

    if name in ("poisson", "csr"):
        need(1)
        return Poisson(nums[0])
    if name == "binomial":
        need(1)
        return Binomial(int(nums[0]))
    if name == "matclust":
        need(3)
        return MatClust(*nums)
    if name == "hardcore":
        need(2)
        return HardCore(int(nums[0]), nums[1])
    if name == "mixmatclust":
        if not nums:
            return mix_matclust()
        need(6)
        return Superposition((MatClust(*nums[:3]), MatClust(*nums[3:])))
    raise ValueError(f"unknown model {name!r}")
