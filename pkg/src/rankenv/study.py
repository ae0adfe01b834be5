"""Goodness-of-fit pipelines and the simulation-study harness.

A replicate simulates data from a true model, optionally fits the null
model to it, simulates ``s`` null patterns, estimates the requested
summary functions and runs the (combined) rank test for each function
combination.  Rejection means ``p_erc <= alpha``.
"""
from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .combined import CurveSet
from .envelope import p_erc, p_interval
from .parallel import replicate_map
from .rank_core import Side, erc_ranks, extreme_ranks, pointwise_ranks
from .spatial import Window, cross_l_function, fit_null, generate, random_shift
from .spatial.summary import estimate_many

__all__ = [
    "default_grids",
    "simulate_curvesets",
    "shift_curvesets",
    "StudyConfig",
    "StudyReport",
    "run_study",
    "level_interval",
    "combo_pvalues",
]

FUNCTIONS = ("L", "F", "G", "J")


def default_grids(functions, window: Window, intensity: float, K: int = 500,
                  rmax_l: float | None = None, rmax_fgj: float | None = None) -> dict:
    """Distance grids per summary function.

    L runs up to an eighth of the shorter window side (0.125 on the unit
    square).  F, G and J run up to the distance where the CSR empty-space
    function reaches 3/4, ``sqrt(log 4 / (pi lambda))``, beyond which J
    is dominated by noise.
    """
    side = min(window.width, window.height)
    if rmax_l is None:
        rmax_l = side / 8
    if rmax_fgj is None:
        rmax_fgj = min(math.sqrt(math.log(4) / (math.pi * intensity)), side / 4)
    out = {}
    for f in functions:
        rmax = rmax_l if f == "L" else rmax_fgj
        out[f] = np.linspace(0.0, rmax, K)
    return out


def _curves(pattern, functions, grids, correction, lattice):
    by_range = {}
    for f in functions:
        key = float(grids[f][-1]), grids[f].size
        by_range.setdefault(key, []).append(f)
    out = {}
    for (_, _), fs in by_range.items():
        out.update(estimate_many(pattern, fs, grids[fs[0]], correction, lattice))
    return out


def _simulate_one(i, rng, model, window, functions, grids, correction, lattice):
    return _curves(generate(model, window, rng), functions, grids, correction, lattice)


def _base_seed(seed) -> int:
    if isinstance(seed, np.random.Generator):
        return int(seed.integers(2**63))
    return 0 if seed is None else int(seed)


def simulate_curvesets(data, null_model, functions, nsim: int, seed=None, grids=None, K: int = 500,
                       correction="translational", lattice: int = 64, subtract_r: bool = True,
                       threads: int | None = 1) -> dict:
    """Curve sets (observed first) for each function under ``null_model``.

    ``data`` may be one pattern or a list of patterns; with several
    patterns each gets its own simulations and the parts are named
    ``"<function>:<k>"``.  L is reported as ``L(r) - r`` when
    ``subtract_r`` is set; this does not change any rank.  Simulation
    ``i`` of pattern ``k`` uses its own substream, so the result does not
    depend on ``threads``.
    """
    base = _base_seed(seed)
    functions = [f.upper() for f in functions]
    pats = data if isinstance(data, (list, tuple)) else [data]
    out = {}
    for k, pat in enumerate(pats):
        model = null_model[k] if isinstance(null_model, (list, tuple)) else null_model
        g = grids if grids is not None else default_grids(functions, pat.window, max(pat.intensity, 1e-12), K)
        obs = _curves(pat, functions, g, correction, lattice)
        sims = replicate_map(_simulate_one, nsim, base + k, threads,
                             (model, pat.window, functions, g, correction, lattice))
        for f in functions:
            curves = np.vstack([obs[f]] + [c[f] for c in sims])
            if f == "L" and subtract_r:
                curves = curves - g[f]
            name = f if len(pats) == 1 else f"{f}:{k + 1}"
            out[name] = CurveSet(g[f], curves, name=name, side=Side.TWO_SIDED)
    return out


def _shift_one(i, rng, p, fixed, pairs, r, correction):
    q = random_shift(p, fixed, rng)
    return [cross_l_function(q, a, b, r, correction) for a, b in pairs]


def shift_curvesets(p, nsim: int, seed=None, r=None, K: int = 500, correction="translational",
                    threads: int | None = 1, subtract_r: bool = True) -> dict:
    """Cross-type L curve sets for every pair of types under random superposition.

    Each simulation shifts all types except the smallest label by
    independent uniform torus offsets, and the same shifted pattern feeds
    every pair, so the sub-tests can be combined into one test.
    """
    types = [t.item() for t in p.types()]
    if len(types) < 2:
        raise ValueError("shift test needs at least two types")
    pairs = list(itertools.combinations(types, 2))
    if r is None:
        r = np.linspace(0.0, min(p.window.width, p.window.height) / 8, K)
    r = np.asarray(r, dtype=float)
    obs = [cross_l_function(p, a, b, r, correction) for a, b in pairs]
    sims = replicate_map(_shift_one, nsim, _base_seed(seed), threads,
                         (p, (types[0],), pairs, r, correction))
    out = {}
    for k, (a, b) in enumerate(pairs):
        curves = np.vstack([obs[k]] + [s[k] for s in sims])
        if subtract_r:
            curves = curves - r
        name = f"L{a},{b}"
        out[name] = CurveSet(r, curves, name=name, side=Side.TWO_SIDED)
    return out


def combo_pvalues(ranks: dict, combos) -> dict:
    """p-interval and erc p-value for each combination of per-function ranks.

    Pointwise ranks are column-wise, so each function is ranked once and
    combinations only concatenate rank matrices.
    """
    out = {}
    for combo in combos:
        pr = np.hstack([ranks[f] for f in combo])
        pi = p_interval(extreme_ranks(pr))
        out[",".join(combo)] = (p_erc(erc_ranks(pr)), pi.p_minus, pi.p_plus)
    return out


@dataclass
class StudyConfig:
    true_model: object
    null: object = "known"  # "known", "csr", "matclust", or a model
    combos: list = field(default_factory=lambda: [("L",)])
    nrep: int = 1000
    nsim: int = 999
    alpha: float = 0.05
    seed: int = 0
    window: Window = Window()
    K: int = 500
    correction: str = "translational"
    lattice: int = 64
    rmax_l: float | None = None
    rmax_fgj: float | None = None
    fit_rmax: float | None = None

    @property
    def functions(self) -> list:
        fs = []
        for c in self.combos:
            for f in c:
                if f not in fs:
                    fs.append(f)
        return fs


def _null_for(cfg: StudyConfig, data):
    if cfg.null == "known":
        return cfg.true_model
    if isinstance(cfg.null, str):
        if cfg.null.lower() == "matclust":
            return fit_null("matclust", data, rmax=cfg.fit_rmax)
        return fit_null(cfg.null, data)
    return cfg.null


def run_replicate(i: int, rng: np.random.Generator, cfg: StudyConfig) -> dict:
    try:
        data = generate(cfg.true_model, cfg.window, rng)
        null = _null_for(cfg, data)
        grids = default_grids(cfg.functions, cfg.window, max(data.intensity, 1e-12), cfg.K,
                              cfg.rmax_l, cfg.rmax_fgj)
        sets = simulate_curvesets(data, null, cfg.functions, cfg.nsim, rng, grids,
                                  correction=cfg.correction, lattice=cfg.lattice, threads=1)
        ranks = {f: pointwise_ranks(cs.to_matrix()) for f, cs in sets.items()}
        return {"ok": True, "p": combo_pvalues(ranks, cfg.combos)}
    except (ValueError, RuntimeError) as exc:
        return {"ok": False, "error": f"replicate {i}: {exc}"}


def level_interval(n: int, alpha: float = 0.05, coverage: float = 0.95) -> tuple:
    """Central binomial interval of the rejection proportion at a true level ``alpha``."""
    lo = stats.binom.ppf((1 - coverage) / 2, n, alpha) / n
    hi = stats.binom.ppf(1 - (1 - coverage) / 2, n, alpha) / n
    return float(lo), float(hi)


@dataclass
class StudyReport:
    cells: list
    nrep: int
    nsim: int
    alpha: float
    seed: int
    failures: list
    wall_seconds: float

    def rate(self, functions: str) -> float:
        for c in self.cells:
            if c["functions"] == functions:
                return c["rate"]
        raise KeyError(functions)

    def to_dict(self) -> dict:
        return {"alpha": self.alpha, "cells": self.cells, "failures": self.failures,
                "nrep": self.nrep, "nsim": self.nsim, "seed": self.seed,
                "wall_seconds": self.wall_seconds}


def run_study(cfg: StudyConfig, threads: int | None = None) -> StudyReport:
    """Run ``cfg.nrep`` replicates and tabulate rejection rates per combination."""
    t0 = time.perf_counter()
    res = replicate_map(run_replicate, cfg.nrep, cfg.seed, threads, (cfg,))
    ok = [r["p"] for r in res if r["ok"]]
    failures = [r["error"] for r in res if not r["ok"]]
    n = len(ok)
    cells = []
    for combo in cfg.combos:
        key = ",".join(combo)
        p = np.array([r[key] for r in ok]).reshape(-1, 3)
        rej = int(np.count_nonzero(p[:, 0] <= cfg.alpha))
        ci = stats.binomtest(rej, n).proportion_ci(0.95) if n else None
        cells.append({
            "true_model": str(cfg.true_model),
            "null": cfg.null if isinstance(cfg.null, str) else str(cfg.null),
            "functions": key,
            "n": n,
            "rejections": rej,
            "rate": rej / n if n else float("nan"),
            "ci_low": float(ci.low) if ci else float("nan"),
            "ci_high": float(ci.high) if ci else float("nan"),
            "rate_p_plus": float(np.mean(p[:, 2] <= cfg.alpha)) if n else float("nan"),
            "rate_p_minus": float(np.mean(p[:, 1] <= cfg.alpha)) if n else float("nan"),
        })
    return StudyReport(cells, cfg.nrep, cfg.nsim, cfg.alpha, cfg.seed, failures,
                       time.perf_counter() - t0)
