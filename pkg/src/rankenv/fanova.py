"""Permutation-based functional ANOVA and group comparisons."""
from __future__ import annotations

import csv
import enum
import warnings
from dataclasses import dataclass

import numpy as np

from .rank_core import Side, TestMatrix

__all__ = [
    "GroupedCurveSet",
    "Construction",
    "Scaling",
    "fstat_vector",
    "group_mean_vector",
    "pairwise_diff_vector",
    "leave_one_out_vector",
    "moving_average",
    "build_statistic",
    "permutation_engine",
    "read_grouped_csv",
    "write_grouped_csv",
]


@dataclass
class GroupedCurveSet:
    """Observed curves ``(n, K)`` with a group label and optional weight each."""

    args: np.ndarray
    curves: np.ndarray
    groups: np.ndarray
    weights: np.ndarray | None = None
    curve_ids: list | None = None

    def __post_init__(self):
        self.args = np.asarray(self.args, dtype=float)
        self.curves = np.asarray(self.curves, dtype=float)
        self.groups = np.asarray(self.groups)
        if self.curves.ndim != 2 or self.curves.shape[1] != self.args.size:
            raise ValueError("curves must be (n, K) on the argument grid")
        if self.groups.shape != (self.curves.shape[0],):
            raise ValueError("need one group label per curve")
        self.labels, self.codes = np.unique(self.groups, return_inverse=True)
        if self.labels.size < 2:
            raise ValueError("need at least two groups")
        if self.weights is not None:
            self.weights = np.asarray(self.weights, dtype=float)
            if self.weights.shape != self.groups.shape:
                raise ValueError("need one weight per curve")
            if np.any(~(self.weights > 0)):
                raise ValueError("weights must be strictly positive")

    @property
    def J(self) -> int:
        return self.labels.size

    @property
    def n(self) -> int:
        return self.curves.shape[0]

    @property
    def sizes(self) -> np.ndarray:
        return np.bincount(self.codes, minlength=self.J)


class Construction(str, enum.Enum):
    FSTAT = "fstat"
    GROUP_MEANS = "means"
    PAIRWISE = "pairwise"
    LEAVE_ONE_OUT = "loo"


class Scaling(str, enum.Enum):
    NONE = "none"
    UNIT_VAR = "unit"
    UNIT_VAR_MA = "ma"


def moving_average(v: np.ndarray, b: int) -> np.ndarray:
    """Centred moving average over ``b`` points along the last axis.

    The window is truncated at the grid ends, so the output keeps the
    input length.
    """
    if b < 1 or b % 2 == 0:
        raise ValueError("moving-average window must be a positive odd integer")
    v = np.asarray(v, dtype=float)
    if b == 1:
        return v.copy()
    K = v.shape[-1]
    half = b // 2
    c = np.concatenate([np.zeros(v.shape[:-1] + (1,)), np.cumsum(v, axis=-1)], axis=-1)
    lo = np.clip(np.arange(K) - half, 0, K)
    hi = np.clip(np.arange(K) + half + 1, 0, K)
    return (c[..., hi] - c[..., lo]) / (hi - lo)


# The statistics are written for a batch of labelings: ``onehot`` has shape
# (B, J, n) with the (weighted) membership of each curve.  A single
# labeling is the B = 1 case.


def _onehot(codes: np.ndarray, J: int) -> np.ndarray:
    codes = np.atleast_2d(codes)
    return (codes[:, None, :] == np.arange(J)[None, :, None]).astype(float)


def _group_moments(g: GroupedCurveSet, codes: np.ndarray, weighted: bool):
    """Group means, variances of the group means, sample variances and sizes.

    Shapes (B, J, K), (B, J, K), (B, J, K), (B, J).  The variance of a
    group mean is ``S^2 * sum_j (m_ij / m_i)^2`` with ``S^2`` the
    unweighted sample variance of the group's curves, i.e. ``S^2 / n_i``
    without weights.
    """
    X = g.curves
    Xc = X - X.mean(axis=0)  # centring keeps the variance sums well conditioned
    oh = _onehot(codes, g.J)
    sizes = oh.sum(axis=2)
    w = oh * g.weights[None, None, :] if (weighted and g.weights is not None) else oh
    wsum = w.sum(axis=2)
    means = (w / wsum[..., None]) @ X
    cmean = (oh / np.maximum(sizes, 1)[..., None]) @ Xc
    sq = oh @ (Xc * Xc)
    with np.errstate(invalid="ignore", divide="ignore"):
        s2 = np.maximum(sq - sizes[..., None] * cmean ** 2, 0.0) / (sizes[..., None] - 1)
    var_mean = s2 * ((w * w).sum(axis=2) / wsum ** 2)[..., None]
    return means, var_mean, s2, sizes


def _rest_moments(g: GroupedCurveSet, codes, weighted: bool):
    """Adds the mean of all curves outside each group and that mean's variance.

    Each outside curve contributes its own group's sample variance.
    """
    X = g.curves
    oh = _onehot(codes, g.J)
    means, var_mean, s2, sizes = _group_moments(g, codes, weighted)
    base = g.weights if (weighted and g.weights is not None) else np.ones(g.n)
    cw = base[None, None, :] * (1.0 - oh)
    frac = cw / cw.sum(axis=2)[..., None]
    rest_mean = frac @ X
    curve_s2 = np.einsum("bjn,bjk->bnk", oh, s2)
    rest_var = np.einsum("bin,bnk->bik", frac ** 2, curve_s2)
    return means, var_mean, rest_mean, rest_var, sizes


def fstat_vector(g: GroupedCurveSet, welch: bool = False, codes=None, warn: bool = True) -> np.ndarray:
    """Pointwise one-way ANOVA F statistic.

    ``welch=True`` uses Welch's heteroscedastic F with weights
    ``n_j / S_j^2``, falling back to the plain F where some group has
    zero variance.  Grid points with zero within-group variance give
    ``+inf`` (or 0 when the groups also agree there).
    """
    single = codes is None
    codes = g.codes if codes is None else codes
    X = g.curves
    oh = _onehot(codes, g.J)
    sizes = oh.sum(axis=2)
    if np.any(sizes < 2):
        raise ValueError("every group needs at least two curves")
    Xc = X - X.mean(axis=0)
    means = (oh / sizes[..., None]) @ Xc
    sq = oh @ (Xc * Xc)
    ss_within = np.maximum(sq - sizes[..., None] * means ** 2, 0.0)
    N = g.n
    J = g.J
    with np.errstate(divide="ignore", invalid="ignore"):
        ss_between = (sizes[..., None] * means ** 2).sum(axis=1)
        F = (ss_between / (J - 1)) / (ss_within.sum(axis=1) / (N - J))
        if welch:
            plain = F
            s2 = ss_within / (sizes[..., None] - 1)
            w = sizes[..., None] / s2
            W = w.sum(axis=1)
            mw = (w * means).sum(axis=1) / W
            A = (w * (means - mw[:, None, :]) ** 2).sum(axis=1) / (J - 1)
            lam = ((1 - w / W[:, None, :]) ** 2 / (sizes[..., None] - 1)).sum(axis=1)
            F = A / (1 + 2 * (J - 2) / (J * J - 1) * lam)
            # a zero-variance group makes the Welch weights undefined
            F = np.where((s2 > 0).all(axis=1), F, plain)
    F = np.where(np.isnan(F), 0.0, F)
    n_inf = int(np.count_nonzero(np.isinf(F)))
    if warn and n_inf:
        warnings.warn(f"{n_inf} grid point(s) with zero within-group variance set to +inf",
                      RuntimeWarning, stacklevel=2)
    return F[0] if single else F


def group_mean_vector(g: GroupedCurveSet, weighted: bool = True, codes=None) -> np.ndarray:
    """Concatenated group mean curves (weighted when weights are present)."""
    single = codes is None
    codes = g.codes if codes is None else codes
    means = _group_moments(g, codes, weighted)[0]
    out = means.reshape(means.shape[0], -1)
    return out[0] if single else out


def _scale(diff, v1, v2, scaling: Scaling, b: int, warn: bool):
    if scaling is Scaling.NONE:
        return diff
    if scaling is Scaling.UNIT_VAR_MA:
        v1 = moving_average(v1, b)
        v2 = moving_average(v2, b)
    den = np.sqrt(v1 + v2)
    bad = ~(den > 0)
    if warn and bad.any():
        warnings.warn(f"{int(bad.sum())} grid point(s) with zero variance left unscaled",
                      RuntimeWarning, stacklevel=3)
    return np.where(bad, diff, diff / np.where(bad, 1.0, den))


def _pairs(J):
    return [(a, b) for a in range(J) for b in range(a + 1, J)]


def pairwise_diff_vector(g: GroupedCurveSet, scaling="none", b: int = 1,
                         weighted: bool = True, codes=None, warn: bool = True) -> np.ndarray:
    """Differences of group means for all pairs ``(1,2), (1,3), ..., (J-1,J)``.

    ``scaling="unit"`` divides each difference by the estimated standard
    deviation ``sqrt(Var(mean_a) + Var(mean_b))``; ``"ma"`` first smooths
    both variances with a centred moving average of ``b`` points.
    """
    scaling = Scaling(scaling)
    single = codes is None
    codes = g.codes if codes is None else codes
    means, var_mean, _, sizes = _group_moments(g, codes, weighted)
    if scaling is not Scaling.NONE and np.any(sizes < 2):
        raise ValueError("variance scaling needs at least two curves per group")
    segs = []
    for a, c in _pairs(g.J):
        d = means[:, a] - means[:, c]
        segs.append(_scale(d, var_mean[:, a], var_mean[:, c], scaling, b, warn))
    out = np.concatenate(segs, axis=1)
    return out[0] if single else out


def leave_one_out_vector(g: GroupedCurveSet, b: int = 1, scaling="ma",
                         weighted: bool = True, codes=None, warn: bool = True) -> np.ndarray:
    """Each group's mean minus the mean of all other curves, variance scaled."""
    scaling = Scaling(scaling)
    single = codes is None
    codes = g.codes if codes is None else codes
    means, var_mean, rest_mean, rest_var, sizes = _rest_moments(g, codes, weighted)
    if scaling is not Scaling.NONE and np.any(sizes < 2):
        raise ValueError("variance scaling needs at least two curves per group")
    segs = [_scale(means[:, i] - rest_mean[:, i], var_mean[:, i], rest_var[:, i], scaling, b, warn)
            for i in range(g.J)]
    out = np.concatenate(segs, axis=1)
    return out[0] if single else out


def segment_labels(g: GroupedCurveSet, construction) -> list:
    construction = Construction(construction)
    lab = [str(v) for v in g.labels]
    if construction is Construction.FSTAT:
        return ["F"]
    if construction is Construction.GROUP_MEANS:
        return [f"group {v}" for v in lab]
    if construction is Construction.PAIRWISE:
        return [f"group {lab[a]} - group {lab[c]}" for a, c in _pairs(g.J)]
    return [f"group {v} - rest" for v in lab]


def build_statistic(g: GroupedCurveSet, construction="fstat", codes=None, warn=True, **kw) -> np.ndarray:
    """Dispatch to the statistic of the chosen construction."""
    construction = Construction(construction)
    if construction is Construction.FSTAT:
        return fstat_vector(g, welch=kw.get("welch", False), codes=codes, warn=warn)
    if construction is Construction.GROUP_MEANS:
        return group_mean_vector(g, weighted=kw.get("weighted", True), codes=codes)
    if construction is Construction.PAIRWISE:
        return pairwise_diff_vector(g, scaling=kw.get("scaling", "none"), b=kw.get("b", 1),
                                    weighted=kw.get("weighted", True), codes=codes, warn=warn)
    return leave_one_out_vector(g, b=kw.get("b", 1), scaling=kw.get("scaling", "ma"),
                                weighted=kw.get("weighted", True), codes=codes, warn=warn)


BLOCK = 256


def permutation_codes(g: GroupedCurveSet, s: int, seed=0) -> np.ndarray:
    """``s`` uniformly random relabelings of the curves, shape ``(s, n)``.

    Replicate ``k`` comes from block ``k // 256``, whose generator is
    seeded with ``(seed, block)``; the result does not depend on how
    blocks are scheduled.
    """
    if s < 1:
        raise ValueError("need s >= 1 permutations")
    out = np.empty((s, g.n), dtype=np.int64)
    for blk in range(0, s, BLOCK):
        rng = np.random.default_rng([int(seed), blk // BLOCK])
        m = min(BLOCK, s - blk)
        out[blk:blk + m] = rng.permuted(np.tile(g.codes, (m, 1)), axis=1)
    return out


def permutation_engine(g: GroupedCurveSet, construction="fstat", s: int = 2499, seed=0,
                       chunk: int = 512, **kw) -> TestMatrix:
    """Test matrix with the observed statistic and ``s`` permutation replicates.

    Whole curves are permuted between groups.  The F statistic is tested
    one-sided (large is extreme); mean and difference constructions are
    two-sided.  ``+inf`` F values are stored as the largest finite float,
    which preserves their ranks.
    """
    construction = Construction(construction)
    codes = np.vstack([g.codes[None, :], permutation_codes(g, s, seed)])
    rows = []
    for a in range(0, s + 1, chunk):
        rows.append(np.atleast_2d(build_statistic(g, construction, codes=codes[a:a + chunk],
                                                  warn=False, **kw)))
    values = np.vstack(rows)
    values = np.where(np.isposinf(values), np.finfo(float).max, values)
    labels = segment_labels(g, construction)
    K = g.args.size
    segments = [(lab, i * K, (i + 1) * K) for i, lab in enumerate(labels)]
    side = Side.UPPER if construction is Construction.FSTAT else Side.TWO_SIDED
    return TestMatrix(values, side=side, args=np.tile(g.args, len(labels)), segments=segments)


# grouped-curve CSV: group, curve_id, r, value[, weight]

def read_grouped_csv(path) -> GroupedCurveSet:
    """Read long-format grouped curves and check that every curve has the same grid."""
    data = {}
    order = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = [h.strip() for h in next(reader, [])]
        base = ["group", "curve_id", "r", "value"]
        if header[:4] != base or header[4:] not in ([], ["weight"]):
            raise ValueError(f"{path}:1: expected header 'group,curve_id,r,value[,weight]'")
        has_w = len(header) == 5
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise ValueError(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
            key = (row[0], row[1])
            try:
                r, v = float(row[2]), float(row[3])
                w = float(row[4]) if has_w else None
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from None
            if key not in data:
                data[key] = {"r": [], "v": [], "w": w}
                order.append(key)
            elif has_w and data[key]["w"] != w:
                raise ValueError(f"{path}:{lineno}: weight changes within curve {key[1]!r}")
            data[key]["r"].append(r)
            data[key]["v"].append(v)
    if not order:
        raise ValueError(f"{path}: no curves")
    grid = None
    curves = []
    for key in order:
        idx = np.argsort(data[key]["r"])
        r = np.asarray(data[key]["r"])[idx]
        if grid is None:
            grid = r
        elif r.shape != grid.shape or np.any(r != grid):
            raise ValueError(f"{path}: curve {key[1]!r} (group {key[0]!r}) is not on the common grid")
        curves.append(np.asarray(data[key]["v"])[idx])
    weights = np.array([data[k]["w"] for k in order], dtype=float) if has_w else None
    return GroupedCurveSet(grid, np.vstack(curves), np.array([k[0] for k in order]),
                           weights, [k[1] for k in order])


def write_grouped_csv(path, g: GroupedCurveSet) -> None:
    ids = g.curve_ids or [str(i) for i in range(g.n)]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["group", "curve_id", "r", "value"] + (["weight"] if g.weights is not None else []))
        for i in range(g.n):
            for k, r in enumerate(g.args):
                row = [g.groups[i], ids[i], repr(float(r)), repr(float(g.curves[i, k]))]
                if g.weights is not None:
                    row.append(repr(float(g.weights[i])))
                w.writerow(row)
