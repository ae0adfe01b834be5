"""p-values, p-intervals, critical rank and global envelopes."""
from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass

import numpy as np

from .rank_core import Side, TestMatrix, erc_ranks, extreme_ranks, pointwise_ranks

__all__ = [
    "Decision",
    "PInterval",
    "GlobalEnvelope",
    "RankTestResult",
    "p_interval",
    "p_erc",
    "critical_rank",
    "build_envelope",
    "run_rank_test",
    "recommend_simulations",
    "write_envelope_csv",
    "read_envelope_csv",
]


class Decision(str, enum.Enum):
    REJECT = "reject"
    NOT_REJECT = "not-reject"
    UNDECIDED = "undecided"


@dataclass(frozen=True)
class PInterval:
    """Liberal and conservative Monte Carlo p-values ``(p_minus, p_plus]``."""

    p_minus: float
    p_plus: float
    n: int  # s + 1

    @property
    def width(self) -> float:
        return self.p_plus - self.p_minus


@dataclass
class GlobalEnvelope:
    lower: np.ndarray
    upper: np.ndarray
    critical_rank: float
    alpha: float
    central: np.ndarray | None = None

    def contains(self, x: np.ndarray) -> np.ndarray:
        """Pointwise True where ``x`` lies inside the closed envelope."""
        return (x >= self.lower) & (x <= self.upper)

    def outside(self, x: np.ndarray) -> bool:
        return bool(np.any(~self.contains(x)))


@dataclass
class RankTestResult:
    p_interval: PInterval
    p_erc: float
    envelope: GlobalEnvelope
    decision: Decision
    observed_rank: float
    matrix: TestMatrix | None = None

    @property
    def p_minus(self) -> float:
        return self.p_interval.p_minus

    @property
    def p_plus(self) -> float:
        return self.p_interval.p_plus

    @property
    def alpha(self) -> float:
        return self.envelope.alpha

    @property
    def critical_rank(self) -> float:
        return self.envelope.critical_rank

    def summary(self) -> dict:
        """Scalar fields, JSON-ready."""
        return {
            "alpha": self.alpha,
            "critical_rank": float(self.critical_rank),
            "decision": self.decision.value,
            "observed_rank": float(self.observed_rank),
            "p_erc": self.p_erc,
            "p_minus": self.p_minus,
            "p_plus": self.p_plus,
            "s": self.p_interval.n - 1,
        }


def p_interval(r: np.ndarray) -> PInterval:
    """p-interval from extreme ranks, observed vector first."""
    r = np.asarray(r, dtype=float)
    if r.ndim != 1 or r.size < 2:
        raise ValueError("need at least two extreme ranks")
    n = r.size
    return PInterval(
        p_minus=np.count_nonzero(r < r[0]) / n,
        p_plus=np.count_nonzero(r <= r[0]) / n,
        n=n,
    )


def p_erc(counts: np.ndarray) -> float:
    """Conservative p-value of the observed row under erc ordering."""
    counts = np.asarray(counts)
    if counts.ndim != 1 or counts.size < 2:
        raise ValueError("need at least two erc ranks")
    return np.count_nonzero(counts <= counts[0]) / counts.size


def critical_rank(r: np.ndarray, alpha: float, literal: bool = False) -> float:
    """Critical extreme rank ``R(alpha)``.

    By default ``R(alpha)`` is the smallest rank ``v`` among the extreme
    ranks with ``#{R_i <= v} / (s+1) > alpha``.  This is the same as the
    ``>= alpha (s+1)`` rule whenever ``alpha (s+1)`` is not an integer, and
    keeps ``R_1 < R(alpha)`` exactly equivalent to ``p_plus <= alpha`` when it
    is.  ``literal=True`` applies the ``>=`` rule as written.
    """
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    r = np.asarray(r, dtype=float)
    n = r.size
    vals = np.unique(r)
    cum = np.searchsorted(np.sort(r), vals, side="right")
    if literal:
        ok = cum >= alpha * n
    else:
        ok = cum / n > alpha
    return float(vals[np.argmax(ok)])


def build_envelope(m: TestMatrix, r: np.ndarray, alpha: float, literal: bool = False) -> GlobalEnvelope:
    """Global envelope: hull of the rows with extreme rank >= R(alpha)."""
    r = np.asarray(r, dtype=float)
    if r.shape != (m.values.shape[0],):
        raise ValueError("extreme rank vector does not match the test matrix")
    ra = critical_rank(r, alpha, literal=literal)
    keep = r >= ra
    if not keep.any():
        raise ValueError(f"no vector has extreme rank >= {ra} at alpha={alpha}")
    sub = m.values[keep]
    lower = sub.min(axis=0)
    upper = sub.max(axis=0)
    codes = m.side_codes()
    lower = np.where(codes == 1, -np.inf, lower)
    upper = np.where(codes == 0, np.inf, upper)
    central = np.median(m.values[1:], axis=0)
    return GlobalEnvelope(lower=lower, upper=upper, critical_rank=ra, alpha=alpha, central=central)


def decide(pi: PInterval, alpha: float) -> Decision:
    if pi.p_plus <= alpha:
        return Decision.REJECT
    if pi.p_minus > alpha:
        return Decision.NOT_REJECT
    return Decision.UNDECIDED


def run_rank_test(m: TestMatrix, alpha: float = 0.05) -> RankTestResult:
    """Rank envelope test on a test matrix.

    Examples
    --------
    >>> rng = np.random.default_rng(0)
    >>> res = run_rank_test(TestMatrix(rng.normal(size=(100, 5))), alpha=0.05)
    >>> 0 < res.p_plus <= 1
    True
    """
    pr = pointwise_ranks(m)
    r = extreme_ranks(pr)
    pi = p_interval(r)
    env = build_envelope(m, r, alpha)
    return RankTestResult(
        p_interval=pi,
        p_erc=p_erc(erc_ranks(pr)),
        envelope=env,
        decision=decide(pi, alpha),
        observed_rank=float(r[0]),
        matrix=m,
    )


def recommend_simulations(d: int | None = None, k_functions: int | None = None,
                          sided="two-sided", alpha: float = 0.05,
                          width: float | None = None) -> int:
    """Suggested number of simulations ``s``.

    For ``k_functions`` test functions this is ``k * 2500``.  For a
    low-dimensional vector of length ``d`` it is the smallest ``s`` with
    maximal p-interval width ``2d/(s+1)`` (two-sided) or ``d/(s+1)``
    (one-sided) not above ``width``, which defaults to ``alpha / 5``
    (0.01 at the usual 5% level).
    """
    if k_functions is not None:
        if k_functions < 1:
            raise ValueError("k_functions must be >= 1")
        return 2500 * int(k_functions)
    if d is None or d < 1:
        raise ValueError("give d >= 1 or k_functions >= 1")
    if width is None:
        width = alpha / 5
    factor = 2 if Side.parse(sided) is Side.TWO_SIDED else 1
    # smallest integer s+1 >= factor*d/width; guard against 6/0.01 -> 600.0000001
    n = math.ceil(round(factor * d / width, 9))
    return max(n - 1, 1)


# envelope CSV

_ENV_FIELDS = ["index", "arg", "lower", "central", "upper", "observed"]


def _fmt(x: float) -> str:
    return "" if not np.isfinite(x) else repr(float(x))


def write_envelope_csv(path, result: RankTestResult, columns: slice | None = None) -> None:
    """Write ``index, arg, lower, central, upper, observed`` rows.

    Infinite bounds of one-sided components are written as empty fields.
    """
    m = result.matrix
    env = result.envelope
    sl = columns if columns is not None else slice(0, m.d)
    idx = np.arange(m.d)[sl]
    args = m.args if m.args is not None else np.arange(m.d, dtype=float)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(_ENV_FIELDS)
        for k, j in enumerate(idx):
            w.writerow([k, repr(float(args[j])), _fmt(env.lower[j]), _fmt(env.central[j]),
                        _fmt(env.upper[j]), repr(float(m.values[0, j]))])


def read_envelope_csv(path) -> dict:
    """Read an envelope CSV back into arrays; empty bounds become infinities."""
    cols = {k: [] for k in _ENV_FIELDS}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != _ENV_FIELDS:
            raise ValueError(f"{path}: expected header {_ENV_FIELDS}, got {reader.fieldnames}")
        for lineno, row in enumerate(reader, start=2):
            try:
                cols["index"].append(int(row["index"]))
                cols["arg"].append(float(row["arg"]))
                cols["lower"].append(float(row["lower"]) if row["lower"] else -np.inf)
                cols["central"].append(float(row["central"]) if row["central"] else np.nan)
                cols["upper"].append(float(row["upper"]) if row["upper"] else np.inf)
                cols["observed"].append(float(row["observed"]))
            except (TypeError, ValueError) as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from None
    out = {k: np.asarray(v, dtype=float) for k, v in cols.items()}
    out["index"] = out["index"].astype(int)
    return out
