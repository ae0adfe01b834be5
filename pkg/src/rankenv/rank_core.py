"""Pointwise ranks, extreme ranks and extreme rank count ranks.

A test matrix holds the observed vector in row 0 and ``s`` null
realizations below it.  Small ranks always mean "extreme".
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Side",
    "TestMatrix",
    "pointwise_ranks",
    "raw_ranks",
    "extreme_ranks",
    "erc_ranks",
]


class Side(str, enum.Enum):
    """Which tail of a component counts as extreme."""

    LOWER = "lower"
    UPPER = "upper"
    TWO_SIDED = "two-sided"

    @classmethod
    def parse(cls, value) -> "Side":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower().replace("_", "-")
        aliases = {
            "lower": cls.LOWER, "less": cls.LOWER, "lowerextreme": cls.LOWER,
            "upper": cls.UPPER, "greater": cls.UPPER, "upperextreme": cls.UPPER,
            "two-sided": cls.TWO_SIDED, "twosided": cls.TWO_SIDED,
            "two.sided": cls.TWO_SIDED, "both": cls.TWO_SIDED,
        }
        try:
            return aliases[key.replace(" ", "")]
        except KeyError:
            raise ValueError(f"unknown side {value!r}") from None


# integer codes used internally for per-column sides
_CODE = {Side.LOWER: 0, Side.UPPER: 1, Side.TWO_SIDED: 2}
_FROM_CODE = {v: k for k, v in _CODE.items()}


@dataclass
class TestMatrix:
    """Observed vector plus null realizations, shape ``(s+1, d)``.

    Parameters
    ----------
    values : array_like
        Row 0 is the observed vector, rows ``1..s`` the simulations.
    side : Side, str or sequence
        One side for all columns or one per column.
    args : array_like, optional
        Argument value of each column (e.g. the distance ``r``), used
        only when exporting envelopes.
    segments : list of (name, start, stop), optional
        Column ranges of the parts a concatenated vector was built from.
    """

    __test__ = False  # keep pytest from collecting this class

    values: np.ndarray
    side: object = Side.TWO_SIDED
    args: np.ndarray | None = None
    segments: list = field(default_factory=list)

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.ndim == 1:
            values = values[:, None]
        if values.ndim != 2:
            raise ValueError("test matrix must be two-dimensional")
        n, d = values.shape
        if n < 2:
            raise ValueError("need the observed row and at least one simulation (s >= 1)")
        if d < 1:
            raise ValueError("test vectors must have at least one component")
        bad = ~np.isfinite(values)
        if bad.any():
            i, j = np.argwhere(bad)[0]
            raise ValueError(f"non-finite value {values[i, j]!r} at row {i}, column {j}")
        self.values = values

        if isinstance(self.side, (str, Side)):
            self.side = Side.parse(self.side)
        else:
            sides = [Side.parse(v) for v in self.side]
            if len(sides) != d:
                raise ValueError(f"side vector has length {len(sides)}, expected {d}")
            self.side = sides

        if self.args is not None:
            args = np.asarray(self.args, dtype=float)
            if args.shape != (d,):
                raise ValueError(f"args has shape {args.shape}, expected ({d},)")
            self.args = args
        if not self.segments:
            self.segments = [("T", 0, d)]

    @property
    def s(self) -> int:
        return self.values.shape[0] - 1

    @property
    def d(self) -> int:
        return self.values.shape[1]

    def side_codes(self) -> np.ndarray:
        """Per-column side as integer codes (0 lower, 1 upper, 2 two-sided)."""
        if isinstance(self.side, Side):
            return np.full(self.d, _CODE[self.side], dtype=np.int8)
        return np.array([_CODE[v] for v in self.side], dtype=np.int8)

    def column_sides(self) -> list[Side]:
        return [_FROM_CODE[c] for c in self.side_codes()]


def raw_ranks(values: np.ndarray) -> np.ndarray:
    """Column-wise mid-ranks, smallest value gets rank 1.

    Ties receive the mean of the raw ranks they occupy.  Works on the
    transposed copy because row-wise argsort of contiguous data is much
    faster than strided column sorts.
    """
    x = np.ascontiguousarray(np.asarray(values, dtype=float).T)
    d, n = x.shape
    order = np.argsort(x, axis=1, kind="stable")
    xs = np.take_along_axis(x, order, axis=1)
    pos = np.broadcast_to(np.arange(n, dtype=float), (d, n))
    diff = xs[:, 1:] != xs[:, :-1]
    if diff.all():
        ranked = pos + 1.0
    else:
        idx = np.arange(n)
        start = np.ones((d, n), dtype=bool)
        start[:, 1:] = diff
        stop = np.ones((d, n), dtype=bool)
        stop[:, :-1] = diff
        first = np.maximum.accumulate(np.where(start, idx, 0), axis=1)
        last = np.minimum.accumulate(np.where(stop, idx, n - 1)[:, ::-1], axis=1)[:, ::-1]
        ranked = (first + last) / 2.0 + 1.0
    out = np.empty((d, n))
    np.put_along_axis(out, order, ranked, axis=1)
    return out.T


def pointwise_ranks(m: TestMatrix) -> np.ndarray:
    """Pointwise ranks ``R_ij`` of a test matrix.

    Lower-extreme columns keep the raw rank ``r``, upper-extreme columns
    use ``s + 2 - r`` so the largest value has rank 1, and two-sided
    columns take the minimum of both.
    """
    r = raw_ranks(m.values)
    top = m.s + 2.0
    if isinstance(m.side, Side):
        if m.side is Side.LOWER:
            return r
        if m.side is Side.UPPER:
            return top - r
        return np.minimum(r, top - r)
    codes = m.side_codes()
    flipped = top - r
    out = np.where(codes == 0, r, flipped)
    two = codes == 2
    out[:, two] = np.minimum(r[:, two], flipped[:, two])
    return out


def extreme_ranks(pr: np.ndarray) -> np.ndarray:
    """Row minima of a pointwise rank matrix."""
    pr = np.asarray(pr, dtype=float)
    if pr.ndim != 2:
        raise ValueError("pointwise rank matrix must be two-dimensional")
    return pr.min(axis=1)


def _lex_order(keys: np.ndarray, start: int = 0, chunk: int = 8) -> tuple[np.ndarray, np.ndarray]:
    """Lexicographic order of the rows of ``keys`` plus tie-group starts.

    Returns ``(order, new_group)`` where ``new_group[k]`` is True when the
    row at sorted position ``k`` differs from its predecessor.  Sorting is
    refined a few columns at a time and only inside tied blocks, since
    sorted rank vectors nearly always separate within the first entries.
    """
    n, d = keys.shape
    stop = min(d, start + chunk)
    block = keys[:, start:stop]
    order = np.lexsort(block.T[::-1])
    kb = block[order]
    new = np.ones(n, dtype=bool)
    new[1:] = np.any(kb[1:] != kb[:-1], axis=1)
    if stop == d or new.all():
        return order, new
    bounds = np.flatnonzero(np.append(new, True))
    for a, b in zip(bounds[:-1], bounds[1:]):
        if b - a > 1:
            sub = order[a:b]
            sub_order, sub_new = _lex_order(keys[sub], stop, chunk)
            order[a:b] = sub[sub_order]
            sub_new[0] = new[a]
            new[a:b] = sub_new
    return order, new


def erc_ranks(pr: np.ndarray, atol: float = 0.0) -> np.ndarray:
    """Extreme rank count ranks.

    ``counts[i]`` is the number of rows whose ascending-sorted rank vector
    strictly precedes row ``i``'s in lexicographic order.  The most
    extreme row gets 0 and identical sorted vectors share a count.

    Parameters
    ----------
    pr : ndarray, shape (n, d)
        Pointwise ranks.
    atol : float
        Absolute tolerance under which two ranks compare equal.  The
        default 0 is exact; mid-ranks are multiples of 1/2, so exact
        comparison is safe in double precision.
    """
    pr = np.asarray(pr, dtype=float)
    if pr.ndim != 2:
        raise ValueError("pointwise rank matrix must be two-dimensional")
    keys = np.sort(pr, axis=1)
    n = keys.shape[0]
    if atol > 0:
        return _erc_pairwise(keys, atol)
    order, new = _lex_order(keys)
    group_start = np.maximum.accumulate(np.where(new, np.arange(n), 0))
    counts = np.empty(n, dtype=np.int64)
    counts[order] = group_start
    return counts


def _erc_pairwise(keys: np.ndarray, atol: float) -> np.ndarray:
    # O(n^2 d) comparison; tolerance makes "equal" non-transitive so no sort
    n = keys.shape[0]
    counts = np.zeros(n, dtype=np.int64)
    for i in range(n):
        diff = keys - keys[i]
        differs = np.abs(diff) > atol
        has = differs.any(axis=1)
        first = np.argmax(differs, axis=1)
        precedes = has & (diff[np.arange(n), first] < 0)
        counts[i] = np.count_nonzero(precedes)
    return counts
