"""Toroidal random shifts of the components of a marked pattern."""
from __future__ import annotations

import numpy as np

from .models import as_rng
from .pattern import PointPattern

__all__ = ["random_shift", "shift_by"]


def shift_by(p: PointPattern, offsets: dict) -> PointPattern:
    """Translate each type by its ``(dx, dy)`` offset, wrapping around the window."""
    if p.marks is None:
        raise ValueError("random shift needs a marked pattern")
    w = p.window
    pts = p.points.copy()
    for t, (dx, dy) in offsets.items():
        sel = p.marks == t
        pts[sel, 0] = w.xmin + np.mod(pts[sel, 0] - w.xmin + dx, w.width)
        pts[sel, 1] = w.ymin + np.mod(pts[sel, 1] - w.ymin + dy, w.height)
    return PointPattern(pts, w, p.marks.copy())


def random_shift(p: PointPattern, fixed_types=(), seed=None) -> PointPattern:
    """Shift every type not in ``fixed_types`` by its own uniform torus offset."""
    if p.marks is None:
        raise ValueError("random shift needs a marked pattern")
    types = p.types()
    if types.size < 2:
        raise ValueError("random shift needs at least two types")
    rng = as_rng(seed)
    fixed = set(np.atleast_1d(fixed_types).tolist())
    w = p.window
    offsets = {}
    for t in types:
        u = rng.random(2)
        if t not in fixed:
            offsets[t] = (u[0] * w.width, u[1] * w.height)
    return shift_by(p, offsets)
