"""Planar point patterns in rectangular windows and their file format."""
from __future__ import annotations

import csv
import json
import os
from dataclasses import dataclass

import numpy as np

__all__ = ["Window", "PointPattern", "read_pattern", "write_pattern"]


@dataclass(frozen=True)
class Window:
    xmin: float = 0.0
    xmax: float = 1.0
    ymin: float = 0.0
    ymax: float = 1.0

    def __post_init__(self):
        if not (self.xmax > self.xmin and self.ymax > self.ymin):
            raise ValueError(f"window {self} has no positive area")

    @property
    def width(self) -> float:
        return self.xmax - self.xmin

    @property
    def height(self) -> float:
        return self.ymax - self.ymin

    @property
    def area(self) -> float:
        return self.width * self.height

    @property
    def bounds(self) -> tuple:
        return (self.xmin, self.xmax, self.ymin, self.ymax)

    def dilate(self, r: float) -> "Window":
        return Window(self.xmin - r, self.xmax + r, self.ymin - r, self.ymax + r)

    def shift(self, dx: float, dy: float) -> "Window":
        return Window(self.xmin + dx, self.xmax + dx, self.ymin + dy, self.ymax + dy)

    def inside(self, x, y) -> np.ndarray:
        return (x >= self.xmin) & (x <= self.xmax) & (y >= self.ymin) & (y <= self.ymax)

    def to_dict(self) -> dict:
        return {"xmin": self.xmin, "xmax": self.xmax, "ymin": self.ymin, "ymax": self.ymax}


@dataclass
class PointPattern:
    """Points ``(n, 2)`` in a window, with optional integer marks."""

    points: np.ndarray
    window: Window = Window()
    marks: np.ndarray | None = None

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float).reshape(-1, 2)
        if not self.window.inside(pts[:, 0], pts[:, 1]).all():
            raise ValueError("points outside the window")
        self.points = pts
        if self.marks is not None:
            marks = np.asarray(self.marks)
            if marks.shape != (pts.shape[0],):
                raise ValueError("need exactly one mark per point")
            self.marks = marks.astype(int)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def x(self) -> np.ndarray:
        return self.points[:, 0]

    @property
    def y(self) -> np.ndarray:
        return self.points[:, 1]

    @property
    def intensity(self) -> float:
        return self.n / self.window.area

    def types(self) -> np.ndarray:
        if self.marks is None:
            raise ValueError("pattern is unmarked")
        return np.unique(self.marks)

    def subset(self, mark) -> "PointPattern":
        if self.marks is None:
            raise ValueError("pattern is unmarked")
        keep = self.marks == mark
        return PointPattern(self.points[keep], self.window)

    def translate(self, dx: float, dy: float) -> "PointPattern":
        return PointPattern(self.points + [dx, dy], self.window.shift(dx, dy), self.marks)


def _sidecar(path) -> str:
    root, _ = os.path.splitext(os.fspath(path))
    return root + ".json"


def write_pattern(path, p: PointPattern) -> None:
    """Write ``x, y[, mark]`` CSV plus a JSON window sidecar next to it."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        if p.marks is None:
            w.writerow(["x", "y"])
            for x, y in p.points:
                w.writerow([repr(float(x)), repr(float(y))])
        else:
            w.writerow(["x", "y", "mark"])
            for (x, y), m in zip(p.points, p.marks):
                w.writerow([repr(float(x)), repr(float(y)), int(m)])
    with open(_sidecar(path), "w") as fh:
        json.dump(p.window.to_dict(), fh, sort_keys=True)
        fh.write("\n")


def read_pattern(path, window: Window | None = None) -> PointPattern:
    """Read a pattern CSV; the window comes from the sidecar unless given."""
    if window is None:
        side = _sidecar(path)
        if not os.path.exists(side):
            raise FileNotFoundError(f"{path}: window sidecar {side} not found")
        with open(side) as fh:
            wd = json.load(fh)
        try:
            window = Window(float(wd["xmin"]), float(wd["xmax"]), float(wd["ymin"]), float(wd["ymax"]))
        except KeyError as exc:
            raise ValueError(f"{side}: missing key {exc}") from None
    pts, marks = [], []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = [h.strip() for h in next(reader, [])]
        if header[:2] != ["x", "y"] or len(header) not in (2, 3) or (len(header) == 3 and header[2] != "mark"):
            raise ValueError(f"{path}:1: expected header 'x,y[,mark]', got {','.join(header)!r}")
        marked = len(header) == 3
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise ValueError(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
            try:
                pts.append((float(row[0]), float(row[1])))
                if marked:
                    marks.append(int(row[2]))
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from None
    return PointPattern(np.array(pts, dtype=float).reshape(-1, 2), window,
                        np.array(marks, dtype=int) if marked else None)
