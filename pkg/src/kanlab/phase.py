"""Points on S^1, T^2 and their products with a fiber, plus grid helpers."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

# Representatives this close to 1 are snapped to 0 so long orbits never hold 1.0.
SNAP = 1.0 - 2.0 ** -52


class DomainError(ValueError):
    """Raised when an argument lies outside the domain of an operation."""


def wrap_circle(x: float) -> float:
    """Canonical representative of ``x`` modulo 1, in [0, 1)."""
    x = float(x)
    if not math.isfinite(x):
        raise DomainError(f"cannot wrap non-finite value {x!r}")
    y = x - math.floor(x)
    if y >= SNAP:
        return 0.0
    return y


def wrap_array(x):
    x = np.asarray(x, dtype=np.float64)
    if not np.all(np.isfinite(x)):
        raise DomainError("cannot wrap non-finite values")
    y = x - np.floor(x)
    return np.where(y >= SNAP, 0.0, y)


def circle_dist(a, b) -> float:
    """Arc-length distance on R/Z; always in [0, 1/2]."""
    a = a.x if isinstance(a, CirclePoint) else a
    b = b.x if isinstance(b, CirclePoint) else b
    d = abs(wrap_circle(a) - wrap_circle(b))
    return min(d, 1.0 - d)


def torus_dist(a, b) -> float:
    """Flat distance on T^2 = R^2/Z^2."""
    a = a.coords if isinstance(a, TorusPoint) else a
    b = b.coords if isinstance(b, TorusPoint) else b
    return math.hypot(circle_dist(a[0], b[0]), circle_dist(a[1], b[1]))


@dataclass(frozen=True)
class CirclePoint:
    x: float

    def __post_init__(self):
        object.__setattr__(self, "x", wrap_circle(self.x))

    @property
    def coords(self) -> tuple[float]:
        return (self.x,)


@dataclass(frozen=True)
class TorusPoint:
    u: float
    v: float

    def __post_init__(self):
        object.__setattr__(self, "u", wrap_circle(self.u))
        object.__setattr__(self, "v", wrap_circle(self.v))

    @property
    def coords(self) -> tuple[float, float]:
        return (self.u, self.v)


BasePoint = Union[CirclePoint, TorusPoint]


@dataclass(frozen=True)
class PhasePoint:
    """A base point together with a fiber coordinate.

    The fiber domain ([0, 1] or the circle [0, 1)) belongs to the system,
    so range checks happen where a system consumes the point.
    """

    base: BasePoint
    fiber: float

    def __post_init__(self):
        if isinstance(self.base, (int, float)):
            object.__setattr__(self, "base", CirclePoint(self.base))
        elif isinstance(self.base, (tuple, list)):
            if len(self.base) == 1:
                object.__setattr__(self, "base", CirclePoint(self.base[0]))
            else:
                object.__setattr__(self, "base", TorusPoint(*self.base))
        fiber = float(self.fiber)
        if not math.isfinite(fiber):
            raise DomainError(f"non-finite fiber coordinate {fiber!r}")
        object.__setattr__(self, "fiber", fiber)

    @property
    def coords(self) -> tuple[float, ...]:
        return self.base.coords + (self.fiber,)


@dataclass(frozen=True)
class Box2D:
    """Axis-aligned rectangle ``[x0, x1] x [y0, y1]`` inside the unit square."""

    x0: float = 0.0
    y0: float = 0.0
    x1: float = 1.0
    y1: float = 1.0

    def __post_init__(self):
        vals = (self.x0, self.y0, self.x1, self.y1)
        if not all(math.isfinite(v) for v in vals):
            raise DomainError("box corners must be finite")
        if not (self.x0 < self.x1 and self.y0 < self.y1):
            raise DomainError(f"degenerate box {vals}")
        if min(vals) < 0.0 or max(vals) > 1.0:
            raise DomainError(f"box {vals} leaves the fundamental domain [0,1]^2")

    @classmethod
    def unit(cls) -> "Box2D":
        return cls(0.0, 0.0, 1.0, 1.0)

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.x0, self.y0, self.x1, self.y1)


def make_grid(box: Box2D, nx: int, ny: int) -> np.ndarray:
    """Cell centres of an ``nx`` by ``ny`` subdivision of ``box``.

    Returns an ``(nx*ny, 2)`` array in row-major order: row ``j`` (the y
    index) is outer, column ``i`` is inner, so point ``j*nx + i`` has
    coordinates ``(x0 + (i + 1/2) dx, y0 + (j + 1/2) dy)``.
    """
    if int(nx) != nx or int(ny) != ny or nx < 1 or ny < 1:
        raise DomainError(f"grid resolution must be positive integers, got {nx}x{ny}")
    nx, ny = int(nx), int(ny)
    xs = box.x0 + (np.arange(nx) + 0.5) * ((box.x1 - box.x0) / nx)
    ys = box.y0 + (np.arange(ny) + 0.5) * ((box.y1 - box.y0) / ny)
    gx, gy = np.meshgrid(xs, ys, indexing="xy")
    return np.column_stack([gx.ravel(), gy.ravel()])
