"""Basin classification, basin maps over 2-D slices, and mixing statistics.

A slice fixes all but two phase-space coordinates.  Each grid cell is
represented by one sample point: either its centre, or (the default) a
seeded uniform point inside the cell.  Cell centres of a dyadic grid are
dyadic rationals, which the expanding base maps send onto short periodic
orbits; stratified samples avoid that bias.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from enum import IntEnum
from typing import Optional

import numpy as np

from . import _kernels as K
from ._io import atomic_write_bytes, atomic_write_csv
from .ergodic import rng_for
from .phase import Box2D, DomainError
from .systems import SkewProductSystem

ROWS_PER_TASK = 8
# boxes narrower than this many cells undercount straddled boundaries
MIN_BOX_SIDE = 8
PPM_COLOURS = np.array([[0, 0, 255], [255, 0, 0], [0, 0, 0]], dtype=np.uint8)
INTERMINGLING_HEADER = ("scale_j", "mixed_fraction", "mixed_count", "total_boxes")


class BasinLabel(IntEnum):
    ATTRACTOR0 = K.LABEL_0
    ATTRACTOR1 = K.LABEL_1
    UNDECIDED = K.LABEL_UNDECIDED


@dataclass(frozen=True)
class ClassifySettings:
    max_iter: int = 10**4
    tol: float = 1e-3
    window: int = 10

    def __post_init__(self):
        if not (1 <= self.window <= self.max_iter):
            raise DomainError("need max_iter >= window >= 1")
        if not (0.0 < self.tol < 0.25):
            raise DomainError("tol must lie in (0, 1/4)")


@dataclass(frozen=True)
class SliceSpec:
    """A 2-D slice of phase space sampled on an ``nx`` by ``ny`` grid.

    Axis names are ``theta``/``t`` for the cylinder and ``u``/``v``/``t``
    for torus bases.  ``fixed`` is the value of the remaining coordinate
    (torus bases only).
    """

    box: Box2D = field(default_factory=Box2D.unit)
    nx: int = 256
    ny: int = 256
    x_axis: Optional[str] = None
    y_axis: str = "t"
    fixed: float = 0.3
    sampling: str = "stratified"
    seed: int = 0

    def __post_init__(self):
        if self.nx < 1 or self.ny < 1:
            raise DomainError("slice resolution must be positive")
        if self.sampling not in ("stratified", "center"):
            raise DomainError(f"unknown sampling {self.sampling!r}")

    def axes(self, sys: SkewProductSystem) -> tuple[str, str, Optional[str]]:
        names = ("theta", "t") if sys.base_dim == 1 else ("u", "v", "t")
        x_axis = self.x_axis or names[0]
        if x_axis not in names or self.y_axis not in names or x_axis == self.y_axis:
            raise DomainError(f"invalid slice axes ({x_axis}, {self.y_axis}) for {sys.family}")
        rest = [n for n in names if n not in (x_axis, self.y_axis)]
        return x_axis, self.y_axis, (rest[0] if rest else None)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["box"] = list(self.box.as_tuple())
        return d


def _row_offsets(spec: SliceSpec, row: int) -> tuple[np.ndarray, float]:
    if spec.sampling == "center":
        return np.full(spec.nx, 0.5), 0.5
    rng = rng_for(spec.seed, row)
    # open interval (0, 1): keeps samples off cell edges such as t = 0 or 1/2
    u = rng.random(spec.nx + 1) + 2.0**-54
    return u[: spec.nx], float(u[spec.nx])


def slice_points(sys: SkewProductSystem, spec: SliceSpec, rows: range) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Kernel coordinates ``(b0, b1, t)`` of the sample points in ``rows``."""
    x_axis, y_axis, rest = spec.axes(sys)
    box = spec.box
    dx = (box.x1 - box.x0) / spec.nx
    dy = (box.y1 - box.y0) / spec.ny
    xs, ys = [], []
    for j in rows:
        ox, oy = _row_offsets(spec, j)
        xs.append(box.x0 + (np.arange(spec.nx) + ox) * dx)
        ys.append(np.full(spec.nx, box.y0 + (j + oy) * dy))
    coords = {x_axis: np.concatenate(xs), y_axis: np.concatenate(ys)}
    n = coords[x_axis].size
    if rest is not None:
        coords[rest] = np.full(n, spec.fixed)
    if sys.base_dim == 1:
        b0, b1 = coords["theta"], np.zeros(n)
    else:
        b0, b1 = coords["u"], coords["v"]
    t = coords["t"]
    if sys.fiber_kind == "circle":
        t = t - np.floor(t)
    return np.ascontiguousarray(b0), np.ascontiguousarray(b1), np.ascontiguousarray(t)


@dataclass
class BasinLabelGrid:
    box: Box2D
    nx: int
    ny: int
    labels: np.ndarray  # (ny, nx) int8, row j is the j-th y cell from the bottom
    provenance: dict

    def __post_init__(self):
        if self.labels.shape != (self.ny, self.nx):
            raise DomainError(f"label matrix shape {self.labels.shape} != ({self.ny}, {self.nx})")

    def counts(self) -> dict[str, int]:
        c = np.bincount(self.labels.ravel(), minlength=3)
        return {lab.name: int(c[lab]) for lab in BasinLabel}

    def fractions(self) -> dict[str, float]:
        total = self.labels.size
        return {k: v / total for k, v in self.counts().items()}

    def decided_fractions(self) -> dict[str, float]:
        c = self.counts()
        decided = c["ATTRACTOR0"] + c["ATTRACTOR1"]
        if decided == 0:
            return {"ATTRACTOR0": 0.0, "ATTRACTOR1": 0.0}
        return {"ATTRACTOR0": c["ATTRACTOR0"] / decided, "ATTRACTOR1": c["ATTRACTOR1"] / decided}

    def ppm_bytes(self) -> bytes:
        """Binary P6 image, top row = largest y."""
        rgb = PPM_COLOURS[self.labels[::-1]]
        return f"P6\n{self.nx} {self.ny}\n255\n".encode("ascii") + rgb.tobytes()

    def write_ppm(self, path):
        return atomic_write_bytes(path, self.ppm_bytes())


def classify(sys: SkewProductSystem, x0, cs: Optional[ClassifySettings] = None, return_iterations: bool = False):
    """Label ``x0`` by the invariant fiber level its orbit settles on.

    Decided once the fiber stays within ``tol`` of a level for ``window``
    consecutive iterates (iterates 1..max_iter are inspected).
    """
    cs = cs or ClassifySettings()
    b0, b1, t = sys._unpack(x0)
    lab, it = K.classify_point(
        sys.params(), b0, b1, t, sys.fiber_kind == "circle", sys.levels[1], cs.max_iter, cs.tol, cs.window
    )
    label = BasinLabel(lab)
    return (label, int(it)) if return_iterations else label


def basin_map(
    sys: SkewProductSystem,
    spec: SliceSpec,
    cs: Optional[ClassifySettings] = None,
    workers: Optional[int] = None,
) -> BasinLabelGrid:
    """Classify every cell of the slice; row blocks are shared among ``workers`` threads.

    Each block writes only its own rows, so the result does not depend on
    the worker count or on scheduling.
    """
    cs = cs or ClassifySettings()
    workers = workers or os.cpu_count() or 1
    P = sys.params()
    circle = sys.fiber_kind == "circle"
    level1 = sys.levels[1]
    labels = np.empty((spec.ny, spec.nx), dtype=np.int8)
    iters = np.empty((spec.ny, spec.nx), dtype=np.int64)

    def work(j0: int) -> None:
        rows = range(j0, min(j0 + ROWS_PER_TASK, spec.ny))
        b0, b1, t = slice_points(sys, spec, rows)
        K.classify_block(
            P, b0, b1, t, circle, level1, cs.max_iter, cs.tol, cs.window,
            labels[rows.start : rows.stop].reshape(-1), iters[rows.start : rows.stop].reshape(-1),
        )

    starts = range(0, spec.ny, ROWS_PER_TASK)
    if workers == 1:
        for j0 in starts:
            work(j0)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(work, starts))

    provenance = {
        "system": sys.to_dict(),
        "system_sha256": sys.digest(),
        "slice": spec.to_dict(),
        "classify": asdict(cs),
        "seed": spec.seed,
        "evidence": "finite-scale evidence",
    }
    return BasinLabelGrid(spec.box, spec.nx, spec.ny, labels, provenance)


# -- mixing statistics --------------------------------------------------------------


def _mixed_boxes(grid: BasinLabelGrid, j: int) -> np.ndarray:
    m = 2**j
    if j < 0 or grid.nx % m or grid.ny % m:
        raise DomainError(f"2^{j} does not divide the grid resolution {grid.nx}x{grid.ny}")
    blocks = grid.labels.reshape(m, grid.ny // m, m, grid.nx // m)
    has0 = (blocks == BasinLabel.ATTRACTOR0).any(axis=(1, 3))
    has1 = (blocks == BasinLabel.ATTRACTOR1).any(axis=(1, 3))
    return has0 & has1


def mixed_boxes(grid: BasinLabelGrid, j: int) -> np.ndarray:
    """Boolean ``(2^j, 2^j)`` map of dyadic boxes containing both attractor labels."""
    return _mixed_boxes(grid, j)


def intermingling_statistic(grid: BasinLabelGrid, j: int) -> float:
    """Fraction of the ``4^j`` dyadic sub-boxes that contain cells of both basins.

    A finite-scale proxy: 1.0 means every box at scale ``2^-j`` witnesses
    both attractors.
    """
    return float(_mixed_boxes(grid, j).mean())


def intermingling_table(grid: BasinLabelGrid, scales) -> list[tuple[int, float, int, int]]:
    rows = []
    for j in scales:
        mixed = _mixed_boxes(grid, j)
        rows.append((int(j), float(mixed.mean()), int(mixed.sum()), int(mixed.size)))
    return rows


def write_intermingling_csv(rows, path):
    return atomic_write_csv(path, INTERMINGLING_HEADER, [(j, repr(f), c, n) for j, f, c, n in rows])


def admissible_scales(grid: BasinLabelGrid, j_min: int = 0) -> list[int]:
    """Scales at which dyadic boxes tile the grid and hold at least two cells."""
    out = []
    j = j_min
    while grid.nx % 2**j == 0 and grid.ny % 2**j == 0 and (grid.nx // 2**j) * (grid.ny // 2**j) >= 2:
        out.append(j)
        j += 1
    return out


def box_counts(grid: BasinLabelGrid, j_min: int = 2, j_max: Optional[int] = None) -> list[tuple[int, int]]:
    scales = [j for j in admissible_scales(grid, j_min) if j_max is None or j <= j_max]
    return [(j, int(_mixed_boxes(grid, j).sum())) for j in scales]


def default_j_max(grid: BasinLabelGrid) -> int:
    """Finest scale whose boxes are still ``MIN_BOX_SIDE`` cells wide."""
    return int(math.log2(min(grid.nx, grid.ny) // MIN_BOX_SIDE))


def boundary_box_dimension(grid: BasinLabelGrid, j_min: int = 2, j_max: Optional[int] = None) -> Optional[float]:
    """Box-counting slope of the set of mixed dyadic boxes.

    Least-squares fit of ``log N(j)`` against ``j log 2`` over scales
    ``j_min..j_max`` with ``N(j) > 0``; ``None`` if fewer than two such
    scales exist.  ``j_max`` defaults to :func:`default_j_max`.
    """
    if min(grid.nx, grid.ny) < 256:
        raise DomainError("box dimension needs a grid of at least 256x256")
    if j_max is None:
        j_max = default_j_max(grid)
    counts = box_counts(grid, j_min, j_max)
    if len(counts) < 4:
        raise DomainError("box dimension needs at least 4 admissible scales")
    usable = [(j, n) for j, n in counts if n > 0]
    if len(usable) < 2:
        return None
    x = np.array([j for j, _ in usable]) * math.log(2.0)
    y = np.log(np.array([n for _, n in usable], dtype=float))
    slope = float(np.polyfit(x, y, 1)[0])
    return slope
