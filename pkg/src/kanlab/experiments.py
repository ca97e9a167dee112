"""Scripted experiments: toy-example structure and perturbation sweeps."""

from __future__ import annotations

import time
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Optional

import numpy as np

from ._io import atomic_write_csv, atomic_write_json
from .basins import (
    BasinLabel,
    BasinLabelGrid,
    ClassifySettings,
    SliceSpec,
    basin_map,
    boundary_box_dimension,
    intermingling_statistic,
)
from .ergodic import OrbitSettings, center_lyapunov, random_point, rng_for
from .phase import DomainError
from .systems import (
    BOUNDARY_PRESERVING,
    FIBER_ROTATION,
    Perturbation,
    QuadratureSettings,
    SkewProductSystem,
    ToySystem,
    validate_conditions,
)

DEFAULT_SEED = 2024


@dataclass(frozen=True)
class ExperimentSettings:
    slice: SliceSpec = field(default_factory=lambda: SliceSpec(nx=256, ny=256, seed=DEFAULT_SEED))
    classify: ClassifySettings = field(default_factory=ClassifySettings)
    orbit: OrbitSettings = field(default_factory=lambda: OrbitSettings(1000, 10**5, DEFAULT_SEED))
    quad: QuadratureSettings = field(default_factory=QuadratureSettings)
    scales: tuple = (3, 4, 5)
    workers: Optional[int] = None

    def to_dict(self) -> dict:
        return {
            "slice": self.slice.to_dict(),
            "classify": asdict(self.classify),
            "orbit": asdict(self.orbit),
            "quad": asdict(self.quad),
            "scales": list(self.scales),
        }


def _check_admissible(sys: SkewProductSystem, n: int = 64) -> None:
    grid = (np.arange(n) + 0.25) / n
    ts = np.linspace(0.0, 1.0, n + 1)
    if sys.base_dim == 1:
        b0, b1 = grid, np.zeros(n)
    else:
        u, v = np.meshgrid(grid, grid)
        b0, b1 = u.ravel(), v.ravel()
        extra = np.array([pt.coords for pt in sys.marked_points() if pt is not None])
        if extra.size:
            b0, b1 = np.concatenate([b0, extra[:, 0]]), np.concatenate([b1, extra[:, 1]])
    d = sys.fiber_derivative_array(np.repeat(b0, ts.size), np.repeat(b1, ts.size), np.tile(ts, b0.size))
    if not np.all(d > 0):
        raise DomainError(f"perturbed fiber map is not increasing (min derivative {d.min():.4g})")


def perturb(sys: SkewProductSystem, p: Perturbation) -> SkewProductSystem:
    """Return ``sys`` with the additive fiber perturbation ``p`` applied."""
    if sys.perturbation is not None:
        raise DomainError("system is already perturbed")
    if p.mode == BOUNDARY_PRESERVING and sys.fiber_kind != "interval":
        raise DomainError("boundary-preserving perturbations need an interval fiber")
    if p.mode == FIBER_ROTATION and sys.fiber_kind != "circle":
        raise DomainError("fiber rotations need a circle fiber")
    out = replace(sys, perturbation=p)
    _check_admissible(out)
    return out


@dataclass
class ExperimentRow:
    eta: float
    conditions: dict
    all_conditions_passed: bool
    fractions: dict
    majority_fraction: float
    minority_plus_undecided: float
    intermingling: dict
    center: list  # one LyapunovEstimate dict per attracting level
    box_dimension: Optional[float]

    def csv_values(self, scales, levels) -> list:
        vals = [
            repr(float(self.eta)),
            int(self.all_conditions_passed),
            repr(self.fractions["ATTRACTOR0"]),
            repr(self.fractions["ATTRACTOR1"]),
            repr(self.fractions["UNDECIDED"]),
            repr(self.majority_fraction),
            repr(self.minority_plus_undecided),
        ]
        vals += [repr(self.intermingling[j]) for j in scales]
        for est in self.center:
            vals += [repr(est["center"]), repr(est["standard_error"])]
        vals.append("" if self.box_dimension is None else repr(self.box_dimension))
        return vals


@dataclass
class ExperimentReport:
    kind: str
    system: dict
    mode: Optional[str]
    settings: dict
    rows: list[ExperimentRow]
    levels: tuple
    scales: tuple
    extra: dict = field(default_factory=dict)
    grids: dict = field(default_factory=dict, repr=False)
    wall_clock_s: float = 0.0

    def csv_header(self) -> list[str]:
        head = ["eta", "all_conditions_passed", "frac_attractor0", "frac_attractor1", "frac_undecided",
                "majority_fraction", "minority_plus_undecided"]
        head += [f"intermingling_j{j}" for j in self.scales]
        for lvl in self.levels:
            head += [f"center_level_{lvl:g}", f"center_level_{lvl:g}_stderr"]
        head.append("box_dimension")
        return head

    def csv_rows(self) -> list[list]:
        return [r.csv_values(self.scales, self.levels) for r in self.rows]

    def summary(self) -> dict:
        """JSON-ready summary; timing is left out so reruns are byte-identical."""
        return {
            "kind": self.kind,
            "system": self.system,
            "mode": self.mode,
            "settings": self.settings,
            "seed": self.settings["orbit"]["seed"],
            "slice_seed": self.settings["slice"]["seed"],
            "evidence": "finite-scale evidence",
            "rows": [asdict(r) for r in self.rows],
            "extra": self.extra,
        }

    def write(self, out_dir, stem: str = "report") -> list[Path]:
        out_dir = Path(out_dir)
        paths = [
            atomic_write_csv(out_dir / f"{stem}.csv", self.csv_header(), self.csv_rows()),
            atomic_write_json(out_dir / f"{stem}_summary.json", self.summary()),
        ]
        for eta, grid in self.grids.items():
            paths.append(grid.write_ppm(out_dir / ppm_name(eta)))
        return paths


def ppm_name(eta: float) -> str:
    return f"basin_eta_{eta:.4f}".replace(".", "p") + ".ppm"


def _row(sys: SkewProductSystem, eta: float, settings: ExperimentSettings) -> tuple[ExperimentRow, BasinLabelGrid]:
    report = validate_conditions(sys, settings.quad)
    grid = basin_map(sys, settings.slice, settings.classify, settings.workers)
    fr = grid.fractions()
    majority = max(fr["ATTRACTOR0"], fr["ATTRACTOR1"])
    stats = {}
    for j in settings.scales:
        try:
            stats[j] = intermingling_statistic(grid, j)
        except DomainError:
            stats[j] = float("nan")
    centers = []
    for i, level in enumerate(sys.levels):
        x0 = random_point(sys, rng_for(settings.orbit.seed, i), level)
        centers.append(center_lyapunov(sys, x0, settings.orbit).to_dict())
    dim = None
    if min(grid.nx, grid.ny) >= 256:
        try:
            dim = boundary_box_dimension(grid)
        except DomainError:
            dim = None
    row = ExperimentRow(
        eta=float(eta),
        conditions={c.name: c.passed for c in report.conditions},
        all_conditions_passed=report.all_passed,
        fractions=fr,
        majority_fraction=majority,
        minority_plus_undecided=1.0 - majority,
        intermingling=stats,
        center=centers,
        box_dimension=dim,
    )
    return row, grid


def run_robustness_sweep(
    sys: SkewProductSystem,
    mode: str,
    eta_list,
    settings: Optional[ExperimentSettings] = None,
) -> ExperimentReport:
    """One report row per perturbation size ``eta`` (ascending, starting at 0)."""
    settings = settings or ExperimentSettings()
    etas = [float(e) for e in eta_list]
    if not etas or etas[0] != 0.0 or any(b < a for a, b in zip(etas, etas[1:])):
        raise DomainError("eta_list must be sorted ascending and start at 0")
    start = time.perf_counter()
    rows, grids = [], {}
    for eta in etas:
        psys = perturb(sys, Perturbation(mode, eta))
        row, grid = _row(psys, eta, settings)
        rows.append(row)
        grids[eta] = grid
    return ExperimentReport(
        kind="robustness_sweep",
        system=sys.to_dict(),
        mode=mode,
        settings=settings.to_dict(),
        rows=rows,
        levels=sys.levels,
        scales=tuple(settings.scales),
        grids=grids,
        wall_clock_s=time.perf_counter() - start,
    )


def run_toy_experiment(settings: Optional[ExperimentSettings] = None, sys: Optional[ToySystem] = None) -> ExperimentReport:
    """Basin structure of the Anosov x Morse-Smale example.

    Besides the usual row this records whether the cells next to the
    repelling circle t = 0 all fall in the basin of the sink circle.
    """
    settings = settings or ExperimentSettings()
    sys = sys or ToySystem()
    spec = settings.slice
    if spec.axes(sys)[1] != "t" or spec.box.y0 != 0.0 or spec.box.y1 != 1.0:
        raise DomainError("the toy experiment needs a slice spanning the whole fiber on the y axis")
    start = time.perf_counter()
    row, grid = _row(sys, 0.0, settings)
    adjacent = np.concatenate([grid.labels[0], grid.labels[-1]])
    sink = float(np.mean(adjacent == BasinLabel.ATTRACTOR1))
    extra = {
        "attractor1_fraction": row.fractions["ATTRACTOR1"],
        "center_at_attractor": row.center[1]["center"],
        "expected_center_at_attractor": float(np.log(1.0 - sys.delta)),
        "repeller_adjacent_cells_in_sink_basin": sink,
        "repeller_in_basin_closure": sink == 1.0,
        "domination": validate_conditions(sys, settings.quad)["domination"].evidence,
    }
    return ExperimentReport(
        kind="toy",
        system=sys.to_dict(),
        mode=None,
        settings=settings.to_dict(),
        rows=[row],
        levels=sys.levels,
        scales=tuple(settings.scales),
        extra=extra,
        grids={0.0: grid},
        wall_clock_s=time.perf_counter() - start,
    )
