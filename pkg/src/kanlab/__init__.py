"""Numerical laboratory for Kan-type partially hyperbolic skew products."""

__version__ = "0.1.0"

from .phase import Box2D, CirclePoint, DomainError, PhasePoint, TorusPoint, circle_dist, make_grid, wrap_circle
from .systems import (
    ConditionReport,
    KanCylinderSystem,
    KanSolidTorusSystem,
    KanT3System,
    Perturbation,
    QuadratureSettings,
    ToySystem,
    validate_conditions,
)
from .ergodic import LyapunovEstimate, OrbitSettings, birkhoff_average, boundary_log_integral, center_lyapunov, orbit
from .basins import BasinLabel, BasinLabelGrid, ClassifySettings, SliceSpec, basin_map, classify, intermingling_statistic

__all__ = [
    "Box2D", "CirclePoint", "DomainError", "PhasePoint", "TorusPoint", "circle_dist", "make_grid", "wrap_circle",
    "ConditionReport", "KanCylinderSystem", "KanSolidTorusSystem", "KanT3System", "Perturbation",
    "QuadratureSettings", "ToySystem", "validate_conditions",
    "LyapunovEstimate", "OrbitSettings", "birkhoff_average", "boundary_log_integral", "center_lyapunov", "orbit",
    "BasinLabel", "BasinLabelGrid", "ClassifySettings", "SliceSpec", "basin_map", "classify", "intermingling_statistic",
]
