"""The four skew-product families and their hypothesis validators.

Every family is a frozen dataclass; evaluation goes through the compiled
kernels in :mod:`kanlab._kernels` via a flat parameter vector, so scalar
calls, grid sweeps and orbit loops all share one code path.

Fiber maps:

* cylinder      phi(theta, t) = t - eps t (1-t) cos(2 pi theta)
* solid torus   psi(z, t)     = t - eps t (1-t) c(z)
* 3-torus       phi(z, t)     = t - eps/(2 pi) sin(2 pi t) c(z)
* toy           xi(t)         = t + delta/(2 pi) sin(2 pi t)

with ``c(z) = beta(|z-p|/r) - beta(|z-q|/r)`` and the bump
``beta(s) = exp(1 - 1/(1-s^2))`` on ``|s| < 1``.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass, field, replace
from fractions import Fraction
from itertools import product
from typing import ClassVar, Optional

import numpy as np

from . import _kernels as K
from .phase import CirclePoint, DomainError, PhasePoint, TorusPoint, torus_dist, wrap_circle

BOUNDARY_PRESERVING = "boundary_preserving"
FIBER_ROTATION = "fiber_rotation"
_PERT_CODES = {None: K.PERT_NONE, BOUNDARY_PRESERVING: K.PERT_BOUNDARY, FIBER_ROTATION: K.PERT_ROTATION}


@dataclass(frozen=True)
class Perturbation:
    """Additive change of the fiber map.

    ``boundary_preserving`` adds ``eta t(1-t) sin(2 pi (theta + phase))``
    (theta is the first base coordinate) and keeps both boundary levels
    fixed; ``fiber_rotation`` adds the constant ``eta`` modulo 1.
    """

    mode: str
    eta: float
    phase: float = 0.0

    def __post_init__(self):
        if self.mode not in (BOUNDARY_PRESERVING, FIBER_ROTATION):
            raise DomainError(f"unknown perturbation mode {self.mode!r}")
        if not math.isfinite(self.eta) or self.eta < 0:
            raise DomainError(f"perturbation size must be finite and >= 0, got {self.eta}")
        if not math.isfinite(self.phase):
            raise DomainError("perturbation phase must be finite")


@dataclass(frozen=True)
class QuadratureSettings:
    """Resolutions for boundary integrals and sampled sup/inf checks."""

    n_circle: int = 2**16
    n_torus: int = 1024
    n_base_samples: int = 128
    n_fiber_samples: int = 129

    def __post_init__(self):
        for name in ("n_circle", "n_torus", "n_base_samples", "n_fiber_samples"):
            if getattr(self, name) < 16:
                raise DomainError(f"quadrature setting {name} must be >= 16")


def _matrix(m) -> tuple[tuple[int, int], tuple[int, int]]:
    arr = np.asarray(m)
    if arr.shape != (2, 2):
        raise DomainError(f"expected a 2x2 matrix, got shape {arr.shape}")
    if not np.all(arr == np.round(arr)):
        raise DomainError("matrix entries must be integers")
    a = arr.astype(int)
    return ((int(a[0, 0]), int(a[0, 1])), (int(a[1, 0]), int(a[1, 1])))


def hyperbolic_spectrum(m) -> tuple[float, float]:
    """Moduli ``(|lambda_u|, |lambda_s|)`` of a hyperbolic 2x2 integer matrix with det +-1."""
    (a, b), (c, d) = _matrix(m)
    det = a * d - b * c
    tr = a + d
    if abs(det) != 1:
        raise DomainError(f"matrix must have determinant +-1, got {det}")
    disc = tr * tr - 4 * det
    if disc <= 0 or (det == 1 and abs(tr) <= 2) or (det == -1 and tr == 0):
        raise DomainError(f"matrix {m} is not hyperbolic")
    lam_u = (abs(tr) + math.sqrt(disc)) / 2.0
    return lam_u, 1.0 / lam_u


def anosov_map(M, z) -> TorusPoint:
    """Action of an integer matrix on the torus, followed by reduction mod 1."""
    (a, b), (c, d) = _matrix(M)
    u, v = z.coords if isinstance(z, TorusPoint) else z
    return TorusPoint(a * u + b * v, c * u + d * v)


def torus_fixed_points(M) -> list[TorusPoint]:
    """All solutions of ``M z = z (mod 1)``, found exactly over the rationals."""
    (a, b), (c, d) = _matrix(M)
    n = ((a - 1, b), (c, d - 1))
    det = n[0][0] * n[1][1] - n[0][1] * n[1][0]
    if det == 0:
        raise DomainError("M - I is singular; fixed points are not isolated")
    count = abs(det)
    # z = (M - I)^{-1} m for integer m; m ranges over the image of [0,1)^2
    bound0 = abs(n[0][0]) + abs(n[0][1])
    bound1 = abs(n[1][0]) + abs(n[1][1])
    found = set()
    for m0, m1 in product(range(-bound0, bound0 + 1), range(-bound1, bound1 + 1)):
        u = Fraction(n[1][1] * m0 - n[0][1] * m1, det)
        v = Fraction(-n[1][0] * m0 + n[0][0] * m1, det)
        found.add((u - math.floor(u), v - math.floor(v)))
        if len(found) == count:
            break
    return [TorusPoint(float(u), float(v)) for u, v in sorted(found)]


class SkewProductSystem:
    """Shared behaviour of the four families.

    Subclasses are frozen dataclasses that define ``family``, ``fiber_kind``
    and ``_fill_params``.
    """

    family: ClassVar[str]
    fiber_kind: ClassVar[str]  # "interval" or "circle"
    base_dim: ClassVar[int]
    perturbation: Optional[Perturbation]

    # -- parameters -------------------------------------------------------
    def _fill_params(self, P: np.ndarray) -> None:
        raise NotImplementedError

    def params(self) -> np.ndarray:
        P = np.zeros(K.N_PARAMS, dtype=np.float64)
        self._fill_params(P)
        pert = self.perturbation
        P[K.P_PERT] = _PERT_CODES[pert.mode if pert else None]
        if pert is not None:
            P[K.P_ETA] = pert.eta
            P[K.P_PHASE] = pert.phase
        return P

    @property
    def levels(self) -> tuple[float, float]:
        """The two attracting fiber levels, labelled 0 and 1 by the basins code."""
        return (0.0, 1.0) if self.fiber_kind == "interval" else (0.0, 0.5)

    def invariant_levels(self) -> tuple[float, ...]:
        pert = self.perturbation
        if pert is not None and pert.mode == FIBER_ROTATION and pert.eta % 1.0 != 0.0:
            return ()
        return self.levels

    # -- evaluation -------------------------------------------------------
    def _unpack(self, x) -> tuple[float, float, float]:
        if not isinstance(x, PhasePoint):
            x = PhasePoint(*x)
        coords = x.base.coords
        if len(coords) != self.base_dim:
            raise DomainError(f"{self.family} expects a {self.base_dim}-dimensional base point")
        t = x.fiber
        if self.fiber_kind == "interval":
            if not 0.0 <= t <= 1.0:
                raise DomainError(f"fiber coordinate {t} outside [0, 1]")
        else:
            t = wrap_circle(t)
        b0 = coords[0]
        b1 = coords[1] if self.base_dim == 2 else 0.0
        return b0, b1, t

    def _pack(self, b0: float, b1: float, t: float) -> PhasePoint:
        base = CirclePoint(b0) if self.base_dim == 1 else TorusPoint(b0, b1)
        return PhasePoint(base, t)

    def map(self, x) -> PhasePoint:
        b0, b1, t = self._unpack(x)
        return self._pack(*K.step(self.params(), b0, b1, t))

    def fiber_derivative(self, x) -> float:
        b0, b1, t = self._unpack(x)
        return float(K.fiber_derivative(self.params(), b0, b1, t))

    def fiber_map_array(self, b0, b1, t) -> np.ndarray:
        b0, b1, t = (np.ascontiguousarray(a, dtype=np.float64).ravel() for a in np.broadcast_arrays(b0, b1, t))
        out = np.empty(b0.shape[0])
        K.fiber_many(self.params(), b0, b1, t, out)
        return out

    def fiber_derivative_array(self, b0, b1, t) -> np.ndarray:
        b0, b1, t = (np.ascontiguousarray(a, dtype=np.float64).ravel() for a in np.broadcast_arrays(b0, b1, t))
        out = np.empty(b0.shape[0])
        K.derivative_many(self.params(), b0, b1, t, out)
        return out

    # -- base dynamics ----------------------------------------------------
    def base_exponents(self) -> tuple[float, Optional[float]]:
        """(unstable, stable) base Lyapunov exponents; stable is None for the circle map."""
        raise NotImplementedError

    def base_fixed_points(self) -> list:
        raise NotImplementedError

    def marked_points(self) -> tuple:
        """Base points p and q whose fibers carry the source/sink structure."""
        raise NotImplementedError

    # -- serialization ----------------------------------------------------
    def to_dict(self) -> dict:
        d = {"family": self.family}
        for k, v in asdict(self).items():
            if k != "perturbation":
                d[k] = _listify(v)
        if self.perturbation is not None:
            d["perturbation"] = asdict(self.perturbation)
        return d

    def digest(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


def _listify(v):
    if isinstance(v, (tuple, list)):
        return [_listify(x) for x in v]
    return v


def _check_eps(eps: float) -> None:
    if not (math.isfinite(eps) and 0.0 <= eps < 1.0):
        raise DomainError(f"eps must lie in [0, 1), got {eps}")


@dataclass(frozen=True)
class KanCylinderSystem(SkewProductSystem):
    """Kan's endomorphism of S^1 x [0,1] over ``theta -> k theta``."""

    k: int = 3
    eps: float = 0.5
    perturbation: Optional[Perturbation] = None

    family: ClassVar[str] = "kan_cylinder"
    fiber_kind: ClassVar[str] = "interval"
    base_dim: ClassVar[int] = 1

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 3:
            raise DomainError(f"k must be an integer >= 3, got {self.k}")
        object.__setattr__(self, "k", int(self.k))
        _check_eps(self.eps)

    def _fill_params(self, P):
        P[K.P_FAMILY] = K.FAM_CYLINDER
        P[K.P_K] = self.k
        P[K.P_EPS] = self.eps
        P[K.P_Q] = 0.5

    def base_exponents(self):
        return math.log(self.k), None

    def base_fixed_points(self):
        return [CirclePoint(j / (self.k - 1)) for j in range(self.k - 1)]

    def marked_points(self):
        return CirclePoint(0.0), CirclePoint(0.5)


class _TorusBase(SkewProductSystem):
    base_dim: ClassVar[int] = 2

    def base_matrix(self):
        raise NotImplementedError

    def base_exponents(self):
        lam_u, lam_s = hyperbolic_spectrum(self.base_matrix())
        return math.log(lam_u), -math.log(lam_u)

    def base_fixed_points(self):
        return torus_fixed_points(self.base_matrix())


@dataclass(frozen=True)
class ToySystem(_TorusBase):
    """Anosov automorphism times a Morse-Smale circle map (source 0, sink 1/2)."""

    A: tuple = ((2, 1), (1, 1))
    delta: float = 0.5
    perturbation: Optional[Perturbation] = None

    family: ClassVar[str] = "toy"
    fiber_kind: ClassVar[str] = "circle"

    def __post_init__(self):
        object.__setattr__(self, "A", _matrix(self.A))
        hyperbolic_spectrum(self.A)
        if not (math.isfinite(self.delta) and 0.0 < self.delta < 1.0):
            raise DomainError(f"delta must lie in (0, 1), got {self.delta}")

    def base_matrix(self):
        return self.A

    def _fill_params(self, P):
        P[K.P_FAMILY] = K.FAM_TOY
        P[K.P_DELTA] = self.delta
        P[K.P_M : K.P_M + 4] = np.ravel(self.A)

    def marked_points(self):
        return None, None


@dataclass(frozen=True)
class KanSolidTorusSystem(_TorusBase):
    """Kan diffeomorphism of T^2 x [0,1] with bump-localised coupling at p and q."""

    M: tuple = ((5, 3), (3, 2))
    eps: float = 0.5
    r: float = 0.2
    p: tuple = (0.0, 0.0)
    q: tuple = (0.2, 0.4)
    perturbation: Optional[Perturbation] = None

    family: ClassVar[str] = "kan_solid_torus"
    fiber_kind: ClassVar[str] = "interval"

    def __post_init__(self):
        object.__setattr__(self, "M", _matrix(self.M))
        object.__setattr__(self, "p", tuple(float(c) for c in self.p))
        object.__setattr__(self, "q", tuple(float(c) for c in self.q))
        lam_u, lam_s = hyperbolic_spectrum(self.M)
        _check_eps(self.eps)
        if not (math.isfinite(self.r) and self.r > 0):
            raise DomainError(f"bump radius must be positive, got {self.r}")
        (a, b), (c, d) = self.M
        for name, pt in (("p", self.p), ("q", self.q)):
            if len(pt) != 2:
                raise DomainError(f"{name} must be a torus point")
            u, v = pt
            img = ((a - 1) * u + b * v, c * u + (d - 1) * v)
            if any(abs(x - round(x)) > 1e-9 for x in img):
                raise DomainError(f"{name}={pt} is not a fixed point of M")
        if torus_dist(self.p, self.q) <= 2 * self.r:
            raise DomainError("bump supports around p and q overlap")
        if not (lam_s < 1.0 - self.eps and 1.0 + self.eps < lam_u):
            raise DomainError(f"eps={self.eps} violates the spectral sandwich ({lam_s:.4f}, {lam_u:.4f})")

    def base_matrix(self):
        return self.M

    def _fill_params(self, P):
        P[K.P_FAMILY] = K.FAM_SOLID
        P[K.P_EPS] = self.eps
        P[K.P_M : K.P_M + 4] = np.ravel(self.M)
        P[K.P_P : K.P_P + 2] = self.p
        P[K.P_Q : K.P_Q + 2] = self.q
        P[K.P_R] = self.r

    def marked_points(self):
        return TorusPoint(*self.p), TorusPoint(*self.q)

    def coupling(self, z) -> float:
        """The signed bump weight c(z)."""
        u, v = z.coords if isinstance(z, TorusPoint) else z
        return float(K.coupling(self.params(), wrap_circle(u), wrap_circle(v)))


@dataclass(frozen=True)
class KanT3System(KanSolidTorusSystem):
    """The boundaryless variant on T^3: circle fiber with invariant levels 0 and 1/2."""

    family: ClassVar[str] = "kan_t3"
    fiber_kind: ClassVar[str] = "circle"

    def _fill_params(self, P):
        super()._fill_params(P)
        P[K.P_FAMILY] = K.FAM_T3


FAMILIES = {cls.family: cls for cls in (KanCylinderSystem, KanSolidTorusSystem, KanT3System, ToySystem)}


def system_from_dict(d: dict) -> SkewProductSystem:
    d = dict(d)
    try:
        cls = FAMILIES[d.pop("family")]
    except KeyError as exc:
        raise DomainError(f"unknown system family {exc}") from None
    pert = d.pop("perturbation", None)
    for key in ("A", "M", "p", "q"):
        if key in d:
            d[key] = tuple(tuple(r) if isinstance(r, list) else r for r in d[key])
    sys = cls(**d)
    if pert is not None:
        sys = replace(sys, perturbation=Perturbation(**pert))
    return sys


# -- spec-level entry points ---------------------------------------------------


def _require(sys, *classes):
    if not isinstance(sys, classes):
        names = ", ".join(c.__name__ for c in classes)
        raise DomainError(f"expected {names}, got {type(sys).__name__}")


def kan_cylinder_map(sys: KanCylinderSystem, x) -> PhasePoint:
    _require(sys, KanCylinderSystem)
    return sys.map(x)


def kan_cylinder_fiber_derivative(sys: KanCylinderSystem, x) -> float:
    _require(sys, KanCylinderSystem)
    return sys.fiber_derivative(x)


def toy_map(sys: ToySystem, x) -> PhasePoint:
    _require(sys, ToySystem)
    return sys.map(x)


def kan_solid_map(sys: KanSolidTorusSystem, x) -> PhasePoint:
    _require(sys, KanSolidTorusSystem)
    if isinstance(sys, KanT3System):
        raise DomainError("kan_solid_map needs the interval-fiber system")
    return sys.map(x)


def kan_t3_map(sys: KanT3System, x) -> PhasePoint:
    _require(sys, KanT3System)
    return sys.map(x)


def base_fixed_points(sys) -> list:
    return sys.base_fixed_points()


# -- boundary integrals ----------------------------------------------------------


def boundary_log_mean(sys: SkewProductSystem, level: float, quad: QuadratureSettings) -> float:
    """Midpoint-rule mean of log|d_t fiber| over the base at a fixed fiber level."""
    P = sys.params()
    if sys.base_dim == 1:
        return float(K.boundary_log_mean_circle(P, float(level), quad.n_circle))
    return float(K.boundary_log_mean_torus(P, float(level), quad.n_torus))


# -- validators -------------------------------------------------------------------


@dataclass
class ConditionResult:
    name: str
    passed: bool
    evidence: dict = field(default_factory=dict)


@dataclass
class ConditionReport:
    family: str
    system: dict
    conditions: list[ConditionResult]

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.conditions)

    def __getitem__(self, name: str) -> ConditionResult:
        for c in self.conditions:
            if c.name == name:
                return c
        raise KeyError(name)

    def names(self) -> list[str]:
        return [c.name for c in self.conditions]

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "system": self.system,
            "all_passed": self.all_passed,
            "conditions": [asdict(c) for c in self.conditions],
        }


_CONDITION_NAMES = {
    "kan_cylinder": ("K1", "K2", "K3", "K4"),
    "kan_solid_torus": ("KD1", "KD2", "KD3", "KD4"),
    "kan_t3": ("KB1", "KB2", "KB3", "KB4"),
    "toy": ("hyperbolic_base", "morse_smale", "domination"),
}

# a passing domination check with less relative slack than this is flagged
NEAR_FAILURE_MARGIN = 1e-2


def _base_samples(sys, n: int) -> tuple[np.ndarray, np.ndarray]:
    grid = np.arange(n) / n
    if sys.base_dim == 1:
        return grid, np.zeros_like(grid)
    u, v = np.meshgrid(grid, grid, indexing="xy")
    u, v = u.ravel(), v.ravel()
    extra = [pt.coords for pt in sys.marked_points() if pt is not None]
    if extra:
        e = np.asarray(extra)
        u = np.concatenate([u, e[:, 0]])
        v = np.concatenate([v, e[:, 1]])
    return u, v


def _displacement(sys, t_in, t_out):
    d = t_out - t_in
    if sys.fiber_kind == "circle":
        d = (d + 0.5) % 1.0 - 0.5
    return d


def _check_boundary(sys, quad) -> dict:
    b0, b1 = _base_samples(sys, quad.n_base_samples)
    worst = 0.0
    exact = True
    for level in sys.levels:
        out = sys.fiber_map_array(b0, b1, np.full_like(b0, level))
        diff = np.abs(out - level)
        worst = max(worst, float(diff.max()))
        exact &= bool(np.all(out == level))
    return {"passed": exact, "max_abs_deviation": worst, "n_base_samples": int(b0.size)}


def _check_fixed_points(sys, quad) -> dict:
    lo, hi = sys.levels
    n = quad.n_fiber_samples
    if sys.fiber_kind == "interval":
        ts = np.linspace(0.0, 1.0, n + 2)[1:-1]
        arcs = [ts]
    else:
        ts = np.linspace(0.0, 1.0, 2 * n + 3)[:-1]
        ts = ts[(ts != 0.0) & (ts != 0.5)]
        arcs = [ts[ts < 0.5], ts[ts > 0.5]]
    p, q = sys.marked_points()
    evidence = {}
    ok = True
    # p: sink at level 0, source at the other level; q: the reverse
    for name, pt, sink, source in (("p", p, lo, hi), ("q", q, hi, lo)):
        c = pt.coords + (0.0,) * (2 - len(pt.coords))
        m_sink = float(K.fiber_derivative(sys.params(), c[0], c[1], sink))
        m_source = float(K.fiber_derivative(sys.params(), c[0], c[1], source))
        interior_clean = True
        for arc in arcs:
            d = _displacement(sys, arc, sys.fiber_map_array(c[0], c[1], arc))
            interior_clean &= bool(np.all(d < 0) or np.all(d > 0))
        fixed = bool(np.all(sys.fiber_map_array(c[0], c[1], np.array([lo, hi])) == np.array([lo, hi])))
        good = fixed and interior_clean and 0.0 < m_sink < 1.0 and m_source > 1.0
        ok &= good
        evidence[name] = {
            "point": list(pt.coords),
            "sink_level": sink,
            "sink_multiplier": m_sink,
            "source_level": source,
            "source_multiplier": m_source,
            "no_interior_fixed_points": interior_clean,
            "levels_fixed": fixed,
        }
    evidence["passed"] = ok
    return evidence


def _derivative_range(sys, quad) -> tuple[float, float]:
    b0, b1 = _base_samples(sys, quad.n_base_samples)
    ts = np.linspace(0.0, 1.0, quad.n_fiber_samples)
    if sys.fiber_kind == "circle":
        ts = ts[:-1]
    B0 = np.repeat(b0, ts.size)
    B1 = np.repeat(b1, ts.size)
    T = np.tile(ts, b0.size)
    d = np.abs(sys.fiber_derivative_array(B0, B1, T))
    return float(d.min()), float(d.max())


def _check_sandwich(sys, quad) -> dict:
    lo, hi = _derivative_range(sys, quad)
    if sys.base_dim == 1:
        return {"passed": hi < sys.k, "inf_abs_derivative": lo, "sup_abs_derivative": hi, "upper_bound": sys.k}
    lam_u, lam_s = hyperbolic_spectrum(sys.base_matrix())
    sv = np.linalg.svd(np.asarray(sys.base_matrix(), dtype=float), compute_uv=False)
    norm, conorm = float(sv[0]), float(sv[-1])
    return {
        "passed": lam_s < lo and hi < lam_u,
        "inf_abs_derivative": lo,
        "sup_abs_derivative": hi,
        "spectral_lower": lam_s,
        "spectral_upper": lam_u,
        "operator_norm_lower": conorm,
        "operator_norm_upper": norm,
        "operator_norm_passed": conorm < lo and hi < norm,
    }


def _check_integrals(sys, quad) -> dict:
    values = {str(level): boundary_log_mean(sys, level, quad) for level in sys.levels}
    return {"passed": all(v < 0 for v in values.values()), "integrals": values}


def _validate_toy(sys: ToySystem, quad) -> list[ConditionResult]:
    lam_u, lam_s = hyperbolic_spectrum(sys.A)
    results = [ConditionResult("hyperbolic_base", True, {"lambda_u": lam_u, "lambda_s": lam_s})]
    P = sys.params()
    m_source = float(K.fiber_derivative(P, 0.0, 0.0, 0.0))
    m_sink = float(K.fiber_derivative(P, 0.0, 0.0, 0.5))
    n = quad.n_fiber_samples
    ts = np.linspace(0.0, 1.0, 2 * n + 3)[:-1]
    ts = ts[(ts != 0.0) & (ts != 0.5)]
    clean = True
    for arc in (ts[ts < 0.5], ts[ts > 0.5]):
        d = _displacement(sys, arc, sys.fiber_map_array(0.0, 0.0, arc))
        clean &= bool(np.all(d < 0) or np.all(d > 0))
    levels_fixed = bool(np.all(sys.fiber_map_array(0.0, 0.0, np.array([0.0, 0.5])) == np.array([0.0, 0.5])))
    results.append(
        ConditionResult(
            "morse_smale",
            levels_fixed and clean and m_source > 1.0 and 0.0 < m_sink < 1.0,
            {"source_multiplier": m_source, "sink_multiplier": m_sink, "no_other_fixed_points": clean, "levels_fixed": levels_fixed},
        )
    )
    ts = np.linspace(0.0, 1.0, 4 * n + 1)[:-1]
    d = np.abs(sys.fiber_derivative_array(0.0, 0.0, ts))
    lo, hi = float(d.min()), float(d.max())
    passed = lam_s < lo and hi < lam_u
    lower_margin = (lo - lam_s) / lam_s
    upper_margin = (lam_u - hi) / lam_u
    results.append(
        ConditionResult(
            "domination",
            passed,
            {
                "inf_abs_derivative": lo,
                "sup_abs_derivative": hi,
                "lambda_s": lam_s,
                "lambda_u": lam_u,
                "lower_margin": lower_margin,
                "upper_margin": upper_margin,
                "near_failure": passed and min(lower_margin, upper_margin) < NEAR_FAILURE_MARGIN,
            },
        )
    )
    return results


def validate_conditions(sys: SkewProductSystem, quad: Optional[QuadratureSettings] = None) -> ConditionReport:
    """Numerically check every hypothesis of the system's family.

    Failures are recorded in the report, never raised.
    """
    quad = quad or QuadratureSettings()
    if isinstance(sys, ToySystem):
        conditions = _validate_toy(sys, quad)
    else:
        n1, n2, n3, n4 = _CONDITION_NAMES[sys.family]
        checks = []
        for name, fn in ((n1, _check_boundary), (n2, _check_fixed_points), (n3, _check_sandwich), (n4, _check_integrals)):
            ev = fn(sys, quad)
            checks.append(ConditionResult(name, bool(ev.pop("passed")), ev))
        conditions = checks
    return ConditionReport(sys.family, sys.to_dict(), conditions)
