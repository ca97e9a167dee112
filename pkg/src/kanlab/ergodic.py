"""Orbits, Birkhoff averages and center Lyapunov exponents."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Callable, Iterator, Optional

import numpy as np

from . import _kernels as K
from .phase import DomainError, PhasePoint
from .systems import QuadratureSettings, SkewProductSystem, boundary_log_mean

N_BATCHES = 20
CHUNK = 1 << 16


@dataclass(frozen=True)
class OrbitSettings:
    n_transient: int = 1000
    n_average: int = 10**6
    seed: int = 0

    def __post_init__(self):
        if self.n_average < 1:
            raise DomainError("n_average must be >= 1")
        if self.n_transient < 0:
            raise DomainError("n_transient must be >= 0")
        if not 0 <= self.seed < 2**64:
            raise DomainError("seed must be a 64-bit unsigned integer")


@dataclass(frozen=True)
class LyapunovEstimate:
    center: float
    base_unstable: float
    base_stable: Optional[float]
    n_used: int
    standard_error: float

    def to_dict(self) -> dict:
        return asdict(self)


def rng_for(seed: int, *key: int) -> np.random.Generator:
    """Independent PCG64 stream for ``(seed, key...)``; the key shards work deterministically."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=key)))


def random_point(sys: SkewProductSystem, rng: np.random.Generator, fiber: Optional[float] = None) -> PhasePoint:
    """Lebesgue-random point; ``fiber`` pins the fiber coordinate (e.g. to an invariant level)."""
    base = tuple(rng.random(sys.base_dim))
    if fiber is None:
        fiber = rng.random()
    return PhasePoint(base if sys.base_dim == 2 else base[0], fiber)


def _start(sys, x0):
    b0, b1, t = sys._unpack(x0)
    return sys.params(), b0, b1, t


def orbit_chunks(sys: SkewProductSystem, x0, n: int, chunk: int = CHUNK) -> Iterator[tuple[np.ndarray, np.ndarray, np.ndarray]]:
    """Yield the orbit ``x_0 .. x_n`` as consecutive coordinate arrays."""
    if n < 0:
        raise DomainError("orbit length must be >= 0")
    P, b0, b1, t = _start(sys, x0)
    remaining = n + 1
    while remaining:
        m = min(chunk, remaining)
        o0, o1, ot = np.empty(m), np.empty(m), np.empty(m)
        b0, b1, t = K.orbit_fill(P, b0, b1, t, o0, o1, ot)
        remaining -= m
        yield o0, o1, ot


def orbit(sys: SkewProductSystem, x0, n: int) -> Iterator[PhasePoint]:
    """Stream ``x_0, f(x_0), ..., f^n(x_0)`` one point at a time."""
    for o0, o1, ot in orbit_chunks(sys, x0, n):
        for i in range(o0.shape[0]):
            yield sys._pack(o0[i], o1[i], ot[i])


def _batch_stats(sums: np.ndarray, n: int) -> tuple[float, float]:
    sizes = np.diff((np.arange(N_BATCHES + 1) * n) // N_BATCHES)
    mean = float(sums.sum() / n)
    used = sizes > 0
    if used.sum() < 2:
        return mean, 0.0
    means = sums[used] / sizes[used]
    return mean, float(np.std(means, ddof=1) / math.sqrt(used.sum()))


def birkhoff_average(
    sys: SkewProductSystem,
    x0,
    observable: Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray],
    s: OrbitSettings,
    return_error: bool = False,
):
    """Time average of ``observable`` over ``n_average`` iterates after burn-in.

    ``observable(b0, b1, t)`` receives coordinate arrays (``b1`` is zero for
    circle bases) and must return an array of the same length.  With
    ``return_error`` the batch-means standard error is returned as well.
    """
    total = s.n_transient + s.n_average
    sums = np.zeros(N_BATCHES)
    offset = 0
    for o0, o1, ot in orbit_chunks(sys, x0, total - 1):
        idx = np.arange(offset, offset + o0.shape[0])
        offset += o0.shape[0]
        keep = idx >= s.n_transient
        if not keep.any():
            continue
        vals = np.asarray(observable(o0[keep], o1[keep], ot[keep]), dtype=np.float64)
        vals = np.broadcast_to(vals, (int(keep.sum()),))
        batch = ((idx[keep] - s.n_transient) * N_BATCHES) // s.n_average
        sums += np.bincount(batch, weights=vals, minlength=N_BATCHES)
    mean, err = _batch_stats(sums, s.n_average)
    return (mean, err) if return_error else mean


def center_lyapunov(sys: SkewProductSystem, x0, s: OrbitSettings) -> LyapunovEstimate:
    """Center exponent as the time average of log|d_t fiber| along the orbit of ``x0``.

    Base exponents are exact (log k, or +-log|lambda_u| of the matrix).
    """
    P, b0, b1, t = _start(sys, x0)
    sums = np.zeros(N_BATCHES)
    K.log_derivative_batches(P, b0, b1, t, s.n_transient, s.n_average, N_BATCHES, sums)
    center, err = _batch_stats(sums, s.n_average)
    unstable, stable = sys.base_exponents()
    return LyapunovEstimate(center, unstable, stable, s.n_average, err)


def center_lyapunov_many(sys: SkewProductSystem, n_orbits: int, s: OrbitSettings, level: Optional[float] = None) -> list[LyapunovEstimate]:
    """Center exponents from ``n_orbits`` random starts; orbit ``i`` uses stream ``(seed, i)``."""
    return [center_lyapunov(sys, random_point(sys, rng_for(s.seed, i), level), s) for i in range(n_orbits)]


def boundary_log_integral(sys: SkewProductSystem, boundary_level: float, quad: Optional[QuadratureSettings] = None) -> float:
    """Mean of log|d_t fiber| over the base at an invariant fiber level (midpoint rule)."""
    if float(boundary_level) not in sys.invariant_levels():
        raise DomainError(f"level {boundary_level} is not an invariant fiber level of {sys.family}")
    return boundary_log_mean(sys, boundary_level, quad or QuadratureSettings())
