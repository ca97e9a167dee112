"""Compiled scalar kernels shared by every system family.

A system is flattened into a float64 parameter vector (see the ``P_*``
offsets) so one set of nogil kernels serves all families and the Python
layer can drive them from a thread pool.
"""

import math

import numpy as np
from numba import njit

FAM_CYLINDER = 0
FAM_SOLID = 1
FAM_T3 = 2
FAM_TOY = 3

PERT_NONE = 0
PERT_BOUNDARY = 1
PERT_ROTATION = 2

P_FAMILY = 0
P_K = 1
P_EPS = 2
P_DELTA = 3
P_M = 4  # 4 entries, row-major
P_P = 8  # 2 entries
P_Q = 10  # 2 entries
P_R = 12
P_PERT = 13
P_ETA = 14
P_PHASE = 15
N_PARAMS = 16

LABEL_0 = 0
LABEL_1 = 1
LABEL_UNDECIDED = 2

_SNAP = 1.0 - 2.0 ** -52
_TWO_PI = 2.0 * math.pi


@njit(cache=True, nogil=True)
def wrap(x):
    y = x - math.floor(x)
    if y >= _SNAP:
        return 0.0
    return y


@njit(cache=True, nogil=True)
def cdist(a, b):
    d = abs(wrap(a) - wrap(b))
    return min(d, 1.0 - d)


@njit(cache=True, nogil=True)
def sinpi(x):
    # sin(pi x) with exact zeros at integers and exact +-1 at half-integers
    y = x - 2.0 * math.floor(0.5 * x)
    sign = 1.0
    if y >= 1.0:
        y -= 1.0
        sign = -1.0
    if y > 0.5:
        y = 1.0 - y
    return sign * math.sin(math.pi * y)


@njit(cache=True, nogil=True)
def cospi(x):
    y = abs(x)
    y = y - 2.0 * math.floor(0.5 * y)
    if y > 1.0:
        y = 2.0 - y
    if y <= 0.25:
        return math.cos(math.pi * y)
    return math.sin(math.pi * (0.5 - y))


@njit(cache=True, nogil=True)
def bump(s):
    if s >= 1.0:
        return 0.0
    return math.exp(1.0 - 1.0 / (1.0 - s * s))


@njit(cache=True, nogil=True)
def _bump_at(u, v, cu, cv, r):
    du = u - cu
    du -= math.floor(du + 0.5)
    dv = v - cv
    dv -= math.floor(dv + 0.5)
    d2 = du * du + dv * dv
    r2 = r * r
    if d2 >= r2:
        return 0.0
    s2 = d2 / r2
    return math.exp(1.0 - 1.0 / (1.0 - s2))


@njit(cache=True, nogil=True)
def coupling(P, u, v):
    """Signed bump weight: +1 at p, -1 at q, 0 away from both supports."""
    r = P[P_R]
    return _bump_at(u, v, P[P_P], P[P_P + 1], r) - _bump_at(u, v, P[P_Q], P[P_Q + 1], r)


@njit(cache=True, nogil=True)
def base_step(P, b0, b1):
    fam = int(P[P_FAMILY])
    if fam == FAM_CYLINDER:
        return wrap(P[P_K] * b0), 0.0
    u = P[P_M] * b0 + P[P_M + 1] * b1
    v = P[P_M + 2] * b0 + P[P_M + 3] * b1
    return wrap(u), wrap(v)


@njit(cache=True, nogil=True)
def fiber_value(P, b0, b1, t):
    fam = int(P[P_FAMILY])
    eps = P[P_EPS]
    if fam == FAM_CYLINDER:
        out = t - eps * t * (1.0 - t) * cospi(2.0 * b0)
    elif fam == FAM_SOLID:
        out = t - eps * t * (1.0 - t) * coupling(P, b0, b1)
    elif fam == FAM_T3:
        out = t - (eps / _TWO_PI) * sinpi(2.0 * t) * coupling(P, b0, b1)
    else:
        out = t + (P[P_DELTA] / _TWO_PI) * sinpi(2.0 * t)
    mode = int(P[P_PERT])
    if mode == PERT_BOUNDARY:
        out = out + P[P_ETA] * t * (1.0 - t) * sinpi(2.0 * (b0 + P[P_PHASE]))
    elif mode == PERT_ROTATION:
        out = out + P[P_ETA]
    if fam == FAM_T3 or fam == FAM_TOY:
        out = wrap(out)
    return out


@njit(cache=True, nogil=True)
def fiber_derivative(P, b0, b1, t):
    fam = int(P[P_FAMILY])
    eps = P[P_EPS]
    if fam == FAM_CYLINDER:
        d = 1.0 - eps * (1.0 - 2.0 * t) * cospi(2.0 * b0)
    elif fam == FAM_SOLID:
        d = 1.0 - eps * (1.0 - 2.0 * t) * coupling(P, b0, b1)
    elif fam == FAM_T3:
        d = 1.0 - eps * cospi(2.0 * t) * coupling(P, b0, b1)
    else:
        d = 1.0 + P[P_DELTA] * cospi(2.0 * t)
    if int(P[P_PERT]) == PERT_BOUNDARY:
        d = d + P[P_ETA] * (1.0 - 2.0 * t) * sinpi(2.0 * (b0 + P[P_PHASE]))
    return d


@njit(cache=True, nogil=True)
def step(P, b0, b1, t):
    t1 = fiber_value(P, b0, b1, t)
    n0, n1 = base_step(P, b0, b1)
    return n0, n1, t1


@njit(cache=True, nogil=True)
def step_many(P, b0, b1, t, out0, out1, outt):
    for i in range(b0.shape[0]):
        out0[i], out1[i], outt[i] = step(P, b0[i], b1[i], t[i])


@njit(cache=True, nogil=True)
def fiber_many(P, b0, b1, t, out):
    for i in range(b0.shape[0]):
        out[i] = fiber_value(P, b0[i], b1[i], t[i])


@njit(cache=True, nogil=True)
def derivative_many(P, b0, b1, t, out):
    for i in range(b0.shape[0]):
        out[i] = fiber_derivative(P, b0[i], b1[i], t[i])


@njit(cache=True, nogil=True)
def orbit_fill(P, b0, b1, t, out0, out1, outt):
    """out[0] = start, out[i] = step(out[i-1]); returns the point after the last."""
    for i in range(out0.shape[0]):
        out0[i] = b0
        out1[i] = b1
        outt[i] = t
        b0, b1, t = step(P, b0, b1, t)
    return b0, b1, t


@njit(cache=True, nogil=True)
def log_derivative_batches(P, b0, b1, t, n_transient, n_average, n_batches, sums):
    """Accumulate log|d_t fiber| along an orbit into ``n_batches`` contiguous batches."""
    for _ in range(n_transient):
        b0, b1, t = step(P, b0, b1, t)
    for i in range(n_average):
        k = (i * n_batches) // n_average
        sums[k] += math.log(abs(fiber_derivative(P, b0, b1, t)))
        b0, b1, t = step(P, b0, b1, t)


@njit(cache=True, nogil=True)
def boundary_log_mean_circle(P, level, n):
    acc = 0.0
    for i in range(n):
        acc += math.log(abs(fiber_derivative(P, (i + 0.5) / n, 0.0, level)))
    return acc / n


@njit(cache=True, nogil=True)
def boundary_log_mean_torus(P, level, n):
    acc = 0.0
    for j in range(n):
        v = (j + 0.5) / n
        row = 0.0
        for i in range(n):
            row += math.log(abs(fiber_derivative(P, (i + 0.5) / n, v, level)))
        acc += row
    return acc / (n * n)


@njit(cache=True, nogil=True)
def classify_point(P, b0, b1, t, circle_fiber, level1, max_iter, tol, window):
    """Label the orbit by the first fiber level it shadows for ``window`` steps.

    Returns (label, iterate at which the decision was made or max_iter).
    """
    run0 = 0
    run1 = 0
    for it in range(1, max_iter + 1):
        b0, b1, t = step(P, b0, b1, t)
        if circle_fiber:
            d0 = cdist(t, 0.0)
            d1 = cdist(t, level1)
        else:
            d0 = abs(t)
            d1 = abs(level1 - t)
        if d0 <= tol:
            run0 += 1
            run1 = 0
            if run0 >= window:
                return LABEL_0, it
        elif d1 <= tol:
            run1 += 1
            run0 = 0
            if run1 >= window:
                return LABEL_1, it
        else:
            run0 = 0
            run1 = 0
    return LABEL_UNDECIDED, max_iter


@njit(cache=True, nogil=True)
def classify_block(P, b0, b1, t, circle_fiber, level1, max_iter, tol, window, labels, iters):
    for i in range(b0.shape[0]):
        lab, it = classify_point(P, b0[i], b1[i], t[i], circle_fiber, level1, max_iter, tol, window)
        labels[i] = lab
        iters[i] = it
