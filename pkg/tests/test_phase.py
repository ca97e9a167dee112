import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from kanlab.phase import Box2D, CirclePoint, DomainError, PhasePoint, TorusPoint, circle_dist, make_grid, wrap_circle

finite = st.floats(allow_nan=False, allow_infinity=False, min_value=-1e12, max_value=1e12)


@pytest.mark.parametrize("x, expected", [(1.25, 0.25), (-0.25, 0.75), (1.0, 0.0), (0.0, 0.0), (3.5, 0.5)])
def test_wrap_examples(x, expected):
    assert wrap_circle(x) == expected


@pytest.mark.parametrize("bad", [math.inf, -math.inf, math.nan])
def test_wrap_rejects_non_finite(bad):
    with pytest.raises(DomainError):
        wrap_circle(bad)


def test_wrap_snaps_values_next_to_one():
    assert wrap_circle(-1e-20) == 0.0
    assert wrap_circle(1.0 - 2.0**-53) == 0.0
    assert wrap_circle(1.0 - 2.0**-50) == 1.0 - 2.0**-50


@given(finite)
def test_wrap_is_idempotent_and_in_range(x):
    y = wrap_circle(x)
    assert 0.0 <= y < 1.0
    assert wrap_circle(y) == y


@given(st.floats(min_value=-1e6, max_value=1e6, allow_nan=False))
def test_wrap_preserves_class_mod_one(x):
    y = wrap_circle(x)
    r = (x - y) - round(x - y)
    assert abs(r) <= 1e-9 or y == 0.0


@pytest.mark.parametrize("a, b, expected", [(0.1, 0.9, 0.2), (0.3, 0.3, 0.0), (0.0, 0.5, 0.5)])
def test_circle_dist_examples(a, b, expected):
    assert circle_dist(CirclePoint(a), CirclePoint(b)) == pytest.approx(expected, abs=1e-15)


@given(finite, finite, finite)
def test_circle_dist_is_a_metric(a, b, c):
    ab, bc, ac = circle_dist(a, b), circle_dist(b, c), circle_dist(a, c)
    assert 0.0 <= ab <= 0.5
    assert ab == circle_dist(b, a)
    assert ac <= ab + bc + 1e-12


def test_points_are_canonical():
    assert CirclePoint(2.75).x == 0.75
    assert TorusPoint(-0.5, 1.25).coords == (0.5, 0.25)
    assert PhasePoint(1.5, 0.3).base == CirclePoint(0.5)
    assert PhasePoint((0.5, 1.5), 0.3).base == TorusPoint(0.5, 0.5)


def test_make_grid_examples():
    np.testing.assert_array_equal(make_grid(Box2D.unit(), 1, 1), [[0.5, 0.5]])
    np.testing.assert_array_equal(make_grid(Box2D.unit(), 2, 1), [[0.25, 0.5], [0.75, 0.5]])


def test_make_grid_row_major():
    g = make_grid(Box2D(0.0, 0.0, 1.0, 1.0), 3, 2)
    assert g.shape == (6, 2)
    # row j (y) is outer, column i (x) inner
    np.testing.assert_allclose(g[4], [0.5, 0.75])


@pytest.mark.parametrize("args", [(0.5, 0.2, 0.5, 0.8), (0.0, 0.0, 0.0, 1.0), (0.0, 0.0, 1.5, 1.0)])
def test_degenerate_or_outside_box_rejected(args):
    with pytest.raises(DomainError):
        Box2D(*args)


@pytest.mark.parametrize("nx, ny", [(0, 4), (4, 0), (-1, 2)])
def test_zero_resolution_rejected(nx, ny):
    with pytest.raises(DomainError):
        make_grid(Box2D.unit(), nx, ny)


@given(st.integers(1, 40), st.integers(1, 40), st.floats(0.0, 0.4), st.floats(0.0, 0.4))
def test_make_grid_deterministic(nx, ny, x0, y0):
    box = Box2D(x0, y0, x0 + 0.5, y0 + 0.6)
    a, b = make_grid(box, nx, ny), make_grid(box, nx, ny)
    assert a.tobytes() == b.tobytes()
    assert len(a) == nx * ny
    assert np.all((a[:, 0] > box.x0) & (a[:, 0] < box.x1))
