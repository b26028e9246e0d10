import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from conformal_rigidity.hyperbolic import (
    GeodesicObject,
    axis_point,
    boost,
    from_ball,
    hyperbolic_distance,
    light_point,
    minkowski_dot,
    moebius_map,
    signed_distance,
    to_ball,
)
from conformal_rigidity.presets import moebius_factor

coord = st.floats(-0.6, 0.6, allow_nan=False)
ball_pt = st.tuples(coord, coord, coord).filter(lambda v: np.dot(v, v) < 0.95)
unit = st.tuples(st.floats(-1, 1), st.floats(-1, 1), st.floats(-1, 1)).filter(lambda v: 0.2 < np.linalg.norm(v))
length = st.floats(-2.0, 2.0)


@settings(max_examples=60, deadline=None)
@given(ball_pt, ball_pt)
def test_distance_matches_ball_model(a, b):
    a, b = np.array(a), np.array(b)
    p, q = from_ball(a), from_ball(b)
    assert minkowski_dot(p, p) == pytest.approx(-1, abs=1e-12)
    assert np.allclose(to_ball(p), a, atol=1e-12)
    assert hyperbolic_distance(p, q) == pytest.approx(oracles.ball_distance(a, b), abs=1e-7)


@settings(max_examples=60, deadline=None)
@given(ball_pt, ball_pt, length, unit)
def test_boost_is_an_isometry(a, b, s, ax):
    p, q = from_ball(np.array(a)), from_ball(np.array(b))
    ps, qs = boost(p, s, ax), boost(q, s, ax)
    assert minkowski_dot(ps, ps) == pytest.approx(-1, abs=1e-9)
    assert hyperbolic_distance(ps, qs) == pytest.approx(hyperbolic_distance(p, q), abs=1e-6)
    assert np.allclose(boost(ps, -s, ax), p, atol=1e-9)


@settings(max_examples=40, deadline=None)
@given(length, unit)
def test_boost_moves_origin_along_axis(s, ax):
    a = np.array(ax) / np.linalg.norm(ax)
    o = np.array([1.0, 0, 0, 0])
    assert np.allclose(boost(o, s, a), axis_point(s, a), atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(length, unit, unit)
def test_moebius_boundary_action(s, ax, xx):
    a = np.array(ax) / np.linalg.norm(ax)
    x = np.array(xx) / np.linalg.norm(xx)
    y, fac = moebius_map(x, s, a)
    # boundary action of the boost on light-like points
    L = boost(light_point(x), s, a)
    assert np.allclose(L[1:] / L[0], y, atol=1e-10)
    assert np.linalg.norm(y) == pytest.approx(1, abs=1e-12)
    # conformal factor of the inverse map is the preset factor
    _, inv = moebius_map(y, -s, a)
    assert math.log(inv) == pytest.approx(float(moebius_factor(y, s, a)), abs=1e-9)


def test_signed_distances():
    o = np.array([1.0, 0, 0, 0])
    for t in (0.5, 1.0):
        p = axis_point(t, [0, 0, 1])
        assert signed_distance(p, GeodesicObject.point(o)) == pytest.approx(t)
        assert signed_distance(o, GeodesicObject.sphere(o, t)) == pytest.approx(-t)
        assert signed_distance(p, GeodesicObject.hyperplane([0, 0, 0, 1])) == pytest.approx(t)
        assert signed_distance(p, GeodesicObject.axis_line([0, 0, 1])) == pytest.approx(0, abs=1e-7)
        q = axis_point(t, [1, 0, 0])
        assert signed_distance(q, GeodesicObject.cylinder([0, 0, 1], t)) == pytest.approx(0, abs=1e-7)
        # horosphere at the ideal point x through the point at distance t
        h = axis_point(t, [0, 0, 1])
        assert signed_distance(h, GeodesicObject.horosphere([0, 0, 1], t)) == pytest.approx(0, abs=1e-12)


def test_from_ball_rejects_outside_points():
    with pytest.raises(ValueError):
        from_ball([0.8, 0.8, 0.0])


def test_geodesic_object_validation():
    with pytest.raises(ValueError):
        GeodesicObject("torus")
    with pytest.raises(ValueError):
        GeodesicObject.hyperplane([1.0, 0, 0, 0])
