import math

import numpy as np
import pytest

from conformal_rigidity import presets
from conformal_rigidity.sphere_core import (
    DomainError,
    FieldGrid,
    build_grid,
    fd_weights,
    geodesic_distance,
    gradient_ambient,
    hessian,
    integrate,
    read_field,
    sphere_area,
    write_field,
)


def test_sphere_area():
    assert sphere_area(1) == pytest.approx(2 * math.pi)
    assert sphere_area(2) == pytest.approx(4 * math.pi)
    assert sphere_area(3) == pytest.approx(2 * math.pi**2)


def test_fd_weights_second_derivative():
    w = fd_weights([-2, -1, 0, 1, 2], 2)
    assert np.allclose(w, [-1 / 12, 4 / 3, -5 / 2, 4 / 3, -1 / 12])


@pytest.mark.parametrize(
    "kwargs,msg",
    [
        (dict(n=1), "dimension"),
        (dict(chart="hex"), "unknown chart"),
        (dict(chart="latlon", n=3), "latitude"),
        (dict(r_max=4.0), "radius out of range"),
        (dict(resolution=(4, 4)), "too small"),
        (dict(resolution=(16, 15)), "even"),
        (dict(excluded_balls=[([0, 0, 1], 0.3), ([0, 0.1, 1], 0.3)], r_max=2.0), "overlapping"),
        (dict(excluded_balls=[([1, 0, 0], 0.3)], r_max=1.0), "not inside"),
    ],
)
def test_build_grid_rejects(kwargs, msg):
    with pytest.raises(DomainError, match=msg):
        build_grid(**kwargs)


def test_frame_is_orthonormal():
    dom = build_grid(2, "polar", (16, 16), r_max=1.0, center=[1, 2, 2])
    P, et, ep = dom.points, dom.e_theta, dom.e_phi
    assert np.allclose(np.linalg.norm(P, axis=-1), 1)
    assert np.allclose(np.sum(P * et, -1), 0) and np.allclose(np.sum(P * ep, -1), 0)
    assert np.allclose(np.sum(et * ep, -1), 0)
    assert np.allclose(geodesic_distance(P[:, 0], dom.center), dom.theta)


@pytest.mark.parametrize(
    "dom,area",
    [
        (build_grid(2, "latlon", (65, 64)), 4 * math.pi),
        (build_grid(2, "polar", (64, 64), r_max=1.0), 2 * math.pi * (1 - math.cos(1.0))),
        (build_grid(3, "radial", 128, r_max=math.pi), 2 * math.pi**2),
    ],
)
def test_quadrature_areas(dom, area):
    one = presets.constant(dom, 0.0)
    assert integrate(one.shifted(1.0)) == pytest.approx(area, rel=1e-8)


def test_excluded_ball_area():
    dom = build_grid(2, "latlon", (129, 128), excluded_balls=[([1, 0, 0], 0.5)])
    area = integrate(presets.constant(dom, 1.0))
    assert area == pytest.approx(4 * math.pi - 2 * math.pi * (1 - math.cos(0.5)), rel=2e-2)


def test_gradient_and_hessian_of_linear_function():
    a = np.array([0.3, -0.2, 0.5])
    dom = build_grid(2, "polar", (64, 64), r_max=2.0)
    rho = presets.linear(dom, a)
    # tangent gradient of <a, x> is a - <a, x> x, Hessian is -<a, x> g0
    ax = dom.points @ a
    ref = a - ax[..., None] * dom.points
    assert np.max(np.abs(gradient_ambient(rho) - ref)) < 1e-6
    H = hessian(rho).matrices
    assert np.max(np.abs(H - (-ax)[..., None, None] * np.eye(2))) < 1e-5


def test_field_file_round_trip(tmp_path):
    dom = build_grid(2, "polar", (16, 16), r_max=1.2)
    rho = presets.random_polynomial(dom, 3)
    hdr, csv = write_field(tmp_path / "f.json", rho)
    back = read_field(hdr)
    assert np.array_equal(back.values, rho.values)
    assert back.domain.r_max == dom.r_max


def test_field_shape_mismatch():
    dom = build_grid(2, "polar", (16, 16), r_max=1.0)
    with pytest.raises(ValueError):
        FieldGrid(dom, np.zeros((3, 3)))


def test_spline_evaluation_matches_generator():
    dom = build_grid(2, "latlon", (65, 64))
    rho = presets.random_polynomial(dom, 1)
    plain = FieldGrid(dom, rho.values)
    y = np.array([[0.6, 0.0, 0.8], [0.0, -1.0, 0.0]])
    v, g = plain.evaluate(y, with_gradient=True)
    v0, g0 = rho.evaluate(y, with_gradient=True)
    assert np.max(np.abs(v - v0)) < 1e-7
    assert np.max(np.abs(g - g0)) < 1e-5
