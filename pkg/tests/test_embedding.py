import csv
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from conformal_rigidity import presets
from conformal_rigidity.conformal_geometry import schouten_eigenvalues
from conformal_rigidity.embedding import (
    AdmissibilityError,
    cap_construction,
    duality_eigenvalues,
    embed,
    embed_ball_form,
    embeddedness,
    principal_curvatures,
    representation,
    translate,
    translate_field,
    translate_sample,
    write_sample_csv,
)
from conformal_rigidity.hyperbolic import minkowski_dot
from conformal_rigidity.sphere_core import FieldGrid, build_grid


def test_representation_identities_symbolic():
    assert oracles.representation_identities() == [0, 0, 0, 0]


def test_eta_is_normal_to_the_surface():
    # d phi must be orthogonal to eta for a genuine gradient field
    dom = build_grid(2, "latlon", (129, 128))
    h = embed(presets.random_polynomial(dom, 2).shifted(1.0))
    dt, _ = dom.d_theta(h.phi)
    dp, _ = dom.d_phi(h.phi)
    assert np.max(np.abs(minkowski_dot(dt, h.eta))) < 1e-6
    assert np.max(np.abs(minkowski_dot(dp, h.eta))) < 1e-6


@settings(max_examples=40, deadline=None)
@given(st.floats(-1, 1), st.floats(-0.8, 0.8), st.floats(-0.8, 0.8))
def test_representation_pointwise(rho, a, b):
    x = np.array([0.0, 0.0, 1.0])
    g = np.array([a, b, 0.0])
    phi, eta = representation(x, rho, g)
    assert minkowski_dot(phi, phi) == pytest.approx(-1, abs=1e-10)
    assert minkowski_dot(eta, eta) == pytest.approx(1, abs=1e-10)
    assert minkowski_dot(phi, eta) == pytest.approx(0, abs=1e-10)
    psi = phi - eta
    assert psi[0] == pytest.approx(math.exp(rho))


def test_admissibility_gate():
    dom = build_grid(2, "polar", (16, 16), r_max=1.0)
    with pytest.raises(AdmissibilityError) as exc:
        embed(presets.constant(dom, -0.5))
    assert exc.value.value > 0.5
    embed(presets.constant(dom, -0.5), strict=False)


def test_analytic_gradient_path_agrees():
    dom = build_grid(2, "polar", (64, 64), r_max=1.5)
    rho = presets.moebius(dom, 0.4).shifted(1.0)
    a = embed(rho)
    b = embed(rho, analytic=True)
    assert np.max(np.abs(a.phi - b.phi)) < 1e-6


@pytest.mark.parametrize("s", [0.0, 0.5, -0.7])
def test_moebius_factor_embeds_as_translated_sphere(s):
    t = 1.0
    dom = build_grid(2, "latlon", (65, 64))
    h = embed(presets.moebius(dom, s).shifted(t))
    k = principal_curvatures(h)
    assert np.max(np.abs(k - 1 / math.tanh(t))) < 1e-5
    lam = schouten_eigenvalues(presets.moebius(dom, s).shifted(t), estimate=False).values
    assert np.max(np.abs(lam - math.exp(-2 * t) / 2)) < 1e-5
    assert np.max(np.abs(duality_eigenvalues(k) - lam)) < 1e-5


def test_translation_sample_and_field_agree():
    dom = build_grid(2, "latlon", (65, 64))
    rho = presets.random_polynomial(dom, 4).shifted(1.0)
    s, a = 0.3, np.array([0.0, 0.6, 0.8])
    moved = translate_sample(embed(rho, analytic=True), s, a)
    field = translate_field(rho, s, a)
    # the moved sample is the embedding of the translated support function at
    # the moved Gauss-map points
    val = field.evaluate(moved.x)
    assert np.max(np.abs(val - moved.rho)) < 1e-9
    assert translate(rho, s, a).tag["kind"] == "translated"
    with pytest.raises(TypeError):
        translate(3.0, s, a)


def test_ball_form_rejects_bad_input():
    dom = build_grid(2, "polar", (16, 16), r_max=1.0)
    rho = presets.constant(dom)
    with pytest.raises(ValueError):
        embed_ball_form(rho)
    with pytest.raises(ValueError):
        embed_ball_form(rho, eps=-1.0)


def test_cap_construction_and_embeddedness():
    cap = cap_construction(1.0, math.pi / 3, 2, (32, 32))
    assert cap.meta["equidistant_defect"] < 1e-12
    assert cap.meta["level"] == pytest.approx(oracles.cap_level(1.0, math.pi / 3))
    assert embeddedness(cap)["embedded"]
    with pytest.raises(ValueError):
        cap_construction(1.0, 2.0)


def test_self_intersection_detected():
    # a large cubic harmonic makes the front fold over itself
    dom = build_grid(2, "latlon", (65, 64))
    cubic = lambda amp: FieldGrid.from_function(dom, lambda p: amp * np.real((p[..., 0] + 1j * p[..., 1]) ** 3))  # noqa: E731
    rep = embeddedness(embed(cubic(1.0), strict=False))
    assert not rep["embedded"] and rep["pair"] is not None
    assert embeddedness(embed(cubic(0.05).shifted(1.0)))["embedded"]


def test_sample_csv(tmp_path):
    dom = build_grid(2, "polar", (8, 8), r_max=1.0)
    h = embed(presets.constant(dom, 1.0))
    path = write_sample_csv(tmp_path / "s.csv", h)
    rows = list(csv.DictReader(path.open()))
    assert len(rows) == 64
    assert float(rows[0]["k1"]) == pytest.approx(1 / math.tanh(1.0), abs=1e-8)
