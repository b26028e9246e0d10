"""Acceptance criteria, one test per criterion, each with its runtime budget.

conftest.py prints a "criterion N: PASS/FAIL" line per criterion at the end
of the run.
"""

import json
import math
import time
from math import comb

import numpy as np
import pytest

import oracles
from conformal_rigidity import cli, presets
from conformal_rigidity.conformal_geometry import ConformalMetric, schouten_eigenvalues
from conformal_rigidity.elliptic_data import (
    concavity_bound_check,
    make_sigma_k,
    sample_cone,
    validate_axioms,
)
from conformal_rigidity.embedding import (
    cap_construction,
    duality_eigenvalues,
    embed,
    embed_ball_form,
    geodesic_sphere,
    principal_curvatures,
    recover,
    translate_sample,
)
from conformal_rigidity.hyperbolic import light_point, minkowski_dot
from conformal_rigidity.hypersurface_data import (
    boundary_angle,
    boundary_angle_check,
    build_cap,
    duality_bridge,
    equidistant_normal,
)
from conformal_rigidity.rigidity import RigidityScenario, check_hypotheses, claim_A_test, fit_round_orbit, sliding_first_contact
from conformal_rigidity.sphere_core import FieldGrid, build_grid, write_field
from conformal_rigidity.surface2d import Surface2DScenario, gauss_bonnet_audit, monge_ampere_check, toponogov_check


def _random_fields(dom, seeds, shift=0.5):
    return [presets.random_polynomial(dom, s).shifted(shift) for s in seeds]


def _duality_defect(rho):
    lam = schouten_eigenvalues(rho, estimate=False).values
    k = principal_curvatures(embed(rho))
    return float(np.max(np.abs(np.sort(lam, -1) - np.sort(duality_eigenvalues(k), -1))))


def test_criterion_01_duality_suite():
    t0 = time.perf_counter()
    for seed in range(10):
        defects = []
        for N in (64, 128):
            dom = build_grid(2, "latlon", (N + 1, N))
            rho = presets.random_polynomial(dom, seed).shifted(0.5)
            lam = schouten_eigenvalues(rho, estimate=False).values
            assert np.max(lam) < 0.5 - 1e-6  # admissible
            defects.append(_duality_defect(rho))
        assert defects[1] <= 5e-3, (seed, defects)
        order = math.log2(defects[0] / defects[1])
        assert order >= 1.7, (seed, defects, order)
    assert time.perf_counter() - t0 <= 60


def test_criterion_02_frame_invariants():
    t0 = time.perf_counter()
    doms = [
        build_grid(2, "latlon", (65, 64)),
        build_grid(2, "polar", (48, 48), r_max=math.pi / 2),
        build_grid(3, "radial", 64, r_max=math.pi / 3),
    ]
    for dom in doms:
        fields = _random_fields(dom, range(3)) + [presets.constant(dom, 1.0), presets.moebius(dom, 0.3).shifted(1.0)]
        for rho in fields:
            h = embed(rho)
            d = h.invariant_defects()
            for key in ("phi_phi", "eta_eta", "phi_eta", "psi_psi", "gauss_map"):
                assert d[key] <= 1e-9, (dom.chart, key, d[key])
            back, defect = recover(h)
            assert defect <= 1e-9
            assert np.max(np.abs(back.values - rho.values)) <= 1e-12
    assert time.perf_counter() - t0 <= 5


def test_criterion_03_cross_model_agreement():
    t0 = time.perf_counter()
    dom = build_grid(2, "latlon", (65, 64))
    for rho in _random_fields(dom, range(5), shift=0.0):
        for t in (0.5, 1.0, 2.0):
            direct = embed_ball_form(rho, t=t)
            via = embed(rho.shifted(t), strict=False).ball
            assert np.max(np.abs(direct - via)) <= 1e-9
        ident = embed_ball_form(rho, eps=0.0)
        assert np.max(np.abs(ident - dom.points)) <= 1e-15
    assert time.perf_counter() - t0 <= 10


@pytest.mark.parametrize("t", [0.5, 1.0, 2.0])
def test_criterion_04_geodesic_sphere_closed_forms(t):
    t0 = time.perf_counter()
    ref = oracles.geodesic_sphere_closed_form(t)
    h = geodesic_sphere(t, 2, (65, 64))
    x = h.x
    assert np.max(np.abs(h.phi[..., 0] - ref["phi0"])) <= 1e-9
    assert np.max(np.abs(h.phi[..., 1:] - ref["phi_r"] * x)) <= 1e-9
    k = principal_curvatures(h)
    assert np.max(np.abs(k - ref["k"])) <= 1e-9
    assert np.max(np.abs(duality_eigenvalues(k) - ref["lambda"])) <= 1e-9
    lam = schouten_eigenvalues(presets.constant(h.domain, t), estimate=False).values
    assert np.max(np.abs(lam - ref["lambda"])) <= 1e-9
    assert np.max(np.abs(minkowski_dot(h.phi, light_point(x)) - ref["horo"])) <= 1e-9
    assert np.max(np.abs(np.linalg.norm(h.ball, axis=-1) - ref["ball"])) <= 1e-9
    # the same in S^3 through the rotationally symmetric chart
    h3 = geodesic_sphere(t, 3, 64)
    assert np.max(np.abs(principal_curvatures(h3) - ref["k"])) <= 1e-9
    assert time.perf_counter() - t0 <= 5


@pytest.mark.parametrize("n,k", [(2, 1), (2, 2), (3, 1), (3, 2), (3, 3)])
def test_criterion_05_elliptic_data_axioms(n, k):
    t0 = time.perf_counter()
    d = make_sigma_k(n, k)
    rep = validate_axioms(d, samples=10_000, seed=7, tol=1e-8)
    assert rep.passed, rep.metrics["failed_gates"]
    worst = {name: v for name, v in rep.metrics["worst_violation"].items() if v is not None}
    assert max(worst.values()) <= 1e-8
    norm = rep.sub("normalization").metrics
    assert norm["gradient_error"] <= 1e-6
    # brute-force sigma_k oracle for the normalised family
    X = sample_cone(d, 200, np.random.default_rng(3))
    ref = np.array([2 * (oracles.sigma_brute(x, k) / comb(n, k)) ** (1 / k) for x in X])
    assert np.max(np.abs(d.f(X) - ref) / ref) <= 1e-12
    assert time.perf_counter() - t0 <= 30


def test_criterion_06_concavity_bound():
    t0 = time.perf_counter()
    rng = np.random.default_rng(11)
    d2 = make_sigma_k(3, 2)
    X = sample_cone(d2, 10_000, rng)
    rep = concavity_bound_check(d2, X, tol=1e-10)
    assert rep.passed, rep.witness
    # independent bound: R / [n(n-1)] with R = 2(n-1) sum(lambda)
    n = 3
    R = 2 * (n - 1) * X.sum(-1)
    assert np.all(d2.f(X) <= R / (n * (n - 1)) + 1e-10)
    d1 = make_sigma_k(3, 1)
    X1 = sample_cone(d1, 10_000, rng)
    rep1 = concavity_bound_check(d1, X1, tol=1e-10)
    assert rep1.passed
    assert rep1.metrics["max_abs_gap"] <= 1e-12
    assert time.perf_counter() - t0 <= 10


def test_criterion_07_rigidity_round_trip():
    t0 = time.perf_counter()
    d = make_sigma_k(2, 2)
    for r in (math.pi / 4, math.pi / 2):
        for s in (0.0, 0.3):
            rc = presets.chart_radius(r, s)
            dom = build_grid(2, "polar", (64, 64), r_max=rc)
            g = ConformalMetric(presets.moebius(dom, s))
            rep = check_hypotheses(RigidityScenario(g, d, {"boundary": r}, tol={"supersolution": 5e-3, "mean_curvature": 5e-3, "isometry": 1e-3}))
            assert rep.passed, (r, s, rep.metrics["failed_gates"])
            assert abs(rep.metrics["min_f"] - 1) <= 5e-3
            H = rep.sub("mean_curvature[boundary]").metrics
            assert max(abs(H["min_H"] - H["cot_r"]), abs(H["max_H"] - H["cot_r"])) <= 5e-3
            fit = fit_round_orbit(g, r)
            assert abs(fit.s - s) <= 1e-4 and fit.residual <= 1e-6
            assert abs(fit.radius - r) <= 1e-3
    # negative controls
    dom = build_grid(2, "polar", (64, 64), r_max=math.pi / 2)
    dil = check_hypotheses(RigidityScenario(ConformalMetric(presets.constant(dom, 0.2)), d, {"boundary": math.pi / 2}))
    assert not dil.passed
    assert dil.metrics["failed_gates"][0] == "supersolution"
    assert dil.witness is not None and dil.witness.index is not None
    assert abs(dil.metrics["min_f"] - math.exp(-0.4)) <= 1e-9
    bump = presets.bump(dom, 0.3, 0.5)
    lam = schouten_eigenvalues(bump, estimate=False).values
    assert np.min(d.f(np.where(d.cone(lam)[..., None], lam, 1.0))) < 1 - 1e-2 or not np.all(d.cone(lam))
    neg = check_hypotheses(RigidityScenario(ConformalMetric(bump), d, {"boundary": math.pi / 2}))
    assert not neg.passed
    assert neg.metrics["failed_gates"][0] == "supersolution"
    assert neg.witness is not None and neg.witness.where == "interior"
    assert time.perf_counter() - t0 <= 120


def test_criterion_08_sliding_contact():
    t0 = time.perf_counter()
    t = 1.0
    dom = build_grid(2, "polar", (48, 48), r_max=math.pi / 2)
    sigma = embed(presets.constant(dom, 0.0).shifted(t))
    cap = cap_construction(t, math.pi / 2, 2, (48, 48))
    res = sliding_first_contact(sigma, cap)
    assert res.classification == "boundary"
    assert abs(res.s0) <= 2 * res.tol
    for s_star in (0.4, -0.4):
        moved = translate_sample(sigma, s_star, dom.center)
        res2 = sliding_first_contact(moved, cap)
        assert res2.s0 is not None
        assert abs(res2.s0 - s_star) <= res2.tol
    assert time.perf_counter() - t0 <= 60


def test_criterion_09_claim_A_geometry():
    t0 = time.perf_counter()
    dom = build_grid(2, "polar", (64, 64), r_max=math.pi / 2)
    for t in (0.5, 1.0, 2.0):
        sigma = embed(presets.constant(dom, t))
        rep = claim_A_test(sigma, t, tol=1e-8)
        assert rep.passed
        assert abs(rep.sub("outside_cylinder").metrics["min_excess"]) <= 1e-8
        assert rep.sub("orthogonal_where_flat").metrics["max_eta_dot_NP"] <= 1e-8
    t = 1.0
    steep = FieldGrid.from_function(dom, lambda y: t + 0.2 * y[..., 2] * (1 + y[..., 0]) / 2)
    rep = claim_A_test(embed(steep, strict=False), t, tol=1e-8)
    strict = rep.sub("strict_exterior_where_steep").metrics
    assert strict["steep_points"] > 0
    assert strict["min_excess"] > 0
    assert rep.passed
    assert time.perf_counter() - t0 <= 5


def test_criterion_10_surface_suite():
    t0 = time.perf_counter()
    doms = [
        build_grid(2, "latlon", (129, 128)),
        build_grid(2, "polar", (128, 128), r_max=math.pi / 2),
        build_grid(2, "polar", (128, 128), r_max=math.pi / 3),
        build_grid(2, "polar", (128, 128), r_max=2.0),
    ]
    for dom in doms:
        for rho in (presets.constant(dom, 0.0), presets.moebius(dom, 0.3, axis=[0.6, 0, 0.8])):
            rep = gauss_bonnet_audit(ConformalMetric(rho), tol=1e-4)
            assert rep.passed and rep.metrics["residual"] <= 1e-4, (dom.chart, dom.r_max)
    hemi = build_grid(2, "polar", (128, 128), r_max=math.pi / 2)
    d = make_sigma_k(2, 2)
    for c in (0.0, 1.0):
        rho = presets.round_cap_gauge(hemi, c)
        rep = toponogov_check(Surface2DScenario(ConformalMetric(rho), c), d)
        assert rep.passed, rep.metrics
        assert abs(rep.metrics["recovered_radius"] - math.atan2(1.0, c)) <= 1e-3
    for rho in (presets.moebius(hemi, 0.3), presets.moebius(hemi, -0.5, axis=[1, 0, 1])):
        rep = monge_ampere_check(ConformalMetric(rho), tol=5e-3)
        assert rep.passed
        assert abs(rep.metrics["min_f"] - 1) <= 5e-3 and abs(rep.metrics["max_f"] - 1) <= 5e-3
    bad = monge_ampere_check(ConformalMetric(presets.constant(hemi, 0.2)), tol=5e-3)
    assert not bad.passed and bad.witness is not None
    assert time.perf_counter() - t0 <= 60


def test_criterion_11_cap_suite():
    t0 = time.perf_counter()
    kappa0 = 1.0 / math.tanh(0.8)
    for r in (0.0, 0.5, 1.0):
        model, sample = build_cap(kappa0, r)
        assert abs(model.alpha - math.acos(-r / math.sqrt(1 + r * r))) <= 1e-10
        assert model.defects["angle"] <= 1e-10
        assert model.defects["equidistant"] <= 1e-10
        rep = boundary_angle_check(sample, r, model.normal)
        assert rep.passed
        assert abs(rep.sub("boundary_angle[0]").metrics["max_eta_dot_N"] - rep.sub("boundary_angle[0]").metrics["bound"]) <= 1e-10
        # tilt eta towards the equidistant normal: the angle gate must fail
        ring = sample.boundary_ring()
        phi, eta = ring["phi"], ring["eta"]
        nu = equidistant_normal(phi, model.normal)
        tilted = eta + 0.05 * nu
        tilted = tilted + minkowski_dot(tilted, phi)[..., None] * phi
        tilted /= np.sqrt(minkowski_dot(tilted, tilted))[..., None]
        bad = boundary_angle_check({"phi": phi, "eta": tilted}, r, model.normal)
        assert not bad.passed and bad.witness is not None
        assert math.cos(boundary_angle(r)) == pytest.approx(-r / math.sqrt(1 + r * r), abs=1e-15)
    for t in (0.5, 1.0, 2.0):
        br = duality_bridge(t)
        assert br["k_error"] <= 1e-9 and br["lambda_error"] <= 1e-9 and br["formula_error"] <= 1e-12
    assert time.perf_counter() - t0 <= 30


EXPECTED_EXIT = {
    "round_hemisphere": 0,
    "dilated_metric": 1,
    "moebius_cap": 0,
    "radial_s3": 0,
    "toponogov_sphere": 0,
    "toponogov_disc_c1": 0,
}


def _strip_timing(obj):
    if isinstance(obj, dict):
        return {k: _strip_timing(v) for k, v in obj.items() if k != "wall_time"}
    if isinstance(obj, list):
        return [_strip_timing(v) for v in obj]
    return obj


def test_criterion_12_cli_determinism(tmp_path):
    t0 = time.perf_counter()
    for name, code in EXPECTED_EXIT.items():
        outs = []
        for run in range(2):
            out = tmp_path / f"{name}_{run}.json"
            assert cli.main(["check", name, "--out", str(out)]) == code, name
            outs.append(json.dumps(_strip_timing(json.loads(out.read_text())), sort_keys=True, indent=2).encode())
        assert outs[0] == outs[1], name
    bad = tmp_path / "bad.json"
    bad.write_text('{"version": 1,\n "name": "x",\n')
    assert cli.main(["check", str(bad)]) == 2
    assert cli.main(["check", str(tmp_path / "missing.json")]) == 2
    dom = build_grid(2, "polar", (16, 16), r_max=1.0)
    hdr, _ = write_field(tmp_path / "steep", presets.constant(dom, -0.5))
    assert cli.main(["embed", str(hdr), "--out", str(tmp_path / "e.csv")]) == 3
    assert cli.main(["embed", str(hdr), "--t", "1.0", "--out", str(tmp_path / "e.csv")]) == 0
    assert time.perf_counter() - t0 <= 10
