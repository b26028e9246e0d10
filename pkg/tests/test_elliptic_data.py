import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from conformal_rigidity import presets
from conformal_rigidity.conformal_geometry import SchoutenEigenvalues, schouten_eigenvalues
from conformal_rigidity.elliptic_data import (
    concavity_bound_check,
    elementary_symmetric,
    gaarding_cone,
    make_min,
    make_sigma_k,
    make_user,
    make_weighted_sum,
    parse_elliptic_spec,
    supersolution_check,
    validate_axioms,
)
from conformal_rigidity.sphere_core import build_grid

vec = st.lists(st.floats(-5, 5, allow_nan=False), min_size=2, max_size=5)


@settings(max_examples=80, deadline=None)
@given(vec)
def test_elementary_symmetric_matches_brute_force(x):
    n = len(x)
    e = elementary_symmetric(np.array(x), n)
    for k in range(1, n + 1):
        assert float(e[k]) == pytest.approx(oracles.sigma_brute(x, k), abs=1e-9 * (1 + 10**k))


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(0.01, 10), min_size=3, max_size=3))
def test_positive_cone_is_inside_every_garding_cone(x):
    for k in (1, 2, 3):
        assert gaarding_cone(np.array(x), k)


def test_parse_specs():
    assert parse_elliptic_spec("sigma_k:k=2", 3).describe() == "sigma_k:k=2"
    assert parse_elliptic_spec("weighted_sum:2=1", 3).family == "weighted_sum"
    assert parse_elliptic_spec("min:ks=1,2", 3).family == "min_normalized"
    for bad in ("sigma_k:j=2", "cubic:k=1"):
        with pytest.raises(ValueError):
            parse_elliptic_spec(bad, 2)


def test_file_spec(tmp_path):
    p = tmp_path / "f.json"
    p.write_text(json.dumps({"f": "x1 + x2", "cone": "x1 + x2 > 0", "concave": True}))
    d = parse_elliptic_spec("file:f.json", 2, tmp_path)
    assert d.family == "user"
    (tmp_path / "g.json").write_text(json.dumps({"f": "x1"}))
    with pytest.raises(ValueError):
        parse_elliptic_spec("file:g.json", 2, tmp_path)


def test_min_family_validates():
    rep = validate_axioms(make_min(3, [1, 2]), samples=2000)
    assert rep.passed


def test_weighted_sum_of_two_orders_fails_boundary_vanishing():
    rep = validate_axioms(make_weighted_sum(3, {1: 0.5, 2: 0.5}), samples=2000)
    assert not rep.passed
    assert "boundary_vanishing" in rep.metrics["failed_gates"]


def test_user_data_validation():
    good = make_user(2, "sigma1", "sigma1 > 0", concave=True)
    with pytest.raises(ValueError):
        good.require_usable()
    assert validate_axioms(good, samples=2000).passed
    good.require_usable()
    # not homogeneous of degree one
    bad = make_user(2, "sigma1**2/2", "sigma1 > 0")
    rep = validate_axioms(bad, samples=2000)
    assert not rep.passed and "homogeneity" in rep.metrics["failed_gates"]
    # wrong normalisation
    rep = validate_axioms(make_user(2, "3*sigma1", "sigma1 > 0"), samples=500)
    assert "normalization" in rep.metrics["failed_gates"]
    with pytest.raises(ValueError):
        make_user(2, "x1 +", "x1 > 0")


def test_supersolution_witness_location():
    d = make_sigma_k(2, 2)
    dom = build_grid(2, "polar", (32, 32), r_max=1.0)
    ok = supersolution_check(d, schouten_eigenvalues(presets.moebius(dom, 0.5)))
    assert ok.passed and ok.metrics["min_f"] == pytest.approx(1, abs=1e-6)
    rep = supersolution_check(d, schouten_eigenvalues(presets.bump(dom, 0.3, 0.5)))
    assert not rep.passed
    assert rep.witness.where == "interior" and rep.witness.index[0] < 31
    # eigenvalues that dip only on the last row put the witness on the boundary
    lam = schouten_eigenvalues(presets.constant(dom, 0.0))
    vals = lam.values.copy()
    vals[-1, 5] *= 0.8
    rep = supersolution_check(d, SchoutenEigenvalues(dom, vals))
    assert not rep.passed and rep.witness.where == "boundary" and rep.witness.index == (31, 5)


def test_concavity_requires_concave_data():
    with pytest.raises(ValueError):
        concavity_bound_check(make_user(2, "sigma1", "sigma1 > 0"), np.ones((3, 2)))
    rep = concavity_bound_check(make_sigma_k(3, 3), np.array([[1.0, 2.0, 3.0]]))
    assert rep.passed and rep.metrics["max_excess"] <= 0
    assert make_sigma_k(3, 3).f(np.ones(3)) == pytest.approx(2.0)
    assert math.isnan(float(make_sigma_k(2, 2).f(np.array([-1.0, -1.0]))))
