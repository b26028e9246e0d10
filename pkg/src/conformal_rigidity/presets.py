"""Analytic conformal factors used by scenarios and tests."""

from __future__ import annotations

import math

import numpy as np

from .sphere_core import FieldGrid, SphereDomain


def _axis(dom: SphereDomain, axis) -> np.ndarray:
    if axis is None:
        return dom.center.copy()
    a = np.asarray(axis, dtype=float)
    return a / np.linalg.norm(a)


def moebius_factor(y: np.ndarray, s: float, axis: np.ndarray) -> np.ndarray:
    """m_s(x) = -ln(cosh s - sinh s <x, a>); e^{2 m_s} g0 is a round metric."""
    return -np.log(math.cosh(s) - math.sinh(s) * (np.asarray(y) @ axis))


def constant(dom: SphereDomain, value: float = 0.0) -> FieldGrid:
    fn = lambda y: np.full(np.shape(y)[:-1], float(value))  # noqa: E731
    return FieldGrid.from_function(dom, fn, {"kind": "constant", "value": float(value)})


def linear(dom: SphereDomain, a, scale: float = 1.0) -> FieldGrid:
    """Restriction of the linear function scale * <a, x>."""
    a = np.asarray(a, dtype=float)
    fn = lambda y: scale * (np.asarray(y) @ a)  # noqa: E731
    return FieldGrid.from_function(dom, fn, {"kind": "linear", "a": a.tolist(), "scale": scale})


def moebius(dom: SphereDomain, s: float, axis=None, shift: float = 0.0) -> FieldGrid:
    """Conformal factor of the pullback of g0 by the boundary Moebius map of
    a hyperbolic translation of length s along `axis` (default: chart centre)."""
    a = _axis(dom, axis)
    fn = lambda y: moebius_factor(y, s, a) + shift  # noqa: E731
    tag = {"kind": "moebius", "s": float(s), "axis": a.tolist(), "shift": float(shift)}
    return FieldGrid.from_function(dom, fn, tag)


def bump(dom: SphereDomain, amplitude: float, width: float, center=None) -> FieldGrid:
    """amplitude * exp(-(1 - <x, c>) / width^2), smooth on the whole sphere."""
    c = _axis(dom, center)
    fn = lambda y: amplitude * np.exp(-(1.0 - np.asarray(y) @ c) / width**2)  # noqa: E731
    tag = {"kind": "bump", "amplitude": amplitude, "width": width, "center": c.tolist()}
    return FieldGrid.from_function(dom, fn, tag)


def random_polynomial(
    dom: SphereDomain, seed: int, degree: int = 3, amplitude: float = 0.15
) -> FieldGrid:
    """Random polynomial in the ambient coordinates, rescaled so that its
    largest coefficient sum is `amplitude` (keeps rho small and smooth)."""
    rng = np.random.default_rng(seed)
    dim = dom.n + 1
    exps = [
        e
        for e in np.ndindex(*(degree + 1,) * dim)
        if 0 < sum(e) <= degree
    ]
    exps = np.array(exps)
    coef = rng.normal(size=len(exps))
    coef *= amplitude / np.sum(np.abs(coef))

    def fn(y):
        y = np.asarray(y, dtype=float)
        terms = np.prod(y[..., None, :] ** exps, axis=-1)
        return terms @ coef

    tag = {"kind": "random_polynomial", "seed": int(seed), "degree": degree, "amplitude": amplitude}
    return FieldGrid.from_function(dom, fn, tag)


def round_cap_s(c: float) -> float:
    """Boost parameter whose Moebius factor on the hemisphere has constant
    boundary geodesic curvature c (the round disc of radius arccot c)."""
    return -math.atanh(c / math.sqrt(1.0 + c * c))


def round_cap_gauge(dom: SphereDomain, c: float) -> FieldGrid:
    """Round cap of radius arccot(c) realised on the hemisphere chart.

    rho|boundary = -ln(1 + c^2)/2, boundary geodesic curvature c.
    """
    if abs(dom.r_max - math.pi / 2) > 1e-12:
        raise ValueError("round-cap gauge lives on the hemisphere chart")
    fld = moebius(dom, round_cap_s(c))
    fld.tag = {"kind": "round_cap_gauge", "c": float(c), "s": round_cap_s(c)}
    return fld


def chart_radius(r: float, s: float) -> float:
    """Chart radius r_c such that (D(n, r_c), e^{2 m_s} g0) is isometric to D(n, r)."""
    ch, sh = math.cosh(s), math.sinh(s)
    c = (sh + ch * math.cos(r)) / (ch + sh * math.cos(r))
    return math.acos(max(-1.0, min(1.0, c)))


def image_radius(r_c: float, s: float) -> float:
    """Inverse of chart_radius: the round radius represented by chart radius r_c."""
    ch, sh = math.cosh(s), math.sinh(s)
    c = (ch * math.cos(r_c) - sh) / (ch - sh * math.cos(r_c))
    return math.acos(max(-1.0, min(1.0, c)))


PRESETS = {
    "constant": constant,
    "linear": linear,
    "moebius": moebius,
    "bump": bump,
    "random_polynomial": random_polynomial,
    "round_cap_gauge": round_cap_gauge,
}
