"""Two-dimensional theory: Schouten eigenvalues of surfaces, the Monge-Ampere
supersolution test, Gauss-Bonnet audit, boundary geodesic curvature and the
Toponogov checker (disc and closed modes)."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .conformal_geometry import (
    ConformalMetric,
    boundary_data,
    gate_tol,
    gaussian_curvature,
    schouten_eigenvalues,
    schouten_tensor,
)
from .elliptic_data import EllipticData, make_sigma_k, supersolution_check
from .report import SCALING_NOTE, CheckReport, Witness, combine
from .rigidity import fit_report
from .sphere_core import FieldGrid, SymTensorField, build_grid, hessian, gradient

MA_NOTE = "Monge-Ampere threshold uses f = 2 sqrt(l1 l2) so that the round metric gives f = 1 (raw determinant bound 1/4)"
GEODESIC_FACTOR = 5.0  # |k| <= 5 * grid spacing along a declared geodesic


@dataclass(eq=False)
class Surface2DScenario:
    metric: ConformalMetric
    c: float = 0.0
    geodesic: list | None = None  # grid indices (i, j) of a declared closed geodesic
    tol: float = 1e-3

    def __post_init__(self) -> None:
        if not isinstance(self.metric, ConformalMetric):
            self.metric = ConformalMetric(self.metric)
        if self.metric.n != 2:
            raise ValueError("surface scenarios are two-dimensional")
        if not self.c >= 0:
            raise ValueError("boundary constant c must be >= 0")


def _metric(g) -> ConformalMetric:
    return g if isinstance(g, ConformalMetric) else ConformalMetric(g)


def schouten_2d(g, order: int = 4) -> tuple[SymTensorField, np.ndarray]:
    """Schouten tensor of a surface metric and its eigenvalue pair (l1, l2)."""
    g = _metric(g)
    if g.n != 2:
        raise ValueError("schouten_2d needs n = 2")
    return schouten_tensor(g, order), schouten_eigenvalues(g, order, estimate=False).values


def euler_characteristic(dom) -> int:
    full = 2 if dom.full else 1
    return full - len(dom.excluded_balls)


def monge_ampere_check(g, tol: float | None = None, order: int = 4) -> CheckReport:
    """f = 2 sqrt(l1 l2) >= 1 on Gamma_2, with the raw determinant
    e^{-4 rho} det(Hess rho - d rho (x) d rho - (1 - |d rho|^2) g0 / 2) reported too."""
    t0 = time.perf_counter()
    g = _metric(g)
    if g.n != 2:
        raise ValueError("monge_ampere_check needs n = 2")
    dom = g.domain
    lam = schouten_eigenvalues(g, order)
    tol = gate_tol(lam.estimate) if tol is None else tol
    grad = gradient(g.rho, order)
    H = hessian(g.rho, order).matrices
    G = np.sum(grad * grad, axis=-1)
    M = H - grad[..., :, None] * grad[..., None, :] - 0.5 * (1.0 - G)[..., None, None] * np.eye(2)
    raw = np.exp(-4 * g.rho.values) * np.linalg.det(M)
    vals = lam.values
    inside = np.all(vals > 0, axis=-1)
    f = np.where(inside, 2.0 * np.sqrt(np.clip(vals[..., 0] * vals[..., 1], 0, None)), -np.inf)
    if not dom.is_radial:
        f = np.where(dom.mask, f, np.inf)
        raw_v = raw[dom.mask]
    else:
        raw_v = raw
    j = np.unravel_index(int(np.argmin(f)), f.shape)
    passed = bool(f[j] >= 1.0 - tol)
    wit = None
    if not passed:
        where = "boundary" if (not dom.full and j[0] == dom.shape[0] - 1) else "interior"
        wit = Witness(
            tuple(int(i) for i in j),
            tuple(float(v) for v in dom.points[j]),
            where,
            {"f": float(f[j]), "in_cone": bool(inside[j]), "lambda": vals[j].tolist()},
        )
    fin = f[np.isfinite(f)]
    return CheckReport(
        "monge_ampere",
        passed,
        {
            "min_f": float(f[j]),
            "max_f": float(np.max(fin)) if fin.size else None,
            "min_raw_determinant": float(np.min(raw_v)),
            "max_raw_determinant": float(np.max(raw_v)),
            "cone_violations": int(np.sum(~inside)),
            "tol": tol,
        },
        wit,
        {"normalization": MA_NOTE, "truncation_estimate": lam.estimate, "scaling": SCALING_NOTE},
        wall_time=time.perf_counter() - t0,
    )


def boundary_geodesic_data(sc: Surface2DScenario | ConformalMetric | FieldGrid, component: str = "boundary") -> dict:
    """Geodesic curvature k = e^{-rho}(k0 - d rho/d nu) and arclength element
    e^{rho} ds0 along a boundary ring; k0 is the round curvature of the ring
    (0 on the equator, where k = -e^{-rho} d rho/d nu)."""
    g = sc.metric if isinstance(sc, Surface2DScenario) else _metric(sc)
    if g.n != 2:
        raise ValueError("boundary geodesic data is two-dimensional")
    bd = boundary_data(g, component)
    rho = np.atleast_1d(bd.rho)
    k = np.atleast_1d(bd.H)
    ds0 = 2 * math.pi * math.sin(bd.radius) / rho.size
    ds = np.exp(rho) * ds0
    return {
        "component": component,
        "points": np.atleast_2d(bd.points),
        "k": k,
        "ds": ds,
        "dnu": np.atleast_1d(bd.dnu),
        "length": float(np.sum(ds)),
        "min_k": float(np.min(k)),
        "max_k": float(np.max(k)),
        "total_k": float(np.sum(k * ds)),
    }


def gauss_bonnet_audit(sc: Surface2DScenario | ConformalMetric, tol: float = 1e-4) -> CheckReport:
    """|2 pi chi - (int K dA + int k ds)| <= tol."""
    t0 = time.perf_counter()
    g = sc.metric if isinstance(sc, Surface2DScenario) else _metric(sc)
    dom = g.domain
    K = FieldGrid(dom, gaussian_curvature(g))
    area_term = float(np.sum(dom.area_weights() * dom.mask * K.values * np.exp(2 * g.rho.values)))
    ring_terms = {}
    for comp in dom.boundary_names:
        ring_terms[comp] = boundary_geodesic_data(g, comp)["total_k"]
    chi = euler_characteristic(dom)
    total = area_term + sum(ring_terms.values())
    resid = abs(2 * math.pi * chi - total)
    passed = resid <= tol
    wit = None if passed else Witness(None, None, "interior", {"residual": resid})
    return CheckReport(
        "gauss_bonnet",
        passed,
        {"chi": chi, "integral_K": area_term, "integral_k": ring_terms, "residual": resid, "tol": tol},
        wit,
        {"resolution": list(dom.resolution), "chart": dom.chart},
        wall_time=time.perf_counter() - t0,
    )


def _disc_mode(g: ConformalMetric, c: float, d: EllipticData, tol: float, label: str = "") -> CheckReport:
    lam = schouten_eigenvalues(g)
    parts = [supersolution_check(d, lam)]
    bgd = boundary_geodesic_data(g)
    j = int(np.argmin(bgd["k"]))
    ok = bgd["min_k"] >= c - tol
    parts.append(
        CheckReport(
            "boundary_curvature",
            ok,
            {"min_k": bgd["min_k"], "max_k": bgd["max_k"], "c": c, "tol": tol},
            None if ok else Witness((g.domain.shape[0] - 1, j), tuple(bgd["points"][j]), "boundary", {"k": float(bgd["k"][j])}),
        )
    )
    L_target = 2 * math.pi / math.sqrt(1 + c * c)
    ok = abs(bgd["length"] - L_target) <= tol
    parts.append(
        CheckReport(
            "boundary_length",
            ok,
            {"length": bgd["length"], "target": L_target, "tol": tol},
            None if ok else Witness(None, None, "boundary", {"length": bgd["length"]}),
        )
    )
    r = math.atan2(1.0, c)  # arccot c
    fit = fit_report(g, r, r_tol=tol)
    fit.name = "round_disc_fit"
    parts.append(fit)
    name = "toponogov_disc" + (f"[{label}]" if label else "")
    rep = combine(name, parts, c=c, target_radius=r, normalization=MA_NOTE, scaling=SCALING_NOTE)
    rep.metrics["recovered_radius"] = fit.metrics.get("radius")
    return rep


def _ring_of(geodesic, dom) -> int:
    """Validate a declared closed geodesic (a full latitude ring) and return its row."""
    idx = np.asarray(geodesic, dtype=int)
    if idx.ndim != 2 or idx.shape[1] != 2 or len(idx) < 3:
        raise ValueError("declared curve must be a list of (i, j) grid indices")
    nt, nph = dom.shape
    pairs = {tuple(p) for p in idx.tolist()}
    if len(pairs) != len(idx):
        raise ValueError("declared curve is not simple (repeated grid points)")
    rows = {p[0] for p in pairs}
    if len(rows) != 1:
        raise ValueError("declared curve is not closed along a grid ring (only latitude rings are supported)")
    i = rows.pop()
    if not 0 < i < nt - 1 or {p[1] for p in pairs} != set(range(nph)):
        raise ValueError("declared curve is not a closed simple grid ring")
    return i


def split_along_ring(rho: FieldGrid, i: int) -> tuple[FieldGrid, FieldGrid]:
    """Cut a latitude-longitude field along ring i into two polar discs."""
    dom = rho.domain
    th = dom.theta[i]
    nph = dom.shape[1]
    north = build_grid(2, "polar", (i + 1, nph), r_max=th, center=dom.center, frame=(dom.u, dom.v))
    south = build_grid(2, "polar", (dom.shape[0] - i, nph), r_max=math.pi - th, center=-dom.center, frame=(dom.u, dom.v))
    gen = rho.generator
    a = FieldGrid(north, rho.values[: i + 1], gen, dict(rho.tag))
    b = FieldGrid(south, rho.values[i:][::-1], gen, dict(rho.tag))
    return a, b


def toponogov_check(sc: Surface2DScenario, d: EllipticData | None = None) -> CheckReport:
    """Disc mode (boundary k >= c, L = 2 pi / sqrt(1 + c^2), conclusion: round
    disc of radius arccot c) or closed mode (declared closed geodesic of length
    2 pi; each half must be a round hemisphere)."""
    t0 = time.perf_counter()
    g = sc.metric
    d = d or make_sigma_k(2, 2)
    dom = g.domain
    if sc.geodesic is None:
        if dom.full:
            raise ValueError("closed surfaces need a declared geodesic")
        rep = _disc_mode(g, sc.c, d, sc.tol)
        rep.wall_time = time.perf_counter() - t0
        return rep
    if dom.chart != "latlon":
        raise ValueError("closed mode needs the latitude-longitude chart")
    i = _ring_of(sc.geodesic, dom)
    north, south = split_along_ring(g.rho, i)
    parts = []
    bgd = boundary_geodesic_data(ConformalMetric(north))
    kmax = float(np.max(np.abs(bgd["k"])))
    gtol = GEODESIC_FACTOR * dom.spacing
    ok = kmax <= gtol
    j = int(np.argmax(np.abs(bgd["k"])))
    parts.append(
        CheckReport(
            "declared_geodesic",
            ok,
            {"ring": i, "max_abs_k": kmax, "tol": gtol},
            None if ok else Witness((i, j), tuple(bgd["points"][j]), "boundary", {"k": float(bgd["k"][j])}),
        )
    )
    ok = abs(bgd["length"] - 2 * math.pi) <= sc.tol
    parts.append(
        CheckReport(
            "geodesic_length",
            ok,
            {"length": bgd["length"], "target": 2 * math.pi, "tol": sc.tol},
            None if ok else Witness(None, None, "boundary", {"length": bgd["length"]}),
        )
    )
    # the ring is a geodesic, so each half is a disc with c = 0
    parts.append(_disc_mode(ConformalMetric(north), 0.0, d, max(sc.tol, gtol), "north"))
    parts.append(_disc_mode(ConformalMetric(south), 0.0, d, max(sc.tol, gtol), "south"))
    rep = combine("toponogov_closed", parts, ring=i, normalization=MA_NOTE, scaling=SCALING_NOTE)
    rep.metrics["conclusion"] = "round sphere" if rep.passed else None
    rep.wall_time = time.perf_counter() - t0
    return rep
