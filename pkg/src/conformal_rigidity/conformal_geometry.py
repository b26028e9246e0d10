"""Schouten tensor, eigenvalues, scalar curvature and boundary quantities of
conformal metrics g = e^{2 rho} g0 on sphere domains."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .report import CheckReport, NumericalError, Witness, SCALING_NOTE
from .sphere_core import FieldGrid, SphereDomain, SymTensorField, gradient, hessian, normal_derivative


def cot(r: float) -> float:
    """cot with the equator handled exactly."""
    if abs(r - math.pi / 2) < 1e-15:
        return 0.0
    return math.cos(r) / math.sin(r)


def gate_tol(estimate: float, floor: float = 1e-8) -> float:
    """Tolerance for gating discretised quantities: 10x the truncation estimate."""
    return max(floor, 10.0 * float(estimate))


@dataclass(eq=False)
class ConformalMetric:
    rho: FieldGrid

    def __post_init__(self) -> None:
        if not np.all(np.isfinite(self.rho.values)):
            raise NumericalError("conformal factor must be finite")

    @property
    def domain(self) -> SphereDomain:
        return self.rho.domain

    @property
    def n(self) -> int:
        return self.rho.domain.n

    def dilate(self, t: float) -> "ConformalMetric":
        """g_t = e^{2t} g."""
        return ConformalMetric(self.rho.shifted(t))


@dataclass(eq=False)
class SchoutenEigenvalues:
    domain: SphereDomain
    values: np.ndarray  # (*grid, n), ascending
    estimate: float = 0.0  # truncation estimate (order-4 vs order-6 stencils)

    def scaled(self, t: float) -> "SchoutenEigenvalues":
        """Eigenvalues of e^{2t} g."""
        return SchoutenEigenvalues(self.domain, math.exp(-2 * t) * self.values, math.exp(-2 * t) * self.estimate)


@dataclass(eq=False)
class BoundaryData:
    component: str
    points: np.ndarray
    rho: np.ndarray
    dnu: np.ndarray  # d rho / d nu, nu inward round unit normal
    H: np.ndarray  # mean (geodesic for n = 2) curvature of the ring in g
    H0: float  # same for g0
    radius: float
    umbilicity_defect: float


def _as_metric(g) -> ConformalMetric:
    return g if isinstance(g, ConformalMetric) else ConformalMetric(g)


def schouten_tensor(g, order: int = 4) -> SymTensorField:
    """Sch_g = g0/2 + d rho (x) d rho - Hess rho - |d rho|^2 g0 / 2 (frame of g0)."""
    g = _as_metric(g)
    n = g.n
    grad = gradient(g.rho, order)
    H = hessian(g.rho, order).matrices
    G = np.sum(grad * grad, axis=-1)
    eye = np.eye(n)
    S = 0.5 * eye + grad[..., :, None] * grad[..., None, :] - H - 0.5 * G[..., None, None] * eye
    S = 0.5 * (S + np.swapaxes(S, -1, -2))
    return SymTensorField(g.domain, S)


def _eigs(g: ConformalMetric, order: int) -> np.ndarray:
    S = schouten_tensor(g, order).matrices
    if not np.all(np.isfinite(S)):
        raise NumericalError("non-finite Schouten tensor")
    lam = np.linalg.eigvalsh(S)
    return np.exp(-2 * g.rho.values)[..., None] * lam


def schouten_eigenvalues(g, order: int = 4, estimate: bool = True) -> SchoutenEigenvalues:
    """Sorted eigenvalues of g^{-1} Sch_g."""
    g = _as_metric(g)
    lam = _eigs(g, order)
    est = 0.0
    if estimate:
        hi = 6 if order < 6 else 4
        est = float(np.max(np.abs(lam - _eigs(g, hi))))
    return SchoutenEigenvalues(g.domain, lam, est)


def scalar_curvature(g, eig: SchoutenEigenvalues | None = None) -> FieldGrid:
    """R = 2(n-1) * sum of the Schouten eigenvalues (K for n = 2 after /2)."""
    g = _as_metric(g)
    eig = eig or schouten_eigenvalues(g, estimate=False)
    R = 2 * (g.n - 1) * np.sum(eig.values, axis=-1)
    return FieldGrid(g.domain, R, tag={"kind": "scalar_curvature"})


def gaussian_curvature(g, order: int = 4) -> np.ndarray:
    """Independent 2D formula K = e^{-2 rho}(1 - Laplacian rho)."""
    g = _as_metric(g)
    if g.n != 2:
        raise ValueError("Gaussian curvature formula is two-dimensional")
    H = hessian(g.rho, order).matrices
    lap = H[..., 0, 0] + H[..., 1, 1]
    return np.exp(-2 * g.rho.values) * (1.0 - lap)


def ring_curvature0(dom: SphereDomain, component: str, r: float | None = None) -> float:
    """Mean curvature of a boundary ring in g0, w.r.t. the inward normal."""
    _, _, radius = dom.ring_points(component)
    radius = radius if r is None else r
    return cot(radius) if component == "boundary" else -cot(radius)


def boundary_data(g, component: str = "boundary", r: float | None = None, order: int = 4) -> BoundaryData:
    """Boundary values, inward normal derivative and mean curvature in g.

    H_g = e^{-rho} (H_0 - d rho / d nu) for a conformal change of the ambient
    metric; on the equator H_0 = 0 and this is -e^{-rho} d rho / d nu.
    """
    g = _as_metric(g)
    dom = g.domain
    if component not in dom.boundary_names:
        raise KeyError(f"unknown boundary component {component!r}")
    y, _, radius = dom.ring_points(component)
    H0 = ring_curvature0(dom, component, r)
    rho_b, dnu = normal_derivative(g.rho, component, order)
    H = np.exp(-rho_b) * (H0 - dnu)
    # geodesic circles are umbilic for every conformal metric; curves (n = 2)
    # and rotation orbits (radial charts) have no trace-free part at all.
    return BoundaryData(component, y, np.asarray(rho_b), np.asarray(dnu), np.asarray(H), H0, radius, 0.0)


def boundary_isometry_check(g, component: str, r: float, tol: float = 1e-3) -> CheckReport:
    """Is the boundary component (with the metric induced by g) a round
    sphere of radius sin r?"""
    t0 = time.perf_counter()
    g = _as_metric(g)
    dom = g.domain
    bd = boundary_data(g, component)
    target = math.sin(r)
    if dom.n == 2:
        L = float(np.mean(np.exp(bd.rho)) * 2 * math.pi * math.sin(bd.radius))
        radius = L / (2 * math.pi)
        defect = abs(radius - target)
        metrics = {"length": L, "radius": radius, "target_radius": target, "defect": defect}
    else:
        spread = float(np.ptp(np.atleast_1d(bd.rho)))
        const = float(np.mean(bd.rho))
        radius = math.exp(const) * math.sin(bd.radius)
        defect = max(abs(radius - target), spread)
        metrics = {"rho_boundary": const, "rho_spread": spread, "radius": radius, "target_radius": target, "defect": defect}
    passed = defect <= tol
    wit = None
    if not passed:
        i = int(np.argmax(np.abs(np.atleast_1d(bd.rho) - np.mean(bd.rho))))
        pts = np.atleast_2d(bd.points)
        wit = Witness((i,), tuple(pts[i]), component, {"radius": radius, "target": target})
    return CheckReport(
        "boundary_isometry",
        passed,
        metrics,
        wit,
        {"component": component, "tol": tol, "scaling": SCALING_NOTE},
        wall_time=time.perf_counter() - t0,
    )
