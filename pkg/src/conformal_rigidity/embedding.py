"""Horospherical support function <-> hypersurface of H^{n+1}.

Given rho on a sphere domain, the representation formula

    phi = (e^rho / 2)(1 + e^{-2 rho}(1 + |grad rho|^2)) (1, x) + e^{-rho} (0, -x + grad rho)

gives a hypersurface whose hyperbolic Gauss map is x and whose unit normal is
eta = phi - e^rho (1, x).  The light-cone map psi = phi - eta = e^rho (1, x)
recovers rho.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.spatial import cKDTree

from .hyperbolic import (
    GeodesicObject,
    boost,
    hyperbolic_distance,
    light_point,
    minkowski_dot,
    moebius_map,
    signed_distance,
    to_ball,
)
from .report import NumericalError
from .sphere_core import (
    FieldGrid,
    SphereDomain,
    build_grid,
    geodesic_distance,
    gradient,
    gradient_ambient,
)

ADMISSIBLE_MARGIN = 1e-6


class AdmissibilityError(ValueError):
    """The field has Schouten eigenvalues too close to 1/2 to be embedded."""

    def __init__(self, msg: str, index=None, value=None):
        super().__init__(msg)
        self.index = index
        self.value = value


@dataclass(eq=False)
class HypersurfaceSample:
    """Per-point Minkowski data of a hypersurface parametrised by a grid."""

    domain: SphereDomain | None
    x: np.ndarray  # Gauss-map base points on S^n
    phi: np.ndarray
    eta: np.ndarray
    rho: np.ndarray
    grad: np.ndarray | None = None  # frame gradient of rho (where known)
    meta: dict = field(default_factory=dict)

    @property
    def psi(self) -> np.ndarray:
        return self.phi - self.eta

    @property
    def ball(self) -> np.ndarray:
        return to_ball(self.phi)

    @property
    def n(self) -> int:
        return self.x.shape[-1] - 1

    def invariant_defects(self) -> dict:
        """Worst violation of each algebraic frame invariant."""
        phi, eta, psi = self.phi, self.eta, self.psi
        return {
            "phi_phi": float(np.max(np.abs(minkowski_dot(phi, phi) + 1))),
            "eta_eta": float(np.max(np.abs(minkowski_dot(eta, eta) - 1))),
            "phi_eta": float(np.max(np.abs(minkowski_dot(phi, eta)))),
            "psi_psi": float(np.max(np.abs(minkowski_dot(psi, psi)) / psi[..., 0] ** 2)),
            "psi0_min": float(np.min(psi[..., 0])),
            "gauss_map": float(np.max(np.abs(psi / psi[..., :1] - light_point(self.x)))),
        }

    def boundary_ring(self) -> dict:
        """Points of the outer boundary ring (polar/radial charts)."""
        dom = self.domain
        if dom is None or dom.full:
            raise KeyError("sample has no outer boundary ring")
        sl = (-1,)
        out = {"x": self.x[sl], "phi": self.phi[sl], "eta": self.eta[sl], "rho": self.rho[sl]}
        if self.grad is not None:
            out["dnu"] = -self.grad[sl][..., 0]
        return out


def representation(x, rho, grad_amb):
    """phi and eta at points x from rho and its ambient tangent gradient."""
    x = np.asarray(x, dtype=float)
    rho = np.asarray(rho, dtype=float)
    grad_amb = np.asarray(grad_amb, dtype=float)
    E = np.exp(rho)
    G = np.sum(grad_amb * grad_amb, axis=-1)
    A = 0.5 * E * (1.0 + (1.0 + G) / E**2)
    lp = light_point(x)
    tail = np.concatenate([np.zeros(x.shape[:-1] + (1,)), grad_amb - x], axis=-1)
    phi = A[..., None] * lp + (1.0 / E)[..., None] * tail
    eta = phi - E[..., None] * lp
    return phi, eta


def _check_admissible(rho: FieldGrid, margin: float) -> None:
    from .conformal_geometry import schouten_eigenvalues

    lam = schouten_eigenvalues(rho, estimate=False).values
    top = lam[..., -1]
    i = np.unravel_index(int(np.argmax(top)), top.shape)
    if top[i] >= 0.5 - margin:
        raise AdmissibilityError(
            f"max Schouten eigenvalue {top[i]:.6g} >= 1/2 - {margin:g}; dilate the metric first",
            index=tuple(int(k) for k in i),
            value=float(top[i]),
        )


def embed(
    rho: FieldGrid,
    order: int = 4,
    strict: bool = True,
    margin: float = ADMISSIBLE_MARGIN,
    analytic: bool = False,
) -> HypersurfaceSample:
    """Hypersurface sample of the support function rho (representation formula).

    With strict=True fields whose largest Schouten eigenvalue reaches
    1/2 - margin are refused (principal curvatures would blow up).
    analytic=True takes grad rho from the field's generator instead of the
    grid stencils.
    """
    if not np.all(np.isfinite(rho.values)):
        raise NumericalError("non-finite field")
    if strict:
        _check_admissible(rho, margin)
    dom = rho.domain
    if analytic:
        if rho.generator is None:
            raise ValueError("analytic embedding needs a field generator")
        _, g_amb = rho.evaluate(dom.points, with_gradient=True)
        grad = np.stack([np.sum(g_amb * dom.e_theta, -1), np.sum(g_amb * dom.e_phi, -1)], -1)
        if dom.is_radial:
            grad = np.concatenate([grad[..., :1], np.zeros(dom.shape + (dom.n - 1,))], -1)
    else:
        grad = gradient(rho, order)
        g_amb = gradient_ambient(rho, order)
    phi, eta = representation(dom.points, rho.values, g_amb)
    if not (np.all(np.isfinite(phi)) and np.all(np.isfinite(eta))):
        raise NumericalError("embedding produced non-finite values")
    return HypersurfaceSample(dom, dom.points.copy(), phi, eta, rho.values.copy(), grad, {"tag": dict(rho.tag)})


def ball_form(x, rho, grad_amb, eps):
    """Poincare-ball image of the support function rho + t, eps = e^{-t}.

    With E = e^rho and D = (E + eps)^2 + eps^2 |grad rho|^2:

        ((E^2 - eps^2 + eps^2 |grad rho|^2) x + 2 eps^2 grad rho) / D

    eps = 0 is the identity of S^n.
    """
    x = np.asarray(x, dtype=float)
    E = np.exp(np.asarray(rho, dtype=float))
    G = np.sum(grad_amb * grad_amb, axis=-1)
    e2 = eps * eps
    D = (E + eps) ** 2 + e2 * G
    return (((E * E - e2 + e2 * G) / D)[..., None] * x + (2 * e2 / D)[..., None] * grad_amb)


def embed_ball_form(rho: FieldGrid, t: float | None = None, eps: float | None = None, order: int = 4) -> np.ndarray:
    """Ball-model image of rho_t = rho + t computed directly (no hyperboloid)."""
    if (t is None) == (eps is None):
        raise ValueError("give exactly one of t or eps")
    if eps is None:
        eps = math.exp(-t)
    if eps < 0:
        raise ValueError("eps must be non-negative")
    dom = rho.domain
    return ball_form(dom.points, rho.values, gradient_ambient(rho, order), eps)


def recover(h: HypersurfaceSample, domain: SphereDomain | None = None) -> tuple[FieldGrid | np.ndarray, float]:
    """rho = ln psi_0 and the Gauss-map defect max |psi/psi_0 - (1, x)|."""
    psi = h.psi
    if np.any(psi[..., 0] <= 0) or not np.all(np.isfinite(psi)):
        raise NumericalError("light-cone map has psi_0 <= 0")
    rho = np.log(psi[..., 0])
    defect = float(np.max(np.abs(psi / psi[..., :1] - light_point(h.x))))
    dom = domain or h.domain
    if dom is not None and rho.shape == dom.shape and np.allclose(h.x, dom.points, atol=1e-12):
        return FieldGrid(dom, rho, tag={"kind": "recovered"}), defect
    return rho, defect


# ---------------------------------------------------------------------------
# principal curvatures


def _frame_derivs(dom: SphereDomain, V: np.ndarray, order: int):
    """(D_theta V, D_phi V / sin theta) for vector data on a 2D chart."""
    dt, _ = dom.d_theta(V, order=order)
    dp, _ = dom.d_phi(V)
    return dt, dp / np.sin(dom.theta)[:, None, None]


def principal_curvatures(h: HypersurfaceSample, order: int = 4) -> np.ndarray:
    """Sorted principal curvatures from the discrete shape operator.

    The second fundamental form -<d eta, d phi> is taken against the induced
    metric <d phi, d phi>, both from finite differences of the sampled phi
    and eta along the parameter grid.
    """
    dom = h.domain
    if dom is None:
        raise ValueError("principal curvatures need a structured parameter grid")
    if dom.is_radial:
        return _radial_curvatures(h, order)
    a_phi, b_phi = _frame_derivs(dom, h.phi, order)
    a_eta, b_eta = _frame_derivs(dom, h.eta, order)
    I = np.empty(dom.shape + (2, 2))
    II = np.empty_like(I)
    I[..., 0, 0] = minkowski_dot(a_phi, a_phi)
    I[..., 1, 1] = minkowski_dot(b_phi, b_phi)
    I[..., 0, 1] = I[..., 1, 0] = minkowski_dot(a_phi, b_phi)
    II[..., 0, 0] = -minkowski_dot(a_eta, a_phi)
    II[..., 1, 1] = -minkowski_dot(b_eta, b_phi)
    II[..., 0, 1] = II[..., 1, 0] = -0.5 * (minkowski_dot(a_eta, b_phi) + minkowski_dot(b_eta, a_phi))
    return _generalized_eigs(I, II)


def _generalized_eigs(I: np.ndarray, II: np.ndarray) -> np.ndarray:
    det = I[..., 0, 0] * I[..., 1, 1] - I[..., 0, 1] ** 2
    bad = ~(det > 0) | ~(I[..., 0, 0] > 0)
    if np.any(bad):
        idx = tuple(int(k) for k in np.argwhere(bad)[0])
        raise NumericalError(f"degenerate induced metric at grid index {idx}")
    L = np.linalg.cholesky(I)
    Li = np.linalg.inv(L)
    M = Li @ II @ np.swapaxes(Li, -1, -2)
    M = 0.5 * (M + np.swapaxes(M, -1, -2))
    return np.linalg.eigvalsh(M)


def _radial_curvatures(h: HypersurfaceSample, order: int) -> np.ndarray:
    dom = h.domain
    c, u = dom.center, dom.u

    def meridian(V):
        return np.stack([V[..., 0], V[..., 1:] @ c, V[..., 1:] @ u], axis=-1)

    P, Q = meridian(h.phi), meridian(h.eta)
    sign = np.array([1.0, 1.0, -1.0])  # the u-component is odd across the poles
    dP, _ = dom.d_theta(P, order=order, sign=sign)
    dQ, _ = dom.d_theta(Q, order=order, sign=sign)
    I = minkowski_dot(dP, dP)
    if np.any(I <= 0):
        i = int(np.argmax(I <= 0))
        raise NumericalError(f"degenerate induced metric at grid index ({i},)")
    k_prof = -minkowski_dot(dQ, dP) / I
    if np.any(np.abs(P[..., 2]) < 1e-300):
        raise NumericalError("profile meets the rotation axis")
    k_orbit = -Q[..., 2] / P[..., 2]
    ks = np.concatenate([k_prof[:, None], np.repeat(k_orbit[:, None], dom.n - 1, axis=1)], axis=1)
    return np.sort(ks, axis=-1)


def duality_eigenvalues(k) -> np.ndarray:
    """lambda_i = 1/2 - 1/(1 + k_i)."""
    return 0.5 - 1.0 / (1.0 + np.asarray(k))


# ---------------------------------------------------------------------------
# model surfaces and isometries


def geodesic_sphere(t: float, n: int = 2, resolution=(64, 64)) -> HypersurfaceSample:
    """Geodesic sphere of radius t about the origin, parametrised by S^n."""
    if not t > 0:
        raise ValueError("geodesic sphere radius must be positive")
    if n == 2:
        dom = build_grid(2, "latlon", resolution)
    else:
        res = resolution if np.isscalar(resolution) else resolution[0]
        dom = build_grid(n, "radial", res, r_max=math.pi)
    from .presets import constant

    h = embed(constant(dom, t), strict=False)
    h.meta.update({"kind": "geodesic_sphere", "t": float(t)})
    return h


def translate_sample(h: HypersurfaceSample, s: float, axis) -> HypersurfaceSample:
    """Apply the hyperbolic translation T_s along `axis` to a sample.

    The parametrisation is kept; the Gauss-map points move by the boundary
    Moebius map and rho is re-read from the boosted light-cone map.
    """
    if abs(s) > 20:
        raise ValueError("|s| <= 20 required (overflow guard)")
    phi = boost(h.phi, s, axis)
    eta = boost(h.eta, s, axis)
    psi = phi - eta
    x = psi[..., 1:] / psi[..., :1]
    rho = np.log(psi[..., 0])
    meta = dict(h.meta)
    meta["translations"] = meta.get("translations", []) + [{"s": float(s), "axis": np.asarray(axis, float).tolist()}]
    return HypersurfaceSample(h.domain, x, phi, eta, rho, None, meta)


def translate_field(rho: FieldGrid, s: float, axis) -> FieldGrid:
    """Support function of T_s(Sigma) on the same chart (pullback formula).

        rho'(y) = rho(M_{-s} y) - ln(cosh s - sinh s <y, a>)

    with M_{-s} the boundary Moebius map of T_{-s}.  rho must be evaluable at
    M_{-s}(y) (analytic generator, or inside the sampled chart).
    """
    if abs(s) > 20:
        raise ValueError("|s| <= 20 required (overflow guard)")
    a = np.asarray(axis, dtype=float)
    a = a / np.linalg.norm(a)
    base = rho

    def fn(y):
        y = np.asarray(y, dtype=float)
        back, _ = moebius_map(y, -s, a)
        return base.evaluate(back) - np.log(math.cosh(s) - math.sinh(s) * (y @ a))

    tag = {"kind": "translated", "s": float(s), "axis": a.tolist(), "base": dict(rho.tag)}
    return FieldGrid.from_function(rho.domain, fn, tag)


def translate(obj, s: float, axis):
    """Hyperbolic translation of a sample, or pullback of a conformal factor."""
    if isinstance(obj, HypersurfaceSample):
        return translate_sample(obj, s, axis)
    from .conformal_geometry import ConformalMetric

    if isinstance(obj, ConformalMetric):
        return ConformalMetric(translate_field(obj.rho, s, axis))
    if isinstance(obj, FieldGrid):
        return translate_field(obj, s, axis)
    raise TypeError("translate expects a HypersurfaceSample, ConformalMetric or FieldGrid")


def embed_points(rho: FieldGrid, y: np.ndarray):
    """phi, eta at arbitrary chart points y (analytic or spline evaluation)."""
    val, grad = rho.evaluate(y, with_gradient=True)
    return representation(y, val, grad)


# ---------------------------------------------------------------------------
# caps and embeddedness


def plane_normal(r: float, axis=None, n: int = 2) -> np.ndarray:
    """Unit normal of the hyperplane P_r whose ideal boundary is the circle
    at angle r from the axis; points into the side containing the cap."""
    a = np.zeros(n + 1)
    a[-1] = 1.0
    if axis is not None:
        a = np.asarray(axis, dtype=float) / np.linalg.norm(axis)
    return np.concatenate([[math.cos(r)], a]) / math.sin(r)


def cap_construction(t: float, r: float, n: int = 2, resolution=(64, 64), axis=None) -> HypersurfaceSample:
    """Spherical cap phi_t(D(axis, r)) of the geodesic sphere of radius t.

    Its boundary ring lies on the horospheres H(x, t) and on the equidistant
    P_r(b), b = arcsinh(-e^{-t} cot r); both incidences are verified.
    """
    if not 0 < r <= math.pi / 2 + 1e-15:
        raise ValueError("cap radius must lie in (0, pi/2]")
    if not t > 0:
        raise ValueError("dilation t must be positive")
    from .presets import constant

    dom = build_grid(n, "polar", resolution, r_max=r, center=axis)
    h = embed(constant(dom, t), strict=False)
    cot_r = 0.0 if abs(r - math.pi / 2) < 1e-15 else 1.0 / math.tan(r)
    b = math.asinh(-math.exp(-t) * cot_r)
    N = plane_normal(r, dom.center, n)
    ring = h.boundary_ring()
    eq_defect = float(np.max(np.abs(signed_distance(ring["phi"], GeodesicObject.equidistant(N, b)))))
    horo = float(np.max(np.abs(minkowski_dot(ring["phi"], light_point(ring["x"])) + math.exp(-t))))
    if eq_defect > 1e-9 or horo > 1e-9:
        raise NumericalError("cap ring is off its equidistant or horospheres")
    line = GeodesicObject.axis_line(dom.center)
    abar = float(np.max(signed_distance(ring["phi"], line)))
    h.meta.update(
        {
            "kind": "cap",
            "t": float(t),
            "r": float(r),
            "level": b,
            "plane_normal": N.tolist(),
            "axis": dom.center.tolist(),
            "equidistant_defect": eq_defect,
            "horosphere_defect": horo,
            "ring_axis_distance": abar,
            "sphere_center": [1.0] + [0.0] * (n + 1),
            "sphere_radius": float(t),
        }
    )
    return h


def neighbour_spacing(h: HypersurfaceSample) -> float:
    """Largest hyperbolic distance between grid neighbours."""
    dom = h.domain
    d = hyperbolic_distance(h.phi[1:], h.phi[:-1])
    worst = float(np.max(d))
    if dom is not None and not dom.is_radial:
        d2 = hyperbolic_distance(h.phi, np.roll(h.phi, 1, axis=1))
        worst = max(worst, float(np.max(d2)))
    return worst


def embeddedness(h: HypersurfaceSample, delta: float | None = None) -> dict:
    """Numerical embeddedness test.

    Pairs of samples that are far apart in the parameter domain (more than
    4 grid steps) must stay at hyperbolic distance >= delta; delta defaults to
    half the smallest neighbour spacing.  Candidate pairs come from a KD-tree
    on ball coordinates (d_H < delta implies |b - b'| < sinh(delta/2)).
    """
    dom = h.domain
    pts = h.phi.reshape(-1, h.phi.shape[-1])
    par = dom.points.reshape(-1, dom.points.shape[-1]) if dom is not None else h.x.reshape(-1, h.x.shape[-1])
    if dom is not None and dom.is_radial:
        pts = np.stack([h.phi[..., 0], h.phi[..., 1:] @ dom.center, h.phi[..., 1:] @ dom.u], axis=-1)
    keep = np.ones(len(pts), dtype=bool)
    if dom is not None and not dom.is_radial:
        keep = dom.mask.reshape(-1)
    if delta is None:
        d1 = hyperbolic_distance(h.phi[1:], h.phi[:-1])
        delta = 0.5 * float(np.min(d1))
    sel = np.flatnonzero(keep)
    tree = cKDTree(to_ball(pts[sel]))
    pairs = sel[tree.query_pairs(math.sinh(delta / 2), output_type="ndarray")]
    step = dom.spacing if dom is not None else 0.0
    worst = math.inf
    bad = None
    if len(pairs):
        far = geodesic_distance(par[pairs[:, 0]], par[pairs[:, 1]]) > 4 * step
        pairs = pairs[far]
        if len(pairs):
            dd = hyperbolic_distance(pts[pairs[:, 0]], pts[pairs[:, 1]])
            j = int(np.argmin(dd))
            worst = float(dd[j])
            if worst < delta:
                bad = tuple(int(v) for v in pairs[j])
    axis_ok = True
    if dom is not None and dom.is_radial:
        axis_ok = bool(np.all(pts[..., 2] > 0))
    return {"embedded": bad is None and axis_ok, "delta": delta, "closest_far_pair": worst, "pair": bad, "axis_ok": axis_ok}


# ---------------------------------------------------------------------------
# export


def write_sample_csv(path: str | Path, h: HypersurfaceSample, k: np.ndarray | None = None) -> Path:
    """CSV with grid indices, x, phi_0..phi_{n+1}, ball coordinates, k_1..k_n."""
    path = Path(path)
    n = h.n
    if k is None and h.domain is not None:
        k = principal_curvatures(h)
    shape = h.x.shape[:-1]
    idx = np.indices(shape).reshape(len(shape), -1).T
    cols = [idx, h.x.reshape(-1, n + 1), h.phi.reshape(-1, n + 2), h.ball.reshape(-1, n + 1)]
    names = [f"i{j}" for j in range(len(shape))]
    names += [f"x{j}" for j in range(n + 1)] + [f"phi{j}" for j in range(n + 2)] + [f"b{j}" for j in range(n + 1)]
    if k is not None:
        cols.append(np.asarray(k).reshape(-1, n))
        names += [f"k{j + 1}" for j in range(n)]
    data = np.concatenate([np.asarray(c, dtype=float) for c in cols], axis=1)
    ni = len(shape)
    lines = [",".join(names)]
    for row in data:
        lines.append(",".join([str(int(v)) for v in row[:ni]] + [repr(float(v)) for v in row[ni:]]))
    path.write_text("\n".join(lines) + "\n")
    return path
