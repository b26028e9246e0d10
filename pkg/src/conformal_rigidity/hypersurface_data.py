"""Extrinsic curvature data (W, Gamma*, kappa0) for hypersurfaces of H^{n+1},
(kappa0, r)-spherical caps and the boundary-angle and inradius gates for caps
sitting on equidistants."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable

import mpmath
import numpy as np
from scipy.optimize import brentq, minimize
from shapely.geometry import Point, Polygon
from shapely.ops import polylabel

from .conformal_geometry import gate_tol
from .elliptic_data import elementary_symmetric, make_user
from .embedding import HypersurfaceSample, duality_eigenvalues, embed, principal_curvatures, translate_sample
from .hyperbolic import GeodesicObject, boost, hyperbolic_distance, minkowski_dot, signed_distance
from .report import CheckReport, Witness, combine
from .sphere_core import build_grid


@dataclass
class WData:
    n: int
    W: Callable  # numpy evaluator on (..., n); nan outside the cone
    cone: Callable
    kappa0: float
    family: str
    params: dict = field(default_factory=dict)
    W_mp: Callable | None = None
    cone_mp: Callable | None = None
    validated: bool = False

    def __call__(self, x):
        return self.W(x)

    def describe(self) -> str:
        extra = ",".join(f"{k}={v}" for k, v in sorted(self.params.items()))
        return f"{self.family}:kappa0={self.kappa0:g}" + (f",{extra}" if extra else "")


def _check_kappa0(kappa0: float) -> float:
    kappa0 = float(kappa0)
    if not kappa0 > 1:
        raise ValueError("kappa0 must exceed 1 (geodesic spheres have k = coth t > 1)")
    return kappa0


def make_mean_curvature_W(n: int, kappa0: float) -> WData:
    """W = (sum x_i / n - 1) / (kappa0 - 1) on Gamma*_1."""
    kappa0 = _check_kappa0(kappa0)
    den = kappa0 - 1.0

    def W(x):
        x = np.asarray(x, dtype=float)
        m = np.mean(x, axis=-1) - 1.0
        return np.where(m > 0, m / den, np.nan)

    def cone(x):
        return np.sum(np.asarray(x, dtype=float), axis=-1) > n

    def W_mp(x):
        return (mpmath.fsum(x) / n - 1) / (mpmath.mpf(kappa0) - 1)

    def cone_mp(x):
        return mpmath.fsum(x) > n

    return WData(n, W, cone, kappa0, "mean_curvature", {}, W_mp, cone_mp, True)


def make_sigma_k_W(n: int, k: int, kappa0: float) -> WData:
    """W = (sigma_k(x - 1) / C(n,k))^{1/k} / (kappa0 - 1) on {x - 1 in Gamma_k}."""
    kappa0 = _check_kappa0(kappa0)
    if not 1 <= k <= n:
        raise ValueError(f"k out of range: need 1 <= k <= n = {n}")
    c = math.comb(n, k)
    den = kappa0 - 1.0

    def cone(x):
        e = elementary_symmetric(np.asarray(x, dtype=float) - 1.0, k)
        ok = np.ones(np.shape(x)[:-1], dtype=bool)
        for j in range(1, k + 1):
            ok &= e[j] > 0
        return ok

    def W(x):
        x = np.asarray(x, dtype=float)
        e = elementary_symmetric(x - 1.0, k)[k]
        with np.errstate(invalid="ignore"):
            return np.where(cone(x), np.power(np.where(cone(x), e, np.nan) / c, 1.0 / k) / den, np.nan)

    def cone_mp(x):
        e = elementary_symmetric([v - 1 for v in x], k)
        return all(e[j] > 0 for j in range(1, k + 1))

    def W_mp(x):
        e = elementary_symmetric([v - 1 for v in x], k)
        if not all(e[j] >= 0 for j in range(1, k + 1)):
            return mpmath.nan
        return (e[k] / c) ** (mpmath.mpf(1) / k) / (mpmath.mpf(kappa0) - 1)

    return WData(n, W, cone, kappa0, "sigma_k_curvature", {"k": int(k)}, W_mp, cone_mp, True)


def make_user_W(n: int, expr: str, cone: str, kappa0: float) -> WData:
    """User W and Gamma* as sympy expressions in x1..xn; must pass validate_W."""
    kappa0 = _check_kappa0(kappa0)
    e = make_user(n, expr, cone)
    return WData(n, e.f, e.cone, kappa0, "user", {"W": expr, "cone": cone}, e.f_mp, e.cone_mp, False)


# ---------------------------------------------------------------------------
# validation


def sample_star_cone(d: WData, count: int, rng: np.random.Generator) -> np.ndarray:
    """Random points of Gamma*: 1 + directions biased to the diagonal, with
    magnitudes over three decades."""
    n = d.n
    diag = np.ones(n) / math.sqrt(n)
    out, have = [], 0
    for _ in range(200):
        m = max(4 * (count - have), 64)
        u = rng.normal(size=(m, n))
        u /= np.linalg.norm(u, axis=1, keepdims=True)
        v = u + rng.uniform(0.0, 3.0, size=(m, 1)) * diag
        v /= np.linalg.norm(v, axis=1, keepdims=True)
        x = 1.0 + v * np.exp(rng.uniform(math.log(0.01), math.log(10.0), size=(m, 1)))
        x = x[d.cone(x)]
        out.append(x)
        have += len(x)
        if have >= count:
            break
    pts = np.concatenate(out)[:count]
    if len(pts) < count:
        raise ValueError("could not sample Gamma* (is the predicate ever true?)")
    return pts


def _exit_value(d: WData, x: np.ndarray, dps: int = 50) -> float:
    """|W| at the first exit from Gamma* along x - tau (1,..,1) (mpmath bisection)."""
    with mpmath.workdps(dps):
        xs = [mpmath.mpf(float(v)) for v in x]
        lo = mpmath.mpf(0)
        hi = mpmath.mpf(float(np.sum(x)) / d.n)  # sum(x - hi) = 0 lies outside Gamma*_1
        for _ in range(4 * dps):
            mid = (lo + hi) / 2
            if d.cone_mp([v - mid for v in xs]):
                lo = mid
            else:
                hi = mid
        return abs(float(d.W_mp([v - lo for v in xs])))


def validate_W(d: WData, samples: int = 10_000, seed: int = 0, tol: float = 1e-8, boundary_samples: int = 200) -> CheckReport:
    """Randomised verification of the six axioms of (W, Gamma*, kappa0), plus W(1,..,1) = 0."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    n = d.n
    X = sample_star_cone(d, samples, rng)
    F = d.W(X)
    parts = []

    def add(name, ok, viol, idx=None, **detail):
        wit = None
        if not ok:
            coords = tuple(float(v) for v in X[idx]) if idx is not None else None
            wit = Witness((int(idx),) if idx is not None else None, coords, "cone sample", detail)
        parts.append(CheckReport(name, bool(ok), {"worst_violation": float(viol), **detail}, wit))

    # 1. Gamma*_n in Gamma* in Gamma*_1
    P = 1.0 + np.exp(rng.uniform(math.log(1e-3), math.log(10.0), size=(samples, n)))
    miss = ~d.cone(P)
    over = np.sum(X, axis=-1) - n
    bad = int(np.sum(miss) + np.sum(over <= 0))
    add("cone_sandwich", bad == 0, bad, int(np.argmin(over)) if np.any(over <= 0) else None, gamma_n_points_outside=int(np.sum(miss)))
    # 2. symmetry
    perms = np.array([rng.permutation(n) for _ in range(len(X))])
    rel = np.abs(d.W(np.take_along_axis(X, perms, axis=1)) - F) / np.maximum(np.abs(F), 1e-300)
    rel = np.where(np.isfinite(rel), rel, np.inf)
    j = int(np.argmax(rel))
    add("symmetry", rel[j] <= tol, rel[j], j)
    # 3. positivity
    fin = np.isfinite(F)
    j = int(np.argmin(np.where(fin, F, -np.inf)))
    add("positivity", bool(np.all(fin & (F > 0))), max(0.0, -float(F[j])) if fin[j] else math.inf, j)
    # 4. vanishing on the boundary of Gamma*
    worst, wj = 0.0, 0
    m = min(boundary_samples, len(X))
    if d.W_mp is None or d.cone_mp is None:
        add("boundary_vanishing", False, math.inf, None, reason="no high-precision evaluator")
    else:
        for j in range(m):
            v = _exit_value(d, X[j])
            if not v <= worst:
                worst, wj = v, j
        add("boundary_vanishing", worst <= tol, worst, wj, samples=m)
    # 5. strict monotonicity
    h = 1e-6 * np.max(np.abs(X), axis=1)
    mv, mj, mi = -math.inf, 0, 0
    for i in range(n):
        Xi = X.copy()
        Xi[:, i] += h
        di = (d.W(Xi) - F) / h
        di = np.where(np.isfinite(di), di, -np.inf)
        j = int(np.argmin(di))
        if mv == -math.inf or di[j] < mv:
            mv, mj, mi = float(di[j]), j, i
    add("monotonicity", mv > 0, max(0.0, -mv), mj, min_partial=mv, coordinate=mi)
    # 6. normalisation at kappa0 and vanishing at (1,..,1)
    k0 = float(d.W(np.full(n, d.kappa0)))
    with mpmath.workdps(30):
        at_one = abs(float(d.W_mp([mpmath.mpf(1)] * n))) if d.W_mp is not None else math.nan
    ok = abs(k0 - 1.0) <= 1e-12 and (not np.isfinite(at_one) or at_one <= tol)
    parts.append(
        CheckReport(
            "normalization",
            ok,
            {"W_at_kappa0": k0, "error": abs(k0 - 1.0), "W_at_one": at_one},
            None if ok else Witness(None, (d.kappa0,) * n, "(kappa0,...,kappa0)", {"W": k0}),
        )
    )
    rep = combine("W_axioms", parts, family=d.describe(), n=n, samples=int(len(X)), seed=seed, tol=tol)
    rep.wall_time = time.perf_counter() - t0
    d.validated = rep.passed
    return rep


def supersolution_W_check(d: WData, sigma: HypersurfaceSample, tol: float | None = None, order: int = 4) -> CheckReport:
    """W(k(p)) >= 1 - tol and k(p) in Gamma* at every sample point."""
    t0 = time.perf_counter()
    if d.family == "user" and not d.validated:
        raise ValueError("user-supplied W data must pass validate_W before use")
    k = principal_curvatures(sigma, order)
    est = float(np.max(np.abs(k - principal_curvatures(sigma, 6 if order < 6 else 4))))
    tol = gate_tol(est) if tol is None else tol
    inside = d.cone(k)
    F = np.where(inside, d.W(k), -np.inf)
    flat = F.reshape(-1)
    j = int(np.argmin(flat))
    passed = bool(np.all(inside) and flat[j] >= 1.0 - tol)
    wit = None
    if not passed:
        idx = np.unravel_index(j, F.shape)
        pt = sigma.x[idx] if sigma.domain is None else sigma.domain.points[idx]
        wit = Witness(
            tuple(int(i) for i in idx),
            tuple(float(v) for v in pt),
            "interior",
            {"W": float(flat[j]) if np.isfinite(flat[j]) else None, "k": k[idx].tolist(), "in_cone": bool(inside[idx])},
        )
    fin = flat[np.isfinite(flat)]
    return CheckReport(
        "W_supersolution",
        passed,
        {
            "min_W": float(flat[j]) if np.isfinite(flat[j]) else None,
            "max_W": float(np.max(fin)) if fin.size else None,
            "cone_violations": int(np.sum(~inside)),
            "tol": tol,
        },
        wit,
        {"W_data": d.describe(), "truncation_estimate": est},
        wall_time=time.perf_counter() - t0,
    )


# ---------------------------------------------------------------------------
# spherical caps


def boundary_angle(r: float) -> float:
    """alpha(r) = arccos(-r / sqrt(1 + r^2))."""
    return math.acos(-r / math.sqrt(1.0 + r * r))


def equidistant_normal(p: np.ndarray, N: np.ndarray) -> np.ndarray:
    """Unit normal at p of the equidistant through p to the hyperplane N^perp,
    pointing to increasing signed distance."""
    s = minkowski_dot(p, N)
    return (N + s[..., None] * p) / np.sqrt(1.0 + s * s)[..., None]


@dataclass
class CapModel:
    kappa0: float
    r: float
    radius: float  # geodesic radius R = arccoth kappa0
    center: np.ndarray  # Minkowski centre p_r
    height: float  # signed distance of p_r from P
    level: float  # the equidistant P(r) is the level -r of the normal N
    normal: np.ndarray
    alpha: float
    inradius: float
    chart_radius: float
    defects: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "kappa0": self.kappa0,
            "r": self.r,
            "radius": self.radius,
            "center": [float(v) for v in self.center],
            "height": self.height,
            "level": self.level,
            "normal": [float(v) for v in self.normal],
            "alpha": self.alpha,
            "inradius": self.inradius,
            "chart_radius": self.chart_radius,
            "defects": self.defects,
        }


def cap_height(kappa0: float, r: float) -> float:
    """Signed height h of the centre above P such that the sphere of curvature
    kappa0 meets P(r) at the angle alpha(r).

    At a point p of the sphere on the level b the inward normal satisfies
        <eta, nu> = (sinh h - sinh b cosh R) / (sinh R cosh b),
    which is increasing in h and runs from -1 to 1 over [b - R, b + R].
    """
    kappa0 = _check_kappa0(kappa0)
    if not r >= 0:
        raise ValueError("equidistant level r must be >= 0")
    R = math.atanh(1.0 / kappa0)
    b = -r
    target = math.cos(boundary_angle(r))

    def g(h):
        return (math.sinh(h) - math.sinh(b) * math.cosh(R)) / (math.sinh(R) * math.cosh(b)) - target

    lo, hi = b - R, b + R
    if not g(lo) < 0 < g(hi):
        raise ValueError("no intersection of the sphere with P(r) at the required angle")
    return brentq(g, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)


def build_cap(kappa0: float, r: float, n: int = 2, resolution=(64, 64), axis=None) -> tuple[CapModel, HypersurfaceSample]:
    """(kappa0, r)-spherical cap S(kappa0, r)^+ over the hyperplane P = N^perp.

    N = (0, axis) and P(r) is the equidistant at signed distance -r; the cap is
    the part of the sphere on the convex side of P(r), oriented by the inward
    normal of the sphere.
    """
    kappa0 = _check_kappa0(kappa0)
    if not r >= 0:
        raise ValueError("equidistant level r must be >= 0")
    a = np.zeros(n + 1)
    a[-1] = 1.0
    if axis is not None:
        a = np.asarray(axis, dtype=float) / np.linalg.norm(axis)
    R = math.atanh(1.0 / kappa0)
    b = -r
    h = cap_height(kappa0, r)
    closed = math.asinh(math.sinh(b) * math.cosh(R) + math.cos(boundary_angle(r)) * math.sinh(R) * math.cosh(b))
    N = np.concatenate([[0.0], a])
    centre = np.concatenate([[math.cosh(h)], math.sinh(h) * a])
    cos_t = (math.sinh(b) - math.sinh(h) * math.cosh(R)) / (math.cosh(h) * math.sinh(R))
    if not -1 < cos_t < 1:
        raise ValueError("no intersection of the sphere with P(r)")
    theta = math.acos(cos_t)
    dom = build_grid(n, "polar", resolution, r_max=theta, center=a)
    from .presets import constant

    base = embed(constant(dom, R), strict=False)
    sample = translate_sample(base, h, a)
    sample.domain = dom
    ring = sample.boundary_ring()
    phi, eta = ring["phi"], ring["eta"]
    on_eq = np.abs(signed_distance(phi, GeodesicObject.equidistant(N, b)))
    on_sph = np.abs(signed_distance(phi, GeodesicObject.sphere(centre, R)))
    ang = minkowski_dot(eta, equidistant_normal(phi, N))
    # inradius: distance inside P(r) (metric cosh^2 r times that of P) from the
    # foot of the centre's perpendicular to the ring
    q = (phi - math.sinh(b) * N) / math.cosh(b)
    foot = np.zeros(n + 2)
    foot[0] = 1.0
    dist = math.cosh(r) * hyperbolic_distance(q, foot)
    defects = {
        "equidistant": float(np.max(on_eq)),
        "sphere": float(np.max(on_sph)),
        "angle": float(np.max(np.abs(ang - math.cos(boundary_angle(r))))),
        "height_closed_form": abs(h - closed),
        "inradius_spread": float(np.ptp(np.atleast_1d(dist))),
    }
    model = CapModel(kappa0, float(r), R, centre, h, b, N, boundary_angle(r), float(np.mean(dist)), theta, defects)
    sample.meta.update({"kind": "spherical_cap", **model.to_dict()})
    return model, sample


def cap_inradius(kappa0: float, r: float) -> float:
    """i(kappa0, r) from the cap construction."""
    return build_cap(kappa0, r, 2, (8, 8))[0].inradius


# ---------------------------------------------------------------------------
# boundary gates


def _rings(sigma_or_rings) -> list[dict]:
    if isinstance(sigma_or_rings, HypersurfaceSample):
        return [sigma_or_rings.boundary_ring()]
    if isinstance(sigma_or_rings, dict):
        return [sigma_or_rings]
    return list(sigma_or_rings)


def boundary_angle_check(sigma_or_rings, r: float, normals, tol: float = 1e-9, eq_tol: float = 1e-6) -> CheckReport:
    """<eta, N_i> <= -r / sqrt(1 + r^2) along every ring S_i, with S_i on P_i(r).

    N_i is the unit normal of the hyperplane P_i pointing into the (m, r)
    domain; P_i(r) is its equidistant at signed distance -r and the gate uses
    the normal of P_i(r) pointing into the domain.
    """
    t0 = time.perf_counter()
    rings = _rings(sigma_or_rings)
    normals = [np.asarray(N, dtype=float) for N in (normals if np.ndim(normals[0]) else [normals])]
    if len(normals) != len(rings):
        raise ValueError("one hyperplane normal per boundary ring is required")
    bound = -r / math.sqrt(1.0 + r * r)
    parts = []
    for i, (ring, N) in enumerate(zip(rings, normals)):
        phi = np.atleast_2d(ring["phi"])
        eta = np.atleast_2d(ring["eta"])
        off = np.abs(np.arcsinh(minkowski_dot(phi, N)) + r)
        if float(np.max(off)) > eq_tol:
            raise ValueError(f"ring {i} is off its equidistant P_{i}(r) (defect {float(np.max(off)):.3g})")
        val = minkowski_dot(eta, equidistant_normal(phi, N))
        j = int(np.argmax(val))
        ok = bool(val[j] <= bound + tol)
        parts.append(
            CheckReport(
                f"boundary_angle[{i}]",
                ok,
                {"max_eta_dot_N": float(val[j]), "bound": bound, "equidistant_defect": float(np.max(off))},
                None if ok else Witness((j,), tuple(float(v) for v in phi[j]), f"ring:{i}", {"eta_dot_N": float(val[j])}),
            )
        )
    rep = combine("boundary_angle", parts, r=r, tol=tol)
    rep.wall_time = time.perf_counter() - t0
    return rep


def _plane_basis(N: np.ndarray) -> np.ndarray:
    """Minkowski-orthonormal basis (timelike first) of N^perp in R^{1,3}."""
    G = np.diag([-1.0, 1.0, 1.0, 1.0])
    basis = [N]
    out = []
    for e in np.eye(4):
        w = e.copy()
        for v in basis:
            w = w - (minkowski_dot(w, v) / minkowski_dot(v, v)) * v
        nn = minkowski_dot(w, w)
        if abs(nn) > 1e-10:
            w = w / math.sqrt(abs(nn))
            basis.append(w)
            out.append(w)
        if len(out) == 3:
            break
    out.sort(key=lambda v: float(v @ G @ v))  # timelike first
    return np.array(out)


def ring_inradius(phi: np.ndarray, N, r: float) -> tuple[float, np.ndarray]:
    """Inradius (in P(r)) of a closed ring of P(r) in H^3.

    The ring is projected to P and drawn in the Poincare disc of P; the
    inscribed-disc centre starts at the polygon's pole of inaccessibility and
    is refined by maximising the smallest hyperbolic distance to the ring
    samples.  Distances in P(r) are cosh(r) times those in P.
    """
    phi = np.atleast_2d(np.asarray(phi, dtype=float))
    N = np.asarray(N, dtype=float)
    if phi.shape[-1] != 4:
        raise ValueError("inradius is implemented for rings of caps in H^3 (n = 2)")
    b = float(np.mean(np.arcsinh(minkowski_dot(phi, N))))
    q = (phi - math.sinh(b) * N) / math.cosh(b)
    B = _plane_basis(N)
    coords = np.stack([-minkowski_dot(q, B[0]), minkowski_dot(q, B[1]), minkowski_dot(q, B[2])], axis=-1)
    coords[:, 0] = np.abs(coords[:, 0])
    z = coords[:, 1:] / (1.0 + coords[:, :1])
    poly = Polygon(z)
    if not poly.is_valid:
        raise ValueError("ring projection is not a simple closed curve")
    zz = np.sum(z * z, axis=1)

    def mind(c):
        c = np.asarray(c)
        if not poly.contains(Point(*c)):
            return 0.0
        cc = float(c @ c)
        arg = 1.0 + 2.0 * np.sum((z - c) ** 2, axis=1) / ((1.0 - cc) * (1.0 - zz))
        return float(np.min(np.arccosh(arg)))

    start = np.array(polylabel(poly, tolerance=1e-6).coords[0])
    res = minimize(lambda c: -mind(c), start, method="Nelder-Mead", options={"xatol": 1e-12, "fatol": 1e-14, "maxiter": 4000})
    best = res.x if -res.fun >= mind(start) else start
    return math.cosh(r) * mind(best), best


def inradius_check(rings, r: float, kappa0: float, tol: float = 1e-6) -> CheckReport:
    """Some ring S_i has InRad(S_i, P_i(r)) >= i(kappa0, r) - tol.

    `rings` is a list of (phi samples, hyperplane normal N_i) pairs.
    """
    t0 = time.perf_counter()
    target = cap_inradius(kappa0, r)
    values = []
    for phi, N in rings:
        values.append(ring_inradius(phi, N, r)[0])
    best = int(np.argmax(values)) if values else None
    passed = bool(values) and values[best] >= target - tol
    return CheckReport(
        "inradius",
        passed,
        {"inradii": values, "target": target, "best_ring": best, "tol": tol},
        None if passed else Witness((best,) if best is not None else None, None, "rings", {"inradius": values[best] if values else None}),
        {"kappa0": kappa0, "r": r},
        wall_time=time.perf_counter() - t0,
    )


def duality_bridge(t: float, n: int = 2, resolution=(32, 32)) -> dict:
    """Cap of curvature kappa0 = coth t: its principal curvatures, their dual
    horospherical eigenvalues and e^{-2t}/2."""
    kappa0 = 1.0 / math.tanh(t)
    _, sample = build_cap(kappa0, 0.0, n, resolution)
    k = principal_curvatures(sample)
    lam = duality_eigenvalues(k)
    target = math.exp(-2 * t) / 2
    return {
        "kappa0": kappa0,
        "k_error": float(np.max(np.abs(k - kappa0))),
        "lambda_error": float(np.max(np.abs(lam - target))),
        "formula_error": abs(0.5 - 1.0 / (1.0 + kappa0) - target),
    }
