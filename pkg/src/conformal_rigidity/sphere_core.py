"""Discretized sphere domains, scalar/tensor fields and intrinsic operators.

Three charts are supported:

``polar``
    geodesic polar coordinates (theta, phi) about a centre point of S^2,
    theta in (0, r_max].  The rings sit at theta_i = (i + 1/2) h so the pole
    is never a grid point; the last ring lies exactly on the boundary circle.
``latlon``
    the full S^2 with theta_i = (i + 1/2) pi / N.
``radial``
    rotationally symmetric fields rho(theta) on a geodesic ball of S^n, any
    n >= 2 (for n >= 3 this is the only chart).

Derivatives in theta use finite-difference stencils (fourth order by
default) with ghost rows obtained by continuing across the poles
antipodally; derivatives in phi are spectral.  All operators return
quantities in the orthonormal frame (e_theta, e_phi) of the round metric.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
from scipy.interpolate import RectBivariateSpline, make_interp_spline
from scipy.special import gamma

from .report import NumericalError

CHARTS = ("polar", "latlon", "radial")
FIELD_FORMAT_VERSION = 1


class DomainError(ValueError):
    """Invalid domain parameters."""


def sphere_area(dim: int) -> float:
    """Area of the unit round sphere S^dim."""
    return 2.0 * math.pi ** ((dim + 1) / 2) / gamma((dim + 1) / 2)


def _unit(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    nv = np.linalg.norm(v)
    if nv == 0 or not np.isfinite(nv):
        raise DomainError("zero or non-finite direction vector")
    return v / nv


def _complete_frame(c: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Two unit vectors orthogonal to c and to each other (right-handed for R^3)."""
    dim = c.shape[0]
    basis = np.eye(dim)
    # reproduce the standard (e1, e2) frame when c is the north pole
    order = list(range(dim - 1)) + [dim - 1]
    vecs = []
    for k in order:
        w = basis[k] - np.dot(basis[k], c) * c
        for q in vecs:
            w = w - np.dot(w, q) * q
        if np.linalg.norm(w) > 1e-8:
            vecs.append(w / np.linalg.norm(w))
        if len(vecs) == 2:
            break
    u, v = vecs
    if dim == 3 and np.dot(np.cross(u, v), c) < 0:
        v = -v
    return u, v


def geodesic_distance(x, y) -> np.ndarray:
    """Great-circle distance between unit vectors (broadcasting)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    cross = np.linalg.norm(
        x - np.sum(x * y, axis=-1, keepdims=True) * y, axis=-1
    )
    return np.arctan2(cross, np.sum(x * y, axis=-1))


@dataclass(frozen=True)
class ExcludedBall:
    center: np.ndarray
    radius: float

    def to_dict(self) -> dict:
        return {"center": [float(c) for c in self.center], "radius": float(self.radius)}


# ---------------------------------------------------------------------------
# finite-difference machinery


def fd_weights(offsets: Sequence[int], deriv: int) -> np.ndarray:
    """Weights w with sum_j w_j f(x + o_j h) ~ h^deriv f^(deriv)(x)."""
    o = np.asarray(offsets, dtype=float)
    m = len(o)
    vander = np.vander(o, m, increasing=True).T  # rows: powers
    rhs = np.zeros(m)
    rhs[deriv] = math.factorial(deriv)
    return np.linalg.solve(vander, rhs)


def _stencil(i: int, lo: int, hi: int, size: int) -> np.ndarray:
    """Offsets of a window of `size` points around i within [lo, hi]."""
    half = size // 2
    start = min(max(i - half, lo), hi - size + 1)
    return np.arange(start, start + size) - i


@dataclass(eq=False)
class SphereDomain:
    """A structured grid on a subdomain of S^n (see module docstring)."""

    n: int
    chart: str
    resolution: tuple[int, ...]
    r_max: float
    center: np.ndarray
    excluded_balls: tuple[ExcludedBall, ...] = ()
    frame: tuple | None = None  # optional (u, v) completing the centre
    theta: np.ndarray = field(init=False, repr=False)
    phi: np.ndarray = field(init=False, repr=False)
    points: np.ndarray = field(init=False, repr=False)
    e_theta: np.ndarray = field(init=False, repr=False)
    e_phi: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        c = self.center
        if self.frame is None:
            self.u, self.v = _complete_frame(c)
        else:
            self.u, self.v = (np.asarray(w, dtype=float) for w in self.frame)
        nt = self.resolution[0]
        if self.full:
            self.h = math.pi / nt
        else:
            self.h = self.r_max / (nt - 0.5)
        self.theta = (np.arange(nt) + 0.5) * self.h
        st, ct = np.sin(self.theta), np.cos(self.theta)
        if self.is_radial:
            self.phi = np.zeros(1)
            self.dphi = 2 * math.pi
            self.points = ct[:, None] * c + st[:, None] * self.u
            self.e_theta = -st[:, None] * c + ct[:, None] * self.u
            self.e_phi = np.broadcast_to(self.v, self.points.shape).copy()
        else:
            nphi = self.resolution[1]
            self.dphi = 2 * math.pi / nphi
            self.phi = np.arange(nphi) * self.dphi
            cp, sp = np.cos(self.phi), np.sin(self.phi)
            radial = cp[None, :, None] * self.u + sp[None, :, None] * self.v
            self.points = ct[:, None, None] * c + st[:, None, None] * radial
            self.e_theta = -st[:, None, None] * c + ct[:, None, None] * radial
            tang = -sp[:, None] * self.u + cp[:, None] * self.v
            self.e_phi = np.broadcast_to(tang[None], self.points.shape).copy()
        self.mask = np.ones(self.shape, dtype=bool)
        for ball in self.excluded_balls:
            self.mask &= geodesic_distance(self.points, ball.center) > ball.radius
        self._qweights: np.ndarray | None = None

    # -- basic properties -------------------------------------------------
    @property
    def is_radial(self) -> bool:
        return self.chart == "radial"

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.resolution[0],) if self.is_radial else tuple(self.resolution[:2])

    @property
    def full(self) -> bool:
        """True when the chart covers the whole sphere (no outer boundary)."""
        return self.chart == "latlon" or (self.is_radial and self.r_max >= math.pi)

    @property
    def upper(self) -> str:
        return "pole" if self.full else "edge"

    @property
    def boundary_names(self) -> list[str]:
        names = [] if self.full else ["boundary"]
        return names + [f"ball:{i}" for i in range(len(self.excluded_balls))]

    @property
    def spacing(self) -> float:
        """Largest grid step (in radians of arc) over the chart."""
        if self.is_radial:
            return self.h
        return max(self.h, self.dphi * float(np.max(np.sin(self.theta))))

    def frame_to_ambient(self, vec: np.ndarray) -> np.ndarray:
        """Convert frame components (..., n) into ambient tangent vectors.

        On radial charts only the (e_theta, e_phi) part is materialised."""
        vec = np.asarray(vec)
        return vec[..., 0, None] * self.e_theta + vec[..., 1, None] * self.e_phi

    def chart_coords(self, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """(theta, phi) of ambient unit vectors y in this chart."""
        y = np.asarray(y, dtype=float)
        th = geodesic_distance(y, self.center)
        ph = np.mod(np.arctan2(y @ self.v, y @ self.u), 2 * math.pi)
        return th, ph

    def header(self) -> dict:
        return {
            "version": FIELD_FORMAT_VERSION,
            "n": self.n,
            "chart": self.chart,
            "sizes": list(self.resolution),
            "r_max": float(self.r_max),
            "excluded_balls": [b.to_dict() for b in self.excluded_balls],
        }

    # -- theta / phi derivative operators -----------------------------------
    def _ghosted(self, F: np.ndarray, ghost: int, sign) -> tuple[np.ndarray, int, int]:
        """Extend F along axis 0 with antipodal ghost rows."""
        rows_lo = []
        for k in range(ghost, 0, -1):
            g = F[k - 1]
            if not self.is_radial:
                g = np.roll(g, F.shape[1] // 2, axis=0)
            rows_lo.append(g * sign)
        rows_hi = []
        if self.upper == "pole":
            nt = F.shape[0]
            for k in range(1, ghost + 1):
                g = F[nt - k]
                if not self.is_radial:
                    g = np.roll(g, F.shape[1] // 2, axis=0)
                rows_hi.append(g * sign)
        parts = [np.stack(rows_lo)] if rows_lo else []
        parts.append(F)
        if rows_hi:
            parts.append(np.stack(rows_hi))
        return np.concatenate(parts, axis=0), len(rows_lo), len(rows_hi)

    def d_theta(self, F: np.ndarray, order: int = 4, sign=1.0):
        """First and second theta-derivatives of F (axis 0 = theta).

        `sign` is the factor picked up by the sampled quantity under the
        antipodal continuation across a pole (1 for scalars; per-component
        for vector data on radial charts).
        """
        if order not in (2, 4, 6):
            raise ValueError("order must be 2, 4 or 6")
        F = np.asarray(F, dtype=float)
        ghost = order // 2 + 1
        E, glo, ghi = self._ghosted(F, ghost, sign)
        nt = F.shape[0]
        lo, hi = 0, E.shape[0] - 1
        d1 = np.empty_like(F)
        d2 = np.empty_like(F)
        cache: dict[tuple, tuple[np.ndarray, np.ndarray]] = {}
        for i in range(nt):
            ie = i + glo
            off = _stencil(ie, lo, hi, order + 1)
            if off[0] != -(order // 2):
                off = _stencil(ie, lo, hi, order + 2)
            key = tuple(off)
            if key not in cache:
                cache[key] = (fd_weights(off, 1), fd_weights(off, 2))
            w1, w2 = cache[key]
            block = E[ie + off]
            d1[i] = np.tensordot(w1, block, axes=(0, 0))
            d2[i] = np.tensordot(w2, block, axes=(0, 0))
        return d1 / self.h, d2 / self.h**2

    def d_phi(self, F: np.ndarray):
        """Spectral first and second phi-derivatives (axis 1 = phi)."""
        F = np.asarray(F, dtype=float)
        if self.is_radial:
            z = np.zeros_like(F)
            return z, z.copy()
        m = F.shape[1]
        k = np.fft.rfftfreq(m, d=1.0 / m)
        shape = [1] * F.ndim
        shape[1] = k.size
        k = k.reshape(shape)
        Fh = np.fft.rfft(F, axis=1)
        k1 = k.copy()
        if m % 2 == 0:
            k1 = np.where(k == m // 2, 0.0, k1)
        d1 = np.fft.irfft(1j * k1 * Fh, n=m, axis=1)
        d2 = np.fft.irfft(-(k**2) * Fh, n=m, axis=1)
        return d1, d2

    def d_phi_theta(self, F: np.ndarray, order: int = 4):
        """Mixed derivative d^2 F / (dtheta dphi)."""
        Fp, _ = self.d_phi(F)
        # (theta, phi) -> (-theta, phi + pi) is the same point, so d/dphi
        # continues across the pole without a sign change
        d1, _ = self.d_theta(Fp, order=order)
        return d1

    # -- quadrature ---------------------------------------------------------
    def theta_weights(self) -> np.ndarray:
        """Weights W_i with sum_i W_i F(theta_i) ~ int F(theta) dtheta.

        F is assumed to be sin^{n-1}(theta) times a function that is smooth on
        the sphere; its ghost values across a pole then carry the factor
        (-1)^{n-1}.  Sixth-order piecewise Lagrange quadrature.
        """
        nt = self.resolution[0]
        h = self.h
        parity = (-1.0) ** (self.n - 1)
        g = 4
        lo = -g
        hi = nt - 1 + (g if self.upper == "pole" else 0)
        nodes = (np.arange(lo, hi + 1) + 0.5) * h
        R = math.pi if self.full else self.r_max
        breaks = np.concatenate([[0.0], self.theta[self.theta < R - 1e-14 * R], [R]])
        breaks = np.unique(breaks)
        w_ext = np.zeros(nodes.size)
        size = 6
        for a, b in zip(breaks[:-1], breaks[1:]):
            mid = 0.5 * (a + b)
            ic = int(np.argmin(np.abs(nodes - mid)))
            start = min(max(ic - size // 2, 0), nodes.size - size)
            idx = np.arange(start, start + size)
            z = (nodes[idx] - mid) / h
            za, zb = (a - mid) / h, (b - mid) / h
            p = np.arange(size)
            moments = (zb ** (p + 1) - za ** (p + 1)) / (p + 1)
            V = np.vander(z, size, increasing=True).T
            w_ext[idx] += np.linalg.solve(V, moments) * h
        w = np.zeros(nt)
        for j, idx in enumerate(range(lo, hi + 1)):
            if 0 <= idx < nt:
                w[idx] += w_ext[j]
            elif idx < 0:
                w[-idx - 1] += parity * w_ext[j]
            else:
                w[2 * nt - 1 - idx] += parity * w_ext[j]
        return w

    def area_weights(self) -> np.ndarray:
        """Quadrature weights for the round volume form on the grid."""
        if self._qweights is None:
            wt = self.theta_weights() * np.sin(self.theta) ** (self.n - 1)
            if self.is_radial:
                self._qweights = wt * sphere_area(self.n - 1)
            else:
                self._qweights = np.repeat(wt[:, None] * self.dphi, self.resolution[1], axis=1)
        return self._qweights

    # -- boundary rings -----------------------------------------------------
    def ring_points(self, name: str) -> tuple[np.ndarray, np.ndarray, float]:
        """(points, inward unit normals, round-metric radius) for a boundary ring.

        Inward means pointing into the domain.
        """
        if name == "boundary":
            if self.full:
                raise KeyError("full-sphere chart has no boundary")
            return self.points[-1], -self.e_theta[-1], self.r_max
        if name.startswith("ball:"):
            i = int(name.split(":", 1)[1])
            if not 0 <= i < len(self.excluded_balls):
                raise KeyError(f"unknown boundary component {name!r}")
            ball = self.excluded_balls[i]
            p, eps = ball.center, ball.radius
            u, v = _complete_frame(p)
            m = self.resolution[1] if not self.is_radial else 64
            a = np.arange(m) * 2 * math.pi / m
            dirs = np.cos(a)[:, None] * u + np.sin(a)[:, None] * v
            y = math.cos(eps) * p + math.sin(eps) * dirs
            nu = (math.cos(eps) * y - p) / math.sin(eps)
            return y, nu, eps
        raise KeyError(f"unknown boundary component {name!r}")

    def ring_mean_curvature0(self, name: str) -> float:
        """Round-metric mean curvature of a ring w.r.t. the inward normal."""
        _, _, r = self.ring_points(name)
        if name == "boundary":
            return 0.0 if abs(r - math.pi / 2) < 1e-14 else 1.0 / math.tan(r)
        return 0.0 if abs(r - math.pi / 2) < 1e-14 else -1.0 / math.tan(r)


def build_grid(
    n: int = 2,
    chart: str = "polar",
    resolution: int | Sequence[int] = (64, 64),
    r_max: float = math.pi / 2,
    center=None,
    excluded_balls: Sequence = (),
    frame=None,
) -> SphereDomain:
    """Validate parameters and construct a SphereDomain.

    ``excluded_balls`` items are ``(center, radius)`` pairs or ExcludedBall.
    For n >= 3 the polar chart is the rotationally symmetric radial chart.
    """
    if int(n) != n or n < 2:
        raise DomainError("dimension n must be an integer >= 2")
    n = int(n)
    if chart not in CHARTS:
        raise DomainError(f"unknown chart {chart!r}; expected one of {CHARTS}")
    if chart == "latlon" and n != 2:
        raise DomainError("latitude-longitude chart is only available for n = 2")
    if chart == "polar" and n >= 3:
        chart = "radial"
    res = (int(resolution),) if np.isscalar(resolution) else tuple(int(r) for r in resolution)
    if chart == "radial":
        res = res[:1]
    elif len(res) == 1:
        res = (res[0], res[0])
    if min(res) < 8:
        raise DomainError("resolution too small: need at least 8 points per coordinate")
    if chart != "radial" and res[1] % 2:
        raise DomainError("phi resolution must be even (antipodal ghost rows)")
    if chart == "latlon":
        r_max = math.pi
    elif chart == "radial" and r_max == math.pi:
        pass  # whole sphere, rotationally symmetric
    elif not 0.0 < r_max < math.pi:
        raise DomainError("radius out of range: r_max must lie in (0, pi)")
    dim = n + 1
    if center is None:
        c = np.zeros(dim)
        c[-1] = 1.0
    else:
        c = _unit(center)
        if c.shape != (dim,):
            raise DomainError(f"centre must have {dim} components")
    if chart == "latlon" and center is not None and not np.allclose(c, np.eye(dim)[-1]):
        raise DomainError("latitude-longitude chart is fixed to the north pole")
    balls: list[ExcludedBall] = []
    for item in excluded_balls:
        if isinstance(item, ExcludedBall):
            bc, br = item.center, item.radius
        elif isinstance(item, dict):
            bc, br = item["center"], item["radius"]
        else:
            bc, br = item
        bc = _unit(bc)
        if bc.shape != (dim,):
            raise DomainError(f"excluded ball centre must have {dim} components")
        if not 0.0 < br < math.pi:
            raise DomainError("radius out of range: excluded ball radius must lie in (0, pi)")
        balls.append(ExcludedBall(bc, float(br)))
    if balls and chart == "radial":
        raise DomainError("excluded balls require a two-dimensional chart")
    for i in range(len(balls)):
        for j in range(i + 1, len(balls)):
            d = float(geodesic_distance(balls[i].center, balls[j].center))
            if d <= balls[i].radius + balls[j].radius:
                raise DomainError(f"overlapping boundary balls {i} and {j}")
    if chart == "polar":
        for i, b in enumerate(balls):
            if float(geodesic_distance(b.center, c)) + b.radius >= r_max:
                raise DomainError(f"excluded ball {i} is not inside the polar chart")
    if frame is not None:
        u, v = (np.asarray(w, dtype=float) for w in frame)
        if abs(u @ v) > 1e-12 or abs(u @ c) > 1e-12 or abs(v @ c) > 1e-12:
            raise DomainError("chart frame must be orthonormal and orthogonal to the centre")
        frame = (u / np.linalg.norm(u), v / np.linalg.norm(v))
    return SphereDomain(n, chart, res, float(r_max), c, tuple(balls), frame)


# ---------------------------------------------------------------------------
# fields


@dataclass(eq=False)
class FieldGrid:
    """Scalar samples on a SphereDomain, optionally with an analytic source."""

    domain: SphereDomain
    values: np.ndarray
    generator: Callable[[np.ndarray], np.ndarray] | None = None
    tag: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != self.domain.shape:
            raise ValueError(
                f"sample shape {self.values.shape} does not match grid {self.domain.shape}"
            )
        if not np.all(np.isfinite(self.values)):
            raise NumericalError("field samples must be finite")

    @classmethod
    def from_function(cls, domain: SphereDomain, fn, tag: dict | None = None) -> "FieldGrid":
        return cls(domain, fn(domain.points), generator=fn, tag=dict(tag or {}))

    def shifted(self, t: float) -> "FieldGrid":
        gen = None
        if self.generator is not None:
            base = self.generator
            gen = lambda y, base=base, t=t: base(y) + t  # noqa: E731
        tag = dict(self.tag)
        tag["shift"] = tag.get("shift", 0.0) + float(t)
        return FieldGrid(self.domain, self.values + t, gen, tag)

    def evaluate(self, y: np.ndarray, with_gradient: bool = False):
        """Value (and ambient tangent gradient) at arbitrary points y of the chart.

        Uses the analytic generator when present, a quintic spline otherwise.
        """
        y = np.asarray(y, dtype=float)
        if self.generator is not None:
            val = np.asarray(self.generator(y), dtype=float)
            if not with_gradient:
                return val
            return val, tangent_gradient(self.generator, y)
        return self._spline_eval(y, with_gradient)

    def _spline_eval(self, y, with_gradient):
        dom = self.domain
        th, ph = dom.chart_coords(y)
        if not dom.full and np.any(th > dom.r_max + 1e-9):
            raise ValueError("evaluation point outside the chart")
        if dom.is_radial:
            g = 4
            ext_t = np.concatenate([-dom.theta[g - 1 :: -1], dom.theta])
            ext_v = np.concatenate([self.values[g - 1 :: -1], self.values])
            spl = make_interp_spline(ext_t, ext_v, k=5)
            val = spl(th)
            if not with_gradient:
                return val
            d = spl.derivative()(th)
            st = np.sin(th)
            ct = np.cos(th)
            radial = y - ct[..., None] * dom.center
            with np.errstate(invalid="ignore", divide="ignore"):
                et = (ct[..., None] * radial / np.where(st > 0, st, 1)[..., None]) - st[..., None] * dom.center
            return val, d[..., None] * et
        spl = self._spline()
        val = spl.ev(th, ph)
        if not with_gradient:
            return val
        dt = spl.ev(th, ph, dx=1)
        dp = spl.ev(th, ph, dy=1)
        st, ct = np.sin(th), np.cos(th)
        cp, sp = np.cos(ph), np.sin(ph)
        radial = cp[..., None] * dom.u + sp[..., None] * dom.v
        et = -st[..., None] * dom.center + ct[..., None] * radial
        ep = -sp[..., None] * dom.u + cp[..., None] * dom.v
        grad = dt[..., None] * et + (dp / st)[..., None] * ep
        return val, grad

    def _spline(self):
        if getattr(self, "_spl", None) is None:
            dom = self.domain
            g = 4
            vals = self.values
            half = vals.shape[1] // 2
            lo = np.roll(vals[g - 1 :: -1], half, axis=1)
            th = [-dom.theta[g - 1 :: -1]]
            parts = [lo]
            th.append(dom.theta)
            parts.append(vals)
            if dom.upper == "pole":
                hi = np.roll(vals[: -g - 1 : -1], half, axis=1)
                th.append(2 * math.pi - dom.theta[: -g - 1 : -1])
                parts.append(hi)
            T = np.concatenate(th)
            V = np.concatenate(parts, axis=0)
            P = np.concatenate([dom.phi[-g:] - 2 * math.pi, dom.phi, dom.phi[:g] + 2 * math.pi])
            V = np.concatenate([V[:, -g:], V, V[:, :g]], axis=1)
            self._spl = RectBivariateSpline(T, P, V, kx=5, ky=5, s=0)
        return self._spl


def tangent_gradient(fn, y: np.ndarray, step: float = 1e-5) -> np.ndarray:
    """Tangent gradient of a function on the sphere (ambient vectors), from
    central differences along great circles in an orthonormal tangent basis."""
    y = np.asarray(y, dtype=float)
    dim = y.shape[-1]
    flat = y.reshape(-1, dim)
    out = np.zeros_like(flat)
    eye = np.eye(dim)
    basis = []
    for k in range(dim):
        w = eye[k] - (flat @ eye[k])[:, None] * flat
        for b in basis:
            w = w - np.sum(w * b, axis=1, keepdims=True) * b
        nw = np.linalg.norm(w, axis=1, keepdims=True)
        basis.append(np.where(nw > 1e-3, w / np.where(nw > 1e-3, nw, 1), 0.0))
    for b in basis:
        yp = math.cos(step) * flat + math.sin(step) * b
        ym = math.cos(step) * flat - math.sin(step) * b
        dd = (np.asarray(fn(yp)).reshape(-1) - np.asarray(fn(ym)).reshape(-1)) / (2 * step)
        out += dd[:, None] * b
    return out.reshape(y.shape)


# ---------------------------------------------------------------------------
# tensors and differential operators


@dataclass(eq=False)
class SymTensorField:
    domain: SphereDomain
    matrices: np.ndarray  # (*shape, n, n) in the (e_theta, e_phi, ...) frame

    def __post_init__(self) -> None:
        m = self.matrices
        if m.shape != self.domain.shape + (self.domain.n, self.domain.n):
            raise ValueError("tensor shape does not match grid")

    def symmetry_defect(self) -> float:
        m = self.matrices
        return float(np.max(np.abs(m - np.swapaxes(m, -1, -2)))) if m.size else 0.0


def _radial_derivs(rho: FieldGrid, order: int):
    return rho.domain.d_theta(rho.values, order=order)


def gradient(rho: FieldGrid, order: int = 4) -> np.ndarray:
    """Intrinsic gradient in the orthonormal frame, shape (*grid, n)."""
    dom = rho.domain
    out = np.zeros(dom.shape + (dom.n,))
    if dom.is_radial:
        d1, _ = _radial_derivs(rho, order)
        out[..., 0] = d1
        return out
    dt, _ = dom.d_theta(rho.values, order=order)
    dp, _ = dom.d_phi(rho.values)
    out[..., 0] = dt
    out[..., 1] = dp / np.sin(dom.theta)[:, None]
    return out


def gradient_ambient(rho: FieldGrid, order: int = 4) -> np.ndarray:
    """Intrinsic gradient as an ambient tangent vector field."""
    dom = rho.domain
    g = gradient(rho, order)
    return g[..., 0, None] * dom.e_theta + (
        0.0 if dom.is_radial else g[..., 1, None] * dom.e_phi
    )


def hessian(rho: FieldGrid, order: int = 4) -> SymTensorField:
    """Covariant Hessian w.r.t. the round metric, orthonormal frame."""
    dom = rho.domain
    n = dom.n
    st = np.sin(dom.theta)
    ct = np.cos(dom.theta)
    H = np.zeros(dom.shape + (n, n))
    if dom.is_radial:
        d1, d2 = _radial_derivs(rho, order)
        H[..., 0, 0] = d2
        cot = d1 * ct / st
        for k in range(1, n):
            H[..., k, k] = cot
        return SymTensorField(dom, H)
    v = rho.values
    dt, dtt = dom.d_theta(v, order=order)
    dp, dpp = dom.d_phi(v)
    dtp = dom.d_phi_theta(v, order=order)
    s = st[:, None]
    c = ct[:, None]
    H[..., 0, 0] = dtt
    off = (dtp - c / s * dp) / s
    H[..., 0, 1] = off
    H[..., 1, 0] = off
    H[..., 1, 1] = (dpp + s * c * dt) / s**2
    return SymTensorField(dom, H)


def normal_derivative(rho: FieldGrid, name: str, order: int = 4):
    """(values, d rho / d nu) on a boundary ring, nu the inward unit normal."""
    dom = rho.domain
    if name == "boundary":
        if dom.full:
            raise KeyError("full-sphere chart has no boundary")
        d1, _ = dom.d_theta(rho.values, order=order)
        return rho.values[-1].copy(), -d1[-1]
    y, nu, _ = dom.ring_points(name)
    val, grad = rho.evaluate(y, with_gradient=True)
    return np.asarray(val), np.sum(grad * nu, axis=-1)


def integrate(
    field: FieldGrid,
    measure: str = "round",
    region: str = "interior",
    conformal_factor: FieldGrid | None = None,
) -> float:
    """Integrate a sampled field over the interior or along a boundary ring.

    measure "conformal" uses e^{n rho} dv (interior) or e^{(n-1) rho} ds
    (rings), with rho = conformal_factor.
    """
    dom = field.domain
    if measure not in ("round", "conformal"):
        raise ValueError(f"unknown measure {measure!r}")
    if measure == "conformal" and conformal_factor is None:
        raise ValueError("conformal measure requires a conformal factor")
    n = dom.n
    if region == "interior":
        f = field.values
        if measure == "conformal":
            f = f * np.exp(n * conformal_factor.values)
        w = dom.area_weights() * dom.mask
        return float(np.sum(w * f))
    if region.startswith("ring:"):
        if dom.is_radial:
            raise KeyError("ring regions need a two-dimensional chart")
        i = int(region.split(":", 1)[1])
        if not 0 <= i < dom.resolution[0]:
            raise KeyError(f"unknown region {region!r}")
        f = field.values[i]
        if measure == "conformal":
            f = f * np.exp(conformal_factor.values[i])
        return float(np.sum(f) * dom.dphi * math.sin(dom.theta[i]))
    if region not in dom.boundary_names:
        raise KeyError(f"unknown region {region!r}")
    y, _, r = dom.ring_points(region)
    if region == "boundary":
        f = field.values[-1]
        rho_b = conformal_factor.values[-1] if measure == "conformal" else 0.0
    else:
        f = field.evaluate(y)
        rho_b = conformal_factor.evaluate(y) if measure == "conformal" else 0.0
    f = np.asarray(f) * np.exp((n - 1) * np.asarray(rho_b))
    radius = math.sin(r) ** (n - 1)
    if dom.is_radial:
        return float(f * radius * sphere_area(n - 1))
    return float(np.mean(f) * 2 * math.pi * radius)


# ---------------------------------------------------------------------------
# field files


def write_field(path: str | Path, rho: FieldGrid) -> tuple[Path, Path]:
    """Write a JSON header plus CSV samples (same stem, .csv)."""
    path = Path(path)
    header = rho.domain.header()
    if not np.allclose(rho.domain.center, np.eye(rho.domain.n + 1)[-1]):
        raise ValueError("field files assume charts centred at the north pole")
    path.write_text(json.dumps(header, indent=2) + "\n")
    data = path.with_suffix(".csv")
    vals = np.atleast_2d(rho.values) if not rho.domain.is_radial else rho.values[:, None]
    lines = [",".join(repr(float(x)) for x in row) for row in vals]
    data.write_text("\n".join(lines) + "\n")
    return path, data


HEADER_KEYS = {"version", "n", "chart", "sizes", "r_max", "excluded_balls"}


def read_field(path: str | Path) -> FieldGrid:
    path = Path(path)
    header = json.loads(path.read_text())
    unknown = set(header) - HEADER_KEYS
    missing = HEADER_KEYS - set(header)
    if unknown:
        raise ValueError(f"unknown field header keys: {sorted(unknown)}")
    if missing:
        raise ValueError(f"missing field header keys: {sorted(missing)}")
    if header["version"] != FIELD_FORMAT_VERSION:
        raise ValueError(f"unsupported field format version {header['version']}")
    dom = build_grid(
        n=header["n"],
        chart=header["chart"],
        resolution=header["sizes"],
        r_max=header["r_max"] if header["chart"] != "latlon" else math.pi / 2,
        excluded_balls=header["excluded_balls"],
    )
    data = path.with_suffix(".csv")
    vals = np.loadtxt(data, delimiter=",", ndmin=2)
    if dom.is_radial:
        vals = vals.reshape(-1)
    return FieldGrid(dom, vals, tag={"kind": "file", "path": str(path)})
