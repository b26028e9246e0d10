"""Minkowski-space primitives for the hyperboloid model of H^{n+1}.

Vectors are arrays whose last axis holds (x_0, x_1, ..., x_{n+1}) with
<x, y> = -x_0 y_0 + sum_i x_i y_i.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


def minkowski_dot(a, b) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return -a[..., 0] * b[..., 0] + np.sum(a[..., 1:] * b[..., 1:], axis=-1)


def light_point(x) -> np.ndarray:
    """(1, x) for points x of the ideal boundary S^n."""
    x = np.asarray(x, dtype=float)
    return np.concatenate([np.ones(x.shape[:-1] + (1,)), x], axis=-1)


def to_ball(p) -> np.ndarray:
    """Central projection of the hyperboloid onto the Poincare ball."""
    p = np.asarray(p, dtype=float)
    return p[..., 1:] / (1.0 + p[..., :1])


def from_ball(b) -> np.ndarray:
    b = np.asarray(b, dtype=float)
    r2 = np.sum(b * b, axis=-1, keepdims=True)
    if np.any(r2 >= 1.0):
        raise ValueError("ball coordinates must lie in the open unit ball")
    return np.concatenate([(1 + r2), 2 * b], axis=-1) / (1 - r2)


def hyperbolic_distance(p, q) -> np.ndarray:
    """d = 2 asinh(|p - q| / 2), with |p - q|^2 = 2 cosh d - 2 on the hyperboloid.

    Better conditioned than arccosh(-<p, q>) for nearby points."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    diff = p - q
    return 2.0 * np.arcsinh(0.5 * np.sqrt(np.maximum(minkowski_dot(diff, diff), 0.0)))


def axis_point(s: float, axis) -> np.ndarray:
    """gamma(s): the point at distance s from the origin along `axis`."""
    a = np.asarray(axis, dtype=float)
    return np.concatenate([[math.cosh(s)], math.sinh(s) * a])


def boost(p, s: float, axis) -> np.ndarray:
    """Hyperbolic translation T_s of length s along the geodesic through the
    origin towards the ideal point `axis`.  Acts on any Minkowski vectors."""
    p = np.asarray(p, dtype=float)
    a = np.asarray(axis, dtype=float)
    a = a / np.linalg.norm(a)
    ch, sh = math.cosh(s), math.sinh(s)
    x0 = p[..., 0]
    ya = p[..., 1:] @ a
    out = p.copy()
    out[..., 0] = ch * x0 + sh * ya
    out[..., 1:] = p[..., 1:] + ((sh * x0 + ch * ya) - ya)[..., None] * a
    return out


def moebius_map(x, s: float, axis) -> tuple[np.ndarray, np.ndarray]:
    """Boundary action of T_s on S^n: returns (image points, conformal factor).

    The factor is e^{m} with T_s^* g0 = e^{2m} g0 at x.
    """
    x = np.asarray(x, dtype=float)
    a = np.asarray(axis, dtype=float)
    a = a / np.linalg.norm(a)
    ch, sh = math.cosh(s), math.sinh(s)
    xa = x @ a
    den = ch + sh * xa
    y = (x + ((ch - 1.0) * xa + sh)[..., None] * a) / den[..., None]
    return y, 1.0 / den


# ---------------------------------------------------------------------------
# geodesic objects

KINDS = ("hyperplane", "equidistant", "horosphere", "sphere", "line", "cylinder", "point")


@dataclass
class GeodesicObject:
    """Totally geodesic / umbilic objects of H^{n+1} given by Minkowski data.

    hyperplane / equidistant: unit spacelike normal N (and level b);
    horosphere: ideal point x and level t, {p : <p,(1,x)> = -e^{-t}};
    sphere / point: centre q (and radius);
    line / cylinder: timelike unit u and spacelike unit v spanning the line
    (and radius).
    """

    kind: str
    data: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"unknown geodesic object kind {self.kind!r}")
        d = self.data
        for key, val in list(d.items()):
            if isinstance(val, (list, tuple, np.ndarray)):
                d[key] = np.asarray(val, dtype=float)
        if self.kind in ("hyperplane", "equidistant"):
            N = d["N"]
            nn = minkowski_dot(N, N)
            if nn <= 0:
                raise ValueError("hyperplane normal must be spacelike")
            d["N"] = N / math.sqrt(nn)
        if self.kind in ("line", "cylinder"):
            u, v = d["u"], d["v"]
            if abs(minkowski_dot(u, u) + 1) > 1e-9 or abs(minkowski_dot(v, v) - 1) > 1e-9:
                raise ValueError("line basis must be (timelike unit, spacelike unit)")
            if abs(minkowski_dot(u, v)) > 1e-9:
                raise ValueError("line basis vectors must be orthogonal")

    # convenience constructors
    @classmethod
    def hyperplane(cls, N) -> "GeodesicObject":
        return cls("hyperplane", {"N": N})

    @classmethod
    def equidistant(cls, N, b: float) -> "GeodesicObject":
        return cls("equidistant", {"N": N, "b": float(b)})

    @classmethod
    def horosphere(cls, x, t: float) -> "GeodesicObject":
        return cls("horosphere", {"x": x, "t": float(t)})

    @classmethod
    def sphere(cls, q, radius: float) -> "GeodesicObject":
        return cls("sphere", {"q": q, "radius": float(radius)})

    @classmethod
    def point(cls, q) -> "GeodesicObject":
        return cls("point", {"q": q})

    @classmethod
    def axis_line(cls, axis) -> "GeodesicObject":
        """Geodesic through the origin with ideal endpoints +-axis."""
        a = np.asarray(axis, dtype=float)
        u = np.zeros(a.size + 1)
        u[0] = 1.0
        return cls("line", {"u": u, "v": np.concatenate([[0.0], a / np.linalg.norm(a)])})

    @classmethod
    def cylinder(cls, axis, radius: float) -> "GeodesicObject":
        line = cls.axis_line(axis)
        return cls("cylinder", {"u": line.data["u"], "v": line.data["v"], "radius": float(radius)})


def signed_distance(p, obj: GeodesicObject) -> np.ndarray:
    """Signed distance from hyperboloid points p to a geodesic object.

    Hyperplanes: positive on the side N points to; equidistants: distance to
    the hyperplane minus b; horospheres: negative inside the horoball;
    spheres/cylinders: negative inside.
    """
    p = np.asarray(p, dtype=float)
    d = obj.data
    k = obj.kind
    if k in ("hyperplane", "equidistant"):
        val = np.arcsinh(minkowski_dot(p, d["N"]))
        return val - d.get("b", 0.0) if k == "equidistant" else val
    if k == "horosphere":
        return np.log(-minkowski_dot(p, light_point(d["x"]))) + d["t"]
    if k in ("point", "sphere"):
        val = hyperbolic_distance(p, d["q"])
        return val - d.get("radius", 0.0)
    pu = minkowski_dot(p, d["u"])
    pv = minkowski_dot(p, d["v"])
    val = np.arccosh(np.sqrt(np.maximum(pu * pu - pv * pv, 1.0)))
    return val - d.get("radius", 0.0) if k == "cylinder" else val
