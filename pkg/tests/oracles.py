"""Independent reference values for the test-suite.

Nothing here imports the package: Schouten eigenvalues come from sympy
(Christoffel symbols in spherical coordinates), hyperbolic distances from the
Poincare-ball formula, sigma_k from brute-force products, caps from their
closed forms.
"""

from __future__ import annotations

import itertools
import math
from functools import lru_cache

import numpy as np
import sympy as sp

TH, PH = sp.symbols("theta phi", real=True)
X, Y, Z = sp.symbols("x y z", real=True)


def _on_sphere(expr):
    return expr.subs({X: sp.sin(TH) * sp.cos(PH), Y: sp.sin(TH) * sp.sin(PH), Z: sp.cos(TH)})


@lru_cache(maxsize=None)
def _schouten_functions(expr_text: str):
    """Lambdified (lambda_1, lambda_2, K) for rho given in ambient x, y, z."""
    rho = _on_sphere(sp.sympify(expr_text, locals={"x": X, "y": Y, "z": Z}))
    q = (TH, PH)
    g0 = sp.diag(1, sp.sin(TH) ** 2)
    ginv = g0.inv()
    Gam = [[[sum(ginv[k, l] * (sp.diff(g0[l, i], q[j]) + sp.diff(g0[l, j], q[i]) - sp.diff(g0[i, j], q[l])) / 2 for l in range(2)) for j in range(2)] for i in range(2)] for k in range(2)]
    d = [sp.diff(rho, v) for v in q]
    hess = sp.Matrix(2, 2, lambda i, j: sp.diff(rho, q[i], q[j]) - sum(Gam[k][i][j] * d[k] for k in range(2)))
    grad2 = sum(ginv[i, j] * d[i] * d[j] for i in range(2) for j in range(2))
    S = g0 / 2 + sp.Matrix(2, 2, lambda i, j: d[i] * d[j]) - hess - grad2 * g0 / 2
    # orthonormal frame (d_theta, d_phi / sin theta), then divide by e^{2 rho}
    F = sp.diag(1, 1 / sp.sin(TH))
    Sf = F * S * F
    tr = Sf[0, 0] + Sf[1, 1]
    det = Sf[0, 0] * Sf[1, 1] - Sf[0, 1] ** 2
    # Gaussian curvature of e^{2 rho} g0 straight from the metric
    lap = sum(
        sp.diff(sp.sin(TH) * ginv[i, i] * d[i], q[i]) for i in range(2)
    ) / sp.sin(TH)
    K = sp.exp(-2 * rho) * (1 - lap)
    f_tr = sp.lambdify((TH, PH), tr * sp.exp(-2 * rho), "numpy")
    f_det = sp.lambdify((TH, PH), det * sp.exp(-4 * rho), "numpy")
    f_K = sp.lambdify((TH, PH), K, "numpy")
    return f_tr, f_det, f_K


def schouten_eigs_2d(expr_text: str, theta, phi):
    """Sorted Schouten eigenvalues of e^{2 rho} g0 at spherical coordinates
    (theta, phi) about the north pole, plus the Gaussian curvature."""
    f_tr, f_det, f_K = _schouten_functions(expr_text)
    tr = np.broadcast_to(f_tr(theta, phi), np.broadcast(theta, phi).shape)
    det = np.broadcast_to(f_det(theta, phi), tr.shape)
    disc = np.sqrt(np.maximum(tr * tr / 4 - det, 0.0))
    lam = np.stack([tr / 2 - disc, tr / 2 + disc], axis=-1)
    return lam, np.broadcast_to(f_K(theta, phi), tr.shape)


def radial_schouten(expr_text: str, n: int, theta):
    """Schouten eigenvalues of e^{2 rho(theta)} g0 on S^n for radial rho."""
    r = sp.sympify(expr_text, locals={"theta": TH})
    d1, d2 = sp.diff(r, TH), sp.diff(r, TH, 2)
    lam_r = (sp.Rational(1, 2) + d1**2 - d2 - d1**2 / 2) * sp.exp(-2 * r)
    lam_t = (sp.Rational(1, 2) - d1 * sp.cos(TH) / sp.sin(TH) - d1**2 / 2) * sp.exp(-2 * r)
    a = sp.lambdify(TH, lam_r, "numpy")(theta)
    b = sp.lambdify(TH, lam_t, "numpy")(theta)
    lam = np.concatenate([np.atleast_1d(a)[:, None] * np.ones((1, 1)), np.repeat(np.atleast_1d(b)[:, None], n - 1, axis=1)], axis=1)
    return np.sort(lam, axis=-1)


def ball_distance(a, b):
    """Hyperbolic distance in the Poincare ball."""
    a, b = np.asarray(a, float), np.asarray(b, float)
    num = 2 * np.sum((a - b) ** 2, axis=-1)
    den = (1 - np.sum(a * a, axis=-1)) * (1 - np.sum(b * b, axis=-1))
    return np.arccosh(1 + num / den)


def sigma_brute(x, k):
    x = list(x)
    return sum(math.prod(c) for c in itertools.combinations(x, k))


def geodesic_sphere_closed_form(t):
    """phi scale, principal curvature, horospherical eigenvalue, horosphere
    level and Poincare-ball radius of the sphere rho = t."""
    return {
        "phi0": math.cosh(t),
        "phi_r": math.sinh(t),
        "k": 1 / math.tanh(t),
        "lambda": math.exp(-2 * t) / 2,
        "horo": -math.exp(-t),
        "ball": math.tanh(t / 2),
    }


def cap_level(t, r):
    return math.asinh(-math.exp(-t) / math.tan(r))


def representation_identities():
    """Symbolic check of the frame identities of the representation formula.

    Returns the simplified <phi,phi> + 1, <eta,eta> - 1, <phi,eta>, <psi,psi>
    for generic E > 0, unit x and tangent gradient (x = e_3 w.l.o.g.).
    """
    E = sp.symbols("E", positive=True)
    a, b = sp.symbols("a b", real=True)
    x = sp.Matrix([0, 0, 1])
    g = sp.Matrix([a, b, 0])
    G = a * a + b * b
    lp = sp.Matrix([1, 0, 0, 1])
    tail = sp.Matrix([0, *(g - x)])
    phi = E / 2 * (1 + (1 + G) / E**2) * lp + tail / E
    eta = phi - E * lp

    def dot(u, v):
        return -u[0] * v[0] + sum(u[i] * v[i] for i in range(1, 4))

    psi = phi - eta
    return [sp.simplify(dot(phi, phi) + 1), sp.simplify(dot(eta, eta) - 1), sp.simplify(dot(phi, eta)), sp.simplify(dot(psi, psi))]


def cap_inradius_fermi(kappa0, r):
    """Inradius of the (kappa0, r) cap ring inside P(r), from Fermi
    coordinates about P: a point at arclength u along P and signed height b
    is cosh b (cosh u, sinh u e) + sinh b N, so the ring on the sphere of
    radius R about the point at height h satisfies
    cosh b cosh u cosh h - sinh b sinh h = cosh R."""
    R = math.atanh(1 / kappa0)
    b = -r
    cos_a = -r / math.sqrt(1 + r * r)
    h = math.asinh(math.sinh(b) * math.cosh(R) + cos_a * math.sinh(R) * math.cosh(b))
    u = math.acosh((math.cosh(R) + math.sinh(b) * math.sinh(h)) / (math.cosh(b) * math.cosh(h)))
    return math.cosh(r) * u
