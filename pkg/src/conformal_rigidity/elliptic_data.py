"""Elliptic data (f, Gamma): symmetric, positive, degree-one homogeneous,
monotone curvature functions on cones between Gamma_n and Gamma_1,
normalised by f(1, ..., 1) = 2."""

from __future__ import annotations

import itertools
import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import mpmath
import numpy as np

from .report import CheckReport, Witness, SCALING_NOTE, combine


def elementary_symmetric(x, k: int):
    """sigma_0..sigma_k of the last axis of x (numpy) or of a list (mpmath).

    Uses the recursion e_j <- e_j + x_i e_{j-1}, exact for any number type.
    """
    if isinstance(x, (list, tuple)):
        e = [mpmath.mpf(1)] + [mpmath.mpf(0)] * k
        for xi in x:
            for j in range(k, 0, -1):
                e[j] = e[j] + xi * e[j - 1]
        return e
    x = np.asarray(x, dtype=float)
    e = [np.ones(x.shape[:-1])] + [np.zeros(x.shape[:-1]) for _ in range(k)]
    for i in range(x.shape[-1]):
        xi = x[..., i]
        for j in range(k, 0, -1):
            e[j] = e[j] + xi * e[j - 1]
    return e


def sigma(x, k: int):
    return elementary_symmetric(x, k)[k]


@dataclass
class EllipticData:
    n: int
    f: Callable  # numpy evaluator on (..., n); nan outside the cone
    cone: Callable  # numpy predicate on (..., n)
    family: str
    params: dict = field(default_factory=dict)
    concave: bool = False
    f_mp: Callable | None = None  # evaluator on python lists of mpf
    cone_mp: Callable | None = None
    validated: bool = False

    def __call__(self, x):
        return self.f(x)

    def describe(self) -> str:
        if self.family == "sigma_k":
            return f"sigma_k:k={self.params['k']}"
        return f"{self.family}:{json.dumps(self.params, sort_keys=True)}"

    def require_usable(self) -> None:
        if self.family == "user" and not self.validated:
            raise ValueError("user-supplied elliptic data must pass validate_axioms before use")


def gaarding_cone(x, k: int) -> np.ndarray:
    e = elementary_symmetric(x, k)
    ok = np.ones(np.shape(x)[:-1], dtype=bool)
    for j in range(1, k + 1):
        ok &= e[j] > 0
    return ok


def make_sigma_k(n: int, k: int) -> EllipticData:
    """f = c_k sigma_k^{1/k}, c_k = 2 / C(n,k)^{1/k}, on the Garding cone Gamma_k."""
    if int(n) != n or n < 1:
        raise ValueError("dimension must be a positive integer")
    if not (isinstance(k, (int, np.integer)) and 1 <= k <= n):
        raise ValueError(f"k out of range: need 1 <= k <= n = {n}")
    ck = 2.0 / math.comb(n, k) ** (1.0 / k)
    ck_mp = mpmath.mpf(2) / mpmath.mpf(math.comb(n, k)) ** (mpmath.mpf(1) / k)

    def f(x):
        x = np.asarray(x, dtype=float)
        e = elementary_symmetric(x, k)
        ok = np.ones(x.shape[:-1], dtype=bool)
        for j in range(1, k + 1):
            ok &= e[j] > 0
        with np.errstate(invalid="ignore"):
            val = ck * np.power(np.where(ok, e[k], np.nan), 1.0 / k)
        return val

    def cone(x):
        return gaarding_cone(x, k)

    def f_mp(x):
        e = elementary_symmetric(list(x), k)
        if any(e[j] <= 0 for j in range(1, k + 1)):
            return mpmath.mpf(0) if e[k] == 0 else mpmath.nan
        return ck_mp * e[k] ** (mpmath.mpf(1) / k)

    def cone_mp(x):
        e = elementary_symmetric(list(x), k)
        return all(e[j] > 0 for j in range(1, k + 1))

    return EllipticData(n, f, cone, "sigma_k", {"k": int(k)}, True, f_mp, cone_mp, True)


def make_weighted_sum(n: int, weights: dict[int, float]) -> EllipticData:
    """Convex combination sum_k w_k f_k of normalised sigma_k data on Gamma_{max k}.

    Only weights concentrated on a single k give valid elliptic data: a lower
    sigma_j term does not vanish on the boundary of Gamma_{max k}, which
    validate_axioms reports as a boundary-vanishing failure.
    """
    w = {int(k): float(v) for k, v in weights.items()}
    if not w or any(v < 0 for v in w.values()) or sum(w.values()) <= 0:
        raise ValueError("weights must be non-negative with positive sum")
    tot = sum(w.values())
    parts = {k: make_sigma_k(n, k) for k in w}
    kmax = max(w)

    def f(x):
        return sum((w[k] / tot) * parts[k].f(x) for k in w) + np.where(gaarding_cone(x, kmax), 0.0, np.nan)

    def f_mp(x):
        if not parts[kmax].cone_mp(x):
            return mpmath.mpf(0)
        return sum(mpmath.mpf(w[k] / tot) * parts[k].f_mp(x) for k in w)

    return EllipticData(
        n, f, parts[kmax].cone, "weighted_sum", {str(k): v for k, v in sorted(w.items())}, True, f_mp, parts[kmax].cone_mp, True
    )


def make_min(n: int, ks) -> EllipticData:
    """Pointwise minimum of normalised sigma_k data (concave, on Gamma_{max k})."""
    ks = sorted({int(k) for k in ks})
    parts = [make_sigma_k(n, k) for k in ks]
    top = parts[-1]

    def f(x):
        return np.min(np.stack([p.f(x) for p in parts]), axis=0)

    def f_mp(x):
        if not top.cone_mp(x):
            return mpmath.mpf(0)
        return min(p.f_mp(x) for p in parts)

    return EllipticData(n, f, top.cone, "min_normalized", {"ks": ks}, True, f_mp, top.cone_mp, True)


def make_user(n: int, expr: str, cone: str, concave: bool = False) -> EllipticData:
    """User-supplied f and cone as sympy expressions in x1..xn.

    The cone is a relational (or And/Or of relationals); sigma1..sigman are
    available as names.  The data must be validated before use.
    """
    import sympy

    xs = sympy.symbols(" ".join(f"x{i + 1}" for i in range(n)))
    xs = xs if isinstance(xs, tuple) else (xs,)
    names = {f"x{i + 1}": xs[i] for i in range(n)}
    for k in range(1, n + 1):
        names[f"sigma{k}"] = sum(sympy.Mul(*c) for c in itertools.combinations(xs, k))
    try:
        fe = sympy.sympify(expr, locals=names)
        ce = sympy.sympify(cone, locals=names)
    except (sympy.SympifyError, SyntaxError, TypeError) as exc:
        raise ValueError(f"cannot parse elliptic data expression: {exc}") from exc
    if not isinstance(ce, (sympy.logic.boolalg.Boolean, sympy.core.relational.Relational)):
        raise ValueError("cone predicate must be a relational expression")
    f_np = sympy.lambdify(xs, fe, "numpy")
    c_np = sympy.lambdify(xs, ce, "numpy")
    f_m = sympy.lambdify(xs, fe, "mpmath")
    c_m = sympy.lambdify(xs, ce, "mpmath")

    def cone_fn(x):
        x = np.asarray(x, dtype=float)
        out = c_np(*np.moveaxis(x, -1, 0))
        return np.broadcast_to(np.asarray(out, dtype=bool), x.shape[:-1]).copy()

    def f(x):
        x = np.asarray(x, dtype=float)
        with np.errstate(all="ignore"):
            val = np.broadcast_to(np.asarray(f_np(*np.moveaxis(x, -1, 0)), dtype=float), x.shape[:-1])
        return np.where(cone_fn(x), val, np.nan)

    def f_mp(x):
        return f_m(*x)

    def cone_mp(x):
        return bool(c_m(*x))

    return EllipticData(n, f, cone_fn, "user", {"f": expr, "cone": cone}, concave, f_mp, cone_mp, False)


def parse_elliptic_spec(spec: str, n: int, base: Path | None = None) -> EllipticData:
    """`sigma_k:k=2`, `weighted_sum:1=0.5,2=0.5`, `min:ks=1,2`, `file:<path>`.

    The file holds JSON {"f": expr, "cone": predicate, "concave": bool}.
    """
    kind, _, rest = spec.partition(":")
    kind = kind.strip()
    if kind == "sigma_k":
        args = dict(p.split("=", 1) for p in rest.split(",") if p)
        if set(args) != {"k"}:
            raise ValueError("sigma_k spec needs exactly k=<int>")
        return make_sigma_k(n, int(args["k"]))
    if kind == "weighted_sum":
        args = dict(p.split("=", 1) for p in rest.split(",") if p)
        return make_weighted_sum(n, {int(k): float(v) for k, v in args.items()})
    if kind == "min":
        args = dict(p.split("=", 1) for p in rest.split(";") if p)
        return make_min(n, [int(v) for v in args.get("ks", "").split(",") if v])
    if kind == "file":
        path = Path(rest)
        if base is not None and not path.is_absolute():
            path = base / path
        data = json.loads(path.read_text())
        unknown = set(data) - {"f", "cone", "concave"}
        if unknown or "f" not in data or "cone" not in data:
            raise ValueError("elliptic data file needs keys f, cone (and optional concave)")
        return make_user(n, data["f"], data["cone"], bool(data.get("concave", False)))
    raise ValueError(f"unknown elliptic data spec {spec!r}")


# ---------------------------------------------------------------------------
# axiom validation


def sample_cone(d: EllipticData, count: int, rng: np.random.Generator) -> np.ndarray:
    """Random points of the cone: directions biased towards the diagonal,
    magnitudes spread over two decades."""
    n = d.n
    out = []
    have = 0
    diag = np.ones(n) / math.sqrt(n)
    for _ in range(200):
        m = max(4 * (count - have), 64)
        u = rng.normal(size=(m, n))
        u /= np.linalg.norm(u, axis=1, keepdims=True)
        c = rng.uniform(0.0, 3.0, size=(m, 1))
        v = u + c * diag
        v /= np.linalg.norm(v, axis=1, keepdims=True)
        x = v * np.exp(rng.uniform(math.log(0.1), math.log(10.0), size=(m, 1)))
        x = x[d.cone(x)]
        out.append(x)
        have += len(x)
        if have >= count:
            break
    pts = np.concatenate(out)[:count]
    if len(pts) < count:
        raise ValueError("could not sample the cone (is the predicate ever true?)")
    return pts


def _boundary_point(d: EllipticData, x: np.ndarray, dps: int = 50):
    """Bisect along x - tau (1,..,1) for the first exit from the cone (mpmath)."""
    with mpmath.workdps(dps):
        xs = [mpmath.mpf(float(v)) for v in x]
        one = mpmath.mpf(1)
        lo, hi = mpmath.mpf(0), mpmath.mpf(float(np.sum(x)) / d.n) + one  # sum<0 beyond hi
        for _ in range(4 * dps):
            mid = (lo + hi) / 2
            if d.cone_mp([v - mid for v in xs]):
                lo = mid
            else:
                hi = mid
        inside = [v - lo for v in xs]
        val = d.f_mp(inside)
        return float(lo), abs(float(val))


def validate_axioms(d: EllipticData, samples: int = 10_000, seed: int = 0, tol: float = 1e-8, boundary_samples: int = 200) -> CheckReport:
    """Randomised verification of the seven elliptic-data axioms."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    n = d.n
    X = sample_cone(d, samples, rng)
    F = d.f(X)
    parts = []

    def report(name, viol, idx=None, detail=None, passed=None):
        ok = (viol <= tol) if passed is None else passed
        wit = None
        if not ok and idx is not None:
            wit = Witness((int(idx),), tuple(float(v) for v in X[idx]), "cone sample", detail or {})
        elif not ok:
            wit = Witness(None, None, name, detail or {})
        parts.append(CheckReport(name, ok, {"worst_violation": float(viol)}, wit))

    # 1. Gamma_n in Gamma in Gamma_1
    P = np.exp(rng.uniform(math.log(1e-3), math.log(10.0), size=(samples, n)))
    miss = ~d.cone(P)
    s1 = np.sum(X, axis=-1)
    v1 = float(np.sum(miss) + np.sum(s1 <= 0))
    idx = int(np.argmin(s1)) if np.any(s1 <= 0) else None
    report("cone_sandwich", v1, idx, {"gamma_n_points_outside": int(np.sum(miss))}, passed=v1 == 0)
    # 2. symmetry
    perms = np.array([rng.permutation(n) for _ in range(len(X))])
    Fp = d.f(np.take_along_axis(X, perms, axis=1))
    rel = np.abs(Fp - F) / np.maximum(np.abs(F), 1e-300)
    rel = np.where(np.isfinite(rel), rel, np.inf)
    j = int(np.argmax(rel))
    report("symmetry", float(rel[j]), j, {"permutation": perms[j].tolist()})
    # 3. positivity
    finite = np.isfinite(F)
    pos_v = float(np.max(np.where(finite, np.maximum(0.0, -F), np.inf)))
    j = int(np.argmin(np.where(finite, F, -np.inf)))
    report("positivity", pos_v, j, {"f": float(F[j])}, passed=bool(np.all(finite & (F > 0))))
    # 4. vanishing on the cone boundary
    m = min(boundary_samples, len(X))
    worst, wj = 0.0, 0
    if d.f_mp is not None and d.cone_mp is not None:
        for j in range(m):
            _, val = _boundary_point(d, X[j])
            if val > worst:
                worst, wj = val, j
        report("boundary_vanishing", worst, wj, {"samples": m})
    else:
        report("boundary_vanishing", math.inf, None, {"reason": "no high-precision evaluator"}, passed=False)
    # 5. homogeneity
    hv, hj, ht = 0.0, 0, 1.0
    for t in (0.5, 2.0, 10.0):
        rel = np.abs(d.f(t * X) - t * F) / (t * np.maximum(np.abs(F), 1e-300))
        rel = np.where(np.isfinite(rel), rel, np.inf)
        j = int(np.argmax(rel))
        if rel[j] > hv:
            hv, hj, ht = float(rel[j]), j, t
    report("homogeneity", hv, hj, {"t": ht})
    # 6. grad f in Gamma_n (monotonicity), forward differences stay inside
    h = 1e-6 * np.max(np.abs(X), axis=1, keepdims=True)
    mv, mj, mi = 0.0, 0, 0
    for i in range(n):
        Xi = X.copy()
        Xi[:, i] += h[:, 0]
        di = (d.f(Xi) - F) / h[:, 0]
        bad = np.where(np.isfinite(di), np.maximum(0.0, -di), np.inf)
        bad = np.where(di == 0, tol * 2 if tol > 0 else 1.0, bad)
        j = int(np.argmax(bad))
        if bad[j] > mv:
            mv, mj, mi = float(bad[j]), j, i
    report("monotonicity", mv, mj, {"coordinate": mi}, passed=mv == 0.0)
    # 7. normalisation and gradient at (1,..,1)
    one = np.ones(n)
    nv = abs(float(d.f(one)) - 2.0)
    hh = 1e-5
    grads = []
    for i in range(n):
        e = np.zeros(n)
        e[i] = hh
        grads.append((float(d.f(one + e)) - float(d.f(one - e))) / (2 * hh))
    gv = max(abs(gi - 2.0 / n) for gi in grads)
    ok7 = nv <= max(tol, 1e-12) and gv <= 1e-6
    parts.append(
        CheckReport(
            "normalization",
            ok7,
            {"f_at_one_error": nv, "gradient_at_one": grads, "gradient_error": gv},
            None if ok7 else Witness(None, tuple(one), "(1,...,1)", {"f": float(d.f(one))}),
        )
    )
    rep = combine("elliptic_axioms", parts, family=d.describe(), n=n, samples=int(len(X)), seed=seed, tol=tol)
    rep.metrics["worst_violation"] = {p.name: p.metrics.get("worst_violation", p.metrics.get("f_at_one_error")) for p in parts}
    rep.wall_time = time.perf_counter() - t0
    d.validated = rep.passed
    return rep


# ---------------------------------------------------------------------------
# checks on eigenvalue fields


def _lam_array(lam):
    vals = getattr(lam, "values", lam)
    return np.asarray(vals, dtype=float), float(getattr(lam, "estimate", 0.0)), getattr(lam, "domain", None)


def _witness(dom, lam_vals, j, where="interior", **detail):
    idx = np.unravel_index(j, lam_vals.shape[:-1])
    coords = tuple(float(c) for c in dom.points[idx]) if dom is not None else None
    detail = {**detail, "lambda": lam_vals[idx].tolist()}
    return Witness(tuple(int(i) for i in idx), coords, where, detail)


def supersolution_check(d: EllipticData, lam, tol: float | None = None) -> CheckReport:
    """f(lambda(p)) >= 1 - tol and lambda(p) in Gamma at every grid point."""
    from .conformal_geometry import gate_tol

    t0 = time.perf_counter()
    d.require_usable()
    vals, est, dom = _lam_array(lam)
    if tol is None:
        tol = gate_tol(est)
    inside = d.cone(vals)
    F = np.where(inside, d.f(vals), -np.inf)
    flat = F.reshape(-1)
    j = int(np.argmin(flat))
    fmin = float(flat[j])
    cone_viol = int(np.sum(~inside))
    passed = cone_viol == 0 and fmin >= 1.0 - tol
    wit = None
    if not passed:
        on_edge = dom is not None and not dom.full and np.unravel_index(j, vals.shape[:-1])[0] == vals.shape[0] - 1
        wit = _witness(dom, vals, j, "boundary" if on_edge else "interior", f=fmin if np.isfinite(fmin) else None, in_cone=bool(inside.reshape(-1)[j]))
    finite = F[np.isfinite(F)]
    return CheckReport(
        "supersolution",
        passed,
        {
            "min_f": fmin if np.isfinite(fmin) else None,
            "max_f": float(np.max(finite)) if finite.size else None,
            "cone_violations": cone_viol,
            "tol": tol,
        },
        wit,
        {"elliptic_data": d.describe(), "truncation_estimate": est, "scaling": SCALING_NOTE},
        wall_time=time.perf_counter() - t0,
    )


def concavity_bound_check(d: EllipticData, lam, tol: float = 1e-10) -> CheckReport:
    """f(lambda) <= R / [n(n-1)] = (2/n) sum lambda_i for concave f."""
    t0 = time.perf_counter()
    if not d.concave:
        raise ValueError(f"elliptic data {d.describe()} is not declared concave")
    d.require_usable()
    vals, _, dom = _lam_array(lam)
    n = vals.shape[-1]
    bound = (2.0 / n) * np.sum(vals, axis=-1)
    F = d.f(vals)
    gap = np.where(np.isfinite(F), F - bound, -np.inf)
    flat = gap.reshape(-1)
    j = int(np.argmax(flat))
    passed = bool(flat[j] <= tol)
    wit = None if passed else _witness(dom, vals, j, "sample", f=float(F.reshape(-1)[j]), bound=float(bound.reshape(-1)[j]))
    finite = np.isfinite(F)
    return CheckReport(
        "concavity_bound",
        passed,
        {
            "max_excess": float(flat[j]),
            "max_abs_gap": float(np.max(np.abs((F - bound)[finite]))) if np.any(finite) else None,
            "outside_cone": int(np.sum(~finite)),
        },
        wit,
        {"elliptic_data": d.describe(), "tol": tol},
        wall_time=time.perf_counter() - t0,
    )
