"""Scenario files: schema, loading and execution of named checks."""

from __future__ import annotations

import json
import math
from importlib import resources
from pathlib import Path
from typing import Any, Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from . import presets
from .conformal_geometry import ConformalMetric, boundary_isometry_check, schouten_eigenvalues
from .elliptic_data import parse_elliptic_spec, validate_axioms
from .embedding import cap_construction, duality_eigenvalues, embed, embeddedness, principal_curvatures
from .report import SCALING_NOTE, CheckReport, Witness, _clean
from .rigidity import RigidityScenario, check_hypotheses, claim_A_test, fit_report, sliding_first_contact
from .sphere_core import FieldGrid, build_grid, read_field
from .surface2d import Surface2DScenario, gauss_bonnet_audit, monge_ampere_check, toponogov_check

SCENARIO_VERSION = 1
BUNDLED = "scenarios"


class ScenarioError(ValueError):
    """Scenario file does not parse or validate."""


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class BallSpec(_Strict):
    center: list[float]
    radius: float


class DomainSpec(_Strict):
    n: int = 2
    chart: Literal["polar", "latlon", "radial"] = "polar"
    resolution: list[int] = Field(default_factory=lambda: [64, 64])
    r_max: float = math.pi / 2
    center: list[float] | None = None
    excluded_balls: list[BallSpec] = Field(default_factory=list)


class FieldSpec(_Strict):
    preset: str | None = None
    params: dict[str, Any] = Field(default_factory=dict)
    file: str | None = None

    @model_validator(mode="after")
    def _one_source(self):
        if (self.preset is None) == (self.file is None):
            raise ValueError("field needs exactly one of 'preset' or 'file'")
        if self.preset is not None and self.preset not in presets.PRESETS:
            raise ValueError(f"unknown field preset {self.preset!r}; expected one of {sorted(presets.PRESETS)}")
        return self


class CheckSpec(_Strict):
    name: str
    params: dict[str, Any] = Field(default_factory=dict)


class OutputSpec(_Strict):
    report: str | None = None
    plots: str | None = None


class Scenario(_Strict):
    version: int
    name: str
    domain: DomainSpec = Field(default_factory=DomainSpec)
    field: FieldSpec
    elliptic_data: str = "sigma_k:k=1"
    seed: int = 0
    checks: list[CheckSpec]
    output: OutputSpec = Field(default_factory=OutputSpec)
    tolerances: dict[str, float] = Field(default_factory=dict)

    @model_validator(mode="after")
    def _valid(self):
        if self.version != SCENARIO_VERSION:
            raise ValueError(f"scenario version {self.version} is not supported (expected {SCENARIO_VERSION})")
        for c in self.checks:
            if c.name not in CHECKS:
                raise ValueError(f"unknown check {c.name!r}; expected one of {sorted(CHECKS)}")
        return self


def _line_of(text: str, loc: tuple) -> int | None:
    """Best-effort line number of the deepest string key in a validation path."""
    keys = [k for k in loc if isinstance(k, str)]
    lines = text.splitlines()
    for key in reversed(keys):
        for i, line in enumerate(lines, 1):
            if f'"{key}"' in line:
                return i
    return None


def resolve_path(path: str | Path) -> Path:
    """A scenario path, or the name of a bundled scenario."""
    p = Path(path)
    if p.exists():
        return p
    bundled = resources.files(__package__) / BUNDLED / (p.stem + ".json")
    if p.suffix in ("", ".json") and bundled.is_file():
        return Path(str(bundled))
    raise FileNotFoundError(f"scenario file not found: {path}")


def bundled_scenarios() -> list[str]:
    root = resources.files(__package__) / BUNDLED
    return sorted(Path(str(p)).stem for p in root.iterdir() if str(p).endswith(".json"))


def load_scenario(path: str | Path) -> tuple[Scenario, Path]:
    path = resolve_path(path)
    text = path.read_text()
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path}:{exc.lineno}:{exc.colno}: malformed JSON: {exc.msg}") from exc
    try:
        sc = Scenario.model_validate(raw)
    except ValidationError as exc:
        msgs = []
        for err in exc.errors():
            line = _line_of(text, err["loc"])
            where = ".".join(str(x) for x in err["loc"])
            msgs.append(f"{path}:{line if line else '?'}: {where}: {err['msg']}")
        raise ScenarioError("\n".join(msgs)) from exc
    if sc.field.file is not None:
        fp = Path(sc.field.file)
        if not fp.is_absolute():
            fp = path.parent / fp
        if not fp.exists():
            raise FileNotFoundError(f"field file not found: {fp}")
    return sc, path


def apply_overrides(sc: Scenario, resolution=None, seed=None, tol=None) -> Scenario:
    sc = sc.model_copy(deep=True)
    if resolution is not None:
        sc.domain.resolution = list(resolution)
    if seed is not None:
        sc.seed = int(seed)
    if tol is not None:
        sc.tolerances["default"] = float(tol)
    return sc


def build_field(sc: Scenario, base: Path | None = None) -> FieldGrid:
    if sc.field.file is not None:
        fp = Path(sc.field.file)
        if base is not None and not fp.is_absolute():
            fp = base / fp
        return read_field(fp)
    ds = sc.domain
    dom = build_grid(
        ds.n,
        ds.chart,
        ds.resolution,
        r_max=ds.r_max,
        center=ds.center,
        excluded_balls=[(b.center, b.radius) for b in ds.excluded_balls],
    )
    params = dict(sc.field.params)
    if sc.field.preset == "random_polynomial":
        params.setdefault("seed", sc.seed)
    return presets.PRESETS[sc.field.preset](dom, **params)


# ---------------------------------------------------------------------------
# named checks


def _tol(ctx, key, default=None):
    return ctx["sc"].tolerances.get(key, ctx["sc"].tolerances.get("default", default))


def _check_hypotheses(ctx, radii=None, t=None):
    g = ctx["metric"]
    radii = radii or {"boundary": g.domain.r_max}
    tol = {k: v for k, v in ctx["sc"].tolerances.items() if k in ("supersolution", "isometry", "mean_curvature", "orientation")}
    return check_hypotheses(RigidityScenario(g, ctx["data"], radii, t, tol))


def _check_round_orbit(ctx, r=None, tol=None):
    return fit_report(ctx["metric"], r, tol if tol is not None else _tol(ctx, "round_orbit", 1e-6))


def _check_boundary_isometry(ctx, component="boundary", r=None):
    g = ctx["metric"]
    return boundary_isometry_check(g, component, g.domain.r_max if r is None else r, _tol(ctx, "isometry", 1e-3))


def _check_sliding_contact(ctx, t=1.0, r=None, s_range=(-2.0, 2.0), expect=None, expect_s0=None):
    g = ctx["metric"]
    dom = g.domain
    sigma = embed(g.rho.shifted(t), strict=False)
    r = dom.r_max if r is None else r
    cap = cap_construction(t, r, dom.n, dom.resolution if not dom.is_radial else dom.resolution[0], axis=dom.center)
    res = sliding_first_contact(sigma, cap, tuple(s_range))
    ok = res.classification != "none-in-range"
    if expect is not None:
        ok = res.classification == expect
    if expect_s0 is not None and res.s0 is not None:
        ok = ok and abs(res.s0 - expect_s0) <= 2 * res.tol
    metrics = res.to_dict()
    metrics.pop("gap_curve")
    wit = None if ok else Witness(None, None, res.classification, {"s0": res.s0})
    return CheckReport("sliding_contact", ok, metrics, wit, {"t": t, "cap_radius": r, "s_range": list(s_range)})


def _check_claim_A(ctx, t=1.0):
    g = ctx["metric"]
    return claim_A_test(embed(g.rho.shifted(t), strict=False), t, tol=_tol(ctx, "claim_A", 1e-8))


def _check_gauss_bonnet(ctx):
    return gauss_bonnet_audit(ctx["metric"], _tol(ctx, "gauss_bonnet", 1e-4))


def _check_monge_ampere(ctx):
    return monge_ampere_check(ctx["metric"], ctx["sc"].tolerances.get("monge_ampere"))


def _check_toponogov(ctx, c=0.0, geodesic=None, geodesic_ring=None):
    g = ctx["metric"]
    if geodesic is None and geodesic_ring is not None:
        geodesic = [[int(geodesic_ring), j] for j in range(g.domain.shape[1])]
    return toponogov_check(Surface2DScenario(g, c, geodesic, _tol(ctx, "toponogov", 1e-3)), ctx["data"])


def _check_embeddedness(ctx, t=1.0):
    h = embed(ctx["metric"].rho.shifted(t), strict=False)
    res = embeddedness(h)
    wit = None if res["embedded"] else Witness(res["pair"], None, "interior", {"closest_far_pair": res["closest_far_pair"]})
    return CheckReport("embeddedness", res["embedded"], res, wit, {"t": t})


def _check_duality(ctx, t=1.0, tol=None):
    g = ctx["metric"]
    rho = g.rho.shifted(t)
    lam = schouten_eigenvalues(rho, estimate=False).values
    k = principal_curvatures(embed(rho))
    defect = np.abs(np.sort(lam, axis=-1) - np.sort(duality_eigenvalues(k), axis=-1))
    tol = tol if tol is not None else _tol(ctx, "duality", 5e-3)
    j = np.unravel_index(int(np.argmax(defect)), defect.shape)
    ok = bool(defect[j] <= tol)
    wit = None if ok else Witness(tuple(int(i) for i in j[:-1]), tuple(g.domain.points[j[:-1]]), "interior", {"defect": float(defect[j])})
    return CheckReport("duality", ok, {"max_defect": float(defect[j]), "tol": tol}, wit, {"t": t})


def _check_elliptic_axioms(ctx, samples=10_000):
    return validate_axioms(ctx["data"], samples=samples, seed=ctx["sc"].seed)


CHECKS = {
    "hypotheses": _check_hypotheses,
    "round_orbit": _check_round_orbit,
    "boundary_isometry": _check_boundary_isometry,
    "sliding_contact": _check_sliding_contact,
    "claim_A": _check_claim_A,
    "gauss_bonnet": _check_gauss_bonnet,
    "monge_ampere": _check_monge_ampere,
    "toponogov": _check_toponogov,
    "embeddedness": _check_embeddedness,
    "duality": _check_duality,
    "elliptic_axioms": _check_elliptic_axioms,
}


def run_scenario(sc: Scenario, base: Path | None = None, only: set[str] | None = None) -> dict:
    """Execute the scenario's checks in order; returns the report dictionary."""
    rho = build_field(sc, base)
    data = parse_elliptic_spec(sc.elliptic_data, rho.domain.n, base)
    ctx = {"sc": sc, "metric": ConformalMetric(rho), "data": data}
    reports = []
    for spec in sc.checks:
        if only is not None and spec.name not in only:
            continue
        try:
            rep = CHECKS[spec.name](ctx, **spec.params)
        except TypeError as exc:
            raise ScenarioError(f"bad parameters for check {spec.name!r}: {exc}") from exc
        reports.append(rep)
    return {
        "version": SCENARIO_VERSION,
        "scenario": sc.name,
        "passed": all(r.passed for r in reports),
        "scaling_note": SCALING_NOTE,
        "provenance": _clean(
            {
                "resolution": list(rho.domain.resolution),
                "chart": rho.domain.chart,
                "n": rho.domain.n,
                "seed": sc.seed,
                "tolerances": dict(sc.tolerances),
                "elliptic_data": data.describe(),
            }
        ),
        "spec": sc.model_dump(mode="json"),
        "checks": reports,
    }


def report_json(report: dict, timing: bool = True) -> str:
    out = dict(report)
    out["checks"] = [r.to_dict(timing) for r in report["checks"]]
    return json.dumps(out, indent=2, sort_keys=True) + "\n"
