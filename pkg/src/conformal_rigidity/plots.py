"""SVG profile plots for scenario reports (matplotlib, Agg backend)."""

from __future__ import annotations

import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .conformal_geometry import ConformalMetric, boundary_data, schouten_eigenvalues  # noqa: E402
from .elliptic_data import parse_elliptic_spec  # noqa: E402
from .embedding import cap_construction, embed, translate_sample  # noqa: E402

plt.rcParams["svg.hashsalt"] = "conformal-rigidity"


def _save(fig, path: Path) -> Path:
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return path


def _meridian(values, dom):
    return values if dom.is_radial else values[:, 0]


def emit_plots(report: dict, rho, out_dir: str | Path) -> tuple[list[Path], list[str]]:
    """Radial profiles of rho, lambda_i and f(lambda); boundary k/H profile and
    a ball-model cross-section of Sigma_t with the comparison cap (2D charts).

    Returns (written files, notices).
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    dom = rho.domain
    notes: list[str] = []
    files: list[Path] = []
    if dom.n >= 3 and not dom.is_radial:
        return files, [f"n = {dom.n} without rotational symmetry: plots skipped"]
    g = ConformalMetric(rho)
    data = parse_elliptic_spec(report["provenance"]["elliptic_data"], dom.n)
    lam = schouten_eigenvalues(g, estimate=False).values
    theta = dom.theta

    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.plot(theta, _meridian(rho.values, dom), "k-")
    ax.set_xlabel("geodesic distance from chart centre")
    ax.set_ylabel("rho")
    ax.set_title("conformal factor along a meridian")
    files.append(_save(fig, out / "rho_profile.svg"))

    fig, ax = plt.subplots(figsize=(5, 3.5))
    L = lam if dom.is_radial else lam[:, 0]
    for i in range(L.shape[-1]):
        ax.plot(theta, L[:, i], label=f"lambda_{i + 1}")
    ax.plot(theta, data.f(L), "k--", label="f(lambda)")
    ax.set_xlabel("geodesic distance from chart centre")
    ax.legend(loc="best", fontsize=8)
    ax.set_title("Schouten eigenvalues")
    files.append(_save(fig, out / "eigenvalue_profile.svg"))

    if dom.is_radial:
        notes.append("radial chart: boundary and cross-section plots skipped")
        return files, notes
    if dom.full:
        notes.append("closed chart: no boundary profile")
    else:
        bd = boundary_data(g, "boundary")
        fig, ax = plt.subplots(figsize=(5, 3.5))
        ax.plot(dom.phi, np.atleast_1d(bd.H), "k-", label="k (geodesic curvature)")
        ax.axhline(bd.H0, color="grey", lw=0.8, ls=":", label="round value")
        ax.set_xlabel("boundary angle")
        ax.legend(loc="best", fontsize=8)
        ax.set_title("boundary curvature")
        files.append(_save(fig, out / "boundary_profile.svg"))

    t, s0 = 1.0, 0.0
    for chk in report.get("checks", []):
        rep = chk if isinstance(chk, dict) else chk.to_dict(False)
        if rep["name"] == "sliding_contact":
            t = rep["provenance"].get("t", t)
            s0 = rep["metrics"].get("s0") or 0.0
    h = embed(rho.shifted(t), strict=False)
    fig, ax = plt.subplots(figsize=(4.5, 4.5))
    ang = np.linspace(0, 2 * math.pi, 400)
    ax.plot(np.cos(ang), np.sin(ang), color="grey", lw=0.8)
    c, u = dom.center, dom.u
    half = dom.shape[1] // 2
    for j, style in ((0, "k-"), (half, "k-")):
        b = h.ball[:, j]
        ax.plot(b @ u, b @ c, style, lw=1.2)
    if not dom.full:
        cap = cap_construction(t, dom.r_max, 2, dom.resolution, axis=c)
        cap = translate_sample(cap, s0, c) if s0 else cap
        for j in (0, half):
            b = cap.ball[:, j]
            ax.plot(b @ u, b @ c, "r--", lw=1.0)
    ax.set_aspect("equal")
    ax.set_title(f"Sigma_t (t = {t:g}) and comparison cap at s0 = {s0:.3g}")
    files.append(_save(fig, out / "cross_section.svg"))
    return files, notes
