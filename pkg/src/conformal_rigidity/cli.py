"""Command-line front end.

Exit codes: 0 all checks pass, 1 a check failed, 2 usage or parse error,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .embedding import AdmissibilityError, embed, principal_curvatures, write_sample_csv
from .elliptic_data import parse_elliptic_spec, validate_axioms
from .report import NumericalError
from .rigidity import DilationError
from .scenario import (
    Scenario,
    ScenarioError,
    apply_overrides,
    build_field,
    bundled_scenarios,
    load_scenario,
    report_json,
    run_scenario,
)
from .sphere_core import DomainError, read_field

EXIT_PASS, EXIT_FAIL, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3


def _resolution(text: str):
    parts = text.lower().replace("x", ",").split(",")
    try:
        return [int(p) for p in parts if p]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad resolution {text!r}; use N or NxM") from exc


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--tol", type=float, default=None, help="default tolerance override")
    p.add_argument("--resolution", type=_resolution, default=None, help="grid resolution, N or NxM")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", default=None, help="output path")


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _summary(report: dict) -> None:
    for rep in report["checks"]:
        print(f"{'PASS' if rep.passed else 'FAIL'}  {rep.name}", file=sys.stderr)


def _run(args, only=None) -> int:
    sc, path = load_scenario(args.scenario)
    sc = apply_overrides(sc, args.resolution, args.seed, args.tol)
    report = run_scenario(sc, path.parent, only)
    if only is not None and not report["checks"]:
        raise ScenarioError(f"scenario {sc.name!r} declares no {sorted(only)} checks")
    out = args.out or sc.output.report
    _emit(report_json(report), out)
    _summary(report)
    plots = getattr(args, "plots", None) or sc.output.plots
    if plots:
        from .plots import emit_plots

        _, notes = emit_plots(report, build_field(sc, path.parent), plots)
        for note in notes:
            print(f"notice: {note}", file=sys.stderr)
    return EXIT_PASS if report["passed"] else EXIT_FAIL


def cmd_check(args) -> int:
    return _run(args)


def cmd_toponogov(args) -> int:
    return _run(args, only={"toponogov"})


def cmd_embed(args) -> int:
    rho = read_field(args.field)
    h = embed(rho.shifted(args.t))
    k = principal_curvatures(h)
    out = args.out or str(Path(args.field).with_suffix("")) + "_embedded.csv"
    write_sample_csv(out, h, k)
    info = {"output": out, "t": args.t, "invariant_defects": h.invariant_defects()}
    print(json.dumps(info, indent=2, sort_keys=True))
    return EXIT_PASS


def cmd_validate_data(args) -> int:
    d = parse_elliptic_spec(args.spec, args.n, Path.cwd())
    rep = validate_axioms(d, samples=args.samples, seed=args.seed or 0, tol=args.tol or 1e-8)
    _emit(json.dumps(rep.to_dict(), indent=2, sort_keys=True) + "\n", args.out)
    print(f"{'PASS' if rep.passed else 'FAIL'}  {rep.name} ({d.describe()})", file=sys.stderr)
    return EXIT_PASS if rep.passed else EXIT_FAIL


def cmd_plot(args) -> int:
    from .plots import emit_plots

    path = Path(args.report)
    try:
        report = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path}:{exc.lineno}:{exc.colno}: malformed JSON: {exc.msg}") from exc
    if "spec" not in report:
        raise ScenarioError(f"{path}: not a scenario report (no 'spec' block)")
    sc = Scenario.model_validate(report["spec"])
    files, notes = emit_plots(report, build_field(sc, path.parent), args.out or path.parent)
    for f in files:
        print(f)
    for note in notes:
        print(f"notice: {note}", file=sys.stderr)
    return EXIT_PASS


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="conformal-rigidity", description=__doc__.split("\n")[0])
    sub = p.add_subparsers(dest="command", required=True)
    c = sub.add_parser("check", help="run a scenario's checks and write a JSON report")
    c.add_argument("scenario", help=f"scenario file or bundled name ({', '.join(bundled_scenarios())})")
    c.add_argument("--plots", default=None, help="directory for SVG plots")
    _common(c)
    c.set_defaults(func=cmd_check)
    t = sub.add_parser("toponogov", help="run only the Toponogov checks of a scenario")
    t.add_argument("scenario")
    _common(t)
    t.set_defaults(func=cmd_toponogov)
    e = sub.add_parser("embed", help="embed a field file as a hypersurface and write a CSV sample")
    e.add_argument("field", help="field header (.json) with its .csv samples")
    e.add_argument("--t", type=float, default=0.0, help="dilation applied before embedding")
    _common(e)
    e.set_defaults(func=cmd_embed)
    v = sub.add_parser("validate-data", help="validate elliptic data axioms")
    v.add_argument("spec", help="sigma_k:k=2, weighted_sum:1=0.5,2=0.5, min:ks=1,2 or file:<path>")
    v.add_argument("--n", type=int, default=2)
    v.add_argument("--samples", type=int, default=10_000)
    _common(v)
    v.set_defaults(func=cmd_validate_data)
    pl = sub.add_parser("plot", help="SVG plots from a scenario report")
    pl.add_argument("report")
    _common(pl)
    pl.set_defaults(func=cmd_plot)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ScenarioError, FileNotFoundError, DomainError, KeyError, ValueError) as exc:
        if isinstance(exc, AdmissibilityError):
            print(f"numerical failure: {exc}", file=sys.stderr)
            return EXIT_NUMERIC
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NumericalError, DilationError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
