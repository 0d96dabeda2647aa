"""Command-line entry point.

Human-readable summaries go to stdout; ``--out`` receives the machine report
(JSON with a ``schema_version`` field) or the requested export.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
import time
from pathlib import Path

from . import __version__
from .bell_core import (EXPORT_FORMATS, BellInequality, build_inequality, chsh, export_matrix,
                        local_bound_bruteforce, local_bound_closed, local_bound_kl,
                        BRUTE_FORCE_MAX_SETTINGS)
from .certify import certificate_from_fixed_point
from .constructions import planar_csv, three_circle_planar, three_circle_points
from .polytope import inclusion_chain, saturating_csv, saturating_strategies, tightness
from .quantum import (DegenerateRowError, InitScheme, SeesawConfig, critical_visibility,
                      grothendieck_lower_bound, reduced_symmetric_value, seesaw_alternating,
                      seesaw_symmetric)

SCHEMA_VERSION = 1
DEFAULT_RESTARTS = 8
REPRODUCE_TABLES = ("kg-bounds", "circles30", "i54", "tightness")
TIGHTNESS_CASES = (
    (2, 1, False), (3, 2, False), (4, 3, False),
    (2, 2, False), (3, 3, False), (4, 4, False),
    (2, 2, True), (3, 3, True), (4, 4, True),
)

log = logging.getLogger("bellgroth")


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def _sizes(args) -> tuple[int, int]:
    nA = args.n if args.n is not None else args.na
    nB = args.n if args.n is not None else args.nb
    if nA is None or nB is None:
        raise SystemExit("error: give --n, or both --na and --nb")
    return nA, nB


def _inequality(args) -> BellInequality:
    if getattr(args, "chsh", False):
        return chsh()
    nA, nB = _sizes(args)
    return build_inequality(nA, nB, args.marginals)


def _family_bound(ineq: BellInequality, args) -> int:
    if getattr(args, "chsh", False):
        return local_bound_bruteforce(ineq).bound
    nA, nB = _sizes(args)
    if args.marginals:
        return local_bound_kl(nA, nB, True).bound
    return local_bound_closed(nA, nB)


def _report(command: str, label: str, config: dict, results: dict, provenance: dict,
            started: float) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "tool_version": __version__,
        "command": command,
        "inequality": label,
        "config": config,
        "results": results,
        "provenance": provenance,
        "wall_time_s": round(time.perf_counter() - started, 3),
    }


def _emit(report: dict, out: str | None) -> None:
    if out:
        Path(out).write_text(json.dumps(report, indent=1, sort_keys=True) + "\n")


def _seesaw_config(args, d: int | None = None) -> SeesawConfig:
    return SeesawConfig(d=d or args.d, max_iters=args.iters, value_tolerance=args.tol,
                        init_scheme=InitScheme(args.init), seed=args.seed, restarts=args.restarts)


def run_seesaw(ineq: BellInequality, config: SeesawConfig, local_bound: float):
    runner = seesaw_symmetric if ineq.is_symmetric() else seesaw_alternating
    return runner(ineq, config, local_bound=local_bound)


def _seesaw_results(report) -> dict:
    out = {
        "value": report.value,
        "ratio": report.ratio,
        "kg_lower_bound": report.ratio,
        "local_bound": report.local_bound,
        "visibility": report.visibility,
        "min_denominator": report.min_denominator,
        "unit_norm_drift": report.assignment.norm_drift(),
        "restart_values": report.restart_values,
    }
    return out


def _seesaw_provenance(report, config: SeesawConfig) -> dict:
    return {"seed": config.seed, "iterations_used": report.iterations_used,
            "stop_reason": report.stop_reason, "converged": report.converged,
            "value_tolerance": config.value_tolerance, "max_iters": config.max_iters}


# -- subcommands ---------------------------------------------------------------

def cmd_construct(args) -> int:
    ineq = _inequality(args)
    data = export_matrix(ineq, args.format)
    if args.out:
        Path(args.out).write_bytes(data)
    print(f"{ineq.label}: mA={ineq.mA} mB={ineq.mB} nnz={ineq.nnz}")
    return 0


def cmd_local_bound(args) -> int:
    started = time.perf_counter()
    ineq = _inequality(args)
    results = {}
    if not getattr(args, "chsh", False):
        nA, nB = _sizes(args)
        if not args.marginals:
            results["closed_form"] = local_bound_closed(nA, nB)
        results["kl_enumeration"] = local_bound_kl(nA, nB, args.marginals).bound
    if ineq.mA <= BRUTE_FORCE_MAX_SETTINGS:
        results["brute_force"] = local_bound_bruteforce(ineq).bound
    for k, v in results.items():
        print(f"{ineq.label} {k}: {v}")
    if len(set(results.values())) > 1:
        print("error: local bound methods disagree", file=sys.stderr)
        return 1
    _emit(_report("local-bound", ineq.label, {}, results, {}, started), args.out)
    return 0


def cmd_seesaw(args) -> int:
    started = time.perf_counter()
    ineq = _inequality(args)
    config = _seesaw_config(args)
    report = run_seesaw(ineq, config, _family_bound(ineq, args))
    results = _seesaw_results(report)
    print(f"{ineq.label} d={config.d}: value={report.value:.9f} ratio={report.ratio:.6f} "
          f"({report.stop_reason} after {report.iterations_used} sweeps)")
    if results["visibility"] is not None:
        print(f"  K_G({config.d}) >= {report.ratio:.6f}, visibility threshold <= {results['visibility']:.6f}")
    cfg = {"d": config.d, "iters": config.max_iters, "tol": config.value_tolerance,
           "init": config.init_scheme.value, "restarts": config.restarts}
    _emit(_report("seesaw", ineq.label, cfg, results, _seesaw_provenance(report, config), started),
          args.out)
    return 0


def cmd_certify(args) -> int:
    started = time.perf_counter()
    ineq = _inequality(args)
    config = _seesaw_config(args)
    report = run_seesaw(ineq, config, _family_bound(ineq, args))
    cert = certificate_from_fixed_point(ineq, report.assignment, seed=args.seed)
    print(f"{ineq.label} d={config.d}: lower={report.value:.9f} upper={cert.bound:.9f} "
          f"gap={cert.gap:.3g} verified={cert.verified}")
    results = _seesaw_results(report)
    results["certificate"] = cert.to_dict()
    _emit(_report("certify", ineq.label, {"d": config.d, "restarts": config.restarts}, results,
                  _seesaw_provenance(report, config), started), args.out)
    return 0 if cert.verified else 1


def cmd_tightness(args) -> int:
    started = time.perf_counter()
    ineq = _inequality(args)
    rep = tightness(ineq)
    verdict = "tight" if rep.tight else "not tight"
    print(f"{rep.label}: {verdict} (rank {rep.rank} of D={rep.ambient_dimension}, "
          f"{rep.saturating_count} saturating strategies, bound {rep.local_bound})")
    if args.csv:
        Path(args.csv).write_text(saturating_csv(saturating_strategies(ineq, rep.local_bound)))
    _emit(_report("tightness", ineq.label, {}, json.loads(rep.to_json()), {}, started), args.out)
    return 0


def cmd_reduce(args) -> int:
    started = time.perf_counter()
    steps = []
    for red in inclusion_chain(args.n):
        print(f"{red.source.label} -> {red.target.label}: coefficients match, "
              f"bound {red.source_bound} = {red.target_bound} + {red.constant}")
        steps.append({"source": red.source.label, "target": red.target.label,
                      "constant": red.constant, "source_bound": red.source_bound,
                      "target_bound": red.target_bound})
    _emit(_report("reduce", f"I'({args.n},{args.n})", {"n": args.n}, {"chain": steps}, {}, started),
          args.out)
    return 0


def cmd_figure(args) -> int:
    from .plotting import save_three_circle_figure

    out = Path(args.out)
    if out.suffix:
        stem = out.with_suffix("")
    else:
        out.mkdir(parents=True, exist_ok=True)
        stem = out / "three_circles"
    stem.parent.mkdir(parents=True, exist_ok=True)
    csv_path = stem.with_suffix(".csv")
    csv_path.write_text(planar_csv(three_circle_planar()))
    svg_path = save_three_circle_figure(stem.with_suffix(".svg"))
    print(f"wrote {csv_path} and {svg_path}")
    return 0


def _reproduce_kg(args) -> dict:
    n = 100
    ineq = build_inequality(n, n)
    bound = local_bound_closed(n, n)
    rows = {}
    for d in (3, 4, 5):
        config = _seesaw_config(args, d)
        rep = seesaw_symmetric(ineq, config, local_bound=bound)
        rows[f"d{d}"] = {"ratio": rep.ratio, "value": rep.value, "min_denominator": rep.min_denominator,
                         "unit_norm_drift": rep.assignment.norm_drift(),
                         "iterations_used": rep.iterations_used}
        print(f"K_G({d}) >= {rep.ratio:.6f}")
    pc = critical_visibility(bound, rows["d3"]["value"])
    print(f"p_c <= 1/K_G(3) = {pc:.6f}")
    return {"n": n, "local_bound": bound, "dimensions": rows, "critical_visibility": pc}


def _reproduce_circles(args) -> dict:
    value = reduced_symmetric_value(three_circle_points())
    ratio = grothendieck_lower_bound(value, local_bound_closed(30, 30))
    print(f"30-point construction: ratio {ratio:.6f} (sqrt 2 = {math.sqrt(2):.6f}), "
          f"visibility {1 / ratio:.6f}")
    return {"value": value, "ratio": ratio, "visibility": 1 / ratio}


def _reproduce_i54(args) -> dict:
    ineq = build_inequality(5, 4)
    bound = local_bound_closed(5, 4)
    out = {"local_bound": bound, "dimensions": {}}
    for d in (4, 5, 25):
        config = _seesaw_config(args, d)
        rep = seesaw_alternating(ineq, config, local_bound=bound)
        cert = certificate_from_fixed_point(ineq, rep.assignment, seed=args.seed)
        out["dimensions"][f"d{d}"] = {"lower": rep.value, "upper": cert.bound, "ratio": rep.ratio,
                                      "verified": cert.verified}
        print(f"I(5,4) d={d}: {rep.value:.6f} <= max <= {cert.bound:.6f}, ratio {rep.ratio:.6f}")
    return out


def _reproduce_tightness(args) -> dict:
    rows = []
    for nA, nB, marg in TIGHTNESS_CASES:
        rep = tightness(build_inequality(nA, nB, marg))
        print(f"{rep.label}: {'tight' if rep.tight else 'not tight'} (rank {rep.rank}/{rep.ambient_dimension})")
        rows.append(json.loads(rep.to_json()))
    return {"cases": rows}


def cmd_reproduce(args) -> int:
    started = time.perf_counter()
    runner = {"kg-bounds": _reproduce_kg, "circles30": _reproduce_circles,
              "i54": _reproduce_i54, "tightness": _reproduce_tightness}[args.table]
    results = runner(args)
    cfg = {"restarts": args.restarts, "iters": args.iters, "tol": args.tol, "init": args.init}
    _emit(_report(f"reproduce {args.table}", args.table, cfg, results, {"seed": args.seed}, started),
          args.out)
    return 0


# -- parser ------------------------------------------------------------------------

def _add_sizes(p: argparse.ArgumentParser, marginals: bool = True) -> None:
    p.add_argument("--na", type=_positive, help="number of single settings for Alice")
    p.add_argument("--nb", type=_positive, help="number of single settings for Bob")
    p.add_argument("--n", type=_positive, help="shorthand for --na N --nb N")
    p.add_argument("--chsh", action="store_true", help="use the CHSH inequality instead")
    if marginals:
        p.add_argument("--marginals", action="store_true", help="add the marginal terms (needs nA = nB)")


def _add_seesaw(p: argparse.ArgumentParser, with_d: bool = True, tol: float = 1e-12) -> None:
    if with_d:
        p.add_argument("--d", type=_positive, default=3, help="vector dimension")
    p.add_argument("--iters", type=_positive, default=1000)
    p.add_argument("--tol", type=float, default=tol, help="relative value change that stops a run")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--restarts", type=_positive, default=DEFAULT_RESTARTS)
    p.add_argument("--init", choices=[s.value for s in InitScheme], default=InitScheme.indexed_angles.value)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bellgroth", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("construct", help="build an inequality and export its matrix")
    _add_sizes(p)
    p.add_argument("--format", choices=EXPORT_FORMATS, default="coordinate-text")
    p.add_argument("--out")
    p.set_defaults(func=cmd_construct)

    p = sub.add_parser("local-bound", help="local bound by every applicable method")
    _add_sizes(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_local_bound)

    p = sub.add_parser("seesaw", help="see-saw lower bound on the unit-vector maximum")
    _add_sizes(p)
    _add_seesaw(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_seesaw)

    p = sub.add_parser("certify", help="see-saw plus dual certificate (upper bound)")
    _add_sizes(p)
    # the certificate needs converged vectors, not just a converged value
    _add_seesaw(p, tol=1e-15)
    p.add_argument("--out")
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("tightness", help="facet test via saturating deterministic strategies")
    _add_sizes(p)
    p.add_argument("--csv", help="write the saturating set as a +-1 CSV matrix")
    p.add_argument("--out")
    p.set_defaults(func=cmd_tightness)

    p = sub.add_parser("reduce", help="inclusion chain I'(n,n) -> ... -> I'(2,2)")
    p.add_argument("--n", type=_positive, required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("figure", help="CSV and SVG of the 30-point configuration")
    p.add_argument("--out", required=True, help="directory, or file stem like fig/circles.svg")
    p.set_defaults(func=cmd_figure)

    p = sub.add_parser("reproduce", help="recompute a published table")
    p.add_argument("table", choices=REPRODUCE_TABLES)
    _add_seesaw(p, with_d=False)
    p.add_argument("--out")
    p.set_defaults(func=cmd_reproduce)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "reduce" and args.n < 3:
        parser.error("reduce needs --n >= 3")
    if getattr(args, "marginals", False) and args.n is None and args.na != args.nb:
        parser.error("--marginals needs nA = nB")
    try:
        return args.func(args)
    except DegenerateRowError as exc:
        print(f"see-saw aborted: {exc}", file=sys.stderr)
        return 3
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
