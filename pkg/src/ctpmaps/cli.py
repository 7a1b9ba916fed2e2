"""Command-line interface.

Every analysis command builds one ordered dict; ``--json`` prints it as
JSON and the default prints the same dict as ``key: value`` lines, so both
formats carry identical data.

Exit codes: 0 success, 1 failed reproduction check, 2 bad input,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Any, Sequence

from . import __version__
from .algebra import INF, critical_portrait, format_point, is_inf
from .conditions import (
    affine_symmetries,
    generic_fiber,
    mcmullen_verdict,
    power_factor,
    stab_report,
    verify_factorization,
)
from .ctp import Verdict, classify, ctp_decide, recount_witness
from .dessin import build_tree, check_power_consistency, monodromy_group
from .documents import MapDocument, load
from .errors import CtpError, InputError, NoCenter, NumericalError
from .lifting import standard_generators, track_fiber
from .perm import generate, orbit_of_set
from .tolerance import DEFAULT, ToleranceProfile

EXIT_OK, EXIT_MISMATCH, EXIT_INPUT, EXIT_NUMERICAL = 0, 1, 2, 3


# ---------------------------------------------------------------------------
# rendering


def _scalar(v: Any) -> str:
    if isinstance(v, bool):
        return str(v).lower()
    if v is None:
        return "none"
    return str(v)


def render_text(report: dict, indent: str = "") -> str:
    """``key: value`` lines; nested dicts indent, lists of scalars join by commas."""
    lines = []
    for key, val in report.items():
        if isinstance(val, dict):
            lines.append(f"{indent}{key}:")
            lines.append(render_text(val, indent + "  ").rstrip("\n"))
        elif isinstance(val, list) and any(isinstance(x, dict) for x in val):
            lines.append(f"{indent}{key}:")
            for item in val:
                lines.append(f"{indent}  -")
                lines.append(render_text(item, indent + "    ").rstrip("\n"))
        elif isinstance(val, list):
            lines.append(f"{indent}{key}: " + ",".join(_scalar(x) for x in val))
        else:
            lines.append(f"{indent}{key}: {_scalar(val)}")
    return "\n".join(line for line in lines if line) + "\n"


def _emit(args, report: dict) -> None:
    if args.json:
        sys.stdout.write(json.dumps(report, indent=2) + "\n")
    else:
        sys.stdout.write(render_text(report))


# ---------------------------------------------------------------------------
# shared helpers


def _tolerances(args, doc: MapDocument | None = None) -> ToleranceProfile:
    tol = DEFAULT if doc is None else doc.tolerance_profile()
    changes = {}
    for item in args.tol or []:
        name, _, value = item.partition("=")
        if not value:
            raise InputError(f"--tol expects NAME=VALUE, got {item!r}")
        kind = type(getattr(DEFAULT, name, None))
        if kind not in (int, float):
            raise InputError(f"unknown tolerance {name!r}")
        try:
            changes[name] = kind(float(value)) if kind is int else float(value)
        except ValueError as exc:
            raise InputError(f"bad value for {name}: {value!r}") from exc
    return tol.override(**changes)


def _orientation(args, doc: MapDocument | None = None) -> str:
    if args.orientation:
        return args.orientation
    if doc is not None and doc.orientation:
        return doc.orientation
    return "ccw"


def _parse_point(text: str) -> complex:
    if text.strip() == "inf":
        return INF
    try:
        re, im = (float(x) for x in text.split(","))
    except ValueError as exc:
        raise InputError(f"expected RE,IM, got {text!r}") from exc
    return complex(re, im)


def _load(args):
    doc = load(args.file)
    tol = _tolerances(args, doc)
    f = doc.rational_map()
    if f.degree > tol.max_degree:
        raise InputError(f"degree {f.degree} exceeds the limit {tol.max_degree}")
    return doc, f, tol


def _marked(doc, f, tol):
    return classify(f, doc.marked_points, tol)


def _base_point(args, doc, f, tol):
    if getattr(args, "base", None):
        return _parse_point(args.base)
    if doc.base_point is not None:
        return doc.base_point
    if doc.marked_points:
        m = _marked(doc, f, tol)
        if m.E and m.single_image:
            return m.base
    return generic_fiber(f, tol).base


def _points(points) -> list[str]:
    return [format_point(z) for z in points]


# ---------------------------------------------------------------------------
# commands


def cmd_map_show(args) -> int:
    doc, f, tol = _load(args)
    portrait = critical_portrait(f, tol)
    report: dict = {
        "name": doc.name,
        "degree": f.degree,
        "numerator_degree": f.num.degree,
        "denominator_degree": f.den.degree,
        "critical_points": [{"point": format_point(c), "local_degree": k} for c, k in portrait.points],
        "critical_values": _points(portrait.values),
    }
    if len(doc.marked_points) >= 3:
        m = _marked(doc, f, tol)
        report.update(
            kind=m.kind.value,
            marked_points=_points(m.A),
            postcritical_set=_points(m.B),
            regular_points=_points(m.E),
        )
    _emit(args, report)
    return EXIT_OK


def cmd_monodromy(args) -> int:
    doc, f, tol = _load(args)
    b = _base_point(args, doc, f, tol)
    orientation = _orientation(args, doc)
    gens = standard_generators(f, b, tol, orientation)
    group = generate(gens.named(), tol.group_order_bound)
    total = gens.finite_product()
    if INF in gens.rho:
        total = gens.rho[INF] * total
    report = {
        "base": format_point(b),
        "orientation": orientation,
        "fiber": [{"label": i + 1, "point": format_point(z)} for i, z in enumerate(gens.fiber.points)],
        "generators": {format_point(v): gens.rho[v].cycle_notation() for v in gens.rho},
        "cycle_types": {format_point(v): list(gens.rho[v].cycle_type()) for v in gens.rho},
        "product_is_identity": total.is_identity(),
        "group_order": group.order,
        "transitive": group.is_transitive(),
    }
    if args.trace:
        out = Path(args.trace)
        out.mkdir(parents=True, exist_ok=True)
        files = []
        for n, v in enumerate(gens.ordered, start=1):
            _, trace = track_fiber(f, gens.loops[v], gens.fiber, tol, keep_trace=True)
            path = out / f"loop{n}.csv"
            with path.open("w", encoding="utf-8", newline="") as fh:
                trace.write_csv(fh)
            files.append(str(path))
        report["trace_files"] = files
    _emit(args, report)
    return EXIT_OK


def cmd_orbit(args) -> int:
    doc, f, tol = _load(args)
    b = _base_point(args, doc, f, tol)
    gens = standard_generators(f, b, tol, _orientation(args, doc))
    try:
        labels = [int(x) - 1 for x in args.set.split(",") if x.strip()]
    except ValueError as exc:
        raise InputError(f"--set expects comma-separated labels, got {args.set!r}") from exc
    group = generate(gens.named(), tol.group_order_bound)
    orbit = orbit_of_set(group, labels)
    report = {
        "base": format_point(b),
        "set": [i + 1 for i in sorted(labels)],
        "orbit_size": len(orbit),
        "orbit": ["{" + ",".join(str(i + 1) for i in sorted(F)) + "}" for F in orbit],
    }
    _emit(args, report)
    return EXIT_OK


def cmd_ctp(args) -> int:
    doc, f, tol = _load(args)
    m = _marked(doc, f, tol)
    orientation = _orientation(args, doc)
    rep = ctp_decide(m, orientation)
    report = {"kind": m.kind.value, **rep.as_dict()}
    if rep.verdict is Verdict.NOT_CTP and rep.witness is not None:
        report["recount"] = recount_witness(m, rep, orientation)
    if rep.note:
        report["note"] = rep.note
    _emit(args, report)
    return EXIT_OK


def cmd_stab(args) -> int:
    doc, f, tol = _load(args)
    m = _marked(doc, f, tol)
    st = stab_report(m, _orientation(args, doc))
    _emit(args, st.as_dict())
    return EXIT_OK


def cmd_factor(args) -> int:
    doc, f, tol = _load(args)
    m = _marked(doc, f, tol)
    sym = affine_symmetries(f, tol)
    verdict, pf = mcmullen_verdict(m, _orientation(args, doc))
    if pf is None and m.E:
        pf = power_factor(f, m.E, tol)
    report: dict = {
        "symmetries": sym.as_dict(),
        "power_factor": None if pf is None else pf.as_dict(),
        "mcmullen": verdict.value,
    }
    if args.verify_outer:
        outer = load(args.verify_outer).rational_map()
        if args.inner:
            inner = load(args.inner).rational_map()
        elif pf is not None:
            inner = pf.inner()
        else:
            raise InputError("no power factor found; pass --inner to name the inner map")
        dist = verify_factorization(f, outer, inner, tol)
        report["verification"] = {"distance": f"{dist:.3e}", "matches": dist <= 1e-10}
    _emit(args, report)
    return EXIT_OK


def cmd_tree(args) -> int:
    doc, f, tol = _load(args)
    T = build_tree(f, tol=tol)
    G = monodromy_group(T)
    report = {
        "degree": T.degree,
        "critical_values": _points(T.critical_values),
        "vertices": [
            {"id": v.id + 1, "side": v.side, "point": format_point(v.position), "local_degree": v.local_degree}
            for v in T.vertices
        ],
        "edges": [f"{e.id + 1}: {e.v0 + 1} -- {e.v1 + 1}" for e in T.edges],
        "rho0": T.generators["rho0"].cycle_notation(),
        "rho1": T.generators["rho1"].cycle_notation(),
        "group_order": G.order,
        "power_consistent": check_power_consistency(T),
    }
    if args.marked:
        from .dessin import marked_center

        marked = [int(x) - 1 for x in args.marked.split(",")]
        try:
            report["center"] = format_point(T.vertices[marked_center(T, G, marked)].position)
        except NoCenter:
            report["center"] = None
    if args.svg:
        from .svg import tree_svg

        Path(args.svg).write_text(tree_svg(T, doc.name or None), encoding="utf-8")
    if args.png:
        from .plotting import tree_png

        tree_png(T, args.png, doc.name)
    _emit(args, report)
    return EXIT_OK


def cmd_plot(args) -> int:
    from .levelset import preimage_circle

    if not args.preimage_circle:
        raise InputError("choose what to plot: --preimage-circle")
    doc, f, tol = _load(args)
    ls = preimage_circle(f, args.extent, args.resolution, tol)
    markers = [(z, "#c8102e") for z in doc.marked_points if not is_inf(z)]
    if args.svg:
        from .svg import curves_svg

        text = curves_svg(ls.curves, markers, f"|{doc.name or 'f'}(z)| = 1")
        Path(args.svg).write_text(text, encoding="utf-8")
    if args.png:
        from .plotting import curves_png

        curves_png(ls.curves, args.png, markers, f"|{doc.name or 'f'}(z)| = 1")
    report = {
        "extent": ls.extent,
        "resolution": ls.resolution,
        "curves": len(ls.curves),
        "curve_lengths": [len(c) for c in ls.curves],
    }
    _emit(args, report)
    return EXIT_OK


def cmd_verify(args) -> int:
    from . import reproduce

    tol = _tolerances(args)
    orientation = args.orientation or "ccw"
    checks = reproduce.run(args.case, tol, orientation, args.seed)
    if args.json:
        sys.stdout.write(
            json.dumps(
                [{"case": c.case, "check": c.name, "passed": c.passed, "detail": c.detail} for c in checks],
                indent=2,
            )
            + "\n"
        )
    else:
        sys.stdout.write(reproduce.table_text(checks))
    if args.tsv:
        Path(args.tsv).write_text(reproduce.table_tsv(checks), encoding="utf-8")
    if args.figures:
        cases = reproduce.CASES if args.case == "all" else (args.case,)
        reproduce.write_figures(args.figures, cases, tol, args.seed)
    return EXIT_OK if all(c.passed for c in checks) else EXIT_MISMATCH


# ---------------------------------------------------------------------------
# parser


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--tol", action="append", metavar="NAME=VALUE", help="override a tolerance (repeatable)")
    p.add_argument("--seed", type=int, default=0, help="seed for sampled inputs")
    p.add_argument("--orientation", choices=("ccw", "cw"), help="orientation of generator loops")
    p.add_argument("--json", action="store_true", help="machine-readable report")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="ctpmaps", description="Monodromy and CTP analysis of rational maps.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    map_p = sub.add_parser("map", help="inspect a map document")
    map_sub = map_p.add_subparsers(dest="map_command", required=True)
    show = map_sub.add_parser("show", parents=[common], help="degrees and critical portrait")
    show.add_argument("file")
    show.set_defaults(func=cmd_map_show)

    mono = sub.add_parser("monodromy", parents=[common], help="standard generators and group order")
    mono.add_argument("file")
    mono.add_argument("--base", metavar="RE,IM")
    mono.add_argument("--trace", metavar="DIR", help="write one label,t,re,im CSV per generator loop")
    mono.set_defaults(func=cmd_monodromy)

    orbit = sub.add_parser("orbit", parents=[common], help="orbit of a label set")
    orbit.add_argument("file")
    orbit.add_argument("--set", required=True, metavar="L1,L2,...")
    orbit.add_argument("--base", metavar="RE,IM")
    orbit.set_defaults(func=cmd_orbit)

    ctp = sub.add_parser("ctp", parents=[common], help="decide whether the pullback is constant")
    ctp.add_argument("file")
    ctp.set_defaults(func=cmd_ctp)

    stab = sub.add_parser("stab", parents=[common], help="stabilizer predicates of the regular set")
    stab.add_argument("file")
    stab.set_defaults(func=cmd_stab)

    factor = sub.add_parser("factor", parents=[common], help="symmetries, power factor and McMullen verdict")
    factor.add_argument("file")
    factor.add_argument("--verify-outer", metavar="OUTERFILE")
    factor.add_argument("--inner", metavar="INNERFILE", help="inner map; defaults to the detected power map")
    factor.set_defaults(func=cmd_factor)

    tree = sub.add_parser("tree", parents=[common], help="branched tree of a Belyi polynomial")
    tree.add_argument("file")
    tree.add_argument("--svg", metavar="OUT")
    tree.add_argument("--png", metavar="OUT")
    tree.add_argument("--marked", metavar="E1,E2,...", help="marked edges for the center search")
    tree.set_defaults(func=cmd_tree)

    plot = sub.add_parser("plot", parents=[common], help="level curve |f(z)| = 1")
    plot.add_argument("file")
    plot.add_argument("--preimage-circle", action="store_true")
    plot.add_argument("--svg", metavar="OUT")
    plot.add_argument("--png", metavar="OUT")
    plot.add_argument("--extent", type=float)
    plot.add_argument("--resolution", type=int, default=801)
    plot.set_defaults(func=cmd_plot)

    verify = sub.add_parser("verify-paper", parents=[common], help="run the reproduction checks")
    verify.add_argument("--case", choices=("s", "r", "appendix", "all"), default="all")
    verify.add_argument("--tsv", metavar="OUT", help="also write the pass/fail table as TSV")
    verify.add_argument("--figures", metavar="DIR", help="write PNG figures to DIR")
    verify.set_defaults(func=cmd_verify)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code not in (0, None) else EXIT_OK
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NumericalError as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except CtpError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
