"""Command-line front end.

Exit status: 0 on success, 1 when the scientific check fails (inadmissible
exponents, unconverged solve, envelope violation), 2 on unreadable input.
"""
from __future__ import annotations

import argparse
import logging
import sys

import numpy as np

from . import __version__
from . import io
from .errors import MoserLabError, NotAdmissible, NotConverged, ParseError, UnknownPreset
from .hypotheses import CHECKS, SCHEDULE_MODES, SystemExponents, holder_split, schedule
from .mesh import Domain, build_mesh
from .norms import certify, ladder, sign_split
from .solver import MODES, SolveConfig, solve
from .structure import StructureSpec, manufactured, verify_envelope

log = logging.getLogger("moserlab")

EXIT_OK, EXIT_FAIL, EXIT_PARSE = 0, 1, 2


# input helpers -----------------------------------------------------------------


def load_spec(path) -> tuple[StructureSpec, str | None]:
    """Spec from a problem document; also returns the preset's natural mode."""
    data = io.read_problem(path)
    if "preset" in data:
        dom = data.get("domain")
        try:
            hint = None if dom is None else Domain.from_mapping(dom)
            prob = manufactured(str(data["preset"]), hint)
        except (UnknownPreset, TypeError, ValueError) as exc:
            raise ParseError(f"{path}: {exc}") from exc
        natural = data.get("mode") or ("dirichlet" if data["preset"].startswith("dirichlet") else None)
        return prob.spec, natural
    return StructureSpec.from_mapping(data), data.get("mode")


def load_exponents(path) -> SystemExponents:
    """Exponents from a bare exponent file, a spec file or a preset problem."""
    data = io.read_problem(path)
    if "preset" in data:
        return load_spec(path)[0].exponents
    return io.read_exponents(path)


def _floats(text):
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def _emit(args, mapping, header=None, rows=None, summary=None):
    """Structured or tabular stdout; numeric content is the same in both."""
    if args.format == "json":
        sys.stdout.write(io.dumps(mapping))
        return
    if summary:
        for k, v in summary.items():
            sys.stdout.write(f"{k}: {v}\n")
    if header is not None:
        sys.stdout.write(io.format_table(header, rows))


# commands ----------------------------------------------------------------------


def cmd_check(args) -> int:
    exps = io.read_exponents(args.input)
    report = CHECKS[args.mode](exps)
    mapping = report.to_mapping()
    if args.out:
        io.write_json(args.out, mapping)
        io.write_record(args.out, "check-exponents", [args.input], {"mode": args.mode}, [args.out])
    rows = [[c.id, c.holds, c.lhs, c.rhs, c.strict, c.applicable] for c in report.conditions]
    _emit(args, mapping, ["id", "holds", "lhs", "rhs", "strict", "applicable"], rows,
          {"mode": report.mode, "overall": report.overall,
           "failed": ",".join(report.failed) or "-", **({"notes": "; ".join(report.notes)} if report.notes else {})})
    return EXIT_OK if report.overall else EXIT_FAIL


def _split_for(args):
    exps = io.read_exponents(args.input)
    if args.equation == "second":
        exps = exps.swapped()
    return exps, holder_split(exps)


def cmd_split(args) -> int:
    try:
        exps, split = _split_for(args)
    except NotAdmissible as exc:
        log.error("%s", exc)
        return EXIT_FAIL
    mapping = split.to_mapping()
    mapping["equation"] = args.equation
    if args.out:
        io.write_json(args.out, mapping)
        io.write_record(args.out, "holder-split", [args.input], {"equation": args.equation}, [args.out])
    keys = ["s1", "s2", "t1", "x1", "y1", "z1", "x2", "y2", "z2", "x3", "y3", "z3", "s", "t"]
    rows = [[k, float(getattr(split, k))] for k in keys]
    _emit(args, mapping, ["quantity", "value"], rows,
          {"equation": args.equation, "omitted_terms": ",".join(split.omitted_terms) or "-"})
    return EXIT_OK


def cmd_schedule(args) -> int:
    try:
        exps, split = _split_for(args)
        sched = schedule(args.mode, exps, split, kappa0=args.kappa0, n_max=args.n_max, p1=args.p1)
    except NotAdmissible as exc:
        log.error("%s", exc)
        return EXIT_FAIL
    mapping = sched.to_mapping()
    if args.out:
        io.write_json(args.out, mapping)
        io.write_record(args.out, "schedule", [args.input],
                        {"mode": args.mode, "kappa0": args.kappa0, "n_max": args.n_max, "p1": args.p1},
                        [args.out])
    rows = [[i + 1, k, a] for i, (k, a) in enumerate(zip(sched.kappas, sched.alphas))]
    _emit(args, mapping, ["n", "kappa", "alpha"], rows,
          {"mode": sched.mode, "base": sched.base, "ratio": sched.ratio})
    return EXIT_OK


def _config(args, natural_mode) -> SolveConfig:
    return SolveConfig(
        epsilon=args.epsilon,
        newton_tol=args.newton_tol,
        newton_max=args.newton_max,
        damping=args.damping,
        picard_max=args.picard_max,
        picard_tol=args.picard_tol,
        mode=args.mode or natural_mode or "flux-boundary",
    )


def cmd_solve(args) -> int:
    spec, natural = load_spec(args.problem)
    try:
        config = _config(args, natural)
    except ValueError as exc:
        raise ParseError(str(exc)) from exc
    if spec.domain is None:
        raise ParseError(f"{args.problem}: the problem declares no domain")
    mesh = build_mesh(spec.domain, args.n)
    pair = solve(mesh, spec, config)
    summary = {
        "converged": pair.converged,
        "outer_iterations": pair.outer_iterations,
        "residual_u": pair.residual_u,
        "residual_v": pair.residual_v,
        "vertices": mesh.n_vertices,
        "mode": config.mode,
        "epsilon": spec.leading1.eps if config.epsilon is None else config.epsilon,
    }
    if args.out:
        io.write_solution(args.out, pair)
        echo = {k: getattr(config, k) for k in ("epsilon", "newton_tol", "newton_max", "damping",
                                                  "picard_max", "picard_tol", "mode")}
        echo["n"] = args.n
        io.write_record(args.out, "solve", [args.problem], echo, [args.out])
    rows = [list(map(float, r)) for r in np.column_stack([mesh.vertices, pair.u.values, pair.v.values])]
    header = ["x", "y"][: mesh.dim] + ["u", "v"]
    if args.format == "json":
        mapping = dict(summary)
        if args.print_nodes:
            mapping["nodes"] = [dict(zip(header, r)) for r in rows]
        _emit(args, mapping)
    else:
        _emit(args, None, header if args.print_nodes else None, rows, summary)
    return EXIT_OK if pair.converged else EXIT_FAIL


def _field(pair, component, part):
    f = pair.u if component == "u" else pair.v
    plus, minus = sign_split(f)
    return {"plus": plus, "minus": minus, "abs": plus.with_values(plus.values + minus.values)}[part]


def cmd_ladder(args) -> int:
    pair = io.read_solution(args.solution)
    exps = load_exponents(args.exponents)
    if args.component == "v":
        exps = exps.swapped()
    try:
        split = holder_split(exps)
        sched = schedule(args.schedule, exps, split, kappa0=args.kappa0, n_max=args.n_max, p1=args.p1)
    except NotAdmissible as exc:
        log.error("%s", exc)
        return EXIT_FAIL
    lad = ladder(_field(pair, args.component, args.part), sched, normalized=not args.raw)
    mapping = lad.to_mapping()
    mapping.update(component=args.component, part=args.part)
    header, rows = io.ladder_rows(lad)
    if args.out:
        io.write_csv(f"{args.out}.csv", header, rows)
        io.write_json(f"{args.out}.json", mapping)
        io.write_record(args.out, "ladder", [args.solution, args.exponents],
                        {"schedule": args.schedule, "n_max": args.n_max, "kappa0": args.kappa0,
                         "p1": args.p1, "component": args.component, "part": args.part,
                         "normalized": not args.raw},
                        [f"{args.out}.csv", f"{args.out}.json"])
    _emit(args, mapping, header, rows,
          {"verdict": lad.verdict, "sup_ratio_to_max": lad.sup_ratio_to_max,
           "nodal_max": lad.nodal_max, "final_gap": lad.final_gap})
    return EXIT_OK


def cmd_certify(args) -> int:
    pair = io.read_solution(args.solution)
    exps = load_exponents(args.exponents)
    try:
        cert = certify(pair, exps, kappas=args.kappas, h_values=args.h_values,
                       component=args.component)
    except NotConverged as exc:
        log.error("%s", exc)
        return EXIT_FAIL
    except NotAdmissible as exc:
        log.error("%s", exc)
        return EXIT_FAIL
    mapping = cert.to_mapping()
    mapping["component"] = args.component
    header, rows = io.certificate_rows(cert)
    if args.out:
        io.write_csv(f"{args.out}.csv", header, rows)
        io.write_json(f"{args.out}.json", mapping)
        io.write_record(args.out, "certify", [args.solution, args.exponents],
                        {"kappas": args.kappas, "h_values": args.h_values, "component": args.component},
                        [f"{args.out}.csv", f"{args.out}.json"])
    _emit(args, mapping, header, rows,
          {"growth_fit": cert.growth_fit, "boundary_growth_fit": cert.boundary_growth_fit,
           "monotone_in_h": cert.monotone_in_h})
    return EXIT_OK


def cmd_envelope(args) -> int:
    spec, _ = load_spec(args.problem)
    report = verify_envelope(spec, samples=args.samples, radius=args.radius, seed=args.seed)
    mapping = report.to_mapping()
    if args.out:
        io.write_json(args.out, mapping)
        io.write_record(args.out, "verify-envelope", [args.problem],
                        {"samples": args.samples, "radius": args.radius}, [args.out], seed=args.seed)
    rows = [[c.id, c.holds, c.max_violation, c.samples] for c in report.checks]
    _emit(args, mapping, ["id", "holds", "max_violation", "samples"], rows,
          {"overall": report.overall, "seed": report.seed})
    return EXIT_OK if report.overall else EXIT_FAIL


# parser ------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="moserlab",
        description="Exponent conditions, FEM solves and norm-ladder diagnostics "
                    "for coupled quasilinear elliptic systems.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--format", choices=("json", "table"), default="table",
                       help="stdout format (default: table)")
        p.add_argument("--out", help="output path (or prefix for table outputs)")

    p = sub.add_parser("check-exponents", help="evaluate the admissibility conditions")
    p.add_argument("input", help="exponent file (JSON key-value document)")
    p.add_argument("--mode", choices=tuple(CHECKS), default="strict")
    common(p)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("holder-split", help="derive the Hoelder exponents s and t")
    p.add_argument("input")
    p.add_argument("--equation", choices=("first", "second"), default="first")
    common(p)
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("schedule", help="geometric exponent schedule")
    p.add_argument("input")
    p.add_argument("--mode", choices=SCHEDULE_MODES, default="interior")
    p.add_argument("--equation", choices=("first", "second"), default="first")
    p.add_argument("--kappa0", type=float, default=0.0)
    p.add_argument("--n-max", type=int, default=6)
    p.add_argument("--p1", type=float, default=None, help="L-infinity stage exponent in (ps, p*)")
    common(p)
    p.set_defaults(func=cmd_schedule)

    p = sub.add_parser("solve", help="finite element solve of the coupled system")
    p.add_argument("problem", help='problem file: {"preset": name} or a full structure spec')
    p.add_argument("--n", type=int, default=32, help="subdivisions per axis (default 32)")
    p.add_argument("--mode", choices=MODES, default=None,
                   help="boundary treatment (default: flux-boundary, or the preset's own)")
    p.add_argument("--epsilon", type=float, default=None, help="override the flux regularization")
    p.add_argument("--newton-tol", type=float, default=1e-10)
    p.add_argument("--newton-max", type=int, default=50)
    p.add_argument("--damping", type=float, default=0.5)
    p.add_argument("--picard-max", type=int, default=200)
    p.add_argument("--picard-tol", type=float, default=1e-10)
    p.add_argument("--print-nodes", action="store_true", help="include nodal values in stdout")
    common(p)
    p.set_defaults(func=cmd_solve)

    for name, func, helptext in (("ladder", cmd_ladder, "norm ladder of a solved field"),
                                 ("certify", cmd_certify, "empirical boundedness certificate")):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("solution", help="solution file written by 'solve --out'")
        p.add_argument("exponents", help="exponent, spec or preset problem file")
        p.add_argument("--component", choices=("u", "v"), default="u")
        if name == "ladder":
            p.add_argument("--schedule", choices=SCHEDULE_MODES, default="interior")
            p.add_argument("--n-max", type=int, default=6)
            p.add_argument("--kappa0", type=float, default=0.0)
            p.add_argument("--p1", type=float, default=None)
            p.add_argument("--part", choices=("abs", "plus", "minus"), default="abs")
            p.add_argument("--raw", action="store_true", help="un-normalized norms")
        else:
            p.add_argument("--kappas", type=_floats, default=None,
                           help="comma-separated kappa values (default: first 6 interior rungs)")
            p.add_argument("--h-values", type=_floats, default=None,
                           help="comma-separated truncation levels (default: 5 levels up to max)")
        common(p)
        p.set_defaults(func=func)

    p = sub.add_parser("verify-envelope", help="sample the growth envelopes")
    p.add_argument("problem")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--radius", type=float, default=10.0)
    common(p)
    p.set_defaults(func=cmd_envelope)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except ParseError as exc:
        log.error("%s", exc)
        return EXIT_PARSE
    except MoserLabError as exc:
        log.error("%s", exc)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
