"""Command-line interface.

Exit status: 0 when every check passes, 1 when a condition fails with a
witness or a certification fails, 2 on usage errors.
"""

from __future__ import annotations

import argparse
import contextlib
import io
import sys
from fractions import Fraction
from typing import Sequence

from . import conditions as cnd
from . import formats
from .conditions import ConditionId, Verdict
from .gallery import DESCRIPTIONS, GalleryId, build, run_certification
from .metric import DomainError, MetricSpace, Point, SelfMap, fmt, parse_rational_list
from .orbits import cauchy_diagnostics, picard_orbit, solve_fixed_point
from .search import SearchConfig, find_separation

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


class Output:
    """Report rendering; ``run`` buffers stdout so usage errors print no partial verdicts."""

    def __init__(self, args: argparse.Namespace) -> None:
        self.format = args.format
        self.decimal = args.decimal

    def scalar_cells(self, value) -> list[str]:
        cells = [fmt(value)]
        if self.decimal is not None:
            cells.append(formats.decimal_str(value, self.decimal))
        return cells

    def scalar_header(self, name: str) -> list[str]:
        return [name] + ([f"{name}~"] if self.decimal is not None else [])

    def emit(self, header, rows, doc) -> None:
        if self.format == "json":
            text = formats.dump_json(doc)
        elif self.format == "csv":
            text = formats.render_csv(header, rows)
        else:
            text = formats.render_table(header, rows)
        sys.stdout.write(text)


def _source(args, cutoff: int | None = None) -> tuple[MetricSpace, SelfMap, str]:
    if bool(args.gallery) == bool(args.space):
        raise UsageError("give exactly one of --gallery or --space")
    if args.gallery:
        gid = GalleryId.parse(args.gallery)
        inst = build(gid, max(3, cutoff or args.cutoff))
        return inst.space, inst.map, gid.value
    space, selfmap = formats.load_space(args.space)
    return space, selfmap, args.space


def _default_start(space: MetricSpace) -> Point:
    if space.kind == "finite":
        return Point("", 0)
    if space.kind == "grid":
        return Point("r", max(p.n for p in space.points()))
    pts = space.points(1)
    return next((p for p in pts if p.symbol == "X"), pts[0])


def _start(args, space: MetricSpace) -> Point:
    return formats.parse_point(args.start, space) if args.start else _default_start(space)


def _eps(args) -> list[Fraction]:
    eps = parse_rational_list(args.eps) if args.eps else list(cnd.DEFAULT_EPS)
    if any(e <= 0 for e in eps):
        raise UsageError("--eps values must be positive")
    return eps


# -- commands ------------------------------------------------------------------


def cmd_check(args, out: Output) -> int:
    cond = ConditionId.parse(args.cond)
    space, selfmap, source = _source(args)
    if cond in cnd.POINTWISE:
        if args.pairs:
            pairs = formats.parse_pairs(args.pairs, space)
            complete = False
        else:
            pairs = list(cnd.all_pairs(space.points(args.cutoff)))
            complete = space.kind == "finite"
        rep = cnd.check_pointwise(cond, space, selfmap, pairs, f"{source} cutoff {args.cutoff}", complete)
    else:
        rep = _check_eps_delta(cond, space, selfmap, args, source)
    w = rep.witness
    header = ["condition", "verdict", "checked", "witness"] + out.scalar_header("lhs") + out.scalar_header("rhs")
    row = [cond.value, rep.verdict.value, rep.checked, "" if w is None else "(" + ", ".join(
        p.label if isinstance(p, Point) else str(p) for p in w.where) + ")"]
    row += out.scalar_cells(w.lhs) if w else [""] * len(out.scalar_header("lhs"))
    row += out.scalar_cells(w.rhs) if w else [""] * len(out.scalar_header("rhs"))
    out.emit(header, [row], rep.to_dict())
    return EXIT_FAIL if rep.failed else EXIT_OK


def _check_eps_delta(cond, space, selfmap, args, source) -> cnd.ConditionReport:
    if cond in cnd.PAIRWISE:
        dom = cnd.point_domain(space, None if space.kind == "finite" else args.cutoff)
    else:
        dom = cnd.orbit_domain(space, selfmap, _start(args, space), args.cutoff)
    cons = list(cnd.constraint_stream(cond, space, selfmap, dom))
    checked = 0
    for eps in _eps(args):
        r = cnd.modulus_detail(cond, space, selfmap, dom, eps, cons)
        checked += r.constraints
        if not r.holds:
            c = r.witness
            return cnd.ConditionReport(cond, Verdict.FAILS, f"{source} {dom.label} eps={fmt(eps)}", checked,
                                       cnd.Witness(c.where, c.premise, c.conclusion))
    return cnd.ConditionReport(cond, Verdict.HOLDS_ON_TRUNCATION, f"{source} {dom.label}", checked)


def cmd_modulus(args, out: Output) -> int:
    cond = ConditionId.parse(args.cond)
    if cond in cnd.POINTWISE:
        raise UsageError(f"{cond.value} has no modulus; use 'check'")
    cutoffs = [int(c) for c in args.cutoffs.split(",")] if args.cutoffs else [args.cutoff]
    if any(c < 1 for c in cutoffs):
        raise UsageError("--cutoffs must be positive")
    space, selfmap, source = _source(args, max(cutoffs))
    eps_list = _eps(args)
    if cond in cnd.PAIRWISE:
        domains = [cnd.point_domain(space, None if space.kind == "finite" else n) for n in cutoffs]
    else:
        start = _start(args, space)
        domains = [cnd.orbit_domain(space, selfmap, start, n) for n in cutoffs]
    try:
        profile = cnd.modulus_profile(cond, space, selfmap, domains, eps_list)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    header = ["condition", "domain", "eps"] + out.scalar_header("delta")
    rows = [[cond.value, s.domain, fmt(s.eps)] + out.scalar_cells(s.delta) for s in profile.samples]
    doc = profile.to_dict()
    doc["antitone"] = profile.is_antitone()
    out.emit(header, rows, doc)
    return EXIT_OK if all(s.delta > 0 for s in profile.samples) else EXIT_FAIL


def cmd_orbit(args, out: Output) -> int:
    space, selfmap, _ = _source(args, args.cutoff)
    start = _start(args, space)
    if args.audit:
        audit = cnd.kannan_equivalence_audit(space, selfmap, start, args.steps, _eps(args))
        header = ["eps", "K_II", "K_III", "K_IV", "eps=s_0"]
        rows = [[fmt(r.eps), fmt(r.k_ii), "excluded" if r.k_iii is None else fmt(r.k_iii), fmt(r.k_iv),
                 r.eps_is_first_gap] for r in audit.rows]
        out.emit(header, rows, audit.to_dict())
        if out.format == "table":
            sys.stdout.write(
                f"equivalence: {audit.equivalence}; delta1: {fmt(audit.delta1) if audit.delta1 is not None else 'skipped'}; "
                f"delta2: {fmt(audit.delta2) if audit.delta2 is not None else 'skipped'}\n"
            )
        return EXIT_FAIL if audit.equivalence == "refuted" else EXIT_OK
    if args.solve:
        rep = solve_fixed_point(space, selfmap, start, args.steps)
        header = ["found", "point", "iterations"] + out.scalar_header("alpha_upper") + ["monotone_strict", "unique"]
        rows = [[rep.found, rep.point.label if rep.point else "", rep.iterations] + out.scalar_cells(rep.alpha_upper)
                + [rep.monotone_strict, rep.unique]]
        out.emit(header, rows, rep.to_dict())
        return EXIT_FAIL if rep.contraction_witness is not None or rep.unique is False else EXIT_OK
    orbit = picard_orbit(space, selfmap, start, args.steps, truncate=not args.full)
    if args.cauchy:
        p_max, tail = (int(v) for v in args.cauchy.split(","))
        window = parse_rational_list(args.window_bound)[0] if args.window_bound else Fraction(1, tail + 1)
        bound = parse_rational_list(args.cauchy_bound)[0] if args.cauchy_bound else Fraction(1)
        rep = cauchy_diagnostics(orbit, p_max, tail, window, bound)
        header = ["p"] + out.scalar_header("window_max") + out.scalar_header("bound")
        rows = [[p + 1] + out.scalar_cells(m) + out.scalar_cells(b)
                for p, (m, b) in enumerate(zip(rep.window_max, rep.window_bounds))]
        out.emit(header, rows, rep.to_dict())
        if out.format == "table":
            a, b = rep.spread_witness
            sys.stdout.write(f"g_cauchy: {rep.g_cauchy.value}; cauchy: {rep.cauchy.value} "
                             f"(spread {fmt(rep.spread)} at ({a.label}, {b.label}))\n")
        return EXIT_OK
    header = ["n", "point"] + out.scalar_header("s_n")
    rows = []
    for n, p in enumerate(orbit.points):
        cells = out.scalar_cells(orbit.gaps[n]) if n < len(orbit.gaps) else [""] * len(out.scalar_header("s_n"))
        rows.append([n, p.label] + cells)
    out.emit(header, rows, orbit.to_dict())
    return EXIT_OK


def cmd_gallery(args, out: Output) -> int:
    if args.action == "list":
        out.emit(["id", "description"], [[g.value, DESCRIPTIONS[g]] for g in GalleryId],
                 {g.value: DESCRIPTIONS[g] for g in GalleryId})
        return EXIT_OK
    if not args.id:
        raise UsageError(f"gallery {args.action} needs an id")
    gid = GalleryId.parse(args.id)
    if args.action == "build":
        inst = build(gid, args.cutoff)
        doc = formats.space_to_dict(inst.space, inst.map)
        doc["facts"] = [{"description": f.description, "operation": f.operation, "expected": f.expected}
                        for f in inst.facts]
        sys.stdout.write(formats.dump_json(doc))
        return EXIT_OK
    rep = run_certification(gid, args.cutoff)
    rows = [[r.fact.operation, "pass" if r.outcome.passed else "FAIL", r.fact.description, r.outcome.detail]
            for r in rep.results]
    out.emit(["operation", "result", "fact", "detail"], rows, rep.to_dict())
    return EXIT_OK if rep.passed else EXIT_FAIL


def cmd_search(args, out: Output) -> int:
    hold = [ConditionId.parse(c) for c in args.hold.split(",") if c.strip()] if args.hold else []
    fail = [ConditionId.parse(c) for c in args.fail.split(",") if c.strip()] if args.fail else []
    if set(hold) & set(fail):
        raise UsageError("--hold and --fail must be disjoint")
    config = SearchConfig(
        max_points=args.max_points,
        grid=tuple(parse_rational_list(args.grid)),
        exhaustive=not args.random,
        budget=args.budget,
        seed=args.seed,
        min_points=args.min_points,
    )
    res = find_separation(hold, fail, config)
    doc = res.to_dict()
    if out.format == "json":
        out.emit([], [], doc)
    else:
        rows = [["found" if res.witness else ("exhausted" if res.exhausted else "not-found"),
                 res.visited, res.witness.id if res.witness else "", res.certificate()]]
        out.emit(["result", "visited", "witness", "certificate"], rows, doc)
    return EXIT_OK


# -- parser ----------------------------------------------------------------------


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--format", choices=["table", "json", "csv"], default="table")
    p.add_argument("--decimal", type=int, default=None, metavar="K",
                   help="add a K-digit decimal column (display only)")
    p.add_argument("--out", default=None, help="write the report to this file instead of stdout")
    p.add_argument("--seed", type=int, default=0)
    return p


def _source_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--gallery", help="gallery id (HALVING, PIECEWISE, KANNAN_L1, HARMONIC)")
    p.add_argument("--space", help="space/map definition file (JSON)")
    p.add_argument("--cutoff", type=int, default=10, help="parameter cutoff or orbit prefix")
    p.add_argument("--start", help="start point of the orbit")


def make_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="fixlab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", parents=[common], help="check one condition")
    _source_args(p)
    p.add_argument("--cond", required=True)
    p.add_argument("--pairs", help="pairs 'a,b;c,d' for CM_B/CM_K (default: all pairs)")
    p.add_argument("--eps", help="comma-separated levels for epsilon-delta conditions")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("modulus", parents=[common], help="tabulate delta*(eps)")
    _source_args(p)
    p.add_argument("--cond", required=True)
    p.add_argument("--eps", help="comma-separated rationals")
    p.add_argument("--cutoffs", help="comma-separated truncation depths")
    p.set_defaults(func=cmd_modulus)

    p = sub.add_parser("orbit", parents=[common], help="Picard orbit, Cauchy diagnostics, solving")
    _source_args(p)
    p.add_argument("--steps", type=int, default=10)
    p.add_argument("--full", action="store_true", help="do not stop at a fixed point or cycle")
    p.add_argument("--cauchy", metavar="PMAX,TAIL", help="run Cauchy/G-Cauchy diagnostics")
    p.add_argument("--window-bound", help="per-unit window bound w (window p bounded by p*w)")
    p.add_argument("--cauchy-bound", help="spread bound for the Cauchy verdict")
    p.add_argument("--solve", action="store_true", help="run the fixed-point solving flow")
    p.add_argument("--audit", action="store_true", help="Kannan K_II/K_III/K_IV audit over --steps")
    p.add_argument("--eps", help="levels for --audit")
    p.set_defaults(func=cmd_orbit)

    p = sub.add_parser("gallery", parents=[common], help="built-in examples")
    p.add_argument("action", choices=["list", "build", "certify"])
    p.add_argument("id", nargs="?")
    p.add_argument("--cutoff", type=int, default=50)
    p.set_defaults(func=cmd_gallery)

    p = sub.add_parser("search", parents=[common], help="finite separation search")
    p.add_argument("action", choices=["separate"])
    p.add_argument("--hold", default="")
    p.add_argument("--fail", default="")
    p.add_argument("--max-points", type=int, default=3)
    p.add_argument("--min-points", type=int, default=2)
    p.add_argument("--grid", default="1/2,1,3/2,2")
    p.add_argument("--random", action="store_true", help="seeded sampling instead of exhaustive search")
    p.add_argument("--budget", type=int, default=100)
    p.set_defaults(func=cmd_search)
    return parser


def run(argv: Sequence[str] | None = None) -> int:
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    out = Output(args)
    buf = io.StringIO()
    try:
        with contextlib.redirect_stdout(buf):
            code = args.func(args, out)
    except (UsageError, DomainError, ValueError) as exc:
        print(f"fixlab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(buf.getvalue())
    else:
        sys.stdout.write(buf.getvalue())
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
