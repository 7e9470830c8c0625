"""``paramcont`` command-line front end.

Exit codes: 0 success, 1 a check failed (report still written), 2 bad input.
Every command that writes ``--out FILE`` also writes ``FILE.manifest.json``
with input digests and the configuration; without ``--out`` the result goes
to stdout and the manifest to stderr.
"""

from __future__ import annotations

import argparse
import os
import sys
import time
from typing import Any, Callable, Sequence

from threadpoolctl import threadpool_limits

from paramcont import __version__, io, plotdata
from paramcont.axioms import check_all
from paramcont.builder import (
    BuildConfig,
    EnvelopeError,
    PreconditionError,
    build_representation,
    build_urysohn_pair,
)
from paramcont.maxtheorem import (
    budget_correspondence,
    check_uhc,
    check_value_continuity,
    lemma2_exhaustive,
    measured_modulus,
    price_wealth_space,
    value_and_argmax,
)
from paramcont.model import AlternativeSet, PreferenceField
from paramcont.spaces import GridSpec, SplitSpec, grid_box, product_space, split_interval, triple_split
from paramcont.verify import modulus_report, triple_split_obstruction

THREADS_ENV = "PARAMCONT_THREADS"


class Outcome:
    """What a subcommand produced: the JSON document, whether its checks passed, and input files."""

    def __init__(self, doc: Any, ok: bool = True, inputs: Sequence[str] = (), extra: dict[str, Any] | None = None):
        self.doc = doc
        self.ok = ok
        self.inputs = list(inputs)
        self.extra = extra or {}


# --- subcommands ---------------------------------------------------------------------------


def _cmd_space(args: argparse.Namespace) -> Outcome:
    if args.kind == "grid":
        radii = tuple(args.radii) if args.radii else GridSpec.__dataclass_fields__["radii"].default
        space = grid_box(GridSpec(tuple(map(tuple, args.bounds)), args.resolution, radii))
        return Outcome(io.space_to_json(space))
    if args.kind == "split":
        return Outcome(io.space_to_json(split_interval(SplitSpec(args.m, "two", args.depth))))
    if args.kind == "triple-split":
        return Outcome(io.space_to_json(triple_split(SplitSpec(args.m, "three", args.depth))))
    if args.kind == "product":
        left, right = io.load_space(args.left), io.load_space(args.right)
        return Outcome(io.space_to_json(product_space(left, right)), inputs=[args.left, args.right])
    # price-wealth
    space, grid = price_wealth_space(tuple(map(tuple, args.price_bounds)), tuple(args.wealth_bounds), args.resolution)
    alts = AlternativeSet.lattice(len(args.price_bounds), args.cap)
    io.write_json(args.grid_out, io.grid_to_json(grid, alts))
    return Outcome(io.space_to_json(space), extra={"grid_out": args.grid_out})


def _cmd_prefs(args: argparse.Namespace) -> Outcome:
    U = io.load_utility(args.utility)
    field = PreferenceField.from_utility(U.values, tol=args.tol)
    return Outcome(io.prefs_to_json(field), inputs=[args.utility])


def _cmd_check(args: argparse.Namespace) -> Outcome:
    space = io.load_space(args.space)
    field = io.load_prefs(args.prefs, space.size)
    reports = check_all(field, space, args.axiom)
    return Outcome([r.to_json() for r in reports], all(r.passed for r in reports), [args.space, args.prefs])


def _cmd_build(args: argparse.Namespace) -> Outcome:
    space = io.load_space(args.space)
    field = io.load_prefs(args.prefs, space.size)
    cfg = BuildConfig(
        enumeration_order=tuple(args.order) if args.order else None,
        smoothing_rounds=args.rounds,
        strict_gap_fraction=args.gamma,
        urysohn_terms=args.terms,
        max_alternatives=args.max_alts,
    )
    U = build_urysohn_pair(field, space, cfg) if args.method == "urysohn" else build_representation(field, space, cfg)
    return Outcome(io.utility_to_json(U), inputs=[args.space, args.prefs], extra={"utility": U, "space": space})


def _cmd_maximize(args: argparse.Namespace) -> Outcome:
    U = io.load_utility(args.utility)
    space = io.load_space(args.space)
    grid, alts = io.load_grid(args.grid)
    if len(grid) != space.size:
        raise io.InputError(args.grid, "$.wealth", f"grid has {len(grid)} nodes, space has {space.size}")
    if U.n_nodes != space.size:
        raise io.InputError(args.utility, "$.values", f"utility has {U.n_nodes} nodes, space has {space.size}")
    if U.n_alts != alts.count:
        raise io.InputError(args.utility, "$.values", f"utility has {U.n_alts} alternatives, grid has {alts.count}")
    B = budget_correspondence(grid, alts)
    V, C = value_and_argmax(U, B, args.tie_tol)
    schedule = list(args.schedule) if args.schedule else [s + args.slack for s in measured_modulus(U, space)]
    reports = [
        dict(check_uhc(B, space).to_json(), target="budget"),
        dict(check_uhc(C, space).to_json(), target="argmax"),
        check_value_continuity(V, space, schedule).to_json(),
    ]
    doc = {"V": V, "C": io.correspondence_to_json(C), "schedule": schedule, "reports": reports}
    return Outcome(
        doc,
        all(r["passed"] for r in reports),
        [args.utility, args.space, args.grid],
        extra={"value": V, "space": space},
    )


def _cmd_demo(args: argparse.Namespace) -> Outcome:
    res = lemma2_exhaustive(args.m)
    doc = {
        "m": res.m,
        "total": res.total,
        "passing_both": res.passing_both,
        "counterexamples": [[sorted(s) for s in c] for c in res.counterexamples],
        "holds": res.holds,
    }
    return Outcome(doc, res.holds)


def _cmd_obstruct(args: argparse.Namespace) -> Outcome:
    sched: float | list[float] = args.schedule[0] if len(args.schedule) == 1 else list(args.schedule)
    rep = triple_split_obstruction(args.m, tuple(args.interval), sched, tuple(args.multipliers))
    return Outcome(rep.to_json(), extra={"obstruction": rep})


def _cmd_report(args: argparse.Namespace) -> Outcome:
    U = io.load_utility(args.utility)
    space = io.load_space(args.space)
    if U.n_nodes != space.size:
        raise io.InputError(args.utility, "$.values", f"utility has {U.n_nodes} nodes, space has {space.size}")
    rep = modulus_report(U, space)
    return Outcome(rep.to_json(), inputs=[args.utility, args.space], extra={"modulus": rep})


def _emit_plotdata(args: argparse.Namespace, out: Outcome) -> None:
    d = args.plotdata
    x = out.extra
    if "modulus" in x:
        plotdata.modulus_csv(x["modulus"], d)
    if "obstruction" in x:
        plotdata.obstruction_csv(x["obstruction"], d)
    if "value" in x:
        plotdata.value_csv(x["value"], x["space"], d)
    if "utility" in x:
        plotdata.utility_csv(x["utility"], x["space"], d)


# --- parser ------------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="output JSON file (default: stdout)")
    common.add_argument("--plotdata", metavar="DIR", help="also write flat CSV files for plotting")

    p = argparse.ArgumentParser(prog="paramcont", description="Parametric utility representations on sampled spaces.")
    p.add_argument("--version", action="version", version=f"paramcont {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("space", help="emit a sampled space")
    kinds = sp.add_subparsers(dest="kind", required=True)
    g = kinds.add_parser("grid", parents=[common], help="lattice over a box with Euclidean balls")
    g.add_argument("--bounds", nargs=2, type=float, action="append", required=True, metavar=("LO", "HI"))
    g.add_argument("--resolution", type=int, required=True)
    g.add_argument("--radii", nargs="+", type=float, help="ball radii in lattice steps, outermost first")
    for name in ("split", "triple-split"):
        s = kinds.add_parser(name, parents=[common])
        s.add_argument("--m", type=int, required=True)
        s.add_argument("--depth", type=int, default=3)
    pr = kinds.add_parser("product", parents=[common])
    pr.add_argument("--left", required=True)
    pr.add_argument("--right", required=True)
    pw = kinds.add_parser("price-wealth", parents=[common], help="price x wealth grid plus a budget grid file")
    pw.add_argument("--price-bounds", nargs=2, type=float, action="append", required=True, metavar=("LO", "HI"))
    pw.add_argument("--wealth-bounds", nargs=2, type=float, required=True, metavar=("LO", "HI"))
    pw.add_argument("--resolution", type=int, required=True)
    pw.add_argument("--cap", type=int, required=True, help="largest stored quantity per good")
    pw.add_argument("--grid-out", required=True)
    sp.set_defaults(func=_cmd_space)

    pf = sub.add_parser("prefs", help="derive a preference file")
    pk = pf.add_subparsers(dest="kind", required=True)
    fu = pk.add_parser("from-utility", parents=[common])
    fu.add_argument("--utility", required=True)
    fu.add_argument("--tol", type=float, default=0.0)
    pf.set_defaults(func=_cmd_prefs)

    c = sub.add_parser("check", parents=[common], help="check the preference axioms")
    c.add_argument("--space", required=True)
    c.add_argument("--prefs", required=True)
    c.add_argument("--axiom", choices=["asy", "nt", "cd", "jc", "all"], default="all")
    c.set_defaults(func=_cmd_check)

    b = sub.add_parser("build", parents=[common], help="build a utility representation")
    b.add_argument("--space", required=True)
    b.add_argument("--prefs", required=True)
    b.add_argument("--method", choices=["inductive", "urysohn"], default="inductive")
    b.add_argument("--order", nargs="+", type=int, help="enumeration order of the alternatives")
    b.add_argument("--rounds", type=int, default=BuildConfig.smoothing_rounds)
    b.add_argument("--gamma", type=float, default=BuildConfig.strict_gap_fraction)
    b.add_argument("--terms", type=int, default=BuildConfig.urysohn_terms)
    b.add_argument("--max-alts", type=int, default=BuildConfig.max_alternatives, help="refuse fields with more alternatives")
    b.set_defaults(func=_cmd_build)

    mx = sub.add_parser("maximize", parents=[common], help="value function and argmax under a constraint")
    mx.add_argument("--utility", required=True)
    mx.add_argument("--space", required=True)
    mx.add_argument("--constraint", choices=["budget"], default="budget")
    mx.add_argument("--grid", required=True)
    mx.add_argument("--schedule", nargs="+", type=float, help="per-depth bound (default: measured modulus of U)")
    mx.add_argument("--slack", type=float, default=0.0)
    mx.add_argument("--tie-tol", type=float, default=0.0, help="treat values within this distance of the max as ties")
    mx.set_defaults(func=_cmd_maximize)

    d = sub.add_parser("demo", help="exhaustive demonstrations")
    dk = d.add_subparsers(dest="kind", required=True)
    lh = dk.add_parser("lemma-lhc", parents=[common], help="hemicontinuous correspondences into two points are constant")
    lh.add_argument("--m", type=int, default=6)
    d.set_defaults(func=_cmd_demo)

    o = sub.add_parser("obstruct", help="obstruction bounds")
    ok_ = o.add_subparsers(dest="kind", required=True)
    ts = ok_.add_parser("triple-split", parents=[common])
    ts.add_argument("--m", type=int, required=True)
    ts.add_argument("--interval", nargs=2, type=float, required=True, metavar=("LO", "HI"))
    ts.add_argument("--schedule", nargs="+", type=float, required=True, help="modulus coefficient, one or per depth")
    ts.add_argument("--multipliers", nargs="+", type=int, default=[1, 2, 4])
    o.set_defaults(func=_cmd_obstruct)

    r = sub.add_parser("report", help="continuity reports")
    rk = r.add_subparsers(dest="kind", required=True)
    mo = rk.add_parser("modulus", parents=[common])
    mo.add_argument("--utility", required=True)
    mo.add_argument("--space", required=True)
    r.set_defaults(func=_cmd_report)
    return p


def _threads() -> int:
    raw = os.environ.get(THREADS_ENV, "").strip()
    if not raw:
        return 1
    n = int(raw)
    if n < 1:
        raise ValueError
    return n


def _config_echo(args: argparse.Namespace) -> dict[str, Any]:
    return {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "out", "plotdata")}


def run(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        threads = _threads()
    except ValueError:
        print(f"paramcont: {THREADS_ENV} must be a positive integer", file=sys.stderr)
        return 2
    func: Callable[[argparse.Namespace], Outcome] = args.func
    start = time.perf_counter()
    try:
        with threadpool_limits(limits=threads):
            out = func(args)
    except io.InputError as exc:
        print(f"paramcont: input error: {exc}", file=sys.stderr)
        return 2
    except (PreconditionError, EnvelopeError) as exc:
        print(f"paramcont: check failed: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"paramcont: input error: {exc}", file=sys.stderr)
        return 2
    manifest = {
        "command": ["paramcont", *argv],
        "inputs": {p: io.digest(p) for p in out.inputs},
        "config": _config_echo(args),
        "threads": threads,
        "version": __version__,
        "duration_s": time.perf_counter() - start,
    }
    if args.out:
        io.write_json(args.out, out.doc)
        io.write_json(str(args.out) + ".manifest.json", manifest)
    else:
        sys.stdout.write(io.dumps(out.doc))
        sys.stderr.write(io.dumps(manifest))
    if args.plotdata:
        _emit_plotdata(args, out)
    return 0 if out.ok else 1


def main() -> None:
    sys.exit(run())
