"""Command-line entry point: ``sslab <subcommand> ...``.

Exit codes: 0 ok, 1 usage, 2 parse or validation error, 3 cap exceeded,
4 numerical non-convergence.  An effective-configuration header goes to
stderr so that stdout stays machine readable.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys

from . import __version__, caps
from .errors import (CapExceeded, ConvergenceError, NeedsMoreLetters, NonUniformMachine,
                     NotEventuallyPeriodic, SSLabError)
from .words import RaySpec, symbols_text, tokenize


class _Usage(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _Usage(f"{self.prog}: {message}")


def _add_source(p, required=True):
    g = p.add_mutually_exclusive_group(required=required)
    g.add_argument("--group", help="zoo entry name")
    g.add_argument("--file", help="machine-definition document")
    p.add_argument("--param", action="append", default=[], metavar="KEY=VALUE",
                   help="zoo family parameter (repeatable)")


def _params(items):
    out = {}
    for item in items:
        key, sep, value = item.partition("=")
        if not sep:
            raise _Usage(f"parameter {item!r} must look like key=value")
        out[key] = value
    return out


def _ints(text):
    out = []
    for chunk in text.split(","):
        chunk = chunk.strip()
        if "-" in chunk[1:]:
            lo, hi = chunk.split("-", 1)
            out.extend(range(int(lo), int(hi) + 1))
        elif chunk:
            out.append(int(chunk))
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="sslab", description="Activity and recurrence diagnostics for self-similar actions.")
    parser.add_argument("--version", action="version", version=f"sslab {__version__}")
    parser.add_argument("--quiet", action="store_true", help="omit the configuration header")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("eval", help="apply an element to a word or ray")
    _add_source(p)
    p.add_argument("--word", required=True, help='group word, e.g. "a b^-1"')
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--input", help="finite input word")
    src.add_argument("--ray", help="eventually periodic input prefix:period")
    p.add_argument("--section", action="store_true", help="also print the section after the input")

    p = sub.add_parser("equal", help="decide whether two words act identically")
    _add_source(p)
    p.add_argument("--left", required=True)
    p.add_argument("--right", required=True)

    p = sub.add_parser("activity", help="activity class and counts")
    _add_source(p)
    p.add_argument("--words", help="comma separated elements (default: every generator)")
    p.add_argument("--samples", default="1,2,4,8,16")
    p.add_argument("--format", choices=("table", "csv", "json"), default="table")

    p = sub.add_parser("schreier", help="Schreier graph of a level or an orbit ball")
    _add_source(p)
    p.add_argument("--gens", help="comma separated generators (default: all)")
    where = p.add_mutually_exclusive_group(required=True)
    where.add_argument("--level", type=int)
    where.add_argument("--ray")
    p.add_argument("--radius", type=int, default=4)
    p.add_argument("--format", choices=("dot", "csv"), default="dot")

    p = sub.add_parser("recurrence", help="capacity profile and Nash-Williams sums")
    _add_source(p)
    p.add_argument("--gens", help="comma separated generators (default: all)")
    p.add_argument("--ray", required=True)
    p.add_argument("--radii", default="2,4,8,16")
    p.add_argument("--folner", help="levels for the cofinality chain, e.g. 1-12")
    p.add_argument("--format", choices=("table", "csv", "json"), default="table")

    p = sub.add_parser("adic", help="adic transformation on an ordered diagram")
    p.add_argument("--file", help="ordered diagram document (default: binary odometer)")
    p.add_argument("--depth", type=int, default=3)
    p.add_argument("--vertex", help="end vertex for the orbit of the minimal path")

    p = sub.add_parser("zoo", help="list or show catalogue entries")
    zsub = p.add_subparsers(dest="zoo_command", required=True, parser_class=_Parser)
    zsub.add_parser("list")
    q = zsub.add_parser("show")
    q.add_argument("name")
    q.add_argument("--param", action="append", default=[], metavar="KEY=VALUE")
    q.add_argument("--format", choices=("text", "json"), default="text")
    q.add_argument("--claims", action="store_true", help="evaluate the entry's claims")

    p = sub.add_parser("validate", help="check a machine document")
    _add_source(p)
    p.add_argument("--canonical", action="store_true", help="print the canonical document")
    return parser


# -- helpers -------------------------------------------------------------------------


def _machine(args):
    from .core.document import parse_machine
    from .core.machine import MachineDef
    from .zoo import zoo_build

    if args.file:
        with open(args.file, encoding="utf-8") as fh:
            return parse_machine(fh.read())
    entry = zoo_build(args.group, _params(args.param))
    if not isinstance(entry.machine, MachineDef):
        raise _Usage(f"{args.group} is a diagram entry; use the adic subcommand")
    return entry.machine


def _gens(m, text):
    if not text:
        return list(m.names)
    return [s.strip() for s in text.split(",") if s.strip()]


def _ray(m, text):
    return RaySpec.parse(text, m.alphabet.symbols())


def _emit_rows(rows, fmt, out):
    if fmt == "json":
        out.write(json.dumps(rows, indent=2, ensure_ascii=False) + "\n")
        return
    if not rows:
        return
    cols = list(rows[0])
    if fmt == "csv":
        w = csv.writer(out, lineterminator="\n")
        w.writerow(cols)
        for r in rows:
            w.writerow([r[c] for c in cols])
        return
    cells = [[str(r[c]) for c in cols] for r in rows]
    widths = [max(len(c), *(len(row[i]) for row in cells)) for i, c in enumerate(cols)]
    out.write("  ".join(c.ljust(w) for c, w in zip(cols, widths)).rstrip() + "\n")
    for row in cells:
        out.write("  ".join(x.ljust(w) for x, w in zip(row, widths)).rstrip() + "\n")


# -- commands ------------------------------------------------------------------------


def _cmd_eval(args, out):
    from .core.engine import apply_prefix, apply_ray, apply_word, section_of

    m = _machine(args)
    g = m.word(args.word)
    level = m.home_of(g)
    if args.ray:
        out.write(str(apply_ray(m, g, _ray(m, args.ray), level)) + "\n")
        return 0
    v = tokenize(args.input, m.alphabet.symbols())
    try:
        img = apply_word(m, g, v, level)
    except NeedsMoreLetters as exc:
        out.write(symbols_text(apply_prefix(m, g, v, level)) + "\n")
        args.err.write(f"note: output prefix only; {exc}\n")
        return 0
    out.write(symbols_text(img) + "\n")
    if args.section:
        out.write(f"section: {section_of(m, g, v, level)}\n")
    return 0


def _cmd_equal(args, out):
    from .core.engine import equals_exact, is_trivial_to_depth

    m = _machine(args)
    g, h = m.word(args.left), m.word(args.right)
    try:
        same = equals_exact(m, g, h)
        out.write(("equal" if same else "not equal") + " (exact)\n")
    except NonUniformMachine:
        depth = caps.get("depth")
        same = is_trivial_to_depth(m, g * h.inverse(), depth)
        out.write(("equal" if same else "not equal") + f" (to depth {depth})\n")
    return 0


def _cmd_activity(args, out):
    from .activity import activity_table

    m = _machine(args)
    words = _gens(m, args.words)
    rows = activity_table(m, words, tuple(_ints(args.samples)))
    _emit_rows(rows, args.format, out)
    return 0


def _cmd_schreier(args, out):
    from .schreier import export_graph, level_graph, orbit_ball

    m = _machine(args)
    S = _gens(m, args.gens)
    if args.level is not None:
        graph = level_graph(m, S, args.level)
    else:
        graph = orbit_ball(m, S, _ray(m, args.ray), args.radius)
    out.write(export_graph(graph, args.format))
    return 0


def _cmd_recurrence(args, out):
    from .recurrence import capacity_profile, nash_williams_certify
    from .schreier import folner_chain, select_disjoint

    m = _machine(args)
    S = _gens(m, args.gens)
    p = _ray(m, args.ray)
    prof = capacity_profile(m, S, p, _ints(args.radii))
    report = None
    if args.folner:
        chain = select_disjoint(folner_chain(m, S, p, _ints(args.folner)))
        report = nash_williams_certify(chain)
    if args.format == "json":
        data = {
            "radii": prof.radii, "energy": prof.energies, "conductance": prof.conductances,
            "residual": prof.residuals, "truncated": prof.truncated, "verdict": prof.verdict,
        }
        if report:
            data["nash_williams"] = {
                "n": report.ns, "boundary": report.boundary_sizes,
                "partial_sum": [float(s) for s in report.partial_sums], "verdict": report.verdict,
            }
        out.write(json.dumps(data, indent=2) + "\n")
        return 0
    if args.format == "csv":
        out.write(prof.to_csv())
        if report:
            out.write("\n" + report.to_csv())
        return 0
    rows = [
        {"radius": r, "energy": f"{e:.10g}", "conductance": f"{c:.10g}", "residual": f"{x:.2e}"}
        for r, e, c, x in zip(prof.radii, prof.energies, prof.conductances, prof.residuals)
    ]
    _emit_rows(rows, "table", out)
    out.write(f"capacity trend: {prof.verdict} (heuristic)\n")
    if report:
        out.write("\n")
        _emit_rows([{"n": n, "boundary": b, "partial_sum": f"{float(s):.6g}"}
                    for n, b, s in zip(report.ns, report.boundary_sizes, report.partial_sums)],
                   "table", out)
        out.write(f"nash-williams: {report.verdict}\n")
    return 0


def _cmd_adic(args, out):
    from .bratteli import (OrderedBratteliDiagram, adic_element, adic_successor, extreme_path,
                           odometer_diagram, parse_diagram, serialize_element)

    if args.file:
        with open(args.file, encoding="utf-8") as fh:
            D = parse_diagram(fh.read())
        if not isinstance(D, OrderedBratteliDiagram):
            raise SSLabError("the diagram has no edge orders")
    else:
        D = odometer_diagram(max(args.depth, 1))
    n = args.depth
    out.write(serialize_element(adic_element(D, n)))
    start = extreme_path(D, n, args.vertex, "min")
    p, k = adic_successor(D, start, wrap=True), 1
    while p != start:
        p, k = adic_successor(D, p, wrap=True), k + 1
    out.write(f"period of minimal path: {k}\n")
    return 0


def _cmd_zoo(args, out):
    from .core.document import serialize_machine
    from .core.machine import MachineDef
    from .zoo import zoo_build, zoo_names

    if args.zoo_command == "list":
        for name in zoo_names():
            out.write(name + "\n")
        return 0
    entry = zoo_build(args.name, _params(args.param))
    if isinstance(entry.machine, MachineDef):
        text = serialize_machine(entry.machine, "json" if args.format == "json" else "text")
    else:
        from .bratteli import serialize_diagram

        text = serialize_diagram(entry.machine)
    out.write(text)
    if args.claims:
        for statement, ok in entry.check_claims().items():
            out.write(f"# {'ok  ' if ok else 'FAIL'} {statement}\n")
    return 0


def _cmd_validate(args, out):
    from .core.document import serialize_machine

    m = _machine(args)
    if args.canonical:
        out.write(serialize_machine(m))
    else:
        out.write(f"valid: {len(m.names)} generators, period {m.alphabet.period}"
                  f"{', subshift' if m.subshift else ''}\n")
    return 0


_COMMANDS = {
    "eval": _cmd_eval, "equal": _cmd_equal, "activity": _cmd_activity,
    "schreier": _cmd_schreier, "recurrence": _cmd_recurrence, "adic": _cmd_adic,
    "zoo": _cmd_zoo, "validate": _cmd_validate,
}


def _header(argv) -> str:
    eff = caps.effective()
    return (f"# sslab {__version__} | {' '.join(argv)} | caps "
            + ",".join(f"{k}={v}" for k, v in sorted(eff.items())) + "\n")


def run(argv=None, out=None, err=None) -> int:
    """Run one command; returns the exit status."""
    argv = list(sys.argv[1:] if argv is None else argv)
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        args = build_parser().parse_args(argv)
    except _Usage as exc:
        err.write(f"{exc}\n")
        return 1
    except SystemExit as exc:  # --help and --version
        return 0 if exc.code in (0, None) else 1
    try:
        if not args.quiet:
            err.write(_header(argv))
        buf = io.StringIO()
        args.err = err
        code = _COMMANDS[args.command](args, buf)
        out.write(buf.getvalue())
        return code
    except _Usage as exc:
        err.write(f"sslab: {exc}\n")
        return 1
    except (CapExceeded, NotEventuallyPeriodic) as exc:
        err.write(f"sslab: cap exceeded: {exc}\n")
        return 3
    except ConvergenceError as exc:
        err.write(f"sslab: no convergence: {exc}\n")
        return 4
    except SSLabError as exc:
        err.write(f"sslab: {type(exc).__name__}: {exc}\n")
        return 2
    except OSError as exc:
        err.write(f"sslab: {exc}\n")
        return 2


def main() -> None:
    sys.exit(run())
