"""Command-line entry point: ``gumira <subcommand> ...``.

Every output file records the arguments that produced it, so ``gumira replay FILE``
can regenerate it and check that the bytes agree.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction

import numpy as np

from . import __version__
from .classify import GAP_FACTOR, MIN_CLUSTER, N_TERMS, classify_behavior
from .dynamics import Direction, MapSpec, iterate
from .errors import DivergedOrbit, GumiraError
from .geometry import Branch, critical_values, fixed_points, level_topology
from .invariants import IntegralSpec
from .invsearch import search_invariant
from .local import local_report
from .periods import (admissible_periods, find_level_with_rho, operational_q0, sweep_bracket,
                      two_periodic_locus)
from .rotation import estimate_winding, flow_rotation, limit_rho

ARGS_TAG = "# args: "


def _pair(text):
    try:
        x, y = (float(t) for t in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected two comma-separated numbers, got {text!r}")
    return x, y


def _positive(text):
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if not v > 0:
        raise argparse.ArgumentTypeError(f"must be positive: {text!r}")
    return v


def _fraction(text):
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}")


def _fractions(text):
    return [_fraction(t) for t in text.split(",") if t]


def _grid(text):
    """``lo:hi:log|lin:N``."""
    try:
        lo, hi, kind, n = text.split(":")
        lo, hi, n = float(lo), float(hi), int(n)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected lo:hi:log|lin:N, got {text!r}")
    if kind not in ("log", "lin") or n < 1 or (kind == "log" and not (lo > 0 and hi > 0)):
        raise argparse.ArgumentTypeError(f"bad grid {text!r}")
    if n == 1:
        return [lo]
    return [float(h) for h in (np.geomspace(lo, hi, n) if kind == "log" else np.linspace(lo, hi, n))]


def _json_safe(v):
    """NaN and infinities become null; numpy scalars become plain floats."""
    if isinstance(v, dict):
        return {k: _json_safe(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_json_safe(x) for x in v]
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else None
    return v


def _emit_json(obj, argv, out):
    obj = _json_safe(obj)
    obj["args"] = argv
    out.write(json.dumps(obj, sort_keys=True, indent=2) + "\n")


def _threads():
    try:
        return max(1, int(os.environ.get("GUMIRA_THREADS", "1")))
    except ValueError:
        return 1


def cmd_orbit(ns, argv, out):
    ctor = MapSpec.composed_g if ns.family == "G" else MapSpec.composed_f
    direction = Direction.BACKWARD if ns.backward else Direction.FORWARD
    spec = ctor(ns.a, ns.b, direction)
    integral = IntegralSpec.V(ns.a, ns.b) if ns.family == "G" else IntegralSpec.W(ns.a)
    name = "V" if ns.family == "G" else "W"
    diverged = None
    try:
        orbit = iterate(spec, ns.seed, ns.n, integral)
    except DivergedOrbit as exc:
        orbit, diverged = exc.orbit, exc.last_step
        orbit.trace = np.asarray(integral(orbit.x, orbit.y), dtype=float)
    out.write(f"n,x,y,{name}\n")
    for n, x, y, v in zip(orbit.steps, orbit.x, orbit.y, orbit.trace):
        out.write(f"{n},{float(x)!r},{float(y)!r},{float(v)!r}\n")
    if diverged is not None:
        out.write(f"# diverged after step {diverged}\n")
    out.write(ARGS_TAG + json.dumps(argv) + "\n")
    return 1 if diverged is not None else 0


def _gnuplot_script(csv_path, name):
    return (
        "set datafile separator ','\n"
        "set datafile commentschars '#'\n"
        "set key off\nset size ratio -1\n"
        "set xlabel 'x'\nset ylabel 'y'\n"
        f"plot '{csv_path}' every ::1 using 2:3 with dots\n"
        "pause -1\n"
        f"set size noratio\nset xlabel 'n'\nset ylabel '{name}'\n"
        f"plot '{csv_path}' every ::1 using 1:4 with lines\n"
        "pause -1\n"
    )


def cmd_levels(ns, argv, out):
    a, b = ns.a, ns.b
    cv = critical_values(a, b) if a * b < 0.25 else None
    fp = fixed_points(a, b)
    levels = []
    for h in ns.h or []:
        d = level_topology(a, b, h)
        levels.append({
            "h": h,
            "topology": d.topology.value,
            "projection_V_ba": d.projection_V_ba.to_list() if d.projection_V_ba else None,
            "projection_V_ab": d.projection_V_ab.to_list() if d.projection_V_ab else None,
        })
    report = {
        "a": a,
        "b": b,
        "h_min": cv.h_min if cv else 0.0,
        "h_plus": cv.h_plus if cv else None,
        "h_minus": cv.h_minus if cv else None,
        "fixed_points": [list(p) for p in fp.pair] if fp.pair else [],
        "levels": levels,
    }
    _emit_json(report, argv, out)
    return 0


def _limit_tags(a, b, h, first, last):
    tags = []
    if first and h > 0:
        tags.append(f"zero+={limit_rho(a, b, 'zero+')!r}")
    if first and h < 0 and a * b < 0.25:
        tags.append(f"P+-={limit_rho(a, b, 'P+-', oriented=True)!r}")
    if last and h > 0:
        tags.append(f"infinity={limit_rho(a, b, 'infinity')!r}")
    return ";".join(tags)


def cmd_rotation(ns, argv, out):
    a, b = ns.a, ns.b
    hs = sorted(ns.h_grid)
    branch = Branch(ns.branch) if ns.branch else None

    def work(h):
        try:
            w = estimate_winding(a, b, h, branch, ns.n_iterates).rho
        except GumiraError:
            w = float("nan")
        f = float("nan")
        if not ns.no_flow:
            try:
                f = flow_rotation(a, b, h, branch)[1].rho
            except GumiraError:
                pass
        return h, w, f

    with ThreadPoolExecutor(max_workers=_threads()) as pool:
        rows = sorted(pool.map(work, hs), key=lambda r: r[0])
    out.write("h,rho_winding,rho_flow,limit_tags\n")
    for i, (h, w, f) in enumerate(rows):
        tags = _limit_tags(a, b, h, i == 0, i == len(rows) - 1)
        out.write(f"{float(h)!r},{float(w)!r},{float(f)!r},{tags}\n")
    out.write(ARGS_TAG + json.dumps(argv) + "\n")
    return 0


def cmd_classify(ns, argv, out):
    rep = classify_behavior(ns.family, ns.a, ns.b, ns.seed[0], ns.seed[1], ns.n,
                            ns.gap_factor, ns.min_cluster, split_parity=ns.split_parity)
    _emit_json({
        "family": ns.family,
        "a": ns.a,
        "b": ns.b,
        "seed": list(ns.seed),
        "behavior": rep.behavior.value,
        "q": rep.q,
        "count": rep.count,
        "intervals": rep.intervals.to_list(),
        "n_points": rep.n_points,
        "diverged_at": rep.diverged_at,
    }, argv, out)
    return 1 if rep.diverged_at is not None else 0


def cmd_periods(ns, argv, out):
    a, b = ns.a, ns.b
    locus = two_periodic_locus(a, b)
    report = {
        "a": a,
        "b": b,
        "admissible": admissible_periods(a, b, ns.q_max),
        "q0": operational_q0(a, b, ns.q_max),
        "two_periodic": {
            "status": locus.status.value,
            "h": locus.h,
            "residual": locus.residual,
            "points": [list(p) for p in locus.points],
        },
    }
    if ns.target is not None:
        branch = Branch(ns.branch) if ns.branch else None
        if ns.h_range is not None:
            lo, hi, log = ns.h_range
            bracket = sweep_bracket(a, b, ns.target, lo, hi, branch, log=log)
        else:
            bracket = sweep_bracket(a, b, ns.target, 1e-4, 1e4, branch, log=True)
        lvl = find_level_with_rho(a, b, ns.target, bracket, branch)
        report["level"] = {
            "target": f"{ns.target.numerator}/{ns.target.denominator}",
            "h": lvl.h,
            "rho": lvl.rho,
            "map_period": lvl.q,
            "sequence_period": 2 * lvl.q,
            "residual": lvl.residual,
            "seed": list(lvl.seed),
        }
    _emit_json(report, argv, out)
    return 0


def _range(text):
    """``lo:hi`` or ``lo:hi:log``."""
    parts = text.split(":")
    try:
        lo, hi = float(parts[0]), float(parts[1])
    except (ValueError, IndexError):
        raise argparse.ArgumentTypeError(f"expected lo:hi[:log], got {text!r}")
    if len(parts) > 3 or (len(parts) == 3 and parts[2] != "log"):
        raise argparse.ArgumentTypeError(f"expected lo:hi[:log], got {text!r}")
    return lo, hi, len(parts) == 3


def cmd_search_invariant(ns, argv, out):
    res = search_invariant(ns.betas)
    _emit_json({
        "betas": [f"{b.numerator}/{b.denominator}" for b in res.betas],
        "minimal_period": res.minimal_period,
        "exists": res.exists,
        "inherited": res.inherited,
        "nullspace_dim": len(res.basis),
        "basis": [ans.to_strings() for ans in res.basis],
    }, argv, out)
    return 0


def cmd_local(ns, argv, out):
    _emit_json(local_report(ns.a, ns.b).to_dict(), argv, out)
    return 0


def _add_ab(p):
    p.add_argument("-a", type=_positive, required=True, help="first parameter (used on the first step)")
    p.add_argument("-b", type=_positive, required=True, help="second parameter")


def _add_output(p):
    p.add_argument("-o", "--output", help="output file (default: standard output)")


def build_parser():
    parser = argparse.ArgumentParser(prog="gumira", description="Two-periodic Gumovski-Mira recurrences.")
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("--replay", metavar="FILE", help="regenerate FILE from its recorded arguments and compare")
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("orbit", help="orbit of the composed map as CSV")
    p.add_argument("--family", choices=("G", "F"), default="G")
    _add_ab(p)
    p.add_argument("--seed", type=_pair, required=True, help="starting point x,y")
    p.add_argument("-n", type=int, default=1000, help="number of steps (default 1000)")
    p.add_argument("--backward", action="store_true", help="iterate the inverse map")
    p.add_argument("--gnuplot", metavar="PATH", help="also write a gnuplot script reading the CSV")
    _add_output(p)
    p.set_defaults(func=cmd_orbit)

    p = sub.add_parser("levels", help="critical values and level-set projections as JSON")
    _add_ab(p)
    p.add_argument("--h", type=float, action="append", help="level value (repeatable)")
    _add_output(p)
    p.set_defaults(func=cmd_levels)

    p = sub.add_parser("rotation", help="rotation-number sweep as CSV")
    _add_ab(p)
    p.add_argument("--h-grid", type=_grid, required=True, help="lo:hi:log|lin:N")
    p.add_argument("--branch", choices=[b.value for b in Branch])
    p.add_argument("--n-iterates", type=int, default=100_000, help="iterates per winding estimate (default 1e5)")
    p.add_argument("--no-flow", action="store_true", help="skip the flow column")
    _add_output(p)
    p.set_defaults(func=cmd_rotation)

    p = sub.add_parser("classify", help="adherence of a sequence as JSON")
    p.add_argument("--family", choices=("G", "F"), default="G")
    _add_ab(p)
    p.add_argument("--seed", type=_pair, required=True, help="initial terms x1,x2")
    p.add_argument("-n", type=int, default=N_TERMS, help=f"number of terms (default {N_TERMS})")
    p.add_argument("--gap-factor", type=_positive, default=GAP_FACTOR, help=f"default {GAP_FACTOR:g}")
    p.add_argument("--min-cluster", type=int, default=MIN_CLUSTER, help=f"default {MIN_CLUSTER}")
    p.add_argument("--split-parity", action="store_true", help="cluster odd and even terms separately")
    _add_output(p)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("periods", help="admissible periods, 2-periodic locus, resonant levels as JSON")
    _add_ab(p)
    p.add_argument("--q-max", type=int, default=12, help="largest period listed (default 12)")
    p.add_argument("--target", type=_fraction, help="rotation number p/q to locate")
    p.add_argument("--h-range", type=_range, help="sweep range lo:hi[:log] for the bracket (default 1e-4:1e4:log)")
    p.add_argument("--branch", choices=[b.value for b in Branch])
    _add_output(p)
    p.set_defaults(func=cmd_periods)

    p = sub.add_parser("search-invariant", help="exact invariant search for a beta cycle as JSON")
    p.add_argument("--betas", type=_fractions, required=True, help="comma-separated rationals, e.g. 1/2,2")
    _add_output(p)
    p.set_defaults(func=cmd_search_invariant)

    p = sub.add_parser("local", help="linear analysis of F at the origin as JSON")
    _add_ab(p)
    _add_output(p)
    p.set_defaults(func=cmd_local)

    p = sub.add_parser("replay", help="regenerate an output file and compare")
    p.add_argument("file")
    p.set_defaults(func=None)
    return parser


def _recorded_args(path):
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    if text.lstrip().startswith("{"):
        return json.loads(text)["args"], text
    for line in reversed(text.splitlines()):
        if line.startswith(ARGS_TAG):
            return json.loads(line[len(ARGS_TAG):]), text
    raise GumiraError(f"{path} carries no recorded arguments")


def _render(argv):
    parser = build_parser()
    ns = parser.parse_args(argv)
    buf = io.StringIO(newline="\n")
    code = ns.func(ns, _strip_output(argv), buf)
    return code, buf.getvalue()


def _strip_output(argv):
    """Arguments minus ``-o/--output``, which must not affect the content."""
    out, skip = [], False
    for tok in argv:
        if skip:
            skip = False
            continue
        if tok in ("-o", "--output", "--gnuplot"):
            skip = True
            continue
        if tok.startswith(("--output=", "--gnuplot=")):
            continue
        out.append(tok)
    return out


def replay(path):
    argv, original = _recorded_args(path)
    _, regenerated = _render(argv)
    if regenerated == original:
        print(f"replay ok: {path}")
        return 0
    print(f"replay mismatch: {path}", file=sys.stderr)
    return 1


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        if ns.replay or ns.command == "replay":
            return replay(ns.replay or ns.file)
        if ns.command is None:
            parser.print_usage(sys.stderr)
            return 2
        code, text = _render(argv)
        if ns.output:
            with open(ns.output, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
        if getattr(ns, "gnuplot", None):
            name = "V" if ns.family == "G" else "W"
            with open(ns.gnuplot, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(_gnuplot_script(ns.output or "orbit.csv", name))
        return code
    except GumiraError as exc:
        print(f"gumira: error[{exc.code}]: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"gumira: error[io]: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
