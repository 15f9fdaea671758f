"""Command-line front end.

Subcommands: ``bound``, ``phase``, ``verify``, ``construct``, ``critical``.
Exit codes: 0 success, 1 usage error, 2 property violation, 3 construction
failure.  ``--config FILE`` supplies defaults as ``key = value`` lines
(keys are option names with dashes or underscores); flags override them.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np

from . import costfn, criticality, maps, shapes, verify
from .bounds import F, F_pow
from .domains import Disk, parse_domain
from .energy import build_grid, energy_p
from .errors import DistortionError

EXIT_OK, EXIT_USAGE, EXIT_VIOLATION, EXIT_CONSTRUCTION = 0, 1, 2, 3
TIE_TOL = 1e-12


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# ---------------------------------------------------------------------------
# formatting
# ---------------------------------------------------------------------------

def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.9g}"
    return str(v)


def to_csv(columns: Sequence[str], rows: List[Dict]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_cell(row.get(c)) for c in columns])
    return buf.getvalue()


def _plain(v):
    if isinstance(v, dict):
        return {k: _plain(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    if isinstance(v, np.bool_):
        return bool(v)
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else None
    return v


def to_json(obj) -> str:
    return json.dumps(_plain(obj), indent=2, sort_keys=True) + "\n"


def _emit(text: str, output: Optional[str]) -> None:
    if output:
        Path(output).write_text(text)
    else:
        sys.stdout.write(text)


def _table(args, columns, rows) -> None:
    text = to_json(rows) if args.format == "json" else to_csv(columns, rows)
    _emit(text, args.output)


# ---------------------------------------------------------------------------
# argument parsing helpers
# ---------------------------------------------------------------------------

def parse_values(text: str) -> List[float]:
    """``a,b,c`` or ``lo:hi:n`` (``n`` evenly spaced values, rounded to 12 decimals)."""
    text = text.strip()
    try:
        if ":" in text:
            lo, hi, n = text.split(":")
            n = int(n)
            if n < 1:
                raise ValueError
            if n == 1:
                return [float(lo)]
            step = (float(hi) - float(lo)) / (n - 1)
            return [round(float(lo) + i * step, 12) for i in range(n)]
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"cannot parse value list {text!r}") from None


def _ints(text: str) -> List[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"cannot parse integer list {text!r}") from None


def read_config(path: str) -> Dict[str, str]:
    out = {}
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None
    for n, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise UsageError(f"{path}:{n}: expected key = value")
        out[key.strip().replace("-", "_")] = value.strip().strip('"').strip("'")
    return out


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_bound(args) -> int:
    if args.s is None:
        raise UsageError("bound needs --s (value, list or lo:hi:n)")
    svals = parse_values(args.s)
    if any(s < 0 for s in svals):
        raise UsageError("volume ratios must be >= 0")
    if args.p < 2:
        raise UsageError("p must be >= 2")
    cost = costfn.by_name(args.cost) if args.cost else None
    rows = []
    for s in svals:
        row = {"s": s, "F": F(s), "F_pow": F_pow(s, args.p)}
        if cost is not None:
            if s <= 0:
                raise UsageError("F_f needs s > 0")
            res = costfn.F_f(cost, s)
            row.update(F_f=res.value, x=res.x, y=res.y, conformal=res.conformal)
        rows.append(row)
    cols = ["s", "F", "F_pow"] + (["F_f", "x", "y", "conformal"] if cost else [])
    _table(args, cols, rows)
    return EXIT_OK


def phase_rows(lams: Sequence[float], p: float, n: int) -> List[Dict]:
    grid = build_grid(Disk(), n, n)
    rows = []
    for lam in lams:
        hom = energy_p(maps.homothety(lam), grid, p).energy
        twist = energy_p(maps.build_twist_minimizer(lam), grid, p).energy if lam <= 0.5 else None
        if twist is None or twist > hom + TIE_TOL:
            winner, best = "homothety", hom
        elif twist < hom - TIE_TOL:
            winner, best = "twist", twist
        else:
            winner, best = "tie", min(twist, hom)
        rows.append({
            "lambda": lam,
            "homothety_energy": hom,
            "homothety_closed_form": 2.0 ** (0.5 * p) * (1.0 - lam) ** p,
            "twist_energy": twist,
            "best_energy": best,
            "bound": F_pow(lam * lam, p),
            "winner": winner,
        })
    return rows


def cmd_phase(args) -> int:
    lams = parse_values(args.lambdas)
    if not lams or any(not 0.0 < v <= 1.0 for v in lams):
        raise UsageError("lambda values must lie in (0, 1]")
    if args.p < 2:
        raise UsageError("p must be >= 2")
    rows = phase_rows(lams, args.p, args.grid)
    cols = ["lambda", "homothety_energy", "homothety_closed_form", "twist_energy", "best_energy",
            "bound", "winner"]
    _table(args, cols, rows)
    return EXIT_OK


def cmd_verify(args) -> int:
    if args.suite not in verify.SUITES:
        raise UsageError(f"unknown suite {args.suite!r}; choose from {', '.join(sorted(verify.SUITES))}")
    if args.n < 1:
        raise UsageError("--n must be >= 1")
    rep = verify.run_suite(args.suite, args.n, args.seed, args.oracle_points, args.oracle_tol)
    _emit(rep.to_json() + "\n", args.output)
    return EXIT_OK if rep.passed else EXIT_VIOLATION


def _profile_csv(m) -> str:
    tab = maps.profile_table(m, 257)
    cols = list(tab)
    rows = [{c: tab[c][i] for c in cols} for i in range(len(tab["r"]))]
    return to_csv(cols, rows)


def cmd_construct(args) -> int:
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    files = []
    if args.kind == "twist":
        if args.lam is None:
            raise UsageError("construct twist needs --lambda")
        m = maps.build_twist_minimizer(args.lam)
        grid = build_grid(Disk(), args.grid, args.grid)
        label = "punctured disk (the twist is not differentiable at the origin)"
    else:
        if args.alpha is None:
            raise UsageError("construct ode needs --alpha")
        base = maps.build_ode_minimizer(args.alpha, args.t0, step=args.step)
        m = base.scaled(args.lam if args.lam is not None else 1.0 / args.alpha)
        grid = build_grid(Disk(), args.grid, 16)
        label = "disk"
    report = energy_p(m, grid, args.p)
    stem = args.kind
    (outdir / f"{stem}_profile.csv").write_text(_profile_csv(m))
    files.append(f"{stem}_profile.csv")
    summary = {"map": m.name, "params": dict(m.params), "domain": label, "report": report.to_dict()}
    (outdir / f"{stem}_report.json").write_text(to_json(summary))
    files.append(f"{stem}_report.json")
    if args.svg:
        domain = parse_domain(args.domain)
        cs = parse_values(args.c_list) if args.c_list else [getattr(m, "c", None)]
        for c in cs:
            shape_map = m if c is None else maps.TwistMap(c, maps.twist_lambda(c))
            name = f"{stem}_shape.svg" if c is None else f"twist_c{c:g}.svg"
            (outdir / name).write_text(
                shapes.export_shape(shape_map, domain, args.samples, "svg", args.slices))
            files.append(name)
    summary["files"] = files
    sys.stdout.write(to_json(summary))
    return EXIT_OK


def cmd_critical(args) -> int:
    m = criticality.default_study_map(args.map)
    levels = _ints(args.levels)
    ps = parse_values(args.p)
    if not levels or any(n < 2 for n in levels):
        raise UsageError("levels must be integers >= 2 (h = 1/level)")
    hs = [1.0 / n for n in sorted(levels)]
    rows = []
    summary = []
    for p in ps:
        if args.residual == "piola":
            def div(g):
                return criticality.piola_divergence(g)
        else:
            def div(g, p=p):
                return criticality.el_divergence(g, p)
        study = criticality.refinement_study(m, hs, div, r_in=args.r_in)
        for r in study:
            rows.append({"p": p, "h": r.h, "residual": r.residual, "slope": r.slope})
        summary.append({"p": p, "fitted_slope": criticality.study_slope(study),
                        "rows": [{"h": r.h, "residual": r.residual, "slope": r.slope} for r in study]})
        if args.residual == "piola":
            break
    if args.format == "json":
        _emit(to_json({"map": getattr(m, "name", args.map), "residual": args.residual, "studies": summary}),
              args.output)
    else:
        _emit(to_csv(["p", "h", "residual", "slope"], rows), args.output)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser() -> _Parser:
    parser = _Parser(prog="distortion", description="Distortion-energy bounds, minimizers and checks.")
    parser.add_argument("--config", help="key = value file with default option values")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    def out_opts(p, default="csv"):
        p.add_argument("--format", choices=["csv", "json"], default=default)
        p.add_argument("--output", help="write to this file instead of stdout")

    b = sub.add_parser("bound", help="tabulate F, F^(p/2) and optionally F_f")
    b.add_argument("--s", help="ratio, list a,b,c or range lo:hi:n")
    b.add_argument("--p", type=float, default=2.0)
    b.add_argument("--cost", help="quadratic, logsq, cubic, quartic or powerP")
    out_opts(b)
    b.set_defaults(func=cmd_bound)

    ph = sub.add_parser("phase", help="homothety vs twist energies over scale factors")
    ph.add_argument("--lambdas", "--lambda-range", dest="lambdas", default="0.05:0.95:19")
    ph.add_argument("--p", type=float, default=2.0)
    ph.add_argument("--grid", type=int, default=64)
    out_opts(ph)
    ph.set_defaults(func=cmd_phase)

    v = sub.add_parser("verify", help="random-matrix property suites")
    v.add_argument("suite", help=", ".join(sorted(verify.SUITES)))
    v.add_argument("--n", type=int, default=10_000)
    v.add_argument("--seed", type=int, default=verify.DEFAULT_SEED)
    v.add_argument("--oracle-points", type=int, default=verify.ORACLE_POINTS)
    v.add_argument("--oracle-tol", type=float, default=verify.ORACLE_TOL)
    v.add_argument("--output")
    v.set_defaults(func=cmd_verify)

    c = sub.add_parser("construct", help="build a minimizer and write profile, report and shapes")
    c.add_argument("kind", choices=["twist", "ode"])
    c.add_argument("--lambda", dest="lam", type=float)
    c.add_argument("--alpha", type=float)
    c.add_argument("--t0", type=float)
    c.add_argument("--step", choices=sorted(maps.STEPS), default="cubic")
    c.add_argument("--p", type=float, default=2.0)
    c.add_argument("--grid", type=int, default=None)
    c.add_argument("--svg", action="store_true")
    c.add_argument("--c-list", help="twist strengths for SVG shapes, e.g. 1,5,14")
    c.add_argument("--domain", default="square:1")
    c.add_argument("--samples", type=int, default=256)
    c.add_argument("--slices", type=int, default=8)
    c.add_argument("--outdir", default=".")
    c.set_defaults(func=cmd_construct)

    cr = sub.add_parser("critical", help="Euler-Lagrange / Piola residual refinement study")
    cr.add_argument("--map", default="twist", help="twist, ode, homothety, quintic, mixed or cubic")
    cr.add_argument("--p", default="2,4")
    cr.add_argument("--levels", default="32,64,128", help="1/h values")
    cr.add_argument("--r-in", type=float, default=0.1)
    cr.add_argument("--residual", choices=["el", "piola"], default="el")
    out_opts(cr)
    cr.set_defaults(func=cmd_critical)
    return parser


def _apply_config(parser: _Parser, argv: Sequence[str]) -> None:
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return
    cfg = read_config(known.config)
    sub = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    command = next((a for a in argv if a in sub.choices), None)
    if command is None:
        raise UsageError("a subcommand is required")
    target = sub.choices[command]
    # keys may name either the option (``lambda``, ``c-list``) or its destination
    actions = {}
    for a in target._actions:
        actions[a.dest] = a
        for opt in a.option_strings:
            actions[opt.lstrip("-").replace("-", "_")] = a
    unknown = sorted(set(cfg) - set(actions))
    if unknown:
        raise UsageError(f"unknown config keys for {command}: {', '.join(unknown)}")
    defaults = {}
    for key, value in cfg.items():
        action = actions[key]
        if isinstance(action, argparse._StoreTrueAction):
            if value.lower() not in ("true", "false", "1", "0", "yes", "no"):
                raise UsageError(f"config key {key} expects true or false, got {value!r}")
            defaults[action.dest] = value.lower() in ("true", "1", "yes")
        else:
            defaults[action.dest] = value
    target.set_defaults(**defaults)


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        _apply_config(parser, argv)
        args = parser.parse_args(argv)
        if args.command is None:
            parser.print_help(sys.stderr)
            return EXIT_USAGE
        if getattr(args, "grid", 0) is None:
            args.grid = 1024 if getattr(args, "kind", "") == "ode" else 64
        return args.func(args)
    except UsageError as exc:
        print(f"distortion: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DistortionError as exc:
        print(f"distortion: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CONSTRUCTION if args.command in ("construct", "critical") else EXIT_USAGE
