"""Command-line front end.

Exit codes: 0 success, 2 invalid input, 3 numerical failure, 4 enumeration
budget exceeded. ``--json`` output is key-sorted and carries a ``version``
field; identical invocations print identical bytes.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import random
import sys
from dataclasses import dataclass
from typing import Any, Callable, Sequence

from adsvol import __version__
from adsvol.bounds import (
    closing_upper_bound,
    example_genus_optimality,
    example_prop52,
    fit_log_growth,
    fuchsian_volume,
    thurston_upper_bound,
    volume_bracket_from_lamination,
    wp_level_diameter,
    wp_level_distance,
    wp_lower_bound_form,
    wp_pinching,
)
from adsvol.curves import intersection_number
from adsvol.deform import (
    Direction,
    TwistSpec,
    collar_testmap_energy,
    earthquake,
    length_growth_bound_check,
    twist_length_derivative,
)
from adsvol.errors import AdsVolError, BudgetExceeded, InputError, NumericalError
from adsvol.riera import mainestimate_ratio, wp_grad_normsq_lower
from adsvol.surface import (
    FNCoordinates,
    build_holonomy,
    curve_length,
    parse_surface,
    standard_topology,
    surface_to_json,
)
from adsvol.words import DEFAULT_BUDGET, CurveClass

EXIT_INPUT, EXIT_NUMERICAL, EXIT_BUDGET = 2, 3, 4


@dataclass(frozen=True)
class RunConfig:
    radius: int
    budget: int
    tolerance: float
    threads: int
    output: str
    seed: int

    def __post_init__(self):
        if self.budget < 1:
            raise InputError("budget must be at least 1")
        if not self.tolerance > 0:
            raise InputError("tolerance must be positive")
        if self.threads < 1:
            raise InputError("threads must be at least 1")
        if self.radius < 0:
            raise InputError("radius must be non-negative")


def _env_threads() -> int:
    raw = os.environ.get("ADSVOL_THREADS", "1")
    try:
        return int(raw)
    except ValueError:
        raise InputError(f"ADSVOL_THREADS must be an integer, got {raw!r}") from None


def config_from_args(args: argparse.Namespace) -> RunConfig:
    output = "json" if args.json else "csv" if args.csv else "text"
    threads = args.threads if args.threads is not None else _env_threads()
    return RunConfig(args.radius, args.budget, args.tolerance, threads, output, args.seed)


def parse_int_range(text: str) -> list[int]:
    """'1..8', '1,2,5' or a single integer."""
    try:
        if ".." in text:
            lo, hi = text.split("..")
            return list(range(int(lo), int(hi) + 1))
        return [int(x) for x in text.split(",")]
    except ValueError:
        raise InputError(f"cannot parse integer range {text!r}") from None


def parse_float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",")]
    except ValueError:
        raise InputError(f"cannot parse number list {text!r}") from None


def load_surface(path: str | None):
    if path is None:
        raise InputError("--input FILE with a surface description is required")
    try:
        if path == "-":
            obj = json.load(sys.stdin)
        else:
            with open(path, encoding="utf-8") as fh:
                obj = json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"invalid JSON in {path}: {exc.msg}") from None
    return parse_surface(obj)


# --- subcommands ---------------------------------------------------------------
#
# Each returns (report dict, table rows). The dict is what --json prints; the
# rows are what --csv prints and what text mode lays out.


def cmd_surface(args, cfg: RunConfig):
    topo, fn = load_surface(args.input)
    rep = build_holonomy(topo, fn)
    rows = []
    for i, e in enumerate(topo.edges):
        tr = abs(rep.trace(rep.curve_words[i]))
        expected = 2.0 * math.cosh(fn.lengths[i] / 2.0)
        err = abs(tr - expected) / max(1.0, expected)
        rows.append({"edge": e.name, "word": str(rep.curve_words[i]), "trace": tr,
                     "expected": expected, "error": err, "ok": err <= cfg.tolerance})
    passed = rep.relator_residual <= cfg.tolerance and all(r["ok"] for r in rows)
    report = {"surface": surface_to_json(topo, fn), "relator_residual": rep.relator_residual,
              "precision_digits": rep.dps, "edges": rows, "pass": passed}
    return report, rows


def cmd_length(args, cfg: RunConfig):
    topo, fn = load_surface(args.input)
    rep = build_holonomy(topo, fn)
    rows = []
    for text in args.word:
        c = CurveClass.parse(text, topo.genus)
        rows.append({"word": str(c), "length": curve_length(rep, c)})
    return {"surface": surface_to_json(topo, fn), "curves": rows}, rows


def cmd_intersect(args, cfg: RunConfig):
    topo, fn = load_surface(args.input)
    rep = build_holonomy(topo, fn)
    c1 = CurveClass.parse(args.c1, topo.genus)
    c2 = CurveClass.parse(args.c2, topo.genus)
    res = intersection_number(rep, c1, c2, cfg.radius, cfg.budget)
    report = {"c1": str(c1), "c2": str(c2), **res.to_dict()}
    rows = [{"radius": r, "count": n} for r, n in enumerate(res.counts_by_radius)]
    return report, rows


def cmd_twist(args, cfg: RunConfig):
    topo, fn = load_surface(args.input)
    edge = topo.edge_index(args.edge) if not args.edge.isdigit() else int(args.edge)
    if not 0 <= edge < topo.n_edges:
        raise InputError(f"edge {args.edge} out of range")
    spec = TwistSpec.on_edge(topo.n_edges, edge, args.weight, Direction(args.direction))
    after = earthquake(fn, spec)
    report: dict[str, Any] = {"before": surface_to_json(topo, fn),
                              "after": surface_to_json(topo, after),
                              "edge": topo.edges[edge].name, "weight": args.weight,
                              "direction": args.direction}
    rows = [{"edge": e.name, "twist_before": a, "twist_after": b}
            for e, a, b in zip(topo.edges, fn.twists, after.twists)]
    if args.L is not None:
        report["growth_check"] = length_growth_bound_check(topo, fn, spec, args.L).to_dict()
    if args.witness:
        w = CurveClass.parse(args.witness, topo.genus)
        report["witness"] = str(w)
        report["length_derivative"] = twist_length_derivative(topo, fn, edge, w, args.step)
    return report, rows


def cmd_riera(args, cfg: RunConfig):
    topo, fn = load_surface(args.input)
    rep = build_holonomy(topo, fn)
    c = CurveClass.parse(args.word, topo.genus)
    res = wp_grad_normsq_lower(rep, c, cfg.radius, cfg.budget, cfg.threads)
    report = {"word": str(c), "length": curve_length(rep, c), **res.to_dict(),
              "mainestimate_ratio": mainestimate_ratio(rep, c, cfg.radius, cfg.budget,
                                                       cfg.threads)}
    return report, [dict(report)]


def cmd_bounds(args, cfg: RunConfig):
    g = args.genus
    bracket = volume_bracket_from_lamination(args.lam_length, g)
    report: dict[str, Any] = {
        "genus": g,
        "bracket": bracket.to_dict(),
        "fuchsian_volume": fuchsian_volume(g),
        "thurston_upper_bound": thurston_upper_bound(args.dth, g),
        "dth": args.dth,
        "wp_pinching": wp_pinching(args.lam_length),
        "wp_level_diameter": wp_level_diameter(args.level),
    }
    if args.a is not None:
        report["closing_upper_bound"] = closing_upper_bound(args.dth, g, args.a)
        report["wp_level_distance"] = wp_level_distance(args.m, args.level, g, args.a)
        report["wp_lower_bound_form"] = wp_lower_bound_form(args.dwp, args.a, args.b, args.c, g)
    return report, [{k: v for k, v in report.items() if not isinstance(v, dict)}]


def cmd_energy(args, cfg: RunConfig):
    rep = collar_testmap_energy(args.genus, args.mc_length, args.eps, args.resolution,
                                args.curve_length)
    report = rep.to_dict()
    chi = 2 * args.genus - 2
    report["upper_estimate"] = (math.cosh(args.eps) * args.mc_length
                                + 2 * math.sqrt(2) * math.pi * chi)
    return report, [report]


def _prop52_rows(ns: Sequence[int], mu: float, holonomy: bool = True) -> list[dict]:
    rows = []
    for n in ns:
        r = example_prop52(n, mu, holonomy)
        rows.append({"n": n, "alpha_length": r.alpha_length,
                     "lamination_length": r.lamination_length,
                     "beta_closed_form": r.beta_length_closed_form,
                     "beta_holonomy": r.beta_length_holonomy,
                     "closed_form_matches": r.closed_form_matches_holonomy,
                     "ratio_floor": r.ratio_floor,
                     "bracket_lower": r.bracket.lower, "bracket_upper": r.bracket.upper})
    return rows


def cmd_reproduce(args, cfg: RunConfig):
    if args.example == "prop52":
        ns = parse_int_range(args.n)
        rows = _prop52_rows(ns, args.mu_length)
        c1, c2 = fit_log_growth(args.mu_length)
        return {"example": "prop52", "mu_length": args.mu_length, "rows": rows,
                "fitted_log_growth": {"C1": c1, "C2": c2, "n_range": [2, 64]}}, rows
    if args.example == "genus-optimality":
        r = example_genus_optimality(args.genus, args.u, args.weight).to_dict()
        return {"example": "genus-optimality", **r}, [r]
    rows = [{"genus": g, "fuchsian_volume": fuchsian_volume(g),
             "bracket_width": volume_bracket_from_lamination(0.0, g).width}
            for g in parse_int_range(args.genus_range)]
    return {"example": "fuchsian", "rows": rows}, rows


def cmd_sweep(args, cfg: RunConfig):
    rows: list[dict] = []
    if args.kind == "energy":
        for m in parse_float_list(args.mc_length):
            for eps in parse_float_list(args.eps):
                rep = collar_testmap_energy(args.genus, m, eps, args.resolution)
                rows.append({"genus": args.genus, "mc_length": m, "eps": eps,
                             "total_energy": rep.total_energy,
                             "quadrature_tolerance": rep.quadrature_tolerance})
    elif args.kind == "prop52":
        rows = _prop52_rows(parse_int_range(args.n), args.mu_length)
    elif args.kind == "riera":
        topo, fn = load_surface(args.input)
        rep = build_holonomy(topo, fn)
        c = CurveClass.parse(args.word, topo.genus)
        for r in range(cfg.radius + 1):
            res = wp_grad_normsq_lower(rep, c, r, cfg.budget, cfg.threads)
            rows.append({"radius": r, "lower_bound": res.lower_bound, "n_terms": res.n_terms})
    else:  # random surfaces: construction residuals
        rng = random.Random(cfg.seed)
        topo = standard_topology(args.genus)
        for i in range(args.count):
            fn = FNCoordinates(tuple(rng.uniform(0.05, 10.0) for _ in range(topo.n_edges)),
                               tuple(rng.uniform(-20.0, 20.0) for _ in range(topo.n_edges)))
            rep = build_holonomy(topo, fn)
            rows.append({"sample": i, "relator_residual": rep.relator_residual,
                         "min_length": min(fn.lengths), "max_abs_twist": max(map(abs, fn.twists))})
    return {"sweep": args.kind, "seed": cfg.seed, "rows": rows}, rows


# --- plumbing ------------------------------------------------------------------


def _common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--input", help="surface description (JSON file, '-' for stdin)")
    out = parser.add_mutually_exclusive_group()
    out.add_argument("--json", action="store_true", help="print a JSON report")
    out.add_argument("--csv", action="store_true", help="print a CSV table")
    parser.add_argument("--radius", type=int, default=4, help="word radius for enumerations")
    parser.add_argument("--budget", type=int, default=DEFAULT_BUDGET,
                        help="maximum number of enumerated words")
    parser.add_argument("--threads", type=int, default=None,
                        help="worker threads (default: $ADSVOL_THREADS or 1)")
    parser.add_argument("--seed", type=int, default=0, help="seed for random sweeps")
    parser.add_argument("--tolerance", type=float, default=1e-6,
                        help="tolerance for pass/fail checks")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="adsvol", description="Hyperbolic surface geometry and AdS volume bound toolkit.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name: str, func: Callable, help_text: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help_text)
        _common(p)
        p.set_defaults(func=func)
        return p

    add("surface", cmd_surface, "build the holonomy and check its invariants")

    p = add("length", cmd_length, "geodesic lengths of curve words")
    p.add_argument("--word", action="append", required=True, help="e.g. 'a1 B2' (repeatable)")

    p = add("intersect", cmd_intersect, "geometric intersection number of two curves")
    p.add_argument("--c1", required=True)
    p.add_argument("--c2", required=True)

    p = add("twist", cmd_twist, "earthquake along one pants curve")
    p.add_argument("--edge", required=True, help="edge name (alpha1, mu, m1, s1) or index")
    p.add_argument("--weight", type=float, required=True)
    p.add_argument("--direction", choices=["left", "right"], default="left")
    p.add_argument("--L", type=float, default=None, help="run the length growth check")
    p.add_argument("--witness", default=None, help="curve for the twist derivative")
    p.add_argument("--step", type=float, default=1e-4)

    p = add("riera", cmd_riera, "truncated WP gradient lower bound")
    p.add_argument("--word", required=True)

    p = add("bounds", cmd_bounds, "evaluate the volume and distance bounds")
    p.add_argument("--genus", type=int, default=2)
    p.add_argument("--lam-length", type=float, default=0.0)
    p.add_argument("--dth", type=float, default=0.0)
    p.add_argument("--dwp", type=float, default=0.0)
    p.add_argument("--a", type=float, default=None, help="gradient constant (enables the a-dependent forms)")
    p.add_argument("--b", type=float, default=0.0)
    p.add_argument("--c", type=float, default=0.0)
    p.add_argument("--m", type=float, default=1.0)
    p.add_argument("--level", type=float, default=1.0, help="length level L")

    p = add("energy", cmd_energy, "energy of the collar test map")
    p.add_argument("--genus", type=int, default=2)
    p.add_argument("--mc-length", type=float, required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--resolution", type=int, default=64)
    p.add_argument("--curve-length", type=float, default=1.0)

    p = add("reproduce", cmd_reproduce, "regenerate the explicit example families")
    p.add_argument("example", choices=["prop52", "genus-optimality", "fuchsian"])
    p.add_argument("--n", default="1..8")
    p.add_argument("--mu-length", type=float, default=2.0)
    p.add_argument("--genus", type=int, default=2)
    p.add_argument("--u", type=float, default=2.6339157)
    p.add_argument("--weight", type=float, default=1.0)
    p.add_argument("--genus-range", default="2..6")

    p = add("sweep", cmd_sweep, "parameter sweeps emitting tables")
    p.add_argument("kind", choices=["energy", "prop52", "riera", "surfaces"])
    p.add_argument("--genus", type=int, default=2)
    p.add_argument("--mc-length", default="0.5,1,2")
    p.add_argument("--eps", default="0.2,0.1,0.05")
    p.add_argument("--resolution", type=int, default=64)
    p.add_argument("--n", default="1..8")
    p.add_argument("--mu-length", type=float, default=2.0)
    p.add_argument("--word", default="a1")
    p.add_argument("--count", type=int, default=10)
    return parser


def _fmt(v: Any) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def render(report: dict, rows: list[dict], cfg: RunConfig, command: str) -> str:
    if cfg.output == "json":
        doc = {"version": __version__, "command": command, **report}
        return json.dumps(doc, sort_keys=True, indent=2) + "\n"
    if cfg.output == "csv":
        buf = io.StringIO()
        if rows:
            writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
            writer.writeheader()
            for r in rows:
                writer.writerow({k: _fmt(r.get(k)) for k in rows[0]})
        return buf.getvalue()
    lines = []
    for k, v in report.items():
        if isinstance(v, list):
            lines.append(f"{k}:")
            for item in v:
                lines.append("  " + ", ".join(f"{a}={_fmt(b)}" for a, b in item.items())
                             if isinstance(item, dict) else f"  {_fmt(item)}")
        elif isinstance(v, dict):
            lines.append(f"{k}: " + ", ".join(f"{a}={_fmt(b)}" for a, b in v.items()))
        else:
            lines.append(f"{k}: {_fmt(v)}")
    return "\n".join(lines) + "\n"


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = config_from_args(args)
        report, rows = args.func(args, cfg)
    except BudgetExceeded as exc:
        print(f"adsvol: budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except InputError as exc:
        print(f"adsvol: invalid input: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NumericalError as exc:
        print(f"adsvol: numerical failure ({type(exc).__name__}): {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except AdsVolError as exc:
        print(f"adsvol: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    sys.stdout.write(render(report, rows, cfg, args.command))
    if args.command == "surface" and not report["pass"]:
        return EXIT_NUMERICAL
    return 0


if __name__ == "__main__":
    sys.exit(main())
