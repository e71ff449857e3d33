"""Command-line front end: ``metricjet <command> [options]``.

Every command builds a :class:`Report`. By default a short summary goes to
stdout; ``--json PATH`` writes the canonical JSON report (``-`` for stdout)
and ``--csv-traces DIR`` writes one CSV file per numeric trace.
"""

from __future__ import annotations

import argparse
import math
import re
import sys
from fractions import Fraction
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import __version__
from .cantor import cantor_locate
from .catalog import (
    MULTIDIM, NAMES, PROBE_RATIOS, NoClosedForm, PeriodicityError, UnknownEntry, entry,
    contact_closed_form, fractal_from_periodic, list_entries,
)
from .classify import check_ladder, classify_point, compare_flags, counterexample_suite, format_grid
from .contact import ContactStatus, estimate_contact, homogeneity_check
from .expr import ParseError, parse_expression
from .extrema import first_order_min_test
from .handles import DomainError, FunctionHandle, zero
from .report import Report, Trace
from .sampling import SamplingConfig, default_config
from .spaces import ContractingSpace, MonoidError, ValuedMonoid, Variant
from .tangency import (
    HomogClass, TangencyStatus, Unbounded, check_bounded, lipschitz_ratio_homog, norm_homog, tangency_test,
)


class UsageError(ValueError):
    pass


# ---------------------------------------------------------------- argument helpers

def parse_number(text: str) -> float:
    """Floats, fractions like 2/3, and multiples of pi such as 2pi."""
    t = text.strip().replace(" ", "")
    m = re.fullmatch(r"([-+]?\d*\.?\d*)\*?pi", t)
    if m:
        c = m.group(1)
        coef = 1.0 if c in ("", "+") else -1.0 if c == "-" else float(c)
        return coef * math.pi
    try:
        return float(Fraction(t))
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"cannot read a number from {text!r}") from exc


def parse_point(text: str) -> np.ndarray:
    return np.array([parse_number(p) for p in text.split(",") if p.strip()], dtype=float)


def parse_radii(text: str) -> tuple[float, ...]:
    return tuple(parse_number(p) for p in text.split(",") if p.strip())


def build_config(args: argparse.Namespace) -> SamplingConfig:
    over: dict = {}
    if args.seed is not None:
        over["seed"] = args.seed
    if args.tol is not None:
        over["tol_zero"] = args.tol
    if args.radii:
        over["radii"] = parse_radii(args.radii)
    if args.dirs is not None:
        over["direction_count"] = args.dirs
    return default_config(**over)


def build_monoid(kind: str, r: str | None, r_exp: str | None) -> ValuedMonoid:
    if kind == "nr":
        if r_exp is not None:
            return ValuedMonoid.nr(math.exp(-parse_number(r_exp)))
        if r is None:
            raise UsageError("--monoid nr needs --r or --r-exp")
        return ValuedMonoid.nr(parse_number(r))
    if r is not None or r_exp is not None:
        raise UsageError(f"--monoid {kind} takes no ratio")
    return {"reals": ValuedMonoid.reals, "rplus": ValuedMonoid.rplus, "unit": ValuedMonoid.unit}[kind]()


def resolve_function(source: str, point: np.ndarray | None, dim: int | None = None,
                     value_at_0: str | None = None) -> tuple[FunctionHandle, str | None]:
    """A catalog entry (``catalog:NAME``) or an expression; returns the handle and catalog name."""
    want = dim if dim is not None else (point.size if point is not None else None)
    if source.startswith("catalog:"):
        name = source.split(":", 1)[1]
        if value_at_0 is not None:
            raise UsageError("--value-at-0 applies to expressions only")
        e = entry(name, want if name in MULTIDIM else None)
        return e.handle, name
    override = [parse_number(v) for v in value_at_0.split(",")] if value_at_0 is not None else None
    fn = parse_expression(source, want, override)
    return fn.handle(), None


def _point_for(h: FunctionHandle, point: np.ndarray) -> np.ndarray:
    if point.size != h.dim_in:
        raise UsageError(f"point has {point.size} coordinates but the map takes {h.dim_in}")
    return point


# ---------------------------------------------------------------- commands

def _direction_traces(verdict) -> dict[str, Trace]:
    out = {}
    for i, t in enumerate(verdict.traces):
        width = len(t.values[0]) if t.values else 1
        cols = ["index", "scale", *[f"value_{j + 1}" for j in range(width)]]
        rows = [[k, s, *v] for k, (s, v) in enumerate(zip(t.scales, t.values))]
        out[f"contact_dir{i:03d}"] = Trace(cols, rows)
    return out


def cmd_contact(args, cfg: SamplingConfig) -> Report:
    a = parse_point(args.at)
    h, name = resolve_function(args.fn, a, args.dim, args.value_at_0)
    a = _point_for(h, a)
    m = build_monoid(args.monoid, args.r, args.r_exp)
    v = estimate_contact(h, a, m, cfg, variant=args.variant)
    res: dict = {
        "status": v.status.value,
        "monoid": m.label,
        "variant": v.variant.value,
        "directions": [{"x": t.direction, "state": t.state.value, "limit": t.limit} for t in v.traces],
        "oscillation_witness": v.oscillation_witness,
        "lipschitz": {k: v.lipschitz[k] for k in sorted(v.lipschitz) if k != "pairs"},
    }
    if name is not None:
        try:
            cf = contact_closed_form(name, a, m)
            dirs = np.array([t.direction for t in v.traces])
            exact = cf.eval(dirs)
            lims = v.limits()
            gap = float(np.nanmax(np.abs(lims - exact))) if v.status is ContactStatus.CONTACTABLE else None
            res["closed_form"] = {"label": cf.label, "values": exact, "max_abs_diff": gap}
        except NoClosedForm as exc:
            res["closed_form"] = {"unavailable": str(exc)}
    rep = _report(args, cfg, res)
    rep.traces = _direction_traces(v)
    return rep


def cmd_classify(args, cfg: SamplingConfig) -> Report:
    a = parse_point(args.at)
    h, name = resolve_function(args.fn, a, args.dim, args.value_at_0)
    a = _point_for(h, a)
    rs = tuple(parse_number(r) for r in args.probe_r.split(",")) if args.probe_r else PROBE_RATIOS
    rep = classify_point(h, a, rs, cfg)
    res = {**rep.to_dict(), "ladder_violations": check_ladder(rep)}
    if name is not None:
        e = entry(name, a.size if name in MULTIDIM else None)
        for lp in e.points:
            if np.allclose(lp.point, a, rtol=0, atol=1e-12):
                res["ground_truth"] = {"point": lp.name, "flags": lp.flags,
                                       "mismatches": compare_flags(lp.flags, rep.flags)}
    out = _report(args, cfg, res)
    tr = rep.evidence.get("C0")
    if tr:
        out.traces["oscillation"] = Trace(["index", "radius", "value"],
                                          [[i, r, q] for i, (r, q) in enumerate(zip(cfg.radii, tr["oscillation"]))])
    return out


def cmd_jetdist(args, cfg: SamplingConfig) -> Report:
    a = parse_point(args.at)
    f, _ = resolve_function(args.fn, a, args.dim, args.value_at_0)
    a = _point_for(f, a)
    if args.gn:
        g, _ = resolve_function(args.gn, a, f.dim_in)
    else:
        g = zero(f.dim_in, f.dim_out)
    v = tangency_test(f, g, a, cfg)
    check_bounded(v.trace, cfg)
    vals = v.trace.sup_quotients
    res = {"distance": vals[-1], "tangent": v.status is TangencyStatus.TANGENT, "status": v.status.value}
    rep = _report(args, cfg, res)
    rep.traces["tangency"] = Trace(["index", "radius", "sup_quotient"],
                                   [[i, r, q] for i, (r, q) in enumerate(zip(v.trace.radii, vals))])
    return rep


def cmd_rho(args, cfg: SamplingConfig) -> Report:
    a = parse_point(args.at)
    h, _ = resolve_function(args.fn, a, args.dim, args.value_at_0)
    a = _point_for(h, a)
    cls = HomogClass(args.cls)
    r = None
    if cls is HomogClass.FRACTAL:
        m = build_monoid("nr", args.r, args.r_exp)
        r = m.r
    else:
        m = ValuedMonoid.rplus()
    s = ContractingSpace(h.dim_in, a, cfg.norm_p, Variant.CANONICAL, m)
    rho = lipschitz_ratio_homog(h, s, cls, args.eps, cfg, r)
    nrm = norm_homog(h, s, cls, cfg, r)
    good = abs(rho - nrm) <= 10 * cfg.tol_rel * max(1.0, nrm)
    return _report(args, cfg, {"rho": rho, "norm": nrm, "class": cls.value, "ratio": r, "good_jet": good})


def cmd_extremum(args, cfg: SamplingConfig) -> Report:
    a = parse_point(args.at)
    h, _ = resolve_function(args.fn, a, args.dim, args.value_at_0)
    a = _point_for(h, a)
    m = build_monoid(args.monoid, args.r, args.r_exp)
    v = first_order_min_test(h, a, m, cfg)
    return _report(args, cfg, v.to_dict())


def cmd_cantor(args, cfg: SamplingConfig) -> Report:
    locs = []
    for part in args.at.split(","):
        text = part.strip()
        try:
            x = Fraction(text)
        except ValueError:
            x = parse_number(text)
        loc = cantor_locate(x)
        d = loc.to_dict()
        d["distance_exact"] = str(loc.distance)
        d["bracket_exact"] = [str(b) if b is not None else None for b in loc.bracket] if loc.bracket else None
        d["input"] = text
        locs.append(d)
    res = locs[0] if len(locs) == 1 else {"points": locs}
    return _report(args, cfg, res)


def cmd_fractalize(args, cfg: SamplingConfig) -> Report:
    T = parse_number(args.period)
    fp = parse_expression(args.fp, 1).handle()
    phi = fractal_from_periodic(fp, T, seed=cfg.seed)
    m = ValuedMonoid.nr(math.exp(-T))
    hom = homogeneity_check(phi, m, cfg=cfg)
    xs = np.linspace(-args.span, args.span, args.grid)
    ys = phi.eval(xs[:, None])[:, 0]
    res = {"ratio": m.r, "period": T, "homogeneous": hom.holds, "max_defect": hom.max_defect,
           "witness": list(hom.witness) if hom.witness else None}
    rep = _report(args, cfg, res)
    rep.ok = hom.holds
    rep.traces["samples"] = Trace(["index", "x", "phi"], [[i, x, y] for i, (x, y) in enumerate(zip(xs, ys))])
    return rep


def cmd_catalog(args, cfg: SamplingConfig) -> Report:
    if args.name is None:
        return _report(args, cfg, {"entries": list_entries()})
    e = entry(args.name, args.dim)
    pts = [{"name": p.name, "point": list(p.point), "flags": p.flags, "strict_min": p.strict_min,
            "scenario": p.scenario} for p in e.points]
    return _report(args, cfg, {"name": e.name, "dim_in": e.handle.dim_in, "dim_out": e.handle.dim_out,
                               "note": e.note, "points": pts, "has_closed_contact": e.closed_contact is not None})


def cmd_suite(args, cfg: SamplingConfig) -> Report:
    rows = counterexample_suite(cfg)
    rep = _report(args, cfg, {"rows": [r.to_dict() for r in rows], "grid": format_grid(rows),
                              "passed": sum(r.passed for r in rows), "total": len(rows)})
    rep.ok = all(r.passed for r in rows)
    return rep


# ---------------------------------------------------------------- plumbing

_OUTPUT_KEYS = {"json", "csv_traces", "reproducible", "handler", "command", "seed"}


def _inputs(args: argparse.Namespace) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k not in _OUTPUT_KEYS}


def _report(args, cfg: SamplingConfig, results: dict) -> Report:
    return Report(args.command, _inputs(args), results, cfg.seed, __version__)


def _summary(rep: Report) -> str:
    r = rep.results
    if rep.command == "suite":
        return f"{r['grid']}\n{r['passed']}/{r['total']} rows passed"
    if rep.command == "catalog" and "entries" in r:
        return "\n".join(f"{e['name']}\t{e['dim_in']}->{e['dim_out']}\t{e['note']}" for e in r["entries"])
    keys = [k for k in ("status", "flags", "distance", "rho", "norm", "sphere_min", "homogeneous",
                        "in_Kinf", "bracket", "name", "note") if k in r]
    lines = [f"{k}: {r[k]}" for k in keys]
    if rep.command == "contact":
        for d in r["directions"][:8]:
            lines.append(f"  x={d['x']} -> {d['limit']} ({d['state']})")
        if r.get("oscillation_witness"):
            lines.append(f"witness: {r['oscillation_witness']}")
    if "points" in r and rep.command == "cantor":
        lines = [f"{p['input']}: distance {p['distance_exact']} bracket {p['bracket_exact']}" for p in r["points"]]
    return "\n".join(lines) if lines else rep.to_json()


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--json", metavar="PATH", help="write the JSON report to PATH ('-' for stdout)")
    p.add_argument("--csv-traces", metavar="DIR", help="write numeric traces as CSV files into DIR")
    p.add_argument("--seed", type=int, help="sampling seed (default: METRIC_JET_SEED or 0)")
    p.add_argument("--tol", type=float, help="absolute zero tolerance")
    p.add_argument("--radii", help="comma-separated decreasing probe radii")
    p.add_argument("--dirs", type=int, help="number of quasi-random probe directions")
    p.add_argument("--reproducible", action="store_true", help="omit the timestamp from the report")


def _add_fn(p: argparse.ArgumentParser, at_default: str | None = None) -> None:
    p.add_argument("--fn", required=True, help="catalog:NAME or an expression in x1..xn")
    p.add_argument("--at", default=at_default, required=at_default is None, help="base point, e.g. 0 or 0.5,1 or 2/3")
    p.add_argument("--dim", type=int, help="input dimension (default: length of --at)")
    p.add_argument("--value-at-0", dest="value_at_0", help="value of an expression at the origin")


def _add_monoid(p: argparse.ArgumentParser) -> None:
    p.add_argument("--monoid", choices=["reals", "rplus", "unit", "nr"], default="rplus")
    p.add_argument("--r", help="ratio of the nr monoid")
    p.add_argument("--r-exp", dest="r_exp", help="ratio given as e^-VALUE, e.g. 2pi")


COMMANDS: dict[str, tuple[Callable, str]] = {
    "contact": (cmd_contact, "estimate the contact of a map at a point"),
    "classify": (cmd_classify, "classify a point along the implication ladder"),
    "jetdist": (cmd_jetdist, "jet distance between two maps at a point"),
    "rho": (cmd_rho, "lipschitzian ratio and norm of a homogeneous map"),
    "extremum": (cmd_extremum, "first-order strict local minimum test"),
    "cantor": (cmd_cantor, "distance to the scaled Cantor set and gap membership"),
    "fractalize": (cmd_fractalize, "build x*fp(log|x|) from a periodic fp and check homogeneity"),
    "catalog": (cmd_catalog, "list catalog entries or show one"),
    "suite": (cmd_suite, "run the counter-example suite"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="metricjet", description="Metric tangency and contact estimators.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (handler, help_text) in COMMANDS.items():
        p = sub.add_parser(name, help=help_text, description=help_text)
        p.set_defaults(handler=handler)
        if name in ("contact", "classify", "jetdist", "rho", "extremum"):
            _add_fn(p, "0" if name == "rho" else None)
        if name in ("contact", "extremum"):
            _add_monoid(p)
        if name == "contact":
            p.add_argument("--variant", choices=["canonical", "standard"], default="canonical")
        if name == "classify":
            p.add_argument("--probe-r", dest="probe_r", help="comma-separated nr ratios (default 0.5,1/3,e^-2pi)")
        if name == "jetdist":
            p.add_argument("--gn", help="second map (default: the zero map)")
        if name == "rho":
            p.add_argument("--class", dest="cls", choices=[c.value for c in HomogClass], default="general")
            p.add_argument("--r", help="annulus ratio for the fractal class")
            p.add_argument("--r-exp", dest="r_exp", help="ratio given as e^-VALUE, e.g. 2pi")
            p.add_argument("--eps", type=float, default=0.5, help="annulus thickening")
        if name == "cantor":
            p.add_argument("--at", required=True, help="point(s), comma-separated; fractions stay exact")
        if name == "fractalize":
            p.add_argument("--fp", required=True, help="periodic profile as an expression in x1")
            p.add_argument("--period", default="2pi")
            p.add_argument("--grid", type=int, default=201, help="number of sample points for plot data")
            p.add_argument("--span", type=float, default=1.0, help="samples cover [-span, span]")
        if name == "catalog":
            p.add_argument("--name", choices=NAMES)
            p.add_argument("--dim", type=int)
        _add_common(p)
    return parser


def _emit(rep: Report, args) -> None:
    if not args.reproducible:
        rep.stamp()
    if args.csv_traces:
        rep.write_traces(args.csv_traces)
    text = rep.to_json()
    if args.json == "-":
        sys.stdout.write(text)
        return
    if args.json:
        Path(args.json).write_text(text)
    print(_summary(rep))


ERRORS = (UsageError, ParseError, DomainError, UnknownEntry, MonoidError, PeriodicityError, Unbounded,
          ValueError, KeyError)


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = build_config(args)
        rep = args.handler(args, cfg)
    except ERRORS as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else str(exc)
        print(f"metricjet {args.command}: error: {msg}", file=sys.stderr)
        if args.json:
            seed = args.seed if args.seed is not None else default_config().seed
            err = Report(args.command, _inputs(args), {}, seed, __version__, ok=False, error=str(msg))
            if not args.reproducible:
                err.stamp()
            if args.json == "-":
                sys.stdout.write(err.to_json())
            else:
                Path(args.json).write_text(err.to_json())
        return 2
    _emit(rep, args)
    return 0 if rep.ok else 1


if __name__ == "__main__":
    raise SystemExit(main())
