"""Command-line front end.

Exit codes: 0 when every check passes (negative controls included), 1 when a
check fails, 2 on usage or configuration errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .diffgeo import curvature_scan
from .errors import BergmanLabError
from .kernels import AnnulusKernel, BallKernel, EllipsoidKernel, PoweredKernel, RestrictedKernel
from .maps import parse_complex_vector, rep_coords_map
from .moments import MomentMeasure, moment_table, powered_ball_density, support_reach_estimate
from .reporting import SCHEMA_VERSION, dumps, fmt_float
from .verify import (
    DEFAULT_SEED,
    Expectation,
    built_in_suite,
    kernel_from_spec,
    load_scenarios,
    run_suite,
    suite_by_name,
)

HELP_WIDTH = 100
OUT_ENV = "BERGMANLAB_OUT"
EXAMPLE_SCENARIOS = (
    "slit-curvature-d1", "mobius-orbit-d1", "d2-curvature-transport", "family-identity-n2", "family-identity-n3",
)


def _formatter(prog):
    return argparse.RawDescriptionHelpFormatter(prog, width=HELP_WIDTH, max_help_position=32)


def _seed(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in 64 bits")
    return value


def _points(text: str) -> np.ndarray:
    """Parse "0.5,0.1+0.2j" into a complex vector."""
    try:
        return np.array([complex(p.strip().replace(" ", "")) for p in text.split(",")], dtype=complex)
    except ValueError:
        raise argparse.ArgumentTypeError(f"cannot parse complex point {text!r}") from None


def _common(p: argparse.ArgumentParser, formats=("json", "csv", "table"), default="table",
            out_default="else print only") -> None:
    p.add_argument("--seed", type=_seed, default=DEFAULT_SEED,
                   help=f"master seed (default {DEFAULT_SEED:#x}, the bytes 'B3RGMAN')")
    p.add_argument("--out", metavar="DIR", default=None,
                   help=f"directory for data files (default ${OUT_ENV}, {out_default})")
    p.add_argument("--format", choices=formats, default=default, help="output format for standard output")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bergmanlab", formatter_class=_formatter,
        description="Bergman kernels, metrics and holomorphic sectional curvature: checks and one-off quantities.",
        epilog="exit status: 0 all checks pass, 1 a check failed, 2 usage or configuration error",
    )
    parser.add_argument("--version", action="version", version=f"bergmanlab {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True

    p = sub.add_parser("verify", help="run a scenario suite and write report files", formatter_class=_formatter)
    p.add_argument("--suite", choices=["builtin"], default=None, help="run the built-in registry")
    p.add_argument("--scenarios", metavar="FILE", nargs="+", default=[], help="scenario JSON files")
    p.add_argument("--only", metavar="NAME", nargs="+", default=[], help="restrict the built-in suite to names")
    p.add_argument("--tolerance", metavar="STAT=VALUE", action="append", default=[],
                   help="override the bound of every expectation on STAT (repeatable)")
    p.add_argument("--list", action="store_true", help="list scenario names and exit")
    _common(p, out_default="else ./bergmanlab-out")

    p = sub.add_parser("curvature", help="holomorphic sectional curvature at random points",
                       formatter_class=_formatter)
    p.add_argument("--domain", choices=["ball", "slit", "d2", "annulus"], default="ball",
                   help="domain with its closed-form or pulled-back kernel")
    p.add_argument("--n", type=int, default=2, help="complex dimension (ball and slit)")
    p.add_argument("--r", type=float, default=0.5, help="inner radius of the annulus")
    p.add_argument("--samples", type=int, default=100, help="number of random (z, X) pairs")
    p.add_argument("--engine", choices=["auto", "analytic", "cauchy", "fd"], default="auto",
                   help="derivative engine for log K")
    p.add_argument("--max-norm", type=float, default=None, help="only use points with |z| <= this")
    _common(p)

    p = sub.add_parser("moments", help="moment table int w^a conj(w)^b d eta as CSV",
                       formatter_class=_formatter)
    p.add_argument("--domain", choices=["ball", "scaled-ball", "slit", "d2", "annulus"], default="ball",
                   help="integration domain")
    p.add_argument("--n", type=int, default=1, help="complex dimension")
    p.add_argument("--radius", type=float, default=0.8, help="radius of the scaled ball")
    p.add_argument("--r", type=float, default=0.5, help="inner radius of the annulus")
    p.add_argument("--lambda", dest="lam", type=float, default=1.0, help="kernel power (ball weight)")
    p.add_argument("--max-degree", type=int, default=4, help="largest |alpha| and |beta|")
    p.add_argument("--engine", choices=["quadrature", "mc"], default="quadrature", help="integration engine")
    p.add_argument("--samples", type=int, default=200_000, help="Monte Carlo sample count")
    _common(p, default="csv")

    p = sub.add_parser("kernel-eval", help="evaluate a closed-form kernel K(z, w)", formatter_class=_formatter)
    p.add_argument("--kernel", choices=["ball", "powered", "ellipsoid", "annulus"], default="ball",
                   help="kernel family; the dimension is taken from --z")
    p.add_argument("--z", type=_points, required=True, help='point, e.g. "0.5,0.1+0.2j"')
    p.add_argument("--w", type=_points, default=None, help="second point (default: z)")
    p.add_argument("--lambda", dest="lam", type=float, default=1.0, help="power of the ball kernel")
    p.add_argument("--r", type=float, default=0.5, help="inner radius of the annulus")
    p.add_argument("--H", default=None, help="Hermitian matrix as JSON rows (ellipsoid)")
    _common(p, formats=("json", "table"))

    p = sub.add_parser("repcoords", help="representative coordinates T_p(z) of the ball",
                       formatter_class=_formatter)
    p.add_argument("--p", type=_points, required=True, help="base point")
    p.add_argument("--z", type=_points, required=True, help="evaluation point")
    _common(p, formats=("json", "table"))

    p = sub.add_parser("support-reach", help="root-test estimate of sup |Re z_1| on the support",
                       formatter_class=_formatter)
    p.add_argument("--domain", choices=["ball", "scaled-ball"], default="ball",
                   help="ball uses closed-form moments, scaled-ball uses quadrature")
    p.add_argument("--n", type=int, default=1, help="complex dimension")
    p.add_argument("--radius", type=float, default=0.8, help="radius of the scaled ball")
    p.add_argument("--lambda", dest="lam", type=float, default=1.0, help="kernel power (ball weight)")
    p.add_argument("--m-max", type=int, default=200, help="moment order of the root test")
    _common(p, formats=("json", "table"))

    p = sub.add_parser("examples", help="identity checks for the slit-ball and quartic examples",
                       formatter_class=_formatter)
    _common(p)
    return parser


def full_help() -> str:
    """Help for the program and every subcommand (the golden-file text)."""
    parser = build_parser()
    parts = [parser.format_help()]
    sub = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    for name, p in sub.choices.items():
        parts.append(f"\n=== {name} ===\n" + p.format_help())
    return "".join(parts)


def _out_dir(args) -> Path | None:
    d = args.out or os.environ.get(OUT_ENV)
    if not d:
        return None
    path = Path(d)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _write(path: Path | None, name: str, text: str) -> None:
    if path is not None:
        (path / name).write_text(text, encoding="utf-8")


def _cmd_verify(args) -> int:
    if args.list:
        for s in built_in_suite():
            print(f"{s.name}\t{s.kind}" + ("\tnegative-control" if s.negative_control else ""))
        return 0
    scenarios = []
    if args.suite or args.only or not args.scenarios:
        scenarios += suite_by_name(args.only)
    for f in args.scenarios:
        scenarios += load_scenarios(f)
    for item in args.tolerance:
        stat, _, value = item.partition("=")
        if not value:
            raise BergmanLabError(f"--tolerance expects STAT=VALUE, got {item!r}")
        bound = float(value)
        scenarios = [_override(s, stat, bound) for s in scenarios]
    report = run_suite(scenarios, args.seed)
    out = _out_dir(args) or Path("bergmanlab-out")
    out.mkdir(parents=True, exist_ok=True)
    _write(out, "report.json", report.to_json())
    _write(out, "timings.json", dumps(report.timings()))
    _write(out, "report.csv", _report_csv(report))
    if args.format == "json":
        sys.stdout.write(report.to_json())
    elif args.format == "csv":
        sys.stdout.write(_report_csv(report))
    else:
        print(report.table())
        print(f"seed {args.seed:#x}; reports written to {out}")
    return 0 if report.passed else 1


def _override(s, stat, bound):
    from dataclasses import replace

    def fix(exps):
        return tuple(Expectation(e.statistic, e.relation, bound, e.provenance) if e.statistic == stat else e
                     for e in exps)

    return replace(s, expected=fix(s.expected))


def _report_csv(report) -> str:
    lines = ["scenario,kind,negative_control,statistic,relation,bound,value,ok,seed"]
    for r in report.results:
        for c in r.checks:
            lines.append(",".join([
                r.name, r.kind, str(r.negative_control).lower(), c["statistic"], c["relation"],
                fmt_float(c["bound"]), fmt_float(c["value"]), str(c["ok"]).lower(), str(r.seed),
            ]))
    return "\n".join(lines) + "\n"


def _cmd_curvature(args) -> int:
    from .domains import annulus, ball, quartic_domain, slit_ball

    if args.domain == "ball":
        K, D = BallKernel(args.n), ball(args.n)
    elif args.domain == "slit":
        D = slit_ball(args.n)
        K = RestrictedKernel(BallKernel(args.n), D)
    elif args.domain == "d2":
        K, D = kernel_from_spec({"kind": "pullback-d2", "n": 2}), quartic_domain(2)
    else:
        K, D = AnnulusKernel(args.r), annulus(args.r)
    rep = curvature_scan(K, D, args.samples, args.seed, engine=args.engine, max_norm=args.max_norm)
    data = {"schema": SCHEMA_VERSION, "seed": args.seed, **rep.to_dict()}
    out = _out_dir(args)
    _write(out, "curvature.json", dumps(data))
    _write(out, "curvature.csv", rep.to_csv())
    if args.format == "json":
        sys.stdout.write(dumps(data))
    elif args.format == "csv":
        sys.stdout.write(rep.to_csv())
    else:
        print(f"{'#':>4}  {'H':>22}")
        for k, h in enumerate(rep.values):
            print(f"{k:>4}  {h:>22.15f}")
        s = rep.summary()
        print(f"min {s['min']:.15f}  max {s['max']:.15f}  mean {s['mean']:.15f}  spread {s['spread']:.3e}"
              f"  engine {s['engine']}  seed {args.seed:#x}")
    return 0


def _cmd_moments(args) -> int:
    from .domains import annulus, ball, quartic_domain, slit_ball

    dom = {
        "ball": lambda: ball(args.n), "scaled-ball": lambda: ball(args.n, radius=args.radius),
        "slit": lambda: slit_ball(max(args.n, 2)), "d2": lambda: quartic_domain(max(args.n, 2)),
        "annulus": lambda: annulus(args.r),
    }[args.domain]()
    dens = None if args.lam == 1.0 else powered_ball_density(dom.n, args.lam)
    table = moment_table(MomentMeasure(dom, dens, args.engine, args.samples, args.seed), args.max_degree)
    table.meta["seed"] = args.seed
    data = {"schema": SCHEMA_VERSION, "seed": args.seed, **table.to_dict()}
    out = _out_dir(args)
    _write(out, "moments.csv", table.to_csv())
    _write(out, "moments.json", dumps(data))
    if args.format == "json":
        sys.stdout.write(dumps(data))
    elif args.format == "csv":
        sys.stdout.write(table.to_csv())
    else:
        for a, b, re, im, se, _ in table.rows():
            print(f"{str(a):>12} {str(b):>12} {re:>24.17g} {im:>24.17g} {se:>10.3g}")
    return 0


def _cmd_kernel_eval(args) -> int:
    z = args.z
    w = z if args.w is None else args.w
    if args.kernel == "ball":
        K = BallKernel(z.size)
    elif args.kernel == "powered":
        K = PoweredKernel(z.size, args.lam)
    elif args.kernel == "annulus":
        K = AnnulusKernel(args.r)
    else:
        if args.H is None:
            raise BergmanLabError("--H is required for the ellipsoid kernel")
        K = EllipsoidKernel(np.array([parse_complex_vector(row) for row in json.loads(args.H)]))
    for pt in (z, w):
        if K.domain is not None and pt not in K.domain:
            from .errors import DomainError

            raise DomainError(f"point {pt} lies outside {K.domain.name!r}")
    val = complex(K(z[None], w[None])[0])
    data = {"schema": SCHEMA_VERSION, "seed": args.seed, "kernel": K.name, "value": val}
    _write(_out_dir(args), "kernel.json", dumps(data))
    if args.format == "json":
        sys.stdout.write(dumps(data))
    else:
        print(f"{K.name}: {fmt_float(val.real)} {'+' if val.imag >= 0 else '-'} {fmt_float(abs(val.imag))}i")
    return 0


def _cmd_repcoords(args) -> int:
    if args.p.size != args.z.size:
        raise BergmanLabError("--p and --z must have the same dimension")
    T = rep_coords_map(BallKernel(args.p.size), args.p)
    w = T(args.z[None])[0]
    inside = bool(T.target.contains(w[None])[0])
    data = {"schema": SCHEMA_VERSION, "seed": args.seed, "p": args.p, "z": args.z, "T_p(z)": w,
            "in_ellipsoid": inside}
    _write(_out_dir(args), "repcoords.json", dumps(data))
    if args.format == "json":
        sys.stdout.write(dumps(data))
    else:
        print("T_p(z) = (" + ", ".join(f"{c.real:.15g}{c.imag:+.15g}i" for c in w) + f"); in E_g(p): {inside}")
    return 0


def _cmd_support_reach(args) -> int:
    from .domains import ball

    if args.domain == "ball":
        est = support_reach_estimate(None, args.m_max, lam=args.lam, n=args.n)
    else:
        est = support_reach_estimate(MomentMeasure(ball(args.n, radius=args.radius)), args.m_max)
    data = {"schema": SCHEMA_VERSION, "seed": args.seed, "domain": args.domain, "m_max": args.m_max,
            "estimate": est}
    _write(_out_dir(args), "support_reach.json", dumps(data))
    if args.format == "json":
        sys.stdout.write(dumps(data))
    else:
        print(f"support reach ({args.domain}, m_max={args.m_max}): {est:.15f}")
    return 0


def _cmd_examples(args) -> int:
    report = run_suite(suite_by_name(list(EXAMPLE_SCENARIOS)), args.seed)
    out = _out_dir(args)
    _write(out, "examples.json", report.to_json())
    if args.format == "json":
        sys.stdout.write(report.to_json())
    elif args.format == "csv":
        sys.stdout.write(_report_csv(report))
    else:
        print(report.table())
    return 0 if report.passed else 1


_COMMANDS = {
    "verify": _cmd_verify, "curvature": _cmd_curvature, "moments": _cmd_moments,
    "kernel-eval": _cmd_kernel_eval, "repcoords": _cmd_repcoords, "support-reach": _cmd_support_reach,
    "examples": _cmd_examples,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return _COMMANDS[args.command](args)
    except (BergmanLabError, OSError) as exc:
        print(f"bergmanlab {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
