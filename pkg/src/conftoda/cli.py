"""Command-line interface.

Data commands (``grunsky``, ``moments``, ``weld``, ``oracle``) print JSON.
Check commands (``tau-check``, ``lax-check``, ``string-check``,
``sigma-check``, ``fourier-check``, ``suite``) run a verification suite and
exit with status 0 exactly when every record passes.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import List, Optional, Sequence

import numpy as np

from . import oracle, pairspace, tau, toda, welding
from .errors import ConvergenceError, DomainError, LocusError
from .grunsky import grunsky_table, grunsky_table_of_inverse_pair
from .report import (
    Report,
    SuiteConfig,
    build_entry,
    default_corpus,
    loglog_slope,
    run_suite,
    sweep_csv,
)

DEFAULT_MOBIUS = (0.3, 1.2, 0.24)
DEFAULT_SIGMA_G = [1.1, 0.03, [0.05, 0.03], -0.01]


def _complex(text: str) -> complex:
    return complex(text.replace(" ", ""))


def _cjson(z: complex) -> List[float]:
    return [float(np.real(z)), float(np.imag(z))]


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")


# ----------------------------------------------------------------------
# argument parsing


def _global_options(sub_level: bool = False, skip: Sequence[str] = ()) -> argparse.ArgumentParser:
    """Options accepted before or after the command name.

    Sub-level copies default to SUPPRESS so that a flag given before the
    command is not overwritten by the subparser's default.
    """
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("global options")
    opts = [
        ("--order", dict(type=int, default=None, help="truncation order N for tables and moments")),
        ("--grid", dict(type=int, default=pairspace.DEFAULT_GRID, help="number of circle nodes m")),
        ("--eps", dict(type=float, default=tau.FD_EPS, help="finite-difference step")),
        ("--tol", dict(type=float, default=None, help="override every tolerance")),
        ("--format", dict(dest="fmt", choices=("json", "csv"), default="json", help="report format")),
        ("--out", dict(default=None, help="write output here instead of stdout")),
    ]
    for flag, kw in opts:
        if flag in skip:
            continue
        if sub_level:
            kw = dict(kw, default=argparse.SUPPRESS)
        g.add_argument(flag, **kw)
    return p


def _pair_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--pair", action="append", default=[], metavar="PATH", help="conformal pair JSON file (repeatable)")
    p.add_argument("--mobius", action="append", nargs=3, default=[], metavar=("A", "B", "C"),
                   help="Mobius oracle parameters (repeatable; complex values as 0.1+0.2j)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="conftoda", description="Integrable structure of conformal pairs.",
                                     parents=[_global_options()])
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name: str, help_text: str, skip: Sequence[str] = ()) -> argparse.ArgumentParser:
        return sub.add_parser(name, help=help_text, parents=[_global_options(True, skip)])

    p = add("grunsky", "Grunsky coefficient table of a pair")
    _pair_options(p)
    p.add_argument("--inverse", action="store_true", help="table of the inverse pair (f^-1, g^-1)")

    p = add("moments", "time variables t_n and duals v_n of a pair")
    _pair_options(p)

    p = add("tau-check", "tau function: closed form, gradient, Hessian, coordinate duality")
    _pair_options(p)

    p = add("lax-check", "Lax equations along the flows t_n")
    _pair_options(p)
    p.add_argument("--n", type=int, nargs="+", default=[1, 2, 3, -1, -2, -3], help="flow indices")
    p.add_argument("--sweep", default=None, metavar="CSV", help="write an (eps, residual) sweep for the first flow")
    p.add_argument("--plot", default=None, metavar="PNG", help="render the sweep as a log-log PNG")
    p.add_argument("--which", choices=("g", "f"), default="g", help="series used for the sweep")

    p = add("string-check", "string equation and Riemann-Hilbert identities")
    _pair_options(p)

    p = add("weld", "conformal welding of a circle homeomorphism", skip=("--tol",))
    p.add_argument("--input", required=True, metavar="PATH", help="circle homeomorphism JSON")
    p.add_argument("--tol", dest="weld_tol", type=float, default=1e-13, help="fixed-point tolerance")
    p.add_argument("--damping", type=float, default=1.0)
    p.add_argument("--max-iters", type=int, default=500)

    p = add("sigma-check", "Sigma locus: reality of moments and harmonic moments")
    p.add_argument("--g", action="append", default=[], metavar="JSON",
                   help="coefficients [b, b0, b_-1, ...] of g as a JSON list (repeatable)")

    p = add("fourier-check", "Fourier-moment hierarchy on welded circle maps")
    p.add_argument("--a", action="append", type=_complex, default=[], help="Mobius circle map parameter (repeatable)")
    p.add_argument("--alpha", type=float, default=0.0)
    p.add_argument("--input", action="append", default=[], metavar="PATH", help="circle homeomorphism JSON (repeatable)")

    p = add("oracle", "closed-form Mobius pair data")
    p.add_argument("--a", type=_complex, default=DEFAULT_MOBIUS[0])
    p.add_argument("--b", type=_complex, default=DEFAULT_MOBIUS[1])
    p.add_argument("--c", type=_complex, default=DEFAULT_MOBIUS[2])
    p.add_argument("--emit", choices=("json", "pair"), default="json", help="oracle summary or the pair JSON")

    p = add("suite", "run a configured verification suite")
    p.add_argument("--config", default=None, metavar="PATH", help="SuiteConfig JSON (default corpus if omitted)")
    p.add_argument("--workers", type=int, default=None)
    return parser


# ----------------------------------------------------------------------
# helpers


def _corpus(args) -> List[dict]:
    corpus = [{"type": "pair", "path": p} for p in args.pair]
    for a, b, c in args.mobius:
        corpus.append({"type": "oracle", "a": _cjson(_complex(a)), "b": _cjson(_complex(b)), "c": _cjson(_complex(c))})
    if not corpus:
        a, b, c = DEFAULT_MOBIUS
        corpus.append({"type": "oracle", "a": a, "b": b, "c": c})
    return corpus


def _single_pair(args):
    entries = [build_entry(s, args.grid) for s in _corpus(args)]
    if len(entries) != 1:
        raise DomainError("this command takes exactly one pair")
    return entries[0].pair


def _config(args, checks: Sequence[str], corpus: List[dict], **extra) -> SuiteConfig:
    kw = dict(grid=args.grid, fd_eps=args.eps, corpus=corpus, checks=list(checks), fmt=args.fmt, global_tol=args.tol)
    if args.order is not None:
        kw["order"] = args.order
    kw.update(extra)
    return SuiteConfig(**kw)


def _finish(report: Report, args) -> int:
    _emit(report.to_csv() if args.fmt == "csv" else report.dumps(), args.out)
    t = report.totals
    print(f"{t['passed']}/{t['total']} checks passed", file=sys.stderr)
    return report.exit_code()


def _run_checks(args, checks: Sequence[str], corpus: List[dict], **extra) -> int:
    cfg = _config(args, checks, corpus, **extra)
    cfg.validate()
    return _finish(run_suite(cfg), args)


# ----------------------------------------------------------------------
# commands


def cmd_grunsky(args) -> int:
    pair = _single_pair(args)
    N = args.order or 8
    table = grunsky_table_of_inverse_pair(pair.f, pair.g, N) if args.inverse else grunsky_table(pair.f, pair.g, N)
    d = table.to_json()
    d["asymmetry"] = table.asymmetry()
    _emit(json.dumps(d, indent=2, sort_keys=True), args.out)
    tol = args.tol if args.tol is not None else 1e-11
    return 0 if d["asymmetry"] <= tol else 1


def cmd_moments(args) -> int:
    pair = _single_pair(args)
    moms = pairspace.moments(pair, args.order or pairspace.DEFAULT_MOMENT_ORDER)
    _emit(json.dumps(moms.to_json(), indent=2, sort_keys=True), args.out)
    return 0


def cmd_tau_check(args) -> int:
    return _run_checks(args, ("moments-oracle", "tau-closed-form", "tau-gradient", "tau-hessian", "duality"), _corpus(args))


def cmd_lax_check(args) -> int:
    if args.sweep or args.plot:
        flows = toda.PairFlows(_single_pair(args))
        eps_values = args.eps * 2.0 ** np.arange(3, -2, -1)
        rows = toda.lax_sweep(flows, args.n[0], eps_values, args.which)
        if args.sweep:
            with open(args.sweep, "w") as fh:
                fh.write(sweep_csv(rows))
        if args.plot:
            from .plotting import plot_sweep

            e, r = np.array(rows).T
            plot_sweep(e, r, args.plot, f"Lax residual, n={args.n[0]}, {args.which}")
        e, r = np.array(rows).T
        print(f"sweep slope {loglog_slope(e, r):.3f}", file=sys.stderr)
    return _run_checks(args, ("lax",), _corpus(args), lax_flows=list(args.n))


def cmd_string_check(args) -> int:
    return _run_checks(args, ("string", "rh", "jump"), _corpus(args))


def cmd_weld(args) -> int:
    with open(args.input) as fh:
        homeo = welding.CircleHomeo.from_json(json.load(fh))
    res = welding.weld_report(homeo, tol=args.weld_tol, damping=args.damping, max_iters=args.max_iters)
    roundtrip = welding.compose_welding(res.pair).max_abs_diff(homeo)
    d = {"pair": res.pair.to_json(), "iterations": res.iterations, "defect": res.defect, "tail": res.tail,
         "roundtrip": roundtrip}
    _emit(json.dumps(d, indent=2, sort_keys=True), args.out)
    return 0 if roundtrip <= welding.LOCUS_TOL else 1


def cmd_sigma_check(args) -> int:
    gs = [json.loads(g) for g in args.g] or [DEFAULT_SIGMA_G]
    corpus = [{"type": "sigma", "name": f"sigma{i}", "g": g} for i, g in enumerate(gs)]
    return _run_checks(args, ("sigma", "jump", "rh", "string"), corpus)


def cmd_fourier_check(args) -> int:
    corpus = [{"type": "homeo-mobius", "a": _cjson(a), "alpha": args.alpha} for a in args.a]
    corpus += [{"type": "homeo-file", "path": p} for p in args.input]
    if not corpus:
        corpus = [{"type": "homeo-mobius", "a": 0.2, "alpha": args.alpha}]
    return _run_checks(args, ("welding", "fourier"), corpus)


def cmd_oracle(args) -> int:
    p = oracle.MobiusParams(args.a, args.b, args.c)
    if args.emit == "pair":
        _emit(json.dumps(oracle.mobius_pair(p, m=args.grid).to_json(), indent=2, sort_keys=True), args.out)
        return 0
    N = args.order or 3
    moms = oracle.mobius_moments(p, N)
    d = {
        "params": {"a": _cjson(p.a), "b": _cjson(p.b), "c": _cjson(p.c)},
        "t": {str(n): _cjson(moms.t[n]) for n in range(-N, N + 1)},
        "v": {str(n): _cjson(moms.v[n]) for n in range(-N, N + 1)},
        "log_tau": _cjson(oracle.mobius_log_tau(p)),
    }
    _emit(json.dumps(d, indent=2, sort_keys=True), args.out)
    return 0


def cmd_suite(args) -> int:
    if args.config:
        with open(args.config) as fh:
            cfg = SuiteConfig.from_json(json.load(fh))
    else:
        cfg = _config(args, SuiteConfig().checks, default_corpus())
    if args.tol is not None:
        cfg.global_tol = args.tol
    if args.workers is not None:
        cfg.workers = args.workers
    cfg.fmt = args.fmt
    cfg.validate()
    return _finish(run_suite(cfg), args)


COMMANDS = {
    "grunsky": cmd_grunsky,
    "moments": cmd_moments,
    "tau-check": cmd_tau_check,
    "lax-check": cmd_lax_check,
    "string-check": cmd_string_check,
    "weld": cmd_weld,
    "sigma-check": cmd_sigma_check,
    "fourier-check": cmd_fourier_check,
    "oracle": cmd_oracle,
    "suite": cmd_suite,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (DomainError, LocusError, ConvergenceError, OSError, json.JSONDecodeError) as exc:
        print(f"conftoda {args.command}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
