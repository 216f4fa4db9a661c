"""Command-line front end: ``mzchain {run,figure,optimize,oracle}``.

Every flag can also come from ``--config FILE``, a flat text file with one
``key = value`` per line where ``key`` is the flag name without dashes
(``M = 250``, ``coherent = 10``, ``mode = exact``). Flags given on the
command line win over the file.

Exit codes: 0 success, 1 invalid input, 2 infeasible optimization,
3 oracle cross-check disagreement.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import analytic, figures, optimizer, oracle
from .engine import InvalidParameters, ProtocolParams, Scheme, channel_occupancy_profile, run
from .states import PhotonStatistics, StatisticsKind

OUTPUT_DIR_ENV = "MZCHAIN_OUTPUT_DIR"

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_INFEASIBLE = 2
EXIT_ORACLE_MISMATCH = 3

_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def read_config(path: str | Path) -> dict[str, str]:
    out = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


def _add_source(p):
    g = p.add_mutually_exclusive_group()
    g.add_argument("--fock", type=int, help="Fock input with this many photons")
    g.add_argument("--coherent", type=float, help="coherent input with this mean photon number")
    g.add_argument("--weights", type=str, help="comma-separated photon-number weights w_0,w_1,...")


def _add_protocol(p):
    p.add_argument("--scheme", choices=[s.value for s in Scheme], default="slaz")
    p.add_argument("--M", type=int, help="outer cycle number")
    p.add_argument("--N", type=int, help="inner cycle number")
    p.add_argument("--mc", type=int, help="cutoff m_c (modified scheme)")
    p.add_argument("--s", type=int, choices=[0, 1], help="Bob's signal")
    _add_source(p)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mzchain", description=__doc__.splitlines()[0])
    parser.add_argument("--config", help="key = value file with default flag values")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("run", help="evaluate one configuration")
    _add_protocol(p)
    p.add_argument("--epsilon", type=float, default=1e-12, help="photon-number truncation tail")
    p.add_argument("--backend", choices=["numba", "numpy"])
    p.add_argument("--profile", action="store_true", help="also print the channel occupancy maximum location")
    p.add_argument("--json", action="store_true", help="print JSON instead of text")

    p = sub.add_parser("figure", help="write a figure or table as CSV")
    p.add_argument("name", choices=figures.FIGURES)
    p.add_argument("--output", help="CSV path (default: <output dir>/<name>.csv)")
    p.add_argument("--output_dir", "--output-dir", dest="output_dir",
                   help=f"output directory (default: ${OUTPUT_DIR_ENV} or .)")
    p.add_argument("--mean", type=float, help="mean photon number (10 for fig1b/c, 200 otherwise)")
    p.add_argument("--M_start", "--M-start", dest="M_start", type=int, default=50)
    p.add_argument("--M_stop", "--M-stop", dest="M_stop", type=int, default=500)
    p.add_argument("--M_step", "--M-step", dest="M_step", type=int, default=50)
    p.add_argument("--N_start", "--N-start", dest="N_start", type=int, default=5000)
    p.add_argument("--N_stop", "--N-stop", dest="N_stop", type=int, default=50000)
    p.add_argument("--N_step", "--N-step", dest="N_step", type=int, default=5000)
    p.add_argument("--P_start", "--P-start", dest="P_start", type=float, default=0.5)
    p.add_argument("--P_stop", "--P-stop", dest="P_stop", type=float, default=0.95)
    p.add_argument("--P_step", "--P-step", dest="P_step", type=float, default=0.05)
    p.add_argument("--k_bar", "--k-bar", dest="k_bar", type=float, default=2.0)
    p.add_argument("--source", choices=["engine", "analytic"], default="engine")
    p.add_argument("--mc_max", "--mc-max", dest="mc_max", type=int, default=figures.FIG1D_MC_RANGE[1])
    p.add_argument("--workers", type=int, default=1)

    p = sub.add_parser("optimize", help="minimum total cycle number search")
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--mode", choices=["exact", "approx", "baseline", "baseline-exact"])
    mode.add_argument("--exact", dest="mode", action="store_const", const="exact")
    mode.add_argument("--approx", dest="mode", action="store_const", const="approx")
    mode.add_argument("--baseline", dest="mode", action="store_const", const="baseline")
    mode.add_argument("--baseline-exact", dest="mode", action="store_const", const="baseline-exact")
    p.add_argument("--target", type=float, help="success probability target for both signals")
    p.add_argument("--target_p1", "--target-p1", dest="target_p1", type=float,
                   help="separate target for signal 1")
    p.add_argument("--coherent", type=float, help="mean photon number of the coherent source")
    p.add_argument("--mc_min", "--mc-min", dest="mc_min", type=int, default=1)
    p.add_argument("--mc_max", "--mc-max", dest="mc_max", type=int, default=optimizer.DEFAULT_MC_MAX)
    p.add_argument("--M_max", "--M-max", dest="M_max", type=int, default=optimizer.DEFAULT_M_MAX)
    p.add_argument("--N_max", "--N-max", dest="N_max", type=int, default=optimizer.DEFAULT_N_MAX)
    p.add_argument("--output", help="also write the JSON result here")

    p = sub.add_parser("oracle", help="cross-check the engine against the Fock-space and Monte Carlo oracles")
    _add_protocol(p)
    p.add_argument("--cutoff", type=int, default=oracle.DEFAULT_CUTOFF)
    p.add_argument("--shots", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--sigmas", type=float, default=3.0)
    p.add_argument("--tolerance", type=float, default=1e-10, help="Fock-space agreement tolerance")
    p.add_argument("--skip_fock", "--skip-fock", dest="skip_fock", action="store_true")
    p.add_argument("--json", action="store_true")
    return parser


def _apply_config(parser: argparse.ArgumentParser, argv: list[str]) -> argparse.Namespace:
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return parser.parse_args(argv)
    try:
        cfg = read_config(known.config)
    except OSError as exc:
        raise UsageError(f"cannot read config file: {exc}") from exc
    first = parser.parse_args(argv)
    subparsers = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    sub = subparsers.choices[first.command]
    actions = {a.dest: a for a in sub._actions if a.dest != "help"}
    defaults = {}
    for key, value in cfg.items():
        if key == "command":
            continue
        if key not in actions:
            raise UsageError(f"unknown config key {key!r} for '{first.command}'")
        action = actions[key]
        if isinstance(action, argparse._StoreTrueAction):
            low = value.lower()
            if low not in _TRUE | _FALSE:
                raise UsageError(f"config key {key!r} expects true/false, got {value!r}")
            defaults[key] = low in _TRUE
        else:
            defaults[key] = value
    sub.set_defaults(**defaults)
    return parser.parse_args(argv)


def _stats_from(args) -> PhotonStatistics:
    given = [x is not None for x in (args.fock, args.coherent, args.weights)]
    if sum(given) != 1:
        raise UsageError("give exactly one source: --fock, --coherent or --weights")
    if args.fock is not None:
        return PhotonStatistics.fock(args.fock)
    if args.coherent is not None:
        return PhotonStatistics.coherent(args.coherent)
    return PhotonStatistics.arbitrary([float(x) for x in str(args.weights).split(",")])


def _params_from(args) -> ProtocolParams:
    for name in ("M", "N", "s"):
        if getattr(args, name) is None:
            raise UsageError(f"--{name} is required")
    return ProtocolParams(Scheme(args.scheme), args.M, args.N, args.s, args.mc)


def _analytic_report(params: ProtocolParams, stats: PhotonStatistics) -> dict:
    if stats.kind is StatisticsKind.FOCK and stats.photons == 0:
        return {}
    if params.scheme is Scheme.SLAZ:
        approx = analytic.approx_probs_slaz(params.M, params.N, stats)
        out = {"P_linearized": approx.linearized[params.s],
               "P_asymptotic_sum": approx.exact_sum[params.s],
               "validity": approx.validity}
        if stats.kind is StatisticsKind.COHERENT:
            out["P_closed_form"] = analytic.coherent_slaz_closed(params.M, params.N, stats.mean, params.s)
        return out
    if stats.kind is not StatisticsKind.COHERENT:
        return {}
    approx = analytic.modified_probs(stats.mean, params.M, params.N, params.m_c)
    return {"P_first_order": approx.P1 if params.s else approx.P0,
            "k_bar": approx.k_bar, "validity": approx.validity}


def cmd_run(args) -> int:
    stats = _stats_from(args)
    params = _params_from(args)
    out = run(params, stats, epsilon=args.epsilon, backend=args.backend)
    report = {"params": {"scheme": params.scheme.value, "M": params.M, "N": params.N,
                         "m_c": params.m_c, "s": params.s, "source": stats.describe()},
              "outcome": out.as_dict(),
              "analytic": _analytic_report(params, stats)}
    if args.profile:
        prof = channel_occupancy_profile(params, stats, epsilon=args.epsilon, backend=args.backend)
        top = max(prof, key=lambda p: p.mean_photons)
        report["occupancy_peak"] = {"outer": top.outer, "inner": top.inner, "mean_photons": top.mean_photons}
    if args.json:
        print(json.dumps(report, indent=2, default=str))
        return EXIT_OK
    label = f"P{params.s}" if params.scheme is Scheme.SLAZ else f"P~{params.s}"
    print(f"{params.scheme.value} M={params.M} N={params.N}"
          + (f" m_c={params.m_c}" if params.m_c else "") + f" s={params.s} source={stats.describe()}")
    line = f"{label} exact={figures.fmt(out.p_success)}"
    for key in ("P_closed_form", "P_linearized", "P_first_order"):
        if key in report["analytic"]:
            line += f" {key[2:]}={figures.fmt(report['analytic'][key])}"
    print(line)
    for key, value in out.as_dict().items():
        if key in ("scheme", "signal"):
            continue
        print(f"  {key} = {value if isinstance(value, list) else figures.fmt(value)}")
    if "occupancy_peak" in report:
        pk = report["occupancy_peak"]
        print(f"  occupancy peak at outer={pk['outer']} inner={pk['inner']}")
    for key, ok in report["analytic"].get("validity", {}).items():
        print(f"  validity {key}: {'ok' if ok else 'violated'}")
    return EXIT_OK


def cmd_figure(args) -> int:
    spec = figures.SweepSpec(
        name=args.name,
        M_values=figures.int_grid(args.M_start, args.M_stop, args.M_step),
        N_values=figures.int_grid(args.N_start, args.N_stop, args.N_step),
        P_values=figures.grid(args.P_start, args.P_stop, args.P_step),
        mean=args.mean,
        k_bar=args.k_bar,
        source=args.source,
        m_c_range=(1, args.mc_max),
        workers=args.workers,
    )
    if args.output:
        path = Path(args.output)
    else:
        out_dir = args.output_dir or os.environ.get(OUTPUT_DIR_ENV) or "."
        path = Path(out_dir) / f"{args.name}.csv"
    try:
        figures.write_figure(spec, path)
    except OSError as exc:
        raise UsageError(f"cannot write {path}: {exc}") from exc
    print(path)
    return EXIT_OK


def cmd_optimize(args) -> int:
    mode = args.mode or "exact"
    if args.target is None:
        raise UsageError("--target is required")
    if mode in ("exact", "approx") and args.coherent is None:
        raise UsageError("--coherent is required for the modified-scheme searches")
    if mode == "exact":
        res = optimizer.minimize_T_exact(args.target, args.coherent, target_p1=args.target_p1,
                                         m_c_range=(args.mc_min, args.mc_max),
                                         M_max=args.M_max, N_max=args.N_max)
    elif mode == "approx":
        t1 = args.target if args.target_p1 is None else args.target_p1
        if not (0 < args.target < 1 and 0 < t1 < 1):
            raise UsageError("targets must lie in (0, 1)")
        res = optimizer.minimize_T_approx(args.target, t1, args.coherent, m_c_max=args.mc_max)
    elif mode == "baseline":
        res = optimizer.baseline_min_T(args.target)
    else:
        res = optimizer.baseline_min_T_exact(args.target)
    text = json.dumps(res.as_dict(), indent=2)
    print(text)
    if args.output:
        Path(args.output).write_text(text + "\n", encoding="utf-8")
    return EXIT_OK if res.feasible else EXIT_INFEASIBLE


def cmd_oracle(args) -> int:
    stats = _stats_from(args)
    params = _params_from(args)
    ref = run(params, stats)
    report = {"engine": ref.as_dict()}
    ok = True
    if not args.skip_fock:
        fock = oracle.fock_simulate(params, stats, cutoff=args.cutoff)
        fields = ("prob_only_d0", "prob_only_d1", "prob_both", "prob_none", "prob_leak", "p_success")
        diff = max(abs(getattr(ref, f) - getattr(fock, f)) for f in fields)
        allowed = args.tolerance + fock.truncation_error
        report["fock"] = {"max_abs_difference": diff, "truncation_error": fock.truncation_error,
                          "agree": diff <= allowed}
        ok &= diff <= allowed
    tally = oracle.monte_carlo_clicks(params, stats, args.shots, args.seed)
    within = oracle.within_binomial_bounds(tally, ref, args.sigmas)
    report["monte_carlo"] = {"frequencies": tally.frequencies(),
                             "engine": oracle.engine_class_probabilities(ref), "within": within}
    ok &= all(within.values())
    if args.json:
        print(json.dumps(report, indent=2, default=str))
    else:
        if "fock" in report:
            f = report["fock"]
            print(f"fock-space: max |diff| = {f['max_abs_difference']:.3e} "
                  f"(truncation {f['truncation_error']:.3e}) {'agree' if f['agree'] else 'DISAGREE'}")
        for name, freq in tally.frequencies().items():
            p = report["monte_carlo"]["engine"][name]
            print(f"monte-carlo {name}: freq={freq:.6f} engine={p:.6f} "
                  f"{'ok' if within[name] else 'outside'} ({args.sigmas:g} sigma)")
    return EXIT_OK if ok else EXIT_ORACLE_MISMATCH


COMMANDS = {"run": cmd_run, "figure": cmd_figure, "optimize": cmd_optimize, "oracle": cmd_oracle}


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        try:
            args = _apply_config(parser, argv)
        except SystemExit as exc:  # argparse usage errors and --help
            return exc.code if isinstance(exc.code, int) else EXIT_INVALID
        return COMMANDS[args.command](args)
    except (UsageError, InvalidParameters, oracle.CutoffTooSmall, ValueError) as exc:
        print(f"mzchain: error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
