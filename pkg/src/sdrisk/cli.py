"""Command line interface.

Subcommands: measure, roll, simulate, replicate, curves, surface, axioms.
Exit status 0 on success, 1 on any validation problem (one line on stderr
naming the offending flag or input), 2 when the axiom suite records
non-advisory failures.

All randomness flows from --seed; seeded runs print the seed in the output
header so a result can be traced to its stream.  Floats serialize with 17
significant digits, making determinism checkable with a plain file diff.
With --output and --plot, a PNG figure is rendered next to the delimited
output file.
"""

import argparse
import sys
from pathlib import Path

from . import io as _io
from . import plotting
from .axioms import CheckConfig, check_coherence, check_deviation
from .errors import RiskError
from .experiments import (
    MEASURE_ORDER,
    ReplicationSpec,
    alpha_beta_surface,
    measure_curves,
    rolling_measures,
    run_replication,
)
from .measures import RiskConfig, sdr_hs
from .simulation import SCENARIO_NAMES, scenario_params, simulate_path

__all__ = ["build_parser", "parse_and_dispatch", "main"]

_DEFAULT_SEED = 20240819
_CURVE_ALPHAS = "0.001,0.005,0.01,0.025,0.05,0.1,0.25,0.5"
_SURFACE_ALPHAS = "0.01,0.025,0.05,0.1,0.25,0.5"
_SURFACE_BETAS = "0,1,2,5,10,20"


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on bad usage; validation problems must
    # exit 1 with a single line instead
    def error(self, message):
        raise _UsageError(message)


def _float_list(text: str):
    try:
        values = tuple(float(f) for f in text.split(",") if f.strip() != "")
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")
    if not values:
        raise argparse.ArgumentTypeError("expected at least one number")
    return values


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {v}")
    return v


def _add_input(p, scenario_too: bool):
    if scenario_too:
        p.add_argument("--input", help="CSV of observations (see --kind)")
        p.add_argument("--scenario", choices=SCENARIO_NAMES,
                       help="simulate the input instead of reading a file")
        p.add_argument("--n", type=_positive_int, default=2000,
                       help="simulated length when --scenario is used")
        p.add_argument("--burn-in", type=int, default=1000)
        p.add_argument("--seed", type=int, default=_DEFAULT_SEED)
    else:
        p.add_argument("--input", required=True, help="CSV of observations (see --kind)")
    p.add_argument("--kind", choices=("returns", "prices"), default="returns",
                   help="whether file rows are returns or price levels")


def _add_output(p):
    p.add_argument("--output", help="write here instead of stdout")
    p.add_argument("--format", choices=("csv", "json"), default=None,
                   help="output format (default: json for measure and axioms, csv otherwise)")
    p.add_argument("--plot", action="store_true",
                   help="render a PNG figure next to --output")


def build_parser() -> _Parser:
    parser = _Parser(prog="sdrisk", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("measure", help="tail measures of one series")
    _add_input(p, scenario_too=False)
    p.add_argument("--alpha", type=float, default=0.01)
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--p", type=float, default=2.0)
    p.add_argument("--mode", choices=("literal", "coherent"), default="coherent")
    p.add_argument("--signed", action="store_true",
                   help="emit negated (return-scale) values instead of loss magnitudes")
    _add_output(p)
    p.set_defaults(handler=_cmd_measure, default_format="json")

    p = sub.add_parser("roll", help="trailing-window measures along a series")
    _add_input(p, scenario_too=False)
    p.add_argument("--window", type=_positive_int, default=2000)
    p.add_argument("--alpha", type=float, default=0.01)
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--p", type=float, default=2.0)
    p.add_argument("--mode", choices=("literal", "coherent"), default="coherent")
    p.add_argument("--signed", action="store_true")
    _add_output(p)
    p.set_defaults(handler=_cmd_roll, default_format="csv")

    p = sub.add_parser("simulate", help="generate a scenario return path")
    p.add_argument("--scenario", required=True, choices=SCENARIO_NAMES)
    p.add_argument("--n", type=_positive_int, default=2000)
    p.add_argument("--burn-in", type=int, default=1000)
    p.add_argument("--seed", type=int, default=_DEFAULT_SEED)
    _add_output(p)
    p.set_defaults(handler=_cmd_simulate, default_format="csv")

    p = sub.add_parser("replicate", help="Monte Carlo study over many paths")
    p.add_argument("--scenario", required=True, choices=SCENARIO_NAMES)
    p.add_argument("--replicates", type=_positive_int, default=500)
    p.add_argument("--n", type=_positive_int, default=2000)
    p.add_argument("--alphas", type=_float_list, default=(0.01, 0.05),
                   help="comma-separated significance levels")
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--p", type=float, default=2.0)
    p.add_argument("--mode", choices=("literal", "coherent"), default="literal")
    p.add_argument("--burn-in", type=int, default=1000)
    p.add_argument("--seed", type=int, default=_DEFAULT_SEED)
    p.add_argument("--threads", type=_positive_int, default=1)
    _add_output(p)
    p.set_defaults(handler=_cmd_replicate, default_format="csv")

    p = sub.add_parser("curves", help="measures over a grid of significance levels")
    _add_input(p, scenario_too=True)
    p.add_argument("--alphas", type=_float_list, default=_float_list(_CURVE_ALPHAS))
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--p", type=float, default=2.0)
    p.add_argument("--signed", action="store_true")
    _add_output(p)
    p.set_defaults(handler=_cmd_curves, default_format="csv")

    p = sub.add_parser("surface", help="risk over an (alpha, beta) grid")
    _add_input(p, scenario_too=True)
    p.add_argument("--alphas", type=_float_list, default=_float_list(_SURFACE_ALPHAS))
    p.add_argument("--betas", type=_float_list, default=_float_list(_SURFACE_BETAS))
    p.add_argument("--p", type=float, default=2.0)
    _add_output(p)
    p.set_defaults(handler=_cmd_surface, default_format="csv")

    p = sub.add_parser("axioms", help="randomized verification of the axioms")
    p.add_argument("--trials", type=_positive_int, default=1000)
    p.add_argument("--tolerance", type=float, default=1e-9)
    p.add_argument("--seed", type=int, default=_DEFAULT_SEED)
    p.add_argument("--threads", type=_positive_int, default=1)
    _add_output(p)
    p.set_defaults(handler=_cmd_axioms, default_format="json")

    return parser


# ---------------------------------------------------------------------------
# emission helpers
# ---------------------------------------------------------------------------


def _resolve_format(args) -> str:
    return args.format or args.default_format


def _emit(args, text: str, render=None) -> int:
    if args.plot and not args.output:
        raise RiskError("--plot needs --output to know where the figure goes")
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
        if args.plot and render is not None:
            render(str(Path(args.output).with_suffix(".png")))
    else:
        sys.stdout.write(text)
    return 0


def _series_from_args(args):
    """Input series plus (labels, seed-or-None) for header bookkeeping."""
    scenario = getattr(args, "scenario", None)
    if getattr(args, "input", None) and scenario:
        raise RiskError("--input and --scenario are mutually exclusive; pass one")
    if scenario:
        spec = scenario_params(scenario)
        series = simulate_path(spec.params, args.n, args.burn_in, args.seed)
        return series, None, args.seed
    if not getattr(args, "input", None):
        raise RiskError("one of --input or --scenario is required")
    series, labels = _io.read_series_labeled(args.input, args.kind)
    return series, labels, None


# ---------------------------------------------------------------------------
# subcommand handlers
# ---------------------------------------------------------------------------


def _cmd_measure(args) -> int:
    series, _ = _io.read_series_labeled(args.input, args.kind)
    cfg = RiskConfig(alpha=args.alpha, beta=args.beta, p=args.p, mode=args.mode)
    report = sdr_hs(series, cfg)
    sign = -1.0 if args.signed else 1.0
    payload = {
        "n": len(series),
        "alpha": cfg.alpha,
        "beta": cfg.beta,
        "p": cfg.p,
        "mode": cfg.mode,
        "signed": args.signed,
        "var": sign * report.var,
        "es": sign * report.es,
        "sd": sign * report.sd,
        "sdr": sign * report.sdr,
        "q_alpha": report.q_alpha,
        "e_alpha": report.e_alpha,
        "tail_count": report.tail_count,
        "degenerate_tail": report.degenerate_tail,
    }
    if _resolve_format(args) == "json":
        text = _io.json_text(payload)
    else:
        text = _io.csv_text(list(payload), [list(payload.values())])
    return _emit(args, text,
                 render=lambda p: plotting.plot_report(series, report, p, args.signed))


def _cmd_roll(args) -> int:
    series, labels = _io.read_series_labeled(args.input, args.kind)
    cfg = RiskConfig(alpha=args.alpha, beta=args.beta, p=args.p, mode=args.mode)
    result = rolling_measures(series, args.window, cfg)
    sign = -1.0 if args.signed else 1.0
    index = [labels[t] if labels else int(t) for t in result.index]
    header = ["index", "var", "es", "sd", "sdr"]
    rows = [
        [index[i], sign * result.var[i], sign * result.es[i],
         sign * result.sd[i], sign * result.sdr[i]]
        for i in range(result.index.size)
    ]
    preamble = {
        "window": result.window, "alpha": cfg.alpha, "beta": cfg.beta,
        "p": cfg.p, "mode": cfg.mode, "signed": args.signed,
    }
    if _resolve_format(args) == "json":
        text = _io.json_text({**preamble, "rows": [dict(zip(header, r)) for r in rows]})
    else:
        text = _io.csv_text(header, rows, preamble)
    return _emit(args, text,
                 render=lambda p: plotting.plot_rolling(result, p, args.signed))


def _cmd_simulate(args) -> int:
    spec = scenario_params(args.scenario)
    series = simulate_path(spec.params, args.n, args.burn_in, args.seed)
    preamble = {
        "seed": args.seed, "scenario": args.scenario,
        "n": args.n, "burn_in": args.burn_in,
    }
    if _resolve_format(args) == "json":
        text = _io.json_text({**preamble, "values": series.values})
    else:
        text = _io.csv_text(["return"], [[v] for v in series.values], preamble)
    return _emit(args, text,
                 render=lambda p: plotting.plot_path(series, p, title=args.scenario))


def _cmd_replicate(args) -> int:
    spec = ReplicationSpec(
        scenario=args.scenario, replicates=args.replicates, n=args.n,
        alphas=args.alphas, beta=args.beta, p=args.p, mode=args.mode,
        seed=args.seed, burn_in=args.burn_in,
    )
    table = run_replication(spec, threads=args.threads)
    preamble = {
        "seed": spec.seed, "scenario": spec.scenario, "replicates": spec.replicates,
        "n": spec.n, "beta": spec.beta, "p": spec.p, "mode": spec.mode,
        "burn_in": spec.burn_in,
    }
    header = ["alpha", "measure", "mean", "st_dev", "ratio", "pearson"]
    rows = [[r.alpha, r.measure, r.mean, r.st_dev, r.ratio, r.pearson] for r in table.rows]
    if _resolve_format(args) == "json":
        text = _io.json_text({**preamble, "rows": [dict(zip(header, r)) for r in rows]})
    else:
        text = _io.csv_text(header, rows, preamble)
    return _emit(args, text, render=lambda p: plotting.plot_summary(table, p))


def _cmd_curves(args) -> int:
    series, _, seed = _series_from_args(args)
    table = measure_curves(series, args.alphas, args.beta, args.p)
    sign = -1.0 if args.signed else 1.0
    preamble = {"beta": table.beta, "p": table.p, "signed": args.signed}
    if seed is not None:
        preamble = {"seed": seed, "scenario": args.scenario, "n": args.n, **preamble}
    header = ["alpha", "var", "es", "sd", "sdr"]
    rows = [
        [table.alphas[i], sign * table.var[i], sign * table.es[i],
         sign * table.sd[i], sign * table.sdr[i]]
        for i in range(table.alphas.size)
    ]
    if _resolve_format(args) == "json":
        text = _io.json_text({**preamble, "rows": [dict(zip(header, r)) for r in rows]})
    else:
        text = _io.csv_text(header, rows, preamble)
    return _emit(args, text,
                 render=lambda p: plotting.plot_curves(table, p, args.signed))


def _cmd_surface(args) -> int:
    series, _, seed = _series_from_args(args)
    grid = alpha_beta_surface(series, args.alphas, args.betas, args.p)
    preamble = {"p": grid.p}
    if seed is not None:
        preamble = {"seed": seed, "scenario": args.scenario, "n": args.n, **preamble}
    header = ["alpha", "beta", "sdr"]
    rows = [
        [grid.alphas[i], grid.betas[j], grid.sdr[i, j]]
        for i in range(grid.alphas.size)
        for j in range(grid.betas.size)
    ]
    if _resolve_format(args) == "json":
        text = _io.json_text({
            **preamble,
            "alphas": grid.alphas, "betas": grid.betas, "sdr": grid.sdr,
        })
    else:
        text = _io.csv_text(header, rows, preamble)
    return _emit(args, text, render=lambda p: plotting.plot_surface(grid, p))


def _cmd_axioms(args) -> int:
    config = CheckConfig(tolerance=args.tolerance, trials=args.trials, seed=args.seed)
    coherence = check_coherence(config, threads=args.threads)
    deviation = check_deviation(config, threads=args.threads)
    failed = coherence.failed() or deviation.failed()
    payload = {
        "seed": args.seed,
        "trials": args.trials,
        "tolerance": args.tolerance,
        "coherence": coherence.as_dict(),
        "deviation": deviation.as_dict(),
        "failed": failed,
    }
    if _resolve_format(args) == "json":
        text = _io.json_text(payload)
    else:
        header = ["suite", "name", "trials", "failures", "skipped",
                  "max_violation", "tolerance", "advisory"]
        rows = [
            [suite, e.name, e.trials, e.failures, e.skipped,
             e.max_violation, e.tolerance, e.advisory]
            for suite, rep in (("coherence", coherence), ("deviation", deviation))
            for e in rep.entries
        ]
        text = _io.csv_text(header, rows, {"seed": args.seed, "trials": args.trials,
                                           "tolerance": args.tolerance})
    status = _emit(args, text)
    return 2 if failed else status


# ---------------------------------------------------------------------------
# entry points
# ---------------------------------------------------------------------------


def parse_and_dispatch(argv) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    try:
        return args.handler(args)
    except RiskError as exc:
        message = " ".join(str(exc).split())
        print(f"error: {message}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(parse_and_dispatch(sys.argv[1:]))
