"""Command-line interface.

Subcommands: single, sweep, parity, simulate, scenario, frontier, estimate.
Results print to stdout or, with --out, land in a CSV/JSON/text file written
atomically together with a .meta.json sidecar recording the full resolved
configuration, the seed, and the package version. All inputs and outputs are
fractions (0.02, never "2%"). Exit codes: 2 invalid parameters or config,
3 infeasible model or allocation, 4 I/O failure.
"""

from __future__ import annotations

import argparse
import configparser
import json
import math
import os
import sys
import tempfile

import numpy as np

from . import __version__
from .errors import (
    CalibrationInfeasible,
    DegenerateNormalization,
    DomainViolation,
    EmptyFileError,
    EstimationError,
    InfeasibleLeverage,
    InvalidJointModel,
    KellyTailsError,
    NewtonStall,
    NoInteriorMaximum,
    ReturnsParseError,
    SeriesTooShort,
    SingularCovariance,
    ValidationError,
)
from .model import (
    Alignment,
    GaussianCore,
    PortfolioSpec,
    TailSpec,
    build_discrete_model,
)
from .single import (
    arithmetic_growth,
    brown_scenarios,
    etl_sweep,
    kelly_fat_closed,
    kelly_fat_exact,
    kelly_simple,
    scenario_growth,
    tail_impact,
)
from .parity import (
    JointTwoAssetModel,
    joint_fat_allocation,
    kelly_allocation,
    max_sharpe_tangency,
    risk_parity_weights,
)
from .simulate import SimConfig, crossover_diagnostic, simulate_paths
from .frontier import frontier_curve, frontier_family

EXIT_INVALID = 2
EXIT_INFEASIBLE = 3
EXIT_IO = 4

_INFEASIBLE_ERRORS = (
    CalibrationInfeasible,
    DomainViolation,
    NoInteriorMaximum,
    SingularCovariance,
    DegenerateNormalization,
    InvalidJointModel,
    NewtonStall,
    InfeasibleLeverage,
    SeriesTooShort,
    EstimationError,
)


def _fmt(value, digits):
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        return f"{value:.{digits}g}"
    return str(value)


def _render_csv(headers, rows):
    lines = [",".join(headers)]
    for row in rows:
        lines.append(",".join(_fmt(v, 12) for v in row))
    return "\n".join(lines) + "\n"


def _render_text(headers, rows):
    widths = [
        max(len(h), max((len(_fmt(r[i], 6)) for r in rows), default=0))
        for i, h in enumerate(headers)
    ]
    out = ["  ".join(h.ljust(w) for h, w in zip(headers, widths))]
    for row in rows:
        out.append(
            "  ".join(_fmt(v, 6).ljust(w) for v, w in zip(row, widths))
        )
    return "\n".join(out) + "\n"


def _render_json(headers, rows):
    payload = [dict(zip(headers, row)) for row in rows]
    return json.dumps(payload, indent=2, default=float) + "\n"


def _atomic_write(path, content):
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(content)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emit(args, headers, rows, meta):
    renderers = {"csv": _render_csv, "text": _render_text, "json": _render_json}
    content = renderers[args.output](headers, rows)
    if args.out:
        _atomic_write(args.out, content)
        sidecar = {
            "command": args.command,
            "version": __version__,
            "seed": args.seed,
            "config": meta,
        }
        _atomic_write(
            args.out + ".meta.json",
            json.dumps(sidecar, indent=2, sort_keys=True) + "\n",
        )
    else:
        sys.stdout.write(content)


def _parse_vector(text):
    return [float(tok) for tok in text.replace(";", ",").split(",") if tok.strip()]


def _parse_matrix(text):
    rows = [r for r in text.split(";") if r.strip()]
    return [[float(tok) for tok in r.split(",") if tok.strip()] for r in rows]


def _tails_from(args, prefix=""):
    get = lambda name: getattr(args, prefix + name)
    return TailSpec(
        alpha=get("alpha"), etl=get("etl"), beta=get("beta"), etw=get("etw")
    )


def _require(args, *names):
    missing = [n for n in names if getattr(args, n.replace("-", "_")) is None]
    if missing:
        raise ValidationError(
            "missing required parameter(s): " + ", ".join("--" + n for n in missing)
        )


# --- command implementations -----------------------------------------------


def _run_single(args):
    _require(args, "mu", "sigma")
    core = GaussianCore(mu=args.mu, sigma=args.sigma)
    tails = _tails_from(args)
    simple = kelly_simple(core)
    closed = kelly_fat_closed(core, tails)
    model = build_discrete_model(core, tails)
    exact = kelly_fat_exact(model)
    arith = arithmetic_growth(core, tails)
    impact = tail_impact(core, tails) if core.mu > 0 else float("nan")
    headers = ["quantity", "value"]
    rows = [
        ["f0", simple.fraction],
        ["g0", simple.growth],
        ["f1_closed", closed.fraction],
        ["g1_closed", closed.growth],
        ["f1_exact", exact.fraction],
        ["g1_exact", exact.growth],
        ["tail_impact", impact],
        ["arithmetic_rate", arith["rate"]],
        ["log_drift_full_leverage", arith["log_drift_full_leverage"]],
        ["positive_edge", tails.positive_edge(core.mu)],
    ]
    return headers, rows, None


def _run_sweep(args):
    _require(args, "mu0", "sigma0", "alpha", "etl-max")
    grid = np.linspace(args.etl_min, args.etl_max, args.steps)
    rows = etl_sweep(args.mu0, args.sigma0, args.alpha, grid, mode=args.mode)
    headers = ["etl", "f_closed", "f_exact", "g_closed", "g_exact", "feasible"]
    table = [
        [r.etl, r.f_closed, r.f_exact, r.g_closed, r.g_exact, r.feasible]
        for r in rows
    ]

    def plot(path):
        from .plots import save_sweep_figure

        save_sweep_figure(rows, path)

    return headers, table, plot


def _run_parity(args):
    if args.alignment:
        m = JointTwoAssetModel(
            asset1=(
                GaussianCore(mu=args.mu1, sigma=args.sigma1),
                TailSpec(alpha=args.alpha1, etl=args.etl1,
                         beta=args.beta1, etw=args.etw1),
            ),
            asset2=(
                GaussianCore(mu=args.mu2, sigma=args.sigma2),
                TailSpec(alpha=args.alpha2, etl=args.etl2,
                         beta=args.beta2, etw=args.etw2),
            ),
            rho=args.rho,
            alignment=Alignment(args.alignment),
            joint_alpha=args.joint_alpha,
        )
        result = joint_fat_allocation(m)
        headers = ["asset", "fraction", "total_leverage", "growth_rate"]
        rows = [
            [i + 1, float(f), result.total_leverage, result.growth_rate]
            for i, f in enumerate(result.fractions)
        ]
        return headers, rows, None

    if args.premiums is None or args.covariance is None:
        raise ValidationError(
            "parity needs --premiums and --covariance (or --alignment for "
            "the joint two-asset mode)"
        )
    spec = PortfolioSpec(
        premiums=np.array(args.premiums),
        covariance=np.array(args.covariance),
    )
    result = kelly_allocation(spec)
    tangency = max_sharpe_tangency(spec)
    rp = risk_parity_weights(np.sqrt(np.diag(spec.covariance)))
    normalized = result.fractions / result.fractions.sum()
    headers = [
        "asset", "premium", "fraction", "normalized_fraction",
        "tangency_weight", "risk_parity_weight",
    ]
    rows = [
        [
            i + 1,
            float(spec.premiums[i]),
            float(result.fractions[i]),
            float(normalized[i]),
            float(tangency[i]),
            float(rp[i]),
        ]
        for i in range(spec.n_assets)
    ]
    meta = {
        "total_leverage": result.total_leverage,
        "growth_rate": result.growth_rate,
    }
    return headers, rows, None, meta


def _run_simulate(args):
    _require(args, "mu", "sigma", "leverage")
    core = GaussianCore(mu=args.mu, sigma=args.sigma)
    model = build_discrete_model(core, _tails_from(args))
    if args.report == "crossover":
        grid = [int(n) for n in _parse_vector(args.crossover_grid)]
        rows = crossover_diagnostic(
            model, args.leverage, grid, args.paths, args.seed,
            n_workers=args.workers,
        )
        headers = ["n_periods", "mean_terminal", "median_terminal", "gap"]
        table = [
            [r.n_periods, r.mean_terminal, r.median_terminal, r.gap]
            for r in rows
        ]

        def plot(path):
            from .plots import save_crossover_figure

            save_crossover_figure(rows, path)

        return headers, table, plot

    cfg = SimConfig(
        seed=args.seed, n_paths=args.paths, n_periods=args.periods,
        leverage=args.leverage, ruin_floor=args.ruin_floor,
    )
    stats = simulate_paths(model, cfg, n_workers=args.workers)
    headers = ["stat", "value"]
    rows = [
        ["n_paths", stats.n_paths],
        ["n_periods", stats.n_periods],
        ["mean_log_growth", stats.mean_log_growth],
        ["se_log_growth", stats.se_log_growth],
        ["median_terminal", stats.median_terminal],
        ["mean_terminal", stats.mean_terminal],
        ["ruin_fraction", stats.ruin_fraction],
    ]
    for q, dd in sorted(stats.max_drawdown_quantiles.items()):
        rows.append([f"drawdown_q{int(round(q * 100))}", dd])

    def plot(path):
        from .plots import save_drawdown_figure

        save_drawdown_figure(stats.max_drawdown_quantiles, path)

    return headers, rows, plot


def _run_scenario(args):
    _require(args, "bet")
    if args.preset:
        tallies = brown_scenarios(convention=args.convention)
    else:
        if not args.spec:
            raise ValidationError("scenario needs --preset or --spec")
        pairs = []
        for tok in args.spec.split(","):
            count, outcome = tok.split(":")
            pairs.append((int(count), float(outcome)))
        tallies = {"custom": tuple(pairs)}
    headers = ["scenario", "bets", "wealth_multiple", "growth_per_bet"]
    rows = []
    for name, tally in tallies.items():
        multiple, growth = scenario_growth(tally, args.bet)
        rows.append([name, sum(c for c, _ in tally), multiple, growth])
    return headers, rows, None


def _run_frontier(args):
    _require(args, "mu0", "sigma0")
    grid = np.linspace(args.lev_min, args.lev_max, args.steps)
    tails = _tails_from(args)
    if tails.empty:
        curves = {
            "base": frontier_curve(
                args.mu0, args.sigma0, None, args.drawdown, args.horizon,
                args.spread, grid, seed=args.seed,
            )
        }
    else:
        curves = frontier_family(
            args.mu0, args.sigma0, tails, args.drawdown, args.horizon,
            args.spread, grid, seed=args.seed,
        )
    headers = [
        "curve", "leverage", "volatility", "gross_return",
        "protection_cost", "financing_cost", "net_return", "feasible",
    ]
    rows = []
    for name, points in curves.items():
        for p in points:
            rows.append(
                [
                    name, p.leverage, p.volatility, p.gross_return,
                    p.protection_cost, p.financing_cost, p.net_return,
                    p.feasible,
                ]
            )

    def plot(path):
        from .plots import save_frontier_figure

        save_frontier_figure(curves, path)

    return headers, rows, plot


def _run_estimate(args):
    _require(args, "csv")
    from .estimate import estimate_params, read_returns_csv

    series = read_returns_csv(args.csv)
    core, tails, diag = estimate_params(series, tail_quantile=args.tail_quantile)
    headers = ["quantity", "value"]
    rows = [
        ["mu", core.mu],
        ["sigma", core.sigma],
        ["alpha", tails.alpha],
        ["etl", tails.etl],
        ["beta", tails.beta],
        ["etw", tails.etw],
        ["n_observations", diag["n_observations"]],
        ["left_threshold", diag["left_threshold"]],
        ["right_threshold", diag["right_threshold"]],
        ["interior_mean", diag["interior_mean"]],
        ["interior_std", diag["interior_std"]],
        ["positive_edge", diag["positive_edge"]],
        ["degenerate_tails", "|".join(diag["degenerate_tails"]) or "none"],
    ]
    return headers, rows, None


_RUNNERS = {
    "single": _run_single,
    "sweep": _run_sweep,
    "parity": _run_parity,
    "simulate": _run_simulate,
    "scenario": _run_scenario,
    "frontier": _run_frontier,
    "estimate": _run_estimate,
}


# --- argument plumbing ------------------------------------------------------


def _add_tail_options(parser):
    parser.add_argument("--alpha", type=float, default=0.0,
                        help="tail loss probability")
    parser.add_argument("--etl", type=float, default=0.0,
                        help="tail loss size (fraction of capital)")
    parser.add_argument("--beta", type=float, default=0.0,
                        help="tail win probability")
    parser.add_argument("--etw", type=float, default=0.0,
                        help="tail win size (fraction of capital)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kelly-tails",
        description="Growth-optimal leverage with fat tails.",
    )
    parser.add_argument("--config", help="INI config file with one section per command")
    parser.add_argument("--seed", type=int, default=0, help="master RNG seed")
    parser.add_argument("--output", choices=["csv", "json", "text"], default="text")
    parser.add_argument("--out", help="write the report to this path (atomic)")
    parser.add_argument("--plot", action="store_true",
                        help="also render a PNG figure next to --out")
    sub = parser.add_subparsers(dest="command", required=True)
    registry: dict[str, argparse.ArgumentParser] = {}
    parser.set_defaults(_subparser_registry=registry)

    p = registry["single"] = sub.add_parser("single", help="single-asset Kelly point")
    p.add_argument("--mu", type=float)
    p.add_argument("--sigma", type=float)
    _add_tail_options(p)

    p = registry["sweep"] = sub.add_parser("sweep", help="closed-form vs exact optimum over an ETL grid")
    p.add_argument("--mu0", type=float)
    p.add_argument("--sigma0", type=float)
    p.add_argument("--alpha", type=float)
    p.add_argument("--etl-min", type=float, default=0.0)
    p.add_argument("--etl-max", type=float)
    p.add_argument("--steps", type=int, default=41)
    p.add_argument("--mode", choices=["recalibrated", "fixed-center"],
                   default="recalibrated")

    p = registry["parity"] = sub.add_parser("parity", help="multi-asset Kelly allocation")
    p.add_argument("--premiums", type=_parse_vector,
                   help="comma-separated premium vector, e.g. '0.05,0.03'")
    p.add_argument("--covariance", type=_parse_matrix,
                   help="row-major matrix, rows split by ';', e.g. '0.04,0.006;0.006,0.01'")
    p.add_argument("--alignment", choices=[a.value for a in Alignment],
                   help="joint two-asset fat-tail mode")
    p.add_argument("--rho", type=float, default=0.0)
    p.add_argument("--joint-alpha", type=float, default=0.0)
    for i in ("1", "2"):  # per-asset parameters for the joint mode
        p.add_argument(f"--mu{i}", type=float, default=0.0)
        p.add_argument(f"--sigma{i}", type=float, default=1.0)
        p.add_argument(f"--alpha{i}", type=float, default=0.0)
        p.add_argument(f"--etl{i}", type=float, default=0.0)
        p.add_argument(f"--beta{i}", type=float, default=0.0)
        p.add_argument(f"--etw{i}", type=float, default=0.0)

    p = registry["simulate"] = sub.add_parser("simulate", help="seeded wealth-path Monte Carlo")
    p.add_argument("--mu", type=float)
    p.add_argument("--sigma", type=float)
    _add_tail_options(p)
    p.add_argument("--leverage", type=float)
    p.add_argument("--paths", type=int, default=1000)
    p.add_argument("--periods", type=int, default=1000)
    p.add_argument("--ruin-floor", type=float, default=0.01)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--report", choices=["stats", "crossover"], default="stats")
    p.add_argument("--crossover-grid", default="10,100,1000",
                   help="comma-separated horizon lengths for --report crossover")

    p = registry["scenario"] = sub.add_parser("scenario", help="deterministic bet-tally growth")
    p.add_argument("--preset", choices=["brown"])
    p.add_argument("--spec", help="custom tally 'count:outcome,...', e.g. '60:1,40:-1'")
    p.add_argument("--bet", type=float)
    p.add_argument("--convention", choices=["replace", "append"], default="replace")

    p = registry["frontier"] = sub.add_parser("frontier", help="drawdown-adjusted efficient frontier")
    p.add_argument("--mu0", type=float)
    p.add_argument("--sigma0", type=float)
    _add_tail_options(p)
    p.add_argument("--drawdown", type=float, default=0.10)
    p.add_argument("--horizon", type=int, default=1)
    p.add_argument("--spread", type=float, default=0.0)
    p.add_argument("--lev-min", type=float, default=0.25)
    p.add_argument("--lev-max", type=float, default=3.0)
    p.add_argument("--steps", type=int, default=12)

    p = registry["estimate"] = sub.add_parser("estimate", help="fit (core, tails) to a returns CSV")
    p.add_argument("--csv")
    p.add_argument("--tail-quantile", type=float, default=0.05)

    return parser


def _apply_config(parser, args, argv):
    """Fill arguments from the config section; CLI flags take precedence."""
    ini = configparser.ConfigParser()
    read = ini.read(args.config)
    if not read:
        raise ValidationError(f"config file {args.config} not found or empty")
    if not ini.has_section(args.command):
        return args
    # flags given explicitly on the command line keep priority
    given = {tok.split("=")[0].lstrip("-").replace("-", "_")
             for tok in argv if tok.startswith("--")}
    subparser = args._subparser_registry[args.command]
    known = {action.dest: action for action in subparser._actions}
    for key, raw in ini.items(args.command):
        dest = key.replace("-", "_")
        if dest not in known:
            raise ValidationError(
                f"unknown key '{key}' in config section [{args.command}]"
            )
        if dest in given:
            continue
        action = known[dest]
        caster = action.type or str
        try:
            value = raw if action.choices and caster is str else caster(raw)
        except (TypeError, ValueError) as exc:
            raise ValidationError(
                f"config key '{key}': cannot parse {raw!r}"
            ) from exc
        if action.choices and value not in action.choices:
            raise ValidationError(
                f"config key '{key}': {value!r} not in {sorted(action.choices)}"
            )
        setattr(args, dest, value)
    return args


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.config:
            args = _apply_config(parser, args, argv)
        if args.plot and not args.out:
            raise ValidationError("--plot requires --out")
        result = _RUNNERS[args.command](args)
        headers, rows, plot_fn = result[:3]
        skip = ("config", "out", "output", "plot", "_subparser_registry")
        meta = {
            k: v for k, v in vars(args).items()
            if k not in skip and v is not None
        }
        if len(result) > 3:
            meta.update(result[3])
        _emit(args, headers, rows, meta)
        if args.plot and plot_fn is not None:
            root, _ = os.path.splitext(args.out)
            plot_fn(root + ".png")
        return 0
    except ValidationError as exc:
        print(f"error[{exc.code}]: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (ReturnsParseError, EmptyFileError) as exc:
        print(f"error[{exc.code}]: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except _INFEASIBLE_ERRORS as exc:
        print(f"error[{exc.code}]: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except KellyTailsError as exc:
        print(f"error[{exc.code}]: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"error[IO]: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
