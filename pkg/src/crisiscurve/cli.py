"""Command-line interface.

Subcommands: ``fit-covid`` (logistic curve fit + forecast from a case
CSV), ``fit-crisis`` (crisis-indicator regression over price CSVs), and
``diagnostics`` (recompute R-hat/ESS from a draw CSV and check them
against a stored report).

Exit codes: 0 success, 1 input/runtime error, 2 convergence soft-failure
(some R-hat > 1.05; artifacts are still written). Runtime errors print a
single-line JSON object on stderr.
"""

from __future__ import annotations

import argparse
import datetime as dt
import json
import sys
from pathlib import Path

from . import analytics, ingest, models, svgplot
from .diagnostics import compute_diagnostics
from .errors import CrisisCurveError, InputError
from .fit import fit_crisis, fit_logistic_series
from .report import dumps_json, write_json, write_text
from .sampler import ChainConfig, Kernel, PosteriorSamples

RHAT_SOFT_LIMIT = 1.05
_FORMATS = ("json", "csv", "svg")


def _add_shared_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, required=True, help="64-bit sampling seed (required)")
    p.add_argument("--chains", type=int, default=4)
    p.add_argument("--warmup", type=int, default=1000)
    p.add_argument("--draws", type=int, default=1000)
    p.add_argument("--kernel", choices=[k.value for k in Kernel], default="metropolis")
    p.add_argument("--target-accept", type=float, default=None)
    p.add_argument("--leapfrog-steps", type=int, default=20)
    p.add_argument("--step-size", type=float, default=0.1)
    p.add_argument("--out", type=Path, required=True, help="output directory")
    p.add_argument("--format", default="json,csv,svg",
                   help="comma-separated subset of json,csv,svg")
    p.add_argument("--prior", action="append", default=[], metavar="NAME=SPEC",
                   help="prior override, e.g. beta=half_normal:0.5 (repeatable)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="crisiscurve",
                                     description="Bayesian epidemic-curve and crisis-impact fits")
    sub = parser.add_subparsers(dest="command", required=True)

    covid = sub.add_parser("fit-covid", help="fit the logistic spread model to a case CSV")
    covid.add_argument("--cases", type=Path, required=True, help="wide-format case CSV")
    covid.add_argument("--region", required=True)
    covid.add_argument("--horizon-days", type=int, default=28)
    covid.add_argument("--band", choices=[k.value for k in analytics.ForecastKind],
                       default="mean_curve")
    _add_shared_flags(covid)

    crisis = sub.add_parser("fit-crisis", help="fit crisis impact weights to price CSVs")
    crisis.add_argument("--prices", type=Path, nargs="+", required=True,
                        help="(date, close) CSV per ticker")
    crisis.add_argument("--windows", type=Path, default=None,
                        help="CSV name,start,end; defaults to the built-in three windows")
    crisis.add_argument("--likelihood", choices=[l.value for l in models.Likelihood],
                        default="normal")
    crisis.add_argument("--returns", choices=["simple", "log"], default="simple")
    crisis.add_argument("--top-k", type=int, default=5)
    _add_shared_flags(crisis)

    diag = sub.add_parser("diagnostics", help="recompute diagnostics from a draw CSV")
    diag.add_argument("--draws-csv", type=Path, required=True)
    diag.add_argument("--report", type=Path, default=None,
                      help="stored diagnostics JSON to verify against (1e-10 tolerance)")
    return parser


def _chain_config(args) -> ChainConfig:
    return ChainConfig(
        seed=args.seed,
        n_chains=args.chains,
        n_warmup=args.warmup,
        n_draws=args.draws,
        kernel=Kernel(args.kernel),
        target_accept=args.target_accept,
        hmc_leapfrog_steps=args.leapfrog_steps,
        initial_step_size=args.step_size,
    )


def _formats(args) -> set[str]:
    parts = {p.strip() for p in args.format.split(",") if p.strip()}
    bad = parts - set(_FORMATS)
    if bad:
        raise InputError(f"unknown output formats {sorted(bad)}; choose from {_FORMATS}")
    if not parts:
        raise InputError("--format must select at least one of json,csv,svg")
    return parts


def _prior_overrides(args, defaults: dict, allowed: tuple[str, ...]) -> dict:
    priors = dict(defaults)
    for item in args.prior:
        if "=" not in item:
            raise InputError(f"bad --prior {item!r}; expected NAME=SPEC")
        name, spec = item.split("=", 1)
        name = name.strip()
        if name not in allowed:
            raise InputError(f"unknown prior name {name!r}; choose from {allowed}")
        priors[name] = models.parse_prior(spec)
    return priors


def _exit_code_from_rhat(diag) -> int:
    worst = diag.worst_rhat()
    return 2 if worst is not None and worst > RHAT_SOFT_LIMIT else 0


def _cmd_fit_covid(args) -> int:
    formats = _formats(args)
    out: Path = args.out
    out.mkdir(parents=True, exist_ok=True)
    series = ingest.load_case_csv(args.cases, args.region)
    t = ingest.to_week_axis(series.dates, series.date0)
    defaults = models.default_logistic_priors(t, series.cumulative)
    priors = _prior_overrides(args, defaults, models.LOGISTIC_PARAM_NAMES)
    config = _chain_config(args)

    result = fit_logistic_series(series, config, priors)
    horizon = [series.date0 + dt.timedelta(days=i)
               for i in range((series.dates[-1] - series.date0).days + args.horizon_days + 1)]
    summary = analytics.forecast(result.samples, series.date0, horizon,
                                 kind=analytics.ForecastKind(args.band))
    peak = analytics.estimate_peak(result.samples, series.date0)
    boxes = {name: analytics.box_stats(result.samples, name).to_json_dict()
             for name in result.samples.param_names}

    if "csv" in formats:
        write_text(out / "draws.csv", result.samples.to_csv())
        write_text(out / "forecast.csv", summary.to_csv())
    if "json" in formats:
        write_json(out / "diagnostics.json", result.diagnostics.to_json_dict())
        write_json(out / "params_box.json", boxes)
        write_json(out / "forecast.json", summary.to_json_dict())
        write_json(out / "peak.json", peak.to_json_dict())
    if "svg" in formats:
        chart = svgplot.fit_chart(f"Cumulative cases: {series.region}",
                                  series.dates, series.cumulative, summary)
        write_text(out / "fit.svg", chart)
    return _exit_code_from_rhat(result.diagnostics)


def _cmd_fit_crisis(args) -> int:
    formats = _formats(args)
    out: Path = args.out
    out.mkdir(parents=True, exist_ok=True)
    if args.windows is not None:
        windows = ingest.load_crisis_windows_csv(args.windows)
    else:
        windows = ingest.DEFAULT_CRISIS_WINDOWS
    defaults = models.default_crisis_priors()
    priors = _prior_overrides(args, defaults, models.CRISIS_PRIOR_NAMES)
    config = _chain_config(args)
    likelihood = models.Likelihood(args.likelihood)

    medians: dict[str, dict[str, float]] = {}
    all_stats: dict[tuple[str, str], analytics.BoxStats | None] = {}
    tickers: list[str] = []
    exit_code = 0
    for path in args.prices:
        prices = ingest.load_price_csv(path, ticker=path.stem)
        returns = ingest.daily_returns(prices, method=args.returns)
        result = fit_crisis(returns, windows, config, likelihood, priors)
        ticker = prices.ticker
        tickers.append(ticker)
        if not result.covered_windows:
            print(f"warning: {ticker}: no trading dates inside any crisis window; "
                  f"all weights unidentified", file=sys.stderr)

        window_boxes: dict[str, object] = {}
        ticker_medians: dict[str, float] = {}
        for name in (w.name for w in windows):
            if name in result.covered_windows:
                box = analytics.box_stats(result.samples, f"w_{name}")
                window_boxes[name] = box.to_json_dict()
                ticker_medians[name] = box.median
                all_stats[(ticker, name)] = box
            else:
                window_boxes[name] = "unidentified"
                all_stats[(ticker, name)] = None
        medians[ticker] = ticker_medians

        if "csv" in formats:
            write_text(out / f"{ticker}_draws.csv", result.samples.to_csv())
        if "json" in formats:
            write_json(out / f"{ticker}_ols.json", {
                "coefficients": result.ols_coefficients,
                "rss": result.ols.rss,
                "n_obs": len(returns.returns),
            })
            write_json(out / f"{ticker}_weights_box.json",
                       {"ticker": ticker, "windows": window_boxes})
            write_json(out / f"{ticker}_diagnostics.json", result.diagnostics.to_json_dict())
        exit_code = max(exit_code, _exit_code_from_rhat(result.diagnostics))

    if "json" in formats:
        rankings = {}
        for w in windows:
            if not any(w.name in m for m in medians.values()):
                continue
            rankings[w.name] = {
                direction.value: [
                    {"ticker": tk, "median_weight": wt}
                    for tk, wt in analytics.rank_tickers(medians, w.name, direction, args.top_k)
                ]
                for direction in analytics.RankDirection
            }
        write_json(out / "rankings.json", rankings)
    if "svg" in formats:
        chart = svgplot.grouped_box_chart("Crisis impact weights by ticker",
                                          tickers, [w.name for w in windows], all_stats)
        write_text(out / "crisis_box.svg", chart)
    return exit_code


def _diag_values_match(stored, recomputed, tol: float = 1e-10) -> bool:
    if set(stored) != set(recomputed):
        return False
    for key, expected in recomputed.items():
        got = stored[key]
        if isinstance(expected, str) or isinstance(got, str):
            if got != expected:
                return False
        elif abs(got - expected) > tol:
            return False
    return True


def _cmd_diagnostics(args) -> int:
    samples = PosteriorSamples.from_csv(args.draws_csv.read_text(encoding="utf-8"))
    diag = compute_diagnostics(samples)
    recomputed = {"rhat": diag.rhat, "ess": diag.ess}
    print(dumps_json({k: dict(v) for k, v in recomputed.items()}), end="")
    if args.report is not None:
        stored = json.loads(args.report.read_text(encoding="utf-8"))
        for key in ("rhat", "ess"):
            if key not in stored:
                raise InputError(f"stored report lacks {key!r}")
            if not _diag_values_match(stored[key], recomputed[key]):
                raise InputError(
                    f"stored {key} does not match recomputation "
                    f"(stored {stored[key]}, recomputed {recomputed[key]})"
                )
        print("stored diagnostics verified", file=sys.stderr)
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {
        "fit-covid": _cmd_fit_covid,
        "fit-crisis": _cmd_fit_crisis,
        "diagnostics": _cmd_diagnostics,
    }
    try:
        return handlers[args.command](args)
    except (CrisisCurveError, OSError) as exc:
        print(json.dumps({"error": str(exc), "kind": type(exc).__name__}), file=sys.stderr)
        return 1


def run() -> None:
    sys.exit(main())
