"""Command line: ``pegrisk <command> [options]``.

Exit codes: 0 on success, 1 on data or model errors, 2 on usage errors.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import __version__
from .errors import PegRiskError
from .io import read_csv, read_json, to_json, write_csv, write_json
from .pipeline import (
    IRF_HORIZON,
    Settings,
    deviations,
    fit_garch_pair,
    johansen_dict,
    report_dict,
    run_analysis,
    vecm_dict,
    write_plotdata,
    write_report,
)
from .simulator import Scenario, builtin_names, builtin_scenario, load_scenario, simulate
from .tailrisk import tail_report
from .vecm import fevd, fit_vecm, forecast, irf

COMMANDS = ("simulate", "fit", "irf", "fevd", "forecast", "tail", "diagnose", "report")


def meta_path(data_path) -> Path:
    p = Path(data_path)
    return p.with_name(p.name + ".meta.json")


def _scenario(arg: str) -> Scenario:
    if arg in builtin_names():
        return builtin_scenario(arg)
    try:
        text = Path(arg).read_text(encoding="utf-8")
    except OSError:
        raise PegRiskError(f"{arg!r} is neither a built-in scenario ({', '.join(builtin_names())}) nor a readable file") from None
    return load_scenario(text)


def _provenance(data_path) -> dict:
    """Scenario and seed recorded next to simulated data, if any."""
    meta = meta_path(data_path)
    if not meta.exists():
        return {}
    doc = read_json(meta)
    return {k: doc[k] for k in ("scenario", "scenario_version", "data_seed") if k in doc}


def _settings(args, default_horizon: int = 10) -> Settings:
    return Settings(
        lag_order=args.lags,
        horizon=args.horizon if args.horizon is not None else default_horizon,
        confidence=args.confidence,
        threshold=args.threshold,
        paths=args.paths,
        seed=args.seed,
        break_date=args.break_date,
    )


def cmd_simulate(args) -> dict | None:
    if args.scenario is None:
        raise PegRiskError("simulate needs --scenario")
    scenario = _scenario(args.scenario)
    seed = scenario.seed if args.seed is None else args.seed
    pair, _ = simulate(scenario, seed)
    write_csv(pair, args.out)
    write_json(
        {
            "scenario": scenario.name,
            "scenario_version": scenario.version,
            "data_seed": seed,
            "tool_version": __version__,
            "scenario_definition": scenario.to_dict(),
        },
        meta_path(args.out),
    )
    return None


def cmd_fit(args) -> dict:
    model = fit_vecm(read_csv(args.input), args.lags)
    return {"johansen": johansen_dict(model.johansen), "vecm": vecm_dict(model)}


def cmd_irf(args) -> dict:
    model = fit_vecm(read_csv(args.input), args.lags)
    r = irf(model, args.horizon or IRF_HORIZON)
    return {
        "horizons": [int(h) for h in r.horizons],
        "response": [float(v) for v in r.response],
        "cumulative_impact": r.cumulative_impact,
        "half_life_days": r.half_life_days,
        "half_life_status": r.half_life_status,
    }


def cmd_fevd(args) -> dict:
    model = fit_vecm(read_csv(args.input), args.lags)
    f = fevd(model, args.horizon or 10)
    return {
        "horizons": [int(h) for h in f.horizons],
        "share_green": [float(v) for v in f.share_green],
        "share_own": [float(v) for v in f.share_own],
    }


def cmd_forecast(args) -> dict:
    s = _settings(args)
    s.validate()
    model = fit_vecm(read_csv(args.input), s.lag_order)
    g_peg, g_green = fit_garch_pair(model)
    fan = forecast(model, g_peg, g_green, s.horizon, s.paths, thresholds=(s.threshold,), seed=s.seed)
    return {
        "dates": [str(d) for d in fan.dates],
        "point": [float(v) for v in fan.point],
        "quantiles": [float(q) for q in fan.quantiles],
        "quantile_bands": [[float(v) for v in row] for row in fan.quantile_bands],
        "threshold": s.threshold,
        "prob_below": [float(v) for v in fan.prob_below[0]],
        "seed": s.seed,
    }


def cmd_tail(args) -> dict:
    t = tail_report(deviations(read_csv(args.input)), args.confidence)
    return {
        "confidence": t.confidence,
        "var_empirical": t.var_empirical,
        "tvar_empirical": t.tvar_empirical,
        "var_gaussian": t.var_gaussian,
        "tail_ratio": t.tail_ratio,
        "gpd_shape": t.gpd_shape,
        "gpd_scale": t.gpd_scale,
    }


def cmd_diagnose(args) -> dict:
    rep = run_analysis(read_csv(args.input), _settings(args), source=Path(args.input).name)
    return report_dict(rep)["diagnostics"]


def cmd_report(args) -> None:
    rep = run_analysis(read_csv(args.input), _settings(args), source=Path(args.input).name, provenance=_provenance(args.input))
    write_report(rep, args.out)
    if args.plots is not None:
        write_plotdata(rep, args.plots)


HANDLERS = {
    "simulate": cmd_simulate,
    "fit": cmd_fit,
    "irf": cmd_irf,
    "fevd": cmd_fevd,
    "forecast": cmd_forecast,
    "tail": cmd_tail,
    "diagnose": cmd_diagnose,
    "report": cmd_report,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pegrisk", description="Stablecoin peg risk analysis.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    def add(name, help_text, needs_input=True, out_required=False):
        p = sub.add_parser(name, help=help_text)
        if needs_input:
            p.add_argument("--in", dest="input", required=True, help="input CSV with header date,peg,green")
        p.add_argument("--out", required=out_required, help="output path (JSON results go to stdout if omitted)")
        p.add_argument("--seed", type=int, default=None if name == "simulate" else 0)
        p.add_argument("--lags", type=int, default=2, help="VAR lag order in levels (default 2)")
        p.add_argument("--horizon", type=int, default=None, help="days ahead (default 10; 60 for irf)")
        p.add_argument("--confidence", type=float, default=0.99, help="tail confidence level")
        p.add_argument("--threshold", type=float, default=0.995, help="forecast price threshold in USD")
        p.add_argument("--paths", type=int, default=5000, help="Monte-Carlo paths for the forecast")
        p.add_argument("--break-date", default=None, help="variance-break date YYYY-MM-DD (default: estimated)")
        p.add_argument("--plots", default=None, help="directory for plot CSVs")
        p.add_argument("--scenario", default=None, help=f"built-in name ({', '.join(builtin_names())}) or JSON file")
        return p

    add("simulate", "generate a synthetic series from a scenario", needs_input=False, out_required=True)
    add("fit", "Johansen test and VECM estimates")
    add("irf", "impulse response of the peg to a negative green shock")
    add("fevd", "forecast error variance decomposition of the peg")
    add("forecast", "Monte-Carlo forecast fan")
    add("tail", "VaR, TVaR and GPD tail metrics")
    add("diagnose", "Ljung-Box, Granger and variance-break tests")
    add("report", "run the full analysis", out_required=True)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        result = HANDLERS[args.command](args)
        if result is not None:
            if args.out:
                write_json(result, args.out)
            else:
                sys.stdout.write(to_json(result))
    except PegRiskError as exc:
        print(f"pegrisk: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
