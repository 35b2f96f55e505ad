"""
The full analysis run behind the ``report`` command and its serialization.

Order: difference view, Johansen, VECM, GARCH on each demeaned residual
series, impulse response and half-life, FEVD, diagnostics, tail report,
forecast fan.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ConfigError
from .garch import GarchModel, conditional_volatility, fit_garch
from .io import atomic_write, csv_text, to_json
from .johansen import DEFAULT_LAG_ORDER, JohansenResult
from .series import (
    BivariateSeries,
    LjungBox,
    TimeSeries,
    acf,
    ccf,
    difference,
    kernel_density,
    ljung_box,
    qq_normal,
    rolling_correlation,
    rolling_volatility,
)
from .tailrisk import TailReport, tail_report
from .vecm import (
    FevdResult,
    ForecastFan,
    GrangerResult,
    IrfResult,
    VarianceBreak,
    VecmModel,
    fevd,
    find_break_date,
    fit_vecm,
    forecast,
    granger_causality,
    irf,
    variance_break_test,
)

IRF_HORIZON = 60
FORECAST_HORIZON = 10
CORRELATION_WINDOW = 60
VOLATILITY_WINDOW = 30
ACF_LAGS = 20
CCF_LAGS = 10
LJUNG_BOX_LAGS = 10
FORECAST_QUANTILES = (0.05, 0.25, 0.5, 0.75, 0.95)

PLOT_FILES = (
    "diffseries.csv",
    "rollcorr.csv",
    "eigen.csv",
    "residuals.csv",
    "irf.csv",
    "fevd.csv",
    "density.csv",
    "qq.csv",
    "condvol.csv",
    "acf.csv",
    "rollvol.csv",
    "ccf.csv",
    "forecast.csv",
)


@dataclass(frozen=True)
class Settings:
    lag_order: int = DEFAULT_LAG_ORDER
    horizon: int = FORECAST_HORIZON
    confidence: float = 0.99
    threshold: float = 0.995
    paths: int = 5000
    seed: int = 0
    break_date: str | None = None

    def validate(self) -> None:
        if self.lag_order < 1:
            raise ConfigError("--lags must be at least 1")
        if self.horizon < 1:
            raise ConfigError("--horizon must be at least 1")
        if self.paths < 1000:
            raise ConfigError("--paths must be at least 1000")
        if not 0.9 < self.confidence < 0.9999:
            raise ConfigError("--confidence must lie in (0.9, 0.9999)")
        if not math.isfinite(self.threshold) or self.threshold <= 0.0:
            raise ConfigError("--threshold must be a positive price")


@dataclass(frozen=True, eq=False)
class AnalysisReport:
    data: BivariateSeries
    source: str
    settings: Settings
    johansen: JohansenResult
    vecm: VecmModel
    garch_peg: GarchModel
    garch_green: GarchModel
    irf: IrfResult
    fevd: FevdResult
    tail: TailReport
    ljung_box: dict  # {"peg": LjungBox, "green": LjungBox}
    granger: dict  # {"green->peg": GrangerResult, "peg->green": GrangerResult}
    variance_break: VarianceBreak
    break_date_estimated: bool
    forecast: ForecastFan
    provenance: dict = field(default_factory=dict)


def _demeaned(series: TimeSeries) -> TimeSeries:
    return TimeSeries(series.dates, series.values - series.values.mean())


def residual_series(model: VecmModel) -> tuple[TimeSeries, TimeSeries]:
    r = model.residuals
    return TimeSeries(r.dates, r.peg), TimeSeries(r.dates, r.green)


def fit_garch_pair(model: VecmModel) -> tuple[GarchModel, GarchModel]:
    peg, green = residual_series(model)
    return fit_garch(_demeaned(peg)), fit_garch(_demeaned(green))


def deviations(pair: BivariateSeries) -> TimeSeries:
    return TimeSeries(pair.dates, pair.peg - 1.0)


def run_analysis(pair: BivariateSeries, settings: Settings, source: str = "", provenance: dict | None = None) -> AnalysisReport:
    settings.validate()
    model = fit_vecm(pair, settings.lag_order)
    g_peg, g_green = fit_garch_pair(model)
    response = irf(model, max(IRF_HORIZON, settings.horizon))
    decomposition = fevd(model, settings.horizon)

    peg_res, green_res = residual_series(model)
    lb = {
        "peg": ljung_box(peg_res, LJUNG_BOX_LAGS),
        "green": ljung_box(green_res, LJUNG_BOX_LAGS),
    }
    granger = {d: granger_causality(pair, settings.lag_order, d) for d in ("green->peg", "peg->green")}
    if settings.break_date is None:
        break_date, estimated = find_break_date(peg_res), True
    else:
        try:
            break_date = np.datetime64(settings.break_date, "D")
        except ValueError:
            raise ConfigError(f"--break-date {settings.break_date!r} is not YYYY-MM-DD") from None
        estimated = False
    vbreak = variance_break_test(peg_res, break_date)

    tail = tail_report(deviations(pair), settings.confidence)
    fan = forecast(
        model,
        g_peg,
        g_green,
        settings.horizon,
        settings.paths,
        thresholds=(settings.threshold,),
        quantiles=FORECAST_QUANTILES,
        seed=settings.seed,
    )
    prov = {"tool_version": __version__, "forecast_seed": settings.seed}
    prov.update(provenance or {})
    return AnalysisReport(
        data=pair,
        source=source,
        settings=settings,
        johansen=model.johansen,
        vecm=model,
        garch_peg=g_peg,
        garch_green=g_green,
        irf=response,
        fevd=decomposition,
        tail=tail,
        ljung_box=lb,
        granger=granger,
        variance_break=vbreak,
        break_date_estimated=estimated,
        forecast=fan,
        provenance=prov,
    )


# Serialization. Non-finite numbers never reach the JSON text: anything that
# can be undefined is written as null next to an explicit status field.


def _num(x):
    if x is None:
        return None
    x = float(x)
    return x if math.isfinite(x) else None


def _arr(a):
    return [_num(v) for v in np.asarray(a, dtype=float).ravel()] if np.ndim(a) <= 1 else [_arr(r) for r in a]


def johansen_dict(jo: JohansenResult) -> dict:
    return {
        "eigenvalues": _arr(jo.eigenvalues),
        "trace_stats": _arr(jo.trace_stats),
        "critical_values": {str(s): _arr(v) for s, v in sorted(jo.critical_values.items())},
        "selected_rank": jo.selected_rank,
        "significance": jo.significance,
        "nobs": jo.nobs,
    }


def vecm_dict(m: VecmModel) -> dict:
    return {
        "lag_order": m.lag_order,
        "alpha": _arr(m.alpha),
        "alpha_se": None if m.alpha_se is None else _arr(m.alpha_se),
        "beta": _arr(m.beta),
        "cointegration_slope": _num(m.gamma),
        "cointegration_slope_se": _num(m.cointegration_slope_se),
        "long_run_constant": _num(m.long_run_constant),
        "gamma_matrices": _arr(m.gamma_matrices),
        "gamma_matrices_se": None if m.gamma_matrices_se is None else _arr(m.gamma_matrices_se),
        "residual_covariance": _arr(m.residual_covariance),
        "stable": bool(m.stable),
        "spectral_radius": _num(m.spectral_radius()),
        "variable_order": ["peg", "green"],
    }


def garch_dict(g: GarchModel) -> dict:
    return {
        "omega": _num(g.omega),
        "a": _num(g.a),
        "b": _num(g.b),
        "persistence": _num(g.persistence),
        "unconditional_variance": _num(g.unconditional_variance),
        "at_persistence_ceiling": bool(g.at_ceiling),
        "log_likelihood": _num(g.log_likelihood),
        "null_log_likelihood": _num(g.null_log_likelihood),
        "converged": bool(g.converged),
        "constant_variance_kept": bool(g.restricted),
    }


def report_dict(rep: AnalysisReport) -> dict:
    d = rep.data
    s = rep.settings
    ir = rep.irf
    tl = rep.tail
    fan = rep.forecast
    return {
        "input_summary": {
            "n": len(d),
            "start": str(d.dates[0]),
            "end": str(d.dates[-1]),
            "source": rep.source,
        },
        "settings": {
            "lag_order": s.lag_order,
            "horizon": s.horizon,
            "confidence": s.confidence,
            "threshold": s.threshold,
            "paths": s.paths,
            "seed": s.seed,
            "break_date": s.break_date,
        },
        "johansen": johansen_dict(rep.johansen),
        "vecm": vecm_dict(rep.vecm),
        "garch_peg": garch_dict(rep.garch_peg),
        "garch_green": garch_dict(rep.garch_green),
        "irf": {
            "shock": "green, one standard deviation, negative",
            "horizons": [int(h) for h in ir.horizons],
            "response": _arr(ir.response),
            "cumulative_impact": _num(ir.cumulative_impact),
            "half_life_days": _num(ir.half_life_days),
            "half_life_status": ir.half_life_status,
            "converged": bool(ir.converged),
        },
        "fevd": {
            "horizons": [int(h) for h in rep.fevd.horizons],
            "share_green": _arr(rep.fevd.share_green),
            "share_own": _arr(rep.fevd.share_own),
            "converged": bool(rep.fevd.converged),
        },
        "tail": {
            "confidence": tl.confidence,
            "var_empirical": _num(tl.var_empirical),
            "tvar_empirical": _num(tl.tvar_empirical),
            "var_gaussian": _num(tl.var_gaussian),
            "tail_ratio": _num(tl.tail_ratio),
            "tail_ratio_status": "defined" if tl.tail_ratio is not None else "gaussian_var_not_positive",
            "loss_mean": _num(tl.loss_mean),
            "loss_sd": _num(tl.loss_sd),
            "threshold_quantile": tl.threshold_quantile,
            "threshold": _num(tl.threshold),
            "exceedance_count": tl.exceedance_count,
            "gpd_shape": _num(tl.gpd_shape),
            "gpd_scale": _num(tl.gpd_scale),
            "gpd_status": "fitted" if tl.gpd is not None else "too_few_exceedances",
        },
        "diagnostics": {
            "ljung_box": {k: _ljung_dict(v) for k, v in rep.ljung_box.items()},
            "granger": {k: _granger_dict(v) for k, v in rep.granger.items()},
            "variance_break": {
                "break_date": str(rep.variance_break.break_date),
                "break_date_source": "estimated" if rep.break_date_estimated else "supplied",
                "f_stat": _num(rep.variance_break.f_stat),
                "p_value": _num(rep.variance_break.p_value),
                "n_pre": rep.variance_break.n_pre,
                "n_post": rep.variance_break.n_post,
            },
        },
        "forecast": {
            "horizons": [int(h) for h in fan.horizons],
            "dates": [str(x) for x in fan.dates],
            "point": _arr(fan.point),
            "quantiles": _arr(fan.quantiles),
            "quantile_bands": _arr(fan.quantile_bands),
            "thresholds": _arr(fan.thresholds),
            "prob_below": _arr(fan.prob_below),
            "paths": fan.paths,
            "seed": fan.seed,
        },
        "provenance": rep.provenance,
    }


def _ljung_dict(lb: LjungBox) -> dict:
    return {"q": _num(lb.q), "p_value": _num(lb.p_value), "lags": lb.lags, "df": lb.df}


def _granger_dict(g: GrangerResult) -> dict:
    return {"f_stat": _num(g.f_stat), "p_value": _num(g.p_value), "df_num": g.df_num, "df_den": g.df_den}


def write_report(rep: AnalysisReport, path) -> None:
    atomic_write(path, to_json(report_dict(rep)))


def plot_tables(rep: AnalysisReport) -> dict:
    """Every plot CSV as ``{file name: text}``."""
    d = rep.data
    m = rep.vecm
    tables = {}

    dp = difference(d.peg_series())
    dg = difference(d.green_series())
    tables["diffseries.csv"] = csv_text(
        ("date", "peg", "green", "d_peg", "d_green"),
        ((str(t), p, g, a, b) for t, p, g, a, b in zip(d.dates[1:], d.peg[1:], d.green[1:], dp.values, dg.values)),
    )

    rc = rolling_correlation(d, CORRELATION_WINDOW)
    und = rc.undefined if rc.undefined is not None else np.zeros(len(rc), bool)
    tables["rollcorr.csv"] = csv_text(
        ("date", "correlation", "undefined"),
        ((str(t), "" if u else v, "1" if u else "0") for t, v, u in zip(rc.dates, rc.values, und)),
    )

    jo = rep.johansen
    tables["eigen.csv"] = csv_text(
        ("null_rank", "eigenvalue", "trace_stat", "cv90", "cv95", "cv99"),
        (
            (str(r), jo.eigenvalues[r], jo.trace_stats[r], jo.critical_values[90][r], jo.critical_values[95][r], jo.critical_values[99][r])
            for r in range(2)
        ),
    )

    res = m.residuals
    tables["residuals.csv"] = csv_text(
        ("date", "peg", "green"), ((str(t), p, g) for t, p, g in zip(res.dates, res.peg, res.green))
    )

    ir = rep.irf
    tables["irf.csv"] = csv_text(
        ("horizon", "response", "cumulative"), ((str(h), r, c) for h, r, c in zip(ir.horizons, ir.response, ir.cumulative))
    )

    fv = rep.fevd
    tables["fevd.csv"] = csv_text(
        ("horizon", "share_green", "share_own"), ((str(h), g, o) for h, g, o in zip(fv.horizons, fv.share_green, fv.share_own))
    )

    dev = deviations(d)
    kde = kernel_density(dev)
    tables["density.csv"] = csv_text(("deviation", "density"), zip(kde.x, kde.density))

    qq = qq_normal(dev)
    tables["qq.csv"] = csv_text(("theoretical", "empirical"), zip(qq.theoretical, qq.empirical))

    vp = conditional_volatility(rep.garch_peg)
    vg = conditional_volatility(rep.garch_green)
    tables["condvol.csv"] = csv_text(
        ("date", "peg", "green"), ((str(t), a, b) for t, a, b in zip(vp.dates, vp.values, vg.values))
    )

    peg_res, green_res = residual_series(m)
    ap = acf(peg_res, ACF_LAGS)
    ag = acf(green_res, ACF_LAGS)
    tables["acf.csv"] = csv_text(
        ("lag", "peg", "green", "band"), ((str(k), a, b, ap.band) for k, a, b in zip(ap.lags, ap.correlations, ag.correlations))
    )

    rv = rolling_volatility(dp, VOLATILITY_WINDOW)
    rvg = rolling_volatility(dg, VOLATILITY_WINDOW)
    tables["rollvol.csv"] = csv_text(
        ("date", "peg", "green"), ((str(t), a, b) for t, a, b in zip(rv.dates, rv.values, rvg.values))
    )

    cc = ccf(dg, dp, CCF_LAGS)
    tables["ccf.csv"] = csv_text(("lag", "correlation", "band"), ((str(k), c, cc.band) for k, c in zip(cc.lags, cc.correlations)))

    fan = rep.forecast
    q_cols = tuple(f"q{q:g}" for q in fan.quantiles)
    t_cols = tuple(f"prob_below_{t:g}" for t in fan.thresholds)
    tables["forecast.csv"] = csv_text(
        ("horizon", "date", "point") + q_cols + t_cols,
        (
            (str(h), str(fan.dates[i]), fan.point[i], *fan.quantile_bands[:, i], *fan.prob_below[:, i])
            for i, h in enumerate(fan.horizons)
        ),
    )
    return tables


def write_plotdata(rep: AnalysisReport, directory) -> None:
    directory = Path(directory)
    try:
        directory.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ConfigError(f"cannot create plot directory {directory}: {exc.strerror or exc}") from exc
    for name, text in plot_tables(rep).items():
        atomic_write(directory / name, text)
