"""
Rank-one vector error-correction model for (peg, green).

    dy[t] = alpha * (beta' y[t-1] + c) + sum_i Gamma_i dy[t-i] + eps[t]

with ``beta = [1, -gamma]`` and the constant ``c`` restricted to the
cointegrating relation. Impulse responses and variance decompositions use a
Cholesky factor of the residual covariance with the green index ordered
first, so a green shock may move the peg on impact but not the reverse.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    InsufficientDataError,
    InvalidArgumentError,
    NoCointegrationError,
)
from .garch import GarchModel, forecast_variance
from .johansen import DEFAULT_LAG_ORDER, JohansenResult, johansen_test, min_length
from .numerics import cholesky, ols, sf
from .series import BivariateSeries, TimeSeries

PEG, GREEN = 0, 1
# Shock ordering for orthogonalization: green first, then peg.
ORDERING = (GREEN, PEG)
UNSTABLE_RADIUS = 1.0 + 1e-8
MIN_BREAK_SEGMENT = 30
BREAK_TRIM = 0.15


@dataclass(frozen=True, eq=False)
class VecmModel:
    alpha: np.ndarray
    beta: np.ndarray
    long_run_constant: float
    gamma_matrices: np.ndarray  # (p - 1, 2, 2)
    residual_covariance: np.ndarray
    residuals: BivariateSeries
    lag_order: int
    alpha_se: np.ndarray | None = None
    gamma_matrices_se: np.ndarray | None = None
    cointegration_slope_se: float | None = None
    data: BivariateSeries | None = field(default=None, repr=False)
    johansen: JohansenResult | None = field(default=None, repr=False)
    beta_fixed: bool = False

    @property
    def gamma(self) -> float:
        """Cointegrating slope: ``peg - gamma * green`` is stationary."""
        return float(-self.beta[1])

    @property
    def stable(self) -> bool:
        return abs(1.0 + self.alpha[PEG]) < 1.0

    @property
    def pi(self) -> np.ndarray:
        return np.outer(self.alpha, self.beta)

    def var_coefficients(self) -> list[np.ndarray]:
        """Levels-VAR matrices ``A_1..A_p`` implied by the error-correction form."""
        p = self.lag_order
        g = self.gamma_matrices
        eye = np.eye(2)
        if p == 1:
            return [eye + self.pi]
        mats = [eye + self.pi + g[0]]
        for i in range(1, p - 1):
            mats.append(g[i] - g[i - 1])
        mats.append(-g[p - 2])
        return mats

    def companion(self) -> np.ndarray:
        mats = self.var_coefficients()
        p = len(mats)
        comp = np.zeros((2 * p, 2 * p))
        comp[:2, :] = np.hstack(mats)
        if p > 1:
            comp[2:, :-2] = np.eye(2 * (p - 1))
        return comp

    def spectral_radius(self) -> float:
        return float(np.max(np.abs(np.linalg.eigvals(self.companion()))))

    def impact_matrix(self) -> np.ndarray:
        """Orthogonalized impact ``B`` with ``B B' = Sigma``; columns are (green shock, peg shock)."""
        order = list(ORDERING)
        lower = cholesky(self.residual_covariance[np.ix_(order, order)])
        b = np.zeros((2, 2))
        b[order, :] = lower
        return b


def _ect_design(levels, beta, const, lag_order):
    dy = np.diff(levels, axis=0)
    n = levels.shape[0]
    ect = levels[lag_order - 1:n - 1] @ beta + const
    lags = [dy[lag_order - 1 - i:n - 1 - i] for i in range(1, lag_order)]
    x = np.column_stack([ect] + lags)
    return x, dy[lag_order - 1:]


def fit_vecm(
    pair: BivariateSeries,
    lag_order: int = DEFAULT_LAG_ORDER,
    rank: int = 1,
    beta_input=None,
    long_run_constant: float | None = None,
    significance: int = 95,
) -> VecmModel:
    """Estimate the rank-one VECM.

    Without ``beta_input`` the cointegrating vector comes from the Johansen
    eigenproblem and a rank-0 verdict raises :class:`NoCointegrationError`.
    A supplied vector is normalized on the peg; its constant defaults to
    minus the sample mean of ``beta' y``.
    """
    if rank != 1:
        raise InvalidArgumentError("only rank-one systems are supported")
    if lag_order < 1:
        raise InvalidArgumentError("lag_order must be positive")
    n = len(pair)
    if n < min_length(lag_order):
        raise InsufficientDataError(f"VECM with lag order {lag_order} needs more than {10 * lag_order + 20} observations")
    levels = pair.levels
    jo = None
    slope_se = None
    if beta_input is None:
        jo = johansen_test(pair, lag_order, significance)
        if jo.selected_rank == 0:
            raise NoCointegrationError(
                "Johansen trace test finds no cointegration; supply beta_input to force a relation"
            )
        beta = jo.beta
        const = jo.long_run_constant if long_run_constant is None else float(long_run_constant)
    else:
        beta = np.asarray(beta_input, dtype=float)
        if beta.shape != (2,) or beta[0] == 0.0:
            raise InvalidArgumentError("beta_input must be a 2-vector with non-zero peg weight")
        beta = beta / beta[0]
        const = -float(np.mean(levels @ beta)) if long_run_constant is None else float(long_run_constant)

    x, y = _ect_design(levels, beta, const, lag_order)
    coef, resid = ols(x, y)
    t, k = x.shape
    sigma = np.cov(resid.T)
    xtx_inv = np.linalg.inv(x.T @ x)
    sigma_dof = resid.T @ resid / (t - k)
    se = np.sqrt(np.outer(np.diag(xtx_inv), np.diag(sigma_dof)))  # (k, 2)
    alpha = coef[0]
    gammas = np.array([coef[1 + 2 * i:3 + 2 * i].T for i in range(lag_order - 1)]).reshape(lag_order - 1, 2, 2)
    gammas_se = np.array([se[1 + 2 * i:3 + 2 * i].T for i in range(lag_order - 1)]).reshape(lag_order - 1, 2, 2)

    if jo is not None:
        # Var of the free part (green weight, constant) of the normalized vector.
        info_alpha = float(alpha @ np.linalg.solve(sigma_dof, alpha))
        s11 = jo.s11_free
        cov_free = np.linalg.inv(jo.nobs * s11) / info_alpha
        slope_se = float(np.sqrt(cov_free[0, 0]))

    resid_pair = BivariateSeries(pair.dates[lag_order:], resid[:, PEG], resid[:, GREEN])
    return VecmModel(
        alpha=alpha,
        beta=beta,
        long_run_constant=const,
        gamma_matrices=gammas,
        residual_covariance=sigma,
        residuals=resid_pair,
        lag_order=lag_order,
        alpha_se=se[0],
        gamma_matrices_se=gammas_se,
        cointegration_slope_se=slope_se,
        data=pair,
        johansen=jo,
        beta_fixed=beta_input is not None,
    )


def ma_coefficients(model: VecmModel, horizon: int) -> np.ndarray:
    """Wold coefficients ``Psi_0..Psi_H`` of the levels representation, shape ``(H + 1, 2, 2)``."""
    mats = model.var_coefficients()
    psi = np.zeros((horizon + 1, 2, 2))
    psi[0] = np.eye(2)
    for h in range(1, horizon + 1):
        acc = np.zeros((2, 2))
        for j, a in enumerate(mats[:h], start=1):
            acc += a @ psi[h - j]
        psi[h] = acc
    return psi


def orthogonalized_ma(model: VecmModel, horizon: int) -> np.ndarray:
    """``Theta_h = Psi_h B``; column 0 is the green shock, column 1 the peg shock."""
    return ma_coefficients(model, horizon) @ model.impact_matrix()


@dataclass(frozen=True)
class IrfResult:
    horizons: np.ndarray
    response: np.ndarray  # peg response to the green shock
    cumulative: np.ndarray  # prefix sums of response
    shock_size: float  # in green-shock standard deviations, signed
    converged: bool  # False when the companion matrix is explosive
    half_life_days: float | None = None
    half_life_status: str = "undefined"  # "recovered" | "not_recovered" | "undefined"

    @property
    def cumulative_impact(self) -> float:
        return float(self.cumulative[-1])


class UndefinedHalfLifeError(InvalidArgumentError):
    pass


def half_life(irf) -> float | None:
    """Days until ``|response|`` falls to half its impact value and stays there.

    Linear interpolation between the last day above the threshold and the
    next. Returns ``None`` when the response has not recovered by the end of
    the sampled horizon.
    """
    r = np.abs(np.asarray(irf.response if isinstance(irf, IrfResult) else irf, dtype=float))
    if r.size == 0 or r[0] == 0.0:
        raise UndefinedHalfLifeError("impact response is zero")
    target = 0.5 * r[0]
    above = np.nonzero(r > target)[0]
    last = int(above[-1])
    if last == r.size - 1:
        return None
    return last + (r[last] - target) / (r[last] - r[last + 1])


def irf(model: VecmModel, horizon_days: int, shock_sd: float = -1.0) -> IrfResult:
    """Peg response to a green shock of ``shock_sd`` standard deviations (negative by default)."""
    if horizon_days < 1:
        raise InvalidArgumentError("horizon must be at least one day")
    theta = orthogonalized_ma(model, horizon_days)
    response = shock_sd * theta[:, PEG, 0]
    cumulative = np.cumsum(response)
    converged = model.spectral_radius() <= UNSTABLE_RADIUS
    try:
        hl = half_life(response)
        status = "recovered" if hl is not None else "not_recovered"
    except UndefinedHalfLifeError:
        hl, status = None, "undefined"
    return IrfResult(
        horizons=np.arange(horizon_days + 1),
        response=response,
        cumulative=cumulative,
        shock_size=shock_sd,
        converged=converged,
        half_life_days=hl,
        half_life_status=status,
    )


@dataclass(frozen=True)
class FevdResult:
    horizons: np.ndarray  # 1..H
    share_green: np.ndarray
    share_own: np.ndarray
    converged: bool


def fevd(model: VecmModel, horizon_days: int) -> FevdResult:
    """Share of the peg's h-step forecast error variance due to each orthogonal shock."""
    if horizon_days < 1:
        raise InvalidArgumentError("horizon must be at least one day")
    theta = orthogonalized_ma(model, horizon_days - 1)
    contrib = np.cumsum(theta[:, PEG, :] ** 2, axis=0)  # (H, 2)
    total = contrib.sum(axis=1)
    share_green = contrib[:, 0] / total
    return FevdResult(
        horizons=np.arange(1, horizon_days + 1),
        share_green=share_green,
        share_own=contrib[:, 1] / total,
        converged=model.spectral_radius() <= UNSTABLE_RADIUS,
    )


@dataclass(frozen=True)
class GrangerResult:
    f_stat: float
    p_value: float
    df_num: int
    df_den: int
    direction: str


def granger_causality(pair: BivariateSeries, lag_order: int = DEFAULT_LAG_ORDER, direction: str = "green->peg") -> GrangerResult:
    """F-test that lags of the cause add nothing to the target's differenced equation."""
    if direction not in ("green->peg", "peg->green"):
        raise InvalidArgumentError("direction must be 'green->peg' or 'peg->green'")
    if lag_order < 1:
        raise InvalidArgumentError("lag_order must be positive")
    n = len(pair)
    if n < min_length(lag_order):
        raise InsufficientDataError(f"Granger test with {lag_order} lags needs more than {10 * lag_order + 20} observations")
    dy = np.diff(pair.levels, axis=0)
    target, cause = (PEG, GREEN) if direction == "green->peg" else (GREEN, PEG)
    m = dy.shape[0]
    y = dy[lag_order:, target]
    own = [dy[lag_order - i:m - i, target] for i in range(1, lag_order + 1)]
    other = [dy[lag_order - i:m - i, cause] for i in range(1, lag_order + 1)]
    const = np.ones(m - lag_order)
    x_r = np.column_stack([const] + own)
    x_u = np.column_stack([const] + own + other)
    _, e_r = ols(x_r, y)
    _, e_u = ols(x_u, y)
    rss_r = float(e_r[:, 0] @ e_r[:, 0])
    rss_u = float(e_u[:, 0] @ e_u[:, 0])
    df_den = y.size - x_u.shape[1]
    f = ((rss_r - rss_u) / lag_order) / (rss_u / df_den)
    f = max(f, 0.0)
    return GrangerResult(f, sf("f", f, lag_order, df_den), lag_order, df_den, direction)


@dataclass(frozen=True)
class VarianceBreak:
    f_stat: float
    p_value: float  # two-sided
    variance_ratio: float
    break_date: np.datetime64
    n_pre: int
    n_post: int


def variance_break_test(residuals: TimeSeries, break_date) -> VarianceBreak:
    """Two-sample F test of ``var(post) / var(pre)``; the break date opens the post segment."""
    bd = np.datetime64(break_date, "D")
    pre = residuals.values[residuals.dates < bd]
    post = residuals.values[residuals.dates >= bd]
    if pre.size < MIN_BREAK_SEGMENT or post.size < MIN_BREAK_SEGMENT:
        raise InsufficientDataError(
            f"break date leaves {pre.size} / {post.size} observations; need {MIN_BREAK_SEGMENT} on each side"
        )
    v_pre = float(np.var(pre, ddof=1))
    v_post = float(np.var(post, ddof=1))
    if v_pre == 0.0 or v_post == 0.0:
        raise InvalidArgumentError("a segment has zero variance")
    f = v_post / v_pre
    d1, d2 = post.size - 1, pre.size - 1
    p = min(1.0, 2.0 * min(sf("f", f, d1, d2), 1.0 - sf("f", f, d1, d2)))
    return VarianceBreak(f, p, f, bd, pre.size, post.size)


def find_break_date(residuals: TimeSeries, trim: float = BREAK_TRIM) -> np.datetime64:
    """Date maximizing the variance-break F statistic over the trimmed interior."""
    v = residuals.values
    n = v.size
    lo = max(int(np.ceil(trim * n)), MIN_BREAK_SEGMENT)
    hi = min(int(np.floor((1.0 - trim) * n)), n - MIN_BREAK_SEGMENT)
    if lo > hi:
        raise InsufficientDataError("series too short to search for a variance break")
    # Running sums give every split's segment variances in one pass.
    c1 = np.concatenate([[0.0], np.cumsum(v)])
    c2 = np.concatenate([[0.0], np.cumsum(v * v)])
    k = np.arange(lo, hi + 1)  # post segment starts at index k
    n_pre, n_post = k, n - k
    var_pre = (c2[k] - c1[k] ** 2 / n_pre) / (n_pre - 1)
    var_post = ((c2[n] - c2[k]) - (c1[n] - c1[k]) ** 2 / n_post) / (n_post - 1)
    with np.errstate(divide="ignore", invalid="ignore"):
        f = np.where(var_pre > 0, var_post / var_pre, -np.inf)
    return residuals.dates[int(k[int(np.argmax(f))])]


@dataclass(frozen=True)
class ForecastFan:
    horizons: np.ndarray  # 1..H
    dates: np.ndarray
    point: np.ndarray
    quantiles: np.ndarray
    quantile_bands: np.ndarray  # (len(quantiles), H)
    thresholds: np.ndarray
    prob_below: np.ndarray  # (len(thresholds), H)
    paths: int
    seed: int


def _path_normals(seed: int, paths: int, horizon: int) -> np.ndarray:
    children = np.random.SeedSequence(seed).spawn(paths)
    return np.stack([np.random.Generator(np.random.PCG64(c)).standard_normal((horizon, 2)) for c in children])


def forecast(
    model: VecmModel,
    peg_garch: GarchModel,
    green_garch: GarchModel,
    horizon_days: int = 10,
    paths: int = 5000,
    thresholds=(0.995,),
    quantiles=(0.05, 0.25, 0.5, 0.75, 0.95),
    seed: int = 0,
) -> ForecastFan:
    """Monte-Carlo fan for the peg from the fitted VECM with GARCH-scaled innovations.

    Each path draws from its own child of ``SeedSequence(seed)``, so the fan
    does not depend on evaluation order.
    """
    if model.data is None:
        raise InvalidArgumentError("model does not carry its estimation sample")
    if paths < 1000:
        raise InvalidArgumentError("at least 1000 paths are required")
    if horizon_days < 1:
        raise InvalidArgumentError("horizon must be at least one day")
    for g in (peg_garch, green_garch):
        if not g.omega > 0.0:
            raise InvalidArgumentError("degenerate GARCH model: omega must be positive")
    n_res = len(model.residuals)
    if len(peg_garch.residuals) != n_res or len(green_garch.residuals) != n_res:
        raise InvalidArgumentError("GARCH models were not fitted on this VECM's residuals")
    quantiles = np.sort(np.asarray(quantiles, dtype=float))
    thresholds = np.asarray(thresholds, dtype=float)

    z = np.column_stack([
        peg_garch.residuals.values / np.sqrt(peg_garch.conditional_variance.values),
        green_garch.residuals.values / np.sqrt(green_garch.conditional_variance.values),
    ])
    corr = np.corrcoef(z.T)
    chol = cholesky(corr)
    sd = np.sqrt(np.column_stack([
        forecast_variance(peg_garch, horizon_days),
        forecast_variance(green_garch, horizon_days),
    ]))  # (H, 2)
    shocks = _path_normals(seed, paths, horizon_days) @ chol.T * sd[None, :, :]

    p = model.lag_order
    hist = model.data.levels[-p:]
    level = np.repeat(hist[-1][None, :], paths, axis=0)
    diffs = [np.repeat(d[None, :], paths, axis=0) for d in np.diff(hist, axis=0)[::-1]]  # most recent first
    peg = np.empty((paths, horizon_days))
    for h in range(horizon_days):
        ect = level @ model.beta + model.long_run_constant
        step = ect[:, None] * model.alpha[None, :]
        for i in range(p - 1):
            step = step + diffs[i] @ model.gamma_matrices[i].T
        step = step + shocks[:, h, :]
        level = level + step
        if p > 1:
            diffs = [step] + diffs[:-1]
        peg[:, h] = level[:, PEG]

    base = peg[0]
    point = base + (peg - base).mean(axis=0)
    bands = np.quantile(peg, quantiles, axis=0)
    prob = (peg[None, :, :] < thresholds[:, None, None]).mean(axis=1)
    last = model.data.dates[-1]
    return ForecastFan(
        horizons=np.arange(1, horizon_days + 1),
        dates=last + np.arange(1, horizon_days + 1),
        point=point,
        quantiles=quantiles,
        quantile_bands=bands,
        thresholds=thresholds,
        prob_below=prob,
        paths=paths,
        seed=seed,
    )


def simulate_vecm(model: VecmModel, n: int, rng: np.random.Generator, initial=None) -> BivariateSeries:
    """Gaussian sample path of length ``n`` from a fitted model (parametric bootstrap)."""
    p = model.lag_order
    if initial is None:
        initial = model.data.levels[:p] if model.data is not None else np.zeros((p, 2))
    y = np.zeros((n, 2))
    y[:p] = initial
    shocks = rng.standard_normal((n, 2)) @ cholesky(model.residual_covariance).T
    for t in range(p, n):
        step = model.alpha * (y[t - 1] @ model.beta + model.long_run_constant)
        for i in range(1, p):
            step = step + model.gamma_matrices[i - 1] @ (y[t - i] - y[t - i - 1])
        y[t] = y[t - 1] + step + shocks[t]
    dates = np.datetime64("2000-01-01") + np.arange(n)
    return BivariateSeries(dates, y[:, PEG], y[:, GREEN])
