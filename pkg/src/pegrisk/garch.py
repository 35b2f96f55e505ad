"""
GARCH(1,1) conditional variance by Gaussian quasi-maximum likelihood.

    sigma2[t] = omega + a * eps[t-1]**2 + b * sigma2[t-1]

``sigma2[0]`` is the sample variance of the residuals. The optimizer works on
``(omega / var, a + b, a / (a + b))`` so the persistence ceiling is a plain
box bound.

When ``a`` is near zero the likelihood is almost flat in ``b``, so white
noise often yields a spurious near-integrated fit. The constant-variance
model is therefore kept unless the GARCH fit beats it by a likelihood-ratio
statistic above ``LR_CRITICAL`` (chi-square, 2 df, 95%).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import lfilter

from .errors import DegenerateDistributionError, InsufficientDataError, InvalidArgumentError
from .numerics import minimize
from .series import TimeSeries

PERSISTENCE_CEILING = 0.9999
MIN_OBS = 100
CENTERING_TOL_SD = 0.1
LR_CRITICAL = 5.991


@dataclass(frozen=True, eq=False)
class GarchModel:
    omega: float
    a: float
    b: float
    log_likelihood: float
    null_log_likelihood: float
    conditional_variance: TimeSeries
    residuals: TimeSeries
    converged: bool = True
    restricted: bool = False  # constant-variance model kept by the likelihood-ratio rule

    @property
    def persistence(self) -> float:
        return self.a + self.b

    @property
    def unconditional_variance(self) -> float | None:
        p = self.persistence
        return self.omega / (1.0 - p) if p < 1.0 else None

    @property
    def at_ceiling(self) -> bool:
        return self.persistence >= PERSISTENCE_CEILING - 1e-9


def variance_path(eps: np.ndarray, omega: float, a: float, b: float, sigma2_init: float) -> np.ndarray:
    """Conditional variance recursion over ``eps`` starting at ``sigma2_init``."""
    eps = np.asarray(eps, dtype=float)
    out = np.empty(eps.size)
    out[0] = sigma2_init
    if eps.size > 1:
        drive = omega + a * eps[:-1] ** 2
        out[1:], _ = lfilter([1.0], [1.0, -b], drive, zi=[b * sigma2_init])
    return out


def gaussian_loglik(eps: np.ndarray, sigma2: np.ndarray) -> float:
    """``-0.5 * sum(log sigma2 + eps**2 / sigma2)`` (constant term dropped)."""
    return float(-0.5 * np.sum(np.log(sigma2) + eps**2 / sigma2))


def _unpack(theta, var):
    scale, pers, share = theta
    return scale * var, pers * share, pers * (1.0 - share)


def fit_garch(residuals: TimeSeries) -> GarchModel:
    eps = residuals.values
    n = eps.size
    if n < MIN_OBS:
        raise InsufficientDataError(f"GARCH fit needs at least {MIN_OBS} observations, got {n}")
    var = float(np.var(eps, ddof=1))
    if not var > 0.0 or np.ptp(eps) == 0.0:
        raise DegenerateDistributionError("residuals are constant")
    if abs(eps.mean()) > CENTERING_TOL_SD * np.sqrt(var):
        raise InvalidArgumentError("residuals must be mean-centered")
    e2 = eps**2

    def objective(theta):
        omega, a, b = _unpack(theta, var)
        s2 = variance_path(eps, omega, a, b, var)
        if np.any(s2 <= 0.0):
            return np.inf
        return 0.5 * float(np.mean(np.log(s2) + e2 / s2))

    lower = [1e-6, 0.0, 0.0]
    upper = [2.0, PERSISTENCE_CEILING, 1.0]
    starts = ([1.0, 0.0, 0.5], [0.05, 0.95, 0.1], [0.2, 0.8, 0.25])
    best = None
    for start in starts:
        res = minimize(objective, start, lower, upper)
        if best is None or res.value < best.value:
            best = res
    omega, a, b = _unpack(best.argmin, var)
    s2 = variance_path(eps, omega, a, b, var)
    loglik = gaussian_loglik(eps, s2)
    null_loglik = gaussian_loglik(eps, np.full(n, var))
    restricted = 2.0 * (loglik - null_loglik) < LR_CRITICAL
    if restricted:
        omega, a, b = var, 0.0, 0.0
        s2 = np.full(n, var)
        loglik = null_loglik
    return GarchModel(
        omega=omega,
        a=a,
        b=b,
        log_likelihood=loglik,
        null_log_likelihood=null_loglik,
        conditional_variance=TimeSeries(residuals.dates, s2),
        residuals=residuals,
        converged=best.converged,
        restricted=restricted,
    )


def conditional_volatility(model: GarchModel) -> TimeSeries:
    return TimeSeries(model.conditional_variance.dates, np.sqrt(model.conditional_variance.values))


def next_variance(model: GarchModel) -> float:
    """One-step-ahead variance after the last residual."""
    eps_last = model.residuals.values[-1]
    s2_last = model.conditional_variance.values[-1]
    return model.omega + model.a * eps_last**2 + model.b * s2_last


def forecast_variance(model: GarchModel, horizon_days: int, sigma2_next: float | None = None) -> np.ndarray:
    """``sigma2[t + h]`` for ``h = 1..horizon_days``.

    ``sigma2_next`` overrides the one-step value implied by the fitted path.
    """
    if horizon_days < 1:
        raise InvalidArgumentError("horizon must be at least one day")
    s2 = next_variance(model) if sigma2_next is None else float(sigma2_next)
    p = model.persistence
    out = np.empty(horizon_days)
    out[0] = s2
    for h in range(1, horizon_days):
        out[h] = model.omega + p * out[h - 1]
    return out


def simulate_garch(n: int, omega: float, a: float, b: float, rng: np.random.Generator, burn: int = 500) -> np.ndarray:
    """GARCH(1,1) sample path with Gaussian innovations, started at the unconditional variance."""
    z = rng.standard_normal(n + burn)
    eps = np.empty(n + burn)
    s2 = omega / (1.0 - a - b)
    for t in range(n + burn):
        eps[t] = np.sqrt(s2) * z[t]
        s2 = omega + a * eps[t] ** 2 + b * s2
    return eps[burn:]
