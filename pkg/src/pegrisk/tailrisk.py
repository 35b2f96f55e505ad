"""
Tail metrics on peg deviations.

Losses are ``-(peg - 1)``, i.e. de-pegs are positive, so the fat left tail of
the peg becomes the right tail of the loss sample. The generalized Pareto fit
over the exceedances uses probability-weighted moments (Hosking & Wallis).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateDistributionError, InsufficientDataError, InvalidArgumentError
from .numerics import normal_ppf, sf
from .series import TimeSeries

MIN_OBS = 250
MIN_EXCEEDANCES = 30
DEFAULT_THRESHOLD_QUANTILE = 0.90


@dataclass(frozen=True)
class GpdFit:
    shape: float  # xi
    scale: float
    threshold: float
    exceedances: int
    nobs: int

    def exceedance_probability(self, level: float) -> float:
        """Unconditional probability that a loss exceeds ``level`` (``level >= threshold``)."""
        if level < self.threshold:
            raise InvalidArgumentError("level must be at or above the GPD threshold")
        rate = self.exceedances / self.nobs
        y = (level - self.threshold) / self.scale
        if abs(self.shape) < 1e-12:
            return rate * float(np.exp(-y))
        base = 1.0 + self.shape * y
        if base <= 0.0:
            return 0.0
        return rate * float(base ** (-1.0 / self.shape))


@dataclass(frozen=True)
class TailReport:
    confidence: float
    var_empirical: float
    tvar_empirical: float
    var_gaussian: float
    tail_ratio: float | None  # None when the Gaussian VaR is not positive
    loss_mean: float
    loss_sd: float
    threshold_quantile: float
    threshold: float
    exceedance_count: int
    gpd: GpdFit | None  # None when fewer than MIN_EXCEEDANCES exceedances

    @property
    def gpd_shape(self):
        return None if self.gpd is None else self.gpd.shape

    @property
    def gpd_scale(self):
        return None if self.gpd is None else self.gpd.scale


def fit_gpd_pwm(excesses: np.ndarray) -> tuple[float, float]:
    """Shape and scale of a GPD from excesses over a threshold."""
    y = np.sort(np.asarray(excesses, dtype=float))
    n = y.size
    if n < 2:
        raise InsufficientDataError("need at least two excesses")
    a0 = float(y.mean())
    weights = (n - np.arange(1, n + 1)) / (n - 1)
    a1 = float(np.mean(weights * y))
    denom = a0 - 2.0 * a1
    if not denom > 0.0:
        raise DegenerateDistributionError("excesses are degenerate")
    shape = 2.0 - a0 / denom
    scale = 2.0 * a0 * a1 / denom
    return shape, scale


def losses_from_deviations(deviations: TimeSeries) -> np.ndarray:
    return -deviations.values


def tail_report(
    deviations: TimeSeries,
    confidence: float = 0.99,
    threshold_quantile: float = DEFAULT_THRESHOLD_QUANTILE,
) -> TailReport:
    """VaR, TVaR, Gaussian VaR and a peaks-over-threshold GPD fit.

    ``deviations`` are ``peg - 1``.
    """
    if not 0.9 < confidence < 0.9999:
        raise InvalidArgumentError("confidence must lie in (0.9, 0.9999)")
    if not 0.0 < threshold_quantile < 1.0:
        raise InvalidArgumentError("threshold_quantile must lie in (0, 1)")
    loss = losses_from_deviations(deviations)
    n = loss.size
    if n < MIN_OBS:
        raise InsufficientDataError(f"tail report needs at least {MIN_OBS} observations, got {n}")
    if np.ptp(loss) == 0.0:
        raise DegenerateDistributionError("deviation sample is constant")

    var_emp = float(np.quantile(loss, confidence))
    beyond = loss[loss > var_emp]
    tvar_emp = float(beyond.mean()) if beyond.size else var_emp
    mu = float(loss.mean())
    sd = float(loss.std(ddof=1))
    var_gauss = mu + float(normal_ppf(confidence)) * sd
    ratio = tvar_emp / var_gauss if var_gauss > 0.0 else None

    u = float(np.quantile(loss, threshold_quantile))
    excess = loss[loss > u] - u
    gpd = None
    if excess.size >= MIN_EXCEEDANCES:
        try:
            shape, scale = fit_gpd_pwm(excess)
            gpd = GpdFit(shape, scale, u, int(excess.size), n)
        except DegenerateDistributionError:
            gpd = None
    return TailReport(
        confidence=confidence,
        var_empirical=var_emp,
        tvar_empirical=tvar_emp,
        var_gaussian=var_gauss,
        tail_ratio=ratio,
        loss_mean=mu,
        loss_sd=sd,
        threshold_quantile=threshold_quantile,
        threshold=u,
        exceedance_count=int(excess.size),
        gpd=gpd,
    )


def gaussian_tail_probability(sample_mean: float, sample_sd: float, threshold: float) -> float:
    """``P(X > threshold)`` for ``X ~ N(sample_mean, sample_sd**2)``."""
    if not sample_sd > 0.0:
        raise InvalidArgumentError("sample_sd must be positive")
    return sf("normal", (threshold - sample_mean) / sample_sd)
