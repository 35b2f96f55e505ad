"""
Date-indexed series containers and descriptive statistics.

Dates are ``numpy.datetime64[D]`` arrays; values are float arrays. All
functions are pure and return new objects.

Conventions
-----------
- Variances use the ``n - 1`` denominator; skewness and excess kurtosis use
  the biased moment ratios ``m3 / m2**1.5`` and ``m4 / m2**2 - 3``.
- Rolling windows are trailing: the value is stamped on the window's last date.
- Cross-correlation lag ``k`` pairs ``x[t + k]`` with ``y[t]``, so a negative
  lag means ``x`` leads ``y``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DegenerateDistributionError,
    InsufficientDataError,
    InvalidArgumentError,
    UndefinedCorrelationError,
)
from .numerics import normal_ppf, sf

ACF_BAND_Z = 1.96
MAX_GRID_POINTS = 65_536
KDE_BLOCK = 4_000_000  # grid points x observations evaluated per block


def _as_dates(dates) -> np.ndarray:
    d = np.asarray(dates)
    if d.dtype.kind in "OUS" or d.dtype.kind == "M":
        d = d.astype("datetime64[D]")
    else:
        raise InvalidArgumentError("dates must be calendar dates")
    return d


@dataclass(frozen=True, eq=False)
class TimeSeries:
    """Daily series with strictly increasing dates.

    ``undefined`` marks entries that are deliberately undefined (for example a
    rolling correlation over a constant window). Those entries hold NaN; any
    other non-finite value is rejected.
    """

    dates: np.ndarray
    values: np.ndarray
    undefined: np.ndarray | None = field(default=None)

    def __post_init__(self):
        dates = _as_dates(self.dates)
        values = np.asarray(self.values, dtype=float)
        if dates.ndim != 1 or values.ndim != 1 or dates.shape != values.shape:
            raise InvalidArgumentError("dates and values must be 1-D and equally long")
        if values.size < 1:
            raise InsufficientDataError("series must have at least one observation")
        if dates.size > 1 and not np.all(np.diff(dates) > np.timedelta64(0, "D")):
            raise InvalidArgumentError("dates must be strictly increasing")
        if self.undefined is None:
            undefined = None
            if not np.all(np.isfinite(values)):
                raise InvalidArgumentError("values must be finite")
        else:
            undefined = np.asarray(self.undefined, dtype=bool)
            if undefined.shape != values.shape:
                raise InvalidArgumentError("undefined mask has the wrong shape")
            if not np.all(np.isfinite(values[~undefined])):
                raise InvalidArgumentError("values must be finite where defined")
            values = np.where(undefined, np.nan, values)
            if not undefined.any():
                undefined = None
        dates.flags.writeable = False
        values.flags.writeable = False
        object.__setattr__(self, "dates", dates)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "undefined", undefined)

    def __len__(self) -> int:
        return self.values.size

    @property
    def has_undefined(self) -> bool:
        return self.undefined is not None

    def window(self, start=None, stop=None) -> "TimeSeries":
        """Sub-series with ``start <= date < stop``."""
        mask = np.ones(len(self), dtype=bool)
        if start is not None:
            mask &= self.dates >= np.datetime64(start, "D")
        if stop is not None:
            mask &= self.dates < np.datetime64(stop, "D")
        und = None if self.undefined is None else self.undefined[mask]
        return TimeSeries(self.dates[mask], self.values[mask], und)


@dataclass(frozen=True, eq=False)
class BivariateSeries:
    """Aligned peg (USD) and reserve-index observations."""

    dates: np.ndarray
    peg: np.ndarray
    green: np.ndarray

    def __post_init__(self):
        peg = TimeSeries(self.dates, self.peg)
        green = TimeSeries(self.dates, self.green)
        if len(peg) < 2:
            raise InsufficientDataError("a bivariate series needs at least two observations")
        object.__setattr__(self, "dates", peg.dates)
        object.__setattr__(self, "peg", peg.values)
        object.__setattr__(self, "green", green.values)

    @classmethod
    def from_series(cls, peg: TimeSeries, green: TimeSeries) -> "BivariateSeries":
        if peg.dates.shape != green.dates.shape or np.any(peg.dates != green.dates):
            raise InvalidArgumentError("peg and green series are not aligned")
        return cls(peg.dates, peg.values, green.values)

    def __len__(self) -> int:
        return self.peg.size

    @property
    def levels(self) -> np.ndarray:
        """``(n, 2)`` array with columns (peg, green)."""
        return np.column_stack([self.peg, self.green])

    def peg_series(self) -> TimeSeries:
        return TimeSeries(self.dates, self.peg)

    def green_series(self) -> TimeSeries:
        return TimeSeries(self.dates, self.green)

    def slice(self, start: int, stop: int) -> "BivariateSeries":
        return BivariateSeries(self.dates[start:stop], self.peg[start:stop], self.green[start:stop])


@dataclass(frozen=True)
class DescriptiveStats:
    mean: float
    variance: float
    skewness: float
    excess_kurtosis: float
    n: int


def difference(series: TimeSeries, order: int = 1) -> TimeSeries:
    n = len(series)
    if order < 1:
        raise InvalidArgumentError("order must be positive")
    if order >= n:
        raise InvalidArgumentError(f"order {order} must be below the series length {n}")
    return TimeSeries(series.dates[order:], np.diff(series.values, n=order))


def _trailing_windows(values: np.ndarray, window: int) -> np.ndarray:
    return np.lib.stride_tricks.sliding_window_view(values, window)


def rolling_correlation(pair: BivariateSeries, window: int) -> TimeSeries:
    """Pearson correlation over each trailing window of ``window`` days.

    Windows where either series is constant yield an entry flagged in
    ``undefined`` rather than a number.
    """
    n = len(pair)
    if window < 3:
        raise InvalidArgumentError("window must be at least 3")
    if window > n:
        raise InvalidArgumentError(f"window {window} exceeds series length {n}")
    x = _trailing_windows(pair.peg, window)
    y = _trailing_windows(pair.green, window)
    xc = x - x.mean(axis=1, keepdims=True)
    yc = y - y.mean(axis=1, keepdims=True)
    # Rescale each window so tiny or huge magnitudes cannot under/overflow the sums.
    with np.errstate(invalid="ignore", divide="ignore"):
        xc = xc / np.abs(xc).max(axis=1, keepdims=True)
        yc = yc / np.abs(yc).max(axis=1, keepdims=True)
    sxx = np.einsum("ij,ij->i", xc, xc)
    syy = np.einsum("ij,ij->i", yc, yc)
    sxy = np.einsum("ij,ij->i", xc, yc)
    # Constant windows: exact zero spread (checked on raw values, not sums of squares).
    undefined = (np.ptp(x, axis=1) == 0.0) | (np.ptp(y, axis=1) == 0.0)
    with np.errstate(invalid="ignore", divide="ignore"):
        r = sxy / np.sqrt(sxx * syy)
    r = np.clip(r, -1.0, 1.0)
    return TimeSeries(pair.dates[window - 1:], r, undefined)


def rolling_volatility(series: TimeSeries, window: int) -> TimeSeries:
    """Trailing-window sample standard deviation (``n - 1`` denominator)."""
    n = len(series)
    if window < 2:
        raise InvalidArgumentError("window must be at least 2")
    if window > n:
        raise InvalidArgumentError(f"window {window} exceeds series length {n}")
    w = _trailing_windows(series.values, window)
    sd = np.sqrt(np.maximum(w.var(axis=1, ddof=1), 0.0))
    return TimeSeries(series.dates[window - 1:], sd)


def _centered(values: np.ndarray) -> tuple[np.ndarray, float]:
    xc = values - values.mean()
    ss = float(xc @ xc)
    if ss == 0.0 or np.ptp(values) == 0.0:
        raise UndefinedCorrelationError("series is constant")
    return xc, ss


def _autocorrelations(values: np.ndarray, max_lag: int) -> np.ndarray:
    xc, ss = _centered(values)
    out = np.empty(max_lag + 1)
    out[0] = 1.0
    for k in range(1, max_lag + 1):
        out[k] = float(xc[k:] @ xc[:-k]) / ss
    return out


@dataclass(frozen=True)
class Correlogram:
    lags: np.ndarray
    correlations: np.ndarray
    band: float  # half-width of the 95% white-noise band


def acf(series: TimeSeries, max_lag: int) -> Correlogram:
    n = len(series)
    if max_lag < 1:
        raise InvalidArgumentError("max_lag must be positive")
    if max_lag >= n / 2:
        raise InvalidArgumentError("max_lag must be below half the series length")
    rho = _autocorrelations(series.values, max_lag)
    return Correlogram(np.arange(max_lag + 1), rho, ACF_BAND_Z / np.sqrt(n))


def ccf(x: TimeSeries, y: TimeSeries, max_lag: int) -> Correlogram:
    """Cross-correlation for lags ``-max_lag..max_lag``.

    Entry at lag ``k`` is ``corr(x[t + k], y[t])``; a peak at a negative lag
    means movements in ``x`` precede movements in ``y``.
    """
    n = len(x)
    if len(y) != n:
        raise InvalidArgumentError("series must have equal length")
    if max_lag < 1 or max_lag >= n / 2:
        raise InvalidArgumentError("max_lag must be positive and below half the series length")
    xc, sxx = _centered(x.values)
    yc, syy = _centered(y.values)
    denom = np.sqrt(sxx * syy)
    lags = np.arange(-max_lag, max_lag + 1)
    out = np.empty(lags.size)
    for i, k in enumerate(lags):
        if k >= 0:
            out[i] = float(xc[k:] @ yc[: n - k]) / denom
        else:
            out[i] = float(xc[: n + k] @ yc[-k:]) / denom
    return Correlogram(lags, np.clip(out, -1.0, 1.0), ACF_BAND_Z / np.sqrt(n))


@dataclass(frozen=True)
class LjungBox:
    q: float
    p_value: float
    lags: int
    df: int


def ljung_box(series: TimeSeries, lags: int, fitted_params: int = 0) -> LjungBox:
    n = len(series)
    df = lags - fitted_params
    if df <= 0:
        raise InvalidArgumentError("lags must exceed the number of fitted parameters")
    if lags >= n / 2:
        raise InvalidArgumentError("lags must be below half the series length")
    rho = _autocorrelations(series.values, lags)[1:]
    k = np.arange(1, lags + 1)
    q = float(n * (n + 2) * np.sum(rho**2 / (n - k)))
    return LjungBox(q=q, p_value=sf("chi_square", q, df), lags=lags, df=df)


def silverman_bandwidth(values: np.ndarray) -> float:
    """``0.9 * min(sd, IQR / 1.34) * n**-0.2``; falls back to ``sd`` when the IQR is zero."""
    n = values.size
    # Work on range-scaled values so the variance cannot underflow.
    scale = float(np.ptp(values))
    if scale == 0.0:
        return 0.0
    z = (values - values.min()) / scale
    sd = float(np.std(z, ddof=1))
    q75, q25 = np.percentile(z, [75, 25])
    spread = min(sd, (q75 - q25) / 1.34)
    if spread <= 0.0:
        spread = sd
    return 0.9 * spread * scale * n ** (-0.2)


@dataclass(frozen=True)
class Density:
    x: np.ndarray
    density: np.ndarray
    bandwidth: float


def kernel_density(series: TimeSeries, grid_points: int = 512) -> Density:
    """Gaussian kernel density on ``[min - 3h, max + 3h]`` with Silverman's bandwidth.

    ``grid_points`` is a minimum. The grid is refined until its step is at
    most ``h / 2`` (capped at ``MAX_GRID_POINTS``) and the estimate is divided
    by its trapezoidal integral, so the curve integrates to 1 on its own grid
    even when a few outliers stretch the range far beyond the bandwidth.
    """
    v = series.values
    if v.size < 10:
        raise InsufficientDataError("kernel density needs at least 10 observations")
    if grid_points < 16:
        raise InvalidArgumentError("grid_points must be at least 16")
    if np.ptp(v) == 0.0:
        raise DegenerateDistributionError("series is constant")
    h = silverman_bandwidth(v)
    lo, hi = v.min() - 3 * h, v.max() + 3 * h
    points = int(min(MAX_GRID_POINTS, max(grid_points, np.ceil(2 * (hi - lo) / h) + 1)))
    grid = np.linspace(lo, hi, points)
    dens = np.zeros(points)
    norm = 1.0 / (v.size * h * np.sqrt(2 * np.pi))
    chunk_size = max(1, KDE_BLOCK // points)
    with np.errstate(over="ignore"):
        for start in range(0, v.size, chunk_size):
            z = (grid[:, None] - v[None, start:start + chunk_size]) / h
            dens += np.exp(-0.5 * z * z).sum(axis=1)
    dens *= norm
    area = float(np.sum((dens[1:] + dens[:-1]) * np.diff(grid)) / 2)
    return Density(grid, dens / area, h)


@dataclass(frozen=True)
class QQ:
    theoretical: np.ndarray
    empirical: np.ndarray
    location: float
    scale: float


def _interp_at_position(sorted_values: np.ndarray, p: float) -> float:
    # Plotting positions are (i - 0.5) / n; invert to a fractional index.
    n = sorted_values.size
    idx = p * n - 0.5
    return float(np.interp(idx, np.arange(n), sorted_values))


def qq_normal(series: TimeSeries) -> QQ:
    """Normal Q-Q pairs with plotting positions ``(i - 0.5) / n``.

    The sorted values are standardized by the line through the quartile
    points of the Q-Q plot, so the body of a normal sample sits on the 45
    degree line and tail departures show up as deviations from it.
    """
    v = series.values
    n = v.size
    if n < 10:
        raise InsufficientDataError("Q-Q needs at least 10 observations")
    if np.ptp(v) == 0.0:
        raise DegenerateDistributionError("series has zero variance")
    xs = np.sort(v)
    theo = normal_ppf((np.arange(1, n + 1) - 0.5) / n)
    x25, x75 = _interp_at_position(xs, 0.25), _interp_at_position(xs, 0.75)
    q25, q75 = _interp_at_position(theo, 0.25), _interp_at_position(theo, 0.75)
    scale = (x75 - x25) / (q75 - q25)
    if scale <= 0.0:
        # Flat middle half: fall back to moment standardization.
        scale = float(np.std(v, ddof=1))
        loc = float(v.mean())
    else:
        loc = x25 - scale * q25
    return QQ(theo, (xs - loc) / scale, loc, scale)


def descriptive_stats(series: TimeSeries) -> DescriptiveStats:
    v = series.values
    n = v.size
    if n < 4:
        raise InsufficientDataError("descriptive statistics need at least 4 observations")
    mean = float(v.mean())
    xc = v - mean
    m2 = float(np.mean(xc**2))
    if m2 == 0.0:
        skew, kurt = 0.0, 0.0
    else:
        skew = float(np.mean(xc**3)) / m2**1.5
        kurt = float(np.mean(xc**4)) / m2**2 - 3.0
    return DescriptiveStats(mean=mean, variance=m2 * n / (n - 1), skewness=skew, excess_kurtosis=kurt, n=n)


def flag_anomalies(series: TimeSeries, reference: TimeSeries, threshold_sd: float = 3.0) -> np.ndarray:
    """Boolean mask of ``series`` values more than ``threshold_sd`` sample SDs from the reference mean.

    The reference window is the caller's choice.
    """
    ref = reference.values
    if ref.size < 2:
        raise InsufficientDataError("reference window needs at least two observations")
    sd = float(np.std(ref, ddof=1))
    if sd == 0.0:
        raise DegenerateDistributionError("reference window is constant")
    return np.abs(series.values - ref.mean()) > threshold_sd * sd
