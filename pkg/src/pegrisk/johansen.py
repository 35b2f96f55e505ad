"""
Johansen trace test for a bivariate system.

The deterministic term is a constant restricted to the cointegrating
relation: the long-run relation is ``peg - gamma * green + c = 0`` and the
differenced equations carry no free drift. Critical values for that case
are generated by :func:`simulate_trace_critical_values` (see
``scripts/trace_critical_values.py``) and frozen in ``TRACE_CRITICAL_VALUES``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    InsufficientDataError,
    InvalidArgumentError,
    NotPositiveDefiniteError,
    RankDeficientError,
)
from .numerics import generalized_symmetric_eigen, ols
from .series import BivariateSeries

SIGNIFICANCE_LEVELS = (90, 95, 99)
DEFAULT_LAG_ORDER = 2

# Restricted-constant trace critical values keyed by (n - r) then significance.
# Output of scripts/trace_critical_values.py (T=1000, 100_000 replications, seed 20240101 + k).
TRACE_CRITICAL_VALUES = {
    1: {90: 7.556, 95: 9.171, 99: 12.790},
    2: {90: 17.943, 95: 20.204, 99: 25.097},
}


@dataclass(frozen=True)
class JohansenResult:
    eigenvalues: np.ndarray  # two, descending, in [0, 1)
    trace_stats: np.ndarray  # null rank 0 and 1
    critical_values: dict  # {significance: array over null rank}
    selected_rank: int
    significance: int
    beta: np.ndarray  # [1, -gamma]
    long_run_constant: float
    alpha: np.ndarray
    lag_order: int
    nobs: int
    eigenvector: np.ndarray  # raw (peg, green, const) vector, v' S11 v = 1
    s01: np.ndarray
    s11: np.ndarray

    @property
    def s11_free(self) -> np.ndarray:
        """Product moments of the (green, constant) regressors left free by the normalization."""
        return self.s11[1:, 1:]

    @property
    def gamma(self) -> float:
        return float(-self.beta[1])

    @property
    def pi(self) -> np.ndarray:
        """``alpha beta'`` over (peg, green, constant)."""
        return np.outer(self.alpha, np.append(self.beta, self.long_run_constant))


def trace_critical_values(null_rank: int, significance: int) -> float:
    if null_rank not in (0, 1):
        raise InvalidArgumentError("bivariate trace test supports null ranks 0 and 1")
    if significance not in SIGNIFICANCE_LEVELS:
        raise InvalidArgumentError(f"significance must be one of {SIGNIFICANCE_LEVELS}")
    return TRACE_CRITICAL_VALUES[2 - null_rank][significance]


def min_length(lag_order: int) -> int:
    return 10 * lag_order + 21


def _lagged_design(levels: np.ndarray, lag_order: int):
    """Return ``(dy_t, [y_{t-1}, 1], [dy_{t-1}..dy_{t-p+1}])`` row-aligned."""
    n, k = levels.shape
    dy = np.diff(levels, axis=0)  # dy[j] = y[j+1] - y[j]
    rows = n - lag_order
    z0 = dy[lag_order - 1:]
    z1 = np.column_stack([levels[lag_order - 1:n - 1], np.ones(rows)])
    lags = [dy[lag_order - 1 - i:n - 1 - i] for i in range(1, lag_order)]
    z2 = np.column_stack(lags) if lags else np.empty((rows, 0))
    return z0, z1, z2


def _partial_out(z: np.ndarray, z2: np.ndarray) -> np.ndarray:
    if z2.shape[1] == 0:
        return z
    _, resid = ols(z2, z)
    return resid


def johansen_test(pair: BivariateSeries, lag_order: int = DEFAULT_LAG_ORDER, significance: int = 95) -> JohansenResult:
    """Reduced-rank regression eigenvalues, trace statistics and rank choice.

    ``selected_rank`` is the smallest null rank whose trace statistic falls
    below the critical value at ``significance`` (2 if both are rejected).
    """
    if lag_order < 1:
        raise InvalidArgumentError("lag_order must be positive")
    if significance not in SIGNIFICANCE_LEVELS:
        raise InvalidArgumentError(f"significance must be one of {SIGNIFICANCE_LEVELS}")
    n = len(pair)
    if n < min_length(lag_order):
        raise InsufficientDataError(
            f"Johansen test with lag order {lag_order} needs more than {10 * lag_order + 20} observations, got {n}"
        )
    z0, z1, z2 = _lagged_design(pair.levels, lag_order)
    r0 = _partial_out(z0, z2)
    r1 = _partial_out(z1, z2)
    t = r0.shape[0]
    s00 = r0.T @ r0 / t
    s11 = r1.T @ r1 / t
    s01 = r0.T @ r1 / t
    try:
        s00_inv_s01 = np.linalg.solve(s00, s01)
        if np.linalg.cond(s00) > 1e12:
            raise np.linalg.LinAlgError
        eig = generalized_symmetric_eigen(s01.T @ s00_inv_s01, s11)
    except (np.linalg.LinAlgError, NotPositiveDefiniteError) as exc:
        raise RankDeficientError("product-moment matrices are degenerate") from exc

    lam = np.clip(eig.eigenvalues[:2], 0.0, 1.0 - 1e-15)
    logs = np.log1p(-lam)
    trace = np.array([-t * logs.sum(), -t * logs[1]])
    cvs = {s: np.array([trace_critical_values(0, s), trace_critical_values(1, s)]) for s in SIGNIFICANCE_LEVELS}
    rank = 2
    for r in (0, 1):
        if trace[r] < cvs[significance][r]:
            rank = r
            break

    v = eig.eigenvectors[:, 0]
    if abs(v[0]) < 1e-12 * np.max(np.abs(v)):
        raise RankDeficientError("cointegrating vector cannot be normalized on the peg")
    beta_ext = v / v[0]
    alpha = (s01 @ v) * v[0]
    return JohansenResult(
        eigenvalues=lam,
        trace_stats=trace,
        critical_values=cvs,
        selected_rank=rank,
        significance=significance,
        beta=np.array([1.0, beta_ext[1]]),
        long_run_constant=float(beta_ext[2]),
        alpha=alpha,
        lag_order=lag_order,
        nobs=t,
        eigenvector=v,
        s01=s01,
        s11=s11,
    )


def _batch_trace(levels: np.ndarray) -> np.ndarray:
    """Full trace statistic (null rank 0) for a batch ``(B, T + 1, k)`` with lag order 1."""
    b, n, k = levels.shape
    t = n - 1
    r0 = np.diff(levels, axis=1)
    r1 = np.concatenate([levels[:, :-1, :], np.ones((b, t, 1))], axis=2)
    s00 = np.einsum("bti,btj->bij", r0, r0) / t
    s01 = np.einsum("bti,btj->bij", r0, r1) / t
    s11 = np.einsum("bti,btj->bij", r1, r1) / t
    m = np.linalg.solve(s11, np.swapaxes(s01, 1, 2) @ np.linalg.solve(s00, s01))
    lam = np.sort(np.linalg.eigvals(m).real, axis=1)[:, ::-1][:, :k]
    lam = np.clip(lam, 0.0, 1.0 - 1e-15)
    return -t * np.log1p(-lam).sum(axis=1)


def simulate_trace_critical_values(
    dimension: int, nobs: int = 1000, reps: int = 10_000, seed: int = 0, chunk: int = 1000
) -> dict:
    """Monte-Carlo quantiles of the trace statistic under the null of no cointegration.

    Simulates ``reps`` independent ``dimension``-variate Gaussian random walks
    of length ``nobs`` and returns ``{90: q90, 95: q95, 99: q99}``.
    """
    rng = np.random.default_rng(seed)
    stats = []
    done = 0
    while done < reps:
        m = min(chunk, reps - done)
        shocks = rng.standard_normal((m, nobs + 1, dimension))
        stats.append(_batch_trace(np.cumsum(shocks, axis=1)))
        done += m
    stats = np.concatenate(stats)
    return {s: float(np.quantile(stats, s / 100)) for s in SIGNIFICANCE_LEVELS}
