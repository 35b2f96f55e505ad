"""
Shared numerical kernels.

Least squares, Cholesky, the symmetric generalized eigenproblem used by the
Johansen reduced-rank regression, a bounded derivative-free minimizer and the
distribution functions needed for p-values. Matrices are plain 2-D numpy
arrays.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy import linalg, optimize, special

from .errors import InvalidArgumentError, NotPositiveDefiniteError, RankDeficientError

# Tolerances referenced by tests.
RANK_TOL = 1e-10
SYMMETRY_TOL = 1e-10
OPTIMIZER_TOL = 1e-8
OPTIMIZER_MAX_ITER = 5000
OPTIMIZER_MAX_RESTARTS = 4


@dataclass(frozen=True)
class EigenSolution:
    eigenvalues: np.ndarray  # descending
    eigenvectors: np.ndarray  # column j pairs with eigenvalues[j]


@dataclass(frozen=True)
class MinimizeResult:
    argmin: np.ndarray
    value: float
    converged: bool
    evaluations: int


def _as_2d(a) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if a.ndim == 1:
        a = a[:, None]
    if a.ndim != 2:
        raise InvalidArgumentError("expected a matrix")
    if not np.all(np.isfinite(a)):
        raise InvalidArgumentError("matrix entries must be finite")
    return a


def ols(design, response) -> tuple[np.ndarray, np.ndarray]:
    """Least-squares fit of ``response`` on the columns of ``design``.

    Returns ``(coefficients, residuals)`` with coefficients shaped
    ``(cols(design), cols(response))``. Raises :class:`RankDeficientError`
    when the smallest singular value of the design is below ``RANK_TOL``
    relative to the largest.
    """
    x = _as_2d(design)
    y = _as_2d(response)
    if x.shape[0] != y.shape[0]:
        raise InvalidArgumentError("design and response row counts differ")
    if x.shape[0] <= x.shape[1]:
        raise RankDeficientError(f"design has {x.shape[0]} rows for {x.shape[1]} columns")
    u, s, vt = np.linalg.svd(x, full_matrices=False)
    if s[0] == 0.0 or s[-1] / s[0] < RANK_TOL:
        raise RankDeficientError("design matrix is rank deficient")
    coef = vt.T @ ((u.T @ y) / s[:, None])
    resid = y - x @ coef
    return coef, resid


def cholesky(spd) -> np.ndarray:
    """Lower-triangular ``L`` with ``L @ L.T == spd`` and positive diagonal."""
    a = _as_2d(spd)
    if a.shape[0] != a.shape[1]:
        raise InvalidArgumentError("matrix must be square")
    scale = max(1.0, float(np.max(np.abs(a))))
    if np.max(np.abs(a - a.T)) > SYMMETRY_TOL * scale:
        raise InvalidArgumentError("matrix must be symmetric")
    if a.shape == (2, 2):
        l11 = a[0, 0]
        if not l11 > 0.0:
            raise NotPositiveDefiniteError("non-positive pivot")
        l11 = np.sqrt(l11)
        l21 = a[1, 0] / l11
        piv = a[1, 1] - l21 * l21
        if not piv > 0.0:
            raise NotPositiveDefiniteError("non-positive pivot")
        return np.array([[l11, 0.0], [l21, np.sqrt(piv)]])
    try:
        return np.linalg.cholesky(a)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefiniteError("non-positive pivot") from exc


def generalized_symmetric_eigen(a, b) -> EigenSolution:
    """Solve ``a v = lambda b v`` for symmetric ``a`` and SPD ``b``.

    Eigenvectors are normalized so that ``v' b v = 1``.
    """
    a = _as_2d(a)
    b = _as_2d(b)
    a = 0.5 * (a + a.T)
    b = 0.5 * (b + b.T)
    lower = cholesky(b)
    # Reduce to a standard symmetric problem: C = L^-1 a L^-T.
    tmp = linalg.solve_triangular(lower, a, lower=True)
    c = linalg.solve_triangular(lower, tmp.T, lower=True)
    c = 0.5 * (c + c.T)
    w, z = np.linalg.eigh(c)
    order = np.argsort(w)[::-1]
    vecs = linalg.solve_triangular(lower.T, z[:, order], lower=False)
    return EigenSolution(eigenvalues=w[order], eigenvectors=vecs)


def minimize(
    objective: Callable[[np.ndarray], float],
    initial: Sequence[float],
    lower: Sequence[float],
    upper: Sequence[float],
    tolerance: float = OPTIMIZER_TOL,
    max_iter: int = OPTIMIZER_MAX_ITER,
) -> MinimizeResult:
    """Bounded Nelder-Mead with restarts.

    Non-finite objective values during the search count as ``+inf``. The
    returned point never leaves the box and never scores worse than
    ``initial``.
    """
    x0 = np.asarray(initial, dtype=float)
    lo = np.asarray(lower, dtype=float)
    hi = np.asarray(upper, dtype=float)
    if not (x0.shape == lo.shape == hi.shape):
        raise InvalidArgumentError("initial and bounds must have equal length")
    if np.any(lo >= hi):
        raise InvalidArgumentError("lower bounds must be below upper bounds")
    if np.any(x0 < lo) or np.any(x0 > hi):
        raise InvalidArgumentError("initial point outside bounds")
    f0 = float(objective(x0))
    if not np.isfinite(f0):
        raise InvalidArgumentError("objective is not finite at the initial point")

    evals = 0

    def barrier(x):
        nonlocal evals
        evals += 1
        x = np.clip(x, lo, hi)
        v = float(objective(x))
        return v if np.isfinite(v) else np.inf

    best_x, best_f = x0.copy(), f0
    converged = False
    budget = max_iter
    for _ in range(OPTIMIZER_MAX_RESTARTS):
        res = optimize.minimize(
            barrier,
            best_x,
            method="Nelder-Mead",
            bounds=list(zip(lo, hi)),
            options={
                "xatol": tolerance,
                "fatol": tolerance,
                "maxiter": budget,
                "maxfev": 2 * budget,
                "adaptive": x0.size > 2,
            },
        )
        budget -= res.nit
        x = np.clip(res.x, lo, hi)
        f = float(res.fun)
        improved = f < best_f - tolerance * max(1.0, abs(best_f))
        if f < best_f:
            best_x, best_f = x, f
        converged = bool(res.success)
        if not improved or budget <= 0:
            break
    return MinimizeResult(argmin=best_x, value=best_f, converged=converged and budget > 0, evaluations=evals)


def _check_df(*dfs):
    for df in dfs:
        if not (np.isfinite(df) and df > 0):
            raise InvalidArgumentError(f"degrees of freedom must be positive, got {df}")


def cdf(distribution: str, x: float, *df: float) -> float:
    """Lower-tail probability for ``normal``, ``chi_square`` (df) or ``f`` (df1, df2)."""
    if distribution == "normal":
        if df:
            raise InvalidArgumentError("normal takes no degrees of freedom")
        return float(special.ndtr(x))
    if distribution == "chi_square":
        if len(df) != 1:
            raise InvalidArgumentError("chi_square takes one df")
        _check_df(*df)
        return float(special.chdtr(df[0], max(x, 0.0)))
    if distribution == "f":
        if len(df) != 2:
            raise InvalidArgumentError("f takes two df")
        _check_df(*df)
        if x == np.inf:  # fdtr returns nan here
            return 1.0
        return float(special.fdtr(df[0], df[1], max(x, 0.0)))
    raise InvalidArgumentError(f"unknown distribution {distribution!r}")


def sf(distribution: str, x: float, *df: float) -> float:
    """Upper-tail probability, computed directly to keep small p-values accurate."""
    if distribution == "normal":
        if df:
            raise InvalidArgumentError("normal takes no degrees of freedom")
        return float(special.ndtr(-x))
    if distribution == "chi_square":
        if len(df) != 1:
            raise InvalidArgumentError("chi_square takes one df")
        _check_df(*df)
        return float(special.chdtrc(df[0], max(x, 0.0)))
    if distribution == "f":
        if len(df) != 2:
            raise InvalidArgumentError("f takes two df")
        _check_df(*df)
        if x == np.inf:
            return 0.0
        return float(special.fdtrc(df[0], df[1], max(x, 0.0)))
    raise InvalidArgumentError(f"unknown distribution {distribution!r}")


def normal_ppf(p):
    """Inverse standard normal CDF."""
    return special.ndtri(p)
