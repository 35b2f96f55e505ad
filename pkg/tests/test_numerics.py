import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pegrisk.errors import InvalidArgumentError, NotPositiveDefiniteError, RankDeficientError
from pegrisk.numerics import (
    cdf,
    cholesky,
    generalized_symmetric_eigen,
    minimize,
    normal_ppf,
    ols,
    sf,
)

from .conftest import load_oracles


def test_ols_exact_line():
    x = np.arange(10.0)
    design = np.column_stack([np.ones(10), x])
    coef, resid = ols(design, 2 * x + 1)
    np.testing.assert_allclose(coef[:, 0], [1.0, 2.0], atol=1e-10)
    assert np.max(np.abs(resid)) < 1e-10


def test_ols_zero_response():
    rng = np.random.default_rng(0)
    coef, resid = ols(rng.standard_normal((20, 3)), np.zeros(20))
    assert np.all(coef == 0.0)
    assert np.all(resid == 0.0)


def test_ols_residuals_orthogonal_to_design():
    rng = np.random.default_rng(1)
    x = rng.standard_normal((200, 5))
    y = x @ rng.standard_normal(5) + rng.standard_normal(200)
    _, resid = ols(x, y)
    assert np.max(np.abs(x.T @ resid)) < 1e-8


def test_ols_rank_deficient():
    x = np.column_stack([np.ones(10), np.arange(10.0), 2 * np.arange(10.0)])
    with pytest.raises(RankDeficientError):
        ols(x, np.arange(10.0))


def test_ols_too_few_rows():
    with pytest.raises(RankDeficientError):
        ols(np.eye(3), np.ones(3))


def test_cholesky_examples():
    np.testing.assert_array_equal(cholesky(np.eye(2)), np.eye(2))
    np.testing.assert_allclose(cholesky(np.diag([4.0, 9.0])), np.diag([2.0, 3.0]))


def test_cholesky_not_positive_definite():
    with pytest.raises(NotPositiveDefiniteError):
        cholesky(np.array([[1.0, 2.0], [2.0, 1.0]]))


def test_cholesky_rejects_asymmetric():
    with pytest.raises(InvalidArgumentError):
        cholesky(np.array([[2.0, 0.5], [0.0, 2.0]]))


@given(st.integers(0, 2**32 - 1), st.sampled_from([2, 3, 4]))
@settings(max_examples=60, deadline=None)
def test_cholesky_reconstructs(seed, k):
    a = np.random.default_rng(seed).standard_normal((k + 2, k))
    spd = a.T @ a + 1e-3 * np.eye(k)
    low = cholesky(spd)
    assert np.allclose(np.triu(low, 1), 0.0)
    assert np.all(np.diag(low) > 0)
    assert np.max(np.abs(low @ low.T - spd)) <= 1e-9 * np.max(np.abs(spd))
    # factoring L L' gives L back
    np.testing.assert_allclose(cholesky(low @ low.T), low, atol=1e-9 * np.max(np.abs(low)))


def test_generalized_eigen_identity_pencil():
    sol = generalized_symmetric_eigen(np.eye(3), np.eye(3))
    np.testing.assert_allclose(sol.eigenvalues, 1.0)


def test_generalized_eigen_diagonal():
    sol = generalized_symmetric_eigen(np.diag([1.0, 2.0]), np.eye(2))
    np.testing.assert_allclose(sol.eigenvalues, [2.0, 1.0])


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=60, deadline=None)
def test_generalized_eigen_residual(seed):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((4, 2))
    b = rng.standard_normal((5, 2))
    a = a.T @ a
    b = b.T @ b + 0.1 * np.eye(2)
    sol = generalized_symmetric_eigen(a, b)
    assert np.all(np.diff(sol.eigenvalues) <= 0)
    for lam, v in zip(sol.eigenvalues, sol.eigenvectors.T):
        assert np.linalg.norm(a @ v - lam * b @ v) < 1e-8 * max(1.0, np.abs(a).max())
        assert abs(v @ b @ v - 1.0) < 1e-9


def test_generalized_eigen_b_not_spd():
    with pytest.raises(NotPositiveDefiniteError):
        generalized_symmetric_eigen(np.eye(2), np.diag([1.0, -1.0]))


def test_minimize_quadratic():
    res = minimize(lambda x: (x[0] - 3.0) ** 2, [0.0], [0.0], [10.0])
    assert abs(res.argmin[0] - 3.0) < 1e-4
    assert res.converged


def test_minimize_bowl():
    res = minimize(lambda x: x[0] ** 2 + x[1] ** 2, [0.7, -0.4], [-1.0, -1.0], [1.0, 1.0])
    np.testing.assert_allclose(res.argmin, [0.0, 0.0], atol=1e-4)


def test_minimize_rosenbrock():
    def rosen(p):
        x, y = p
        return (1 - x) ** 2 + 100 * (y - x * x) ** 2

    res = minimize(rosen, [-1.2, 1.0], [-2.0, -2.0], [2.0, 2.0])
    assert res.value < 1e-3


def test_minimize_nonfinite_is_barrier():
    # log is undefined below 0.5; the search must stay where it is finite
    res = minimize(lambda x: np.log(x[0] - 0.5) ** 2, [2.0], [0.0], [5.0])
    assert abs(res.argmin[0] - 1.5) < 1e-4


def test_minimize_rejects_bad_start():
    with pytest.raises(InvalidArgumentError):
        minimize(lambda x: float("nan"), [0.0], [-1.0], [1.0])
    with pytest.raises(InvalidArgumentError):
        minimize(lambda x: x[0] ** 2, [2.0], [-1.0], [1.0])


@given(
    st.floats(-5, 5),
    st.floats(-5, 5),
    st.floats(0.5, 4.0),
)
@settings(max_examples=80, deadline=None)
def test_minimize_stays_in_bounds_and_never_worsens(c, start, width):
    lo, hi = -width, width
    x0 = float(np.clip(start, lo, hi))
    f = lambda x: float(np.cos(3 * x[0]) + (x[0] - c) ** 2)  # noqa: E731
    res = minimize(f, [x0], [lo], [hi])
    assert lo <= res.argmin[0] <= hi
    assert res.value <= f([x0])


def test_cdf_against_high_precision():
    o = load_oracles()
    for x, p in o["normal_cdf"]:
        assert abs(cdf("normal", x) - p) < 1e-7
    for x, k, p in o["chi2_cdf"]:
        assert abs(cdf("chi_square", x, k) - p) < 1e-7
    for x, d1, d2, p in o["f_cdf"]:
        assert abs(cdf("f", x, d1, d2) - p) < 1e-7


def test_cdf_examples():
    assert cdf("normal", 0.0) == 0.5
    assert abs(cdf("chi_square", 3.841, 1) - 0.95) < 1e-4


@pytest.mark.parametrize("x", [0.3, 1.0, 3.841, 7.0])
def test_f_with_large_denominator_tends_to_chi_square(x):
    assert abs(cdf("f", x, 1, 1e7) - cdf("chi_square", x, 1)) < 1e-5


def test_cdf_limits_and_monotone():
    grid = np.linspace(-50, 50, 401)
    for dist, df in (("normal", ()), ("chi_square", (3,)), ("f", (2, 9))):
        vals = [cdf(dist, x, *df) for x in grid]
        assert np.all(np.diff(vals) >= 0)
        assert cdf(dist, -np.inf, *df) == 0.0
        assert cdf(dist, np.inf, *df) == 1.0
        assert sf(dist, 1.3, *df) == pytest.approx(1 - cdf(dist, 1.3, *df), abs=1e-12)


def test_cdf_invalid_df():
    with pytest.raises(InvalidArgumentError):
        cdf("chi_square", 1.0, 0)
    with pytest.raises(InvalidArgumentError):
        cdf("f", 1.0, 2, -1)
    with pytest.raises(InvalidArgumentError):
        cdf("student", 1.0, 3)


def test_normal_ppf_inverts_cdf():
    for p in (1e-6, 0.01, 0.3, 0.5, 0.99):
        assert abs(cdf("normal", normal_ppf(p)) - p) < 1e-12
