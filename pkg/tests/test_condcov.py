import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import make_panel
from r2spill.condcov import (
    GarchParams,
    dcc_correlations,
    dcc_fit,
    ewma_covariance,
    garch11_fit,
    garch11_variance,
)
from r2spill.errors import ConvergenceWarning, DataError
from r2spill.simulate import simulate_ccc_garch, simulate_garch11


def ewma_reference(r, lam, s0):
    """Plain loop over the recursion, independent of the library code path."""
    out = []
    s = s0.copy()
    for row in r:
        s = lam * s + (1 - lam) * np.outer(row, row)
        out.append(s.copy())
    return np.array(out)


def test_ewma_zero_returns_decay():
    rng = np.random.default_rng(0)
    x = np.vstack([rng.standard_normal((60, 2)), np.zeros((10, 2))])
    cov = ewma_covariance(make_panel(x), 0.94, 60)
    s0 = np.cov(x[:60].T)
    for n in range(10):
        np.testing.assert_allclose(cov.sigmas[n], 0.94 ** (n + 1) * s0, rtol=1e-12)


def test_ewma_lambda_near_one():
    rng = np.random.default_rng(1)
    x = 0.02 * rng.standard_normal((70, 3))  # daily-return scale
    cov = ewma_covariance(make_panel(x), 0.9999, 60)
    s0 = np.array(cov.params["sigma0"])
    assert len(cov) == 10
    assert np.abs(cov.sigmas - s0).max() < 1e-3
    # drift relative to S_0 after 10 steps is of order 10 (1 - lambda)
    assert np.abs(cov.sigmas - s0).max() < 0.01 * np.abs(s0).max()


def test_ewma_bit_exact_reproduction():
    rng = np.random.default_rng(2)
    x = rng.standard_normal((200, 3)) * [0.01, 0.02, 0.03]
    cov = ewma_covariance(make_panel(x), 0.94, 60)
    ref = ewma_reference(x[60:], 0.94, np.array(cov.params["sigma0"]))
    assert cov.sigmas.tobytes() == ref.tobytes()
    assert cov.dates[0] == make_panel(x).dates[60]


def test_ewma_recovers_covariance():
    S = np.array([[1.0, 0.4, -0.2], [0.4, 2.0, 0.3], [-0.2, 0.3, 0.5]])
    x = np.random.default_rng(3).multivariate_normal(np.zeros(3), S, 20000)
    cov = ewma_covariance(make_panel(x))
    avg = cov.sigmas.mean(axis=0)
    assert np.all(np.abs(avg - S) <= 0.15 * np.abs(S))


def test_ewma_outputs_valid(fixture_panel):
    cov = ewma_covariance(fixture_panel)
    cov.validate()
    R = cov.correlations()
    assert np.all(np.diagonal(R, axis1=1, axis2=2) == 1.0)
    assert np.abs(R).max() <= 1.0 + 1e-12
    np.testing.assert_array_equal(cov.at(cov.dates[5]), cov.sigmas[5])


@pytest.mark.parametrize("lam", [0.0, 1.0, 1.5])
def test_ewma_bad_lambda(lam):
    with pytest.raises(DataError):
        ewma_covariance(make_panel(np.ones((100, 2))), lam)


def test_ewma_short_panel():
    with pytest.raises(DataError):
        ewma_covariance(make_panel(np.random.default_rng(0).standard_normal((50, 2))))


def test_garch_variance_recursion():
    eps = np.array([0.5, -1.0, 2.0, 0.1])
    h = garch11_variance(eps, 0.1, 0.2, 0.7, 1.0)
    ref = [1.0]
    for e in eps[:-1]:
        ref.append(0.1 + 0.2 * e**2 + 0.7 * ref[-1])
    np.testing.assert_allclose(h, ref, rtol=1e-14)


def test_garch_recovery_single():
    x = simulate_garch11(5000, 0.05, 0.08, 0.90, np.random.default_rng(0))
    fit = garch11_fit(x)
    assert fit.converged
    assert abs(fit.persistence - 0.98) < 0.05
    assert fit.variance.shape == x.shape
    np.testing.assert_allclose(fit.std_resid, (x - fit.mean) / np.sqrt(fit.variance))


def test_garch_iid_alpha_small():
    small = 0
    for s in range(50):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", ConvergenceWarning)
            small += garch11_fit(np.random.default_rng(s).standard_normal(1000)).alpha <= 0.05
    assert small >= 40


def test_garch_degenerate():
    with pytest.raises(DataError, match="degenerate series"):
        garch11_fit(np.full(300, 0.01))


def test_garch_too_short():
    with pytest.raises(DataError):
        garch11_fit(np.random.default_rng(0).standard_normal(100))


def test_garch_nonconvergence_warns():
    x = simulate_garch11(500, 0.05, 0.08, 0.90, np.random.default_rng(1))
    with pytest.warns(ConvergenceWarning):
        fit = garch11_fit(x, maxiter=3)
    assert not fit.converged


def test_garch_params_constraints():
    with pytest.raises(DataError):
        GarchParams(np.array([0.1]), np.array([0.5]), np.array([0.6]), 0.01, 0.9)
    with pytest.raises(DataError):
        GarchParams(np.array([0.1]), np.array([0.1]), np.array([0.8]), 0.5, 0.6)


@given(st.floats(0.0, 0.3), st.floats(0.0, 0.69))
def test_dcc_unit_diagonal(a, b):
    z = np.random.default_rng(4).standard_normal((50, 3))
    R = dcc_correlations(z, a, b)
    assert np.all(np.diagonal(R, axis1=1, axis2=2) == 1.0)
    assert np.abs(R).max() <= 1.0 + 1e-12


def test_dcc_recursion_matches_loop():
    z = np.random.default_rng(5).standard_normal((30, 2))
    a, b = 0.05, 0.9
    qbar = z.T @ z / 30
    Q = qbar.copy()
    for t in range(1, 30):
        Q = (1 - a - b) * qbar + a * np.outer(z[t - 1], z[t - 1]) + b * Q
    d = np.sqrt(np.diag(Q))
    np.testing.assert_allclose(dcc_correlations(z, a, b)[-1], Q / np.outer(d, d), atol=1e-12)


def test_dcc_fit_structure():
    corr = np.array([[1.0, 0.5, 0.2], [0.5, 1.0, 0.3], [0.2, 0.3, 1.0]])
    x = simulate_ccc_garch(1000, corr, np.random.default_rng(6))
    fit = dcc_fit(make_panel(x))
    cov = fit.covariances
    cov.validate()
    h = np.column_stack([f.variance for f in fit.stage1])
    np.testing.assert_array_equal(cov.variances(), h)
    assert fit.params.dcc_a <= 0.05
    assert cov.method == "dcc"
    R = cov.correlations()
    np.testing.assert_allclose(R, fit.correlations, atol=1e-12)
