import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats as sps

from conftest import make_panel
from r2spill.errors import DataError, SingularMatrixError
from r2spill.stats import (
    ERS_CRITICAL_VALUES,
    correlation_matrix,
    describe,
    descriptive_table,
    ers_dfgls,
    jarque_bera,
    jb_from_moments,
    kendall_tau_matrix,
    pairwise_corr,
    schwert_lag,
)


def test_describe_hand_values():
    rec = describe([1, 2, 3, 4, 5])
    assert rec.mean == 3.0
    assert rec.variance == 2.5
    assert rec.n == 5


def test_describe_two_point_symmetric():
    rec = describe([-1, 1, -1, 1])
    assert rec.mean == 0.0
    assert rec.skewness == 0.0


def test_describe_constant():
    rec = describe(np.full(10, 0.3))
    assert rec.variance == 0.0
    assert math.isnan(rec.skewness) and math.isnan(rec.excess_kurtosis)
    with pytest.raises(DataError, match="zero variance"):
        jarque_bera(np.full(10, 0.3))


def test_describe_matches_scipy(rng):
    x = rng.standard_t(5, 500)
    rec = describe(x)
    assert rec.skewness == pytest.approx(sps.skew(x), rel=1e-12)
    assert rec.excess_kurtosis == pytest.approx(sps.kurtosis(x), rel=1e-12)


def test_jb_formula():
    assert jb_from_moments(100, 0.0, 0.0) == (0.0, 1.0)
    jb, _ = jb_from_moments(100, 0.5, 1.0)
    assert jb == pytest.approx(100 * (0.25 / 6 + 1 / 24), abs=1e-12)
    assert jb == pytest.approx(8.333, abs=1e-3)


def test_jb_matches_scipy(rng):
    x = rng.standard_t(4, 800)
    ours = jarque_bera(x)
    ref = sps.jarque_bera(x)
    assert ours[0] == pytest.approx(ref.statistic, rel=1e-10)
    assert ours[1] == pytest.approx(ref.pvalue, rel=1e-8, abs=1e-300)


def test_jb_gaussian_size():
    ok = sum(jarque_bera(np.random.default_rng(s).standard_normal(10000))[1] > 0.01
             for s in range(100))
    assert ok >= 95


@given(st.floats(0.01, 100.0), st.floats(-10.0, 10.0))
def test_jb_affine_invariance(a, b):
    x = np.random.default_rng(7).standard_t(6, 200)
    np.testing.assert_allclose(jarque_bera(a * x + b)[0], jarque_bera(x)[0], rtol=1e-8)


def test_schwert_lag():
    assert schwert_lag(100) == 12
    assert schwert_lag(927) == 20


def test_ers_random_walk_fixed_block():
    # the null holds, so the expected rate equals the nominal 90%
    above = 0
    for s in range(100):
        rw = np.cumsum(np.random.default_rng(s).standard_normal(200))
        above += ers_dfgls(rw, lag_order=0)[0] > ERS_CRITICAL_VALUES["10%"]
    assert above >= 90


def test_ers_random_walk_rate():
    above = sum(
        ers_dfgls(np.cumsum(np.random.default_rng(10_000 + s).standard_normal(200)), 0)[0]
        > ERS_CRITICAL_VALUES["10%"]
        for s in range(1000)
    )
    assert 0.87 <= above / 1000 <= 0.93


def test_ers_white_noise():
    below = sum(ers_dfgls(np.random.default_rng(s).standard_normal(200), lag_order=0)[0]
                < ERS_CRITICAL_VALUES["1%"] for s in range(100))
    assert below >= 90


def test_ers_band():
    t, band = ers_dfgls(np.random.default_rng(3).standard_normal(300), 0)
    assert band == "1%" and t < -2.58


def test_ers_constant_series():
    with pytest.raises(SingularMatrixError, match="singular regression"):
        ers_dfgls(np.ones(100))


def test_ers_matches_arch():
    arch = pytest.importorskip("arch.unitroot")
    rng = np.random.default_rng(11)
    for x in (rng.standard_normal(400), np.cumsum(rng.standard_normal(400))):
        for lags in (0, 3, 8):
            ref = arch.DFGLS(x, lags=lags, trend="c")
            assert ers_dfgls(x, lags)[0] == pytest.approx(ref.stat, rel=1e-8)


def test_ers_too_short():
    with pytest.raises(DataError):
        ers_dfgls(np.arange(20.0))


def test_correlation_identical_and_negated(rng):
    x = rng.standard_normal(100)
    panel = make_panel(np.column_stack([x, x, -x]))
    for method in ("pearson", "spearman", "kendall"):
        cm = correlation_matrix(panel, method)
        assert cm.values[0, 1] == pytest.approx(1.0, abs=1e-12)
        assert cm.values[0, 2] == pytest.approx(-1.0, abs=1e-12)
        assert cm.pvalues[0, 1] < 1e-10


def test_correlation_independent():
    good = 0
    for s in range(100):
        cm = correlation_matrix(make_panel(np.random.default_rng(s).standard_normal((1000, 2))))
        good += abs(cm.values[0, 1]) < 0.1 and cm.pvalues[0, 1] > 0.10
    assert good >= 90


def test_spearman_is_pearson_on_ranks(rng):
    X = np.round(rng.standard_normal((150, 4)), 1)  # plenty of ties
    ranks = np.column_stack([sps.rankdata(c) for c in X.T])
    np.testing.assert_array_equal(pairwise_corr(X, "spearman"), pairwise_corr(ranks, "pearson"))


def test_kendall_matches_scipy(rng):
    X = np.round(rng.standard_normal((80, 3)), 1)
    tau = kendall_tau_matrix(X)
    for i in range(3):
        for j in range(3):
            ref = 1.0 if i == j else sps.kendalltau(X[:, i], X[:, j]).statistic
            assert tau[i, j] == pytest.approx(ref, abs=1e-12)


@given(st.lists(st.floats(-1e3, 1e3, allow_nan=False), min_size=5, max_size=40, unique=True))
def test_kendall_comonotone(xs):
    x = np.array(xs)
    X = np.column_stack([x, 2.0 * x, -x])
    tau = kendall_tau_matrix(X)
    assert tau[0, 1] == pytest.approx(1.0)
    assert tau[0, 2] == pytest.approx(-1.0)
    assert np.all(np.abs(tau) <= 1.0 + 1e-12)


def test_pearson_pvalues_match_scipy(rng):
    X = rng.standard_normal((60, 3))
    X[:, 1] += 0.3 * X[:, 0]
    cm = correlation_matrix(make_panel(X))
    ref = sps.pearsonr(X[:, 0], X[:, 1])
    assert cm.values[0, 1] == pytest.approx(ref.statistic, abs=1e-12)
    assert cm.pvalues[0, 1] == pytest.approx(ref.pvalue, rel=1e-8)


def test_mask_threshold(rng):
    X = rng.standard_normal((200, 3))
    cm = correlation_matrix(make_panel(X), threshold=0.10)
    np.testing.assert_array_equal(cm.mask, cm.pvalues >= 0.10)
    assert not cm.mask.diagonal().any()


def test_zero_variance_column(rng):
    X = rng.standard_normal((50, 2))
    X[:, 1] = 1.0
    with pytest.raises(DataError, match="zero-variance"):
        correlation_matrix(make_panel(X))


def test_descriptive_table(fixture_panel):
    table = descriptive_table(fixture_panel)
    assert list(table) == list(fixture_panel.assets)
    rec = table["TOK2"]
    assert rec.n == fixture_panel.T
    assert 0.0 <= rec.jb_pvalue <= 1.0
    assert rec.meta["ers_lag"] == schwert_lag(fixture_panel.T)
