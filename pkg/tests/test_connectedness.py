import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import make_panel
from r2spill.connectedness import (
    PCI_FLOOR,
    SpilloverDecomposition,
    _weights_from_corr,
    averaged_spillover,
    build_design,
    decompose_window,
    directional_indices,
    pci_matrix,
    relative_weights,
    rolling_connectedness,
)
from r2spill.errors import DataError, SingularMatrixError
from r2spill.simulate import simulate_var1


def ols_r2(X, y):
    """R^2 of y on X with intercept, via the normal equations."""
    A = np.column_stack([np.ones(len(y)), X])
    beta = np.linalg.solve(A.T @ A, A.T @ y)
    resid = y - A @ beta
    return 1.0 - resid @ resid / np.sum((y - y.mean()) ** 2)


def test_regressor_counts():
    rng = np.random.default_rng(0)
    design, y, X = build_design(make_panel(rng.standard_normal((60, 2))), 0, 1)
    assert design.n_regressors == 3
    assert X.shape == (59, 3) and y.shape == (59,)
    design, _, X = build_design(make_panel(rng.standard_normal((200, 9))), 4, 1)
    assert design.n_regressors == 17
    assert 4 not in design.sources[:8]


def test_design_columns():
    rng = np.random.default_rng(1)
    x = rng.standard_normal((100, 3))
    design, y, X = build_design(make_panel(x), 1, 2)
    assert design.sources == (0, 2, 0, 1, 2, 0, 1, 2)
    assert design.lags == (0, 0, 1, 1, 1, 2, 2, 2)
    # contemporaneous regressor 0 is asset 0 at t; lag-1 regressor for asset 1 is r_{t-1}
    z = (x[2:, 0] - x[2:, 0].mean()) / x[2:, 0].std()
    np.testing.assert_allclose(X[:, 0], z)
    z = (x[1:-1, 1] - x[1:-1, 1].mean()) / x[1:-1, 1].std()
    np.testing.assert_allclose(X[:, 3], z)


def test_window_too_short():
    with pytest.raises(DataError, match="window too short"):
        decompose_window(make_panel(np.random.default_rng(0).standard_normal((20, 9))))


def test_orthogonal_regressors():
    # exactly orthogonal, standardized columns: eps_j = corr(x_j, y)^2
    H = np.linalg.qr(np.random.default_rng(2).standard_normal((64, 5)))[0]
    H -= H.mean(axis=0)
    Q, _ = np.linalg.qr(np.column_stack([np.ones(64), H]))
    X = Q[:, 1:4]
    y = X @ [0.5, -0.3, 0.2] + 0.4 * Q[:, 4]
    eps = relative_weights(X, y)
    r = np.array([np.corrcoef(X[:, j], y)[0, 1] for j in range(3)])
    np.testing.assert_allclose(eps, r**2, atol=1e-12)


def test_perfect_fit():
    x = np.random.default_rng(3).standard_normal(50)
    assert relative_weights(x[:, None], x)[0] == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("seed", range(20))
def test_relative_weights_sum_to_ols_r2(seed):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((250, 5)) @ rng.standard_normal((5, 5))
    y = X @ rng.standard_normal(5) + rng.standard_normal(250) * 2
    eps = relative_weights(X, y)
    assert eps.sum() == pytest.approx(ols_r2(X, y), abs=1e-8)
    assert np.all(eps >= -1e-12)


@pytest.mark.parametrize("method", ["spearman", "kendall"])
def test_rank_methods_nonnegative(method):
    rng = np.random.default_rng(4)
    X = rng.standard_normal((120, 4))
    y = X[:, 0] + rng.standard_normal(120)
    eps = relative_weights(X, y, method)
    assert np.all(eps >= 0)
    assert 0 < eps.sum() <= 1 + 1e-9
    assert eps.argmax() == 0


def test_indefinite_matrix_raises():
    R = np.array([[1.0, 0.9, -0.9], [0.9, 1.0, 0.9], [-0.9, 0.9, 1.0]])
    assert np.linalg.eigvalsh(R).min() < -0.5
    with pytest.raises(SingularMatrixError):
        _weights_from_corr(R, np.array([0.5, 0.5, 0.5]))


def test_exact_duplicate_is_ridged():
    eps = _weights_from_corr(np.ones((3, 3)), np.array([0.5, 0.5, 0.5]))
    assert np.all(np.isfinite(eps)) and np.all(eps >= 0)


def test_near_singular_is_ridged():
    R = np.array([[1.0, 1.0 - 1e-13], [1.0 - 1e-13, 1.0]])
    eps = _weights_from_corr(R, np.array([0.5, 0.5]))
    assert np.all(np.isfinite(eps))


def test_row_sum_identity_and_ols_oracle():
    rng = np.random.default_rng(5)
    panel = make_panel(rng.standard_normal((150, 4)) + 0.3 * rng.standard_normal((150, 1)))
    dec = decompose_window(panel, p=2)
    for k in range(4):
        _, y, X = build_design(panel, k, 2)
        r2 = ols_r2(X, y)
        assert (dec.C[k] + dec.L[k]).sum() == pytest.approx(100 * r2, abs=1e-8)
        assert dec.r2[k] == pytest.approx(r2, abs=1e-10)
    assert np.all(np.diag(dec.C) == 0)
    assert np.all(dec.C >= 0) and np.all(dec.L >= 0)


def test_independent_noise_small_offdiagonal():
    good = 0
    for s in range(100):
        dec = decompose_window(make_panel(np.random.default_rng(s).standard_normal((200, 3))))
        off = ~np.eye(3, dtype=bool)
        good += np.all((dec.C + dec.L)[off] < 5)
    assert good >= 90


def test_near_duplicate_dominates():
    rng = np.random.default_rng(6)
    x = rng.standard_normal((300, 4))
    x[:, 1] = x[:, 0] + 0.01 * rng.standard_normal(300)
    dec = decompose_window(make_panel(x))
    M = dec.C + dec.L
    pair = M[1, 0] + M[0, 1]
    off = ~np.eye(4, dtype=bool)
    off[0, 1] = off[1, 0] = False
    assert pair > M[off].max()


def _spill(C, L, names=("a", "b", "c")):
    return SpilloverDecomposition(tuple(names), np.asarray(C, float), np.asarray(L, float),
                                  np.zeros(len(names)))


def test_zero_system():
    idx = directional_indices(_spill(np.zeros((3, 3)), np.diag([5.0, 1.0, 2.0])))
    for name in ("to", "from_", "net", "npdc", "npdc_c", "npdc_l"):
        assert np.all(getattr(idx, name) == 0)
    assert idx.tci == 0.0
    assert directional_indices(_spill(np.zeros((3, 3)), np.diag([6.0, 0.0, 0.0])),
                               include_own_lag_in_tci=True).tci == 2.0


def test_indices_by_hand():
    C = [[0, 10, 0], [20, 0, 5], [0, 0, 0]]
    L = [[1, 2, 0], [0, 0, 0], [3, 0, 4]]
    idx = directional_indices(_spill(C, L))
    np.testing.assert_allclose(idx.from_, [12, 25, 3])
    np.testing.assert_allclose(idx.to, [23, 12, 5])
    np.testing.assert_allclose(idx.net, [11, -13, 2])
    assert idx.tci_c == pytest.approx(35 / 3)
    assert idx.tci_l == pytest.approx(5 / 3)
    assert idx.tci == idx.tci_c + idx.tci_l
    # net spillover from asset 0 to asset 1 is 20 - 12
    assert idx.npdc[1, 0] == 8.0
    np.testing.assert_allclose(idx.npdc.sum(axis=0), idx.net)


matrices = st.lists(st.floats(0, 50), min_size=16, max_size=16).map(
    lambda v: np.array(v).reshape(4, 4))


@given(matrices, matrices, st.booleans())
def test_identities(C, L, own):
    np.fill_diagonal(C, 0.0)
    idx = directional_indices(_spill(C, L, "abcd"), own)
    assert idx.tci == idx.tci_c + idx.tci_l
    assert abs(idx.net.sum()) <= 1e-10 * max(1.0, np.abs(C).max() + np.abs(L).max())
    np.testing.assert_array_equal(idx.npdc + idx.npdc.T, 0.0)
    np.testing.assert_array_equal(idx.npdc_c + idx.npdc_c.T, 0.0)


def test_pci_properties():
    rng = np.random.default_rng(7)
    C = rng.uniform(0, 30, (4, 4))
    L = rng.uniform(0, 5, (4, 4))
    np.fill_diagonal(C, 0)
    dec = _spill(C, L, "abcd")
    tot, pc, pl = (pci_matrix(dec, v) for v in ("total", "C", "L"))
    for P in (tot, pc, pl):
        np.testing.assert_array_equal(P, P.T)
        assert np.all(np.diag(P) == 1.0)
    off = ~np.eye(4, dtype=bool)
    np.testing.assert_allclose(pc[off] + pl[off], tot[off], atol=1e-15)
    zero = pci_matrix(_spill(np.zeros((3, 3)), np.zeros((3, 3))))
    np.testing.assert_array_equal(zero, np.where(np.eye(3, dtype=bool), 1.0, PCI_FLOOR))


def test_rolling_counts():
    x = np.random.default_rng(8).standard_normal((45, 2))
    assert len(rolling_connectedness(make_panel(x[:40]), 40)) == 1
    roll = rolling_connectedness(make_panel(x), 40, 1)
    assert len(roll) == 6
    assert roll.dates[0] == make_panel(x).dates[39]
    assert len(rolling_connectedness(make_panel(x), 40, 2)) == 3


def test_rolling_gap_window():
    x = np.random.default_rng(9).standard_normal((60, 2))
    x[10:45, 1] = 0.0  # constant inside the first windows
    roll = rolling_connectedness(make_panel(x), 30)
    assert roll.gaps and roll.valid
    tci = roll.series("tci")
    gap = [n for n, w in enumerate(roll.windows) if w.is_gap]
    assert np.all(np.isnan(tci[gap]))
    assert np.all(np.isfinite(np.delete(tci, gap)))
    assert "zero-variance" in roll.gaps[0].error


def test_rolling_stationary_var():
    A = np.array([[0.2, 0.1, 0.0], [0.0, 0.2, 0.1], [0.1, 0.0, 0.2]])
    x = simulate_var1(600, A, np.random.default_rng(10))
    tci = rolling_connectedness(make_panel(x), 200, 5).series("tci")
    assert np.std(tci) < 10


def test_rolling_deterministic():
    x = np.random.default_rng(11).standard_normal((80, 3))
    a = rolling_connectedness(make_panel(x), 50).series("npdc")
    b = rolling_connectedness(make_panel(x), 50).series("npdc")
    assert a.tobytes() == b.tobytes()


def test_rolling_matches_single_window():
    x = np.random.default_rng(12).standard_normal((70, 3))
    panel = make_panel(x)
    roll = rolling_connectedness(panel, 50)
    one = decompose_window(panel.rows(5, 55))
    np.testing.assert_array_equal(roll.windows[5].decomposition.C, one.C)


def test_averaging():
    rng = np.random.default_rng(13)
    x = rng.standard_normal((62, 3))
    roll = rolling_connectedness(make_panel(x), 60)
    assert len(roll) == 3
    dec, idx = averaged_spillover(roll)
    np.testing.assert_allclose(dec.C, np.mean([w.decomposition.C for w in roll.windows], axis=0))
    single, _ = averaged_spillover(roll.windows[:1])
    np.testing.assert_array_equal(single.C, roll.windows[0].decomposition.C)
    assert abs(np.mean(roll.series("net").sum(axis=1))) < 1e-10
    assert abs(idx.net.sum()) < 1e-10


def test_two_window_average():
    rng = np.random.default_rng(14)
    roll = rolling_connectedness(make_panel(rng.standard_normal((61, 2))), 60)
    dec, _ = averaged_spillover(roll)
    a, b = (w.decomposition for w in roll.windows)
    np.testing.assert_allclose(dec.L, (a.L + b.L) / 2)


def test_permutation_and_scale_single_window():
    rng = np.random.default_rng(15)
    x = rng.standard_normal((120, 4))
    x[:, 1] += 0.5 * x[:, 0]
    names = ("w", "x", "y", "z")
    base = decompose_window(make_panel(x, names))
    order = [2, 0, 3, 1]
    perm = decompose_window(make_panel(x[:, order], tuple(names[i] for i in order)))
    np.testing.assert_array_equal(perm.C, base.C[np.ix_(order, order)])
    np.testing.assert_array_equal(perm.L, base.L[np.ix_(order, order)])
    scaled = decompose_window(make_panel(x * [1.0, 3.0, 1.0, 0.01], names))
    np.testing.assert_allclose(scaled.C, base.C, atol=1e-9)
