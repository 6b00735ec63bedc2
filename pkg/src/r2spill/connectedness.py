"""R^2-decomposition connectedness.

For every asset ``k`` in a window, the standardized return of ``k`` is
regressed on the contemporaneous returns of the other assets and on ``p``
lags of all assets. The regression R^2 is split into non-negative
per-regressor shares with Johnson's relative weights, and the shares are
routed into a contemporaneous matrix ``C`` and a lagged matrix ``L``:

    C[k, i]  share of var(k) explained by asset i at lag 0   (C[k, k] = 0)
    L[k, i]  share of var(k) explained by lags 1..p of asset i

Both are in percentage points, so ``sum_i C[k, i] + L[k, i] = 100 R^2_k``.

Matrix convention: row = receiver, column = transmitter. ``npdc[i, j]`` is
the net spillover from ``j`` to ``i``, i.e. ``M[i, j] - M[j, i]`` with
``M = C + L`` off the diagonal.

Computations run in a canonical (name-sorted) asset order and are mapped
back afterwards, so reordering the input columns permutes every output
without changing a single bit.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import DataError, NumericalError, SingularMatrixError
from .ingest import ReturnPanel
from .stats import CORR_METHODS, pairwise_corr

__all__ = [
    "RegressionDesign",
    "SpilloverDecomposition",
    "DirectionalIndices",
    "WindowResult",
    "RollingConnectedness",
    "build_design",
    "relative_weights",
    "decompose_window",
    "directional_indices",
    "rolling_connectedness",
    "averaged_spillover",
    "pci_matrix",
    "COND_LIMIT",
    "RIDGE",
    "PSD_FLOOR",
    "PCI_SCALE",
    "PCI_FLOOR",
]

logger = logging.getLogger(__name__)

COND_LIMIT = 1e12
RIDGE = 1e-8
PSD_FLOOR = 1e-10
PCI_SCALE = 200.0
PCI_FLOOR = 1e-6

ALGORITHM = "johnson-relative-weights"


@dataclass(frozen=True)
class RegressionDesign:
    """Regressor layout for target asset ``target_index``.

    Regressors are the contemporaneous returns of the other ``K-1`` assets
    (panel order), followed by lag 1 of all ``K`` assets, lag 2, ... up to
    lag ``p``. ``sources[j]`` and ``lags[j]`` give the asset index and lag
    of regressor ``j``.
    """

    target_index: int
    lag_order: int
    n_assets: int
    sources: tuple
    lags: tuple

    @property
    def n_regressors(self) -> int:
        return len(self.sources)

    @property
    def columns(self) -> np.ndarray:
        """Column indices into the stacked lag matrix (``lag * K + asset``)."""
        return np.asarray(self.lags) * self.n_assets + np.asarray(self.sources)


def _design_layout(K: int, k: int, p: int) -> RegressionDesign:
    sources = [i for i in range(K) if i != k]
    lags = [0] * (K - 1)
    for lag in range(1, p + 1):
        sources.extend(range(K))
        lags.extend([lag] * K)
    return RegressionDesign(k, p, K, tuple(sources), tuple(lags))


def min_window(K: int, p: int) -> int:
    return 5 * ((K - 1) + p * K)


def _stacked_lags(returns: np.ndarray, p: int) -> np.ndarray:
    """``[r_t, r_{t-1}, ..., r_{t-p}]`` for t = p .. T-1, shape (T-p, K(p+1))."""
    T = returns.shape[0]
    return np.hstack([returns[p - lag : T - lag] for lag in range(p + 1)])


def _zscore(X: np.ndarray) -> np.ndarray:
    sd = X.std(axis=0)
    if np.any(sd == 0):
        raise DataError("zero-variance column within window")
    return (X - X.mean(axis=0)) / sd


def _check_window(T: int, K: int, p: int):
    if p < 1:
        raise DataError("lag order must be >= 1")
    need = min_window(K, p)
    if T < need:
        raise DataError(f"window too short: {T} rows, need at least {need} for K={K}, p={p}")


def build_design(panel: ReturnPanel, k: int, p: int = 1):
    """Standardized response and design matrix for target asset ``k``.

    Returns ``(design, y, X)`` where ``y`` has ``T - p`` rows.
    """
    _check_window(panel.T, panel.K, p)
    if not 0 <= k < panel.K:
        raise DataError(f"target index {k} out of range for K={panel.K}")
    design = _design_layout(panel.K, k, p)
    Z = _stacked_lags(np.asarray(panel.returns, dtype=float), p)
    return design, _zscore(Z[:, [k]])[:, 0], _zscore(Z[:, design.columns])


def _weights_from_corr(Rxx: np.ndarray, rxy: np.ndarray, psd_floor: Optional[float] = None):
    """Relative weights from a regressor correlation matrix and regressor-response correlations."""
    Rxx = np.asarray(Rxx, dtype=float)
    rxy = np.asarray(rxy, dtype=float)
    if Rxx.ndim != 2 or Rxx.shape[0] != Rxx.shape[1] or rxy.shape != (Rxx.shape[0],):
        raise DataError(f"mismatched dimensions: R_X {Rxx.shape}, r_Xy {rxy.shape}")

    ridged = False
    while True:
        evals, V = np.linalg.eigh(Rxx)
        if psd_floor is not None:
            evals = np.maximum(evals, psd_floor)
        lo, hi = evals.min(), evals.max()
        cond = hi / lo if lo > 0 else np.inf
        if cond <= COND_LIMIT:
            break
        if ridged:
            raise SingularMatrixError(
                f"regressor correlation matrix not positive definite (condition {cond:.3g})"
            )
        Rxx = Rxx + RIDGE * np.eye(Rxx.shape[0])
        ridged = True

    root = np.sqrt(evals)
    lam = (V * root) @ V.T
    beta = (V / root) @ (V.T @ rxy)
    return (lam**2) @ (beta**2)


def relative_weights(X, y, corr_method: str = "pearson") -> np.ndarray:
    """Johnson relative weights of each column of ``X`` in explaining ``y``.

    With ``R_X = V D V'`` the regressor correlation matrix and
    ``Lam = V D^{1/2} V'`` its symmetric square root, the weights are
    ``eps_j = sum_m Lam[j, m]^2 beta[m]^2`` where ``beta = Lam^{-1} r_Xy``.
    They are non-negative and, for Pearson correlations, sum to the OLS
    R^2 of ``y`` on ``X`` (with intercept).

    Spearman and Kendall matrices are eigenvalue-floored at ``1e-10``
    before the square root is taken. A matrix with condition number above
    ``1e12`` gets ``1e-8`` added to its diagonal once; if it is still
    ill-conditioned a :class:`SingularMatrixError` is raised.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float).ravel()
    if X.ndim == 1:
        X = X[:, None]
    if X.shape[0] != y.size:
        raise DataError(f"mismatched dimensions: X has {X.shape[0]} rows, y has {y.size}")
    R = pairwise_corr(np.column_stack([X, y]), corr_method)
    floor = None if corr_method == "pearson" else PSD_FLOOR
    return _weights_from_corr(R[:-1, :-1], R[:-1, -1], floor)


@dataclass
class SpilloverDecomposition:
    """Contemporaneous and lagged attribution matrices for one window (percentage points)."""

    assets: tuple
    C: np.ndarray
    L: np.ndarray
    r2: np.ndarray
    label: object = None
    meta: dict = field(default_factory=dict)

    @property
    def K(self) -> int:
        return len(self.assets)

    def permuted(self, order: Sequence[int]) -> "SpilloverDecomposition":
        order = np.asarray(order)
        return SpilloverDecomposition(
            tuple(self.assets[i] for i in order),
            self.C[np.ix_(order, order)],
            self.L[np.ix_(order, order)],
            self.r2[order],
            self.label,
            dict(self.meta),
        )


@dataclass
class DirectionalIndices:
    assets: tuple
    tci: float
    tci_c: float
    tci_l: float
    to: np.ndarray
    to_c: np.ndarray
    to_l: np.ndarray
    from_: np.ndarray
    from_c: np.ndarray
    from_l: np.ndarray
    net: np.ndarray
    net_c: np.ndarray
    net_l: np.ndarray
    npdc: np.ndarray
    npdc_c: np.ndarray
    npdc_l: np.ndarray
    include_own_lag: bool = False


def _canonical_order(assets: Sequence[str]) -> np.ndarray:
    return np.argsort(np.asarray(assets, dtype=object), kind="stable")


def _decompose_canonical(returns: np.ndarray, p: int, corr_method: str, names: Sequence[str]):
    T, K = returns.shape
    Z = _stacked_lags(returns, p)
    if np.any(np.ptp(Z, axis=0) == 0):
        raise DataError("zero-variance column within window")
    R = pairwise_corr(Z, corr_method)
    floor = None if corr_method == "pearson" else PSD_FLOOR

    C = np.zeros((K, K))
    L = np.zeros((K, K))
    r2 = np.zeros(K)
    for k in range(K):
        design = _design_layout(K, k, p)
        cols = design.columns
        try:
            eps = _weights_from_corr(R[np.ix_(cols, cols)], R[cols, k], floor)
        except NumericalError as exc:
            raise type(exc)(f"asset {names[k]}: {exc}") from exc
        src = np.asarray(design.sources)
        contemporaneous = np.asarray(design.lags) == 0
        C[k, src[contemporaneous]] = eps[contemporaneous]
        np.add.at(L[k], src[~contemporaneous], eps[~contemporaneous])
        r2[k] = eps.sum()
    return 100.0 * C, 100.0 * L, r2


def decompose_window(window: ReturnPanel, p: int = 1, corr_method: str = "pearson",
                     label=None) -> SpilloverDecomposition:
    """Spillover decomposition of one window of returns."""
    if corr_method not in CORR_METHODS:
        raise DataError(f"unknown correlation method {corr_method!r}")
    _check_window(window.T, window.K, p)
    if window.K < 2:
        raise DataError("connectedness needs at least two assets")
    order = _canonical_order(window.assets)
    inverse = np.argsort(order)
    returns = np.asarray(window.returns, dtype=float)[:, order]
    C, L, r2 = _decompose_canonical(returns, p, corr_method, [window.assets[i] for i in order])
    if label is None and window.T:
        label = window.dates[-1]
    return SpilloverDecomposition(
        window.assets,
        C[np.ix_(inverse, inverse)],
        L[np.ix_(inverse, inverse)],
        r2[inverse],
        label,
        {"algorithm": ALGORITHM, "lag_order": p, "corr_method": corr_method},
    )


def _indices_canonical(C: np.ndarray, L: np.ndarray, include_own_lag: bool):
    K = C.shape[0]
    off = ~np.eye(K, dtype=bool)
    Coff = np.where(off, C, 0.0)
    Loff = np.where(off, L, 0.0)

    tci_c = Coff.sum() / K
    tci_l = (L.sum() if include_own_lag else Loff.sum()) / K
    tci = tci_c + tci_l

    to_c = Coff.sum(axis=0)
    to_l = Loff.sum(axis=0)
    from_c = Coff.sum(axis=1)
    from_l = Loff.sum(axis=1)
    to = to_c + to_l
    from_ = from_c + from_l
    M = Coff + Loff
    return dict(
        tci=float(tci), tci_c=float(tci_c), tci_l=float(tci_l),
        to=to, to_c=to_c, to_l=to_l,
        from_=from_, from_c=from_c, from_l=from_l,
        net=to - from_, net_c=to_c - from_c, net_l=to_l - from_l,
        npdc=M - M.T, npdc_c=Coff - Coff.T, npdc_l=Loff - Loff.T,
    )


def directional_indices(spill: SpilloverDecomposition,
                        include_own_lag_in_tci: bool = False) -> DirectionalIndices:
    """TCI, TO, FROM, NET and NPDC, each with contemporaneous and lagged parts.

    TO and FROM never include own-lag terms. TCI excludes the diagonal of
    ``L`` unless ``include_own_lag_in_tci`` is set.
    """
    order = _canonical_order(spill.assets)
    inverse = np.argsort(order)
    ix = np.ix_(order, order)
    raw = _indices_canonical(np.asarray(spill.C)[ix], np.asarray(spill.L)[ix],
                             include_own_lag_in_tci)
    back = np.ix_(inverse, inverse)
    out = {}
    for key, val in raw.items():
        if isinstance(val, float):
            out[key] = val
        elif val.ndim == 1:
            out[key] = val[inverse]
        else:
            out[key] = val[back]
    return DirectionalIndices(spill.assets, include_own_lag=include_own_lag_in_tci, **out)


@dataclass
class WindowResult:
    end_date: np.datetime64
    decomposition: Optional[SpilloverDecomposition]
    indices: Optional[DirectionalIndices]
    error: Optional[str] = None

    @property
    def is_gap(self) -> bool:
        return self.decomposition is None


@dataclass
class RollingConnectedness:
    assets: tuple
    windows: list
    config: dict

    def __len__(self):
        return len(self.windows)

    @property
    def dates(self) -> np.ndarray:
        return np.array([w.end_date for w in self.windows], dtype="datetime64[D]")

    @property
    def valid(self) -> list:
        return [w for w in self.windows if not w.is_gap]

    @property
    def gaps(self) -> list:
        return [w for w in self.windows if w.is_gap]

    def series(self, name: str) -> np.ndarray:
        """Stack one index over windows; gaps are NaN.

        ``name`` is a :class:`DirectionalIndices` field, e.g. ``"tci"`` or
        ``"net_c"``.
        """
        template = None
        for w in self.windows:
            if not w.is_gap:
                template = np.asarray(getattr(w.indices, name), dtype=float)
                break
        if template is None:
            raise NumericalError("all windows are gaps")
        rows = []
        for w in self.windows:
            if w.is_gap:
                rows.append(np.full(template.shape, np.nan))
            else:
                rows.append(np.asarray(getattr(w.indices, name), dtype=float))
        return np.array(rows)

    def pci(self, variant: str = "total") -> list:
        """PCI matrix per window (``None`` for gaps)."""
        return [None if w.is_gap else pci_matrix(w.decomposition, variant) for w in self.windows]


def rolling_connectedness(panel: ReturnPanel, window_len: int = 200, step: int = 1, p: int = 1,
                          corr_method: str = "pearson",
                          include_own_lag_in_tci: bool = False) -> RollingConnectedness:
    """Decompose every window ``rows[t - window_len + 1 .. t]``, labelled by its end date.

    A window whose regressions fail becomes a gap record instead of
    aborting the pass.
    """
    if step < 1:
        raise DataError("step must be >= 1")
    if window_len > panel.T:
        raise DataError(f"window too short: panel has {panel.T} rows, window is {window_len}")
    _check_window(window_len, panel.K, p)
    if corr_method not in CORR_METHODS:
        raise DataError(f"unknown correlation method {corr_method!r}")

    windows = []
    for end in range(window_len - 1, panel.T, step):
        start = end - window_len + 1
        sub = panel.rows(start, end + 1)
        try:
            dec = decompose_window(sub, p, corr_method)
            idx = directional_indices(dec, include_own_lag_in_tci)
            windows.append(WindowResult(panel.dates[end], dec, idx))
        except (NumericalError, DataError) as exc:
            logger.debug("window ending %s is a gap: %s", panel.dates[end], exc)
            windows.append(WindowResult(panel.dates[end], None, None, str(exc)))
    n_gaps = sum(w.is_gap for w in windows)
    if n_gaps:
        logger.warning("%d of %d windows are gaps (first: %s)", n_gaps, len(windows),
                       next(w.error for w in windows if w.is_gap))
    config = {
        "window": window_len,
        "step": step,
        "lag_order": p,
        "corr_method": corr_method,
        "include_own_lag_in_tci": include_own_lag_in_tci,
        "algorithm": ALGORITHM,
    }
    return RollingConnectedness(panel.assets, windows, config)


def averaged_spillover(rolling, include_own_lag_in_tci: Optional[bool] = None):
    """Element-wise mean of the non-gap window decompositions and its indices."""
    windows = rolling.windows if isinstance(rolling, RollingConnectedness) else list(rolling)
    valid = [w for w in windows if not w.is_gap]
    if not valid:
        raise NumericalError("all windows are gaps")
    if include_own_lag_in_tci is None:
        include_own_lag_in_tci = bool(valid[0].indices.include_own_lag) if valid[0].indices else False
    first = valid[0].decomposition
    C = np.mean(np.stack([w.decomposition.C for w in valid]), axis=0)
    L = np.mean(np.stack([w.decomposition.L for w in valid]), axis=0)
    r2 = np.mean(np.stack([w.decomposition.r2 for w in valid]), axis=0)
    meta = dict(first.meta)
    meta["n_windows"] = len(valid)
    dec = SpilloverDecomposition(first.assets, C, L, r2, "average", meta)
    return dec, directional_indices(dec, include_own_lag_in_tci)


def pci_matrix(spill: SpilloverDecomposition, variant: str = "total") -> np.ndarray:
    """Pairwise connectedness matrix for the minimum-connectedness portfolio.

    Off-diagonal entries are the bilateral spillover mass
    ``M[i, j] + M[j, i]`` over 200 percentage points, clipped to
    ``[1e-6, 1]``; the diagonal is 1. ``variant`` picks ``M`` = ``C``,
    ``L`` (own lags ignored) or their sum.
    """
    C = np.asarray(spill.C, dtype=float)
    L = np.asarray(spill.L, dtype=float)
    if variant in ("total", "overall"):
        M = C + L
    elif variant in ("C", "c", "contemporaneous"):
        M = C
    elif variant in ("L", "l", "lagged"):
        M = L
    else:
        raise DataError(f"unknown PCI variant {variant!r}")
    pci = np.clip((M + M.T) / PCI_SCALE, PCI_FLOOR, 1.0)
    np.fill_diagonal(pci, 1.0)
    return pci
