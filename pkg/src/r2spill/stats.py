"""Descriptive statistics, normality and unit-root tests, correlation matrices.

Skewness and excess kurtosis are the moment-form (biased) estimators
``m3 / m2**1.5`` and ``m4 / m2**2 - 3``. The DF-GLS test is the
constant-only variant with ``c_bar = -7``.
"""

from __future__ import annotations

import math
from functools import lru_cache
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import stats as sps

from .errors import DataError, SingularMatrixError
from .ingest import ReturnPanel

__all__ = [
    "StatsRecord",
    "CorrMatrix",
    "describe",
    "jarque_bera",
    "jb_from_moments",
    "ers_dfgls",
    "schwert_lag",
    "correlation_matrix",
    "pairwise_corr",
    "kendall_tau_matrix",
    "ERS_CRITICAL_VALUES",
    "CORR_METHODS",
]

CORR_METHODS = ("pearson", "spearman", "kendall")

# DF-GLS, constant only (asymptotic)
ERS_CRITICAL_VALUES = {"1%": -2.58, "5%": -1.95, "10%": -1.62}


@dataclass
class StatsRecord:
    mean: float
    variance: float
    skewness: float
    excess_kurtosis: float
    n: int
    jb_stat: float = math.nan
    jb_pvalue: float = math.nan
    ers_stat: float = math.nan
    ers_pvalue_band: Optional[str] = None
    skew_pvalue: float = math.nan
    kurt_pvalue: float = math.nan
    meta: dict = field(default_factory=dict)


@dataclass
class CorrMatrix:
    method: str
    assets: tuple
    values: np.ndarray
    pvalues: np.ndarray
    threshold: float = 0.10

    @property
    def mask(self) -> np.ndarray:
        """True where a coefficient fails the significance threshold."""
        return self.pvalues >= self.threshold


def _clean(series, min_n: int) -> np.ndarray:
    x = np.asarray(series, dtype=float).ravel()
    if x.size < min_n:
        raise DataError(f"insufficient observations: need at least {min_n}, got {x.size}")
    if not np.all(np.isfinite(x)):
        raise DataError("series contains non-finite values")
    return x


def _moments(x: np.ndarray) -> tuple[float, float, float]:
    d = x - x.mean()
    m2 = np.mean(d**2)
    m3 = np.mean(d**3)
    m4 = np.mean(d**4)
    return m2, m3, m4


def describe(series) -> StatsRecord:
    """Sample moments of one return series.

    Skewness and excess kurtosis are NaN for a constant series, where they
    are undefined.
    """
    x = _clean(series, 4)
    m2, m3, m4 = _moments(x)
    if np.ptp(x) == 0.0:
        m2 = 0.0  # exactly constant; avoid round-off noise in the mean
    if m2 == 0.0:
        skew = kurt = math.nan
    else:
        skew = m3 / m2**1.5
        kurt = m4 / m2**2 - 3.0
    rec = StatsRecord(
        mean=float(x.mean()),
        variance=float(x.var(ddof=1)) if m2 else 0.0,
        skewness=float(skew),
        excess_kurtosis=float(kurt),
        n=int(x.size),
    )
    rec.meta["moment_estimator"] = "moment-form (biased) skewness and excess kurtosis"
    return rec


def jarque_bera(series) -> tuple[float, float]:
    """Jarque-Bera statistic ``n (S^2/6 + K^2/24)`` with its chi-square(2) p-value."""
    x = _clean(series, 8)
    m2, m3, m4 = _moments(x)
    if m2 == 0.0 or np.ptp(x) == 0.0:
        raise DataError("zero variance: Jarque-Bera undefined")
    s = m3 / m2**1.5
    k = m4 / m2**2 - 3.0
    return jb_from_moments(x.size, s, k)


def jb_from_moments(n: int, skew: float, exkurt: float) -> tuple[float, float]:
    jb = n * (skew**2 / 6.0 + exkurt**2 / 24.0)
    return float(jb), float(sps.chi2.sf(jb, 2))


def schwert_lag(n: int) -> int:
    return int(math.floor(12.0 * (n / 100.0) ** 0.25))


def _gls_demean(y: np.ndarray, cbar: float = -7.0) -> np.ndarray:
    n = y.size
    a = 1.0 + cbar / n
    yq = np.empty(n)
    yq[0] = y[0]
    yq[1:] = y[1:] - a * y[:-1]
    zq = np.full(n, 1.0 - a)
    zq[0] = 1.0
    mu = (zq @ yq) / (zq @ zq)
    return y - mu


def ers_dfgls(series, lag_order="auto") -> tuple[float, Optional[str]]:
    """DF-GLS unit-root statistic (constant only) and its significance band.

    The series is GLS-demeaned with ``c_bar = -7`` and an ADF regression
    without deterministic terms is run on the result. The band is the
    smallest of ``"1%"``, ``"5%"``, ``"10%"`` whose critical value the
    statistic falls below, or ``None``.

    ``lag_order="auto"`` uses the Schwert rule ``floor(12 (n/100)^0.25)``.
    """
    y = _clean(series, 50)
    n = y.size
    p = schwert_lag(n) if lag_order in (None, "auto") else int(lag_order)
    if p < 0:
        raise DataError("lag order must be non-negative")
    yd = _gls_demean(y)
    dy = np.diff(yd)
    # rows t = p .. n-2 of dy
    rows = dy.size - p
    if rows <= p + 1:
        raise DataError(f"series too short for {p} lags")
    cols = [yd[p:-1]]
    for j in range(1, p + 1):
        cols.append(dy[p - j : dy.size - j])
    X = np.column_stack(cols)
    target = dy[p:]

    scale = np.sqrt(np.sum(X**2, axis=0))
    if np.any(scale < 1e-12 * max(1.0, np.abs(y).max())):
        raise SingularMatrixError("singular regression in DF-GLS")
    Xs = X / scale
    xtx = Xs.T @ Xs
    if np.linalg.cond(xtx) > 1e12:
        raise SingularMatrixError("singular regression in DF-GLS")
    beta, *_ = np.linalg.lstsq(Xs, target, rcond=None)
    resid = target - Xs @ beta
    dof = rows - X.shape[1]
    s2 = resid @ resid / dof
    if s2 <= 0:
        raise SingularMatrixError("singular regression in DF-GLS: zero residual variance")
    se = math.sqrt(s2 * np.linalg.inv(xtx)[0, 0])
    tstat = float(beta[0] / se)
    band = None
    for label in ("1%", "5%", "10%"):
        if tstat < ERS_CRITICAL_VALUES[label]:
            band = label
            break
    return tstat, band


def _rank_columns(X: np.ndarray) -> np.ndarray:
    return sps.rankdata(X, axis=0, method="average")


def _pearson_matrix(X: np.ndarray) -> np.ndarray:
    Z = X - X.mean(axis=0)
    norms = np.sqrt(np.sum(Z**2, axis=0))
    if np.any(norms == 0):
        raise DataError("zero-variance column")
    Z = Z / norms
    R = Z.T @ Z
    R = (R + R.T) / 2.0
    np.fill_diagonal(R, 1.0)
    return np.clip(R, -1.0, 1.0)


@lru_cache(maxsize=8)
def _pair_indices(n: int):
    return np.triu_indices(n, k=1)


def kendall_tau_matrix(X: np.ndarray) -> np.ndarray:
    """Kendall tau-b between all column pairs.

    tau-b equals the cosine similarity of the pairwise sign vectors
    ``sign(x_i - x_j)`` over ``i < j``, which handles ties directly.
    """
    X = np.asarray(X, dtype=float)
    iu, ju = _pair_indices(X.shape[0])
    S = np.sign(X[ju] - X[iu])
    norms = np.sqrt(np.sum(S * S, axis=0))
    if np.any(norms == 0):
        raise DataError("zero-variance column")
    S /= norms
    R = S.T @ S
    R = (R + R.T) / 2.0
    np.fill_diagonal(R, 1.0)
    return np.clip(R, -1.0, 1.0)


def pairwise_corr(X: np.ndarray, method: str = "pearson") -> np.ndarray:
    """Correlation matrix of the columns of ``X`` under ``method``."""
    X = np.asarray(X, dtype=float)
    if method == "pearson":
        return _pearson_matrix(X)
    if method == "spearman":
        return _pearson_matrix(_rank_columns(X))
    if method == "kendall":
        return kendall_tau_matrix(X)
    raise DataError(f"unknown correlation method {method!r}; expected one of {CORR_METHODS}")


def _corr_pvalues(R: np.ndarray, n: int, method: str) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        if method == "kendall":
            z = 3.0 * R * np.sqrt(n * (n - 1.0)) / np.sqrt(2.0 * (2.0 * n + 5.0))
            p = 2.0 * sps.norm.sf(np.abs(z))
        else:
            denom = np.clip(1.0 - R**2, 0.0, None)
            t = np.where(denom > 0, R * np.sqrt((n - 2.0) / denom), np.sign(R) * np.inf)
            p = 2.0 * sps.t.sf(np.abs(t), n - 2)
    p = (p + p.T) / 2.0
    np.fill_diagonal(p, 0.0)
    return np.clip(p, 0.0, 1.0)


def correlation_matrix(panel: ReturnPanel, method: str = "pearson",
                       threshold: float = 0.10) -> CorrMatrix:
    """Pairwise correlations with approximate two-sided p-values.

    Pearson and Spearman p-values use the t approximation with n-2 degrees
    of freedom; Kendall uses the large-sample normal approximation.
    """
    if panel.T < 5:
        raise DataError("correlation_matrix needs at least 5 observations")
    X = np.asarray(panel.returns, dtype=float)
    zero = np.flatnonzero(np.ptp(X, axis=0) == 0)
    if zero.size:
        raise DataError(f"zero-variance column: {panel.assets[zero[0]]}")
    R = pairwise_corr(X, method)
    return CorrMatrix(method, panel.assets, R, _corr_pvalues(R, panel.T, method), threshold)


def descriptive_table(panel: ReturnPanel, ers_lag="auto") -> dict[str, StatsRecord]:
    """Full per-asset record: moments, JB, DF-GLS and moment significance.

    Skewness and kurtosis significance use D'Agostino's skewness test and
    the Anscombe-Glynn kurtosis test.
    """
    out = {}
    for k, name in enumerate(panel.assets):
        x = panel.returns[:, k]
        rec = describe(x)
        rec.jb_stat, rec.jb_pvalue = jarque_bera(x)
        rec.ers_stat, rec.ers_pvalue_band = ers_dfgls(x, ers_lag)
        rec.skew_pvalue = float(sps.skewtest(x).pvalue)
        rec.kurt_pvalue = float(sps.kurtosistest(x).pvalue)
        rec.meta["ers_lag"] = schwert_lag(x.size) if ers_lag in (None, "auto") else int(ers_lag)
        out[name] = rec
    return out
