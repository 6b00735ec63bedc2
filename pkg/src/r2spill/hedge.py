"""Bilateral hedge ratios, two-asset portfolio weights and hedging effectiveness."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations

import numpy as np
from scipy import stats as sps

from .condcov import ConditionalCovariances
from .errors import DataError, NumericalError
from .ingest import ReturnPanel

__all__ = [
    "HedgeSummary",
    "hedge_ratio_series",
    "bilateral_weight_series",
    "clamp_weight",
    "hedged_returns",
    "paired_portfolio_returns",
    "hedging_effectiveness",
    "summarize",
    "hedge_table",
]


def _index(cov: ConditionalCovariances, asset) -> int:
    if isinstance(asset, (int, np.integer)):
        return int(asset)
    return cov.assets.index(asset)


def hedge_ratio_series(cov: ConditionalCovariances, i, j) -> np.ndarray:
    """``beta_ij,t = S_ij,t / S_jj,t``: short ``beta`` of j per unit long i."""
    i, j = _index(cov, i), _index(cov, j)
    sjj = cov.sigmas[:, j, j]
    bad = np.flatnonzero(sjj <= 0)
    if bad.size:
        raise NumericalError(f"zero conditional variance of asset {j} at {cov.dates[bad[0]]}")
    return cov.sigmas[:, i, j] / sjj


def clamp_weight(w):
    """Restrict raw bilateral weights to ``[0, 1]``."""
    return np.clip(w, 0.0, 1.0)


def bilateral_weight_series(cov: ConditionalCovariances, i, j, clamp: bool = True) -> np.ndarray:
    """Share of asset i in the minimum-variance i/j portfolio.

    ``w = (S_jj - S_ij) / (S_ii - 2 S_ij + S_jj)`` (Kroner and Ng), clamped
    to ``[0, 1]`` unless ``clamp`` is false. The ``S_ii - S_ij`` numerator
    is the share of j, i.e. the weight of the reversed pair.
    """
    i, j = _index(cov, i), _index(cov, j)
    if i == j:
        raise DataError("bilateral weights need two distinct assets")
    sii = cov.sigmas[:, i, i]
    sij = cov.sigmas[:, i, j]
    sjj = cov.sigmas[:, j, j]
    den = sii - 2.0 * sij + sjj
    bad = np.flatnonzero(den <= 0)
    if bad.size:
        raise NumericalError(f"non-positive bilateral variance denominator at {cov.dates[bad[0]]}")
    w = (sjj - sij) / den
    return clamp_weight(w) if clamp else w


def _aligned_returns(panel: ReturnPanel, dates: np.ndarray, i, j):
    dates = np.asarray(dates, dtype="datetime64[D]")
    pos = np.searchsorted(panel.dates, dates)
    if np.any(pos >= panel.T) or np.any(panel.dates[np.minimum(pos, panel.T - 1)] != dates):
        raise DataError("date misalignment between series and return panel")
    i = panel.assets.index(i) if isinstance(i, str) else int(i)
    j = panel.assets.index(j) if isinstance(j, str) else int(j)
    return panel.returns[pos, i], panel.returns[pos, j]


def hedged_returns(panel: ReturnPanel, beta, i, j, dates=None) -> tuple[np.ndarray, np.ndarray]:
    """Long i, short ``beta`` of j, with yesterday's ratio: ``r_i,t - beta_{t-1} r_j,t``.

    ``beta`` is aligned to ``dates`` (default: the panel dates). Returns
    ``(dates[1:], hedged)``.
    """
    dates = panel.dates if dates is None else np.asarray(dates, dtype="datetime64[D]")
    beta = np.asarray(beta, dtype=float)
    if beta.shape != dates.shape:
        raise DataError("date misalignment: hedge ratio series and dates differ in length")
    ri, rj = _aligned_returns(panel, dates, i, j)
    return dates[1:], ri[1:] - beta[:-1] * rj[1:]


def paired_portfolio_returns(panel: ReturnPanel, w, i, j, dates=None) -> tuple[np.ndarray, np.ndarray]:
    """Two-asset portfolio with yesterday's weight: ``w_{t-1} r_i,t + (1 - w_{t-1}) r_j,t``."""
    dates = panel.dates if dates is None else np.asarray(dates, dtype="datetime64[D]")
    w = np.asarray(w, dtype=float)
    if w.shape != dates.shape:
        raise DataError("date misalignment: weight series and dates differ in length")
    ri, rj = _aligned_returns(panel, dates, i, j)
    return dates[1:], w[:-1] * ri[1:] + (1.0 - w[:-1]) * rj[1:]


def hedging_effectiveness(portfolio, reference) -> tuple[float, float]:
    """``HE = 1 - var(r_p) / var(r_i)`` and a one-sided F-test p-value.

    The test has alternative ``var(r_i) > var(r_p)`` and ``(n-1, n-1)``
    degrees of freedom.
    """
    rp = np.asarray(portfolio, dtype=float).ravel()
    ri = np.asarray(reference, dtype=float).ravel()
    if rp.size != ri.size:
        raise DataError("portfolio and reference series differ in length")
    if rp.size < 30:
        raise DataError(f"need at least 30 observations, got {rp.size}")
    vi = ri.var(ddof=1)
    if vi <= 0:
        raise DataError("zero reference variance")
    vp = rp.var(ddof=1)
    he = 1.0 - vp / vi
    n = rp.size - 1
    if vp == 0:
        return float(he), 0.0
    return float(he), float(sps.f.sf(vi / vp, n, n))


def summarize(x) -> dict:
    x = np.asarray(x, dtype=float)
    return {
        "Mean": float(x.mean()),
        "Std.Dev.": float(x.std(ddof=1)) if x.size > 1 else 0.0,
        "5%": float(np.quantile(x, 0.05)),
        "95%": float(np.quantile(x, 0.95)),
    }


@dataclass
class HedgeSummary:
    pair: tuple
    ratio: np.ndarray
    weight: np.ndarray
    ratio_stats: dict
    weight_stats: dict
    he_ratio: float
    pvalue_ratio: float
    he_weight: float
    pvalue_weight: float


def hedge_table(panel: ReturnPanel, cov: ConditionalCovariances, pairs=None) -> list[HedgeSummary]:
    """Hedge-ratio and bilateral-weight summaries for every ordered pair.

    Summary statistics describe the ratio and weight series themselves;
    HE compares the hedged position (ratio variant) or the two-asset
    portfolio (weight variant) with holding asset i alone over the same
    dates.
    """
    if pairs is None:
        pairs = list(permutations(cov.assets, 2))
    out = []
    for a, b in pairs:
        beta = hedge_ratio_series(cov, a, b)
        w = bilateral_weight_series(cov, a, b)
        dates, hedged = hedged_returns(panel, beta, a, b, cov.dates)
        _, paired = paired_portfolio_returns(panel, w, a, b, cov.dates)
        ri, _ = _aligned_returns(panel, dates, a, b)
        he_r, p_r = hedging_effectiveness(hedged, ri)
        he_w, p_w = hedging_effectiveness(paired, ri)
        out.append(HedgeSummary((a, b), beta, w, summarize(beta), summarize(w),
                                he_r, p_r, he_w, p_w))
    return out
