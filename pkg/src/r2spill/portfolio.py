"""Minimum variance, minimum correlation and minimum connectedness portfolios.

All three share one closed form, ``w = M^-1 1 / (1' M^-1 1)``, applied to
the conditional covariance (MVP), the conditional correlation (MCP) or the
pairwise connectedness matrix (MCoP and its contemporaneous / lagged
variants). Long-only mode clips negative weights to zero and renormalizes
once.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .condcov import ConditionalCovariances
from .connectedness import RollingConnectedness, pci_matrix
from .errors import DataError, NumericalError, SingularMatrixError
from .hedge import hedging_effectiveness, summarize
from .ingest import ReturnPanel

__all__ = [
    "STRATEGIES",
    "WeightTrajectory",
    "PortfolioRun",
    "PerformanceReport",
    "mvp_weights",
    "mcp_weights",
    "mcop_weights",
    "min_form_weights",
    "strategy_inputs",
    "run_strategy",
    "performance",
    "portfolio_he",
    "weight_table",
]

STRATEGIES = ("MVP", "MCP", "MCoP", "MCoP_C", "MCoP_L")
MCOP_VARIANTS = {"MCoP": "total", "MCoP_C": "C", "MCoP_L": "L"}

RIDGE = 1e-10
COND_LIMIT = 1e12
TRADING_DAYS = 252


def _solve_ones(M: np.ndarray) -> np.ndarray:
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DataError(f"expected a square matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise DataError("matrix has non-finite entries")
    K = M.shape[0]
    ones = np.ones(K)
    for attempt in range(2):
        if np.linalg.cond(M) <= COND_LIMIT:
            # equal row sums make 1 an eigenvector; skip LU so symmetric inputs stay symmetric
            sums = {math.fsum(row) for row in M}
            if len(sums) == 1:
                return ones / sums.pop()
            return np.linalg.solve(M, ones)
        if attempt == 0:
            M = M + RIDGE * np.eye(K)
    raise SingularMatrixError("matrix singular after ridge guard")


def _long_only(w: np.ndarray) -> np.ndarray:
    if np.any(w < 0):
        w = np.clip(w, 0.0, None)
        total = w.sum()
        if total <= 0:
            raise NumericalError("no positive weights left after clipping")
        w = w / total
    return w


def min_form_weights(M, long_only: bool = True) -> np.ndarray:
    """``M^-1 1 / (1' M^-1 1)``, optionally clipped to long-only."""
    x = _solve_ones(M)
    total = x.sum()
    if total == 0 or not math.isfinite(total):
        raise SingularMatrixError("1' M^-1 1 is zero")
    w = x / total
    return _long_only(w) if long_only else w


def _check_symmetric(M: np.ndarray, what: str):
    M = np.asarray(M, dtype=float)
    scale = max(1.0, np.abs(M).max(initial=0.0))
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DataError(f"{what} must be square")
    if np.abs(M - M.T).max(initial=0.0) > 1e-10 * scale:
        raise DataError(f"{what} must be symmetric")
    return M


def mvp_weights(sigma, long_only: bool = True) -> np.ndarray:
    """Minimum variance weights from a covariance matrix."""
    return min_form_weights(_check_symmetric(sigma, "covariance"), long_only)


def correlation_from_cov(sigma) -> np.ndarray:
    sigma = np.asarray(sigma, dtype=float)
    sd = np.sqrt(np.diag(sigma))
    if np.any(sd <= 0):
        raise DataError("zero variance on the covariance diagonal")
    R = sigma / np.outer(sd, sd)
    R = (R + R.T) / 2.0
    np.fill_diagonal(R, 1.0)
    return R


def mcp_weights(sigma, long_only: bool = True) -> np.ndarray:
    """Minimum correlation weights: the closed form applied to ``diag(S)^-1/2 S diag(S)^-1/2``."""
    return min_form_weights(correlation_from_cov(_check_symmetric(sigma, "covariance")), long_only)


def mcop_weights(pci, long_only: bool = True) -> np.ndarray:
    """Minimum connectedness weights from a pairwise connectedness matrix."""
    pci = _check_symmetric(pci, "PCI")
    if not np.allclose(np.diag(pci), 1.0):
        raise DataError("PCI must have a unit diagonal")
    if np.any(pci < 0) or np.any(pci > 1):
        raise DataError("PCI entries must lie in [0, 1]")
    return min_form_weights(pci, long_only)


@dataclass
class WeightTrajectory:
    strategy: str
    dates: np.ndarray
    assets: tuple
    weights: np.ndarray
    long_only: bool = True


@dataclass
class PortfolioRun:
    trajectory: WeightTrajectory
    dates: np.ndarray
    returns: np.ndarray
    carried: list = field(default_factory=list)

    @property
    def strategy(self) -> str:
        return self.trajectory.strategy


def strategy_inputs(strategy: str, cov: Optional[ConditionalCovariances] = None,
                    rolling: Optional[RollingConnectedness] = None):
    """Per-date matrices a strategy consumes, as ``(dates, list of matrix or None)``."""
    if strategy in ("MVP", "MCP"):
        if cov is None:
            raise DataError(f"{strategy} needs conditional covariances")
        return cov.dates, list(cov.sigmas)
    if strategy in MCOP_VARIANTS:
        if rolling is None:
            raise DataError(f"{strategy} needs rolling connectedness results")
        return rolling.dates, rolling.pci(MCOP_VARIANTS[strategy])
    raise DataError(f"unknown strategy {strategy!r}; expected one of {STRATEGIES}")


_SOLVERS = {"MVP": mvp_weights, "MCP": mcp_weights, "MCoP": mcop_weights,
            "MCoP_C": mcop_weights, "MCoP_L": mcop_weights}


def run_strategy(panel: ReturnPanel, dates, matrices: Sequence, strategy: str,
                 long_only: bool = True) -> PortfolioRun:
    """Rebalance daily and realize returns with the previous day's weights.

    ``matrices[n]`` (covariance for MVP/MCP, PCI for the MCoP family) is the
    information available at the close of ``dates[n]``. ``None`` entries
    and failed solves carry the previous weights forward; leading failures
    are dropped. The first date has no realized return.
    """
    if strategy not in _SOLVERS:
        raise DataError(f"unknown strategy {strategy!r}; expected one of {STRATEGIES}")
    dates = np.asarray(dates, dtype="datetime64[D]")
    if len(matrices) != dates.size:
        raise DataError("dates and matrices differ in length")
    solve = _SOLVERS[strategy]
    K = panel.K

    kept_dates, rows, carried = [], [], []
    prev = None
    for d, M in zip(dates, matrices):
        w = None
        if K == 1:
            w = np.ones(1)
        elif M is not None:
            try:
                w = solve(M, long_only)
            except (NumericalError, DataError):
                w = None
        if w is None:
            if prev is None:
                continue
            w = prev
            carried.append(d)
        kept_dates.append(d)
        rows.append(w)
        prev = w
    if len(rows) < 2:
        raise NumericalError(f"{strategy}: fewer than two dates with valid weights")

    wdates = np.array(kept_dates, dtype="datetime64[D]")
    W = np.vstack(rows)
    pos = np.searchsorted(panel.dates, wdates)
    if np.any(pos >= panel.T) or np.any(panel.dates[np.minimum(pos, panel.T - 1)] != wdates):
        raise DataError("strategy dates are not all in the return panel")
    # realized at each panel date after the first weight date, with the latest prior weights
    first = pos[0]
    rdates = panel.dates[first + 1:]
    which = np.searchsorted(wdates, rdates, side="left") - 1
    realized = np.einsum("tk,tk->t", W[which], panel.returns[first + 1:])
    traj = WeightTrajectory(strategy, wdates, panel.assets, W, long_only)
    return PortfolioRun(traj, rdates, realized, carried)


@dataclass
class PerformanceReport:
    mean: float
    std: float
    sharpe_std: float
    sharpe_var: float
    sharpe_cvar: float
    var: float
    cvar: float
    alpha: float
    annualized: bool
    cumulative: np.ndarray
    he: dict = field(default_factory=dict)


def performance(returns, alpha: float = 0.05, annualize: bool = True,
                periods: int = TRADING_DAYS) -> PerformanceReport:
    """Return, risk and three reward-to-risk ratios with a zero risk-free rate.

    VaR and CVaR are historical at level ``alpha``. The tail ratios scale
    the daily tail loss by ``sqrt(periods)`` like the standard deviation.
    Undefined ratios (zero volatility, non-positive VaR) are NaN. The
    cumulative series is the running sum of log returns, starting at 0.
    """
    r = np.asarray(returns, dtype=float).ravel()
    if r.size < 30:
        raise DataError(f"need at least 30 returns, got {r.size}")
    if not 0.0 < alpha < 0.5:
        raise DataError(f"alpha must lie in (0, 0.5), got {alpha}")
    f = float(periods) if annualize else 1.0
    mean = f * r.mean()
    sd_daily = 0.0 if np.ptp(r) == 0 else r.std(ddof=1)
    std = math.sqrt(f) * sd_daily
    sharpe_std = mean / std if std > 0 else math.nan
    q = np.quantile(r, alpha)
    var = -q
    cvar = -r[r <= q].mean()
    if var > 0:
        sharpe_var = mean / (math.sqrt(f) * var)
        sharpe_cvar = mean / (math.sqrt(f) * cvar)
    else:
        sharpe_var = sharpe_cvar = math.nan
    return PerformanceReport(float(mean), float(std), float(sharpe_std), float(sharpe_var),
                             float(sharpe_cvar), float(var), float(cvar), alpha, annualize,
                             np.concatenate([[0.0], np.cumsum(r)]))


def portfolio_he(run_or_returns, panel: ReturnPanel, dates=None) -> dict:
    """Per-asset hedging effectiveness of a portfolio against holding each asset alone."""
    if isinstance(run_or_returns, PortfolioRun):
        rp, dates = run_or_returns.returns, run_or_returns.dates
    else:
        rp = np.asarray(run_or_returns, dtype=float)
        dates = panel.dates if dates is None else np.asarray(dates, dtype="datetime64[D]")
    pos = np.searchsorted(panel.dates, dates)
    if rp.size != dates.size or np.any(pos >= panel.T) or \
            np.any(panel.dates[np.minimum(pos, panel.T - 1)] != dates):
        raise DataError("portfolio returns are not aligned with the panel")
    out = {}
    for k, name in enumerate(panel.assets):
        ri = panel.returns[pos, k]
        if ri.var() == 0:
            raise DataError(f"zero variance for asset {name}")
        out[name] = hedging_effectiveness(rp, ri)
    return out


def weight_table(run: PortfolioRun, panel: ReturnPanel) -> list[dict]:
    """Rows of weight summary statistics plus HE and p-value, one per asset."""
    he = portfolio_he(run, panel)
    rows = []
    for k, name in enumerate(run.trajectory.assets):
        row = {"Strategy": run.strategy, "Asset": name}
        row.update(summarize(run.trajectory.weights[:, k]))
        row["HE"], row["p-value"] = he[name]
        rows.append(row)
    return rows
