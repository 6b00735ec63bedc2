"""Seeded synthetic data used by the test suite, the gallery and ``r2spill simulate``."""

from __future__ import annotations

import numpy as np

from .ingest import PricePanel, ReturnPanel

__all__ = [
    "business_days",
    "simulate_garch11",
    "simulate_ccc_garch",
    "simulate_var1",
    "planted_driver_panel",
    "synthetic_returns",
    "synthetic_prices",
    "FIXTURE_ASSETS",
    "FIXTURE_SEED",
]

FIXTURE_ASSETS = ("ETF1", "ETF2", "TOK1", "TOK2", "TOK3", "TOK4", "TOK5", "GBOND", "CLEAN")
FIXTURE_SEED = 20210525


def business_days(n: int, start: str = "2021-05-25") -> np.ndarray:
    first = np.busday_offset(np.datetime64(start, "D"), 0, roll="forward")
    return np.busday_offset(first, np.arange(n))


def simulate_garch11(n: int, omega: float, alpha: float, beta: float, rng,
                     burn: int = 500) -> np.ndarray:
    """Zero-mean GARCH(1,1) path with Gaussian innovations."""
    z = rng.standard_normal(n + burn)
    h = omega / (1.0 - alpha - beta)
    out = np.empty(n + burn)
    for t in range(n + burn):
        out[t] = np.sqrt(h) * z[t]
        h = omega + alpha * out[t] ** 2 + beta * h
    return out[burn:]


def simulate_ccc_garch(n: int, corr, rng, omega: float = 0.05, alpha: float = 0.08,
                       beta: float = 0.90, burn: int = 500) -> np.ndarray:
    """GARCH(1,1) margins with a constant correlation matrix between innovations."""
    corr = np.asarray(corr, dtype=float)
    K = corr.shape[0]
    z = rng.standard_normal((n + burn, K)) @ np.linalg.cholesky(corr).T
    h = np.full(K, omega / (1.0 - alpha - beta))
    out = np.empty((n + burn, K))
    for t in range(n + burn):
        out[t] = np.sqrt(h) * z[t]
        h = omega + alpha * out[t] ** 2 + beta * h
    return out[burn:]


def simulate_var1(n: int, A, rng, impact=None, burn: int = 200) -> np.ndarray:
    """``x_t = A x_{t-1} + B u_t`` with standard normal ``u_t``."""
    A = np.asarray(A, dtype=float)
    K = A.shape[0]
    B = np.eye(K) if impact is None else np.asarray(impact, dtype=float)
    u = rng.standard_normal((n + burn, K)) @ B.T
    x = np.zeros((n + burn, K))
    for t in range(1, n + burn):
        x[t] = A @ x[t - 1] + u[t]
    return x[burn:]


def planted_driver_panel(seed: int, n: int = 1000) -> ReturnPanel:
    """Three-asset system in which asset 1 drives assets 2 and 3.

    Asset 1 loads contemporaneously onto 2 and 3 and also Granger-causes
    both; 2 and 3 have no effect on 1.
    """
    rng = np.random.default_rng(seed)
    A = np.array([[0.0, 0.0, 0.0],
                  [0.4, 0.0, 0.0],
                  [0.4, 0.0, 0.0]])
    B = np.array([[1.0, 0.0, 0.0],
                  [0.8, 1.0, 0.0],
                  [0.8, 0.0, 1.0]])
    x = 0.01 * simulate_var1(n, A, rng, B)
    return ReturnPanel(business_days(n), ("A1", "A2", "A3"), x)


def synthetic_returns(seed: int = FIXTURE_SEED, n: int = 1000) -> ReturnPanel:
    """Nine-asset return panel loosely shaped like an ETF / token / green-asset universe.

    Three groups share group factors; a global factor with a slowly cycling
    loading makes total connectedness vary over time; ETF1 and CLEAN lead
    the other assets by one day; volatilities differ by group and follow a
    GARCH-like recursion.
    """
    rng = np.random.default_rng(seed)
    K = len(FIXTURE_ASSETS)
    groups = np.array([0, 0, 1, 1, 1, 1, 1, 2, 2])
    group_load = np.array([0.9, 0.85, 0.7, 0.6, 0.65, 0.55, 0.6, 0.5, 0.6])
    vol = np.array([0.013, 0.014, 0.045, 0.050, 0.048, 0.052, 0.055, 0.004, 0.015])

    t = np.arange(n)
    global_load = 0.15 + 0.75 * (0.5 + 0.5 * np.sin(2.0 * np.pi * t / 420.0))
    g = rng.standard_normal(n)
    f = rng.standard_normal((n, 3))
    e = rng.standard_normal((n, K))
    common = global_load[:, None] * g[:, None] + group_load * f[:, groups]
    z = (common + e) / np.sqrt(1.0 + global_load[:, None] ** 2 + group_load**2)

    # one-day lead of ETF1 and CLEAN
    lead = np.zeros((K, K))
    lead[2:8, 0] = 0.25
    lead[2:8, 8] = 0.15
    h = np.ones(K)
    x = np.zeros((n, K))
    for s in range(n):
        shock = np.sqrt(h) * z[s]
        x[s] = shock + (lead @ x[s - 1] if s else 0.0)
        h = 0.05 + 0.08 * shock**2 + 0.87 * h
    return ReturnPanel(business_days(n, "2021-05-26"), FIXTURE_ASSETS, x * vol)


def synthetic_prices(seed: int = FIXTURE_SEED, n: int = 1000) -> PricePanel:
    """Price levels whose log returns are :func:`synthetic_returns` (``n + 1`` rows)."""
    r = synthetic_returns(seed, n)
    start = np.array([55.0, 40.0, 1.2, 30.0, 8.0, 4.5, 3.0, 100.0, 120.0])
    levels = np.vstack([np.log(start), np.log(start) + np.cumsum(r.returns, axis=0)])
    dates = np.concatenate([[np.busday_offset(r.dates[0], -1)], r.dates])
    return PricePanel(dates, r.assets, np.round(np.exp(levels), 8))
