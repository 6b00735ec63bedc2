"""Time-varying covariance matrices: EWMA (RiskMetrics) and two-stage DCC-GARCH(1,1)."""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize
from scipy.signal import lfilter

from .errors import ConvergenceWarning, DataError, NumericalError
from .ingest import ReturnPanel

__all__ = [
    "ConditionalCovariances",
    "GarchParams",
    "Garch11Fit",
    "DCCFit",
    "ewma_covariance",
    "garch11_fit",
    "garch11_variance",
    "dcc_fit",
    "dcc_correlations",
]

logger = logging.getLogger(__name__)

SYMMETRY_TOL = 1e-12
PSD_TOL = -1e-10


@dataclass
class ConditionalCovariances:
    """Sequence of K x K conditional covariance matrices, one per date."""

    dates: np.ndarray
    assets: tuple
    sigmas: np.ndarray
    method: str
    params: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)

    def __len__(self):
        return self.sigmas.shape[0]

    @property
    def K(self) -> int:
        return self.sigmas.shape[1]

    def variances(self) -> np.ndarray:
        return np.diagonal(self.sigmas, axis1=1, axis2=2).copy()

    def correlations(self) -> np.ndarray:
        """``diag(S)^-1/2 S diag(S)^-1/2`` for every date, with an exact unit diagonal."""
        sd = np.sqrt(self.variances())
        if np.any(sd <= 0):
            raise NumericalError("zero conditional variance")
        R = self.sigmas / sd[:, :, None] / sd[:, None, :]
        R = (R + np.swapaxes(R, 1, 2)) / 2.0
        idx = np.arange(self.K)
        R[:, idx, idx] = 1.0
        return R

    def validate(self) -> None:
        """Raise :class:`NumericalError` unless every matrix is symmetric and PSD."""
        asym = np.abs(self.sigmas - np.swapaxes(self.sigmas, 1, 2)).max(initial=0.0)
        if asym > SYMMETRY_TOL:
            raise NumericalError(f"covariance matrix asymmetric by {asym:.3g}")
        if len(self):
            lo = np.linalg.eigvalsh(self.sigmas).min()
            if lo < PSD_TOL:
                raise NumericalError(f"covariance matrix not PSD (min eigenvalue {lo:.3g})")

    def at(self, date) -> np.ndarray:
        i = np.searchsorted(self.dates, np.datetime64(date, "D"))
        if i >= len(self.dates) or self.dates[i] != np.datetime64(date, "D"):
            raise KeyError(date)
        return self.sigmas[i]

    def metadata(self) -> dict:
        return {"method": self.method, "params": self.params, "warnings": list(self.warnings)}


def ewma_covariance(panel: ReturnPanel, lam: float = 0.94, burn_in: int = 60) -> ConditionalCovariances:
    """RiskMetrics recursion ``S_t = lam S_{t-1} + (1 - lam) r_t r_t'``.

    ``S_0`` is the sample covariance of the first ``burn_in`` rows; the
    output starts at row ``burn_in`` and includes that row's return.
    """
    if not 0.0 < lam < 1.0:
        raise DataError(f"lambda must lie in (0, 1), got {lam}")
    K = panel.K
    if burn_in < K + 1:
        raise DataError(f"burn_in must be >= K + 1 = {K + 1}")
    if panel.T <= burn_in:
        raise DataError(f"panel has {panel.T} rows; burn-in of {burn_in} leaves nothing")
    r = np.asarray(panel.returns, dtype=float)
    s0 = np.atleast_2d(np.cov(r[:burn_in].T, ddof=1))
    notes = []
    if np.linalg.eigvalsh(s0).min() <= 0:
        notes.append("burn-in covariance is singular")
        logger.warning("EWMA burn-in covariance is singular")

    out = np.empty((panel.T - burn_in, K, K))
    s = s0
    for n, t in enumerate(range(burn_in, panel.T)):
        s = lam * s + (1.0 - lam) * np.outer(r[t], r[t])
        out[n] = s
    return ConditionalCovariances(
        panel.dates[burn_in:], panel.assets, out, "ewma",
        {"lambda": lam, "burn_in": burn_in, "sigma0": s0.tolist()}, notes,
    )


def _logit(x):
    return math.log(x / (1.0 - x))


def _expit(x):
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-x))
    e = math.exp(x)
    return e / (1.0 + e)


def garch11_variance(eps: np.ndarray, omega: float, alpha: float, beta: float,
                     h0: float | None = None) -> np.ndarray:
    """Conditional variance ``h_t = omega + alpha eps_{t-1}^2 + beta h_{t-1}``."""
    eps = np.asarray(eps, dtype=float)
    h = np.empty_like(eps)
    h[0] = eps.var() if h0 is None else h0
    u = omega + alpha * eps[:-1] ** 2
    h[1:] = lfilter([1.0], [1.0, -beta], u, zi=[beta * h[0]])[0]
    return h


def _split_persistence(theta):
    q = _expit(theta[0])
    s = _expit(theta[1])
    return q * s, q * (1.0 - s)


@dataclass
class Garch11Fit:
    omega: float
    alpha: float
    beta: float
    variance: np.ndarray
    mean: float
    loglik: float
    converged: bool
    n_iter: int
    resid: np.ndarray = field(repr=False)

    @property
    def persistence(self) -> float:
        return self.alpha + self.beta

    @property
    def std_resid(self) -> np.ndarray:
        return self.resid / np.sqrt(self.variance)


def garch11_fit(series, maxiter: int = 500, ftol: float = 1e-8) -> Garch11Fit:
    """Gaussian QML fit of a constant-mean GARCH(1,1).

    Nelder-Mead searches over ``(log omega, logit(alpha + beta),
    logit(alpha / (alpha + beta)))``, which keeps ``omega > 0``,
    ``alpha, beta >= 0`` and ``alpha + beta < 1``. ``h_0`` is the sample
    variance. Stops when the simplex log-likelihood spread drops below
    ``ftol`` or after ``maxiter`` iterations; in the latter case the best
    point found is returned with ``converged=False``.
    """
    x = np.asarray(series, dtype=float).ravel()
    if x.size < 250:
        raise DataError(f"GARCH fit needs at least 250 observations, got {x.size}")
    if not np.all(np.isfinite(x)):
        raise DataError("series contains non-finite values")
    mu = float(x.mean())
    eps = x - mu
    s2 = float(eps.var())
    if s2 <= 0 or s2 < 1e-14 * max(1.0, mu * mu):
        raise DataError("degenerate series")
    e2 = eps**2
    log2pi = math.log(2.0 * math.pi)

    def nll(theta):
        omega = math.exp(theta[0])
        alpha, beta = _split_persistence(theta[1:])
        u = omega + alpha * e2[:-1]
        h1 = lfilter([1.0], [1.0, -beta], u, zi=[beta * s2])[0]
        if np.any(h1 <= 0):
            return 1e300
        return 0.5 * (log2pi * x.size + math.log(s2) + e2[0] / s2
                      + np.sum(np.log(h1) + e2[1:] / h1))

    q0, a0 = 0.95, 0.05
    x0 = np.array([math.log(s2 * (1 - q0)), _logit(q0), _logit(a0 / q0)])
    simplex = np.vstack([x0, x0 + [0.5, 0, 0], x0 + [0, 0.5, 0], x0 + [0, 0, 0.5]])
    res = optimize.minimize(
        nll, x0, method="Nelder-Mead",
        options={"maxiter": maxiter, "fatol": ftol, "xatol": np.inf, "initial_simplex": simplex},
    )
    omega = math.exp(res.x[0])
    alpha, beta = _split_persistence(res.x[1:])
    converged = bool(res.success)
    if not converged:
        warnings.warn(f"GARCH(1,1) fit did not converge: {res.message}", ConvergenceWarning)
    h = garch11_variance(eps, omega, alpha, beta, s2)
    return Garch11Fit(omega, alpha, beta, h, mu, float(-res.fun), converged, int(res.nit), eps)


@dataclass
class GarchParams:
    omega: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray
    dcc_a: float
    dcc_b: float

    def __post_init__(self):
        if np.any(np.asarray(self.omega) <= 0):
            raise DataError("omega must be positive")
        if np.any(np.asarray(self.alpha) < 0) or np.any(np.asarray(self.beta) < 0):
            raise DataError("alpha and beta must be non-negative")
        if np.any(np.asarray(self.alpha) + np.asarray(self.beta) >= 1):
            raise DataError("alpha + beta must be < 1")
        if self.dcc_a < 0 or self.dcc_b < 0 or self.dcc_a + self.dcc_b >= 1:
            raise DataError("DCC parameters must satisfy a, b >= 0 and a + b < 1")


def dcc_correlations(z: np.ndarray, a: float, b: float, qbar: np.ndarray | None = None) -> np.ndarray:
    """DCC(1,1) correlation path from standardized residuals ``z`` (T x K).

    ``Q_t = (1 - a - b) Qbar + a z_{t-1} z_{t-1}' + b Q_{t-1}`` with
    ``Q_0 = Qbar``; ``R_t`` is ``Q_t`` rescaled to a unit diagonal.
    """
    z = np.asarray(z, dtype=float)
    T, K = z.shape
    if qbar is None:
        qbar = z.T @ z / T
    outer = z[:-1, :, None] * z[:-1, None, :]
    Q = np.empty((T, K, K))
    Q[0] = qbar
    Q[1:] = lfilter([1.0], [1.0, -b], (1.0 - a - b) * qbar + a * outer, axis=0,
                    zi=(b * qbar)[None])[0]
    d = np.sqrt(np.diagonal(Q, axis1=1, axis2=2))
    R = Q / d[:, :, None] / d[:, None, :]
    R = (R + np.swapaxes(R, 1, 2)) / 2.0
    idx = np.arange(K)
    R[:, idx, idx] = 1.0
    return R


@dataclass
class DCCFit:
    params: GarchParams
    covariances: ConditionalCovariances
    correlations: np.ndarray
    stage1: list
    converged: bool
    loglik: float


def dcc_fit(panel: ReturnPanel, maxiter: int = 500, ftol: float = 1e-8) -> DCCFit:
    """Two-stage DCC-GARCH(1,1).

    Stage 1 fits a GARCH(1,1) to each asset. Stage 2 fits ``(a, b)`` by
    maximizing the correlation part of the Gaussian likelihood of the
    standardized residuals. ``S_t = D_t R_t D_t`` with ``D_t`` the diagonal
    of conditional standard deviations; the diagonal of ``S_t`` is set to
    the univariate variances exactly.
    """
    stage1 = []
    for k, name in enumerate(panel.assets):
        try:
            stage1.append(garch11_fit(panel.returns[:, k], maxiter, ftol))
        except (DataError, NumericalError) as exc:
            raise type(exc)(f"stage-1 GARCH fit failed for {name}: {exc}") from exc
    h = np.column_stack([f.variance for f in stage1])
    z = np.column_stack([f.std_resid for f in stage1])
    T, K = z.shape
    qbar = z.T @ z / T
    zz = np.einsum("ti,ti->t", z, z)

    def nll(theta):
        a, b = _split_persistence(theta)
        R = dcc_correlations(z, a, b, qbar)
        sign, logdet = np.linalg.slogdet(R)
        if np.any(sign <= 0):
            return 1e300
        quad = np.einsum("ti,ti->t", z, np.linalg.solve(R, z[:, :, None])[:, :, 0])
        return 0.5 * float(np.sum(logdet + quad - zz))

    q0, a0 = 0.97, 0.02
    x0 = np.array([_logit(q0), _logit(a0 / q0)])
    simplex = np.vstack([x0, x0 + [0.5, 0.0], x0 + [0.0, 0.5]])
    res = optimize.minimize(
        nll, x0, method="Nelder-Mead",
        options={"maxiter": maxiter, "fatol": ftol, "xatol": np.inf, "initial_simplex": simplex},
    )
    a, b = _split_persistence(res.x)
    converged = bool(res.success) and all(f.converged for f in stage1)
    notes = []
    if not res.success:
        notes.append(f"DCC stage 2 did not converge: {res.message}")
        warnings.warn(notes[-1], ConvergenceWarning)
    notes.extend(f"GARCH fit for {n} did not converge" for n, f in zip(panel.assets, stage1)
                 if not f.converged)

    R = dcc_correlations(z, a, b, qbar)
    sd = np.sqrt(h)
    S = R * sd[:, :, None] * sd[:, None, :]
    S = (S + np.swapaxes(S, 1, 2)) / 2.0
    idx = np.arange(K)
    S[:, idx, idx] = h

    params = GarchParams(
        np.array([f.omega for f in stage1]), np.array([f.alpha for f in stage1]),
        np.array([f.beta for f in stage1]), a, b,
    )
    cov = ConditionalCovariances(
        panel.dates, panel.assets, S, "dcc",
        {
            "omega": params.omega.tolist(), "alpha": params.alpha.tolist(),
            "beta": params.beta.tolist(), "dcc_a": a, "dcc_b": b,
        },
        notes,
    )
    return DCCFit(params, cov, R, stage1, converged, float(-res.fun))
