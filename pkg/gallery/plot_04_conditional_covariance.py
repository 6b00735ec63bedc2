"""
Conditional covariances: EWMA and DCC-GARCH
===========================================

The RiskMetrics recursion and a two-stage DCC-GARCH(1,1) fit on simulated
data with known parameters.
"""

import numpy as np

from r2spill import dcc_fit, ewma_covariance, garch11_fit
from r2spill.ingest import ReturnPanel
from r2spill.simulate import business_days, simulate_ccc_garch, simulate_garch11

# %%
# GARCH(1,1) with alpha + beta = 0.98.
x = simulate_garch11(5000, 0.05, 0.08, 0.90, np.random.default_rng(0))
fit = garch11_fit(x)
print(f"omega={fit.omega:.3f} alpha={fit.alpha:.3f} beta={fit.beta:.3f}")

# %%
# Constant correlation data: the DCC news parameter should be close to 0.
corr = np.array([[1.0, 0.6, 0.1], [0.6, 1.0, 0.3], [0.1, 0.3, 1.0]])
y = simulate_ccc_garch(3000, corr, np.random.default_rng(1))
panel = ReturnPanel(business_days(3000), ("X", "Y", "Z"), y)
dcc = dcc_fit(panel)
print("a, b =", round(dcc.params.dcc_a, 4), round(dcc.params.dcc_b, 4))
print("average correlation:\n", np.round(dcc.covariances.correlations().mean(axis=0), 2))

# %%
# EWMA with lambda 0.94 after a 60-day burn-in.
ewma = ewma_covariance(panel, 0.94, 60)
print(len(ewma), "matrices from", ewma.dates[0])
