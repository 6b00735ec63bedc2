"""
Descriptive statistics and unit-root tests
==========================================

Moments, the Jarque-Bera normality test, the DF-GLS (ERS) unit-root test
and a correlation matrix with significance masking on the bundled
synthetic panel.
"""

import numpy as np

from r2spill import correlation_matrix, descriptive_table, ers_dfgls, synthetic_returns

panel = synthetic_returns()

# %%
# One record per asset; ERS uses a Schwert lag by default.
for name, rec in descriptive_table(panel).items():
    print(f"{name:6s} mean={rec.mean:+.5f} skew={rec.skewness:+.2f} "
          f"exkurt={rec.excess_kurtosis:.2f} JB={rec.jb_stat:.1f} ERS={rec.ers_stat:.2f} {rec.ers_pvalue_band or '-'}")

# %%
# Returns reject the unit root; a cumulated price path usually does not.
walk = np.cumsum(panel.returns[:, 0])
print("returns", ers_dfgls(panel.returns[:, 0]))
print("levels ", ers_dfgls(walk))

# %%
# Pearson correlations with pairs insignificant at 10% masked out.
cm = correlation_matrix(panel, "pearson", threshold=0.10)
print(np.round(np.where(cm.mask, np.nan, cm.values), 2))
