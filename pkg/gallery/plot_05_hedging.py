"""
Hedge ratios and bilateral portfolio weights
============================================

Dynamic hedge ratios and two-asset minimum variance weights from EWMA
covariances, with their hedging effectiveness.
"""

from r2spill import ewma_covariance, hedge_table, synthetic_returns

panel = synthetic_returns().select(["ETF1", "GBOND", "TOK1"])
cov = ewma_covariance(panel)

# %%
# One row per ordered pair: long the first asset, short (or hold) the second.
for row in hedge_table(panel, cov):
    s = row.ratio_stats
    print(f"{row.pair[0]}/{row.pair[1]:6s} beta mean={s['Mean']:+.3f} "
          f"HE={row.he_ratio:+.3f} (p={row.pvalue_ratio:.3f})  "
          f"w mean={row.weight_stats['Mean']:.3f} HE={row.he_weight:+.3f}")
