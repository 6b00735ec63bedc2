"""
Minimum variance, correlation and connectedness portfolios
==========================================================

The three strategies share one closed form applied to different matrices.
Weights are rebalanced daily and evaluated out of sample.
"""

from r2spill import (
    STRATEGIES,
    ewma_covariance,
    performance,
    rolling_connectedness,
    run_strategy,
    strategy_inputs,
    synthetic_returns,
)

panel = synthetic_returns()
cov = ewma_covariance(panel)
roll = rolling_connectedness(panel, 200, 1)

# %%
# Start every strategy on the same date so the comparison is fair.
start = max(cov.dates[0], roll.dates[0])
for name in STRATEGIES:
    dates, mats = strategy_inputs(name, cov, roll)
    keep = dates >= start
    run = run_strategy(panel, dates[keep], [m for m, k in zip(mats, keep) if k], name)
    rep = performance(run.returns)
    print(f"{name:7s} return={rep.mean:+.4f} sd={rep.std:.4f} SR={rep.sharpe_std:+.3f} "
          f"SR(VaR)={rep.sharpe_var:+.3f}")
