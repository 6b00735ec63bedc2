"""
R-squared connectedness
=======================

Every asset is regressed on the other assets' same-day returns and on
lagged returns of all assets. Relative weights split each R-squared into
contemporaneous and lagged shares, which give the spillover table, the
TO/FROM/NET indices and the net pairwise network.
"""

import numpy as np

from r2spill import (
    averaged_spillover,
    export_network,
    planted_driver_panel,
    rolling_connectedness,
    synthetic_returns,
)

# %%
# A three-asset system where A1 drives A2 and A3.
roll = rolling_connectedness(planted_driver_panel(0), window_len=200, step=5)
dec, idx = averaged_spillover(roll)
print("C (row receives from column):\n", np.round(dec.C, 1))
print("L:\n", np.round(dec.L, 1))
print("NET:", np.round(idx.net, 2), "TCI:", round(idx.tci, 2))

# %%
# Edges point from net transmitter to net receiver.
net = export_network(idx.npdc, dec.assets, threshold=0.05)
print(net.to_dot())

# %%
# Rolling total connectedness on the nine-asset fixture.
panel = synthetic_returns()
roll = rolling_connectedness(panel, 200, 20)
for d, tci in zip(roll.dates, roll.series("tci")):
    print(d, f"{tci:.2f}")
