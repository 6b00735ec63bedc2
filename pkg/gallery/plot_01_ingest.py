"""
Loading and aligning price series
=================================

Two sources that trade on different calendars are joined on their common
dates and turned into log returns.
"""

import io

import numpy as np

from r2spill import align_panels, load_price_series, log_returns

# %%
# An ETF that trades on weekdays and a token that trades every day.
etf = load_price_series(io.StringIO(
    "date,ETF\n2021-05-24,100\n2021-05-25,101\n2021-05-26,99.5\n2021-05-27,100.2\n"
    "2021-05-28,102\n"))
tok = load_price_series(io.StringIO(
    "date,TOK\n" + "".join(f"2021-05-{d},{p}\n" for d, p in
                            zip(range(24, 31), [10, 10.4, 9.8, 10.1, 10.9, 11.2, 11.0]))))

# %%
# The intersection keeps the five weekdays; weekend token moves fold into Monday.
both = align_panels([etf, tok], "intersection")
ret = log_returns(both)
print(both.dates)
print(np.round(ret.returns, 4))

# %%
# Forward filling instead keeps all seven days and repeats Friday's ETF price.
filled = align_panels([etf, tok], "union-forward-fill")
print(filled.prices[:, 0])
