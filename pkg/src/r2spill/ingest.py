"""Price loading, calendar alignment and log-return construction."""

from __future__ import annotations

import csv
import io
import os
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import DataError

__all__ = [
    "PricePanel",
    "ReturnPanel",
    "load_price_series",
    "align_panels",
    "log_returns",
    "price_csv",
]

ALIGN_POLICIES = ("intersection", "union-forward-fill")


def _as_dates(dates) -> np.ndarray:
    return np.asarray(dates, dtype="datetime64[D]")


def _check_assets(assets: Sequence[str]) -> tuple[str, ...]:
    assets = tuple(str(a) for a in assets)
    if len(set(assets)) != len(assets):
        dup = sorted({a for a in assets if assets.count(a) > 1})
        raise DataError(f"duplicate asset names: {', '.join(dup)}")
    return assets


@dataclass(frozen=True)
class PricePanel:
    """Date-indexed matrix of positive price levels, one column per asset."""

    dates: np.ndarray
    assets: tuple[str, ...]
    prices: np.ndarray

    def __post_init__(self):
        dates = _as_dates(self.dates)
        prices = np.asarray(self.prices, dtype=float)
        assets = _check_assets(self.assets)
        if prices.ndim == 1:
            prices = prices[:, None]
        if prices.shape != (dates.size, len(assets)):
            raise DataError(
                f"price matrix shape {prices.shape} does not match "
                f"{dates.size} dates x {len(assets)} assets"
            )
        if dates.size and np.any(np.diff(dates) <= np.timedelta64(0, "D")):
            raise DataError("dates must be strictly increasing")
        if not np.all(np.isfinite(prices)):
            raise DataError("prices contain missing or non-finite values")
        if np.any(prices <= 0):
            t, k = np.argwhere(prices <= 0)[0]
            raise DataError(f"non-positive price {prices[t, k]!r} for {assets[k]} on {dates[t]}")
        prices.setflags(write=False)
        dates.setflags(write=False)
        object.__setattr__(self, "dates", dates)
        object.__setattr__(self, "prices", prices)
        object.__setattr__(self, "assets", assets)

    @property
    def T(self) -> int:
        return self.prices.shape[0]

    @property
    def K(self) -> int:
        return self.prices.shape[1]

    def column(self, asset: str) -> np.ndarray:
        return self.prices[:, self.assets.index(asset)]


@dataclass(frozen=True)
class ReturnPanel:
    """Date-indexed matrix of log returns.

    ``dates[t]`` labels the return earned from the previous observation to
    ``dates[t]``.
    """

    dates: np.ndarray
    assets: tuple[str, ...]
    returns: np.ndarray

    def __post_init__(self):
        dates = _as_dates(self.dates)
        returns = np.asarray(self.returns, dtype=float)
        assets = _check_assets(self.assets)
        if returns.ndim == 1:
            returns = returns[:, None]
        if returns.shape != (dates.size, len(assets)):
            raise DataError(
                f"return matrix shape {returns.shape} does not match "
                f"{dates.size} dates x {len(assets)} assets"
            )
        if not np.all(np.isfinite(returns)):
            raise DataError("returns contain non-finite values")
        returns.setflags(write=False)
        dates.setflags(write=False)
        object.__setattr__(self, "dates", dates)
        object.__setattr__(self, "returns", returns)
        object.__setattr__(self, "assets", assets)

    @property
    def T(self) -> int:
        return self.returns.shape[0]

    @property
    def K(self) -> int:
        return self.returns.shape[1]

    def rows(self, start: int, stop: int) -> "ReturnPanel":
        return ReturnPanel(self.dates[start:stop], self.assets, self.returns[start:stop])

    def select(self, assets: Iterable[str]) -> "ReturnPanel":
        assets = list(assets)
        idx = [self.assets.index(a) for a in assets]
        return ReturnPanel(self.dates, tuple(assets), self.returns[:, idx])

    def scaled(self, factors) -> "ReturnPanel":
        return ReturnPanel(self.dates, self.assets, self.returns * np.asarray(factors, dtype=float))

    def to_frame(self):
        import pandas as pd

        return pd.DataFrame(self.returns, index=pd.DatetimeIndex(self.dates, name="date"),
                            columns=list(self.assets))


def load_price_series(source, schema: Mapping | None = None) -> PricePanel:
    """Read a price CSV into a :class:`PricePanel`.

    Parameters
    ----------
    source : path, file object, or CSV text
        Strings that contain a newline are treated as CSV text, any other
        string as a path.
    schema : mapping, optional
        ``date_column`` (default ``"date"``) and ``columns``, a mapping from
        CSV header to asset name restricting which price columns are read.

    Row numbers in error messages count the header as row 1.
    """
    schema = dict(schema or {})
    date_col = schema.get("date_column", "date")
    mapping = schema.get("columns")

    if hasattr(source, "read"):
        text = source.read()
    elif isinstance(source, str) and "\n" in source:
        text = source
    else:
        with open(os.fspath(source), encoding="utf-8", newline="") as fh:
            text = fh.read()
    if text.startswith("﻿"):
        text = text[1:]

    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header is None or not any(h.strip() for h in header):
        raise DataError("empty document")
    header = [h.strip() for h in header]
    if date_col not in header:
        raise DataError(f"missing date column {date_col!r}")
    date_idx = header.index(date_col)

    if mapping is None:
        price_cols = [(i, h) for i, h in enumerate(header) if i != date_idx]
    else:
        missing = [c for c in mapping if c not in header]
        if missing:
            raise DataError(f"columns not found in header: {', '.join(missing)}")
        price_cols = [(header.index(c), str(name)) for c, name in mapping.items()]
    if not price_cols:
        raise DataError("no price columns")

    dates, rows, seen = [], [], {}
    for rownum, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(header):
            raise DataError(f"row {rownum}: expected {len(header)} fields, got {len(row)}")
        raw_date = row[date_idx].strip()
        try:
            d = np.datetime64(raw_date, "D")
            if str(d) != raw_date:
                raise ValueError
        except ValueError:
            raise DataError(f"malformed date {raw_date!r} at row {rownum}") from None
        if d in seen:
            raise DataError(f"duplicate date {raw_date} at row {rownum}")
        seen[d] = rownum
        values = []
        for col, name in price_cols:
            cell = row[col].strip()
            try:
                values.append(float(cell))
            except ValueError:
                raise DataError(
                    f"non-numeric price {cell!r} in column {header[col]!r} at row {rownum}"
                ) from None
        dates.append(d)
        rows.append(values)

    if not rows:
        raise DataError("empty document: no data rows")
    dates = np.array(dates, dtype="datetime64[D]")
    prices = np.array(rows, dtype=float)
    order = np.argsort(dates, kind="stable")
    return PricePanel(dates[order], tuple(n for _, n in price_cols), prices[order])


def align_panels(panels: Sequence[PricePanel], policy: str = "intersection") -> PricePanel:
    """Join several price panels onto one calendar.

    ``intersection`` keeps only dates present in every panel;
    ``union-forward-fill`` keeps every date and carries the last observed
    price forward. Column order follows the input panel order.
    """
    if policy not in ALIGN_POLICIES:
        raise DataError(f"unknown alignment policy {policy!r}; expected one of {ALIGN_POLICIES}")
    if len(panels) < 2:
        raise DataError("align_panels needs at least two panels")
    if any(p.T == 0 for p in panels):
        raise DataError("cannot align an empty panel")

    assets = tuple(a for p in panels for a in p.assets)
    _check_assets(assets)

    if policy == "intersection":
        common = panels[0].dates
        for p in panels[1:]:
            common = np.intersect1d(common, p.dates)
        if common.size == 0:
            raise DataError("empty intersection of panel dates")
        blocks = [p.prices[np.searchsorted(p.dates, common)] for p in panels]
        return PricePanel(common, assets, np.hstack(blocks))

    union = panels[0].dates
    for p in panels[1:]:
        union = np.union1d(union, p.dates)
    blocks = []
    for p in panels:
        # index of last observation at or before each union date
        pos = np.searchsorted(p.dates, union, side="right") - 1
        if pos[0] < 0:
            raise DataError(
                f"leading gap for {', '.join(p.assets)}: no price on or before {union[0]}"
            )
        blocks.append(p.prices[pos])
    return PricePanel(union, assets, np.hstack(blocks))


def log_returns(panel: PricePanel) -> ReturnPanel:
    """``returns[t, k] = ln(prices[t+1, k] / prices[t, k])``, labelled by the later date."""
    if panel.T < 2:
        raise DataError("need at least two price observations for returns")
    prices = np.asarray(panel.prices, dtype=float)
    if np.any(prices <= 0):
        raise DataError("non-positive price")
    return ReturnPanel(panel.dates[1:], panel.assets, np.log(prices[1:] / prices[:-1]))


def price_csv(panel: PricePanel, digits: int = 8) -> str:
    """CSV text that :func:`load_price_series` reads back into ``panel``."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["date", *panel.assets])
    for d, row in zip(panel.dates.astype(str), panel.prices):
        w.writerow([d, *(f"{x:.{digits}g}" for x in row)])
    return buf.getvalue()
