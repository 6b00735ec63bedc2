"""End-to-end report bundle: ingest, stats, connectedness, covariance, hedge, portfolio.

Every artifact is written next to a ``<name>.meta.json`` sidecar holding the
effective configuration, and ``manifest.json`` lists every file with its
SHA-256. Numbers are written with 6 significant digits so that bundles are
byte-identical across runs.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
import math
import os
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Mapping

import numpy as np

from . import __version__
from .condcov import dcc_fit, ewma_covariance
from .config import RunConfig, validate_config
from .connectedness import averaged_spillover, rolling_connectedness
from .errors import ConfigError, DataError, R2SpillError
from .hedge import hedge_table
from .ingest import align_panels, load_price_series, log_returns
from .network import export_network
from .plotting import heatmap_svg, line_chart_svg
from .portfolio import performance, run_strategy, strategy_inputs, weight_table
from .stats import CORR_METHODS, correlation_matrix, descriptive_table

__all__ = ["run_pipeline", "PipelineResult", "STAGES", "COMMAND_STAGES", "BUNDLED_FIXTURE"]

logger = logging.getLogger(__name__)

STAGES = ("ingest", "stats", "connectedness", "covariance", "hedge", "portfolio")
COMMAND_STAGES = {
    "stats": ("ingest", "stats"),
    "connectedness": ("ingest", "connectedness"),
    "covariance": ("ingest", "covariance"),
    "hedge": ("ingest", "covariance", "hedge"),
    "portfolio": ("ingest", "covariance", "portfolio"),
    "run": STAGES,
}
BUNDLED_FIXTURE = "synthetic_prices.csv"
LOCKFILE = ".r2spill.lock"
MANIFEST = "manifest.json"

TABLE1_COLUMNS = ["Asset", "Mean (x10^2)", "Variance (x10^2)", "Skewness", "Ex.Kurtosis", "JB", "ERS"]
TABLE2_COLUMNS = ["Pair", "Mean", "Std. Dev.", "5%", "95%", "HE", "p-value"]
TABLE3_COLUMNS = ["Strategy", "Asset", "Mean", "Std.Dev.", "5%", "95%", "HE", "p-value"]
TABLE4_COLUMNS = ["Strategy", "Return", "StdDev", "Sharpe Ratio (StdDev)",
                  "Sharpe Ratio (VaR)", "Sharpe Ratio (CVaR)"]


def fmt(x) -> str:
    """Fixed text form: 6 significant digits, ``NA`` for missing values."""
    if x is None:
        return "NA"
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if not math.isfinite(x):
            return "NA"
        if x == 0.0:
            x = 0.0  # drop the sign of -0
        return f"{x:.6g}"
    return str(x)


def _stars(p) -> str:
    if p is None or not math.isfinite(p):
        return ""
    return "***" if p < 0.01 else "**" if p < 0.05 else "*" if p < 0.10 else ""


_BAND_STARS = {"1%": "***", "5%": "**", "10%": "*"}


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj) if math.isfinite(obj) else None
    if isinstance(obj, np.datetime64):
        return str(obj)
    return obj


def _dumps(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True, allow_nan=False) + "\n"


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    return buf.getvalue()


def _matrix_csv(M, assets) -> str:
    return _csv(["Asset", *assets], ([a, *row] for a, row in zip(assets, np.asarray(M))))


@dataclass
class PipelineResult:
    output_dir: Path
    manifest: dict
    stages: tuple
    results: dict = field(default_factory=dict)

    @property
    def artifacts(self) -> list:
        return [a["path"] for a in self.manifest["artifacts"]]


class _Bundle:
    """Tracks written files so that a failed run can be rolled back."""

    def __init__(self, out: Path, config: dict):
        self.out = out
        self.config = config
        self.entries = []
        self.written = []

    def _write(self, name: str, text: str):
        path = self.out / name
        path.write_bytes(text.encode("utf-8"))
        self.written.append(path)
        return path

    def add(self, name: str, text: str, stage: str, description: str, meta: Mapping | None = None):
        self._write(name, text)
        side = {"artifact": name, "stage": stage, "description": description,
                "config": self.config, "version": __version__}
        if meta:
            side["meta"] = meta
        self._write(name + ".meta.json", _dumps(side))
        for f in (name, name + ".meta.json"):
            data = (self.out / f).read_bytes()
            self.entries.append({
                "path": f, "stage": stage, "bytes": len(data),
                "sha256": hashlib.sha256(data).hexdigest(),
                "kind": "metadata" if f.endswith(".meta.json") else "artifact",
            })

    def rollback(self):
        for p in reversed(self.written):
            try:
                p.unlink()
            except FileNotFoundError:
                pass
        self.written.clear()


def _read_inputs(cfg: RunConfig):
    schema = {"date_column": cfg.date_column}
    sources = []
    if not cfg.inputs:
        text = resources.files("r2spill").joinpath("data", BUNDLED_FIXTURE).read_text("utf-8")
        sources.append((f"<bundled>/{BUNDLED_FIXTURE}", text))
    else:
        for path in cfg.inputs:
            try:
                with open(path, encoding="utf-8", newline="") as fh:
                    sources.append((path, fh.read()))
            except OSError as exc:
                raise DataError(f"cannot read input {path}: {exc}") from exc
    panels = [load_price_series(text, schema) for _, text in sources]
    prices = panels[0] if len(panels) == 1 else align_panels(panels, cfg.align)
    info = [{"source": name, "sha256": hashlib.sha256(text.encode("utf-8")).hexdigest()}
            for name, text in sources]
    return prices, info


# stage implementations -------------------------------------------------------

def _stage_ingest(cfg, state, bundle):
    prices, info = _read_inputs(cfg)
    state["prices"] = prices
    state["returns"] = log_returns(prices)
    state["inputs"] = info
    ret = state["returns"]
    logger.info("ingest: %d returns x %d assets", ret.T, ret.K)
    rows = ([d, *r] for d, r in zip(ret.dates.astype(str), ret.returns))
    bundle.add("returns.csv", _csv(["date", *ret.assets], rows), "ingest",
               "daily log returns", {"inputs": info, "align": cfg.align})


def _stage_stats(cfg, state, bundle):
    ret = state["returns"]
    table = descriptive_table(ret, cfg.ers_lag)
    rows = []
    for name, rec in table.items():
        rows.append([
            name, 100.0 * rec.mean, 100.0 * rec.variance,
            fmt(rec.skewness) + _stars(rec.skew_pvalue),
            fmt(rec.excess_kurtosis) + _stars(rec.kurt_pvalue),
            fmt(rec.jb_stat) + _stars(rec.jb_pvalue),
            fmt(rec.ers_stat) + _BAND_STARS.get(rec.ers_pvalue_band, ""),
        ])
    state["stats"] = table
    bundle.add("table1_descriptive.csv", _csv(TABLE1_COLUMNS, rows), "stats",
               "descriptive statistics, JB and DF-GLS (ERS) tests", {
                   "stars": "*** 1%, ** 5%, * 10%",
                   "skewness_test": "D'Agostino", "kurtosis_test": "Anscombe-Glynn",
                   "ers_lags": {n: r.meta.get("ers_lag") for n, r in table.items()},
                   "n": ret.T,
               })
    corr = correlation_matrix(ret, cfg.corr_method, cfg.significance)
    state["corr"] = corr
    meta = {"method": corr.method, "significance": cfg.significance}
    bundle.add("correlation.csv", _matrix_csv(corr.values, ret.assets), "stats",
               "pairwise return correlations", meta)
    bundle.add("correlation_pvalues.csv", _matrix_csv(corr.pvalues, ret.assets), "stats",
               "two-sided p-values of the pairwise correlations", meta)
    if cfg.charts:
        svg = heatmap_svg(corr.values, ret.assets, corr.mask,
                          title=f"{corr.method} correlation (crossed: p >= {cfg.significance:g})")
        bundle.add("correlation_heatmap.svg", svg, "stats", "correlation heatmap", meta)


def _rolling(cfg, state, method=None):
    method = method or cfg.corr_method
    cache = state.setdefault("rolling", {})
    if method not in cache:
        logger.info("rolling connectedness (%s)", method)
        cache[method] = rolling_connectedness(
            state["returns"], cfg.window, cfg.step, cfg.lag, method, cfg.include_own_lag)
    return cache[method]


def _stage_connectedness(cfg, state, bundle):
    ret = state["returns"]
    assets = ret.assets
    roll = _rolling(cfg, state)
    dec, idx = averaged_spillover(roll)
    state["averaged"] = (dec, idx)
    meta = dict(roll.config)
    meta.update(n_windows=len(roll), n_gaps=len(roll.gaps),
                gaps=[{"date": w.end_date, "error": w.error} for w in roll.gaps],
                units="percentage points", orientation="row = receiver, column = transmitter")

    for name, M, what in (("overall", dec.C + dec.L, "overall"),
                          ("contemporaneous", dec.C, "contemporaneous"),
                          ("lagged", dec.L, "lagged")):
        bundle.add(f"spillover_{name}.csv", _matrix_csv(M, assets), "connectedness",
                   f"averaged {what} spillover matrix", meta)

    rows = [[a, idx.to[k], idx.to_c[k], idx.to_l[k], idx.from_[k], idx.from_c[k], idx.from_l[k],
             idx.net[k], idx.net_c[k], idx.net_l[k]] for k, a in enumerate(assets)]
    rows.append(["TCI", idx.tci, idx.tci_c, idx.tci_l, None, None, None, None, None, None])
    bundle.add("averaged_indices.csv",
               _csv(["Asset", "TO", "TO_C", "TO_L", "FROM", "FROM_C", "FROM_L", "NET", "NET_C",
                     "NET_L"], rows),
               "connectedness", "averaged directional indices; the TCI row holds TCI, TCI_C, TCI_L",
               meta)

    series = {n: roll.series(n) for n in ("tci", "tci_c", "tci_l", "to", "from_", "net",
                                          "net_c", "net_l")}
    header = ["date", "tci", "tci_c", "tci_l"]
    for a in assets:
        header += [f"to_{a}", f"from_{a}", f"net_{a}", f"net_c_{a}", f"net_l_{a}"]
    rows = []
    for t, d in enumerate(roll.dates.astype(str)):
        row = [d, series["tci"][t], series["tci_c"][t], series["tci_l"][t]]
        for k in range(ret.K):
            row += [series["to"][t, k], series["from_"][t, k], series["net"][t, k],
                    series["net_c"][t, k], series["net_l"][t, k]]
        rows.append(row)
    bundle.add("rolling_indices.csv", _csv(header, rows), "connectedness",
               "rolling TCI and per-asset TO, FROM, NET (NA marks gap windows)", meta)

    # net pairwise: positive values mean `from` is a net transmitter to `to`
    npdc = {n: roll.series(n) for n in ("npdc", "npdc_c", "npdc_l")}
    rows = []
    for t, d in enumerate(roll.dates.astype(str)):
        for i in range(ret.K):
            for j in range(i + 1, ret.K):
                rows.append([d, assets[i], assets[j], npdc["npdc"][t, j, i],
                             npdc["npdc_c"][t, j, i], npdc["npdc_l"][t, j, i]])
    bundle.add("npdc.csv", _csv(["date", "from", "to", "npdc", "npdc_c", "npdc_l"], rows),
               "connectedness", "rolling net pairwise directional connectedness", meta)

    net_meta = dict(meta, threshold=cfg.threshold,
                    edge_rule="from -> to when the net pairwise spillover exceeds the threshold")
    for name, M in (("overall", idx.npdc), ("contemporaneous", idx.npdc_c),
                    ("lagged", idx.npdc_l)):
        g = export_network(M, assets, cfg.threshold)
        bundle.add(f"network_{name}.dot", g.to_dot(f"npdc_{name}"), "connectedness",
                   f"{name} net pairwise spillover network", net_meta)
        bundle.add(f"network_{name}.graphml", g.to_graphml(), "connectedness",
                   f"{name} net pairwise spillover network", net_meta)

    if cfg.robustness:
        tcis = {m: _rolling(cfg, state, m).series("tci") for m in CORR_METHODS}
        rows = [[d, *(tcis[m][t] for m in CORR_METHODS)]
                for t, d in enumerate(roll.dates.astype(str))]
        ok = {m: np.isfinite(v) for m, v in tcis.items()}
        both = np.logical_and.reduce(list(ok.values()))
        corr = {f"{a}~{b}": float(np.corrcoef(tcis[a][both], tcis[b][both])[0, 1])
                for i, a in enumerate(CORR_METHODS) for b in CORR_METHODS[i + 1:]}
        bundle.add("robustness_tci.csv", _csv(["date", *CORR_METHODS], rows), "connectedness",
                   "rolling TCI under each correlation measure",
                   dict(meta, corr_method="all", tci_correlations=corr))
        if cfg.charts:
            bundle.add("robustness_tci.svg",
                       line_chart_svg(roll.dates, tcis, "TCI by correlation measure", "TCI (%)"),
                       "connectedness", "robustness TCI chart", meta)

    if cfg.charts:
        bundle.add("spillover_heatmap.svg",
                   heatmap_svg(dec.C + dec.L, assets, title="Averaged overall spillovers (%)",
                               fmt="{:.1f}", cmap="Reds", symmetric=False),
                   "connectedness", "averaged overall spillover heatmap", meta)
        bundle.add("tci.svg",
                   line_chart_svg(roll.dates, {"TCI": series["tci"], "TCI_C": series["tci_c"],
                                               "TCI_L": series["tci_l"]},
                                  "Total connectedness", "TCI (%)"),
                   "connectedness", "rolling TCI chart", meta)
        bundle.add("net.svg",
                   line_chart_svg(roll.dates, {a: series["net"][:, k] for k, a in enumerate(assets)},
                                  "Net directional connectedness", "NET (%)"),
                   "connectedness", "rolling NET chart", meta)


def _covariances(cfg, state):
    if "cov" not in state:
        ret = state["returns"]
        if cfg.estimator == "ewma":
            cov = ewma_covariance(ret, cfg.lam, cfg.burn_in)
        else:
            cov = dcc_fit(ret).covariances
        cov.validate()
        state["cov"] = cov
    return state["cov"]


def _stage_covariance(cfg, state, bundle):
    cov = _covariances(cfg, state)
    K = cov.K
    iu = np.triu_indices(K)
    rows = []
    for d, S in zip(cov.dates.astype(str), cov.sigmas):
        for i, j in zip(*iu):
            rows.append([d, cov.assets[i], cov.assets[j], S[i, j]])
    bundle.add("covariance.csv", _csv(["date", "asset_i", "asset_j", "sigma"], rows),
               "covariance", "conditional covariances (upper triangle)", cov.metadata())


def _stage_hedge(cfg, state, bundle):
    cov = _covariances(cfg, state)
    table = hedge_table(state["returns"], cov)
    state["hedge"] = table
    ratio_rows, weight_rows = [], []
    for h in table:
        pair = f"{h.pair[0]}/{h.pair[1]}"
        rs, ws = h.ratio_stats, h.weight_stats
        ratio_rows.append([pair, rs["Mean"], rs["Std.Dev."], rs["5%"], rs["95%"],
                           h.he_ratio, h.pvalue_ratio])
        weight_rows.append([pair, ws["Mean"], ws["Std.Dev."], ws["5%"], ws["95%"],
                            h.he_weight, h.pvalue_weight])
    meta = {"estimator": cov.method, "he_test": "one-sided F, H1: var(r_i) > var(r_p)"}
    bundle.add("table2_hedge_ratios.csv", _csv(TABLE2_COLUMNS, ratio_rows), "hedge",
               "hedge ratios I/J; HE of long I, short beta J",
               dict(meta, variant="hedge ratio"))
    bundle.add("table2_bilateral_weights.csv", _csv(TABLE2_COLUMNS, weight_rows), "hedge",
               "bilateral weights of I in the I/J portfolio; HE of that portfolio vs I",
               dict(meta, variant="bilateral weight"))


def _stage_portfolio(cfg, state, bundle):
    ret = state["returns"]
    cov = _covariances(cfg, state)
    inputs = {}
    for s in cfg.strategies:
        roll = _rolling(cfg, state) if s.startswith("MCoP") else None
        dates, mats = strategy_inputs(s, cov, roll)
        first = next((n for n, m in enumerate(mats) if m is not None), None)
        if first is None:
            raise R2SpillError(f"{s}: no usable input matrices")
        inputs[s] = (dates, mats, dates[first])
    # a common evaluation window for every strategy
    start = max(v[2] for v in inputs.values())
    runs, reports = {}, {}
    for s, (dates, mats, _) in inputs.items():
        keep = dates >= start
        run = run_strategy(ret, dates[keep], [m for m, k in zip(mats, keep) if k], s,
                           cfg.long_only)
        runs[s] = run
        reports[s] = performance(run.returns, cfg.alpha, cfg.annualize)
    state["runs"], state["performance"] = runs, reports
    meta = {"long_only": cfg.long_only, "start": start,
            "realized_from": next(iter(runs.values())).dates[0],
            "rebalancing": "daily, weights from the previous date"}

    rows = []
    for s, run in runs.items():
        for r in weight_table(run, ret):
            rows.append([r[c] for c in TABLE3_COLUMNS])
    bundle.add("table3_portfolio_weights.csv", _csv(TABLE3_COLUMNS, rows), "portfolio",
               "multivariate portfolio weights with per-asset hedging effectiveness", meta)

    rows = [[s, p.mean, p.std, p.sharpe_std, p.sharpe_var, p.sharpe_cvar]
            for s, p in reports.items()]
    units = ("annualized (x252 mean, x sqrt(252) risk), decimal log returns" if cfg.annualize
             else "daily, decimal log returns")
    bundle.add("table4_performance.csv", _csv(TABLE4_COLUMNS, rows), "portfolio",
               "portfolio performance", dict(meta, alpha=cfg.alpha, units=units,
                                             risk_free_rate=0.0,
                                             var={s: p.var for s, p in reports.items()},
                                             cvar={s: p.cvar for s, p in reports.items()}))

    first = next(iter(runs.values()))
    cdates = np.concatenate([[first.trajectory.dates[0]], first.dates])
    cum = {s: p.cumulative for s, p in reports.items()}
    rows = [[d, *(cum[s][t] for s in runs)] for t, d in enumerate(cdates.astype(str))]
    bundle.add("cumulative_returns.csv", _csv(["date", *runs], rows), "portfolio",
               "cumulative log returns of each strategy", meta)
    if cfg.charts:
        bundle.add("cumulative_returns.svg",
                   line_chart_svg(cdates, cum, "Cumulative returns", "cumulative log return"),
                   "portfolio", "cumulative returns chart", meta)


_STAGE_FUNCS = {
    "ingest": _stage_ingest,
    "stats": _stage_stats,
    "connectedness": _stage_connectedness,
    "covariance": _stage_covariance,
    "hedge": _stage_hedge,
    "portfolio": _stage_portfolio,
}


def _acquire_lock(out: Path) -> Path:
    lock = out / LOCKFILE
    try:
        fd = os.open(lock, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
    except FileExistsError:
        raise R2SpillError(f"output directory {out} is locked by another run ({lock})") from None
    with os.fdopen(fd, "w") as fh:
        fh.write(f"{os.getpid()}\n")
    return lock


def _clear_previous(out: Path):
    old = out / MANIFEST
    if not old.exists():
        return
    try:
        listed = json.loads(old.read_text("utf-8")).get("artifacts", [])
    except (OSError, ValueError):
        return
    for entry in listed:
        p = out / str(entry.get("path", ""))
        if p.parent == out and p.is_file():
            p.unlink()
    old.unlink()


def run_pipeline(config: RunConfig | Mapping | None = None, stages=None,
                 output_dir=None) -> PipelineResult:
    """Run the requested stages (default: all) and write the bundle.

    On failure every file written by this run is removed and the error is
    re-raised with the stage name prefixed, keeping its type.
    """
    cfg = config if isinstance(config, RunConfig) else validate_config(config)
    stages = tuple(STAGES if stages is None else stages)
    unknown = [s for s in stages if s not in STAGES]
    if unknown:
        raise ConfigError([f"unknown stage {s!r}" for s in unknown])
    if "ingest" not in stages:
        stages = ("ingest", *stages)
    stages = tuple(s for s in STAGES if s in stages)

    out = Path(output_dir if output_dir is not None else cfg.output_dir)
    created = not out.exists()
    out.mkdir(parents=True, exist_ok=True)
    lock = _acquire_lock(out)
    effective = cfg.to_dict()
    bundle = _Bundle(out, effective)
    state = {}
    try:
        _clear_previous(out)
        for stage in stages:
            try:
                _STAGE_FUNCS[stage](cfg, state, bundle)
            except R2SpillError as exc:
                raise type(exc)(f"stage {stage}: {exc}") from exc
            except (ValueError, ArithmeticError, OSError, np.linalg.LinAlgError) as exc:
                raise R2SpillError(f"stage {stage}: {type(exc).__name__}: {exc}") from exc
        manifest = {
            "tool": "r2spill",
            "version": __version__,
            "stages": list(stages),
            "config": effective,
            "inputs": state.get("inputs", []),
            "artifacts": bundle.entries,
        }
        (out / MANIFEST).write_bytes(_dumps(manifest).encode("utf-8"))
    except BaseException:
        bundle.rollback()
        lock.unlink(missing_ok=True)
        if created:
            try:
                out.rmdir()
            except OSError:
                pass
        raise
    lock.unlink(missing_ok=True)
    return PipelineResult(out, _jsonable(manifest), stages, state)
