"""Command line interface: ``r2spill <subcommand> [options]``.

Exit codes: 0 success, 1 other failure, 2 configuration error, 3 data
error, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import ESTIMATORS, load_config
from .errors import ConfigError, DataError, NumericalError, R2SpillError
from .ingest import ALIGN_POLICIES, PricePanel, price_csv
from .pipeline import COMMAND_STAGES, run_pipeline
from .simulate import FIXTURE_SEED, planted_driver_panel, synthetic_prices
from .stats import CORR_METHODS

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_DATA, EXIT_NUMERICAL = 0, 1, 2, 3, 4

# argparse dest -> config key
_FLAG_KEYS = {
    "inputs": "inputs", "date_column": "date_column", "align": "align",
    "window": "window", "step": "step", "lag": "lag", "corr_method": "corr_method",
    "include_own_lag": "include_own_lag", "threshold": "threshold",
    "robustness": "robustness", "estimator": "estimator", "lam": "lambda",
    "burn_in": "burn_in", "strategies": "strategies", "alpha": "alpha",
    "long_only": "long_only", "annualize": "annualize", "significance": "significance",
    "ers_lag": "ers_lag", "charts": "charts", "out": "output_dir", "seed": "seed",
}


def _ers_lag(text):
    return text if text == "auto" else int(text)


def _common_options() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("input and output")
    g.add_argument("--config", type=Path, help="TOML configuration file")
    g.add_argument("--input", dest="inputs", action="append", metavar="CSV",
                   help="price CSV (repeatable); default: the bundled synthetic fixture")
    g.add_argument("--date-column")
    g.add_argument("--align", choices=ALIGN_POLICIES)
    g.add_argument("--out", help="output directory")
    g.add_argument("--charts", action=argparse.BooleanOptionalAction, default=None)
    g.add_argument("-v", "--verbose", action="count", default=0)

    g = p.add_argument_group("stats")
    g.add_argument("--significance", type=float, help="correlation masking level")
    g.add_argument("--ers-lag", type=_ers_lag, help="DF-GLS lag order or 'auto'")

    g = p.add_argument_group("connectedness")
    g.add_argument("--window", type=int)
    g.add_argument("--step", type=int)
    g.add_argument("--lag", type=int)
    g.add_argument("--corr-method", choices=CORR_METHODS)
    g.add_argument("--threshold", type=float, help="network edge threshold")
    g.add_argument("--include-own-lag", action=argparse.BooleanOptionalAction, default=None,
                   help="count own-lag attribution in the TCI")
    g.add_argument("--robustness", action=argparse.BooleanOptionalAction, default=None,
                   help="also run every correlation measure for the TCI comparison")

    g = p.add_argument_group("covariance")
    g.add_argument("--estimator", choices=ESTIMATORS)
    g.add_argument("--lambda", dest="lam", type=float, help="EWMA decay")
    g.add_argument("--burn-in", type=int)

    g = p.add_argument_group("portfolio")
    g.add_argument("--strategies", help="comma list from mvp,mcp,mcop,mcop_c,mcop_l")
    g.add_argument("--alpha", type=float, help="VaR / CVaR tail level")
    g.add_argument("--long-only", action=argparse.BooleanOptionalAction, default=None)
    g.add_argument("--annualize", action=argparse.BooleanOptionalAction, default=None)
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="r2spill", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    common = _common_options()
    helps = {
        "stats": "descriptive statistics and correlation heatmap",
        "connectedness": "rolling and averaged R2 connectedness, networks",
        "covariance": "conditional covariance matrices",
        "hedge": "bilateral hedge ratios and weights",
        "portfolio": "MVP, MCP and MCoP portfolios and their performance",
        "run": "full pipeline",
    }
    for name, text in helps.items():
        sub.add_parser(name, parents=[common], help=text, description=text)
    sim = sub.add_parser("simulate", help="write the seeded synthetic fixtures",
                         description="write the seeded synthetic fixtures")
    sim.add_argument("--out", default=".", help="output directory")
    sim.add_argument("--seed", type=int, default=FIXTURE_SEED)
    sim.add_argument("--n", type=int, default=1000, help="number of returns")
    sim.add_argument("-v", "--verbose", action="count", default=0)
    return parser


def _simulate(args) -> list:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.n < 2:
        raise ConfigError(f"n: got {args.n}, expected an integer >= 2")
    written = []
    path = out / "synthetic_prices.csv"
    path.write_text(price_csv(synthetic_prices(args.seed, args.n)), encoding="utf-8")
    written.append(path)

    ret = planted_driver_panel(args.seed, args.n)
    levels = np.vstack([np.zeros(ret.K), np.cumsum(ret.returns, axis=0)])
    dates = np.concatenate([[np.busday_offset(ret.dates[0], -1)], ret.dates])
    planted = PricePanel(dates, ret.assets, 100.0 * np.exp(levels))
    path = out / "planted_driver_prices.csv"
    path.write_text(price_csv(planted, 12), encoding="utf-8")
    written.append(path)
    return written


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "simulate":
            for path in _simulate(args):
                print(path)
            return EXIT_OK
        overrides = {key: getattr(args, dest) for dest, key in _FLAG_KEYS.items()
                     if getattr(args, dest, None) is not None}
        cfg = load_config(args.config, overrides)
        result = run_pipeline(cfg, COMMAND_STAGES[args.command])
        for path in result.artifacts:
            if not path.endswith(".meta.json"):
                print(result.output_dir / path)
        print(result.output_dir / "manifest.json")
        return EXIT_OK
    except ConfigError as exc:
        for problem in exc.problems:
            print(f"config error: {problem}", file=sys.stderr)
        return EXIT_CONFIG
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except R2SpillError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
