"""Run configuration: defaults, TOML loading and validation."""

from __future__ import annotations

import difflib
from dataclasses import asdict, dataclass, field, fields
from typing import Any, Mapping

from .errors import ConfigError
from .ingest import ALIGN_POLICIES
from .portfolio import STRATEGIES
from .simulate import FIXTURE_SEED
from .stats import CORR_METHODS

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

__all__ = ["RunConfig", "validate_config", "load_config", "ESTIMATORS"]

ESTIMATORS = ("ewma", "dcc")

# config keys that are not valid Python identifiers
_KEY_TO_FIELD = {"lambda": "lam"}
_FIELD_TO_KEY = {v: k for k, v in _KEY_TO_FIELD.items()}

_STRATEGY_ALIASES = {s.lower(): s for s in STRATEGIES}


@dataclass
class RunConfig:
    inputs: list = field(default_factory=list)
    date_column: str = "date"
    align: str = "intersection"
    window: int = 200
    step: int = 1
    lag: int = 1
    corr_method: str = "pearson"
    include_own_lag: bool = False
    threshold: float = 0.05
    robustness: bool = True
    estimator: str = "ewma"
    lam: float = 0.94
    burn_in: int = 60
    strategies: list = field(default_factory=lambda: list(STRATEGIES))
    alpha: float = 0.05
    long_only: bool = True
    annualize: bool = True
    significance: float = 0.10
    ers_lag: Any = "auto"
    charts: bool = True
    output_dir: str = "r2spill-out"
    seed: int = FIXTURE_SEED

    def to_dict(self) -> dict:
        """Effective configuration using the external key names."""
        return {_FIELD_TO_KEY.get(k, k): v for k, v in asdict(self).items()}


CONFIG_KEYS = tuple(_FIELD_TO_KEY.get(f.name, f.name) for f in fields(RunConfig))


def _is_int(v) -> bool:
    return isinstance(v, int) and not isinstance(v, bool)


def _is_num(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def validate_config(raw: Mapping | None = None) -> RunConfig:
    """Build a :class:`RunConfig` from a raw mapping, reporting every problem at once."""
    raw = dict(raw or {})
    problems = []
    values = {}

    for key, val in raw.items():
        if key not in CONFIG_KEYS:
            hint = difflib.get_close_matches(key, CONFIG_KEYS, n=1)
            msg = f"unknown key {key!r}"
            if hint:
                msg += f" (did you mean {hint[0]!r}?)"
            problems.append(msg)
            continue
        values[_KEY_TO_FIELD.get(key, key)] = val

    def need(name, ok, expect):
        if name in values and not ok(values[name]):
            problems.append(f"{_FIELD_TO_KEY.get(name, name)}: got {values[name]!r}, expected {expect}")

    need("window", lambda v: _is_int(v) and v >= 2, "an integer >= 2")
    need("step", lambda v: _is_int(v) and v >= 1, "an integer >= 1")
    need("lag", lambda v: _is_int(v) and v >= 1, "an integer >= 1")
    need("burn_in", lambda v: _is_int(v) and v >= 2, "an integer >= 2")
    need("seed", _is_int, "an integer")
    need("lam", lambda v: _is_num(v) and 0 < v < 1, "a number in (0, 1)")
    need("alpha", lambda v: _is_num(v) and 0 < v < 0.5, "a number in (0, 0.5)")
    need("significance", lambda v: _is_num(v) and 0 < v < 1, "a number in (0, 1)")
    need("threshold", lambda v: _is_num(v) and v >= 0, "a number >= 0")
    need("corr_method", lambda v: v in CORR_METHODS, f"one of {', '.join(CORR_METHODS)}")
    need("estimator", lambda v: v in ESTIMATORS, f"one of {', '.join(ESTIMATORS)}")
    need("align", lambda v: v in ALIGN_POLICIES, f"one of {', '.join(ALIGN_POLICIES)}")
    need("ers_lag", lambda v: v == "auto" or (_is_int(v) and v >= 0), "'auto' or an integer >= 0")
    for flag in ("include_own_lag", "robustness", "long_only", "annualize", "charts"):
        need(flag, lambda v: isinstance(v, bool), "true or false")
    for text in ("date_column", "output_dir"):
        need(text, lambda v: isinstance(v, str) and v != "", "a non-empty string")

    if "inputs" in values:
        v = values["inputs"]
        if isinstance(v, str):
            v = [v]
        if not isinstance(v, (list, tuple)) or not all(isinstance(p, str) for p in v):
            problems.append(f"inputs: got {values['inputs']!r}, expected a list of paths")
        else:
            values["inputs"] = list(v)

    if "strategies" in values:
        v = values["strategies"]
        if isinstance(v, str):
            v = [s for s in v.split(",") if s.strip()]
        if not isinstance(v, (list, tuple)) or not v:
            problems.append(f"strategies: got {values['strategies']!r}, expected a non-empty list")
        else:
            canon = []
            for s in v:
                name = _STRATEGY_ALIASES.get(str(s).strip().lower())
                if name is None:
                    problems.append(f"strategies: unknown strategy {s!r}, expected from "
                                    f"{', '.join(STRATEGIES)}")
                elif name not in canon:
                    canon.append(name)
            values["strategies"] = canon

    if problems:
        raise ConfigError(problems)
    return RunConfig(**values)


def load_config(path, overrides: Mapping | None = None) -> RunConfig:
    """Read a TOML config; ``overrides`` (e.g. CLI flags) win over file values."""
    raw = {}
    if path is not None:
        try:
            with open(path, "rb") as fh:
                raw = tomllib.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"invalid TOML in {path}: {exc}") from exc
    raw.update({k: v for k, v in (overrides or {}).items() if v is not None})
    return validate_config(raw)
