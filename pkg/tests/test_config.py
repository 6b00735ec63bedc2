import pytest

from r2spill.config import RunConfig, load_config, validate_config
from r2spill.errors import ConfigError
from r2spill.portfolio import STRATEGIES


def test_empty_config_is_defaults():
    cfg = validate_config({})
    assert cfg == RunConfig()
    assert (cfg.window, cfg.lag, cfg.lam, cfg.burn_in) == (200, 1, 0.94, 60)
    assert cfg.strategies == list(STRATEGIES)
    assert validate_config(None) == cfg


def test_lambda_out_of_range():
    with pytest.raises(ConfigError) as err:
        validate_config({"lambda": 1.5})
    assert err.value.problems == ["lambda: got 1.5, expected a number in (0, 1)"]


def test_unknown_key_suggestion():
    with pytest.raises(ConfigError, match=r"unknown key 'windw' \(did you mean 'window'\?\)"):
        validate_config({"windw": 100})


def test_all_problems_reported():
    with pytest.raises(ConfigError) as err:
        validate_config({"window": 0, "alpha": 0.7, "estimator": "bekk", "bogus": 1})
    assert len(err.value.problems) == 4


def test_bool_is_not_int():
    with pytest.raises(ConfigError):
        validate_config({"window": True})


def test_strategies_parsing():
    assert validate_config({"strategies": "mvp, mcop_c"}).strategies == ["MVP", "MCoP_C"]
    assert validate_config({"strategies": ["MCP", "mcp"]}).strategies == ["MCP"]
    with pytest.raises(ConfigError, match="unknown strategy"):
        validate_config({"strategies": ["MVP", "risk-parity"]})


def test_to_dict_uses_external_keys():
    d = RunConfig().to_dict()
    assert "lambda" in d and "lam" not in d


def test_toml_and_precedence(tmp_path):
    p = tmp_path / "run.toml"
    p.write_text('window = 150\nlambda = 0.97\nstrategies = ["MVP"]\n')
    cfg = load_config(p)
    assert (cfg.window, cfg.lam, cfg.strategies) == (150, 0.97, ["MVP"])
    cfg = load_config(p, {"window": 120, "lambda": None})
    assert cfg.window == 120 and cfg.lam == 0.97  # flag > file > default
    assert cfg.lag == 1


def test_bad_toml(tmp_path):
    p = tmp_path / "bad.toml"
    p.write_text("window = = 3\n")
    with pytest.raises(ConfigError, match="invalid TOML"):
        load_config(p)
    with pytest.raises(ConfigError, match="cannot read"):
        load_config(tmp_path / "missing.toml")
