import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from r2spill.ingest import ReturnPanel
from r2spill.simulate import business_days, synthetic_returns

settings.register_profile(
    "r2spill", deadline=None, max_examples=60,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.function_scoped_fixture],
)
settings.load_profile("r2spill")


def make_panel(x, names=None, start="2020-01-01") -> ReturnPanel:
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    names = names or tuple(f"A{k + 1}" for k in range(x.shape[1]))
    return ReturnPanel(business_days(x.shape[0], start), tuple(names), x)


@pytest.fixture(scope="session")
def fixture_panel():
    return synthetic_returns()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
