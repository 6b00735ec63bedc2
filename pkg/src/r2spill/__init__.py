"""R² decomposition connectedness, conditional covariances, hedging and portfolios.

The main entry points are :func:`rolling_connectedness` for spillover
indices, :func:`ewma_covariance` / :func:`dcc_fit` for conditional
covariances, :func:`hedge_table` for bilateral hedges, :func:`run_strategy`
for the MVP / MCP / MCoP portfolios and :func:`run_pipeline` for the full
report bundle.
"""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    ConfigError,
    ConvergenceWarning,
    DataError,
    NumericalError,
    R2SpillError,
    SingularMatrixError,
)
from .ingest import PricePanel, ReturnPanel, align_panels, load_price_series, log_returns  # noqa: E402
from .stats import (  # noqa: E402
    CorrMatrix,
    StatsRecord,
    correlation_matrix,
    describe,
    descriptive_table,
    ers_dfgls,
    jarque_bera,
)
from .connectedness import (  # noqa: E402
    DirectionalIndices,
    RollingConnectedness,
    SpilloverDecomposition,
    averaged_spillover,
    build_design,
    decompose_window,
    directional_indices,
    pci_matrix,
    relative_weights,
    rolling_connectedness,
)
from .condcov import (  # noqa: E402
    ConditionalCovariances,
    dcc_fit,
    ewma_covariance,
    garch11_fit,
)
from .hedge import (  # noqa: E402
    bilateral_weight_series,
    hedge_ratio_series,
    hedge_table,
    hedged_returns,
    hedging_effectiveness,
    paired_portfolio_returns,
)
from .portfolio import (  # noqa: E402
    STRATEGIES,
    PerformanceReport,
    WeightTrajectory,
    mcop_weights,
    mcp_weights,
    mvp_weights,
    performance,
    portfolio_he,
    run_strategy,
    strategy_inputs,
)
from .simulate import planted_driver_panel, synthetic_prices, synthetic_returns  # noqa: E402
from .network import SpilloverNetwork, export_network  # noqa: E402
from .config import RunConfig, load_config, validate_config  # noqa: E402
from .pipeline import run_pipeline  # noqa: E402
