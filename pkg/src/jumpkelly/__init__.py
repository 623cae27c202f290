"""Growth-optimal rebalancing for jump-diffusion markets.

Core library: market definition/validation, admissible (non-bankruptable)
rule geometry, the Kelly solver, the two-player wealth-ratio game, exact
Monte Carlo path simulation, analytic outperformance probabilities, and
fair-randomization phi-games. A FastAPI service (``jumpkelly.service``)
wraps the library; the ``jumpkelly`` CLI is a thin client of that service
layer.
"""

__version__ = "0.1.0"

# Fixed default seed so every artifact is reproducible out of the box.
DEFAULT_SEED = 1729

from .market import (  # noqa: E402
    DiffusionParams,
    JumpModel,
    MarketSpec,
    ValidationReport,
    covariance_matrix,
    example_market,
    load_market,
    parse_market,
    validate,
)
from .admissible import (  # noqa: E402
    AdmissibleInterval,
    NoArbitrageReport,
    admissible_interval,
    check_no_arbitrage,
    is_admissible,
    safety_margin,
)
from .growth import (  # noqa: E402
    ArbitrageError,
    InadmissibleRuleError,
    KellySolution,
    diffusion_growth_rate,
    growth_gradient,
    growth_hessian,
    growth_rate,
    solve_kelly,
)
from .game import (  # noqa: E402
    SaddleReport,
    expected_wealth_ratio,
    payoff_kernel,
    saddle_surface,
    verify_saddle,
)
from .simulation import (  # noqa: E402
    PathConfig,
    RebalancingRule,
    TerminalSample,
    WealthPathSet,
    empirical_growth_rate,
    simulate,
    simulate_terminal,
)
from .outperform import (  # noqa: E402
    BinaryJumpMarket,
    conditional_prob,
    normal_cdf,
    outperformance_curve,
    outperformance_probability,
)
from .randomization import (  # noqa: E402
    FairRandomization,
    MonteCarloEstimate,
    PerformanceMeasure,
    evaluate_phi,
    investment_game_payoff,
    primitive_game_payoff,
)

__all__ = [
    "DEFAULT_SEED",
    "DiffusionParams",
    "JumpModel",
    "MarketSpec",
    "ValidationReport",
    "covariance_matrix",
    "example_market",
    "load_market",
    "parse_market",
    "validate",
    "AdmissibleInterval",
    "NoArbitrageReport",
    "admissible_interval",
    "check_no_arbitrage",
    "is_admissible",
    "safety_margin",
    "ArbitrageError",
    "InadmissibleRuleError",
    "KellySolution",
    "diffusion_growth_rate",
    "growth_gradient",
    "growth_hessian",
    "growth_rate",
    "solve_kelly",
    "SaddleReport",
    "expected_wealth_ratio",
    "payoff_kernel",
    "saddle_surface",
    "verify_saddle",
    "PathConfig",
    "RebalancingRule",
    "TerminalSample",
    "WealthPathSet",
    "empirical_growth_rate",
    "simulate",
    "simulate_terminal",
    "BinaryJumpMarket",
    "conditional_prob",
    "normal_cdf",
    "outperformance_curve",
    "outperformance_probability",
    "FairRandomization",
    "MonteCarloEstimate",
    "PerformanceMeasure",
    "evaluate_phi",
    "investment_game_payoff",
    "primitive_game_payoff",
]
