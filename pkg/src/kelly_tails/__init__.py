"""Growth-optimal leverage for fat-tailed assets.

Single-asset Kelly fractions (binary, Gaussian-limit, fat-tail closed forms
and the exact discrete optimizer), multi-asset Kelly allocation with its
tangency and risk-parity equivalences, seeded wealth-path simulation, and
the drawdown-protection-adjusted concave efficient frontier.
"""

__version__ = "0.1.0"

from .errors import (
    ApproximationWarning,
    CalibrationInfeasible,
    DegenerateNormalization,
    DomainViolation,
    EmptyFileError,
    EstimationError,
    InfeasibleLeverage,
    InvalidJointModel,
    KellyTailsError,
    NewtonStall,
    NoInteriorMaximum,
    ReturnsParseError,
    SeriesTooShort,
    SingularCovariance,
    ValidationError,
)
from .model import (
    Alignment,
    AllocationResult,
    DiscreteModel,
    GaussianCore,
    NO_TAILS,
    PortfolioSpec,
    TailSpec,
    build_discrete_model,
    calibrate_center,
    match_center_to_moments,
    model_moments,
)
from .single import (
    KellyPoint,
    SweepRow,
    arithmetic_growth,
    brown_scenarios,
    etl_sweep,
    feasible_interval,
    growth_at,
    growth_sensitivity,
    kelly_binary,
    kelly_fat_closed,
    kelly_fat_exact,
    kelly_simple,
    scale_skew_convexity,
    scenario_growth,
    sigma_sensitivity,
    tail_impact,
)
from .parity import (
    JointDistribution,
    JointTwoAssetModel,
    build_joint_model,
    joint_fat_allocation,
    kelly_allocation,
    maximize_joint_growth,
    max_sharpe_tangency,
    risk_parity_weights,
    two_asset_closed,
)
from .simulate import (
    CrossoverRow,
    PathStats,
    SimConfig,
    crossover_diagnostic,
    drawdown_distribution,
    path_log_wealth,
    simulate_paths,
)
from .frontier import (
    DdvaQuote,
    FrontierPoint,
    ddva,
    frontier_concavity_check,
    frontier_curve,
    frontier_family,
)
from .estimate import ReturnSeries, estimate_params, read_returns_csv

__all__ = [name for name in dir() if not name.startswith("_")]
