"""Corridor-smoothed collective pension toolkit.

Closed-form boundary functionals over a lognormal market, multi-agent pool
simulation with three help regimes, an event-sourced redistribution ledger
with executable fairness checks, and a recursive claim settlement rule.
"""

from .claim_settlement import ClaimBatch, SettlementResult, settle
from .corridor_math import (
    CorridorPolicy,
    M1Result,
    OptResult,
    XiParams,
    admissible_min_k,
    h_payoff,
    k_of_c,
    m1,
    m2,
    maximize_m1,
    maximize_m2,
    mp_stationary_points,
    n_func,
    profitability_lhs,
    psi1,
    psi2,
    xi,
    xi_d1,
    xi_d2,
)
from .market_model import (
    GbmParams,
    PathSample,
    density,
    density_peak,
    expect_mc,
    expect_quad,
    partial_moment,
    sample_return_matrix,
    sample_returns,
    worker_seeds,
)
from .pool_simulator import (
    ALWAYS_HELP,
    INDEX_CAPPED_HELP,
    NO_HELP_IF_INSUFFICIENT,
    CollectiveAccount,
    DpVerdict,
    FixedPointResult,
    IndividualAccount,
    PoolConfig,
    PoolState,
    SimulationResult,
    StepReport,
    best_response_gain,
    dp_check,
    fixed_point_barriers,
    improvement_bound,
    init_pool,
    run_path,
    simulate,
    step,
    z_star,
)
from .redistribution_index import (
    CheckResult,
    EventRecord,
    Ledger,
    check_add,
    check_cont,
    check_fix,
    check_lin,
    check_mon,
    index_for_pool,
    update_monotone,
    update_proportional,
)

__version__ = "0.1.0"

__all__ = [
    "ALWAYS_HELP",
    "INDEX_CAPPED_HELP",
    "NO_HELP_IF_INSUFFICIENT",
    "CheckResult",
    "ClaimBatch",
    "CollectiveAccount",
    "CorridorPolicy",
    "DpVerdict",
    "EventRecord",
    "FixedPointResult",
    "GbmParams",
    "IndividualAccount",
    "Ledger",
    "M1Result",
    "OptResult",
    "PathSample",
    "PoolConfig",
    "PoolState",
    "SettlementResult",
    "SimulationResult",
    "StepReport",
    "XiParams",
    "admissible_min_k",
    "best_response_gain",
    "check_add",
    "check_cont",
    "check_fix",
    "check_lin",
    "check_mon",
    "density",
    "density_peak",
    "dp_check",
    "expect_mc",
    "expect_quad",
    "fixed_point_barriers",
    "h_payoff",
    "improvement_bound",
    "index_for_pool",
    "init_pool",
    "k_of_c",
    "m1",
    "m2",
    "maximize_m1",
    "maximize_m2",
    "mp_stationary_points",
    "n_func",
    "partial_moment",
    "profitability_lhs",
    "psi1",
    "psi2",
    "run_path",
    "sample_return_matrix",
    "sample_returns",
    "settle",
    "simulate",
    "step",
    "update_monotone",
    "update_proportional",
    "worker_seeds",
    "xi",
    "xi_d1",
    "xi_d2",
    "z_star",
]
