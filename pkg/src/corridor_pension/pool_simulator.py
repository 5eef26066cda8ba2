"""Multi-agent pool dynamics under corridor smoothing.

A pool holds n individual accounts (unit counts eta^i, values V^i) and one
collective account (theta units) in the same fund.  Each period the fund moves,
premia buy new units, and corridor breaches trigger transfers.  Three regimes
govern what happens when individual claims exceed what the collective can
cover:

* AlwaysHelp: claims are always paid; the collective balance may go negative
  and a cumulative external-support counter records what an outside sponsor
  would have had to inject.
* NoHelpIfInsufficient: claims are paid only when the collective can strictly
  cover the aggregate claim; otherwise nobody is paid that period.
* IndexCappedHelp: when full coverage fails, each claimant is capped by its
  lagged redistribution share and the remainder goes through the recursive
  claim settlement.

The coverage indicator collapses to a threshold on the net return (`z_star`),
which drives the fixed-point search for a common near-optimal boundary and the
best-response improvement bound.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .claim_settlement import ClaimBatch, settle
from .corridor_math import CorridorPolicy, admissible_min_k, k_of_c, n_func, psi1, psi2
from .market_model import GbmParams, density_peak, sample_return_matrix
from .redistribution_index import Ledger, index_for_pool

__all__ = [
    "ALWAYS_HELP",
    "NO_HELP_IF_INSUFFICIENT",
    "INDEX_CAPPED_HELP",
    "IndividualAccount",
    "CollectiveAccount",
    "PoolConfig",
    "PoolState",
    "StepReport",
    "SimulationResult",
    "FixedPointResult",
    "DpVerdict",
    "init_pool",
    "step",
    "run_path",
    "simulate",
    "z_star",
    "fixed_point_barriers",
    "improvement_bound",
    "best_response_gain",
    "dp_check",
]

ALWAYS_HELP = "AlwaysHelp"
NO_HELP_IF_INSUFFICIENT = "NoHelpIfInsufficient"
INDEX_CAPPED_HELP = "IndexCappedHelp"
_REGIMES = (ALWAYS_HELP, NO_HELP_IF_INSUFFICIENT, INDEX_CAPPED_HELP)


@dataclass(frozen=True)
class IndividualAccount:
    eta: float
    value: float
    k: float
    owner_id: object


@dataclass(frozen=True)
class CollectiveAccount:
    theta: float
    value: float


@dataclass(frozen=True)
class PoolConfig:
    """Static pool description.

    pi_ind may be a scalar (homogeneous premia) or one value per individual;
    pi_all defaults to their sum.  k_vec overrides the policy boundary per
    individual.  index_source must be a recorded ledger when the regime is
    IndexCappedHelp.
    """

    n: int
    gamma: float
    pi_ind: object
    T: int
    regime: str
    policy: CorridorPolicy
    pi_all: float | None = None
    index_source: Ledger | None = None
    k_vec: tuple | None = None
    v0_ind: object = 1.0
    c0: float = 0.0
    h0: float = 1.0

    def __post_init__(self):
        if self.n < 1 or self.T < 1:
            raise ValueError("n and T must be >= 1")
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError("gamma must be in [0, 1]")
        if self.regime not in _REGIMES:
            raise ValueError(f"unknown regime {self.regime!r}")
        if self.h0 <= 0 or self.c0 < 0:
            raise ValueError("h0 must be positive and c0 nonnegative")
        if any(p < 0 for p in self.premiums):
            raise ValueError("premia must be nonnegative")
        if self.k_vec is not None:
            if len(self.k_vec) != self.n or not all(0 <= k <= 1 for k in self.k_vec):
                raise ValueError("k_vec needs n entries in [0, 1]")
            object.__setattr__(self, "k_vec", tuple(float(k) for k in self.k_vec))
        if self.pi_all is not None:
            if np.isscalar(self.pi_ind):
                want = self.n * float(self.pi_ind)
                if abs(self.pi_all - want) > 1e-9 * max(1.0, want):
                    raise ValueError("pi_all must equal n * pi_ind for homogeneous premia")
        if self.regime == INDEX_CAPPED_HELP and self.index_source is None:
            raise ValueError("IndexCappedHelp needs an index_source ledger")

    @property
    def premiums(self) -> tuple:
        if np.isscalar(self.pi_ind):
            return tuple(float(self.pi_ind) for _ in range(self.n))
        if len(self.pi_ind) != self.n:
            raise ValueError("pi_ind needs n entries")
        return tuple(float(p) for p in self.pi_ind)

    @property
    def premium_total(self) -> float:
        return float(self.pi_all) if self.pi_all is not None else sum(self.premiums)

    @property
    def initial_values(self) -> tuple:
        if np.isscalar(self.v0_ind):
            return tuple(float(self.v0_ind) for _ in range(self.n))
        if len(self.v0_ind) != self.n:
            raise ValueError("v0_ind needs n entries")
        return tuple(float(v) for v in self.v0_ind)

    @property
    def boundaries(self) -> tuple:
        if self.k_vec is not None:
            return self.k_vec
        return tuple(self.policy.k for _ in range(self.n))


@dataclass(frozen=True)
class PoolState:
    t: int
    price: float
    accounts: tuple
    collective: CollectiveAccount
    external_support: float = 0.0  # cumulative units an outside sponsor covered


@dataclass(frozen=True)
class StepReport:
    t: int
    z_star: float
    covered: bool
    claims_total: float
    rows: tuple
    support_added: float


@dataclass(frozen=True)
class SimulationResult:
    mean_terminal_value: float
    penalized_objective: float
    realized_variation: float
    shortfall_freq: float
    external_support: float
    n_paths: int


@dataclass(frozen=True)
class FixedPointResult:
    k_bar: float
    c: float
    iterations: int
    converged: bool
    cycle_flag: bool


@dataclass(frozen=True)
class DpVerdict:
    stationary: bool
    best_profile: tuple
    best_value: float
    best_constant_k: float
    best_constant_value: float
    gap: float
    tol: float


def init_pool(config: PoolConfig) -> PoolState:
    """Fresh pool at t = 0 with values priced at h0."""
    values = config.initial_values
    ks = config.boundaries
    accounts = tuple(
        IndividualAccount(eta=v / config.h0, value=v, k=k, owner_id=i)
        for i, (v, k) in enumerate(zip(values, ks))
    )
    theta0 = config.c0 / config.h0
    return PoolState(0, config.h0, accounts, CollectiveAccount(theta0, config.c0))


def z_star(
    k_vec: Sequence[float],
    eta_vec: Sequence[float],
    theta: float,
    help_frac: float = 0.5,
) -> float:
    """Net-return threshold equivalent to the aggregate coverage indicator.

    The collective can cover the weighted claims of the period exactly when
    the net return rho is at or above the returned value.  Boundaries at 1
    never claim; agents enter the active set only while the collective can
    still cover down to their boundary.  Clamped to [-1, 0].
    """
    ks = np.asarray(k_vec, dtype=float)
    etas = np.asarray(eta_vec, dtype=float)
    if ks.ndim != 1 or ks.shape != etas.shape:
        raise ValueError("k_vec and eta_vec must have equal length")
    if np.any((ks < 0.0) | (ks > 1.0)) or np.any(etas < 0.0) or theta < 0:
        raise ValueError("invalid pool state")
    if help_frac <= 0:
        return -1.0
    buffer = theta / help_frac  # 2*theta at the default help fraction
    # per-boundary weighted shortfall of everyone with a tighter corridor
    short = np.maximum(ks[:, None] - ks[None, :], 0.0) @ etas
    active = buffer * (1.0 - ks) - short >= 0.0
    denom = buffer + float(etas[active].sum())
    if denom <= 0:
        return -1.0
    z = -(buffer + float((etas[active] * ks[active]).sum())) / denom
    return float(min(0.0, max(-1.0, z)))


def _coverage_ok(theta_prev, rho, claims_weighted, help_frac) -> bool:
    # strict: help only when the collective can strictly cover the aggregate claim;
    # a period with no claims has nothing to cover
    if claims_weighted <= 0:
        return True
    return theta_prev * (1.0 + rho) > help_frac * claims_weighted


def step(pool: PoolState, gross_return: float, config: PoolConfig):
    """Advance one period: growth, premium purchases, corridor transfers.

    Returns the new state and a per-agent report.  Transfers are computed from
    the pre-step values and the period's net return; premia buy units at the
    post-growth price.
    """
    if gross_return <= 0:
        raise ValueError("gross return must be positive")
    pol = config.policy
    price = pool.price * gross_return
    rho = gross_return - 1.0
    t_new = pool.t + 1
    prem = config.premiums

    eta_prev = [a.eta for a in pool.accounts]
    v_prev = [a.value for a in pool.accounts]
    ks = [a.k for a in pool.accounts]
    theta_prev = pool.collective.theta

    # growth + premium
    eta = [e + config.gamma * p / price for e, p in zip(eta_prev, prem)]
    values = [e * price for e in eta]
    theta = theta_prev + (1.0 - config.gamma) * config.premium_total / price

    gives = [
        pol.give_frac * v * (rho - k * pol.p) if rho > k * pol.p else 0.0
        for v, k in zip(v_prev, ks)
    ]
    claims = [
        pol.help_frac * v * (-k - rho) if rho < -k else 0.0 for v, k in zip(v_prev, ks)
    ]
    claims_weighted = sum(e * max(-k - rho, 0.0) for e, k in zip(eta_prev, ks))
    covered = _coverage_ok(theta_prev, rho, claims_weighted, pol.help_frac)
    z = z_star(ks, eta_prev, max(theta_prev, 0.0), pol.help_frac)

    if config.regime == ALWAYS_HELP or covered:
        paid = list(claims)
    elif config.regime == NO_HELP_IF_INSUFFICIENT:
        paid = [0.0] * config.n
    else:  # IndexCappedHelp, coverage failed: cap by lagged shares, then settle
        paid = [0.0] * config.n
        claimants = [i for i, c in enumerate(claims) if c > 0]
        if claimants and theta_prev > 0:
            lagged = index_for_pool(config.index_source, t_new)
            weights = [lagged.get(pool.accounts[i].owner_id, 0.0) for i in claimants]
            total_w = sum(weights)
            if total_w > 0:
                batch = ClaimBatch(
                    claims=[claims[i] / price for i in claimants],
                    indices=[w / total_w for w in weights],
                    pool_shares=theta_prev,
                )
                result = settle(batch)
                for i, units in zip(claimants, result.allocations):
                    paid[i] = units * price

    deficit_before = max(0.0, -theta)
    for i in range(config.n):
        net = paid[i] - gives[i]
        values[i] += net
        eta[i] += net / price
    theta += (sum(gives) - sum(paid)) / price
    deficit_after = max(0.0, -theta)
    support_added = max(0.0, deficit_after - deficit_before)
    if config.regime != ALWAYS_HELP and theta < -1e-12:
        raise AssertionError("collective went negative outside AlwaysHelp")

    collective = CollectiveAccount(theta, theta * price)
    accounts = tuple(
        IndividualAccount(eta[i], values[i], ks[i], pool.accounts[i].owner_id)
        for i in range(config.n)
    )
    rows = tuple(
        {
            "t": t_new,
            "owner_id": pool.accounts[i].owner_id,
            "V": values[i],
            "eta": eta[i],
            "transfer_units": (paid[i] - gives[i]) / price,
            "transfer_value": paid[i] - gives[i],
            "help_granted": paid[i] > 0,
            "z_star": z,
            "theta": theta,
            "C": collective.value,
        }
        for i in range(config.n)
    )
    state = PoolState(
        t_new, price, accounts, collective, pool.external_support + support_added
    )
    return state, StepReport(t_new, z, covered, sum(claims), rows, support_added)


def run_path(config: PoolConfig, gross_returns: Sequence[float]):
    """Run one full trajectory; returns the final state and all step reports."""
    pool = init_pool(config)
    reports = []
    for y in gross_returns:
        pool, rep = step(pool, float(y), config)
        reports.append(rep)
    return pool, reports


def _simulate_homogeneous(config: PoolConfig, returns: np.ndarray) -> SimulationResult:
    # all agents identical: track one representative account per path
    pol = config.policy
    n_paths, T = returns.shape
    k = config.boundaries[0]
    pi = config.premiums[0]
    pi_all = config.premium_total
    gp = config.gamma * pi

    price = np.full(n_paths, config.h0)
    v = np.full(n_paths, config.initial_values[0])
    eta = v / config.h0
    theta = np.full(n_paths, config.c0 / config.h0)
    rv = np.zeros(n_paths)
    support = np.zeros(n_paths)
    shortfall_steps = 0

    for t in range(T):
        y = returns[:, t]
        rho = y - 1.0
        price = price * y
        v_prev = v
        eta_prev = eta
        theta_prev = theta

        eta = eta_prev + gp / price
        theta = theta_prev + (1.0 - config.gamma) * pi_all / price

        give = pol.give_frac * v_prev * np.maximum(rho - k * pol.p, 0.0)
        claim = pol.help_frac * v_prev * np.maximum(-k - rho, 0.0)
        claims_weighted = config.n * eta_prev * np.maximum(-k - rho, 0.0)
        covered = (claims_weighted <= 0) | (
            theta_prev * (1.0 + rho) > pol.help_frac * claims_weighted
        )

        if config.regime == ALWAYS_HELP:
            paid = claim
        else:
            paid = np.where(covered, claim, 0.0)
        shortfall_steps += int(np.count_nonzero((claim > 0) & ~covered))

        deficit_before = np.maximum(0.0, -theta)
        net = paid - give
        eta = eta + net / price
        v = eta * price
        theta = theta + config.n * (give - paid) / price
        deficit_after = np.maximum(0.0, -theta)
        support += np.maximum(0.0, deficit_after - deficit_before)
        rv += (v - v_prev - gp) ** 2 / v_prev

    mean_vt = float(v.mean())
    mean_rv = float(rv.mean())
    return SimulationResult(
        mean_terminal_value=mean_vt,
        penalized_objective=mean_vt - pol.alpha * mean_rv,
        realized_variation=mean_rv,
        shortfall_freq=shortfall_steps / (n_paths * T),
        external_support=float(support.mean()),
        n_paths=n_paths,
    )


def _simulate_general(config: PoolConfig, returns: np.ndarray) -> SimulationResult:
    pol = config.policy
    n_paths, T = returns.shape
    gp = [config.gamma * p for p in config.premiums]
    terminal = np.empty(n_paths)
    rv = np.zeros(n_paths)
    support = np.zeros(n_paths)
    shortfall_steps = 0
    for p in range(n_paths):
        pool = init_pool(config)
        path_rv = 0.0
        for t in range(T):
            v_prev = [a.value for a in pool.accounts]
            pool, rep = step(pool, float(returns[p, t]), config)
            path_rv += sum(
                (a.value - vp - g) ** 2 / vp
                for a, vp, g in zip(pool.accounts, v_prev, gp)
            ) / config.n
            if rep.claims_total > 0 and not rep.covered:
                shortfall_steps += 1
        terminal[p] = sum(a.value for a in pool.accounts) / config.n
        rv[p] = path_rv
        support[p] = pool.external_support
    mean_vt = float(terminal.mean())
    mean_rv = float(rv.mean())
    return SimulationResult(
        mean_terminal_value=mean_vt,
        penalized_objective=mean_vt - pol.alpha * mean_rv,
        realized_variation=mean_rv,
        shortfall_freq=shortfall_steps / (n_paths * T),
        external_support=float(support.mean()),
        n_paths=n_paths,
    )


def simulate(
    config: PoolConfig, params: GbmParams, n_paths: int, seed: int
) -> SimulationResult:
    """Monte Carlo wealth statistics over n_paths independent trajectories.

    Homogeneous AlwaysHelp / NoHelpIfInsufficient pools run on a vectorized
    engine; anything else steps each path through the full pool.  Deterministic
    for a fixed seed.
    """
    if n_paths < 1:
        raise ValueError("n_paths must be >= 1")
    returns = sample_return_matrix(params, config.T, n_paths, seed)
    homogeneous = (
        config.regime != INDEX_CAPPED_HELP
        and len(set(config.boundaries)) == 1
        and len(set(config.premiums)) == 1
        and len(set(config.initial_values)) == 1
    )
    if homogeneous:
        return _simulate_homogeneous(config, returns)
    return _simulate_general(config, returns)


def fixed_point_barriers(
    params: GbmParams,
    policy: CorridorPolicy,
    eta_vec: Sequence[float],
    theta: float,
    tol: float = 1e-6,
    max_iter: int = 100,
    grid: int = 2001,
) -> FixedPointResult:
    """Iterate c <- threshold(common k), k <- best response to c, to a fixed point.

    Starts at k = 1 (nobody claims).  A detected 2-cycle returns the iterate
    with the larger gated objective and sets cycle_flag; hitting max_iter
    returns converged = False.
    """
    if tol <= 0:
        raise ValueError("tol must be > 0")
    n = len(eta_vec)
    k_min = admissible_min_k(params, policy)
    if k_min is None:
        raise ValueError("no admissible boundary in [0, 1]")
    k_bar = 1.0
    history = [k_bar]
    c = 0.0
    for it in range(1, max_iter + 1):
        c = z_star([k_bar] * n, eta_vec, theta, policy.help_frac)
        k_next = k_of_c(params, policy, c, grid=grid, k_min=k_min).k_star
        if abs(k_next - k_bar) < tol:
            c_final = z_star([k_next] * n, eta_vec, theta, policy.help_frac)
            return FixedPointResult(k_next, c_final, it, True, False)
        if len(history) >= 2 and abs(k_next - history[-2]) < tol:
            # 2-cycle: keep whichever iterate scores higher on its own gated objective
            cand = []
            for kk in (k_bar, k_next):
                cz = z_star([kk] * n, eta_vec, theta, policy.help_frac)
                cand.append((n_func(params, policy, cz, kk), kk, cz))
            val, kk, cz = max(cand)
            return FixedPointResult(kk, cz, it, True, True)
        history.append(k_next)
        k_bar = k_next
    return FixedPointResult(k_bar, c, max_iter, False, False)


def improvement_bound(
    j: int,
    eta_vec: Sequence[float],
    theta: float,
    policy: CorridorPolicy,
    params: GbmParams,
) -> float:
    """Upper bound on what one agent can gain by deviating from the common barrier.

    Proportional to the density sup-norm and the agent's unit share of the
    total buffer; vanishes as the pool grows.
    """
    if not 0 <= j < len(eta_vec):
        raise ValueError("agent index out of range")
    if policy.help_frac <= 0:
        return 0.0
    _, f_max = density_peak(params)
    weight = policy.help_frac * (1.0 + 2.0 * policy.alpha)
    denom = theta / policy.help_frac + sum(eta_vec)
    if denom <= 0:
        return math.inf
    return f_max * weight * eta_vec[j] / denom


def best_response_gain(
    params: GbmParams,
    policy: CorridorPolicy,
    eta_vec: Sequence[float],
    theta: float,
    j: int,
    k_bar: float,
    grid: int = 201,
) -> float:
    """Empirical best-response improvement of agent j over the common barrier.

    Scans the agent's own boundary while everyone else stays at k_bar; the
    gated objective sees the threshold produced by the deviated pool.
    """
    n = len(eta_vec)
    ks = [k_bar] * n
    common = n_func(params, policy, z_star(ks, eta_vec, theta, policy.help_frac), k_bar)
    best = -math.inf
    for k in np.linspace(0.0, 1.0, grid):
        ks[j] = float(k)
        z = z_star(ks, eta_vec, theta, policy.help_frac)
        best = max(best, n_func(params, policy, z, float(k)))
    ks[j] = k_bar
    return best - common


def dp_check(
    params: GbmParams,
    policy: CorridorPolicy,
    T: int,
    grid: int = 21,
    gamma_pi: float = 0.0,
    v0: float = 1.0,
    tol: float = 1e-9,
) -> DpVerdict:
    """Exhaustively compare per-period boundary profiles against constant ones.

    The expected-value recursion makes the T-period objective a closed form in
    the per-period first and second moments, so profiles on grid^T can be
    enumerated exactly.  Verdict is value-based: stationary means no profile
    beats the best constant profile by more than tol.
    """
    if T < 1 or T > 4:
        raise ValueError("dp_check supports 1 <= T <= 4")
    ks = np.linspace(0.0, 1.0, grid)
    pairs = []
    for k in ks:
        pol_k = replace(policy, k=float(k))
        pairs.append((psi1(params, pol_k), psi2(params, pol_k)))

    def value(profile) -> float:
        m = v0
        pen = 0.0
        for idx in profile:
            s1, s2 = pairs[idx]
            pen += m * s2
            m = gamma_pi + m * (1.0 + s1)
        return m - policy.alpha * pen

    best_profile, best_value = None, -math.inf
    for profile in itertools.product(range(grid), repeat=T):
        v = value(profile)
        if v > best_value:
            best_profile, best_value = profile, v
    best_const_idx, best_const_value = None, -math.inf
    for idx in range(grid):
        v = value((idx,) * T)
        if v > best_const_value:
            best_const_idx, best_const_value = idx, v
    gap = best_value - best_const_value
    return DpVerdict(
        stationary=gap <= tol,
        best_profile=tuple(float(ks[i]) for i in best_profile),
        best_value=best_value,
        best_constant_k=float(ks[best_const_idx]),
        best_constant_value=best_const_value,
        gap=gap,
        tol=tol,
    )
