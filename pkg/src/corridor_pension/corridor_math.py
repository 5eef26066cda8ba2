"""Corridor boundary functionals and their optimizers.

A corridor policy leaves returns inside [-k, k*p] untouched, skims a fraction
of the excess above the upper boundary into the collective account, and tops up
a fraction of the shortfall below the lower boundary from it.  This module
evaluates, in closed form over lognormal partial moments:

* the collective account's expected gain/loss from those transfers
  (`profitability_lhs`, admissibility means it is <= 0),
* the first and second moments of the individual account's transfer-adjusted
  relative change (`psi1`, `psi2`) and the mean-minus-weighted-second-moment
  objective built from them (`m2`),
* the conditional variant `n_func` whose help leg is switched off below a
  cutoff net return c, as seen by an agent in a finite pool,
* the auxiliary convex functional `xi` with its closed-form derivatives.

Optimizers are grid scans with golden-section refinement because the
objectives can be bimodal; near-equal maxima are reported as ties and resolved
by the slope of the transfer-only objective `m1`.

All evaluation is exact up to normal-CDF accuracy; no quadrature or sampling
happens here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .market_model import GbmParams, density, partial_moment

__all__ = [
    "CorridorPolicy",
    "XiParams",
    "OptResult",
    "M1Result",
    "profitability_lhs",
    "admissible_min_k",
    "psi1",
    "psi2",
    "m1",
    "m2",
    "mp_stationary_points",
    "maximize_m1",
    "maximize_m2",
    "h_payoff",
    "n_func",
    "k_of_c",
    "xi",
    "xi_d1",
    "xi_d2",
]

# floating-point floor for admissibility: the exact LHS approaches 0 from below
# once both boundaries leave the support, and roundoff can land at +5e-17
LHS_TOL = 1e-12

# candidates closer than this in k are one plateau, not a tie
TIE_SEPARATION = 1e-3


@dataclass(frozen=True)
class CorridorPolicy:
    """Corridor configuration.

    k is the lower-boundary magnitude, k*p the upper boundary (p >= 1,
    symmetric at p = 1).  give_frac of the excess above the upper boundary is
    handed to the collective; help_frac of the shortfall below -k is claimed
    from it.  alpha weights the second-moment penalty; J is the prefactor
    discount applied to the transfer-only objective m1.
    """

    k: float = 0.0
    p: float = 1.0
    give_frac: float = 0.25
    help_frac: float = 0.5
    alpha: float = 0.0
    J: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.k <= 1.0:
            raise ValueError("k must be in [0, 1]")
        if self.p < 1.0:
            raise ValueError("p must be >= 1")
        if not (0.0 <= self.give_frac <= 1.0 and 0.0 <= self.help_frac <= 1.0):
            raise ValueError("transfer fractions must be in [0, 1]")
        if self.alpha < 0.0:
            raise ValueError("alpha must be >= 0")
        if not 0.0 <= self.J < 1.0:
            raise ValueError("J must be in [0, 1)")


@dataclass(frozen=True)
class XiParams:
    """Divisors of the auxiliary functional; require 1 < a < b."""

    a: float
    b: float

    def __post_init__(self):
        if not 1.0 < self.a < self.b:
            raise ValueError("need 1 < a < b")


@dataclass(frozen=True)
class OptResult:
    """Outcome of a boundary search: maximizer, value, and tie diagnostics."""

    k_star: float
    value: float
    tie_flag: bool
    candidates: tuple[tuple[float, float], ...]


@dataclass(frozen=True)
class M1Result:
    """Two-point comparison for the transfer-only objective."""

    k_star: float
    value: float
    value_at_k_min: float
    value_at_one: float


def _pieces(policy: CorridorPolicy, k: float):
    # affine pieces (lo, hi, const, slope) of g(y) = (y-1) - give*(y-1-kp)+ + help*(1-k-y)+
    L, U = 1.0 - k, 1.0 + k * policy.p
    h, q = policy.help_frac, policy.give_frac
    ps = []
    if L > 0:
        ps.append((0.0, L, h * L - 1.0, 1.0 - h))
    ps.append((max(L, 0.0), U, -1.0, 1.0))
    ps.append((U, math.inf, q * U - 1.0, 1.0 - q))
    return ps


def _moments_of_pieces(params: GbmParams, pieces) -> tuple[float, float]:
    # first and second moment of a piecewise-affine payoff in Y
    m1v = m2v = 0.0
    for lo, hi, c, s in pieces:
        if hi <= lo:
            continue
        p0 = partial_moment(params, 0, lo, hi)
        p1 = partial_moment(params, 1, lo, hi)
        m1v += c * p0 + s * p1
        if s != 0.0 or c != 0.0:
            p2 = partial_moment(params, 2, lo, hi)
            m2v += c * c * p0 + 2.0 * c * s * p1 + s * s * p2
    return m1v, m2v


def psi1(params: GbmParams, policy: CorridorPolicy) -> float:
    """Mean of the transfer-adjusted relative account change over one period."""
    return _moments_of_pieces(params, _pieces(policy, policy.k))[0]


def psi2(params: GbmParams, policy: CorridorPolicy) -> float:
    """Raw second moment of the transfer-adjusted relative account change."""
    return _moments_of_pieces(params, _pieces(policy, policy.k))[1]


def profitability_lhs(params: GbmParams, policy: CorridorPolicy) -> float:
    """Expected net outflow of the collective account per unit of account value.

    help_frac * E[(1-k-Y)+] - give_frac * E[(Y-1-k*p)+]; the policy is
    admissible iff this is <= 0 (the collective does not lose in expectation).
    """
    return _lhs(params, policy, policy.k)


def _lhs(params: GbmParams, policy: CorridorPolicy, k: float) -> float:
    L, U = 1.0 - k, 1.0 + k * policy.p
    short = 0.0
    if L > 0:
        short = L * partial_moment(params, 0, 0.0, L) - partial_moment(params, 1, 0.0, L)
    excess = partial_moment(params, 1, U, math.inf) - U * partial_moment(params, 0, U, math.inf)
    return policy.help_frac * short - policy.give_frac * excess


def _lhs_d(params: GbmParams, policy: CorridorPolicy, k: float) -> float:
    # d/dk of the profitability LHS
    L, U = 1.0 - k, 1.0 + k * policy.p
    f0_below = partial_moment(params, 0, 0.0, L) if L > 0 else 0.0
    f0_above = 1.0 - (partial_moment(params, 0, 0.0, U) if U > 0 else 0.0)
    return -policy.help_frac * f0_below + policy.give_frac * policy.p * f0_above


def admissible_min_k(
    params: GbmParams, policy: CorridorPolicy, tol: float = 1e-6
) -> float | None:
    """Smallest admissible boundary, or None when no k in [0, 1] qualifies.

    Coarse scan for the first sign change, then bisection to `tol`.
    """
    if tol <= 0:
        raise ValueError("tol must be > 0")
    n = 2001
    ks = np.linspace(0.0, 1.0, n)
    vals = [_lhs(params, policy, k) for k in ks]
    for i, v in enumerate(vals):
        if v <= LHS_TOL:
            if i == 0:
                return 0.0
            lo, hi = ks[i - 1], ks[i]
            while hi - lo > tol:
                mid = 0.5 * (lo + hi)
                if _lhs(params, policy, mid) <= LHS_TOL:
                    hi = mid
                else:
                    lo = mid
            return float(hi)
    return None


def m1(params: GbmParams, policy: CorridorPolicy, k: float) -> float:
    """Transfer-only objective: the discounted profitability LHS."""
    return (1.0 - policy.J) * _lhs(params, policy, k)


def m2(params: GbmParams, policy: CorridorPolicy, k: float) -> float:
    """Mean-minus-weighted-second-moment objective at boundary k."""
    s1, s2 = _moments_of_pieces(params, _pieces(policy, k))
    return s1 - policy.alpha * s2


def mp_stationary_points(
    params: GbmParams, policy: CorridorPolicy, grid: int = 4001
) -> list[tuple[float, str]]:
    """Interior stationary points of the unconstrained transfer-only objective.

    Scans the closed-form derivative for sign changes on (0, 1) and polishes
    each bracket with Brent's method.  Returns (k, kind) pairs with kind "max"
    for a +/- derivative change and "min" for -/+.
    """
    ks = np.linspace(0.0, 1.0, grid)
    dv = [_lhs_d(params, policy, k) for k in ks]
    out = []
    for i in range(1, grid):
        a, b = dv[i - 1], dv[i]
        if a == 0.0 or a * b >= 0.0:
            continue
        root = brentq(lambda k: _lhs_d(params, policy, k), ks[i - 1], ks[i], xtol=1e-12)
        out.append((float(root), "max" if a > 0 else "min"))
    return out


def maximize_m1(
    params: GbmParams, policy: CorridorPolicy, k_min: float | None = None
) -> M1Result:
    """Maximize the transfer-only objective over its two boundary candidates.

    The objective is convex-ish in the sense that its maximum over the
    admissible set sits at an endpoint, so only k_min and 1 are compared.
    Raises when no admissible boundary exists.
    """
    if k_min is None:
        k_min = admissible_min_k(params, policy)
    if k_min is None:
        raise ValueError("no admissible boundary in [0, 1]")
    v_lo = m1(params, policy, k_min)
    v_hi = m1(params, policy, 1.0)
    if v_hi >= v_lo:
        return M1Result(1.0, v_hi, v_lo, v_hi)
    return M1Result(float(k_min), v_lo, v_lo, v_hi)


def _m1_slope(params, policy, k, k_min, step=1e-5):
    # central difference, clamped to a forward difference at the left edge
    lo = max(k - step, k_min)
    hi = min(k + step, 1.0)
    if hi <= lo:
        return 0.0
    return (m1(params, policy, hi) - m1(params, policy, lo)) / (hi - lo)


def _maximize_scalar(
    f: Callable[[float], float],
    k_min: float,
    grid: int,
    tol: float,
    tie_tol: float,
    slope_at: Callable[[float], float],
) -> OptResult:
    """Grid scan + bounded local refinement with tie detection.

    Candidates are competitive grid-local maxima; two of them are distinct only
    when the grid dips below both by more than tie_tol in between, so a
    numerically flat plateau collapses to one candidate while genuinely
    separated maxima survive.  Refined candidates within tie_tol of the best
    value and separated by more than TIE_SEPARATION in k count as a tie,
    resolved by the sign of `slope_at` at the smaller maximizer: negative
    slope keeps the smaller one, nonnegative the larger.
    """
    ks = np.linspace(k_min, 1.0, grid)
    vs = np.array([f(k) for k in ks])
    vmax = float(vs.max())
    margin = max(10.0 * tie_tol, 1e-3)

    peaks = [
        i
        for i in range(grid)
        if (i == 0 or vs[i] >= vs[i - 1])
        and (i == grid - 1 or vs[i] >= vs[i + 1])
        and vs[i] >= vmax - margin
    ]

    # merge peaks with no real dip between them: one plateau, one candidate
    merged: list[int] = [peaks[0]]
    for i in peaks[1:]:
        j = merged[-1]
        dip = min(vs[j], vs[i]) - float(vs[j : i + 1].min())
        if dip <= tie_tol:
            if vs[i] > vs[j]:
                merged[-1] = i
        else:
            merged.append(i)

    cands: list[tuple[float, float]] = []
    for best in merged:
        lo = ks[max(best - 1, 0)]
        hi = ks[min(best + 1, grid - 1)]
        if hi > lo:
            res = minimize_scalar(
                lambda k: -f(k), bounds=(lo, hi), method="bounded",
                options={"xatol": max(tol, 1e-12)},
            )
            k_ref, v_ref = float(res.x), float(-res.fun)
            if v_ref < vs[best]:
                k_ref, v_ref = float(ks[best]), float(vs[best])
        else:
            k_ref, v_ref = float(ks[best]), float(vs[best])
        cands.append((k_ref, v_ref))

    cands.sort(key=lambda kv: kv[0])
    best_v = max(v for _, v in cands)
    tied = [(k, v) for k, v in cands if best_v - v <= tie_tol]
    tie = len(tied) >= 2 and (tied[-1][0] - tied[0][0]) > TIE_SEPARATION

    if not tie:
        k_star, value = max(cands, key=lambda kv: kv[1])
        return OptResult(k_star, value, False, tuple(cands))

    k_small, v_small = tied[0]
    k_large, v_large = tied[-1]
    if slope_at(k_small) < 0.0:
        return OptResult(k_small, v_small, True, tuple(cands))
    return OptResult(k_large, v_large, True, tuple(cands))


def maximize_m2(
    params: GbmParams,
    policy: CorridorPolicy,
    k_min: float | None = None,
    grid: int = 2001,
    tol: float = 1e-10,
    tie_tol: float = 1e-6,
) -> OptResult:
    """Maximize the mean-minus-weighted-second-moment objective on [k_min, 1].

    Dense scan plus local refinement; the objective can have two separated
    maxima, in which case near-equal values (within tie_tol) set tie_flag and
    the slope rule of `_maximize_scalar` picks the winner.
    """
    if grid < 100:
        raise ValueError("grid must be >= 100")
    if tol <= 0:
        raise ValueError("tol must be > 0")
    if k_min is None:
        k_min = admissible_min_k(params, policy)
    if k_min is None:
        raise ValueError("no admissible boundary in [0, 1]")
    return _maximize_scalar(
        lambda k: m2(params, policy, k),
        float(k_min), grid, tol, tie_tol,
        lambda k: _m1_slope(params, policy, k, float(k_min)),
    )


def h_payoff(rho, c: float, k: float, policy: CorridorPolicy):
    """Per-period relative change seen by an agent whose help is gated at c.

    rho - give_frac*(rho - k*p)+ + help_frac*(-k - rho)+ * 1{rho > c}; the
    indicator models the pool refusing help when the aggregate return is at or
    below the cutoff.  Vectorized over rho.
    """
    r = np.asarray(rho, dtype=float)
    give = policy.give_frac * np.maximum(r - k * policy.p, 0.0)
    help_ = policy.help_frac * np.maximum(-k - r, 0.0) * (r > c)
    out = r - give + help_
    return float(out) if np.isscalar(rho) else out


def n_func(params: GbmParams, policy: CorridorPolicy, c: float, k: float) -> float:
    """Closed-form E[h - alpha h^2] for the gated payoff of `h_payoff`.

    The gate clips the help leg to gross returns in (1+c, 1-k); breakpoints
    are assembled per segment so the piecewise-affine structure stays exact.
    """
    if not -1.0 <= c <= 0.0:
        raise ValueError("c must be in [-1, 0]")
    if not 0.0 <= k <= 1.0:
        raise ValueError("k must be in [0, 1]")
    L, U = 1.0 - k, 1.0 + k * policy.p
    lo_help = 1.0 + c
    cuts = sorted({0.0, L, U, lo_help} | {math.inf})
    h, q = policy.help_frac, policy.give_frac
    pieces = []
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        if hi <= lo or hi <= 0:
            continue
        mid = lo + 0.5 * min(hi - lo, 1.0)
        const, slope = -1.0, 1.0
        if mid > U:
            const, slope = q * U - 1.0, 1.0 - q
        if lo_help < mid < L:
            const += h * L
            slope -= h
        pieces.append((max(lo, 0.0), hi, const, slope))
    s1, s2 = _moments_of_pieces(params, pieces)
    return s1 - policy.alpha * s2


def k_of_c(
    params: GbmParams,
    policy: CorridorPolicy,
    c: float,
    grid: int = 2001,
    tol: float = 1e-10,
    k_min: float | None = None,
    tie_tol: float = 1e-6,
) -> OptResult:
    """Best-response boundary against a fixed help cutoff c.

    Same search machinery as `maximize_m2` applied to the gated objective.
    """
    if grid < 100:
        raise ValueError("grid must be >= 100")
    if tol <= 0:
        raise ValueError("tol must be > 0")
    if k_min is None:
        k_min = admissible_min_k(params, policy)
    if k_min is None:
        raise ValueError("no admissible boundary in [0, 1]")
    return _maximize_scalar(
        lambda k: n_func(params, policy, c, k),
        float(k_min), grid, tol, tie_tol,
        lambda k: _m1_slope(params, policy, k, float(k_min)),
    )


def xi(params: GbmParams, xp: XiParams, k: float) -> float:
    """E[rho + (1/a)(-rho-k)+ - (1/b)(rho-k)+] with symmetric boundaries."""
    if not 0.0 <= k <= 1.0:
        raise ValueError("k must be in [0, 1]")
    L, U = 1.0 - k, 1.0 + k
    mean_rho = partial_moment(params, 1, 0.0, math.inf) - 1.0
    short = 0.0
    if L > 0:
        short = L * partial_moment(params, 0, 0.0, L) - partial_moment(params, 1, 0.0, L)
    excess = partial_moment(params, 1, U, math.inf) - U * partial_moment(params, 0, U, math.inf)
    return mean_rho + short / xp.a - excess / xp.b


def xi_d1(params: GbmParams, xp: XiParams, k: float) -> float:
    """First derivative of `xi` in k."""
    L, U = 1.0 - k, 1.0 + k
    below = partial_moment(params, 0, 0.0, L) if L > 0 else 0.0
    above = 1.0 - partial_moment(params, 0, 0.0, U)
    return -below / xp.a + above / xp.b


def xi_d2(params: GbmParams, xp: XiParams, k: float) -> float:
    """Second derivative of `xi` in k; positive at 0 whenever a < b."""
    L, U = 1.0 - k, 1.0 + k
    f_lo = density(params, L) if L > 0 else 0.0
    return f_lo / xp.a - density(params, U) / xp.b
