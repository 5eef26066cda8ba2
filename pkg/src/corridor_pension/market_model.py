"""Lognormal single-period market model.

The fund follows a geometric Brownian motion observed at unit intervals, so the
per-period gross return Y is lognormal with log-mean ``mu`` and log-variance
``sigma**2``.  Everything downstream (boundary functionals, pool simulation)
consumes either the closed-form partial moments computed here or sampled return
paths.

Three evaluation routes are provided and kept deliberately independent so they
can cross-check each other: closed forms (`partial_moment`), adaptive
quadrature (`expect_quad`), and Monte Carlo (`expect_mc`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy import integrate
from scipy.special import ndtr, ndtri

__all__ = [
    "GbmParams",
    "PathSample",
    "density",
    "density_peak",
    "partial_moment",
    "sample_returns",
    "sample_return_matrix",
    "expect_quad",
    "expect_mc",
    "worker_seeds",
]

# lognormal mass beyond 10 sigma is below 1e-20; quadrature windows use this
_Z_CUT = 10.0


@dataclass(frozen=True)
class GbmParams:
    """Per-period log-drift and log-volatility of the fund; x0 is the initial log-price."""

    mu: float
    sigma: float
    x0: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.mu) and math.isfinite(self.sigma) and math.isfinite(self.x0)):
            raise ValueError("GbmParams fields must be finite")
        if self.sigma <= 0:
            raise ValueError("sigma must be > 0")

    @property
    def mean_return(self) -> float:
        """E[Y] = exp(mu + sigma^2/2)."""
        return math.exp(self.mu + 0.5 * self.sigma**2)


@dataclass(frozen=True)
class PathSample:
    """One simulated path of per-period gross returns, tagged with its seed."""

    gross_returns: np.ndarray
    seed: int

    def __post_init__(self):
        gr = np.asarray(self.gross_returns, dtype=float)
        if gr.ndim != 1 or gr.size == 0 or not np.all(gr > 0):
            raise ValueError("gross_returns must be a nonempty 1-d array of positives")
        object.__setattr__(self, "gross_returns", gr)

    def prices(self, h0: float = 1.0) -> np.ndarray:
        """Fund price trajectory H_0..H_T implied by the returns."""
        return h0 * np.concatenate(([1.0], np.cumprod(self.gross_returns)))


def density(params: GbmParams, y):
    """Lognormal density of the gross return, f(y) for y > 0.

    Accepts scalars or arrays; y <= 0 raises.
    """
    arr = np.asarray(y, dtype=float)
    if np.any(arr <= 0):
        raise ValueError("density requires y > 0")
    z = (np.log(arr) - params.mu) / params.sigma
    out = np.exp(-0.5 * z * z) / (arr * params.sigma * math.sqrt(2.0 * math.pi))
    return float(out) if np.isscalar(y) or arr.ndim == 0 else out


def density_peak(params: GbmParams) -> tuple[float, float]:
    """Mode of the return density and the density value there.

    The mode sits at y = exp(mu - sigma^2) with
    f_max = exp(sigma^2/2 - mu) / (sqrt(2 pi) sigma); the sup norm of f feeds
    the best-response improvement bound.
    """
    y_mode = math.exp(params.mu - params.sigma**2)
    f_max = math.exp(0.5 * params.sigma**2 - params.mu) / (math.sqrt(2.0 * math.pi) * params.sigma)
    return y_mode, f_max


def partial_moment(params: GbmParams, order: int, lo: float, hi: float) -> float:
    """E[Y^n 1{lo < Y <= hi}] in closed form, for n in {0, 1, 2}.

    Uses E[Y^n 1{Y <= c}] = exp(n mu + n^2 sigma^2 / 2) * Phi((ln c - mu)/sigma - n sigma).
    `hi` may be inf.  Degenerate or inverted intervals raise.
    """
    if order not in (0, 1, 2):
        raise ValueError("order must be 0, 1 or 2")
    if not lo < hi:
        raise ValueError("need lo < hi")
    if lo < 0:
        raise ValueError("lo must be >= 0")
    return _cum_moment(params, order, hi) - _cum_moment(params, order, lo)


def _cum_moment(params: GbmParams, n: int, c: float) -> float:
    # E[Y^n 1{Y <= c}]; c <= 0 contributes nothing, c = inf gives the full moment
    if c <= 0:
        return 0.0
    scale = math.exp(n * params.mu + 0.5 * n * n * params.sigma**2)
    if math.isinf(c):
        return scale
    z = (math.log(c) - params.mu) / params.sigma - n * params.sigma
    return scale * float(ndtr(z))


def worker_seeds(seed: int, n_workers: int) -> list[np.random.SeedSequence]:
    """Derive independent child seed sequences for partitioned sampling."""
    if n_workers < 1:
        raise ValueError("n_workers must be >= 1")
    return np.random.SeedSequence(seed).spawn(n_workers)


def _standard_normals(rng: np.random.Generator, shape) -> np.ndarray:
    # inverse-CDF draws so any generator with the same uniforms gives the same normals
    return ndtri(rng.random(shape))


def sample_returns(
    params: GbmParams,
    T: int,
    n_paths: int,
    seed: int,
    workers: int = 1,
) -> list[PathSample]:
    """Draw `n_paths` i.i.d. paths of T per-period gross returns exp(mu + sigma Z).

    Deterministic for fixed (seed, workers); paths are partitioned across
    `workers` child streams so a partitioned run reproduces the single-stream
    statistics contract.
    """
    if T < 1 or n_paths < 1:
        raise ValueError("T and n_paths must be >= 1")
    counts = [n_paths // workers + (1 if w < n_paths % workers else 0) for w in range(workers)]
    out: list[PathSample] = []
    for child, count in zip(worker_seeds(seed, workers), counts):
        if count == 0:
            continue
        rng = np.random.default_rng(child)
        z = _standard_normals(rng, (count, T))
        y = np.exp(params.mu + params.sigma * z)
        tag = int(child.entropy) if isinstance(child.entropy, int) else seed
        out.extend(PathSample(gross_returns=row, seed=tag) for row in y)
    return out


def sample_return_matrix(
    params: GbmParams, T: int, n_paths: int, seed: int, workers: int = 1
) -> np.ndarray:
    """Same draws as `sample_returns` but as one (n_paths, T) array."""
    if T < 1 or n_paths < 1:
        raise ValueError("T and n_paths must be >= 1")
    counts = [n_paths // workers + (1 if w < n_paths % workers else 0) for w in range(workers)]
    blocks = []
    for child, count in zip(worker_seeds(seed, workers), counts):
        if count == 0:
            continue
        rng = np.random.default_rng(child)
        blocks.append(np.exp(params.mu + params.sigma * _standard_normals(rng, (count, T))))
    return np.vstack(blocks)


def expect_quad(
    params: GbmParams,
    fn: Callable[[np.ndarray], np.ndarray],
    breakpoints: Sequence[float] = (),
    epsabs: float = 1e-13,
) -> float:
    """Adaptive quadrature of E[fn(Y)].

    Substitutes y = exp(mu + sigma z) so the integral becomes one against the
    standard normal density on |z| <= 10.  `breakpoints` are y-space kinks of
    fn; they are mapped into z and handed to quad as interior points.
    """
    mu, sg = params.mu, params.sigma

    def integrand(z):
        y = np.exp(mu + sg * z)
        return fn(y) * np.exp(-0.5 * z * z) / math.sqrt(2.0 * math.pi)

    pts = sorted(
        (math.log(b) - mu) / sg
        for b in breakpoints
        if b > 0 and abs((math.log(b) - mu) / sg) < _Z_CUT
    )
    val, _ = integrate.quad(
        integrand, -_Z_CUT, _Z_CUT, points=pts or None, epsabs=epsabs, epsrel=1e-12, limit=200
    )
    return val


def expect_mc(
    params: GbmParams,
    fn: Callable[[np.ndarray], np.ndarray],
    n_paths: int,
    seed: int,
    chunk: int = 1_000_000,
) -> tuple[float, float]:
    """Monte Carlo estimate of E[fn(Y)] with its standard error.

    Draws in chunks so n_paths can exceed memory; accumulates count, sum and
    sum of squares only.
    """
    if n_paths < 2:
        raise ValueError("n_paths must be >= 2")
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    remaining, total, total_sq = n_paths, 0.0, 0.0
    while remaining > 0:
        m = min(chunk, remaining)
        y = np.exp(params.mu + params.sigma * _standard_normals(rng, m))
        v = np.asarray(fn(y), dtype=float)
        total += float(v.sum())
        total_sq += float((v * v).sum())
        remaining -= m
    mean = total / n_paths
    var = max(total_sq / n_paths - mean * mean, 0.0)
    return mean, math.sqrt(var / n_paths)
