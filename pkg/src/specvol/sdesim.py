"""Simulation of latent Ito processes on a regular grid.

All rates are annualized: one trading day of 23,400 seconds maps to
T = 1/252 years, so a 1-second sampling interval is dt = 1/(252 * 23400).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidParameterError

# One 6.5h trading day expressed in years.
TRADING_DAY_YEARS = 1.0 / 252.0
SECONDS_PER_TRADING_DAY = 23_400


def as_generator(seed) -> np.random.Generator:
    """Accept an int, SeedSequence or Generator and return a Generator."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


@dataclass(frozen=True)
class Grid:
    """Regular sampling grid with N increments over [0, T] (T in years)."""

    n: int
    t: float

    def __post_init__(self):
        if self.n < 4 or self.n % 2 != 0:
            raise InvalidParameterError(f"grid needs n >= 4 and even, got {self.n}")
        if not (math.isfinite(self.t) and self.t > 0):
            raise InvalidParameterError(f"grid duration must be positive, got {self.t}")

    @property
    def dt(self) -> float:
        return self.t / self.n

    def times(self) -> np.ndarray:
        """Sampling times t_j = j * dt for j = 0..N."""
        return np.arange(self.n + 1) * self.dt


@dataclass(frozen=True)
class HestonParams:
    """Square-root stochastic volatility model parameters (annualized).

    Defaults are the standard benchmark values: drift 5%/year, variance
    mean-reverting at rate 5 to a long-run level of 0.04 with vol-of-vol
    0.5 and leverage correlation -0.5.
    """

    mu: float = 0.05
    kappa: float = 5.0
    alpha: float = 0.04
    gamma: float = 0.5
    rho: float = -0.5
    x0: float = 0.0
    nu0: float = 0.04

    def __post_init__(self):
        vals = (self.mu, self.kappa, self.alpha, self.gamma, self.rho, self.x0, self.nu0)
        if not all(math.isfinite(v) for v in vals):
            raise InvalidParameterError("non-finite Heston parameter")
        if self.kappa <= 0 or self.alpha <= 0 or self.gamma < 0:
            raise InvalidParameterError("kappa, alpha must be > 0 and gamma >= 0")
        if abs(self.rho) > 1:
            raise InvalidParameterError(f"|rho| must be <= 1, got {self.rho}")
        if self.nu0 < 0:
            raise InvalidParameterError(f"nu0 must be >= 0, got {self.nu0}")

    @property
    def feller_satisfied(self) -> bool:
        """Whether 2*kappa*alpha >= gamma^2 (variance stays positive)."""
        return 2.0 * self.kappa * self.alpha >= self.gamma**2


@dataclass(frozen=True)
class LatentPath:
    """A simulated latent path X and its spot variance, both length N+1."""

    grid: Grid
    x: np.ndarray
    spot_var: np.ndarray = field(repr=False)

    def __post_init__(self):
        n = self.grid.n
        if len(self.x) != n + 1 or len(self.spot_var) != n + 1:
            raise InvalidParameterError("path arrays must have length N+1")
        if np.any(self.spot_var < 0):
            raise InvalidParameterError("spot variance must be nonnegative")


def simulate_heston(p: HestonParams, g: Grid, seed) -> LatentPath:
    """Euler path of the Heston model with full truncation of the variance.

    The two Brownian drivers are correlated via W = rho*B + sqrt(1-rho^2)*Bperp.
    The negative part of nu is clipped to zero inside both the drift and the
    diffusion evaluation, and the recorded spot variance is the truncated value.
    """
    rng = as_generator(seed)
    n, dt = g.n, g.dt
    sqdt = math.sqrt(dt)
    z = rng.standard_normal((n, 2))
    zb = z[:, 0]
    zw = p.rho * zb + math.sqrt(1.0 - p.rho**2) * z[:, 1]

    x = np.empty(n + 1)
    nu_trunc = np.empty(n + 1)
    xj = p.x0
    nu = p.nu0
    x[0] = xj
    nu_trunc[0] = max(nu, 0.0)
    for j in range(n):
        nup = nu if nu > 0.0 else 0.0
        vol = math.sqrt(nup) * sqdt
        xj += (p.mu - 0.5 * nup) * dt + vol * zb[j]
        nu += p.kappa * (p.alpha - nup) * dt + p.gamma * vol * zw[j]
        x[j + 1] = xj
        nu_trunc[j + 1] = nu if nu > 0.0 else 0.0
    return LatentPath(g, x, nu_trunc)


def simulate_brownian(sig2: float, g: Grid, seed) -> LatentPath:
    """Driftless diffusion dX = sqrt(2*sig2) dB; quadratic variation rate 2*sig2."""
    if not (math.isfinite(sig2) and sig2 >= 0):
        raise InvalidParameterError(f"sig2 must be >= 0, got {sig2}")
    rng = as_generator(seed)
    z = rng.standard_normal(g.n)
    inc = math.sqrt(2.0 * sig2 * g.dt) * z
    x = np.concatenate(([0.0], np.cumsum(inc)))
    spot = np.full(g.n + 1, 2.0 * sig2)
    return LatentPath(g, x, spot)


def simulate_ou(sig2: float, g: Grid, seed, theta: float = -1.0) -> LatentPath:
    """Euler path of dX = theta*X dt + sqrt(2*sig2) dB.

    theta defaults to -1 (mean reverting); theta = 0 reduces to
    simulate_brownian with the same seed.
    """
    if not (math.isfinite(sig2) and sig2 >= 0):
        raise InvalidParameterError(f"sig2 must be >= 0, got {sig2}")
    if not math.isfinite(theta):
        raise InvalidParameterError("theta must be finite")
    rng = as_generator(seed)
    n, dt = g.n, g.dt
    z = rng.standard_normal(n)
    scale = math.sqrt(2.0 * sig2 * dt)
    x = np.empty(n + 1)
    xj = 0.0
    x[0] = xj
    for j in range(n):
        xj += theta * xj * dt + scale * z[j]
        x[j + 1] = xj
    spot = np.full(n + 1, 2.0 * sig2)
    return LatentPath(g, x, spot)


def true_integrated_volatility(path: LatentPath) -> float:
    """Riemann-sum ground truth (T/N) * sum_{j=1..N} spot_var[j]."""
    g = path.grid
    return float(g.t / g.n * path.spot_var[1:].sum())
