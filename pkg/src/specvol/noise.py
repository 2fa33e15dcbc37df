"""Microstructure noise models and the observed series Y = X + eps."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError
from .sdesim import Grid, LatentPath, as_generator


@dataclass(frozen=True)
class NoiseSpec:
    """Stationary additive noise: MA(q) driven by Gaussian innovations.

    `sig2` is the innovation variance (sigma^2_eta); white noise is the q = 0
    case, in which sig2 is simply the marginal noise variance sigma^2_eps.
    """

    sig2: float
    theta: tuple = ()

    def __post_init__(self):
        if not (math.isfinite(self.sig2) and self.sig2 >= 0):
            raise InvalidParameterError(f"noise variance must be >= 0, got {self.sig2}")
        if not all(math.isfinite(t) for t in self.theta):
            raise InvalidParameterError("MA coefficients must be finite")
        object.__setattr__(self, "theta", tuple(float(t) for t in self.theta))

    @classmethod
    def white(cls, sig2_eps: float) -> "NoiseSpec":
        return cls(sig2_eps)

    @classmethod
    def ma(cls, theta, sig2_eta: float) -> "NoiseSpec":
        theta = tuple(theta)
        if len(theta) < 1:
            raise InvalidParameterError("MA noise needs q >= 1 coefficients")
        return cls(sig2_eta, theta)

    @property
    def q(self) -> int:
        return len(self.theta)

    @property
    def marginal_variance(self) -> float:
        """Stationary variance sig2 * (1 + sum theta_k^2)."""
        return self.sig2 * (1.0 + sum(t * t for t in self.theta))

    def to_dict(self) -> dict:
        if self.q == 0:
            return {"kind": "white", "sig2_eps": self.sig2}
        return {"kind": "ma", "sig2_eta": self.sig2, "theta": list(self.theta)}

    @classmethod
    def from_dict(cls, d: dict) -> "NoiseSpec":
        kind = d.get("kind")
        if kind == "white":
            return cls.white(d["sig2_eps"])
        if kind == "ma":
            return cls.ma(d["theta"], d["sig2_eta"])
        raise InvalidParameterError(f"unknown noise kind: {kind!r}")


@dataclass(frozen=True)
class ObservedSeries:
    """Observed (noisy) samples y_j = x_j + eps_j on a regular grid."""

    grid: Grid
    y: np.ndarray

    def __post_init__(self):
        if len(self.y) != self.grid.n + 1:
            raise InvalidParameterError("observed series must have length N+1")
        if not np.all(np.isfinite(self.y)):
            raise InvalidParameterError("observed series contains non-finite values")


def sample_noise(spec: NoiseSpec, n: int, seed) -> np.ndarray:
    """Draw n stationary noise values.

    For MA(q) the q lagged innovations needed at index 0 are drawn as extra
    burn-in variates, so the output is exactly stationary from the start.
    The first n innovations are shared with the white case, which makes an
    all-zero theta reproduce white noise draw-for-draw under the same seed.
    """
    if n < 1:
        raise InvalidParameterError(f"need n >= 1, got {n}")
    rng = as_generator(seed)
    sd = math.sqrt(spec.sig2)
    eta = sd * rng.standard_normal(n + spec.q)
    if spec.q == 0:
        return eta
    # Lagged pre-sample innovations come from the tail of the draw so that
    # eta[:n] keeps the same role it has in the white case.
    ext = np.concatenate([eta[n:], eta[:n]])
    coeffs = np.concatenate([[1.0], spec.theta])
    return np.convolve(ext, coeffs)[spec.q : spec.q + n]


def observe(path: LatentPath, spec: NoiseSpec, seed) -> ObservedSeries:
    """Superimpose noise on a latent path; the seed stream is the caller's
    responsibility and must be disjoint from the path's driver."""
    eps = sample_noise(spec, path.grid.n + 1, seed)
    return ObservedSeries(path.grid, path.x + eps)
